#pragma once

#include "aotplan/mdp.hpp"

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

namespace aotplan {

class ResourceLimitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// V(s,d) and Q(a,s,d) over the finite-horizon nodes reachable from a root.
template <MdpModel M>
struct ValueTable {
    using State = typename M::State;
    using NodeId = NodeIdOf<M>;

    std::unordered_map<NodeId, double, NodeHashOf<M>> values;
    std::unordered_map<NodeId, std::vector<std::pair<ActionId, double>>, NodeHashOf<M>> q_values;

    double value(const State& s, int d) const { return values.at(NodeId{s, d}); }
    bool contains(const State& s, int d) const { return values.count(NodeId{s, d}) != 0; }
};

template <MdpModel M>
struct BackwardInductionResult {
    ValueTable<M> table;
    std::unordered_map<NodeIdOf<M>, ActionId, NodeHashOf<M>> policy;
    double root_value = 0.0;
    std::size_t nodes = 0;
};

/// Exhaustive finite-horizon Bellman recursion from (s0, H).
///
/// V(s,0) = 0, terminal goals are 0, dead-ends are D. Ties go to the first
/// minimizing action in the model's order. Throws ResourceLimitError when
/// more than `max_nodes` distinct (s,d) nodes are reachable.
template <MdpModel M>
BackwardInductionResult<M> backward_induction(const M& model, const typename M::State& s0,
                                              int horizon, std::size_t max_nodes = 2'000'000) {
    using State = typename M::State;
    if (horizon < 0) {
        throw std::invalid_argument("backward_induction: negative horizon");
    }
    BackwardInductionResult<M> result;
    auto& values = result.table.values;
    const double gamma = model.gamma();

    auto solve = [&](auto&& self, const State& s, int d) -> double {
        NodeIdOf<M> id{s, d};
        if (auto it = values.find(id); it != values.end()) {
            return it->second;
        }
        if (values.size() >= max_nodes) {
            throw ResourceLimitError("backward_induction: more than " + std::to_string(max_nodes) +
                                     " reachable nodes");
        }
        double v = 0.0;
        if (d == 0) {
            v = 0.0;
        } else if (is_terminal(model, s)) {
            v = terminal_value(model, s);
        } else {
            std::vector<std::pair<ActionId, double>> qs;
            ActionId best = -1;
            double best_q = std::numeric_limits<double>::infinity();
            for (ActionId a : model.actions(s)) {
                double q = model.cost(s, a);
                double future = 0.0;
                for (const auto& o : model.outcomes(s, a)) {
                    future += o.probability * self(self, o.state, d - 1);
                }
                q += gamma * future;
                qs.emplace_back(a, q);
                if (q < best_q) {
                    best_q = q;
                    best = a;
                }
            }
            v = best_q;
            result.policy.emplace(id, best);
            result.table.q_values.emplace(id, std::move(qs));
        }
        values.emplace(std::move(id), v);
        return v;
    };

    result.root_value = solve(solve, s0, horizon);
    result.nodes = values.size();
    return result;
}

}  // namespace aotplan
