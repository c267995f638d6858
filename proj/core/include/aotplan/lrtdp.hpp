#pragma once

#include "aotplan/mdp.hpp"
#include "aotplan/plan_result.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace aotplan {

struct LrtdpConfig {
    double epsilon = 1e-4;
    Budget budget;
    std::uint64_t seed = 0;
    /// Keep the value table between successive plan() calls.
    bool retain_table = false;
};

/// Labeled RTDP over the finite-horizon nodes (s,d), used as an anytime
/// action selector. Values are initialised lazily from h(s,d).
template <MdpModel M>
class Lrtdp {
public:
    using State = typename M::State;
    using NodeId = NodeIdOf<M>;

    struct Entry {
        double value = 0.0;
        bool solved = false;
        bool terminal = false;
    };

    Lrtdp(const M& model, HeuristicFn<State> h, LrtdpConfig config)
        : model_(&model), h_(std::move(h)), config_(config), rng_(config.seed) {
        if (!(config_.epsilon >= 0.0)) {
            throw std::invalid_argument("lrtdp: epsilon must be >= 0");
        }
        if (config_.budget.iterations && *config_.budget.iterations == 0) {
            throw std::invalid_argument("lrtdp: budget must be >= 1 trial");
        }
    }

    PlanResult plan(const State& s0, int horizon) {
        if (horizon < 1) {
            throw std::invalid_argument("lrtdp: horizon must be >= 1");
        }
        if (is_terminal(*model_, s0)) {
            throw std::invalid_argument("lrtdp: initial state is terminal");
        }
        if (!config_.retain_table) {
            table_.clear();
        }
        Stopwatch clock;
        NodeId root{s0, horizon};
        std::size_t trials = 0;
        while (!entry(root).solved) {
            if (config_.budget.iterations && trials >= *config_.budget.iterations) {
                break;
            }
            if (config_.budget.time_ms && trials > 0 && clock.millis() >= *config_.budget.time_ms) {
                break;
            }
            trial(root);
            ++trials;
        }
        PlanResult res;
        auto qs = q_values(root);
        res.root_q = qs;
        res.action = greedy(qs);
        res.root_value = entry(root).value;
        res.stats.iterations = trials;
        res.stats.nodes_created = table_.size();
        res.stats.wall_time_s = clock.seconds();
        return res;
    }

    bool solved(const State& s, int d) { return entry(NodeId{s, d}).solved; }
    double value(const State& s, int d) { return entry(NodeId{s, d}).value; }
    void set_value(const State& s, int d, double v) { entry(NodeId{s, d}).value = v; }
    std::size_t table_size() const { return table_.size(); }

    /// DFS over the greedy graph below `id`. Labels every visited node solved
    /// when all residuals are ≤ ε; otherwise updates the nodes whose residual
    /// exceeded ε and returns false.
    bool check_solved(const NodeId& id) {
        bool rv = true;
        std::vector<NodeId> open;
        std::vector<NodeId> closed;
        std::unordered_set<NodeId, NodeHashOf<M>> seen;
        std::vector<NodeId> over;
        if (!entry(id).solved) {
            open.push_back(id);
            seen.insert(id);
        }
        while (!open.empty()) {
            NodeId cur = open.back();
            open.pop_back();
            closed.push_back(cur);
            auto qs = q_values(cur);
            ActionId a = greedy(qs);
            double best = best_q(qs);
            if (std::abs(entry(cur).value - best) > config_.epsilon) {
                rv = false;
                over.push_back(cur);
                continue;
            }
            for (const auto& o : model_->outcomes(cur.state, a)) {
                NodeId next{o.state, cur.depth - 1};
                if (!entry(next).solved && seen.insert(next).second) {
                    open.push_back(next);
                }
            }
        }
        if (rv) {
            for (const auto& c : closed) {
                entry(c).solved = true;
            }
        } else {
            for (auto it = over.rbegin(); it != over.rend(); ++it) {
                update(*it);
            }
        }
        return rv;
    }

    /// V(s,d) ← min_a Q(a,s,d). Returns the greedy action.
    ActionId update(const NodeId& id) {
        auto qs = q_values(id);
        entry(id).value = best_q(qs);
        return greedy(qs);
    }

private:
    void trial(const NodeId& root) {
        std::vector<NodeId> visited;
        NodeId cur = root;
        while (!entry(cur).solved) {
            visited.push_back(cur);
            ActionId a = update(cur);
            cur = NodeId{sample_successor(*model_, cur.state, a, rng_), cur.depth - 1};
        }
        while (!visited.empty()) {
            NodeId n = visited.back();
            visited.pop_back();
            if (!check_solved(n)) {
                break;
            }
        }
    }

    Entry& entry(const NodeId& id) {
        auto it = table_.find(id);
        if (it != table_.end()) {
            return it->second;
        }
        Entry e;
        if (id.depth == 0) {
            e.value = 0.0;
            e.solved = e.terminal = true;
        } else if (is_terminal(*model_, id.state)) {
            e.value = terminal_value(*model_, id.state);
            e.solved = e.terminal = true;
        } else {
            e.value = h_(id.state, id.depth);
        }
        return table_.emplace(id, e).first->second;
    }

    std::vector<std::pair<ActionId, double>> q_values(const NodeId& id) {
        std::vector<std::pair<ActionId, double>> qs;
        const double gamma = model_->gamma();
        for (ActionId a : model_->actions(id.state)) {
            double future = 0.0;
            for (const auto& o : model_->outcomes(id.state, a)) {
                future += o.probability * entry(NodeId{o.state, id.depth - 1}).value;
            }
            qs.emplace_back(a, model_->cost(id.state, a) + gamma * future);
        }
        return qs;
    }

    static double best_q(const std::vector<std::pair<ActionId, double>>& qs) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& [a, q] : qs) {
            best = std::min(best, q);
        }
        return best;
    }

    static ActionId greedy(const std::vector<std::pair<ActionId, double>>& qs) {
        ActionId best_a = -1;
        double best = std::numeric_limits<double>::infinity();
        for (const auto& [a, q] : qs) {
            if (q < best) {
                best = q;
                best_a = a;
            }
        }
        return best_a;
    }

    const M* model_;
    HeuristicFn<State> h_;
    LrtdpConfig config_;
    Rng rng_;
    std::unordered_map<NodeId, Entry, NodeHashOf<M>> table_;
};

template <MdpModel M>
PlanResult lrtdp_plan(const M& model, const typename M::State& s0, int horizon,
                      HeuristicFn<typename M::State> h, const LrtdpConfig& config) {
    Lrtdp<M> planner(model, std::move(h), config);
    return planner.plan(s0, horizon);
}

}  // namespace aotplan
