#pragma once

#include "aotplan/backward_induction.hpp"
#include "aotplan/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <limits>
#include <memory>
#include <queue>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace aotplan {

template <class State>
HeuristicFn<State> zero_heuristic() {
    return [](const State&, int) { return 0.0; };
}

/// h_k(s,d) = k · h(s,d).
template <class State>
HeuristicFn<State> scaled_heuristic(HeuristicFn<State> h, double factor) {
    if (!(factor > 0.0)) {
        throw std::invalid_argument("scaled_heuristic: factor must be positive");
    }
    if (factor == 1.0) {
        return h;
    }
    return [h = std::move(h), factor](const State& s, int d) { return factor * h(s, d); };
}

/// Uniformly random choice over A(s).
template <MdpModel M>
BasePolicy<typename M::State> random_policy(const M& model) {
    return [&model](const typename M::State& s, int, Rng& rng) {
        auto acts = model.actions(s);
        return acts[uniform_index(rng, acts.size())];
    };
}

/// One-step lookahead score c(a,s) + γ Σ P_a(s'|s) h(s', d−1).
template <MdpModel M>
double greedy_score(const M& model, const HeuristicFn<typename M::State>& h,
                    const typename M::State& s, ActionId a, int d) {
    double future = 0.0;
    for (const auto& o : model.outcomes(s, a)) {
        double hv = 0.0;
        if (d - 1 > 0) {
            hv = is_terminal(model, o.state) ? terminal_value(model, o.state) : h(o.state, d - 1);
        }
        future += o.probability * hv;
    }
    return model.cost(s, a) + model.gamma() * future;
}

/// π_h(s) = argmin_a [c(a,s) + γ Σ P_a(s'|s) h(s')], ties broken uniformly at random.
/// With h ≡ 0 and equal action costs this is the uniform random policy.
template <MdpModel M>
BasePolicy<typename M::State> greedy_base_policy(const M& model, HeuristicFn<typename M::State> h) {
    return [&model, h = std::move(h)](const typename M::State& s, int d, Rng& rng) {
        auto acts = model.actions(s);
        double best = std::numeric_limits<double>::infinity();
        std::vector<ActionId> ties;
        for (ActionId a : acts) {
            double score = greedy_score(model, h, s, a, std::max(d, 1));
            if (score < best - 1e-12) {
                best = score;
                ties.assign(1, a);
            } else if (score <= best + 1e-12) {
                ties.push_back(a);
            }
        }
        return ties[uniform_index(rng, ties.size())];
    };
}

/// Sampled discounted cost of following `policy` for at most d steps from s.
/// Stops at terminals; a dead-end contributes the discounted penalty D.
template <MdpModel M>
double rollout_cost(const M& model, const BasePolicy<typename M::State>& policy,
                    typename M::State s, int d, Rng& rng) {
    double total = 0.0;
    double discount = 1.0;
    const double gamma = model.gamma();
    for (int left = d; left > 0; --left) {
        if (is_terminal(model, s)) {
            total += discount * terminal_value(model, s);
            return total;
        }
        ActionId a = policy(s, left, rng);
        total += discount * model.cost(s, a);
        s = sample_successor(model, s, a, rng);
        discount *= gamma;
    }
    // d steps used up: a node (s,0) is worth 0 even when s is a dead-end
    return total;
}

/// Min-min heuristic: optimal cost in the relaxation where every action may
/// pick its cheapest successor.
///
/// Two views are kept. `state_value(s)` is the undiscounted relaxed
/// cost-to-goal from a uniform-cost search (D when no goal is reachable).
/// `operator()(s, d)` is the depth-bounded, discounted relaxed value, which
/// never exceeds the optimal finite-horizon value V*(s,d) and tends to
/// `state_value(s)` as d grows when γ = 1. Both are computed once over the
/// states reachable from the root and are read-only afterwards.
template <MdpModel M>
class MinMinHeuristic {
public:
    using State = typename M::State;

    MinMinHeuristic(const M& model, const State& root, int max_depth,
                    std::size_t max_states = 2'000'000) {
        enumerate(model, root, max_states);
        build_layers(model, max_depth);
        build_state_values(model);
    }

    double operator()(const State& s, int d) const {
        auto it = index_.find(s);
        if (it == index_.end() || d <= 0) {
            return 0.0;
        }
        int layer = std::min(d, static_cast<int>(layers_.size()) - 1);
        return layers_[static_cast<std::size_t>(layer)][it->second];
    }

    double state_value(const State& s) const {
        auto it = index_.find(s);
        if (it == index_.end()) {
            return penalty_;
        }
        return state_values_[it->second];
    }

    std::size_t num_states() const { return states_.size(); }

    /// Builds the tables once and wraps them as a shareable h(s,d).
    static HeuristicFn<State> make(const M& model, const State& root, int max_depth) {
        auto self = std::make_shared<const MinMinHeuristic>(model, root, max_depth);
        return [self](const State& s, int d) { return (*self)(s, d); };
    }

private:
    struct RelaxedAction {
        double cost;
        std::vector<std::size_t> successors;
    };

    void enumerate(const M& model, const State& root, std::size_t max_states) {
        penalty_ = model.dead_end_penalty();
        std::deque<std::size_t> frontier;
        auto intern = [&](const State& s) -> std::size_t {
            auto [it, inserted] = index_.emplace(s, states_.size());
            if (inserted) {
                if (states_.size() >= max_states) {
                    throw ResourceLimitError("min-min heuristic: state space too large");
                }
                states_.push_back(s);
                frontier.push_back(it->second);
            }
            return it->second;
        };
        intern(root);
        while (!frontier.empty()) {
            std::size_t i = frontier.front();
            frontier.pop_front();
            State s = states_[i];
            std::vector<RelaxedAction> acts;
            if (!is_terminal(model, s)) {
                for (ActionId a : model.actions(s)) {
                    RelaxedAction ra{model.cost(s, a), {}};
                    for (const auto& o : model.outcomes(s, a)) {
                        ra.successors.push_back(intern(o.state));
                    }
                    acts.push_back(std::move(ra));
                }
            }
            if (relaxed_.size() <= i) {
                relaxed_.resize(i + 1);
            }
            relaxed_[i] = std::move(acts);
        }
        relaxed_.resize(states_.size());
    }

    void build_layers(const M& model, int max_depth) {
        const std::size_t n = states_.size();
        const double gamma = model.gamma();
        layers_.assign(1, std::vector<double>(n, 0.0));
        for (int d = 1; d <= std::max(max_depth, 1); ++d) {
            const auto& prev = layers_.back();
            std::vector<double> cur(n, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                const State& s = states_[i];
                if (is_terminal(model, s)) {
                    cur[i] = terminal_value(model, s);
                    continue;
                }
                double best = std::numeric_limits<double>::infinity();
                for (const auto& ra : relaxed_[i]) {
                    double m = std::numeric_limits<double>::infinity();
                    for (std::size_t j : ra.successors) {
                        m = std::min(m, prev[j]);
                    }
                    best = std::min(best, ra.cost + gamma * m);
                }
                cur[i] = best;
            }
            layers_.push_back(std::move(cur));
        }
    }

    void build_state_values(const M& model) {
        const std::size_t n = states_.size();
        std::vector<std::vector<std::pair<std::size_t, double>>> reverse(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (const auto& ra : relaxed_[i]) {
                for (std::size_t j : ra.successors) {
                    reverse[j].emplace_back(i, ra.cost);
                }
            }
        }
        const double inf = std::numeric_limits<double>::infinity();
        std::vector<double> dist(n, inf);
        using Item = std::pair<double, std::size_t>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
        for (std::size_t i = 0; i < n; ++i) {
            if (model.is_goal(states_[i])) {
                dist[i] = 0.0;
                open.emplace(0.0, i);
            }
        }
        while (!open.empty()) {
            auto [g, j] = open.top();
            open.pop();
            if (g > dist[j]) {
                continue;
            }
            for (auto [i, c] : reverse[j]) {
                if (g + c < dist[i]) {
                    dist[i] = g + c;
                    open.emplace(dist[i], i);
                }
            }
        }
        for (auto& x : dist) {
            if (x == inf) {
                x = penalty_;
            }
        }
        state_values_ = std::move(dist);
    }

    std::vector<State> states_;
    std::unordered_map<State, std::size_t, typename M::StateHash> index_;
    std::vector<std::vector<RelaxedAction>> relaxed_;
    std::vector<std::vector<double>> layers_;
    std::vector<double> state_values_;
    double penalty_ = 0.0;
};

}  // namespace aotplan
