#pragma once

#include "aotplan/heuristics.hpp"
#include "aotplan/mdp.hpp"
#include "aotplan/plan_result.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace aotplan {

enum class ExplorationMode { fixed, adaptive };

struct UctConfig {
    Budget budget;
    ExplorationMode exploration = ExplorationMode::adaptive;
    /// Exploration constant in fixed mode.
    double c = 1.0;
    std::uint64_t seed = 0;
};

/// C √(2 ln N(s,d) / N(a,s,d)), +∞ for untried actions. In adaptive mode C = |Q(a,s,d)|.
inline double uct_bonus(std::uint32_t node_visits, std::uint32_t action_visits, double q,
                        const UctConfig& config) {
    if (action_visits == 0) {
        return std::numeric_limits<double>::infinity();
    }
    double c = config.exploration == ExplorationMode::adaptive ? std::abs(q) : config.c;
    return c * std::sqrt(2.0 * std::log(static_cast<double>(node_visits)) /
                         static_cast<double>(action_visits));
}

/// Incremental mean: Q + (nv − Q)/N with N already counting the new sample.
inline double mc_backup(double q, std::uint32_t visits_after_increment, double nv) {
    return q + (nv - q) / static_cast<double>(visits_after_increment);
}

/// UCT over a duplicate-merged store of (s,d) nodes, in cost form: actions are
/// chosen by argmin [Q − bonus].
template <MdpModel M>
class Uct {
public:
    using State = typename M::State;

    struct Node {
        HorizonNodeId<State> id;
        std::vector<ActionId> actions;
        std::vector<double> q;
        std::vector<std::uint32_t> visits;
        std::uint32_t total = 0;
    };

    /// Called after every Monte-Carlo backup with (node index, action slot, nv).
    using BackupObserver = std::function<void(std::size_t, std::size_t, double)>;

    Uct(const M& model, BasePolicy<State> base_policy, UctConfig config)
        : model_(&model), policy_(std::move(base_policy)), config_(config), rng_(config.seed) {
        if (config_.budget.iterations && *config_.budget.iterations == 0) {
            throw std::invalid_argument("uct: budget must be >= 1");
        }
        if (config_.exploration == ExplorationMode::fixed && !(config_.c >= 0.0)) {
            throw std::invalid_argument("uct: exploration constant must be >= 0");
        }
    }

    void set_observer(BackupObserver obs) { observer_ = std::move(obs); }

    void start(const State& s0, int horizon) {
        if (horizon < 1) {
            throw std::invalid_argument("uct: horizon must be >= 1");
        }
        if (is_terminal(*model_, s0)) {
            throw std::invalid_argument("uct: initial state is terminal");
        }
        root_ = s0;
        horizon_ = horizon;
    }

    /// One rollout from the root; returns the sampled cost.
    double iterate() {
        ++iterations_;
        return rollout(root_, horizon_);
    }

    void run() {
        if (config_.budget.unlimited()) {
            throw std::invalid_argument("uct: needs an iteration or time budget");
        }
        Stopwatch clock;
        while (true) {
            if (config_.budget.iterations && iterations_ >= *config_.budget.iterations) {
                break;
            }
            if (config_.budget.time_ms && iterations_ > 0 && clock.millis() >= *config_.budget.time_ms) {
                break;
            }
            iterate();
        }
        elapsed_ += clock.seconds();
    }

    /// Cost-form Fig. 2 recursion.
    double rollout(const State& s, int d) {
        if (d == 0) {
            return 0.0;
        }
        if (is_terminal(*model_, s)) {
            return terminal_value(*model_, s);
        }
        HorizonNodeId<State> id{s, d};
        auto it = index_.find(id);
        if (it == index_.end()) {
            Node n;
            n.id = id;
            n.actions = model_->actions(s);
            n.q.assign(n.actions.size(), 0.0);
            n.visits.assign(n.actions.size(), 0);
            index_.emplace(id, nodes_.size());
            nodes_.push_back(std::move(n));
            return rollout_cost(*model_, policy_, s, d, rng_);
        }
        const std::size_t ni = it->second;
        const std::size_t slot = select(ni);
        const ActionId a = nodes_[ni].actions[slot];
        State next = sample_successor(*model_, s, a, rng_);
        double nv = model_->cost(s, a) + model_->gamma() * rollout(next, d - 1);
        Node& n = nodes_[ni];
        n.total += 1;
        n.visits[slot] += 1;
        n.q[slot] = mc_backup(n.q[slot], n.visits[slot], nv);
        if (observer_) {
            observer_(ni, slot, nv);
        }
        return nv;
    }

    PlanResult result() const {
        PlanResult res;
        res.stats.iterations = iterations_;
        res.stats.nodes_created = nodes_.size();
        res.stats.wall_time_s = elapsed_;
        auto it = index_.find(HorizonNodeId<State>{root_, horizon_});
        if (it == index_.end()) {
            auto acts = model_->actions(root_);
            res.action = acts.front();
            return res;
        }
        const Node& n = nodes_[it->second];
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n.actions.size(); ++i) {
            if (n.visits[i] > 0) {
                res.root_q.emplace_back(n.actions[i], n.q[i]);
                if (n.q[i] < best) {
                    best = n.q[i];
                    res.action = n.actions[i];
                }
            }
        }
        if (res.action < 0) {
            res.action = n.actions.front();
            best = 0.0;
        }
        res.root_value = best;
        return res;
    }

    std::size_t num_nodes() const { return nodes_.size(); }
    const std::vector<Node>& nodes() const { return nodes_; }
    std::size_t iterations() const { return iterations_; }

private:
    std::size_t select(std::size_t ni) {
        const Node& n = nodes_[ni];
        double best = std::numeric_limits<double>::infinity();
        ties_.clear();
        for (std::size_t i = 0; i < n.actions.size(); ++i) {
            double score = n.q[i] - uct_bonus(n.total, n.visits[i], n.q[i], config_);
            if (score < best) {
                best = score;
                ties_.assign(1, i);
            } else if (score == best) {
                ties_.push_back(i);
            }
        }
        if (ties_.size() == 1) {
            return ties_.front();
        }
        return ties_[uniform_index(rng_, ties_.size())];
    }

    const M* model_;
    BasePolicy<State> policy_;
    UctConfig config_;
    Rng rng_;
    State root_{};
    int horizon_ = 0;
    std::vector<Node> nodes_;
    std::unordered_map<HorizonNodeId<State>, std::size_t, NodeHashOf<M>> index_;
    std::vector<std::size_t> ties_;
    BackupObserver observer_;
    std::size_t iterations_ = 0;
    double elapsed_ = 0.0;
};

template <MdpModel M>
PlanResult uct_plan(const M& model, const typename M::State& s0, int horizon,
                    BasePolicy<typename M::State> base_policy, const UctConfig& config) {
    Uct<M> uct(model, std::move(base_policy), config);
    uct.start(s0, horizon);
    uct.run();
    return uct.result();
}

}  // namespace aotplan
