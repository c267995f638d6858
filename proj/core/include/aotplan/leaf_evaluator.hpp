#pragma once

#include "aotplan/heuristics.hpp"
#include "aotplan/mdp.hpp"

#include <stdexcept>
#include <utility>

namespace aotplan {

/// Where tip values come from: a deterministic h(s,d), or rollouts of a base
/// policy whose sampled costs are averaged per node.
template <MdpModel M>
class LeafEvaluator {
public:
    using State = typename M::State;

    static LeafEvaluator deterministic(HeuristicFn<State> h) {
        LeafEvaluator e;
        e.heuristic_ = std::move(h);
        return e;
    }

    static LeafEvaluator rollouts(const M& model, BasePolicy<State> policy) {
        LeafEvaluator e;
        e.model_ = &model;
        e.policy_ = std::move(policy);
        return e;
    }

    bool is_sampled() const { return model_ != nullptr; }

    double heuristic(const State& s, int d) const { return heuristic_(s, d); }

    /// One rollout of the base policy for d steps from s.
    double sample(const State& s, int d, Rng& rng) const {
        return rollout_cost(*model_, policy_, s, d, rng);
    }

    const BasePolicy<State>& policy() const { return policy_; }

private:
    LeafEvaluator() = default;

    HeuristicFn<State> heuristic_;
    const M* model_ = nullptr;
    BasePolicy<State> policy_;
};

}  // namespace aotplan
