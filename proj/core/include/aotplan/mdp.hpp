#pragma once

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace aotplan {

using ActionId = int;
using Rng = std::mt19937_64;

inline constexpr double kProbabilityTolerance = 1e-9;

template <class State>
struct Outcome {
    State state;
    double probability = 0.0;
};

/// Finite-horizon MDP in cost form.
///
/// States are opaque values with equality and a 64-bit hash supplied by the
/// domain through `M::StateHash`. `actions(s)` returns the applicable actions
/// in a stable order; that order drives every tie-break in the planners.
/// Terminal states (goal or dead-end) have no applicable actions.
template <class M>
concept MdpModel = requires(const M& m, const typename M::State& s, ActionId a) {
    typename M::State;
    typename M::StateHash;
    requires std::equality_comparable<typename M::State>;
    { typename M::StateHash{}(s) } -> std::convertible_to<std::uint64_t>;
    { m.actions(s) } -> std::convertible_to<std::vector<ActionId>>;
    { m.outcomes(s, a) } -> std::convertible_to<std::vector<Outcome<typename M::State>>>;
    { m.cost(s, a) } -> std::convertible_to<double>;
    { m.is_goal(s) } -> std::convertible_to<bool>;
    { m.is_dead_end(s) } -> std::convertible_to<bool>;
    { m.gamma() } -> std::convertible_to<double>;
    { m.dead_end_penalty() } -> std::convertible_to<double>;
    { m.action_name(a) } -> std::convertible_to<std::string>;
};

/// Models that can draw a successor without building the full distribution.
template <class M>
concept DirectlySampleable = MdpModel<M> && requires(const M& m, const typename M::State& s,
                                                      ActionId a, Rng& rng) {
    { m.sample(s, a, rng) } -> std::convertible_to<typename M::State>;
};

template <MdpModel M>
bool is_terminal(const M& model, const typename M::State& s) {
    return model.is_goal(s) || model.is_dead_end(s);
}

/// Value of a terminal node: zero at goals, the dead-end penalty otherwise.
template <MdpModel M>
double terminal_value(const M& model, const typename M::State& s) {
    return model.is_goal(s) ? 0.0 : model.dead_end_penalty();
}

inline std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) {
    // splitmix-style finalizer keeps nearby integers apart
    value += 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
    value = (value ^ (value >> 30)) * 0xbf58476d1ce4e5b9ULL;
    value = (value ^ (value >> 27)) * 0x94d049bb133111ebULL;
    return seed ^ (value ^ (value >> 31));
}

/// Finite-horizon node identity (s, d).
template <class State>
struct HorizonNodeId {
    State state;
    int depth = 0;

    friend bool operator==(const HorizonNodeId&, const HorizonNodeId&) = default;
};

template <class State, class StateHash>
struct HorizonNodeHash {
    std::size_t operator()(const HorizonNodeId<State>& id) const {
        return static_cast<std::size_t>(
            hash_combine(static_cast<std::uint64_t>(StateHash{}(id.state)),
                         static_cast<std::uint64_t>(id.depth)));
    }
};

template <MdpModel M>
using NodeIdOf = HorizonNodeId<typename M::State>;

template <MdpModel M>
using NodeHashOf = HorizonNodeHash<typename M::State, typename M::StateHash>;

inline double uniform01(Rng& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

template <MdpModel M>
bool is_applicable(const M& model, const typename M::State& s, ActionId a) {
    for (ActionId b : model.actions(s)) {
        if (b == a) {
            return true;
        }
    }
    return false;
}

/// Draws s' ~ P_a(.|s). Uses the model's own sampler when it has one.
template <MdpModel M>
typename M::State sample_successor(const M& model, const typename M::State& s, ActionId a,
                                   Rng& rng) {
    if constexpr (DirectlySampleable<M>) {
        return model.sample(s, a, rng);
    } else {
        auto outs = model.outcomes(s, a);
        if (outs.empty()) {
            throw std::invalid_argument("sample_successor: action not applicable");
        }
        double u = uniform01(rng);
        for (auto& o : outs) {
            if (u < o.probability) {
                return std::move(o.state);
            }
            u -= o.probability;
        }
        return std::move(outs.back().state);
    }
}

/// Checked variant of sample_successor that rejects a ∉ A(s).
template <MdpModel M>
typename M::State sample_successor_checked(const M& model, const typename M::State& s,
                                           ActionId a, Rng& rng) {
    if (!is_applicable(model, s, a)) {
        throw std::invalid_argument("sample_successor: action " + std::to_string(a) +
                                    " not applicable in state");
    }
    return sample_successor(model, s, a, rng);
}

/// Heuristic over finite-horizon nodes, h(s, d).
template <class State>
using HeuristicFn = std::function<double(const State&, int)>;

/// Base policy used for rollouts. Returns an action in A(s); s is non-terminal.
template <class State>
using BasePolicy = std::function<ActionId(const State&, int, Rng&)>;

}  // namespace aotplan
