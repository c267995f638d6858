#pragma once

#include "aotplan/mdp.hpp"
#include "aotplan/plan_result.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace aotplan::bench {

struct EpisodeConfig {
    std::size_t episodes = 1000;
    int max_steps = 100;
    std::uint64_t seed = 0;
    int horizon = 1;
    /// Worker threads for a batch; 1 runs episodes sequentially.
    unsigned threads = 1;
    bool keep_trace = false;
};

struct TraceEntry {
    int step = 0;
    std::uint64_t state_hash = 0;
    ActionId action = -1;
    std::uint64_t outcome_hash = 0;
    double cost = 0.0;

    friend bool operator==(const TraceEntry&, const TraceEntry&) = default;
};

struct EpisodeResult {
    /// Undiscounted executed cost, plus D on dead-ends, step-cap hits and failures.
    double cost = 0.0;
    int steps = 0;
    bool reached_goal = false;
    bool dead_end = false;
    bool cap_hit = false;
    bool failed = false;
    std::string error;
    std::vector<double> decision_times;
    std::vector<TraceEntry> trace;
};

/// The world an episode runs in. `step` executes an action; the default
/// environment samples the model, CTP executes against a hidden weather.
template <class State>
struct Environment {
    State initial;
    std::function<State(const State&, ActionId, Rng&)> step;
};

template <class State>
using EnvironmentFactory = std::function<Environment<State>(Rng&)>;

/// Planner instance for one episode; called once per decision.
template <class State>
using PlanFn = std::function<PlanResult(const State&, Rng&)>;

template <class State>
using PlannerFactory = std::function<PlanFn<State>()>;

enum class Stream : std::uint64_t { environment = 0, planner = 1 };

/// Independent stream per (master seed, episode, purpose) so planner
/// randomness never perturbs environment outcomes.
inline Rng episode_rng(std::uint64_t master, std::size_t episode, Stream stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                      static_cast<std::uint32_t>(episode), static_cast<std::uint32_t>(episode >> 32),
                      static_cast<std::uint32_t>(stream)};
    return Rng(seq);
}

template <MdpModel M>
EnvironmentFactory<typename M::State> sampling_environment(const M& model, typename M::State s0) {
    return [&model, s0](Rng&) {
        Environment<typename M::State> env;
        env.initial = s0;
        env.step = [&model](const typename M::State& s, ActionId a, Rng& rng) {
            return sample_successor(model, s, a, rng);
        };
        return env;
    };
}

template <MdpModel M>
EpisodeResult run_episode(const M& model, const PlannerFactory<typename M::State>& planner,
                          const EnvironmentFactory<typename M::State>& environment,
                          const EpisodeConfig& config, std::size_t episode_index) {
    using State = typename M::State;
    typename M::StateHash hasher;
    Rng env_rng = episode_rng(config.seed, episode_index, Stream::environment);
    Rng plan_rng = episode_rng(config.seed, episode_index, Stream::planner);
    EpisodeResult res;
    Environment<State> env = environment(env_rng);
    State s = env.initial;
    try {
        PlanFn<State> plan = planner();
        while (true) {
            if (model.is_goal(s)) {
                res.reached_goal = true;
                break;
            }
            if (model.is_dead_end(s)) {
                res.dead_end = true;
                res.cost += model.dead_end_penalty();
                break;
            }
            if (res.steps >= config.max_steps) {
                res.cap_hit = true;
                res.cost += model.dead_end_penalty();
                break;
            }
            Stopwatch clock;
            PlanResult pr = plan(s, plan_rng);
            res.decision_times.push_back(clock.seconds());
            const double c = model.cost(s, pr.action);
            State next = env.step(s, pr.action, env_rng);
            if (config.keep_trace) {
                res.trace.push_back({res.steps, static_cast<std::uint64_t>(hasher(s)), pr.action,
                                     static_cast<std::uint64_t>(hasher(next)), c});
            }
            res.cost += c;
            ++res.steps;
            s = std::move(next);
        }
    } catch (const std::exception& e) {
        res.failed = true;
        res.error = e.what();
        res.cost += model.dead_end_penalty();
    }
    return res;
}

/// Runs episodes [0, config.episodes) and returns them in index order.
template <MdpModel M>
std::vector<EpisodeResult> run_batch(const M& model, const PlannerFactory<typename M::State>& planner,
                                     const EnvironmentFactory<typename M::State>& environment,
                                     const EpisodeConfig& config) {
    if (config.episodes == 0) {
        throw std::invalid_argument("episodes must be >= 1");
    }
    if (config.max_steps < 1) {
        throw std::invalid_argument("max steps must be >= 1");
    }
    std::vector<EpisodeResult> results(config.episodes);
    const unsigned threads = std::max(1u, std::min<unsigned>(config.threads, static_cast<unsigned>(config.episodes)));
    if (threads == 1) {
        for (std::size_t i = 0; i < config.episodes; ++i) {
            results[i] = run_episode(model, planner, environment, config, i);
        }
        return results;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < config.episodes; i = next++) {
                results[i] = run_episode(model, planner, environment, config, i);
            }
        });
    }
    for (auto& th : pool) {
        th.join();
    }
    return results;
}

struct BatchSummary {
    std::size_t episodes = 0;
    double avg_cost = 0.0;
    double std_err = 0.0;
    double avg_time_per_action_s = 0.0;
    std::size_t cap_hits = 0;
    std::size_t failures = 0;
};

inline BatchSummary summarize(const std::vector<EpisodeResult>& results) {
    BatchSummary s;
    s.episodes = results.size();
    if (results.empty()) {
        return s;
    }
    double sum = 0.0;
    double time = 0.0;
    std::size_t decisions = 0;
    for (const auto& r : results) {
        sum += r.cost;
        for (double t : r.decision_times) {
            time += t;
        }
        decisions += r.decision_times.size();
        s.cap_hits += r.cap_hit ? 1 : 0;
        s.failures += r.failed ? 1 : 0;
    }
    const double n = static_cast<double>(results.size());
    s.avg_cost = sum / n;
    if (results.size() > 1) {
        double ss = 0.0;
        for (const auto& r : results) {
            ss += (r.cost - s.avg_cost) * (r.cost - s.avg_cost);
        }
        s.std_err = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    }
    s.avg_time_per_action_s = decisions ? time / static_cast<double>(decisions) : 0.0;
    return s;
}

}  // namespace aotplan::bench
