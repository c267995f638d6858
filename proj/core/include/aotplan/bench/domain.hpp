#pragma once

#include "aotplan/aot.hpp"
#include "aotplan/bench/csv.hpp"
#include "aotplan/bench/episode.hpp"
#include "aotplan/bench/planner_spec.hpp"
#include "aotplan/heuristics.hpp"
#include "aotplan/lrtdp.hpp"
#include "aotplan/uct.hpp"

#include <functional>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

namespace aotplan::bench {

/// A model plus everything the harness needs to run episodes on it.
template <MdpModel M>
struct Domain {
    using State = typename M::State;

    std::string name;
    std::shared_ptr<const M> model;
    State initial{};
    int horizon = 1;
    /// Builds the min-min heuristic; called at most once per domain.
    std::function<HeuristicFn<State>()> build_minmin;
    /// Domain-specific optimistic base policy, empty when unavailable.
    BasePolicy<State> optimistic;
    EnvironmentFactory<State> environment;

    HeuristicFn<State> minmin() const {
        std::call_once(cache_->once, [&] { cache_->h = build_minmin(); });
        return cache_->h;
    }

private:
    struct Cache {
        std::once_flag once;
        HeuristicFn<State> h;
    };
    std::shared_ptr<Cache> cache_ = std::make_shared<Cache>();
};

template <MdpModel M>
HeuristicFn<typename M::State> resolve_heuristic(const Domain<M>& domain, const std::string& name) {
    using State = typename M::State;
    if (name == "zero") {
        return zero_heuristic<State>();
    }
    if (name == "minmin") {
        return domain.minmin();
    }
    if (name.rfind("scaled:", 0) == 0) {
        return scaled_heuristic<State>(domain.minmin(), std::stod(name.substr(7)));
    }
    throw std::invalid_argument("unknown heuristic '" + name + "'");
}

/// `greedy` is greedy with respect to the planner's heuristic.
template <MdpModel M>
BasePolicy<typename M::State> resolve_policy(const Domain<M>& domain, const std::string& name,
                                             const std::string& heuristic) {
    if (name == "random") {
        return random_policy(*domain.model);
    }
    if (name == "optimistic") {
        if (!domain.optimistic) {
            throw std::invalid_argument("the optimistic base policy is only defined for CTP");
        }
        return domain.optimistic;
    }
    if (name == "greedy") {
        return greedy_base_policy(*domain.model, resolve_heuristic(domain, heuristic));
    }
    throw std::invalid_argument("unknown base policy '" + name + "'");
}

/// Fresh planner per episode; every decision draws its seed from the
/// episode's planner stream.
template <MdpModel M>
PlannerFactory<typename M::State> make_planner_factory(const Domain<M>& domain, const PlannerSpec& spec,
                                                      const Budget& budget) {
    using State = typename M::State;
    spec.validate();
    const M& model = *domain.model;
    const int horizon = domain.horizon;
    if (spec.algo == "base") {
        auto policy = resolve_policy(domain, spec.base_policy.value_or("random"), spec.heuristic);
        return [policy, horizon]() -> PlanFn<State> {
            return [policy, horizon](const State& s, Rng& rng) {
                PlanResult r;
                r.action = policy(s, horizon, rng);
                return r;
            };
        };
    }
    if (spec.algo == "uct") {
        if (budget.unlimited()) {
            throw std::invalid_argument("uct needs --budget or --time-ms");
        }
        auto policy = resolve_policy(domain, spec.base_policy.value_or("random"), spec.heuristic);
        UctConfig cfg;
        cfg.budget = budget;
        cfg.exploration = spec.exploration;
        cfg.c = spec.c;
        return [&model, policy, cfg, horizon]() -> PlanFn<State> {
            return [&model, policy, cfg, horizon](const State& s, Rng& rng) {
                UctConfig c = cfg;
                c.seed = rng();
                return uct_plan(model, s, horizon, policy, c);
            };
        };
    }
    if (spec.algo == "lrtdp") {
        auto h = resolve_heuristic(domain, spec.heuristic);
        LrtdpConfig cfg;
        cfg.budget = budget;
        cfg.epsilon = spec.epsilon;
        cfg.retain_table = spec.retain_table;
        return [&model, h, cfg, horizon]() -> PlanFn<State> {
            std::shared_ptr<Lrtdp<M>> retained;
            return [&model, h, cfg, horizon, retained](const State& s, Rng& rng) mutable {
                if (cfg.retain_table) {
                    if (!retained) {
                        LrtdpConfig c = cfg;
                        c.seed = rng();
                        retained = std::make_shared<Lrtdp<M>>(model, h, c);
                    }
                    return retained->plan(s, horizon);
                }
                LrtdpConfig c = cfg;
                c.seed = rng();
                return lrtdp_plan(model, s, horizon, h, c);
            };
        };
    }
    // aot and ao share one implementation
    AotConfig cfg;
    cfg.budget = budget;
    cfg.p = spec.algo == "ao" ? 0.0 : spec.p;
    cfg.in_only = spec.algo == "ao";
    cfg.batch_size = spec.algo == "ao" ? std::optional<std::size_t>(spec.batch_size.value_or(1)) : spec.batch_size;
    cfg.batch_fraction = spec.k;
    std::optional<LeafEvaluator<M>> source;
    if (spec.algo == "aot" && spec.base_policy) {
        source = LeafEvaluator<M>::rollouts(model, resolve_policy(domain, *spec.base_policy, spec.heuristic));
    } else {
        source = LeafEvaluator<M>::deterministic(resolve_heuristic(domain, spec.heuristic));
    }
    return [&model, source, cfg, horizon]() -> PlanFn<State> {
        return [&model, source, cfg, horizon](const State& s, Rng& rng) {
            AotConfig c = cfg;
            c.seed = rng();
            return aot_plan(model, s, horizon, *source, c);
        };
    };
}

/// One quality-profile cell: a batch of episodes for (planner, budget).
template <MdpModel M>
QualityProfileRow run_cell(const Domain<M>& domain, const PlannerSpec& spec, const Budget& budget,
                           const EpisodeConfig& config, std::vector<EpisodeResult>* episodes = nullptr) {
    EpisodeConfig cfg = config;
    cfg.horizon = domain.horizon;
    auto factory = make_planner_factory(domain, spec, budget);
    auto results = run_batch(*domain.model, factory, domain.environment, cfg);
    BatchSummary s = summarize(results);
    QualityProfileRow row;
    row.planner = spec.id();
    row.instance = domain.name;
    row.budget_kind = spec.algo == "base" ? "none" : budget_kind(budget);
    row.budget = spec.algo == "base" ? 0.0 : budget_amount(budget);
    row.episodes = s.episodes;
    row.avg_time_per_action_s = s.avg_time_per_action_s;
    row.avg_cost = s.avg_cost;
    row.std_err = s.std_err;
    row.cap_hits = s.cap_hits + s.failures;
    if (episodes) {
        *episodes = std::move(results);
    }
    return row;
}

/// Rows in (planner, budget) order. A cell whose planner cannot be built
/// produces a row with zero episodes; the sweep continues.
template <MdpModel M>
std::vector<QualityProfileRow> quality_profile(const Domain<M>& domain, const std::vector<PlannerSpec>& planners,
                                               const std::vector<Budget>& budgets, const EpisodeConfig& config,
                                               std::vector<std::string>* errors = nullptr) {
    if (planners.empty() || budgets.empty()) {
        throw std::invalid_argument("quality profile needs at least one planner and one budget");
    }
    std::vector<QualityProfileRow> rows;
    for (const auto& spec : planners) {
        const auto& cells = spec.algo == "base" ? std::vector<Budget>{Budget{}} : budgets;
        for (const auto& b : cells) {
            try {
                rows.push_back(run_cell(domain, spec, b, config));
            } catch (const std::exception& e) {
                QualityProfileRow row;
                row.planner = spec.id();
                row.instance = domain.name;
                row.budget_kind = budget_kind(b);
                row.budget = budget_amount(b);
                rows.push_back(row);
                if (errors) {
                    errors->push_back(spec.id() + ": " + e.what());
                }
            }
        }
    }
    return rows;
}

}  // namespace aotplan::bench
