#include "aotplan/bench/domains.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace aotplan::bench {

namespace {

int checked_horizon(std::optional<int> h, int fallback) {
    int v = h.value_or(fallback);
    if (v < 1) {
        throw std::invalid_argument("horizon must be >= 1");
    }
    return v;
}

template <MdpModel M>
std::function<HeuristicFn<typename M::State>()> minmin_builder(std::shared_ptr<const M> model,
                                                              typename M::State s0, int horizon) {
    return [model, s0, horizon] { return MinMinHeuristic<M>::make(*model, s0, horizon); };
}

}  // namespace

Domain<TabularMdp> make_tabular_domain(TabularMdp model, std::string name, const DomainOptions& opts) {
    Domain<TabularMdp> d;
    d.name = std::move(name);
    d.horizon = checked_horizon(opts.horizon, model.default_horizon());
    d.initial = model.initial_state();
    d.model = std::make_shared<const TabularMdp>(std::move(model));
    d.build_minmin = minmin_builder(d.model, d.initial, d.horizon);
    d.environment = sampling_environment(*d.model, d.initial);
    return d;
}

Domain<ctp::Model> make_ctp_domain(const ctp::Instance& inst, std::string name, const DomainOptions& opts) {
    Domain<ctp::Model> d;
    d.name = std::move(name);
    d.model = std::make_shared<const ctp::Model>(inst, opts.dead_end_penalty);
    d.horizon = checked_horizon(opts.horizon, inst.num_nodes);
    d.initial = d.model->initial_belief();
    auto model = d.model;
    // relaxing every unknown edge to free gives the optimistic distance
    d.build_minmin = [model]() -> HeuristicFn<ctp::Belief> {
        return [model](const ctp::Belief& b, int) { return model->optimistic_distance(b); };
    };
    d.optimistic = [model](const ctp::Belief& b, int, Rng&) { return model->optimistic_action(b); };
    const bool solvable_only = opts.solvable_only;
    d.environment = [model, solvable_only](Rng& rng) {
        const auto& instance = model->instance();
        ctp::Weather w = solvable_only ? ctp::sample_solvable_weather(instance, rng)
                                       : ctp::sample_weather(instance, rng);
        Environment<ctp::Belief> env;
        env.initial = model->initial_belief(w);
        env.step = [model, w](const ctp::Belief& b, ActionId a, Rng&) { return model->apply(b, a, w); };
        return env;
    };
    return d;
}

Domain<sailing::Model> make_sailing_domain(const sailing::Instance& inst, std::string name,
                                           const DomainOptions& opts) {
    Domain<sailing::Model> d;
    d.name = std::move(name);
    d.model = std::make_shared<const sailing::Model>(inst);
    d.horizon = checked_horizon(opts.horizon, 50);
    d.initial = d.model->initial_state();
    d.build_minmin = minmin_builder(d.model, d.initial, d.horizon);
    d.environment = sampling_environment(*d.model, d.initial);
    return d;
}

Domain<racetrack::Model> make_racetrack_domain(const racetrack::Instance& inst, std::string name,
                                               const DomainOptions& opts) {
    Domain<racetrack::Model> d;
    d.name = std::move(name);
    d.model = std::make_shared<const racetrack::Model>(inst);
    d.horizon = checked_horizon(opts.horizon, 50);
    d.initial = d.model->initial_state();
    d.build_minmin = minmin_builder(d.model, d.initial, d.horizon);
    d.environment = sampling_environment(*d.model, d.initial);
    return d;
}

AnyDomain load_domain(const std::string& path, const DomainOptions& opts) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open '" + path + "'");
    }
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    std::istringstream scan(text);
    std::string line;
    std::string kind;
    while (std::getline(scan, line)) {
        std::istringstream ls(line);
        if ((ls >> kind) && kind[0] != '#') {
            break;
        }
        kind.clear();
    }
    const std::string name = std::filesystem::path(path).stem().string();
    std::istringstream body(text);
    if (kind == "mdp") {
        return make_tabular_domain(parse_tabular_mdp(body), name, opts);
    }
    if (kind == "ctp") {
        return make_ctp_domain(ctp::parse_instance(body), name, opts);
    }
    if (kind == "sailing") {
        return make_sailing_domain(sailing::parse_instance(body), name, opts);
    }
    if (kind == "racetrack") {
        return make_racetrack_domain(racetrack::parse_instance(body), name, opts);
    }
    throw std::invalid_argument("'" + path + "': unrecognised instance format");
}

}  // namespace aotplan::bench
