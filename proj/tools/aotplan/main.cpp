#include "aotplan/backward_induction.hpp"
#include "aotplan/bench/domains.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

using namespace aotplan;
using namespace aotplan::bench;

namespace {

struct Options {
    std::string instance;
    std::vector<std::string> algos;
    std::string heuristic = "zero";
    std::string base_policy;
    std::vector<std::size_t> budgets;
    std::vector<double> time_ms;
    double p = 0.5;
    double k = 0.1;
    std::size_t batch = 0;
    std::string exploration = "adaptive";
    double epsilon = 1e-4;
    bool retain_table = false;
    std::uint64_t seed = 0;
    std::size_t episodes = 1000;
    int max_steps = 100;
    int horizon = 0;
    std::string out;
    unsigned threads = 1;
    std::string trace;
    bool all_weathers = false;
    double dead_end_penalty = -1.0;

    // gen-ctp
    int nodes = 10;
    double density = 0.3;
    double prior_min = 0.1;
    double prior_max = 0.5;
};

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

DomainOptions domain_options(const Options& o) {
    DomainOptions d;
    if (o.horizon > 0) {
        d.horizon = o.horizon;
    }
    if (o.dead_end_penalty >= 0.0) {
        d.dead_end_penalty = o.dead_end_penalty;
    }
    d.solvable_only = !o.all_weathers;
    return d;
}

std::vector<PlannerSpec> planner_specs(const Options& o) {
    std::vector<PlannerSpec> specs;
    auto algos = o.algos.empty() ? std::vector<std::string>{"aot"} : o.algos;
    for (const auto& a : algos) {
        PlannerSpec s;
        s.algo = a;
        s.heuristic = o.heuristic;
        if (!o.base_policy.empty()) {
            s.base_policy = o.base_policy;
        }
        s.p = o.p;
        s.k = o.k;
        if (o.batch > 0) {
            s.batch_size = o.batch;
        }
        s.epsilon = o.epsilon;
        s.retain_table = o.retain_table;
        try {
            parse_exploration(o.exploration, s);
            s.validate();
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
        specs.push_back(s);
    }
    return specs;
}

std::vector<Budget> budgets_for(const Options& o) {
    std::vector<Budget> out;
    for (auto b : o.budgets) {
        Budget x;
        x.iterations = b;
        out.push_back(x);
    }
    for (auto t : o.time_ms) {
        Budget x;
        x.time_ms = t;
        out.push_back(x);
    }
    return out.empty() ? std::vector<Budget>{Budget{}} : out;
}

std::pair<PlannerSpec, Budget> single_cell(const Options& o, const std::string& command) {
    auto specs = planner_specs(o);
    auto budgets = budgets_for(o);
    if (specs.size() != 1 || budgets.size() != 1) {
        throw UsageError(command + " takes one --algo and at most one budget; use profile for grids");
    }
    return {specs.front(), budgets.front()};
}

std::vector<Budget> default_grid(const std::string& algo) {
    std::vector<std::size_t> grid{10, 50, 100, 500, 1000, 5000, 10000};
    if (algo == "uct") {
        grid.push_back(50000);
    }
    std::vector<Budget> out;
    for (auto g : grid) {
        Budget b;
        b.iterations = g;
        out.push_back(b);
    }
    return out;
}

template <MdpModel M>
int cmd_solve(const Domain<M>& dom, const Options& o) {
    auto [spec, budget] = single_cell(o, "solve");
    auto plan = make_planner_factory(dom, spec, budget)();
    Rng rng(o.seed);
    PlanResult r = plan(dom.initial, rng);
    std::cout << "action " << dom.model->action_name(r.action) << '\n';
    std::cout << "value " << format_double(r.root_value) << '\n';
    for (const auto& [a, q] : r.root_q) {
        std::cout << "q " << dom.model->action_name(a) << ' ' << format_double(q) << '\n';
    }
    std::cout << "iterations " << r.stats.iterations << "\nnodes " << r.stats.nodes_created << '\n';
    return 0;
}

EpisodeConfig episode_config(const Options& o) {
    EpisodeConfig c;
    c.episodes = o.episodes;
    c.max_steps = o.max_steps;
    c.seed = o.seed;
    c.threads = o.threads;
    c.keep_trace = !o.trace.empty();
    return c;
}

void emit_rows(const std::vector<QualityProfileRow>& rows, const Options& o) {
    if (o.out.empty()) {
        write_csv(std::cout, rows);
        return;
    }
    std::ofstream f(o.out);
    if (!f) {
        throw std::runtime_error("cannot write '" + o.out + "'");
    }
    write_csv(f, rows);
}

template <MdpModel M>
int cmd_episode(const Domain<M>& dom, const Options& o) {
    auto [spec, budget] = single_cell(o, "episode");
    std::vector<EpisodeResult> eps;
    auto row = run_cell(dom, spec, budget, episode_config(o), &eps);
    if (!o.trace.empty()) {
        std::ofstream f(o.trace);
        if (!f) {
            throw std::runtime_error("cannot write '" + o.trace + "'");
        }
        for (const auto& e : eps) {
            write_trace(f, e.trace);
        }
    }
    for (const auto& e : eps) {
        if (e.failed) {
            std::cerr << "episode failed: " << e.error << '\n';
        }
    }
    emit_rows({row}, o);
    return 0;
}

template <MdpModel M>
int cmd_profile(const Domain<M>& dom, const Options& o) {
    std::vector<QualityProfileRow> rows;
    std::vector<std::string> errors;
    for (const auto& spec : planner_specs(o)) {
        auto budgets = (o.budgets.empty() && o.time_ms.empty()) ? default_grid(spec.algo) : budgets_for(o);
        auto part = quality_profile(dom, {spec}, budgets, episode_config(o), &errors);
        rows.insert(rows.end(), part.begin(), part.end());
    }
    for (const auto& e : errors) {
        std::cerr << "cell failed: " << e << '\n';
    }
    emit_rows(rows, o);
    return 0;
}

template <MdpModel M>
int cmd_oracle(const Domain<M>& dom, const Options&) {
    auto res = backward_induction(*dom.model, dom.initial, dom.horizon);
    std::cout << format_double(res.root_value) << '\n';
    return 0;
}

int cmd_gen_ctp(const Options& o) {
    ctp::GeneratorParams p;
    p.num_nodes = o.nodes;
    p.edge_density = o.density;
    p.prior_min = o.prior_min;
    p.prior_max = o.prior_max;
    p.seed = o.seed;
    auto g = ctp::generate(p);
    if (o.out.empty()) {
        ctp::write_instance(std::cout, g.instance, g.pbad);
    } else {
        std::ofstream f(o.out);
        if (!f) {
            throw std::runtime_error("cannot write '" + o.out + "'");
        }
        ctp::write_instance(f, g.instance, g.pbad);
    }
    return 0;
}

void add_planner_flags(CLI::App* cmd, Options& o) {
    cmd->add_option("--algo", o.algos, "Planner: aot, ao, uct, lrtdp or base (repeatable)")
        ->check(CLI::IsMember({"aot", "ao", "uct", "lrtdp", "base"}));
    cmd->add_option("--heuristic", o.heuristic, "zero, minmin or scaled:<d>");
    cmd->add_option("--base-policy", o.base_policy, "random, optimistic or greedy")
        ->check(CLI::IsMember({"random", "optimistic", "greedy"}));
    cmd->add_option("--budget", o.budgets, "Iterations per decision (repeatable)")->check(CLI::PositiveNumber);
    cmd->add_option("--time-ms", o.time_ms, "Milliseconds per decision (repeatable)")->check(CLI::PositiveNumber);
    cmd->add_option("--p", o.p, "AOT probability of choosing an OUT tip")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--k", o.k, "AOT batch size as a fraction of the budget")->check(CLI::PositiveNumber);
    cmd->add_option("--batch", o.batch, "AOT explicit batch size")->check(CLI::PositiveNumber);
    cmd->add_option("--C", o.exploration, "UCT exploration: adaptive or fixed:<v>");
    cmd->add_option("--epsilon", o.epsilon, "LRTDP residual tolerance")->check(CLI::NonNegativeNumber);
    cmd->add_flag("--retain-table", o.retain_table, "LRTDP keeps values between decisions");
    cmd->add_option("--seed", o.seed, "Master seed");
    cmd->add_option("--horizon", o.horizon, "Planning horizon H")->check(CLI::PositiveNumber);
    cmd->add_option("--dead-end-penalty", o.dead_end_penalty, "Dead-end value D")->check(CLI::NonNegativeNumber);
    cmd->add_flag("--all-weathers", o.all_weathers, "CTP: also evaluate unsolvable weathers");
}

void add_episode_flags(CLI::App* cmd, Options& o) {
    cmd->add_option("--episodes", o.episodes, "Episodes per cell")->check(CLI::PositiveNumber);
    cmd->add_option("--max-steps", o.max_steps, "Step cap per episode")->check(CLI::PositiveNumber);
    cmd->add_option("--out", o.out, "CSV output file (default stdout)");
    cmd->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Anytime MDP action selection: AOT, AO*, UCT and LRTDP"};
    app.require_subcommand(1);
    Options o;

    auto* solve = app.add_subcommand("solve", "Plan one decision and print the root Q table");
    solve->add_option("instance", o.instance, "Instance file")->required()->check(CLI::ExistingFile);
    add_planner_flags(solve, o);

    auto* episode = app.add_subcommand("episode", "Run episodes and print a summary CSV row");
    episode->add_option("instance", o.instance, "Instance file")->required()->check(CLI::ExistingFile);
    add_planner_flags(episode, o);
    add_episode_flags(episode, o);
    episode->add_option("--trace", o.trace, "Write step,state_hash,action,outcome_state_hash,cost lines");
    o.episodes = 1;

    auto* profile = app.add_subcommand("profile", "Quality profile over a budget grid");
    profile->add_option("instance", o.instance, "Instance file")->required()->check(CLI::ExistingFile);
    add_planner_flags(profile, o);
    add_episode_flags(profile, o);

    auto* gen = app.add_subcommand("gen-ctp", "Generate a random CTP instance");
    gen->add_option("--nodes", o.nodes, "Node count")->check(CLI::Range(2, ctp::kMaxNodes));
    gen->add_option("--density", o.density, "Extra-edge probability")->check(CLI::Range(0.0, 1.0));
    gen->add_option("--prior-min", o.prior_min, "Smallest blocking prior")->check(CLI::Range(0.0, 1.0));
    gen->add_option("--prior-max", o.prior_max, "Largest blocking prior")->check(CLI::Range(0.0, 1.0));
    gen->add_option("--seed", o.seed, "Generator seed");
    gen->add_option("--out", o.out, "Output file (default stdout)");

    auto* oracle = app.add_subcommand("oracle", "Backward-induction value of the initial state");
    oracle->add_option("instance", o.instance, "Instance file")->required()->check(CLI::ExistingFile);
    oracle->add_option("--horizon", o.horizon, "Horizon H")->check(CLI::PositiveNumber);
    oracle->add_option("--dead-end-penalty", o.dead_end_penalty, "Dead-end value D")->check(CLI::NonNegativeNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    if (profile->parsed()) {
        o.episodes = profile->count("--episodes") ? o.episodes : 1000;
    }

    try {
        if (gen->parsed()) {
            return cmd_gen_ctp(o);
        }
        AnyDomain dom = load_domain(o.instance, domain_options(o));
        return std::visit(
            [&](const auto& d) {
                if (solve->parsed()) {
                    return cmd_solve(d, o);
                }
                if (episode->parsed()) {
                    return cmd_episode(d, o);
                }
                if (profile->parsed()) {
                    return cmd_profile(d, o);
                }
                return cmd_oracle(d, o);
            },
            dom);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
