#include "aotplan/tabular_mdp.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace aotplan {

TabularMdp::TabularMdp(int num_states, double gamma, double dead_end_penalty, Objective objective)
    : state_actions_(static_cast<std::size_t>(num_states)),
      goal_(static_cast<std::size_t>(num_states), 0),
      dead_end_(static_cast<std::size_t>(num_states), 0),
      gamma_(gamma),
      dead_end_penalty_(dead_end_penalty),
      objective_(objective) {
    if (num_states <= 0) {
        throw std::invalid_argument("TabularMdp: need at least one state");
    }
}

ActionId TabularMdp::add_action(int state, std::string name, double payoff,
                                std::vector<Outcome<int>> outcomes) {
    if (state < 0 || state >= num_states()) {
        throw std::out_of_range("TabularMdp::add_action: bad state");
    }
    auto id = static_cast<ActionId>(actions_.size());
    actions_.push_back({state, std::move(name), payoff, std::move(outcomes)});
    state_actions_[static_cast<std::size_t>(state)].push_back(id);
    return id;
}

void TabularMdp::set_goal(int s) { goal_.at(static_cast<std::size_t>(s)) = 1; }
void TabularMdp::set_dead_end(int s) { dead_end_.at(static_cast<std::size_t>(s)) = 1; }

std::vector<Outcome<int>> TabularMdp::outcomes(int s, ActionId a) const {
    const auto& entry = actions_.at(static_cast<std::size_t>(a));
    if (entry.state != s) {
        throw std::invalid_argument("TabularMdp::outcomes: action not applicable in state");
    }
    return entry.outcomes;
}

double TabularMdp::cost(int s, ActionId a) const {
    const auto& entry = actions_.at(static_cast<std::size_t>(a));
    if (entry.state != s) {
        throw std::invalid_argument("TabularMdp::cost: action not applicable in state");
    }
    return objective_ == Objective::cost ? entry.payoff : -entry.payoff;
}

void TabularMdp::validate() const {
    if (!(gamma_ > 0.0 && gamma_ <= 1.0)) {
        throw std::invalid_argument("TabularMdp: gamma must lie in (0, 1]");
    }
    if (dead_end_penalty_ < 0.0) {
        throw std::invalid_argument("TabularMdp: dead-end penalty must be >= 0");
    }
    if (initial_ < 0 || initial_ >= num_states()) {
        throw std::invalid_argument("TabularMdp: initial state out of range");
    }
    for (int s = 0; s < num_states(); ++s) {
        bool terminal = is_goal(s) || is_dead_end(s);
        if (terminal && !state_actions_[static_cast<std::size_t>(s)].empty()) {
            throw std::invalid_argument("TabularMdp: terminal state " + std::to_string(s) +
                                        " has actions");
        }
        if (!terminal && state_actions_[static_cast<std::size_t>(s)].empty()) {
            throw std::invalid_argument("TabularMdp: non-terminal state " + std::to_string(s) +
                                        " has no actions");
        }
    }
    for (const auto& entry : actions_) {
        double total = 0.0;
        for (const auto& o : entry.outcomes) {
            if (!(o.probability > 0.0)) {
                throw std::invalid_argument("TabularMdp: non-positive transition probability");
            }
            if (o.state < 0 || o.state >= num_states()) {
                throw std::invalid_argument("TabularMdp: successor out of range");
            }
            total += o.probability;
        }
        if (std::abs(total - 1.0) > kProbabilityTolerance) {
            throw std::invalid_argument("TabularMdp: probabilities of action '" + entry.name +
                                        "' sum to " + std::to_string(total));
        }
    }
}

TabularMdp canonicalize_to_cost(const TabularMdp& model) {
    TabularMdp out = model;
    if (model.objective() == Objective::reward) {
        out.objective_ = Objective::cost;
        for (auto& entry : out.actions_) {
            entry.payoff = -entry.payoff;
        }
    }
    return out;
}

TabularMdp make_chain2() {
    TabularMdp m(2, 1.0);
    m.set_goal(1);
    m.add_action(0, "A", 1.0, {{1, 1.0}});
    m.add_action(0, "B", 0.5, {{1, 0.5}, {0, 0.5}});
    m.set_initial_state(0);
    m.set_default_horizon(2);
    return m;
}

TabularMdp make_random_mdp(const RandomMdpParams& params, Rng& rng) {
    std::uniform_int_distribution<int> n_states(params.min_states, params.max_states);
    int n = n_states(rng);
    double gamma = params.gammas[uniform_index(rng, params.gammas.size())];
    TabularMdp m(n, gamma, params.dead_end_penalty);

    // state 0 is the start; at least one goal among the others
    int goal = 1 + static_cast<int>(uniform_index(rng, static_cast<std::size_t>(n - 1)));
    m.set_goal(goal);
    std::vector<char> terminal(static_cast<std::size_t>(n), 0);
    terminal[static_cast<std::size_t>(goal)] = 1;
    for (int s = 1; s < n; ++s) {
        if (terminal[static_cast<std::size_t>(s)]) {
            continue;
        }
        if (uniform01(rng) < params.dead_end_probability) {
            m.set_dead_end(s);
            terminal[static_cast<std::size_t>(s)] = 1;
        }
    }

    std::uniform_real_distribution<double> cost_dist(params.min_cost, params.max_cost);
    std::uniform_int_distribution<int> n_actions(1, params.max_actions);
    std::uniform_int_distribution<int> n_outcomes(1, params.max_outcomes);
    for (int s = 0; s < n; ++s) {
        if (terminal[static_cast<std::size_t>(s)]) {
            continue;
        }
        int k = n_actions(rng);
        for (int a = 0; a < k; ++a) {
            int fan = std::min(n_outcomes(rng), n);
            std::vector<int> succ;
            while (static_cast<int>(succ.size()) < fan) {
                int t = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(n)));
                if (std::find(succ.begin(), succ.end(), t) == succ.end()) {
                    succ.push_back(t);
                }
            }
            std::vector<double> w(succ.size());
            double total = 0.0;
            for (auto& x : w) {
                x = 0.05 + uniform01(rng);
                total += x;
            }
            std::vector<Outcome<int>> outs;
            double acc = 0.0;
            for (std::size_t i = 0; i < succ.size(); ++i) {
                double p = (i + 1 == succ.size()) ? 1.0 - acc : w[i] / total;
                acc += p;
                outs.push_back({succ[i], p});
            }
            m.add_action(s, "a" + std::to_string(s) + "_" + std::to_string(a), cost_dist(rng),
                         std::move(outs));
        }
    }
    m.set_initial_state(0);
    return m;
}

namespace {

[[noreturn]] void parse_error(int line, const std::string& what) {
    throw std::invalid_argument("mdp file line " + std::to_string(line) + ": " + what);
}

}  // namespace

TabularMdp parse_tabular_mdp(std::istream& in) {
    std::string line;
    int line_no = 0;
    TabularMdp model;
    bool have_header = false;
    double gamma = 1.0;
    double penalty = 0.0;
    Objective objective = Objective::cost;
    int horizon = 10;
    int initial = 0;
    struct PendingAction {
        int state;
        std::string name;
        double payoff;
        std::vector<Outcome<int>> outcomes;
    };
    std::vector<PendingAction> pending;
    std::vector<int> goals;
    std::vector<int> dead_ends;
    int num_states = 0;

    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key)) {
            continue;
        }
        if (key == "mdp") {
            if (!(ls >> num_states >> initial) || num_states <= 0) {
                parse_error(line_no, "expected 'mdp <num_states> <initial_state>'");
            }
            have_header = true;
        } else if (key == "gamma") {
            if (!(ls >> gamma)) parse_error(line_no, "bad gamma");
        } else if (key == "deadend_penalty") {
            if (!(ls >> penalty)) parse_error(line_no, "bad deadend_penalty");
        } else if (key == "horizon") {
            if (!(ls >> horizon) || horizon < 0) parse_error(line_no, "bad horizon");
        } else if (key == "objective") {
            std::string v;
            ls >> v;
            if (v == "cost") {
                objective = Objective::cost;
            } else if (v == "reward") {
                objective = Objective::reward;
            } else {
                parse_error(line_no, "objective must be cost or reward");
            }
        } else if (key == "goal" || key == "deadend") {
            int s;
            bool any = false;
            while (ls >> s) {
                (key == "goal" ? goals : dead_ends).push_back(s);
                any = true;
            }
            if (!any) parse_error(line_no, "expected state ids");
        } else if (key == "action") {
            PendingAction act;
            if (!(ls >> act.state >> act.name >> act.payoff)) {
                parse_error(line_no, "expected 'action <s> <name> <payoff> <s'>:<p> ...'");
            }
            std::string tok;
            while (ls >> tok) {
                auto colon = tok.find(':');
                if (colon == std::string::npos) parse_error(line_no, "outcome must be s:p");
                try {
                    act.outcomes.push_back({std::stoi(tok.substr(0, colon)),
                                            std::stod(tok.substr(colon + 1))});
                } catch (const std::exception&) {
                    parse_error(line_no, "bad outcome '" + tok + "'");
                }
            }
            if (act.outcomes.empty()) parse_error(line_no, "action without outcomes");
            pending.push_back(std::move(act));
        } else {
            parse_error(line_no, "unknown directive '" + key + "'");
        }
    }
    if (!have_header) {
        throw std::invalid_argument("mdp file: missing 'mdp' header");
    }
    model = TabularMdp(num_states, gamma, penalty, objective);
    for (int g : goals) {
        if (g < 0 || g >= num_states) throw std::invalid_argument("mdp file: goal out of range");
        model.set_goal(g);
    }
    for (int d : dead_ends) {
        if (d < 0 || d >= num_states) throw std::invalid_argument("mdp file: deadend out of range");
        model.set_dead_end(d);
    }
    for (auto& act : pending) {
        model.add_action(act.state, std::move(act.name), act.payoff, std::move(act.outcomes));
    }
    model.set_initial_state(initial);
    model.set_default_horizon(horizon);
    model.validate();
    return model;
}

void write_tabular_mdp(std::ostream& out, const TabularMdp& model) {
    out.precision(17);
    out << "mdp " << model.num_states() << ' ' << model.initial_state() << '\n';
    out << "gamma " << model.gamma() << '\n';
    out << "deadend_penalty " << model.dead_end_penalty() << '\n';
    out << "horizon " << model.default_horizon() << '\n';
    out << "objective " << (model.objective() == Objective::cost ? "cost" : "reward") << '\n';
    for (int s = 0; s < model.num_states(); ++s) {
        if (model.is_goal(s)) out << "goal " << s << '\n';
        if (model.is_dead_end(s)) out << "deadend " << s << '\n';
    }
    for (int s = 0; s < model.num_states(); ++s) {
        for (ActionId a : model.actions(s)) {
            out << "action " << s << ' ' << model.action_name(a) << ' ' << model.payoff(a);
            for (const auto& o : model.outcomes(s, a)) {
                out << ' ' << o.state << ':' << o.probability;
            }
            out << '\n';
        }
    }
}

}  // namespace aotplan
