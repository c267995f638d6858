#pragma once

#include "aotplan/mdp.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace aotplan {

enum class Objective { cost, reward };

/// Explicit MDP over states 0..n-1 with per-state action lists.
///
/// In reward form the stored payoff is r(a,s) and `cost()` reports −r(a,s),
/// so planners always see a cost model.
class TabularMdp {
public:
    using State = int;
    struct StateHash {
        std::uint64_t operator()(int s) const { return hash_combine(0, static_cast<std::uint64_t>(s)); }
    };

    TabularMdp() = default;
    TabularMdp(int num_states, double gamma, double dead_end_penalty = 0.0,
               Objective objective = Objective::cost);

    ActionId add_action(int state, std::string name, double payoff,
                        std::vector<Outcome<int>> outcomes);
    void set_goal(int s);
    void set_dead_end(int s);
    void set_initial_state(int s) { initial_ = s; }
    void set_default_horizon(int h) { default_horizon_ = h; }

    int num_states() const { return static_cast<int>(state_actions_.size()); }
    int initial_state() const { return initial_; }
    int default_horizon() const { return default_horizon_; }
    Objective objective() const { return objective_; }

    std::vector<ActionId> actions(int s) const { return state_actions_.at(s); }
    std::vector<Outcome<int>> outcomes(int s, ActionId a) const;
    double cost(int s, ActionId a) const;
    /// Raw stored payoff: a reward in reward form, a cost in cost form.
    double payoff(ActionId a) const { return actions_.at(a).payoff; }
    bool is_goal(int s) const { return goal_.at(s) != 0; }
    bool is_dead_end(int s) const { return dead_end_.at(s) != 0; }
    double gamma() const { return gamma_; }
    double dead_end_penalty() const { return dead_end_penalty_; }
    std::string action_name(ActionId a) const { return actions_.at(a).name; }

    /// Throws std::invalid_argument when a structural invariant is broken.
    void validate() const;

private:
    friend TabularMdp canonicalize_to_cost(const TabularMdp& model);

    struct ActionEntry {
        int state = 0;
        std::string name;
        double payoff = 0.0;
        std::vector<Outcome<int>> outcomes;
    };

    std::vector<std::vector<ActionId>> state_actions_;
    std::vector<ActionEntry> actions_;
    std::vector<char> goal_;
    std::vector<char> dead_end_;
    double gamma_ = 1.0;
    double dead_end_penalty_ = 0.0;
    Objective objective_ = Objective::cost;
    int initial_ = 0;
    int default_horizon_ = 10;
};

static_assert(MdpModel<TabularMdp>);

/// Returns a cost-form copy with c(a,s) = −r(a,s). Cost-form input is copied as is.
TabularMdp canonicalize_to_cost(const TabularMdp& model);

/// x0 with A: cost 1 to goal; B: cost 0.5, goal w.p. 0.5 else stay. γ = 1.
TabularMdp make_chain2();

struct RandomMdpParams {
    int min_states = 2;
    int max_states = 8;
    int max_actions = 3;
    int max_outcomes = 3;
    double min_cost = 0.0;
    double max_cost = 10.0;
    double dead_end_probability = 0.1;
    double dead_end_penalty = 50.0;
    std::vector<double> gammas{1.0, 0.95};
};

/// Random small MDP; state 0 is the initial state and is never terminal.
TabularMdp make_random_mdp(const RandomMdpParams& params, Rng& rng);

/// Text format, one directive per line (`#` starts a comment):
///   mdp <num_states> <initial_state>
///   gamma <g> | deadend_penalty <D> | horizon <H> | objective cost|reward
///   goal <s>... | deadend <s>...
///   action <s> <name> <payoff> <s'>:<p> ...
TabularMdp parse_tabular_mdp(std::istream& in);
void write_tabular_mdp(std::ostream& out, const TabularMdp& model);

}  // namespace aotplan
