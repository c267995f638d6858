#include "aotplan/backward_induction.hpp"
#include "aotplan/tabular_mdp.hpp"
#include "support/models.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

using namespace aotplan;

TEST_CASE("canonicalize_to_cost flips reward signs") {
    TabularMdp m(2, 1.0, 0.0, Objective::reward);
    m.set_goal(1);
    ActionId a = m.add_action(0, "lose3", -3.0, {{1, 1.0}});
    ActionId b = m.add_action(0, "free", 0.0, {{1, 1.0}});
    auto c = canonicalize_to_cost(m);
    CHECK(c.objective() == Objective::cost);
    CHECK(c.cost(0, a) == 3.0);
    CHECK(c.cost(0, b) == 0.0);
    CHECK(c.payoff(a) == 3.0);

    auto again = canonicalize_to_cost(c);
    CHECK(again.cost(0, a) == 3.0);
}

TEST_CASE("reward argmax equals cost argmin on random Q vectors") {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        int n = 2 + static_cast<int>(uniform_index(rng, 6));
        TabularMdp m(2, 1.0, 0.0, Objective::reward);
        m.set_goal(1);
        std::vector<double> rewards;
        for (int i = 0; i < n; ++i) {
            rewards.push_back(std::uniform_real_distribution<double>(-10, 10)(rng));
            m.add_action(0, "a" + std::to_string(i), rewards.back(), {{1, 1.0}});
        }
        auto c = canonicalize_to_cost(m);
        auto best_reward = std::max_element(rewards.begin(), rewards.end()) - rewards.begin();
        auto bi = backward_induction(c, 0, 1);
        CHECK(bi.policy.at({0, 1}) == best_reward);
        CHECK(bi.root_value == doctest::Approx(-rewards[static_cast<std::size_t>(best_reward)]));
    }
}

TEST_CASE("backward induction on chain2") {
    auto m = make_chain2();
    SUBCASE("H = 1") {
        auto r = backward_induction(m, 0, 1);
        CHECK(r.root_value == doctest::Approx(0.5));
        CHECK(m.action_name(r.policy.at({0, 1})) == "B");
    }
    SUBCASE("H = 2") {
        auto r = backward_induction(m, 0, 2);
        CHECK(r.root_value == doctest::Approx(0.75));
        CHECK(m.action_name(r.policy.at({0, 2})) == "B");
        auto qs = r.table.q_values.at({0, 2});
        REQUIRE(qs.size() == 2);
        CHECK(qs[0].second == doctest::Approx(1.0));
        CHECK(qs[1].second == doctest::Approx(0.75));
    }
    SUBCASE("H = 0") {
        auto r = backward_induction(m, 0, 0);
        CHECK(r.root_value == 0.0);
        CHECK(r.policy.empty());
    }
    SUBCASE("negative horizon") {
        CHECK_THROWS_AS(backward_induction(m, 0, -1), std::invalid_argument);
    }
}

TEST_CASE("backward induction ties go to the first action") {
    TabularMdp m(2, 1.0);
    m.set_goal(1);
    m.add_action(0, "first", 2.0, {{1, 1.0}});
    m.add_action(0, "second", 2.0, {{1, 1.0}});
    auto r = backward_induction(m, 0, 3);
    CHECK(m.action_name(r.policy.at({0, 3})) == "first");
}

TEST_CASE("backward induction terminal values") {
    TabularMdp m(3, 1.0, 7.0);
    m.set_goal(1);
    m.set_dead_end(2);
    m.add_action(0, "risky", 1.0, {{1, 0.5}, {2, 0.5}});
    auto r = backward_induction(m, 0, 2);
    CHECK(r.table.value(1, 1) == 0.0);
    CHECK(r.table.value(2, 1) == 7.0);
    CHECK(r.root_value == doctest::Approx(1.0 + 0.5 * 7.0));
}

TEST_CASE("backward induction resource limit") {
    auto m = make_chain2();
    CHECK_THROWS_AS(backward_induction(m, 0, 5, 3), ResourceLimitError);
    CHECK_NOTHROW(backward_induction(m, 0, 5, 100));
}

TEST_CASE("backward induction matches the layered oracle and is nonnegative") {
    auto suite = testing::random_suite(100, 11);
    for (const auto& c : suite) {
        auto layers = testing::value_layers(c.model, c.horizon);
        auto r = backward_induction(c.model, 0, c.horizon);
        CHECK(r.root_value == doctest::Approx(layers[static_cast<std::size_t>(c.horizon)][0]).epsilon(1e-12));
        for (const auto& [id, v] : r.table.values) {
            CHECK(v >= 0.0);
            CHECK(v == doctest::Approx(layers[static_cast<std::size_t>(id.depth)][static_cast<std::size_t>(id.state)]));
        }
    }
}

TEST_CASE("sample_successor") {
    auto m = make_chain2();
    SUBCASE("deterministic outcome") {
        Rng rng(1);
        for (int i = 0; i < 100; ++i) {
            CHECK(sample_successor(m, 0, 0, rng) == 1);
        }
    }
    SUBCASE("frequency of the goal under B") {
        Rng rng(2024);
        int goals = 0;
        for (int i = 0; i < 10000; ++i) {
            goals += sample_successor(m, 0, 1, rng) == 1 ? 1 : 0;
        }
        double f = goals / 10000.0;
        CHECK(f >= 0.48);
        CHECK(f <= 0.52);
    }
    SUBCASE("same seed, same sequence") {
        Rng a(99);
        Rng b(99);
        for (int i = 0; i < 200; ++i) {
            CHECK(sample_successor(m, 0, 1, a) == sample_successor(m, 0, 1, b));
        }
    }
    SUBCASE("inapplicable action") {
        Rng rng(3);
        CHECK_THROWS_AS(sample_successor_checked(m, 1, 0, rng), std::invalid_argument);
        CHECK_THROWS_AS(sample_successor_checked(m, 0, 5, rng), std::invalid_argument);
        CHECK_THROWS(sample_successor(m, 1, 0, rng));
    }
}

TEST_CASE("horizon node identity merges duplicates") {
    using Id = HorizonNodeId<int>;
    NodeHashOf<TabularMdp> hash;
    Id a{3, 2};
    Id b{3, 2};
    Id c{3, 1};
    CHECK(a == b);
    CHECK(hash(a) == hash(b));
    CHECK_FALSE(a == c);
    std::unordered_set<Id, NodeHashOf<TabularMdp>> ids{a, b, c};
    CHECK(ids.size() == 2);
}

TEST_CASE("transition distributions sum to one on the random suite") {
    auto suite = testing::random_suite(200, 5);
    for (const auto& c : suite) {
        CHECK_NOTHROW(c.model.validate());
        for (int s = 0; s < c.model.num_states(); ++s) {
            if (is_terminal(c.model, s)) {
                CHECK(c.model.actions(s).empty());
                continue;
            }
            for (ActionId a : c.model.actions(s)) {
                double total = 0.0;
                for (const auto& o : c.model.outcomes(s, a)) {
                    CHECK(o.probability > 0.0);
                    total += o.probability;
                }
                CHECK(std::abs(total - 1.0) <= 1e-9);
            }
        }
    }
}

TEST_CASE("validate rejects broken models") {
    SUBCASE("probabilities") {
        TabularMdp m(2, 1.0);
        m.set_goal(1);
        m.add_action(0, "a", 1.0, {{1, 0.6}});
        CHECK_THROWS_AS(m.validate(), std::invalid_argument);
    }
    SUBCASE("terminal with actions") {
        TabularMdp m(2, 1.0);
        m.set_goal(1);
        m.add_action(0, "a", 1.0, {{1, 1.0}});
        m.add_action(1, "b", 1.0, {{1, 1.0}});
        CHECK_THROWS_AS(m.validate(), std::invalid_argument);
    }
    SUBCASE("non-terminal without actions") {
        TabularMdp m(2, 1.0);
        m.set_goal(1);
        CHECK_THROWS_AS(m.validate(), std::invalid_argument);
    }
    SUBCASE("gamma") {
        TabularMdp m(2, 1.5);
        m.set_goal(1);
        m.add_action(0, "a", 1.0, {{1, 1.0}});
        CHECK_THROWS_AS(m.validate(), std::invalid_argument);
    }
}

TEST_CASE("tabular text format round-trip") {
    Rng rng(17);
    for (int i = 0; i < 20; ++i) {
        auto m = make_random_mdp(testing::suite_params(), rng);
        std::stringstream buf;
        write_tabular_mdp(buf, m);
        auto back = parse_tabular_mdp(buf);
        REQUIRE(back.num_states() == m.num_states());
        CHECK(back.gamma() == m.gamma());
        CHECK(back.dead_end_penalty() == m.dead_end_penalty());
        for (int s = 0; s < m.num_states(); ++s) {
            CHECK(back.is_goal(s) == m.is_goal(s));
            CHECK(back.is_dead_end(s) == m.is_dead_end(s));
            REQUIRE(back.actions(s) == m.actions(s));
            for (ActionId a : m.actions(s)) {
                CHECK(back.cost(s, a) == m.cost(s, a));
                auto x = back.outcomes(s, a);
                auto y = m.outcomes(s, a);
                REQUIRE(x.size() == y.size());
                for (std::size_t j = 0; j < x.size(); ++j) {
                    CHECK(x[j].state == y[j].state);
                    CHECK(x[j].probability == y[j].probability);
                }
            }
        }
    }
}

TEST_CASE("tabular parse errors") {
    auto parse = [](const std::string& text) {
        std::istringstream in(text);
        return parse_tabular_mdp(in);
    };
    CHECK_THROWS_AS(parse("gamma 1\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse("mdp 2 0\nfoo 1\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse("mdp 2 0\ngoal 1\naction 0 a 1 1-1\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse("mdp 2 0\ngoal 5\n"), std::invalid_argument);
    auto ok = parse("# chain\nmdp 2 0\ngoal 1\naction 0 A 1 1:1  # comment\nobjective reward\n");
    CHECK(ok.objective() == Objective::reward);
    CHECK(ok.cost(0, 0) == -1.0);
}
