#include "aotplan/backward_induction.hpp"
#include "aotplan/domains/ctp.hpp"
#include "support/ctp_oracle.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace aotplan;
using ctp::Belief;
using ctp::EdgeStatus;

namespace {

/// Two disjoint two-edge paths 0-1-3 and 0-2-3, unit costs.
ctp::Instance diamond(double prior = 0.5) {
    ctp::Instance inst;
    inst.num_nodes = 4;
    inst.source = 0;
    inst.target = 3;
    inst.edges = {{0, 1, 1.0, prior}, {1, 3, 1.0, prior}, {0, 2, 1.0, prior}, {2, 3, 1.0, prior}};
    return inst;
}

ctp::Weather weather(std::initializer_list<int> blocked) {
    ctp::Weather w;
    for (int e : blocked) {
        w.blocked.set(static_cast<std::size_t>(e));
    }
    return w;
}

double probability_sum(const std::vector<Outcome<Belief>>& outs) {
    double total = 0.0;
    for (const auto& o : outs) {
        total += o.probability;
    }
    return total;
}

}  // namespace

TEST_CASE("instance format round-trip and validation") {
    auto inst = diamond();
    std::stringstream buf;
    ctp::write_instance(buf, inst, 0.5625);
    std::optional<double> pbad;
    auto back = ctp::parse_instance(buf, &pbad);
    REQUIRE(pbad);
    CHECK(*pbad == 0.5625);
    CHECK(back.num_nodes == 4);
    REQUIRE(back.num_edges() == 4);
    CHECK(back.edges[1].u == 1);
    CHECK(back.edges[1].v == 3);
    CHECK(back.edges[1].prior == 0.5);

    auto parse = [](const std::string& text) {
        std::istringstream in(text);
        return ctp::parse_instance(in);
    };
    CHECK_THROWS_AS(parse("ctp 3 2 0 2\n0 1 1 0.1\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse("ctp 3 1 0 2\n0 1 -1 0.1\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse("ctp 3 1 0 2\n0 1 1 1.0\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse("0 1 1 0.1\n"), std::invalid_argument);
}

TEST_CASE("unsensed start offers only the sense action") {
    ctp::Model m(diamond());
    Belief b = m.initial_belief();
    CHECK(m.actions(b) == std::vector<ActionId>{m.sense_action()});
    CHECK(m.cost(b, m.sense_action()) == 0.0);
    auto outs = m.outcomes(b, m.sense_action());
    REQUIRE(outs.size() == 4);
    for (const auto& o : outs) {
        CHECK(o.probability == doctest::Approx(0.25));
        CHECK(o.state.location == 0);
        CHECK(o.state.status(0) != EdgeStatus::unknown);
        CHECK(o.state.status(2) != EdgeStatus::unknown);
        CHECK(o.state.status(1) == EdgeStatus::unknown);
    }
}

TEST_CASE("frontier actions on the diamond") {
    ctp::Model m(diamond());
    Belief b = m.initial_belief(weather({}));
    CHECK(m.actions(b) == std::vector<ActionId>{1, 2});
    CHECK(m.cost(b, 1) == 1.0);
    CHECK(m.cost(b, 2) == 1.0);
    CHECK_THROWS_AS(m.cost(b, 3), std::invalid_argument);

    Belief half = m.initial_belief(weather({0}));
    CHECK(m.actions(half) == std::vector<ActionId>{2});
}

TEST_CASE("move transitions") {
    SUBCASE("one unknown incident edge with prior 0.3") {
        ctp::Model m(diamond(0.3));
        Belief b = m.initial_belief(weather({}));
        auto outs = m.outcomes(b, 1);
        REQUIRE(outs.size() == 2);
        CHECK(outs[0].probability == doctest::Approx(0.7));
        CHECK(outs[0].state.status(1) == EdgeStatus::free);
        CHECK(outs[1].probability == doctest::Approx(0.3));
        CHECK(outs[1].state.status(1) == EdgeStatus::blocked);
        CHECK(outs[0].state.location == 1);
    }
    SUBCASE("two unknown incident edges") {
        ctp::Instance inst;
        inst.num_nodes = 4;
        inst.source = 0;
        inst.target = 3;
        inst.edges = {{0, 1, 1.0, 0.0}, {1, 2, 1.0, 0.5}, {1, 3, 1.0, 0.5}, {2, 3, 1.0, 0.0}};
        ctp::Model m(inst);
        Belief b = m.initial_belief(weather({}));
        auto outs = m.outcomes(b, 1);
        REQUIRE(outs.size() == 4);
        for (const auto& o : outs) {
            CHECK(o.probability == doctest::Approx(0.25));
        }
    }
    SUBCASE("no unknown edges left gives a single outcome") {
        ctp::Model m(diamond());
        Belief b = m.initial_belief(weather({}));
        for (int e = 0; e < 4; ++e) {
            b.known.set(static_cast<std::size_t>(e));
        }
        CHECK(m.actions(b) == std::vector<ActionId>{3});
        CHECK(m.cost(b, 3) == 2.0);
        auto outs = m.outcomes(b, 3);
        REQUIRE(outs.size() == 1);
        CHECK(outs[0].probability == 1.0);
        CHECK(m.is_goal(outs[0].state));
    }
    SUBCASE("only edges at nodes on the path are sensed") {
        ctp::Instance inst;
        inst.num_nodes = 4;
        inst.source = 0;
        inst.target = 3;
        inst.edges = {{0, 1, 1.0, 0.0}, {1, 2, 1.0, 0.0}, {2, 3, 5.0, 0.4}, {1, 3, 9.0, 0.2}};
        ctp::Model m(inst);
        Belief b = m.initial_belief(weather({}));
        b = m.apply(b, 1, weather({}));
        CHECK(b.status(3) == EdgeStatus::free);
        CHECK(b.status(2) == EdgeStatus::unknown);
    }
}

TEST_CASE("dead-end detection") {
    ctp::Model m(diamond());
    CHECK(m.is_dead_end(m.initial_belief(weather({0, 2}))));
    CHECK(m.actions(m.initial_belief(weather({0, 2}))).empty());
    CHECK_FALSE(m.is_dead_end(m.initial_belief(weather({0}))));
    CHECK(m.dead_end_penalty() == 8.0);
    ctp::Model custom(diamond(), 3.0);
    CHECK(custom.dead_end_penalty() == 3.0);

    // every belief over the diamond: dead-end iff no usable path under optimism
    testing::CtpWeatherOracle oracle(diamond(), 8.0);
    for (int loc = 0; loc < 4; ++loc) {
        for (int code = 0; code < 81; ++code) {
            Belief b;
            b.location = loc;
            std::uint32_t usable = 0;
            int c = code;
            for (int e = 0; e < 4; ++e, c /= 3) {
                if (c % 3 != 0) {
                    b.known.set(static_cast<std::size_t>(e));
                }
                if (c % 3 == 2) {
                    b.blocked.set(static_cast<std::size_t>(e));
                } else {
                    usable |= 1u << e;
                }
            }
            bool expect = loc != 3 && !oracle.reachable(loc, usable);
            CHECK(m.is_dead_end(b) == expect);
        }
    }
}

TEST_CASE("optimistic base policy") {
    ctp::Model m(diamond());
    CHECK(m.optimistic_action(m.initial_belief()) == m.sense_action());
    Belief b = m.initial_belief(weather({}));
    CHECK(m.optimistic_action(b) == 1);
    CHECK(m.optimistic_distance(b) == 2.0);

    Belief after = m.apply(b, 1, weather({1}));
    CHECK(m.optimistic_action(after) == 2);
    CHECK(m.optimistic_distance(after) == 3.0);

    // fully known solvable belief: the exact shortest path move
    auto gen = ctp::generate({8, 0.2, 0.1, 0.5, 5});
    ctp::Model big(gen.instance);
    testing::CtpWeatherOracle oracle(gen.instance, big.dead_end_penalty());
    Belief known;
    known.location = gen.instance.source;
    for (int e = 0; e < gen.instance.num_edges(); ++e) {
        known.known.set(static_cast<std::size_t>(e));
    }
    CHECK(big.optimistic_action(known) == gen.instance.target);
    CHECK(big.cost(known, gen.instance.target) == oracle.clairvoyant(0));
    CHECK(big.optimistic_distance(known) == oracle.clairvoyant(0));
}

TEST_CASE("generator and P(bad)") {
    SUBCASE("priors all zero") {
        auto g = ctp::generate({10, 0.3, 0.0, 0.0, 3});
        CHECK(g.pbad == 0.0);
    }
    SUBCASE("single edge") {
        ctp::Instance inst;
        inst.num_nodes = 2;
        inst.source = 0;
        inst.target = 1;
        inst.edges = {{0, 1, 1.0, 0.2}};
        CHECK(ctp::pbad_exact(inst) == doctest::Approx(0.2));
    }
    SUBCASE("diamond") {
        CHECK(ctp::pbad_exact(diamond()) == doctest::Approx(0.5625));
        CHECK(testing::CtpWeatherOracle(diamond(), 8.0).pbad() == doctest::Approx(0.5625));
    }
    SUBCASE("generated instances agree with enumeration") {
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            auto g = ctp::generate({7, 0.2, 0.1, 0.5, seed});
            REQUIRE(g.instance.num_edges() <= 16);
            CHECK(ctp::is_solvable(g.instance, ctp::Weather{}));
            testing::CtpWeatherOracle oracle(g.instance, 1.0);
            CHECK(std::abs(g.pbad - oracle.pbad()) <= 1e-12);
        }
    }
    SUBCASE("same seed, same instance") {
        auto a = ctp::generate({10, 0.3, 0.1, 0.5, 9});
        auto b = ctp::generate({10, 0.3, 0.1, 0.5, 9});
        std::ostringstream x;
        std::ostringstream y;
        ctp::write_instance(x, a.instance, a.pbad);
        ctp::write_instance(y, b.instance, b.pbad);
        CHECK(x.str() == y.str());
    }
    SUBCASE("bad parameters") {
        CHECK_THROWS_AS(ctp::generate({1, 0.3, 0.1, 0.5, 1}), std::invalid_argument);
        CHECK_THROWS_AS(ctp::generate({5, 0.3, 0.5, 0.1, 1}), std::invalid_argument);
    }
}

TEST_CASE("belief transitions along random walks") {
    auto g = ctp::generate({10, 0.25, 0.1, 0.5, 3});
    ctp::Model m(g.instance);
    Rng rng(8);
    for (int walk = 0; walk < 200; ++walk) {
        Belief b = m.initial_belief();
        for (int step = 0; step < 12 && !is_terminal(m, b); ++step) {
            auto acts = m.actions(b);
            REQUIRE_FALSE(acts.empty());
            ActionId a = acts[uniform_index(rng, acts.size())];
            auto outs = m.outcomes(b, a);
            CHECK(std::abs(probability_sum(outs) - 1.0) <= 1e-9);
            Belief next = m.sample(b, a, rng);
            bool listed = false;
            for (const auto& o : outs) {
                listed = listed || o.state == next;
            }
            CHECK(listed);
            CHECK((b.known & ~next.known).none());
            CHECK((b.blocked & ~next.blocked).none());
            CHECK((next.blocked & ~next.known).none());
            b = next;
        }
    }
}

TEST_CASE("visited nodes have every incident edge sensed") {
    auto g = ctp::generate({10, 0.3, 0.1, 0.5, 4});
    ctp::Model m(g.instance);
    Rng rng(2);
    for (int walk = 0; walk < 100; ++walk) {
        ctp::Weather w = ctp::sample_weather(g.instance, rng);
        Belief b = m.initial_belief(w);
        std::vector<int> visited{b.location};
        while (!is_terminal(m, b)) {
            auto acts = m.actions(b);
            b = m.apply(b, acts[uniform_index(rng, acts.size())], w);
            visited.push_back(b.location);
            for (int v : visited) {
                for (int e = 0; e < g.instance.num_edges(); ++e) {
                    const auto& ed = g.instance.edges[static_cast<std::size_t>(e)];
                    if (ed.u == v || ed.v == v) {
                        CHECK(b.status(e) != EdgeStatus::unknown);
                        CHECK((b.status(e) == EdgeStatus::blocked) == w.blocked.test(static_cast<std::size_t>(e)));
                    }
                }
            }
        }
    }
}

TEST_CASE("belief-MDP optimum matches the weather expectimax on the diamond") {
    for (double prior : {0.0, 0.2, 0.5}) {
        auto inst = diamond(prior);
        ctp::Model m(inst);
        auto bi = backward_induction(m, m.initial_belief(), inst.num_nodes);
        testing::CtpWeatherOracle oracle(inst, m.dead_end_penalty());
        CHECK(std::abs(bi.root_value - oracle.optimal_value()) <= 1e-9);
    }
}

TEST_CASE("optimistic policy is never better than the optimum") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto g = ctp::generate({6, 0.3, 0.1, 0.5, seed});
        ctp::Model m(g.instance);
        auto bi = backward_induction(m, m.initial_belief(), g.instance.num_nodes);
        testing::CtpWeatherOracle oracle(g.instance, m.dead_end_penalty());
        const int edges = g.instance.num_edges();
        double expected = 0.0;
        for (std::uint32_t bits = 0; bits < (1u << edges); ++bits) {
            double p = 1.0;
            for (int e = 0; e < edges; ++e) {
                double q = g.instance.edges[static_cast<std::size_t>(e)].prior;
                p *= (bits >> e & 1u) ? q : 1.0 - q;
            }
            auto w = testing::to_weather(bits, edges);
            Belief b = m.initial_belief(w);
            double cost = 0.0;
            while (!is_terminal(m, b)) {
                ActionId a = m.optimistic_action(b);
                cost += m.cost(b, a);
                b = m.apply(b, a, w);
            }
            if (m.is_dead_end(b)) {
                cost += m.dead_end_penalty();
            } else {
                CHECK(cost >= oracle.clairvoyant(bits) - 1e-9);
            }
            expected += p * cost;
        }
        CHECK(expected >= bi.root_value - 1e-9);
    }
}
