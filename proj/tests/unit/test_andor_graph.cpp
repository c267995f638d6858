#include "aotplan/andor_graph.hpp"
#include "aotplan/backward_induction.hpp"
#include "aotplan/tabular_mdp.hpp"
#include "support/models.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace aotplan;

namespace {

using Graph = ExplicitGraph<TabularMdp>;
using Source = LeafEvaluator<TabularMdp>;

Source zero_source() { return Source::deterministic(zero_heuristic<int>()); }

/// Fixed pseudo-random h(s,d) in [0, 10).
Source hashed_source(std::uint64_t salt) {
    return Source::deterministic([salt](const int& s, int d) {
        auto x = hash_combine(hash_combine(salt, static_cast<std::uint64_t>(s)), static_cast<std::uint64_t>(d));
        return static_cast<double>(x % 10000) / 1000.0;
    });
}

/// Expands `steps` randomly chosen tips, updating after each one.
void grow(Graph& g, std::size_t steps, Rng& rng) {
    for (std::size_t i = 0; i < steps && !g.tips().empty(); ++i) {
        NodeRef t = g.tips()[uniform_index(rng, g.tips().size())];
        g.expand(t, rng);
        g.update_ancestors(t, rng);
    }
}

}  // namespace

TEST_CASE("get_or_create merges duplicates and classifies terminals") {
    auto m = make_chain2();
    auto src = zero_source();
    Graph g(m, src);
    Rng rng(1);
    NodeRef root = g.set_root(0, 2, rng);
    CHECK(g.node(root).is_tip());
    g.expand(root, rng);
    auto goal = g.find(1, 1);
    REQUIRE(goal);
    CHECK(g.node(*goal).parents.size() == 2);
    CHECK(g.node(*goal).terminal);
    CHECK(g.node(*goal).value == 0.0);

    NodeRef again = g.get_or_create(1, 1, kNoNode, rng);
    CHECK(again == *goal);

    NodeRef goal3 = g.get_or_create(1, 3, kNoNode, rng);
    CHECK(g.node(goal3).terminal);
    CHECK(g.node(goal3).value == 0.0);

    NodeRef leaf = g.get_or_create(0, 0, kNoNode, rng);
    CHECK(g.node(leaf).terminal);
    CHECK(g.node(leaf).value == 0.0);

    CHECK_THROWS_AS(g.get_or_create(0, -1, kNoNode, rng), std::invalid_argument);
}

TEST_CASE("dead-end nodes are terminal with value D") {
    TabularMdp m(3, 1.0, 12.0);
    m.set_goal(1);
    m.set_dead_end(2);
    m.add_action(0, "a", 1.0, {{2, 1.0}});
    auto src = zero_source();
    Graph g(m, src);
    Rng rng(1);
    g.set_root(0, 3, rng);
    g.expand(g.root(), rng);
    g.update_ancestors(g.root(), rng);
    auto de = g.find(2, 2);
    REQUIRE(de);
    CHECK(g.node(*de).terminal);
    CHECK(g.node(*de).value == 12.0);
    CHECK(g.node(g.root()).value == 13.0);
}

TEST_CASE("expand on chain2") {
    auto m = make_chain2();
    auto src = zero_source();
    Graph g(m, src);
    Rng rng(1);
    NodeRef root = g.set_root(0, 2, rng);
    std::size_t created = g.expand(root, rng);
    CHECK(created == 2);
    const auto& n = g.node(root);
    CHECK(n.expanded);
    REQUIRE(n.num_children == 2);
    const AndNode& b = g.and_node(n.first_child + 1);
    CHECK(m.action_name(b.action) == "B");
    REQUIRE(b.children.size() == 2);
    CHECK(g.node(b.children[0].child).id == HorizonNodeId<int>{1, 1});
    CHECK(g.node(b.children[1].child).id == HorizonNodeId<int>{0, 1});
    CHECK(b.children[0].probability == 0.5);
    CHECK(b.children[1].probability == 0.5);
    CHECK(std::find(g.tips().begin(), g.tips().end(), root) == g.tips().end());

    CHECK_THROWS_AS(g.expand(root, rng), std::logic_error);
    CHECK_THROWS_AS(g.expand(*g.find(1, 1), rng), std::logic_error);
}

TEST_CASE("expanding into an existing node adds a parent edge only") {
    TabularMdp m(3, 1.0);
    m.set_goal(2);
    m.add_action(0, "left", 1.0, {{1, 1.0}});
    m.add_action(0, "right", 2.0, {{1, 1.0}});
    m.add_action(1, "go", 1.0, {{2, 1.0}});
    auto src = zero_source();
    Graph g(m, src);
    Rng rng(1);
    g.set_root(0, 3, rng);
    CHECK(g.expand(g.root(), rng) == 1);
    auto mid = g.find(1, 2);
    REQUIRE(mid);
    CHECK(g.node(*mid).parents.size() == 2);
    CHECK(g.num_or_nodes() == 2);
}

TEST_CASE("update_ancestors reproduces the chain2 optimum") {
    auto m = make_chain2();
    auto src = zero_source();
    Rng rng(1);

    SUBCASE("leaf set from backward induction") {
        Graph g(m, src);
        g.set_root(0, 2, rng);
        g.expand(g.root(), rng);
        NodeRef leaf = *g.find(0, 1);
        g.node(leaf).value = backward_induction(m, 0, 1).root_value;
        auto changed = g.update_ancestors(leaf, rng);
        CHECK(g.node(g.root()).value == doctest::Approx(0.75));
        CHECK(m.action_name(g.and_node(g.node(g.root()).marked).action) == "B");
        CHECK(changed.size() == 1);
    }
    SUBCASE("full expansion") {
        Graph g(m, src);
        g.set_root(0, 2, rng);
        g.expand(g.root(), rng);
        g.update_ancestors(g.root(), rng);
        NodeRef leaf = *g.find(0, 1);
        g.expand(leaf, rng);
        g.update_ancestors(leaf, rng);
        CHECK(g.tips().empty());
        CHECK(g.node(g.root()).value == doctest::Approx(0.75));
        CHECK(g.audit() <= 1e-12);
    }
    SUBCASE("unchanged leaf gives an empty changed set") {
        Graph g(m, src);
        g.set_root(0, 2, rng);
        g.expand(g.root(), rng);
        g.update_ancestors(g.root(), rng);
        NodeRef leaf = *g.find(0, 1);
        auto changed = g.update_ancestors(leaf, rng);
        CHECK(changed.empty());
    }
}

TEST_CASE("marked action is kept on ties") {
    TabularMdp m(2, 1.0);
    m.set_goal(1);
    m.add_action(0, "x", 1.0, {{0, 1.0}});
    m.add_action(0, "y", 1.0, {{0, 1.0}});
    auto src = zero_source();
    Graph g(m, src);
    Rng rng(1);
    g.set_root(0, 3, rng);
    g.expand(g.root(), rng);
    g.update_ancestors(g.root(), rng);
    CHECK(m.action_name(g.and_node(g.node(g.root()).marked).action) == "x");
}

TEST_CASE("lowering a leaf never raises an ancestor Q") {
    auto suite = testing::random_suite(60, 21);
    Rng rng(3);
    for (std::size_t i = 0; i < suite.size(); ++i) {
        const auto& c = suite[i];
        auto src = hashed_source(i);
        Graph g(c.model, src);
        g.set_root(0, c.horizon + 1, rng);
        grow(g, 6, rng);
        if (g.tips().empty()) {
            continue;
        }
        std::vector<double> before;
        for (NodeRef a = 0; a < g.num_and_nodes(); ++a) {
            before.push_back(g.and_node(a).q);
        }
        NodeRef t = g.tips()[uniform_index(rng, g.tips().size())];
        g.node(t).value -= 1.0 + uniform01(rng);
        g.update_ancestors(t, rng);
        for (NodeRef a = 0; a < g.num_and_nodes(); ++a) {
            CHECK(g.and_node(a).q <= before[a] + 1e-12);
        }
        CHECK(g.audit() <= 1e-9);
    }
}

TEST_CASE("best partial graph partition") {
    auto m = make_chain2();
    auto src = zero_source();
    Rng rng(1);
    Graph g(m, src);
    g.set_root(0, 2, rng);

    auto fresh = g.recompute_best_partial_graph();
    CHECK(fresh.in == std::vector<NodeRef>{g.root()});
    CHECK(fresh.out.empty());

    g.expand(g.root(), rng);
    g.update_ancestors(g.root(), rng);
    auto part = g.recompute_best_partial_graph();
    CHECK(part.in == std::vector<NodeRef>{*g.find(0, 1)});
    CHECK(part.out.empty());

    NodeRef leaf = *g.find(0, 1);
    g.expand(leaf, rng);
    g.update_ancestors(leaf, rng);
    auto done = g.recompute_best_partial_graph();
    CHECK(done.in.empty());
    CHECK(done.out.empty());
}

TEST_CASE("tips outside the marked subgraph are OUT") {
    TabularMdp m(4, 1.0);
    m.set_goal(3);
    m.add_action(0, "cheap", 1.0, {{1, 1.0}});
    m.add_action(0, "dear", 5.0, {{2, 1.0}});
    m.add_action(1, "go", 1.0, {{3, 1.0}});
    m.add_action(2, "go", 1.0, {{3, 1.0}});
    auto src = zero_source();
    Graph g(m, src);
    Rng rng(1);
    g.set_root(0, 3, rng);
    g.expand(g.root(), rng);
    g.update_ancestors(g.root(), rng);
    auto part = g.recompute_best_partial_graph();
    CHECK(part.in == std::vector<NodeRef>{*g.find(1, 2)});
    CHECK(part.out == std::vector<NodeRef>{*g.find(2, 2)});
    CHECK(part.in.size() + part.out.size() == g.tips().size());
}

TEST_CASE("graph invariants on random expansion sequences") {
    auto suite = testing::random_suite(80, 31);
    Rng rng(5);
    for (std::size_t i = 0; i < suite.size(); ++i) {
        const auto& c = suite[i];
        auto src = hashed_source(100 + i);
        Graph g(c.model, src);
        g.set_root(0, c.horizon, rng);
        grow(g, 1000, rng);
        CHECK(g.tips().empty());
        CHECK(g.audit() <= 1e-9);
        auto bi = backward_induction(c.model, 0, c.horizon);
        CHECK(g.num_or_nodes() <= bi.nodes);
        CHECK(g.node(g.root()).value == doctest::Approx(bi.root_value).epsilon(1e-12));
        for (NodeRef r = 0; r < g.num_or_nodes(); ++r) {
            const auto& n = g.node(r);
            CHECK(n.value == doctest::Approx(bi.table.value(n.id.state, n.id.depth)).epsilon(1e-12));
            for (NodeRef a = n.first_child; n.expanded && a < n.first_child + n.num_children; ++a) {
                double total = 0.0;
                for (const auto& e : g.and_node(a).children) {
                    CHECK(g.node(e.child).depth() == n.depth() - 1);
                    total += e.probability;
                }
                CHECK(std::abs(total - 1.0) <= 1e-9);
            }
        }
    }
}

TEST_CASE("update_ancestors is confluent under random worklist order") {
    auto suite = testing::random_suite(60, 41);
    for (std::size_t i = 0; i < suite.size(); ++i) {
        const auto& c = suite[i];
        auto src = hashed_source(200 + i);
        Rng grow_a(i);
        Rng grow_b(i);
        Graph a(c.model, src);
        Graph b(c.model, src);
        a.set_root(0, c.horizon + 1, grow_a);
        b.set_root(0, c.horizon + 1, grow_b);
        grow(a, 8, grow_a);
        grow(b, 8, grow_b);
        REQUIRE(a.num_or_nodes() == b.num_or_nodes());
        if (a.tips().empty()) {
            continue;
        }
        Rng pick(1000 + i);
        Rng order(2000 + i);
        for (int round = 0; round < 3 && !a.tips().empty(); ++round) {
            NodeRef t = a.tips()[uniform_index(pick, a.tips().size())];
            double v = 10.0 * uniform01(pick);
            a.node(t).value = v;
            b.node(t).value = v;
            a.update_ancestors(t, grow_a, UpdateOrder::ascending_depth);
            b.update_ancestors(t, grow_b, UpdateOrder::random, &order);
        }
        for (NodeRef r = 0; r < a.num_or_nodes(); ++r) {
            CHECK(a.node(r).value == doctest::Approx(b.node(r).value).epsilon(1e-12));
        }
        CHECK(b.audit() <= 1e-9);
    }
}

TEST_CASE("graph dump lists nodes and AND children") {
    auto m = make_chain2();
    auto src = zero_source();
    Graph g(m, src);
    Rng rng(1);
    g.set_root(0, 2, rng);
    g.expand(g.root(), rng);
    g.update_ancestors(g.root(), rng);
    std::ostringstream out;
    g.dump(out);
    auto text = out.str();
    CHECK(text.rfind("or 0 ", 0) == 0);
    CHECK(text.find("marked=B") != std::string::npos);
    CHECK(text.find("  and A Q=1") != std::string::npos);
}
