#pragma once

#include "aotplan/andor_graph.hpp"
#include "aotplan/leaf_evaluator.hpp"
#include "aotplan/plan_result.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <stdexcept>
#include <vector>

namespace aotplan {

/// Δ over the explicit graph: the change in a node's value needed to alter
/// the best partial graph. Indexed by NodeRef for OR and AND nodes.
struct DeltaScore {
    std::vector<double> or_delta;
    std::vector<double> and_delta;
    /// 1 for OR nodes reached from the root through marked actions.
    std::vector<char> in_best;
};

/// Tips ordered by ascending |Δ| (then node creation order).
struct TipQueues {
    std::deque<NodeRef> in;
    std::deque<NodeRef> out;
};

namespace detail {

inline bool delta_less(double a, NodeRef ra, double b, NodeRef rb) {
    double fa = std::abs(a);
    double fb = std::abs(b);
    return fa < fb || (fa == fb && ra < rb);
}

/// Keeps the `capacity` entries with smallest (|Δ|, ref).
class BoundedTipQueue {
public:
    explicit BoundedTipQueue(std::size_t capacity) : capacity_(capacity) {}

    void offer(NodeRef r, double delta) {
        if (capacity_ == 0) {
            return;
        }
        if (heap_.size() < capacity_) {
            heap_.push({delta, r});
        } else if (detail::delta_less(delta, r, heap_.top().delta, heap_.top().ref)) {
            heap_.pop();
            heap_.push({delta, r});
        }
    }

    std::deque<NodeRef> drain_sorted() {
        std::deque<NodeRef> out;
        while (!heap_.empty()) {
            out.push_front(heap_.top().ref);
            heap_.pop();
        }
        return out;
    }

private:
    struct Entry {
        double delta;
        NodeRef ref;
    };
    struct Worse {
        bool operator()(const Entry& a, const Entry& b) const {
            return detail::delta_less(a.delta, a.ref, b.delta, b.ref);
        }
    };
    std::size_t capacity_;
    std::priority_queue<Entry, std::vector<Entry>, Worse> heap_;
};

}  // namespace detail

/// Top-down Δ computation in descending d.
///
///   root: Δ = +∞
///   child n_a of n in the best graph: V(n) − Q(n_a) if a is not marked,
///     else min(Δ(n), min_{b≠a} Q(n_b) − V(n))   (+∞ when a is the only action)
///   child n_a of n outside the best graph: Δ(n) + V(n) − Q(n_a)
///   child n_s' of n_a: Δ(n_a) / (γ P_a(s'|s))
///
/// A node with several parents keeps the parent-derived score of smallest |Δ|.
/// When `queue_capacity` is non-zero the best IN and OUT tips are collected
/// during the same traversal.
template <MdpModel M>
DeltaScore compute_deltas(const ExplicitGraph<M>& graph, std::size_t queue_capacity = 0,
                          TipQueues* queues = nullptr) {
    const double inf = std::numeric_limits<double>::infinity();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const double gamma = graph.model().gamma();
    DeltaScore ds;
    ds.or_delta.assign(graph.num_or_nodes(), nan);
    ds.and_delta.assign(graph.num_and_nodes(), nan);
    ds.in_best.assign(graph.num_or_nodes(), 0);

    const NodeRef root = graph.root();
    ds.or_delta[root] = inf;
    ds.in_best[root] = 1;

    detail::BoundedTipQueue in_q(queue_capacity);
    detail::BoundedTipQueue out_q(queue_capacity);

    for (int d = graph.horizon(); d >= 0; --d) {
        for (NodeRef r : graph.layer(d)) {
            const auto& n = graph.node(r);
            const double dn = ds.or_delta[r];
            if (std::isnan(dn)) {
                continue;
            }
            if (n.is_tip()) {
                if (queues) {
                    (ds.in_best[r] ? in_q : out_q).offer(r, dn);
                }
                continue;
            }
            if (!n.expanded) {
                continue;
            }
            const NodeRef begin = n.first_child;
            const NodeRef end = begin + n.num_children;
            const bool best = ds.in_best[r] != 0;
            for (NodeRef a = begin; a < end; ++a) {
                const AndNode& an = graph.and_node(a);
                double da;
                if (best) {
                    if (a == n.marked) {
                        double alt = inf;
                        for (NodeRef b = begin; b < end; ++b) {
                            if (b != a) {
                                alt = std::min(alt, graph.and_node(b).q - n.value);
                            }
                        }
                        da = std::min(dn, alt);
                    } else {
                        da = n.value - an.q;
                    }
                } else {
                    da = dn + n.value - an.q;
                }
                ds.and_delta[a] = da;
                const bool child_best = best && a == n.marked;
                for (const auto& e : an.children) {
                    double cand = da / (gamma * e.probability);
                    double& cur = ds.or_delta[e.child];
                    if (std::isnan(cur) || std::abs(cand) < std::abs(cur)) {
                        cur = cand;
                    }
                    if (child_best) {
                        ds.in_best[e.child] = 1;
                    }
                }
            }
        }
    }
    if (queues) {
        queues->in = in_q.drain_sorted();
        queues->out = out_q.drain_sorted();
    }
    return ds;
}

struct TipSelection {
    std::vector<NodeRef> tips;
    std::size_t forced_switches = 0;
};

/// Pops up to n tips. `draw_out()` decides the side for each pick (true =
/// OUT); an empty side forces the other one. Stops early once both are empty.
template <class DrawOut>
TipSelection select_tips(TipQueues queues, std::size_t n, DrawOut&& draw_out) {
    TipSelection sel;
    for (std::size_t i = 0; i < n; ++i) {
        if (queues.in.empty() && queues.out.empty()) {
            break;
        }
        bool out = draw_out();
        if (out && queues.out.empty()) {
            out = false;
            ++sel.forced_switches;
        } else if (!out && queues.in.empty()) {
            out = true;
            ++sel.forced_switches;
        }
        auto& q = out ? queues.out : queues.in;
        sel.tips.push_back(q.front());
        q.pop_front();
    }
    return sel;
}

/// OUT with probability p.
inline TipSelection select_tips(TipQueues queues, std::size_t n, double p, Rng& rng) {
    return select_tips(std::move(queues), n, [&] { return uniform01(rng) < p; });
}

struct AotConfig {
    /// Probability of choosing an OUT tip.
    double p = 0.5;
    Budget budget;
    /// Tips per Δ traversal. Unset: max(1, ⌊k · iteration budget⌋), 100 under a
    /// pure time budget, 1 when unbounded.
    std::optional<std::size_t> batch_size;
    double batch_fraction = 0.1;
    std::uint64_t seed = 0;
    /// Classic AO*: only IN tips, stop when the best partial graph has none.
    bool in_only = false;
};

/// Anytime AO* over the finite-horizon AND/OR graph of a model.
///
/// The planner can be stepped batch by batch; `result()` is valid at any
/// batch boundary after `start()`.
template <MdpModel M>
class AnytimeAoStar {
public:
    using State = typename M::State;

    AnytimeAoStar(const M& model, LeafEvaluator<M> source, AotConfig config)
        : model_(&model),
          source_(std::move(source)),
          config_(std::move(config)),
          graph_(model, source_),
          rng_(config_.seed) {
        if (!(config_.p >= 0.0 && config_.p <= 1.0)) {
            throw std::invalid_argument("AnytimeAoStar: p must lie in [0, 1]");
        }
        if (config_.budget.iterations && *config_.budget.iterations == 0) {
            throw std::invalid_argument("AnytimeAoStar: budget must allow at least one expansion");
        }
        if (config_.batch_size && *config_.batch_size == 0) {
            throw std::invalid_argument("AnytimeAoStar: batch size must be >= 1");
        }
        batch_ = default_batch();
    }

    AnytimeAoStar(const AnytimeAoStar&) = delete;
    AnytimeAoStar& operator=(const AnytimeAoStar&) = delete;

    void start(const State& s0, int horizon) {
        if (horizon < 1) {
            throw std::invalid_argument("aot: horizon must be >= 1");
        }
        if (is_terminal(*model_, s0)) {
            throw std::invalid_argument("aot: initial state is terminal");
        }
        graph_.set_root(s0, horizon, rng_);
    }

    /// One Δ traversal plus up to N expansions. Returns false when no tips are left
    /// or the budget is spent.
    bool step() {
        if (done_ || budget_spent()) {
            return false;
        }
        TipQueues queues;
        compute_deltas(graph_, batch_, &queues);
        ++stats_.delta_traversals;
        if (config_.in_only) {
            queues.out.clear();
        }
        auto sel = select_tips(std::move(queues), batch_, config_.p, rng_);
        stats_.forced_switches += sel.forced_switches;
        if (sel.tips.empty()) {
            done_ = true;
            return false;
        }
        for (NodeRef t : sel.tips) {
            if (budget_spent()) {
                return false;
            }
            graph_.expand(t, rng_);
            graph_.update_ancestors(t, rng_);
            trace_.push_back(t);
            ++stats_.iterations;
        }
        return true;
    }

    void run() {
        while (step()) {
        }
    }

    /// True once every tip of the explicit graph has been expanded.
    bool exhausted() const { return done_; }

    PlanResult result() const {
        PlanResult res;
        const auto& root = graph_.node(graph_.root());
        res.root_value = root.value;
        if (root.expanded) {
            res.action = graph_.and_node(root.marked).action;
            for (NodeRef a = root.first_child; a < root.first_child + root.num_children; ++a) {
                res.root_q.emplace_back(graph_.and_node(a).action, graph_.and_node(a).q);
            }
        }
        res.stats = stats_;
        res.stats.nodes_created = graph_.num_or_nodes();
        res.stats.wall_time_s = clock_.seconds();
        return res;
    }

    const ExplicitGraph<M>& graph() const { return graph_; }
    const std::vector<NodeRef>& expansion_trace() const { return trace_; }
    std::size_t batch_size() const { return batch_; }

private:
    std::size_t default_batch() const {
        if (config_.batch_size) {
            return *config_.batch_size;
        }
        if (config_.budget.iterations) {
            auto n = static_cast<std::size_t>(
                std::floor(config_.batch_fraction * static_cast<double>(*config_.budget.iterations)));
            return std::max<std::size_t>(1, n);
        }
        if (config_.budget.time_ms) {
            return 100;
        }
        return 1;
    }

    bool budget_spent() const {
        if (config_.budget.iterations && stats_.iterations >= *config_.budget.iterations) {
            return true;
        }
        // the first expansion always happens so the root has a marked action
        if (config_.budget.time_ms && stats_.iterations > 0 &&
            clock_.millis() >= *config_.budget.time_ms) {
            return true;
        }
        return false;
    }

    const M* model_;
    LeafEvaluator<M> source_;
    AotConfig config_;
    ExplicitGraph<M> graph_;
    Rng rng_;
    std::size_t batch_ = 1;
    PlanStats stats_;
    Stopwatch clock_;
    std::vector<NodeRef> trace_;
    bool done_ = false;
};

/// Runs Anytime AO* from (s0, H) until the budget is spent or the graph is exhausted.
template <MdpModel M>
PlanResult aot_plan(const M& model, const typename M::State& s0, int horizon,
                    LeafEvaluator<M> source, const AotConfig& config) {
    AnytimeAoStar<M> planner(model, std::move(source), config);
    planner.start(s0, horizon);
    planner.run();
    return planner.result();
}

/// Classic AO* with an admissible deterministic heuristic: expands IN tips
/// only, lowest |Δ| first, and stops when the best partial graph is complete.
template <MdpModel M>
PlanResult ao_star(const M& model, const typename M::State& s0, int horizon,
                   HeuristicFn<typename M::State> h, std::size_t batch_size = 1) {
    AotConfig cfg;
    cfg.p = 0.0;
    cfg.in_only = true;
    cfg.batch_size = batch_size;
    return aot_plan(model, s0, horizon, LeafEvaluator<M>::deterministic(std::move(h)), cfg);
}

}  // namespace aotplan
