#pragma once

#include "aotplan/leaf_evaluator.hpp"
#include "aotplan/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <queue>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace aotplan {

using NodeRef = std::uint32_t;
inline constexpr NodeRef kNoNode = std::numeric_limits<NodeRef>::max();

/// Values closer than this count as unchanged during ancestor propagation.
inline constexpr double kValueChangeTolerance = 1e-12;

template <class State>
struct OrNode {
    HorizonNodeId<State> id;
    double value = 0.0;
    /// AND children occupy [first_child, first_child + num_children) in the AND store.
    NodeRef first_child = 0;
    std::uint32_t num_children = 0;
    std::vector<NodeRef> parents;
    NodeRef marked = kNoNode;
    bool expanded = false;
    bool terminal = false;
    /// N(s,d): samples averaged into `value` while the node is a tip.
    std::uint32_t samples = 0;

    int depth() const { return id.depth; }
    bool is_tip() const { return !expanded && !terminal; }
};

struct AndEdge {
    NodeRef child;
    double probability;
};

struct AndNode {
    ActionId action = -1;
    NodeRef parent = kNoNode;
    double cost = 0.0;
    double q = 0.0;
    std::vector<AndEdge> children;
};

struct TipPartition {
    std::vector<NodeRef> in;
    std::vector<NodeRef> out;
};

enum class UpdateOrder { ascending_depth, random };

/// V ← V + (sample − V)/(N+1) for sampled sources; deterministic sources
/// return the cached value. Only valid on tips.
template <MdpModel M>
double fetch_tip_value(OrNode<typename M::State>& node, const LeafEvaluator<M>& source, Rng& rng) {
    if (!source.is_sampled()) {
        return node.value;
    }
    double x = source.sample(node.id.state, node.id.depth, rng);
    node.samples += 1;
    node.value += (x - node.value) / static_cast<double>(node.samples);
    return node.value;
}

/// Explicit AND/OR graph over finite-horizon nodes, with (s,d) duplicates merged.
template <MdpModel M>
class ExplicitGraph {
public:
    using State = typename M::State;
    using Or = OrNode<State>;

    ExplicitGraph(const M& model, const LeafEvaluator<M>& source)
        : model_(&model), source_(&source) {}

    const M& model() const { return *model_; }
    const LeafEvaluator<M>& source() const { return *source_; }

    NodeRef root() const { return root_; }
    std::size_t num_or_nodes() const { return or_nodes_.size(); }
    std::size_t num_and_nodes() const { return and_nodes_.size(); }
    const Or& node(NodeRef r) const { return or_nodes_[r]; }
    Or& node(NodeRef r) { return or_nodes_[r]; }
    const AndNode& and_node(NodeRef r) const { return and_nodes_[r]; }
    int horizon() const { return horizon_; }

    /// OR nodes with remaining horizon d, in creation order.
    const std::vector<NodeRef>& layer(int d) const { return layers_.at(static_cast<std::size_t>(d)); }

    /// Unexpanded non-terminal nodes (order unspecified).
    const std::vector<NodeRef>& tips() const { return tips_; }

    std::optional<NodeRef> find(const State& s, int d) const {
        auto it = index_.find(NodeIdOf<M>{s, d});
        if (it == index_.end()) {
            return std::nullopt;
        }
        return it->second;
    }

    NodeRef set_root(const State& s, int horizon, Rng& rng) {
        if (!or_nodes_.empty()) {
            throw std::logic_error("ExplicitGraph: root already set");
        }
        horizon_ = horizon;
        layers_.assign(static_cast<std::size_t>(horizon) + 1, {});
        root_ = get_or_create(s, horizon, kNoNode, rng);
        return root_;
    }

    /// Returns the node for (s,d), creating and valuing it if new. A non-null
    /// `parent_and` is recorded as an additional parent.
    NodeRef get_or_create(const State& s, int d, NodeRef parent_and, Rng& rng) {
        if (d < 0) {
            throw std::invalid_argument("get_or_create: negative depth");
        }
        if (static_cast<std::size_t>(d) >= layers_.size()) {
            layers_.resize(static_cast<std::size_t>(d) + 1);
        }
        auto [it, inserted] = index_.emplace(NodeIdOf<M>{s, d}, static_cast<NodeRef>(or_nodes_.size()));
        NodeRef ref = it->second;
        if (inserted) {
            Or n;
            n.id = NodeIdOf<M>{s, d};
            if (d == 0) {
                n.terminal = true;
                n.value = 0.0;
            } else if (is_terminal(*model_, s)) {
                n.terminal = true;
                n.value = terminal_value(*model_, s);
            } else if (source_->is_sampled()) {
                n.value = source_->sample(s, d, rng);
                n.samples = 1;
            } else {
                n.value = source_->heuristic(s, d);
            }
            or_nodes_.push_back(std::move(n));
            tip_pos_.push_back(kNoNode);
            layers_[static_cast<std::size_t>(d)].push_back(ref);
            if (!or_nodes_[ref].terminal) {
                tip_pos_[ref] = static_cast<NodeRef>(tips_.size());
                tips_.push_back(ref);
            }
        }
        if (parent_and != kNoNode) {
            or_nodes_[ref].parents.push_back(parent_and);
        }
        return ref;
    }

    /// Adds one AND node per applicable action and its (s', d−1) children.
    /// Returns the number of OR nodes created.
    std::size_t expand(NodeRef ref, Rng& rng) {
        if (or_nodes_[ref].terminal) {
            throw std::logic_error("expand: node is terminal");
        }
        if (or_nodes_[ref].expanded) {
            throw std::logic_error("expand: node already expanded");
        }
        const std::size_t before = or_nodes_.size();
        const State s = or_nodes_[ref].id.state;
        const int d = or_nodes_[ref].id.depth;
        auto actions = model_->actions(s);
        if (actions.empty()) {
            throw std::logic_error("expand: non-terminal state without actions");
        }
        const auto first = static_cast<NodeRef>(and_nodes_.size());
        for (ActionId a : actions) {
            const auto and_ref = static_cast<NodeRef>(and_nodes_.size());
            and_nodes_.push_back(AndNode{a, ref, model_->cost(s, a), 0.0, {}});
            for (auto& o : model_->outcomes(s, a)) {
                if (!(o.probability > 0.0)) {
                    continue;
                }
                auto& kids = and_nodes_[and_ref].children;
                NodeRef existing = kNoNode;
                if (auto it = index_.find(NodeIdOf<M>{o.state, d - 1}); it != index_.end()) {
                    existing = it->second;
                }
                bool merged = false;
                if (existing != kNoNode) {
                    for (auto& e : kids) {
                        if (e.child == existing) {
                            e.probability += o.probability;
                            merged = true;
                            break;
                        }
                    }
                }
                if (!merged) {
                    NodeRef child = get_or_create(o.state, d - 1, and_ref, rng);
                    and_nodes_[and_ref].children.push_back({child, o.probability});
                }
            }
        }
        Or& n = or_nodes_[ref];
        n.first_child = first;
        n.num_children = static_cast<std::uint32_t>(actions.size());
        n.expanded = true;
        n.samples = 0;
        remove_tip(ref);
        // fresh Q values are placeholders until the first backup
        and_dirty_.resize(and_nodes_.size(), 1);
        return or_nodes_.size() - before;
    }

    /// Bottom-up Bellman updates from `start` through all parent links.
    /// Returns the OR nodes whose value changed.
    std::vector<NodeRef> update_ancestors(NodeRef start, Rng& rng,
                                          UpdateOrder order = UpdateOrder::ascending_depth,
                                          Rng* order_rng = nullptr) {
        and_dirty_.resize(and_nodes_.size(), 0);
        queued_.resize(or_nodes_.size(), 0);
        std::vector<char> changed_flag(or_nodes_.size(), 0);
        std::vector<NodeRef> changed;

        using Item = std::pair<int, NodeRef>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> by_depth;
        std::vector<NodeRef> bag;
        auto push = [&](NodeRef r) {
            if (queued_[r]) {
                return;
            }
            queued_[r] = 1;
            if (order == UpdateOrder::ascending_depth) {
                by_depth.emplace(or_nodes_[r].depth(), r);
            } else {
                bag.push_back(r);
            }
        };
        auto pop = [&]() -> NodeRef {
            NodeRef r;
            if (order == UpdateOrder::ascending_depth) {
                r = by_depth.top().second;
                by_depth.pop();
            } else {
                std::size_t i = order_rng ? uniform_index(*order_rng, bag.size()) : 0;
                r = bag[i];
                bag[i] = bag.back();
                bag.pop_back();
            }
            queued_[r] = 0;
            return r;
        };
        auto empty = [&] { return order == UpdateOrder::ascending_depth ? by_depth.empty() : bag.empty(); };

        if (or_nodes_[start].expanded) {
            const Or& n = or_nodes_[start];
            for (NodeRef a = n.first_child; a < n.first_child + n.num_children; ++a) {
                and_dirty_[a] = 1;
            }
        }
        bool first = true;
        push(start);
        while (!empty()) {
            NodeRef r = pop();
            double old_value = or_nodes_[r].value;
            if (or_nodes_[r].expanded) {
                backup(r, rng);
            }
            bool moved = std::abs(or_nodes_[r].value - old_value) > kValueChangeTolerance;
            if (moved && !changed_flag[r]) {
                changed_flag[r] = 1;
                changed.push_back(r);
            }
            if (moved || (first && !or_nodes_[r].expanded)) {
                for (NodeRef p : or_nodes_[r].parents) {
                    and_dirty_[p] = 1;
                    push(and_nodes_[p].parent);
                }
            }
            first = false;
        }
        return changed;
    }

    /// Follows marked actions from the root; reached tips are IN, every other tip is OUT.
    TipPartition recompute_best_partial_graph() const {
        TipPartition part;
        std::vector<char> seen(or_nodes_.size(), 0);
        std::vector<NodeRef> stack{root_};
        seen[root_] = 1;
        while (!stack.empty()) {
            NodeRef r = stack.back();
            stack.pop_back();
            const Or& n = or_nodes_[r];
            if (n.terminal) {
                continue;
            }
            if (!n.expanded) {
                part.in.push_back(r);
                continue;
            }
            for (const auto& e : and_nodes_[n.marked].children) {
                if (!seen[e.child]) {
                    seen[e.child] = 1;
                    stack.push_back(e.child);
                }
            }
        }
        std::sort(part.in.begin(), part.in.end());
        for (NodeRef t : tips_) {
            if (!seen[t]) {
                part.out.push_back(t);
            }
        }
        std::sort(part.out.begin(), part.out.end());
        return part;
    }

    /// Largest Bellman residual over expanded nodes, plus marked-action slack.
    double audit() const {
        double worst = 0.0;
        const double gamma = model_->gamma();
        for (const auto& a : and_nodes_) {
            double q = a.cost;
            for (const auto& e : a.children) {
                q += gamma * e.probability * or_nodes_[e.child].value;
            }
            worst = std::max(worst, std::abs(q - a.q));
        }
        for (const auto& n : or_nodes_) {
            if (!n.expanded) {
                continue;
            }
            double best = std::numeric_limits<double>::infinity();
            for (NodeRef a = n.first_child; a < n.first_child + n.num_children; ++a) {
                best = std::min(best, and_nodes_[a].q);
            }
            worst = std::max(worst, std::abs(best - n.value));
            worst = std::max(worst, and_nodes_[n.marked].q - best);
        }
        return worst;
    }

    /// Line-oriented dump for trace diffing.
    void dump(std::ostream& out) const {
        auto old_precision = out.precision(12);
        for (NodeRef r = 0; r < or_nodes_.size(); ++r) {
            const Or& n = or_nodes_[r];
            out << "or " << r << " h=" << static_cast<std::uint64_t>(typename M::StateHash{}(n.id.state))
                << " d=" << n.id.depth << " V=" << n.value << " marked=";
            if (n.marked == kNoNode) {
                out << '-';
            } else {
                out << model_->action_name(and_nodes_[n.marked].action);
            }
            out << " expanded=" << n.expanded << " terminal=" << n.terminal << '\n';
            if (!n.expanded) {
                continue;
            }
            for (NodeRef a = n.first_child; a < n.first_child + n.num_children; ++a) {
                const AndNode& an = and_nodes_[a];
                out << "  and " << model_->action_name(an.action) << " Q=" << an.q;
                for (const auto& e : an.children) {
                    out << ' ' << e.child << ':' << e.probability;
                }
                out << '\n';
            }
        }
        out.precision(old_precision);
    }

private:
    void remove_tip(NodeRef r) {
        NodeRef pos = tip_pos_[r];
        if (pos == kNoNode) {
            return;
        }
        NodeRef last = tips_.back();
        tips_[pos] = last;
        tip_pos_[last] = pos;
        tips_.pop_back();
        tip_pos_[r] = kNoNode;
    }

    double child_value(NodeRef c, Rng& rng) {
        Or& child = or_nodes_[c];
        if (child.is_tip()) {
            return fetch_tip_value(child, *source_, rng);
        }
        return child.value;
    }

    void backup(NodeRef r, Rng& rng) {
        const double gamma = model_->gamma();
        Or& n = or_nodes_[r];
        const NodeRef begin = n.first_child;
        const NodeRef end = begin + n.num_children;
        for (NodeRef a = begin; a < end; ++a) {
            if (!and_dirty_[a]) {
                continue;
            }
            and_dirty_[a] = 0;
            double future = 0.0;
            for (const auto& e : and_nodes_[a].children) {
                future += e.probability * child_value(e.child, rng);
            }
            and_nodes_[a].q = and_nodes_[a].cost + gamma * future;
        }
        double best = std::numeric_limits<double>::infinity();
        NodeRef best_ref = kNoNode;
        for (NodeRef a = begin; a < end; ++a) {
            if (and_nodes_[a].q < best) {
                best = and_nodes_[a].q;
                best_ref = a;
            }
        }
        Or& m = or_nodes_[r];
        m.value = best;
        if (m.marked == kNoNode || and_nodes_[m.marked].q > best + kValueChangeTolerance) {
            m.marked = best_ref;
        }
    }

    const M* model_;
    const LeafEvaluator<M>* source_;
    std::vector<Or> or_nodes_;
    std::vector<AndNode> and_nodes_;
    std::unordered_map<NodeIdOf<M>, NodeRef, NodeHashOf<M>> index_;
    std::vector<std::vector<NodeRef>> layers_;
    std::vector<NodeRef> tips_;
    std::vector<NodeRef> tip_pos_;
    std::vector<char> and_dirty_;
    std::vector<char> queued_;
    NodeRef root_ = kNoNode;
    int horizon_ = 0;
};

}  // namespace aotplan
