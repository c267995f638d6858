#include "aotplan/domains/ctp.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace aotplan::ctp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::atomic<std::uint64_t> next_serial{1};

[[noreturn]] void parse_error(int line, const std::string& what) {
    throw std::invalid_argument("ctp file line " + std::to_string(line) + ": " + what);
}

}  // namespace

double Instance::total_cost() const {
    double total = 0.0;
    for (const auto& e : edges) {
        total += e.cost;
    }
    return total;
}

void Instance::validate() const {
    if (num_nodes < 2 || num_nodes > kMaxNodes) {
        throw std::invalid_argument("ctp: node count must be in [2, " + std::to_string(kMaxNodes) + "]");
    }
    if (num_edges() > kMaxEdges) {
        throw std::invalid_argument("ctp: at most " + std::to_string(kMaxEdges) + " edges supported");
    }
    if (source < 0 || source >= num_nodes || target < 0 || target >= num_nodes || source == target) {
        throw std::invalid_argument("ctp: bad source/target");
    }
    for (const auto& e : edges) {
        if (e.u < 0 || e.u >= num_nodes || e.v < 0 || e.v >= num_nodes || e.u == e.v) {
            throw std::invalid_argument("ctp: bad edge endpoints");
        }
        if (!(e.cost > 0.0)) {
            throw std::invalid_argument("ctp: edge costs must be positive");
        }
        if (!(e.prior >= 0.0 && e.prior < 1.0)) {
            throw std::invalid_argument("ctp: edge priors must lie in [0, 1)");
        }
    }
}

Instance parse_instance(std::istream& in, std::optional<double>* pbad) {
    Instance inst;
    std::string line;
    int line_no = 0;
    int declared_edges = -1;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string tok;
        if (!(ls >> tok)) {
            continue;
        }
        if (tok[0] == '#') {
            std::string key;
            double value;
            if (tok == "#" && (ls >> key) && key == "pbad" && (ls >> value) && pbad) {
                *pbad = value;
            }
            continue;
        }
        if (declared_edges < 0) {
            if (tok != "ctp" || !(ls >> inst.num_nodes >> declared_edges >> inst.source >> inst.target)) {
                parse_error(line_no, "expected 'ctp <n> <m> <source> <target>'");
            }
            continue;
        }
        Edge e;
        std::istringstream es(line);
        if (!(es >> e.u >> e.v >> e.cost >> e.prior)) {
            parse_error(line_no, "expected 'u v w q'");
        }
        inst.edges.push_back(e);
    }
    if (declared_edges < 0) {
        throw std::invalid_argument("ctp file: missing header");
    }
    if (declared_edges != inst.num_edges()) {
        throw std::invalid_argument("ctp file: header declares " + std::to_string(declared_edges) +
                                    " edges, found " + std::to_string(inst.num_edges()));
    }
    inst.validate();
    return inst;
}

void write_instance(std::ostream& out, const Instance& inst, std::optional<double> pbad) {
    auto old = out.precision(17);
    out << "ctp " << inst.num_nodes << ' ' << inst.num_edges() << ' ' << inst.source << ' '
        << inst.target << '\n';
    if (pbad) {
        out << "# pbad " << *pbad << '\n';
    }
    for (const auto& e : inst.edges) {
        out << e.u << ' ' << e.v << ' ' << e.cost << ' ' << e.prior << '\n';
    }
    out.precision(old);
}

namespace {

std::uint64_t hash_edges(std::uint64_t h, const EdgeSet& set) {
    static const EdgeSet low_mask(~std::uint64_t{0});
    h = hash_combine(h, (set & low_mask).to_ullong());
    return hash_combine(h, (set >> 64).to_ullong());
}

}  // namespace

std::uint64_t BeliefHash::operator()(const Belief& b) const {
    std::uint64_t h = hash_combine(0, static_cast<std::uint64_t>(b.location));
    h = hash_edges(h, b.known);
    return hash_edges(h, b.blocked);
}

Model::Model(Instance inst, std::optional<double> dead_end_penalty)
    : inst_(std::move(inst)), serial_(next_serial++) {
    inst_.validate();
    penalty_ = dead_end_penalty.value_or(2.0 * inst_.total_cost());
    adjacency_.resize(static_cast<std::size_t>(inst_.num_nodes));
    incident_.resize(static_cast<std::size_t>(inst_.num_nodes));
    for (int i = 0; i < inst_.num_edges(); ++i) {
        const auto& e = inst_.edges[static_cast<std::size_t>(i)];
        adjacency_[static_cast<std::size_t>(e.u)].emplace_back(e.v, i);
        adjacency_[static_cast<std::size_t>(e.v)].emplace_back(e.u, i);
        incident_[static_cast<std::size_t>(e.u)].set(static_cast<std::size_t>(i));
        incident_[static_cast<std::size_t>(e.v)].set(static_cast<std::size_t>(i));
    }
}

Belief Model::initial_belief() const {
    Belief b;
    b.location = inst_.source;
    return b;
}

Belief Model::initial_belief(const Weather& w) const {
    Belief b = initial_belief();
    return apply(b, sense_action(), w);
}

namespace {

struct PathSlot {
    std::uint64_t serial = 0;
    Belief key;
    Model::ShortestPaths sp;
};

}  // namespace

void Model::dijkstra(const Belief& b, bool optimistic, ShortestPaths& out) const {
    const int n = inst_.num_nodes;
    const EdgeSet usable = optimistic ? ~(b.known & b.blocked) : (b.known & ~b.blocked);
    std::array<char, kMaxNodes> done{};
    for (int v = 0; v < n; ++v) {
        out.dist[static_cast<std::size_t>(v)] = kInf;
        out.pred[static_cast<std::size_t>(v)] = -1;
    }
    out.dist[static_cast<std::size_t>(b.location)] = 0.0;
    for (int iter = 0; iter < n; ++iter) {
        int u = -1;
        double best = kInf;
        for (int v = 0; v < n; ++v) {
            if (!done[static_cast<std::size_t>(v)] && out.dist[static_cast<std::size_t>(v)] < best) {
                best = out.dist[static_cast<std::size_t>(v)];
                u = v;
            }
        }
        if (u < 0) {
            break;
        }
        done[static_cast<std::size_t>(u)] = 1;
        for (auto [v, e] : adjacency_[static_cast<std::size_t>(u)]) {
            if (!usable.test(static_cast<std::size_t>(e))) {
                continue;
            }
            const double nd = best + inst_.edges[static_cast<std::size_t>(e)].cost;
            if (nd < out.dist[static_cast<std::size_t>(v)]) {
                out.dist[static_cast<std::size_t>(v)] = nd;
                out.pred[static_cast<std::size_t>(v)] = static_cast<std::int8_t>(u);
            }
        }
    }
}

const Model::ShortestPaths& Model::paths(const Belief& b, bool optimistic) const {
    // small direct-mapped cache per thread; rollouts and expansions revisit
    // the same beliefs many times in a row
    constexpr std::size_t kSlots = 64;
    thread_local std::array<PathSlot, 2 * kSlots> slots;
    const std::size_t i = (BeliefHash{}(b) % kSlots) * 2 + (optimistic ? 1 : 0);
    PathSlot& slot = slots[i];
    if (slot.serial != serial_ || !(slot.key == b)) {
        dijkstra(b, optimistic, slot.sp);
        slot.key = b;
        slot.serial = serial_;
    }
    return slot.sp;
}

std::vector<double> Model::known_distances(const Belief& b, std::vector<int>* pred) const {
    const auto& sp = paths(b, false);
    const auto n = static_cast<std::size_t>(inst_.num_nodes);
    if (pred) {
        pred->assign(sp.pred.begin(), sp.pred.begin() + static_cast<std::ptrdiff_t>(n));
    }
    return std::vector<double>(sp.dist.begin(), sp.dist.begin() + static_cast<std::ptrdiff_t>(n));
}

bool Model::sensed_here(const Belief& b) const {
    return (incident_[static_cast<std::size_t>(b.location)] & ~b.known).none();
}

bool Model::is_dead_end(const Belief& b) const {
    if (is_goal(b)) {
        return false;
    }
    return paths(b, true).dist[static_cast<std::size_t>(inst_.target)] == kInf;
}

std::vector<ActionId> Model::actions(const Belief& b) const {
    if (is_goal(b) || is_dead_end(b)) {
        return {};
    }
    if (!sensed_here(b)) {
        return {sense_action()};
    }
    const auto& sp = paths(b, false);
    std::vector<ActionId> acts;
    for (int v = 0; v < inst_.num_nodes; ++v) {
        if (v == b.location || sp.dist[static_cast<std::size_t>(v)] == kInf) {
            continue;
        }
        if (v == inst_.target || (incident_[static_cast<std::size_t>(v)] & ~b.known).any()) {
            acts.push_back(v);
        }
    }
    return acts;
}

EdgeSet Model::revealed_edges(const Belief& b, int v) const {
    EdgeSet mask;
    if (v == sense_action()) {
        return incident_[static_cast<std::size_t>(b.location)] & ~b.known;
    }
    if (v < 0 || v >= inst_.num_nodes || v == b.location) {
        throw std::invalid_argument("ctp: bad move target " + std::to_string(v));
    }
    const auto& sp = paths(b, false);
    if (sp.dist[static_cast<std::size_t>(v)] == kInf) {
        throw std::invalid_argument("ctp: move target not reachable over known-free edges");
    }
    for (int u = v; u != b.location; u = sp.pred[static_cast<std::size_t>(u)]) {
        mask |= incident_[static_cast<std::size_t>(u)];
    }
    return mask & ~b.known;
}

std::vector<Outcome<Belief>> Model::outcomes(const Belief& b, ActionId a) const {
    const EdgeSet revealed = revealed_edges(b, a);
    Belief base = b;
    if (a != sense_action()) {
        base.location = a;
    }
    base.known |= revealed;
    std::vector<int> branching;
    for (int e = 0; e < inst_.num_edges(); ++e) {
        if (revealed.test(static_cast<std::size_t>(e)) && inst_.edges[static_cast<std::size_t>(e)].prior > 0.0) {
            branching.push_back(e);
        }
    }
    const std::size_t k = branching.size();
    if (k > 24) {
        throw std::runtime_error("ctp: too many simultaneously sensed edges");
    }
    std::vector<Outcome<Belief>> outs;
    outs.reserve(std::size_t{1} << k);
    for (std::uint32_t mask = 0; mask < (std::uint32_t{1} << k); ++mask) {
        Belief nb = base;
        double p = 1.0;
        for (std::size_t i = 0; i < k; ++i) {
            const int e = branching[i];
            const double q = inst_.edges[static_cast<std::size_t>(e)].prior;
            if (mask & (std::uint32_t{1} << i)) {
                nb.blocked.set(static_cast<std::size_t>(e));
                p *= q;
            } else {
                p *= 1.0 - q;
            }
        }
        outs.push_back({nb, p});
    }
    return outs;
}

Belief Model::sample(const Belief& b, ActionId a, Rng& rng) const {
    const EdgeSet revealed = revealed_edges(b, a);
    Belief nb = b;
    if (a != sense_action()) {
        nb.location = a;
    }
    nb.known |= revealed;
    for (int e = 0; e < inst_.num_edges(); ++e) {
        if (!revealed.test(static_cast<std::size_t>(e))) {
            continue;
        }
        const double q = inst_.edges[static_cast<std::size_t>(e)].prior;
        if (q > 0.0 && uniform01(rng) < q) {
            nb.blocked.set(static_cast<std::size_t>(e));
        }
    }
    return nb;
}

Belief Model::apply(const Belief& b, ActionId a, const Weather& w) const {
    const EdgeSet revealed = revealed_edges(b, a);
    Belief nb = b;
    if (a != sense_action()) {
        nb.location = a;
    }
    nb.known |= revealed;
    nb.blocked |= revealed & w.blocked;
    return nb;
}

double Model::cost(const Belief& b, ActionId a) const {
    if (a == sense_action()) {
        return 0.0;
    }
    if (a < 0 || a >= inst_.num_nodes || a == b.location) {
        throw std::invalid_argument("ctp: bad move target " + std::to_string(a));
    }
    const double c = paths(b, false).dist[static_cast<std::size_t>(a)];
    if (c == kInf) {
        throw std::invalid_argument("ctp: move target not reachable over known-free edges");
    }
    return c;
}

std::string Model::action_name(ActionId a) const {
    if (a == sense_action()) {
        return "sense";
    }
    return "move" + std::to_string(a);
}

double Model::optimistic_distance(const Belief& b) const {
    const double d = paths(b, true).dist[static_cast<std::size_t>(inst_.target)];
    return d == kInf ? penalty_ : d;
}

ActionId Model::optimistic_action(const Belief& b) const {
    if (!sensed_here(b)) {
        return sense_action();
    }
    const ShortestPaths opt = paths(b, true);
    if (opt.dist[static_cast<std::size_t>(inst_.target)] == kInf) {
        throw std::logic_error("ctp: optimistic policy called on a dead-end belief");
    }
    std::array<int, kMaxNodes> path{};
    int len = 0;
    for (int u = inst_.target; u != b.location; u = opt.pred[static_cast<std::size_t>(u)]) {
        path[static_cast<std::size_t>(len++)] = u;
    }
    const auto& known = paths(b, false);
    for (int i = len - 1; i >= 0; --i) {
        const int u = path[static_cast<std::size_t>(i)];
        if (known.dist[static_cast<std::size_t>(u)] == kInf) {
            break;
        }
        if (u == inst_.target || (incident_[static_cast<std::size_t>(u)] & ~b.known).any()) {
            return u;
        }
    }
    throw std::logic_error("ctp: optimistic path has no frontier node");
}

Weather sample_weather(const Instance& inst, Rng& rng) {
    Weather w;
    for (int e = 0; e < inst.num_edges(); ++e) {
        const double q = inst.edges[static_cast<std::size_t>(e)].prior;
        if (q > 0.0 && uniform01(rng) < q) {
            w.blocked.set(static_cast<std::size_t>(e));
        }
    }
    return w;
}

namespace {

bool connected(const Instance& inst, const EdgeSet& blocked) {
    std::vector<char> seen(static_cast<std::size_t>(inst.num_nodes), 0);
    std::vector<int> stack{inst.source};
    seen[static_cast<std::size_t>(inst.source)] = 1;
    // edge lists are short; a quadratic scan keeps this allocation-light
    while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        if (u == inst.target) {
            return true;
        }
        for (int e = 0; e < inst.num_edges(); ++e) {
            if (blocked.test(static_cast<std::size_t>(e))) {
                continue;
            }
            const auto& ed = inst.edges[static_cast<std::size_t>(e)];
            int v = ed.u == u ? ed.v : (ed.v == u ? ed.u : -1);
            if (v >= 0 && !seen[static_cast<std::size_t>(v)]) {
                seen[static_cast<std::size_t>(v)] = 1;
                stack.push_back(v);
            }
        }
    }
    return false;
}

}  // namespace

bool is_solvable(const Instance& inst, const Weather& w) { return connected(inst, w.blocked); }

Weather sample_solvable_weather(const Instance& inst, Rng& rng, int max_tries) {
    for (int i = 0; i < max_tries; ++i) {
        Weather w = sample_weather(inst, rng);
        if (is_solvable(inst, w)) {
            return w;
        }
    }
    throw std::runtime_error("ctp: could not sample a solvable weather");
}

double pbad_exact(const Instance& inst) {
    std::vector<int> uncertain;
    for (int e = 0; e < inst.num_edges(); ++e) {
        if (inst.edges[static_cast<std::size_t>(e)].prior > 0.0) {
            uncertain.push_back(e);
        }
    }
    if (uncertain.size() > 24) {
        throw std::invalid_argument("pbad_exact: too many uncertain edges to enumerate");
    }
    const std::size_t k = uncertain.size();
    double bad = 0.0;
    for (std::uint32_t mask = 0; mask < (std::uint32_t{1} << k); ++mask) {
        EdgeSet blocked;
        double p = 1.0;
        for (std::size_t i = 0; i < k; ++i) {
            const double q = inst.edges[static_cast<std::size_t>(uncertain[i])].prior;
            if (mask & (std::uint32_t{1} << i)) {
                blocked.set(static_cast<std::size_t>(uncertain[i]));
                p *= q;
            } else {
                p *= 1.0 - q;
            }
        }
        if (!connected(inst, blocked)) {
            bad += p;
        }
    }
    return bad;
}

double pbad_monte_carlo(const Instance& inst, std::size_t samples, std::uint64_t seed) {
    Rng rng(seed);
    std::size_t bad = 0;
    for (std::size_t i = 0; i < samples; ++i) {
        if (!is_solvable(inst, sample_weather(inst, rng))) {
            ++bad;
        }
    }
    return static_cast<double>(bad) / static_cast<double>(samples);
}

Generated generate(const GeneratorParams& params) {
    if (params.num_nodes < 2 || params.num_nodes > kMaxNodes) {
        throw std::invalid_argument("ctp generate: node count must be in [2, " +
                                    std::to_string(kMaxNodes) + "]");
    }
    if (!(params.prior_min >= 0.0 && params.prior_max < 1.0 && params.prior_min <= params.prior_max)) {
        throw std::invalid_argument("ctp generate: priors must satisfy 0 <= min <= max < 1");
    }
    Rng rng(params.seed);
    const int n = params.num_nodes;
    std::uniform_real_distribution<double> coord(0.0, 100.0);
    std::vector<std::pair<double, double>> pos(static_cast<std::size_t>(n));
    for (auto& p : pos) {
        p = {coord(rng), coord(rng)};
    }
    auto dist = [&](int a, int b) {
        return std::hypot(pos[static_cast<std::size_t>(a)].first - pos[static_cast<std::size_t>(b)].first,
                          pos[static_cast<std::size_t>(a)].second - pos[static_cast<std::size_t>(b)].second);
    };
    // source and target are the farthest-apart pair
    int sa = 0;
    int sb = 1;
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
            if (dist(a, b) > dist(sa, sb)) {
                sa = a;
                sb = b;
            }
        }
    }
    std::uniform_real_distribution<double> prior(params.prior_min, params.prior_max);
    Instance inst;
    inst.num_nodes = n;
    inst.source = sa;
    inst.target = sb;
    std::vector<std::vector<char>> has(static_cast<std::size_t>(n), std::vector<char>(static_cast<std::size_t>(n), 0));
    auto add_edge = [&](int a, int b) {
        Edge e;
        e.u = std::min(a, b);
        e.v = std::max(a, b);
        e.cost = std::max(1.0, std::round(dist(a, b)));
        e.prior = params.prior_min == params.prior_max ? params.prior_min : prior(rng);
        inst.edges.push_back(e);
        has[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = 1;
        has[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)] = 1;
    };
    // nearest-neighbour spanning tree keeps the all-free graph connected
    for (int i = 1; i < n; ++i) {
        int best = 0;
        for (int j = 1; j < i; ++j) {
            if (dist(i, j) < dist(i, best)) {
                best = j;
            }
        }
        add_edge(i, best);
    }
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
            if (has[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] ||
                inst.num_edges() >= kMaxEdges) {
                continue;
            }
            if (uniform01(rng) < params.edge_density) {
                add_edge(a, b);
            }
        }
    }
    inst.validate();
    Generated g;
    g.pbad = inst.num_edges() <= 20 ? pbad_exact(inst) : pbad_monte_carlo(inst, 100000, params.seed);
    g.instance = std::move(inst);
    return g;
}

}  // namespace aotplan::ctp
