#pragma once

#include "aotplan/mdp.hpp"

#include <array>
#include <bitset>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace aotplan::ctp {

inline constexpr int kMaxEdges = 128;
inline constexpr int kMaxNodes = 64;

struct Edge {
    int u = 0;
    int v = 0;
    double cost = 1.0;
    /// Prior probability that the edge is blocked, in [0, 1).
    double prior = 0.0;
};

struct Instance {
    int num_nodes = 0;
    int source = 0;
    int target = 0;
    std::vector<Edge> edges;

    int num_edges() const { return static_cast<int>(edges.size()); }
    double total_cost() const;
    /// Throws std::invalid_argument on malformed instances.
    void validate() const;
};

/// `ctp <n> <m> <source> <target>` then `u v w q` per edge; `# pbad <p>` is
/// reported through `pbad` when present.
Instance parse_instance(std::istream& in, std::optional<double>* pbad = nullptr);
void write_instance(std::ostream& out, const Instance& inst, std::optional<double> pbad = std::nullopt);

enum class EdgeStatus : std::uint8_t { unknown, free, blocked };

using EdgeSet = std::bitset<kMaxEdges>;

struct Belief {
    int location = 0;
    EdgeSet known;
    EdgeSet blocked;

    EdgeStatus status(int e) const {
        if (!known.test(static_cast<std::size_t>(e))) {
            return EdgeStatus::unknown;
        }
        return blocked.test(static_cast<std::size_t>(e)) ? EdgeStatus::blocked : EdgeStatus::free;
    }

    friend bool operator==(const Belief&, const Belief&) = default;
};

struct BeliefHash {
    std::uint64_t operator()(const Belief& b) const;
};

/// A full realization of edge statuses.
struct Weather {
    EdgeSet blocked;
};

/// Belief MDP of the Canadian Traveller Problem with frontier macro-moves.
///
/// Action v ∈ [0, n) moves the agent to node v along the shortest known-free
/// path; the cost is that path's length and every unknown edge incident to a
/// node on the path is sensed. The unsensed start belief has a single
/// zero-cost `sense` action that reveals the edges at the source.
class Model {
public:
    using State = Belief;
    using StateHash = BeliefHash;

    explicit Model(Instance inst, std::optional<double> dead_end_penalty = std::nullopt);

    const Instance& instance() const { return inst_; }
    ActionId sense_action() const { return inst_.num_nodes; }

    /// Agent at the source with nothing sensed.
    Belief initial_belief() const;
    /// Agent at the source after sensing its incident edges under `w`.
    Belief initial_belief(const Weather& w) const;

    std::vector<ActionId> actions(const Belief& b) const;
    std::vector<Outcome<Belief>> outcomes(const Belief& b, ActionId a) const;
    Belief sample(const Belief& b, ActionId a, Rng& rng) const;
    double cost(const Belief& b, ActionId a) const;
    bool is_goal(const Belief& b) const { return b.location == inst_.target; }
    bool is_dead_end(const Belief& b) const;
    double gamma() const { return 1.0; }
    double dead_end_penalty() const { return penalty_; }
    std::string action_name(ActionId a) const;

    /// Executes action a against a known weather (environment side).
    Belief apply(const Belief& b, ActionId a, const Weather& w) const;

    /// Shortest agent→target distance treating unknown edges as free; the
    /// dead-end penalty when the target is unreachable that way.
    double optimistic_distance(const Belief& b) const;

    /// Move of the optimistic base policy: the first frontier node on the
    /// optimistic shortest path (ties by node id).
    ActionId optimistic_action(const Belief& b) const;

    /// Shortest known-free distances from the agent (infinity when unreachable).
    std::vector<double> known_distances(const Belief& b, std::vector<int>* pred = nullptr) const;

    bool sensed_here(const Belief& b) const;

    struct ShortestPaths {
        std::array<double, kMaxNodes> dist;
        std::array<std::int8_t, kMaxNodes> pred;
    };

    /// Shortest paths from the agent over known-free edges, or over all
    /// edges not known to be blocked when `optimistic`. The last result per
    /// thread is memoized; the reference is valid until the next call.
    const ShortestPaths& paths(const Belief& b, bool optimistic) const;

private:
    /// Unknown edges revealed by moving to v (v's path nodes, agent excluded).
    EdgeSet revealed_edges(const Belief& b, int v) const;
    void dijkstra(const Belief& b, bool optimistic, ShortestPaths& out) const;

    Instance inst_;
    double penalty_;
    std::vector<std::vector<std::pair<int, int>>> adjacency_;  // (neighbor, edge)
    std::vector<EdgeSet> incident_;
    std::uint64_t serial_;
};

static_assert(MdpModel<Model>);
static_assert(DirectlySampleable<Model>);

Weather sample_weather(const Instance& inst, Rng& rng);
bool is_solvable(const Instance& inst, const Weather& w);
/// Weather conditioned on the target being reachable (rejection sampling).
Weather sample_solvable_weather(const Instance& inst, Rng& rng, int max_tries = 100000);

/// Exact P(bad weather) by enumerating all 2^m weathers; requires m ≤ 24.
double pbad_exact(const Instance& inst);
double pbad_monte_carlo(const Instance& inst, std::size_t samples, std::uint64_t seed);

struct GeneratorParams {
    int num_nodes = 10;
    /// Probability that each non-tree node pair gets an extra edge.
    double edge_density = 0.3;
    double prior_min = 0.1;
    double prior_max = 0.5;
    std::uint64_t seed = 1;
};

struct Generated {
    Instance instance;
    double pbad = 0.0;
};

/// Random connected geometric graph; P(bad) exact for m ≤ 20, else 10^5-sample Monte Carlo.
Generated generate(const GeneratorParams& params);

}  // namespace aotplan::ctp
