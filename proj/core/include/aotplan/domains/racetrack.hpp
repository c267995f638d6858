#pragma once

#include "aotplan/mdp.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace aotplan::racetrack {

enum class Cell : std::uint8_t { track, wall, start, finish };

struct Instance {
    int width = 0;
    int height = 0;
    double slip = 0.1;
    int max_speed = 5;
    /// Row-major, row 0 is the first grid line of the file.
    std::vector<Cell> cells;

    Cell at(int x, int y) const { return cells[static_cast<std::size_t>(y * width + x)]; }
    bool inside(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
    std::vector<std::pair<int, int>> start_cells() const;
    void validate() const;
};

/// Header `racetrack <slip> [max_speed]`, then grid rows over `. # s f`.
Instance parse_instance(std::istream& in);
void write_instance(std::ostream& out, const Instance& inst);

/// Position and velocity, plus one canonical goal state.
struct State {
    std::int16_t x = 0;
    std::int16_t y = 0;
    std::int8_t vx = 0;
    std::int8_t vy = 0;
    bool goal = false;

    friend bool operator==(const State&, const State&) = default;
};

struct StateHash {
    std::uint64_t operator()(const State& s) const {
        std::uint64_t packed = (static_cast<std::uint64_t>(static_cast<std::uint16_t>(s.x)) << 24) |
                               (static_cast<std::uint64_t>(static_cast<std::uint16_t>(s.y)) << 8) |
                               static_cast<std::uint64_t>(s.goal);
        packed = (packed << 16) | (static_cast<std::uint64_t>(static_cast<std::uint8_t>(s.vx)) << 8) |
                 static_cast<std::uint8_t>(s.vy);
        return hash_combine(0, packed);
    }
};

/// Barto-style racetrack. Action a ∈ [0, 9) requests acceleration
/// (a % 3 − 1, a / 3 − 1); with probability `slip` the acceleration is zero.
/// Leaving the track resets the car to a uniformly drawn start cell at rest;
/// crossing a finish cell ends the episode. Every step costs 1.
class Model {
public:
    using State = racetrack::State;
    using StateHash = racetrack::StateHash;

    explicit Model(Instance inst);

    const Instance& instance() const { return inst_; }
    /// Car at rest on the first start cell in reading order.
    State initial_state() const;

    std::vector<ActionId> actions(const State& s) const;
    std::vector<Outcome<State>> outcomes(const State& s, ActionId a) const;
    double cost(const State&, ActionId) const { return 1.0; }
    bool is_goal(const State& s) const { return s.goal; }
    bool is_dead_end(const State&) const { return false; }
    double gamma() const { return 1.0; }
    double dead_end_penalty() const { return 0.0; }
    std::string action_name(ActionId a) const;

private:
    /// Appends the successors of applying acceleration (ax, ay) with weight p.
    void add_successors(const State& s, int ax, int ay, double p, std::vector<Outcome<State>>& out) const;

    Instance inst_;
    std::vector<std::pair<int, int>> starts_;
};

static_assert(MdpModel<Model>);

}  // namespace aotplan::racetrack
