#pragma once

#include "aotplan/mdp.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace aotplan::sailing {

inline constexpr int kDirections = 8;

/// Headings and wind directions: 0=N, 1=NE, 2=E, 3=SE, 4=S, 5=SW, 6=W, 7=NW.
/// The wind direction is where the wind comes from; heading that way is forbidden.
/// North is +y.
inline constexpr std::array<int, kDirections> kDx{0, 1, 1, 1, 0, -1, -1, -1};
inline constexpr std::array<int, kDirections> kDy{1, 1, 0, -1, -1, -1, 0, 1};

struct Instance {
    int width = 10;
    int height = 10;
    int start_x = 0;
    int start_y = 0;
    int goal_x = 9;
    int goal_y = 9;
    int initial_wind = 0;
    double gamma = 0.95;
    /// Cost multiplier by relative angle 0°, 45°, 90°, 135°; 180° is forbidden.
    std::array<double, 4> tack{1.0, 2.0, 3.0, 4.0};
    /// Row-stochastic wind transition matrix.
    std::array<std::array<double, kDirections>, kDirections> wind{};

    void validate() const;
};

/// Stay with 0.4, rotate ±45° with 0.3 each.
std::array<std::array<double, kDirections>, kDirections> default_wind_chain();

/// Square grid, start in one corner, goal in the opposite one, default wind chain.
Instance make_instance(int size);

/// Key-value text: `sailing` header then `width`, `height`, `start x y`,
/// `goal x y`, `wind d`, `gamma g`, `tack c0 c1 c2 c3` and `wind_row i p0 .. p7`.
Instance parse_instance(std::istream& in);
void write_instance(std::ostream& out, const Instance& inst);

using State = std::uint32_t;

struct StateHash {
    std::uint64_t operator()(State s) const { return hash_combine(0, s); }
};

class Model {
public:
    using State = sailing::State;
    using StateHash = sailing::StateHash;

    explicit Model(Instance inst);

    const Instance& instance() const { return inst_; }

    State encode(int x, int y, int wind) const {
        return static_cast<State>((y * inst_.width + x) * kDirections + wind);
    }
    int x_of(State s) const { return static_cast<int>(s / kDirections) % inst_.width; }
    int y_of(State s) const { return static_cast<int>(s / kDirections) / inst_.width; }
    int wind_of(State s) const { return static_cast<int>(s % kDirections); }

    State initial_state() const { return encode(inst_.start_x, inst_.start_y, inst_.initial_wind); }
    std::size_t num_states() const {
        return static_cast<std::size_t>(inst_.width) * static_cast<std::size_t>(inst_.height) * kDirections;
    }

    static int relative_angle(int heading, int wind);

    std::vector<ActionId> actions(State s) const;
    std::vector<Outcome<State>> outcomes(State s, ActionId a) const;
    State sample(State s, ActionId a, Rng& rng) const;
    double cost(State s, ActionId a) const;
    bool is_goal(State s) const { return x_of(s) == inst_.goal_x && y_of(s) == inst_.goal_y; }
    bool is_dead_end(State) const { return false; }
    double gamma() const { return inst_.gamma; }
    double dead_end_penalty() const { return 0.0; }
    std::string action_name(ActionId a) const;

private:
    Instance inst_;
};

static_assert(MdpModel<Model>);

}  // namespace aotplan::sailing
