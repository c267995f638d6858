#include "aotplan/domains/sailing.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace aotplan::sailing {

namespace {

constexpr std::array<const char*, kDirections> kNames{"N", "NE", "E", "SE", "S", "SW", "W", "NW"};

}  // namespace

std::array<std::array<double, kDirections>, kDirections> default_wind_chain() {
    std::array<std::array<double, kDirections>, kDirections> w{};
    for (int i = 0; i < kDirections; ++i) {
        w[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 0.4;
        w[static_cast<std::size_t>(i)][static_cast<std::size_t>((i + 1) % kDirections)] = 0.3;
        w[static_cast<std::size_t>(i)][static_cast<std::size_t>((i + kDirections - 1) % kDirections)] = 0.3;
    }
    return w;
}

Instance make_instance(int size) {
    Instance inst;
    inst.width = size;
    inst.height = size;
    inst.goal_x = size - 1;
    inst.goal_y = size - 1;
    inst.wind = default_wind_chain();
    inst.validate();
    return inst;
}

void Instance::validate() const {
    if (width < 1 || height < 1 || width * height * kDirections > (1 << 30)) {
        throw std::invalid_argument("sailing: bad grid size");
    }
    auto inside = [&](int x, int y) { return x >= 0 && x < width && y >= 0 && y < height; };
    if (!inside(start_x, start_y) || !inside(goal_x, goal_y)) {
        throw std::invalid_argument("sailing: start/goal outside the grid");
    }
    if (initial_wind < 0 || initial_wind >= kDirections) {
        throw std::invalid_argument("sailing: wind direction must be in [0, 8)");
    }
    if (!(gamma > 0.0 && gamma <= 1.0)) {
        throw std::invalid_argument("sailing: gamma must lie in (0, 1]");
    }
    for (double c : tack) {
        if (!(c > 0.0)) {
            throw std::invalid_argument("sailing: tack costs must be positive");
        }
    }
    for (const auto& row : wind) {
        double sum = 0.0;
        for (double p : row) {
            if (p < 0.0) {
                throw std::invalid_argument("sailing: negative wind probability");
            }
            sum += p;
        }
        if (std::abs(sum - 1.0) > kProbabilityTolerance) {
            throw std::invalid_argument("sailing: wind rows must sum to 1");
        }
    }
}

Instance parse_instance(std::istream& in) {
    Instance inst;
    inst.wind = default_wind_chain();
    std::string line;
    int line_no = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key) || key[0] == '#') {
            continue;
        }
        auto fail = [&](const std::string& what) {
            throw std::invalid_argument("sailing file line " + std::to_string(line_no) + ": " + what);
        };
        if (!header) {
            if (key != "sailing") {
                fail("expected 'sailing' header");
            }
            header = true;
            continue;
        }
        bool ok = true;
        if (key == "width") {
            ok = static_cast<bool>(ls >> inst.width);
        } else if (key == "height") {
            ok = static_cast<bool>(ls >> inst.height);
        } else if (key == "start") {
            ok = static_cast<bool>(ls >> inst.start_x >> inst.start_y);
        } else if (key == "goal") {
            ok = static_cast<bool>(ls >> inst.goal_x >> inst.goal_y);
        } else if (key == "wind") {
            ok = static_cast<bool>(ls >> inst.initial_wind);
        } else if (key == "gamma") {
            ok = static_cast<bool>(ls >> inst.gamma);
        } else if (key == "tack") {
            for (double& c : inst.tack) {
                ok = ok && static_cast<bool>(ls >> c);
            }
        } else if (key == "wind_row") {
            int i = -1;
            ok = static_cast<bool>(ls >> i) && i >= 0 && i < kDirections;
            if (ok) {
                for (double& p : inst.wind[static_cast<std::size_t>(i)]) {
                    ok = ok && static_cast<bool>(ls >> p);
                }
            }
        } else {
            fail("unknown key '" + key + "'");
        }
        if (!ok) {
            fail("malformed '" + key + "' line");
        }
    }
    if (!header) {
        throw std::invalid_argument("sailing file: missing header");
    }
    inst.validate();
    return inst;
}

void write_instance(std::ostream& out, const Instance& inst) {
    auto old = out.precision(17);
    out << "sailing\n"
        << "width " << inst.width << "\nheight " << inst.height << "\nstart " << inst.start_x << ' '
        << inst.start_y << "\ngoal " << inst.goal_x << ' ' << inst.goal_y << "\nwind "
        << inst.initial_wind << "\ngamma " << inst.gamma << "\ntack";
    for (double c : inst.tack) {
        out << ' ' << c;
    }
    out << '\n';
    for (int i = 0; i < kDirections; ++i) {
        out << "wind_row " << i;
        for (double p : inst.wind[static_cast<std::size_t>(i)]) {
            out << ' ' << p;
        }
        out << '\n';
    }
    out.precision(old);
}

Model::Model(Instance inst) : inst_(std::move(inst)) { inst_.validate(); }

int Model::relative_angle(int heading, int wind) {
    int diff = std::abs(heading - wind);
    return std::min(diff, kDirections - diff);
}

std::vector<ActionId> Model::actions(State s) const {
    std::vector<ActionId> acts;
    if (is_goal(s)) {
        return acts;
    }
    const int x = x_of(s);
    const int y = y_of(s);
    const int w = wind_of(s);
    for (int h = 0; h < kDirections; ++h) {
        // the wind blows from direction w, so sailing towards w is into the wind
        if (relative_angle(h, w) == 0) {
            continue;
        }
        int nx = x + kDx[static_cast<std::size_t>(h)];
        int ny = y + kDy[static_cast<std::size_t>(h)];
        if (nx < 0 || nx >= inst_.width || ny < 0 || ny >= inst_.height) {
            continue;
        }
        acts.push_back(h);
    }
    return acts;
}

double Model::cost(State s, ActionId a) const {
    if (a < 0 || a >= kDirections) {
        throw std::invalid_argument("sailing: bad heading " + std::to_string(a));
    }
    // angle between the heading and the direction the wind blows towards
    int towards = (wind_of(s) + 4) % kDirections;
    int rel = relative_angle(a, towards);
    if (rel == 4) {
        throw std::invalid_argument("sailing: heading into the wind");
    }
    double length = (a % 2 == 1) ? std::sqrt(2.0) : 1.0;
    return inst_.tack[static_cast<std::size_t>(rel)] * length;
}

std::vector<Outcome<State>> Model::outcomes(State s, ActionId a) const {
    const int nx = x_of(s) + kDx[static_cast<std::size_t>(a)];
    const int ny = y_of(s) + kDy[static_cast<std::size_t>(a)];
    if (nx < 0 || nx >= inst_.width || ny < 0 || ny >= inst_.height) {
        throw std::invalid_argument("sailing: heading leaves the grid");
    }
    std::vector<Outcome<State>> outs;
    const auto& row = inst_.wind[static_cast<std::size_t>(wind_of(s))];
    for (int w = 0; w < kDirections; ++w) {
        if (row[static_cast<std::size_t>(w)] > 0.0) {
            outs.push_back({encode(nx, ny, w), row[static_cast<std::size_t>(w)]});
        }
    }
    return outs;
}

State Model::sample(State s, ActionId a, Rng& rng) const {
    const int nx = x_of(s) + kDx[static_cast<std::size_t>(a)];
    const int ny = y_of(s) + kDy[static_cast<std::size_t>(a)];
    const auto& row = inst_.wind[static_cast<std::size_t>(wind_of(s))];
    double u = uniform01(rng);
    int w = kDirections - 1;
    for (int i = 0; i < kDirections; ++i) {
        if (u < row[static_cast<std::size_t>(i)]) {
            w = i;
            break;
        }
        u -= row[static_cast<std::size_t>(i)];
    }
    while (row[static_cast<std::size_t>(w)] <= 0.0) {
        --w;
    }
    return encode(nx, ny, w);
}

std::string Model::action_name(ActionId a) const {
    if (a < 0 || a >= kDirections) {
        return "?";
    }
    return kNames[static_cast<std::size_t>(a)];
}

}  // namespace aotplan::sailing
