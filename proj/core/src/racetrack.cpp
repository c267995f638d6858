#include "aotplan/domains/racetrack.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace aotplan::racetrack {

std::vector<std::pair<int, int>> Instance::start_cells() const {
    std::vector<std::pair<int, int>> out;
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            if (at(x, y) == Cell::start) {
                out.emplace_back(x, y);
            }
        }
    }
    return out;
}

void Instance::validate() const {
    if (width < 1 || height < 1 || cells.size() != static_cast<std::size_t>(width * height)) {
        throw std::invalid_argument("racetrack: bad grid");
    }
    if (width > 30000 || height > 30000) {
        throw std::invalid_argument("racetrack: grid too large");
    }
    if (!(slip >= 0.0 && slip < 1.0)) {
        throw std::invalid_argument("racetrack: slip must lie in [0, 1)");
    }
    if (max_speed < 1 || max_speed > 100) {
        throw std::invalid_argument("racetrack: max speed must be in [1, 100]");
    }
    if (start_cells().empty()) {
        throw std::invalid_argument("racetrack: no start cell");
    }
    if (std::none_of(cells.begin(), cells.end(), [](Cell c) { return c == Cell::finish; })) {
        throw std::invalid_argument("racetrack: no finish cell");
    }
}

Instance parse_instance(std::istream& in) {
    Instance inst;
    std::string line;
    bool header = false;
    std::vector<std::string> rows;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (!header) {
            std::istringstream ls(line);
            std::string tok;
            if (!(ls >> tok) || tok[0] == '#') {
                continue;
            }
            if (tok != "racetrack" || !(ls >> inst.slip)) {
                throw std::invalid_argument("racetrack file: expected 'racetrack <slip> [max_speed]'");
            }
            int speed;
            if (ls >> speed) {
                inst.max_speed = speed;
            }
            header = true;
            continue;
        }
        if (line.empty()) {
            continue;
        }
        rows.push_back(line);
    }
    if (!header) {
        throw std::invalid_argument("racetrack file: missing header");
    }
    if (rows.empty()) {
        throw std::invalid_argument("racetrack file: empty grid");
    }
    inst.height = static_cast<int>(rows.size());
    inst.width = static_cast<int>(rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (static_cast<int>(rows[r].size()) != inst.width) {
            throw std::invalid_argument("racetrack file: ragged grid row " + std::to_string(r + 1));
        }
        for (char c : rows[r]) {
            switch (c) {
                case '.': inst.cells.push_back(Cell::track); break;
                case '#': inst.cells.push_back(Cell::wall); break;
                case 's': inst.cells.push_back(Cell::start); break;
                case 'f': inst.cells.push_back(Cell::finish); break;
                default:
                    throw std::invalid_argument(std::string("racetrack file: bad cell '") + c + "'");
            }
        }
    }
    inst.validate();
    return inst;
}

void write_instance(std::ostream& out, const Instance& inst) {
    out << "racetrack " << inst.slip << ' ' << inst.max_speed << '\n';
    for (int y = 0; y < inst.height; ++y) {
        for (int x = 0; x < inst.width; ++x) {
            static constexpr char kChars[] = {'.', '#', 's', 'f'};
            out << kChars[static_cast<int>(inst.at(x, y))];
        }
        out << '\n';
    }
}

Model::Model(Instance inst) : inst_(std::move(inst)) {
    inst_.validate();
    starts_ = inst_.start_cells();
}

State Model::initial_state() const {
    State s;
    s.x = static_cast<std::int16_t>(starts_.front().first);
    s.y = static_cast<std::int16_t>(starts_.front().second);
    return s;
}

std::vector<ActionId> Model::actions(const State& s) const {
    if (s.goal) {
        return {};
    }
    return {0, 1, 2, 3, 4, 5, 6, 7, 8};
}

void Model::add_successors(const State& s, int ax, int ay, double p,
                           std::vector<Outcome<State>>& out) const {
    const int vx = std::clamp(s.vx + ax, -inst_.max_speed, inst_.max_speed);
    const int vy = std::clamp(s.vy + ay, -inst_.max_speed, inst_.max_speed);
    const int steps = std::max(std::abs(vx), std::abs(vy));
    bool crashed = false;
    for (int i = 1; i <= steps; ++i) {
        const int cx = s.x + static_cast<int>(std::lround(static_cast<double>(vx) * i / steps));
        const int cy = s.y + static_cast<int>(std::lround(static_cast<double>(vy) * i / steps));
        if (!inst_.inside(cx, cy) || inst_.at(cx, cy) == Cell::wall) {
            crashed = true;
            break;
        }
        if (inst_.at(cx, cy) == Cell::finish) {
            State g;
            g.goal = true;
            out.push_back({g, p});
            return;
        }
    }
    if (crashed) {
        const double share = p / static_cast<double>(starts_.size());
        for (auto [x, y] : starts_) {
            State r;
            r.x = static_cast<std::int16_t>(x);
            r.y = static_cast<std::int16_t>(y);
            out.push_back({r, share});
        }
        return;
    }
    State n;
    n.x = static_cast<std::int16_t>(s.x + vx);
    n.y = static_cast<std::int16_t>(s.y + vy);
    n.vx = static_cast<std::int8_t>(vx);
    n.vy = static_cast<std::int8_t>(vy);
    out.push_back({n, p});
}

std::vector<Outcome<State>> Model::outcomes(const State& s, ActionId a) const {
    if (a < 0 || a > 8 || s.goal) {
        throw std::invalid_argument("racetrack: action not applicable");
    }
    std::vector<Outcome<State>> raw;
    const double slip = inst_.slip;
    add_successors(s, a % 3 - 1, a / 3 - 1, 1.0 - slip, raw);
    if (slip > 0.0) {
        add_successors(s, 0, 0, slip, raw);
    }
    // merge identical successors, keeping first-appearance order
    std::vector<Outcome<State>> outs;
    for (auto& o : raw) {
        auto it = std::find_if(outs.begin(), outs.end(), [&](const auto& x) { return x.state == o.state; });
        if (it == outs.end()) {
            outs.push_back(o);
        } else {
            it->probability += o.probability;
        }
    }
    return outs;
}

std::string Model::action_name(ActionId a) const {
    if (a < 0 || a > 8) {
        return "?";
    }
    return "a(" + std::to_string(a % 3 - 1) + "," + std::to_string(a / 3 - 1) + ")";
}

}  // namespace aotplan::racetrack
