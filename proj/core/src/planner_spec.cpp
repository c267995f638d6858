#include "aotplan/bench/planner_spec.hpp"

#include "aotplan/bench/csv.hpp"

#include <stdexcept>

namespace aotplan::bench {

namespace {

bool is_heuristic_name(const std::string& h) {
    if (h == "zero" || h == "minmin") {
        return true;
    }
    if (h.rfind("scaled:", 0) == 0) {
        std::size_t used = 0;
        double d = std::stod(h.substr(7), &used);
        return used == h.size() - 7 && d > 0.0;
    }
    return false;
}

}  // namespace

std::string PlannerSpec::id() const {
    std::string s = algo;
    if (algo == "base") {
        return s + "/pi=" + base_policy.value_or("random");
    }
    if (algo == "uct") {
        s += "/pi=" + base_policy.value_or("random");
        s += exploration == ExplorationMode::adaptive ? "/C=adaptive" : "/C=fixed:" + format_double(c);
        return s;
    }
    if (algo == "aot") {
        s += base_policy ? "/pi=" + *base_policy : "/h=" + heuristic;
        if (p != 0.5) {
            s += "/p=" + format_double(p);
        }
        return s;
    }
    return s + "/h=" + heuristic;
}

void PlannerSpec::validate() const {
    if (algo != "aot" && algo != "ao" && algo != "uct" && algo != "lrtdp" && algo != "base") {
        throw std::invalid_argument("unknown algorithm '" + algo + "'");
    }
    bool ok_h = false;
    try {
        ok_h = is_heuristic_name(heuristic);
    } catch (const std::exception&) {
        ok_h = false;
    }
    if (!ok_h) {
        throw std::invalid_argument("unknown heuristic '" + heuristic + "'");
    }
    if (base_policy && *base_policy != "random" && *base_policy != "optimistic" && *base_policy != "greedy") {
        throw std::invalid_argument("unknown base policy '" + *base_policy + "'");
    }
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("p must lie in [0, 1]");
    }
    if (!(k > 0.0)) {
        throw std::invalid_argument("k must be positive");
    }
    if (!(c >= 0.0)) {
        throw std::invalid_argument("C must be >= 0");
    }
    if (!(epsilon >= 0.0)) {
        throw std::invalid_argument("epsilon must be >= 0");
    }
}

void parse_exploration(const std::string& text, PlannerSpec& spec) {
    if (text == "adaptive") {
        spec.exploration = ExplorationMode::adaptive;
        return;
    }
    if (text.rfind("fixed:", 0) == 0) {
        std::size_t used = 0;
        double v = std::stod(text.substr(6), &used);
        if (used != text.size() - 6 || !(v >= 0.0)) {
            throw std::invalid_argument("bad exploration constant '" + text + "'");
        }
        spec.exploration = ExplorationMode::fixed;
        spec.c = v;
        return;
    }
    throw std::invalid_argument("exploration must be 'adaptive' or 'fixed:<v>'");
}

std::string budget_kind(const Budget& budget) {
    if (budget.iterations) {
        return "iterations";
    }
    if (budget.time_ms) {
        return "time_ms";
    }
    return "none";
}

double budget_amount(const Budget& budget) {
    if (budget.iterations) {
        return static_cast<double>(*budget.iterations);
    }
    return budget.time_ms.value_or(0.0);
}

}  // namespace aotplan::bench
