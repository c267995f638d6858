#pragma once

#include "aotplan/mdp.hpp"

#include <chrono>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

namespace aotplan {

/// Per-decision statistics shared by every planner.
struct PlanStats {
    std::size_t iterations = 0;  // expansions (AOT/AO*), rollouts (UCT), trials (LRTDP)
    std::size_t nodes_created = 0;
    std::size_t delta_traversals = 0;
    std::size_t forced_switches = 0;
    double wall_time_s = 0.0;
};

struct PlanResult {
    ActionId action = -1;
    /// Cost-form value of the root under the planner's current estimates.
    double root_value = 0.0;
    std::vector<std::pair<ActionId, double>> root_q;
    PlanStats stats;
};

/// Iteration and/or wall-clock budget. An empty budget means "run to completion"
/// for planners that have a termination condition.
struct Budget {
    std::optional<std::size_t> iterations;
    std::optional<double> time_ms;

    bool unlimited() const { return !iterations && !time_ms; }
};

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }
    double millis() const { return seconds() * 1e3; }

private:
    std::chrono::steady_clock::time_point start_;
};

}  // namespace aotplan
