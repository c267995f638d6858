#pragma once

#include "aotplan/plan_result.hpp"
#include "aotplan/uct.hpp"

#include <cstddef>
#include <optional>
#include <string>

namespace aotplan::bench {

/// A planner configuration as selected on the command line.
struct PlannerSpec {
    /// aot, ao, uct, lrtdp, or base (execute the base policy directly).
    std::string algo = "aot";
    /// zero, minmin or scaled:<d>.
    std::string heuristic = "zero";
    /// random, optimistic or greedy. AOT uses rollouts of it when set.
    std::optional<std::string> base_policy;
    double p = 0.5;
    double k = 0.1;
    std::optional<std::size_t> batch_size;
    ExplorationMode exploration = ExplorationMode::adaptive;
    double c = 1.0;
    double epsilon = 1e-4;
    bool retain_table = false;

    /// Comma-free identifier used in CSV rows, e.g. `aot/pi=optimistic`.
    std::string id() const;
    /// Throws std::invalid_argument on unknown names or out-of-range values.
    void validate() const;
};

/// Parses `fixed:<v>` or `adaptive` into the planner settings.
void parse_exploration(const std::string& text, PlannerSpec& spec);

std::string budget_kind(const Budget& budget);
double budget_amount(const Budget& budget);

}  // namespace aotplan::bench
