#pragma once

#include "aotplan/bench/episode.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace aotplan::bench {

inline constexpr const char* kCsvHeader =
    "planner,instance,budget_kind,budget,episodes,avg_time_per_action_s,avg_cost,std_err,cap_hits";

struct QualityProfileRow {
    std::string planner;
    std::string instance;
    /// "iterations", "time_ms" or "none".
    std::string budget_kind;
    double budget = 0.0;
    std::size_t episodes = 0;
    double avg_time_per_action_s = 0.0;
    double avg_cost = 0.0;
    double std_err = 0.0;
    /// Episodes that hit the step cap or aborted on a planner failure.
    std::size_t cap_hits = 0;

    friend bool operator==(const QualityProfileRow&, const QualityProfileRow&) = default;
};

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

void write_csv(std::ostream& out, const std::vector<QualityProfileRow>& rows);
std::vector<QualityProfileRow> parse_csv(std::istream& in);

/// CSV text with the timing column blanked, for determinism comparisons.
std::string strip_timing(const std::string& csv);

void write_trace(std::ostream& out, const std::vector<TraceEntry>& trace);
std::vector<TraceEntry> parse_trace(std::istream& in);

}  // namespace aotplan::bench
