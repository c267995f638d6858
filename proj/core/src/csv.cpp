#include "aotplan/bench/csv.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace aotplan::bench {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s) {
    if (s == "inf") {
        return INFINITY;
    }
    if (s == "-inf") {
        return -INFINITY;
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw std::invalid_argument("csv: bad number '" + s + "'");
    }
    return v;
}

template <class Int>
Int parse_int(const std::string& s) {
    Int v{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw std::invalid_argument("csv: bad integer '" + s + "'");
    }
    return v;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) {
        throw std::runtime_error("format_double failed");
    }
    return std::string(buf, ptr);
}

void write_csv(std::ostream& out, const std::vector<QualityProfileRow>& rows) {
    out << kCsvHeader << '\n';
    for (const auto& r : rows) {
        if (r.planner.find(',') != std::string::npos || r.instance.find(',') != std::string::npos) {
            throw std::invalid_argument("csv: planner and instance ids must not contain commas");
        }
        out << r.planner << ',' << r.instance << ',' << r.budget_kind << ',' << format_double(r.budget)
            << ',' << r.episodes << ',' << format_double(r.avg_time_per_action_s) << ','
            << format_double(r.avg_cost) << ',' << format_double(r.std_err) << ',' << r.cap_hits << '\n';
    }
}

std::vector<QualityProfileRow> parse_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) {
        throw std::invalid_argument("csv: missing or unexpected header");
    }
    std::vector<QualityProfileRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        auto f = split(line, ',');
        if (f.size() != 9) {
            throw std::invalid_argument("csv: expected 9 fields, got " + std::to_string(f.size()));
        }
        QualityProfileRow r;
        r.planner = f[0];
        r.instance = f[1];
        r.budget_kind = f[2];
        r.budget = parse_double(f[3]);
        r.episodes = parse_int<std::size_t>(f[4]);
        r.avg_time_per_action_s = parse_double(f[5]);
        r.avg_cost = parse_double(f[6]);
        r.std_err = parse_double(f[7]);
        r.cap_hits = parse_int<std::size_t>(f[8]);
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string strip_timing(const std::string& csv) {
    std::istringstream in(csv);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line)) {
        auto f = split(line, ',');
        if (f.size() == 9 && line != kCsvHeader) {
            f[5] = "-";
        }
        for (std::size_t i = 0; i < f.size(); ++i) {
            out << (i ? "," : "") << f[i];
        }
        out << '\n';
    }
    return out.str();
}

void write_trace(std::ostream& out, const std::vector<TraceEntry>& trace) {
    for (const auto& t : trace) {
        out << t.step << ',' << t.state_hash << ',' << t.action << ',' << t.outcome_hash << ','
            << format_double(t.cost) << '\n';
    }
}

std::vector<TraceEntry> parse_trace(std::istream& in) {
    std::vector<TraceEntry> trace;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        auto f = split(line, ',');
        if (f.size() != 5) {
            throw std::invalid_argument("trace: expected 5 fields");
        }
        TraceEntry t;
        t.step = parse_int<int>(f[0]);
        t.state_hash = parse_int<std::uint64_t>(f[1]);
        t.action = parse_int<int>(f[2]);
        t.outcome_hash = parse_int<std::uint64_t>(f[3]);
        t.cost = parse_double(f[4]);
        trace.push_back(t);
    }
    return trace;
}

}  // namespace aotplan::bench
