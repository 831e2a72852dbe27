#include "sketchdesc/trace.hpp"

#include "sketchdesc/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace sketchdesc {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        fail(ErrorCode::Io, "malformed number '" + std::string(s) + "'");
    }
    return v;
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& rows) {
    out << kTraceHeader << '\n';
    for (const auto& r : rows) {
        out << r.k << ',' << format_double(r.f) << ',' << format_double(r.feas_inf) << ','
            << format_double(r.opt_measure) << ',' << r.wall_ns << '\n';
    }
}

void write_trace_csv(const std::filesystem::path& path, const std::vector<TraceRow>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
    write_trace_csv(out, rows);
}

std::vector<TraceRow> read_trace_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kTraceHeader) fail(ErrorCode::Io, "trace: missing or unexpected header");
    std::vector<TraceRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string_view> cells;
        std::string_view rest(line);
        for (;;) {
            const auto pos = rest.find(',');
            cells.push_back(rest.substr(0, pos));
            if (pos == std::string_view::npos) break;
            rest.remove_prefix(pos + 1);
        }
        if (cells.size() != 5) fail(ErrorCode::Io, "trace: expected 5 columns");
        TraceRow r;
        const auto parse_int = [](std::string_view s, auto& out) {
            const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
            if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
                fail(ErrorCode::Io, "trace: malformed integer '" + std::string(s) + "'");
            }
        };
        parse_int(cells[0], r.k);
        r.f = parse_double(cells[1]);
        r.feas_inf = parse_double(cells[2]);
        r.opt_measure = parse_double(cells[3]);
        parse_int(cells[4], r.wall_ns);
        if (!rows.empty() && r.k <= rows.back().k) fail(ErrorCode::Io, "trace: k must be strictly increasing");
        rows.push_back(r);
    }
    return rows;
}

std::vector<TraceRow> read_trace_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot read " + path.string());
    return read_trace_csv(in);
}

double percentile(std::vector<double> values, double q) {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double t = pos - static_cast<double>(lo);
    return values[lo] + t * (values[hi] - values[lo]);
}

std::vector<AggregateRow> aggregate_traces(const std::vector<std::vector<TraceRow>>& runs) {
    std::map<Index, int> ks;
    for (const auto& run : runs) {
        for (const auto& r : run) ks[r.k] = 0;
    }
    std::vector<AggregateRow> out;
    out.reserve(ks.size());
    std::vector<std::size_t> cursor(runs.size(), 0);
    std::vector<double> vals;
    for (const auto& [k, unused] : ks) {
        (void)unused;
        vals.clear();
        for (std::size_t i = 0; i < runs.size(); ++i) {
            const auto& run = runs[i];
            if (run.empty()) continue;
            auto& c = cursor[i];
            while (c + 1 < run.size() && run[c + 1].k <= k) ++c;
            if (run[c].k <= k) vals.push_back(run[c].f);
        }
        if (vals.empty()) continue;
        AggregateRow a;
        a.k = k;
        double sum = 0.0;
        for (double v : vals) sum += v;
        a.f_mean = sum / static_cast<double>(vals.size());
        a.f_median = percentile(vals, 0.5);
        a.f_p10 = percentile(vals, 0.1);
        a.f_p90 = percentile(vals, 0.9);
        out.push_back(a);
    }
    return out;
}

void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows) {
    out << kAggregateHeader << '\n';
    for (const auto& r : rows) {
        out << r.k << ',' << format_double(r.f_mean) << ',' << format_double(r.f_median) << ','
            << format_double(r.f_p10) << ',' << format_double(r.f_p90) << '\n';
    }
}

void write_aggregate_csv(std::ostream& out, const std::string& cell, const std::vector<AggregateRow>& rows,
                         bool header) {
    if (header) out << "cell," << kAggregateHeader << '\n';
    for (const auto& r : rows) {
        out << cell << ',' << r.k << ',' << format_double(r.f_mean) << ',' << format_double(r.f_median) << ','
            << format_double(r.f_p10) << ',' << format_double(r.f_p90) << '\n';
    }
}

}  // namespace sketchdesc
