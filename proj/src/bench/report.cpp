#include "qconv/bench/report.hpp"

#include <cstdio>
#include <sstream>

namespace qconv {

namespace {

std::string fmt(const char* format, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, v);
    return buf;
}

const BenchResult& find_baseline(std::span<const BenchResult> results, const std::string& tag) {
    for (const BenchResult& r : results)
        if (r.tag == tag) return r;
    fail(ErrorKind::InvalidArgument, "baseline tag not found in results: " + tag);
}

} // namespace

std::string bench_csv_header() {
    return "tag,layout,schedule,precision,executor,batch,time_ms_per_epoch,stddev_ms,"
           "improvement_pct,ideal_speedup,weight_bytes,peak_intermediate_bytes";
}

namespace {

std::string csv_row(const BenchResult& r, double improvement_pct) {
    std::ostringstream out;
    out << r.tag << ',' << r.layout << ',' << r.schedule << ',' << r.precision << ','
        << r.executor << ',' << r.batch << ',' << fmt("%.4f", r.mean_ms) << ','
        << fmt("%.4f", r.stddev_ms) << ',' << fmt("%.2f", improvement_pct) << ',';
    if (r.ideal_speedup_factor > 0.0) out << fmt("%.0f", r.ideal_speedup_factor);
    out << ',' << r.weight_bytes << ',' << r.peak_intermediate_bytes;
    return out.str();
}

} // namespace

std::string bench_csv_row(const BenchResult& r) {
    // a row serialized standalone is its own baseline
    return csv_row(r, 100.0);
}

std::string render_report(std::span<const BenchResult> results, const std::string& baseline_tag,
                          ReportFormat format) {
    const BenchResult& baseline = find_baseline(results, baseline_tag);
    std::ostringstream out;
    if (format == ReportFormat::Csv) {
        out << bench_csv_header() << '\n';
        for (const BenchResult& r : results)
            out << csv_row(r, improvement(baseline.mean_ms, r.mean_ms)) << '\n';
        return out.str();
    }
    out << "epoch time is per batch (one inference on the configured batch size); improvement is "
           "100 * baseline_ms / time_ms against '"
        << baseline_tag << "'\n\n";
    out << "| Layout | Schedule | Precision | Executor | Batch | Time (ms) | Improvement | "
           "Ideal Speedup | Weight Bytes |\n";
    out << "|---|---|---|---|---|---|---|---|---|\n";
    for (const BenchResult& r : results) {
        out << "| " << r.layout << " | " << r.schedule << " | " << r.precision << " | "
            << r.executor << " | " << r.batch << " | " << fmt("%.2f", r.mean_ms) << " | "
            << fmt("%.2f", improvement(baseline.mean_ms, r.mean_ms)) << "% | ";
        if (r.ideal_speedup_factor > 0.0)
            out << fmt("%.0f", r.ideal_speedup_factor) << "x | ";
        else
            out << "- | ";
        out << r.weight_bytes << " |\n";
    }
    return out.str();
}

std::vector<BenchResult> parse_bench_csv(const std::string& text) {
    std::vector<BenchResult> results;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (line.rfind("tag,", 0) == 0) continue; // header
        std::vector<std::string> cols;
        std::string col;
        std::istringstream ls(line);
        while (std::getline(ls, col, ',')) cols.push_back(col);
        if (cols.size() != 12)
            fail(ErrorKind::InvalidArgument, "bad bench csv row (expected 12 columns): " + line);
        BenchResult r;
        r.tag = cols[0];
        r.layout = cols[1];
        r.schedule = cols[2];
        r.precision = cols[3];
        r.executor = cols[4];
        r.batch = std::stoll(cols[5]);
        r.mean_ms = std::stod(cols[6]);
        r.stddev_ms = std::stod(cols[7]);
        // cols[8] is the improvement against the writing run's baseline; recomputed on render
        r.ideal_speedup_factor = cols[9].empty() ? 0.0 : std::stod(cols[9]);
        r.weight_bytes = std::stoull(cols[10]);
        r.peak_intermediate_bytes = std::stoull(cols[11]);
        results.push_back(std::move(r));
    }
    return results;
}

} // namespace qconv
