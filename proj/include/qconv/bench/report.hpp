#pragma once

#include <span>
#include <string>
#include <vector>

#include "qconv/bench/bench.hpp"

namespace qconv {

// Table-shaped reporting. Columns: tag, layout, schedule, precision, executor,
// batch, time_ms_per_epoch, stddev_ms, improvement_pct, ideal_speedup,
// weight_bytes, peak_intermediate_bytes. The time column name records that
// epoch time is per batch, not per image. Improvement is computed against the
// result whose tag equals baseline_tag (that row reads 100.00).
std::string render_report(std::span<const BenchResult> results, const std::string& baseline_tag,
                          ReportFormat format);

std::string bench_csv_header();
std::string bench_csv_row(const BenchResult& r);

// Parses rows produced by bench_csv_row (used by the report subcommand to
// aggregate saved runs). Skips the header when present.
std::vector<BenchResult> parse_bench_csv(const std::string& text);

} // namespace qconv
