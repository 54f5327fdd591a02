// qconv command line: bench / verify / report.
//
// Exit codes: 0 success, 1 verification failure, 2 invalid arguments.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "qconv/bench/bench.hpp"
#include "qconv/bench/report.hpp"
#include "qconv/bench/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitBadArguments = 2;

qconv::Layout parse_layout(const std::string& s) {
    if (s == "nchw") return qconv::Layout::nchw();
    if (s == "nhwc") return qconv::Layout::nhwc();
    qconv::fail(qconv::ErrorKind::InvalidArgument, "unknown layout: " + s);
}

qconv::ScheduleFamily parse_family(const std::string& s) {
    if (s == "spatial-pack") return qconv::ScheduleFamily::SpatialPack;
    if (s == "simd") return qconv::ScheduleFamily::Simd;
    if (s == "quantized-interleaved") return qconv::ScheduleFamily::QuantizedInterleaved;
    if (s == "direct") return qconv::ScheduleFamily::Direct;
    qconv::fail(qconv::ErrorKind::InvalidArgument, "unknown schedule: " + s);
}

int run_bench(const std::string& layout, const std::string& schedule, const std::string& precision,
              const std::string& executor, int64_t batch, int epochs, int warmup, uint64_t seed,
              const std::string& format, const std::string& graph, const std::string& tag) {
    qconv::BenchConfig cfg;
    cfg.layout = parse_layout(layout);
    cfg.schedule = parse_family(schedule);
    cfg.precision = precision == "int8" ? qconv::Precision::INT8 : qconv::Precision::FP32;
    if (precision != "int8" && precision != "fp32")
        qconv::fail(qconv::ErrorKind::InvalidArgument, "unknown precision: " + precision);
    cfg.executor = executor == "vm" ? qconv::ExecutorKind::Vm : qconv::ExecutorKind::Static;
    if (executor != "vm" && executor != "static")
        qconv::fail(qconv::ErrorKind::InvalidArgument, "unknown executor: " + executor);
    cfg.batch = batch;
    cfg.total_epochs = epochs;
    cfg.warmup_epochs = warmup;
    cfg.seed = seed;
    cfg.graph_file = graph;
    cfg.tag = tag;
    if (format == "md")
        cfg.format = qconv::ReportFormat::Markdown;
    else if (format == "csv")
        cfg.format = qconv::ReportFormat::Csv;
    else
        qconv::fail(qconv::ErrorKind::InvalidArgument, "unknown format: " + format);

    const qconv::BenchResult r = qconv::run_benchmark(cfg);
    const qconv::BenchResult results[] = {r};
    std::cout << qconv::render_report(results, r.tag, cfg.format);
    return kExitOk;
}

int run_report(const std::vector<std::string>& files, const std::string& baseline,
               const std::string& format) {
    std::vector<qconv::BenchResult> all;
    for (const std::string& path : files) {
        std::ifstream f(path);
        if (!f) qconv::fail(qconv::ErrorKind::InvalidArgument, "cannot open csv file: " + path);
        std::ostringstream ss;
        ss << f.rdbuf();
        for (qconv::BenchResult& r : qconv::parse_bench_csv(ss.str())) all.push_back(std::move(r));
    }
    if (all.empty()) qconv::fail(qconv::ErrorKind::InvalidArgument, "no results to report");
    const std::string base = baseline.empty() ? all.front().tag : baseline;
    std::cout << qconv::render_report(all, base,
                                      format == "csv" ? qconv::ReportFormat::Csv
                                                      : qconv::ReportFormat::Markdown);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"int8 convolution schedule laboratory"};
    app.require_subcommand(1);

    // bench
    auto* bench = app.add_subcommand("bench", "run one benchmark configuration");
    std::string layout = "nchw", schedule = "spatial-pack", precision = "fp32",
                executor = "static", format = "csv", graph, tag;
    int64_t batch = 1;
    int epochs = 110, warmup = 10;
    uint64_t seed = 1;
    bench->add_option("--layout", layout, "nchw|nhwc");
    bench->add_option("--schedule", schedule, "spatial-pack|simd|quantized-interleaved|direct");
    bench->add_option("--precision", precision, "fp32|int8");
    bench->add_option("--executor", executor, "static|vm");
    bench->add_option("--batch", batch, "batch size");
    bench->add_option("--epochs", epochs, "total epochs");
    bench->add_option("--warmup", warmup, "warm-up epochs (excluded from stats)");
    bench->add_option("--seed", seed, "seed for weights and synthetic inputs");
    bench->add_option("--format", format, "csv|md");
    bench->add_option("--graph", graph, "graph text file instead of the built-in model");
    bench->add_option("--tag", tag, "row tag (defaults to a config-derived one)");

    // verify
    auto* verify = app.add_subcommand("verify", "run the oracle consensus suites");
    int cases = 100;
    uint64_t vseed = 7;
    verify->add_option("--cases", cases, "randomized convolutions per suite");
    verify->add_option("--seed", vseed, "suite seed");

    // report
    auto* report = app.add_subcommand("report", "aggregate saved bench CSVs into one table");
    std::vector<std::string> files;
    std::string baseline, rformat = "md";
    report->add_option("files", files, "bench csv files")->required();
    report->add_option("--baseline", baseline, "baseline tag (defaults to the first row)");
    report->add_option("--format", rformat, "csv|md");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitBadArguments;
    }

    try {
        if (bench->parsed())
            return run_bench(layout, schedule, precision, executor, batch, epochs, warmup, seed,
                             format, graph, tag);
        if (verify->parsed()) {
            qconv::VerifyOptions opts;
            opts.conv_cases = cases;
            opts.seed = vseed;
            return qconv::run_verification(opts, std::cout) == 0 ? kExitOk : kExitVerifyFailed;
        }
        if (report->parsed()) return run_report(files, baseline, rformat);
    } catch (const qconv::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitBadArguments;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitBadArguments;
    }
    return kExitBadArguments;
}
