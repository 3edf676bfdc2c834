// SPDX-License-Identifier: Apache-2.0
//
// Batch front end: antenna-grouping optimization, Monte-Carlo sweeps,
// estimator benchmarking, ambiguity-curve exports, and single estimates,
// all driven by a sectioned key = value config file. Thread count comes
// from the GWBEAM_THREADS environment variable.

#include "CLI11.hpp"

#include "gwbeam/experiment.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

namespace {

using namespace gwbeam;

std::ofstream open_output(const std::string& path) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw config_error("cannot open output file: " + path);
    return os;
}

std::string resolve_output(const std::string& explicit_path,
                           const ExperimentConfig& cfg,
                           const char* default_name) {
    if (!explicit_path.empty()) return explicit_path;
    return (std::filesystem::path(cfg.output_dir) / default_name).string();
}

void cmd_eda_optimize(const std::string& config_path, const std::string& out,
                      const std::string& trace_out) {
    const ExperimentConfig cfg = load_config(config_path);
    const OptimizeOutcome opt = optimize_grouping(cfg);
    const std::string path = resolve_output(out, cfg, "pattern.csv");
    {
        std::ofstream os = open_output(path);
        write_pattern_csv(os, opt.result.best.pattern);
    }
    if (!trace_out.empty()) {
        std::ofstream os = open_output(trace_out);
        export_isl_trace(os, opt.result.trace);
    }
    std::printf("pattern=%s fitness=%.6e iterations=%zu\n", path.c_str(),
                opt.result.best.fitness, opt.result.trace.size());
}

void cmd_sweep(const std::string& config_path, const std::string& out) {
    const ExperimentConfig cfg = load_config(config_path);
    const std::string path = resolve_output(out, cfg, "results.csv");
    const std::vector<ResultRow> rows = run_sweep(cfg);
    std::ofstream os = open_output(path);
    write_results_csv(os, rows);
    std::printf("results=%s rows=%zu\n", path.c_str(), rows.size());
}

void cmd_bench(const std::string& config_path) {
    const ExperimentConfig cfg = load_config(config_path);
    const BenchReport report = run_bench(cfg);
    write_bench_report(std::cout, report);
}

void cmd_af(const std::string& config_path, const std::string& kind,
            const std::string& out, double theta0, int points) {
    const ExperimentConfig cfg = load_config(config_path);
    const CurveKind ck = parse_curve_kind(kind);
    const std::string path = resolve_output(out, cfg, "curve.csv");
    std::ofstream os = open_output(path);
    if (ck == CurveKind::vertical_af) {
        const AnalogBeamMatrix fa = make_beam(cfg.beams.front(), cfg);
        export_vertical_af(os, fa, cfg.prior, theta0, points);
    } else if (ck == CurveKind::horizontal_af) {
        const AnalogBeamMatrix fa = make_beam(cfg.beams.front(), cfg);
        if (!fa.grouped)
            throw config_error(
                "horizontal curve needs a grouped beam kind in the config");
        export_horizontal_af(os, fa.pattern, fa.partition, points);
    } else {
        throw config_error("af exports only vertical or horizontal curves");
    }
    std::printf("curve=%s\n", path.c_str());
}

void cmd_estimate(const std::string& config_path, std::uint64_t seed) {
    const ExperimentConfig cfg = load_config(config_path);
    const SubIntervalPartition part = make_partition(cfg.prior, cfg.group_count);
    const DynamicGrid grid = build_grid(cfg.l1(), cfg.l2(), cfg.prior, part);
    const AnalogBeamMatrix fa = make_beam(cfg.beams.front(), cfg);
    const SweepPoint pt = sweep_points(cfg).front();
    const ChannelRealization ch = sample_channel(
        pt.k_paths, cfg.prior, {-1.0, 1.0}, GainProfile{}, cfg.geom, seed);
    const double sig2 = noise_var_for(ch.h, cfg.geom.nr(), pt.snr_db);
    const VectorXcd y =
        received_signal(fa, ch.h, sig2, derive_seed(seed, {1}));

    const auto t0 = std::chrono::steady_clock::now();
    const EstimateResult est =
        run_estimator(cfg.estimators.front(), y, fa, grid, pt.k_paths, sig2);
    const std::chrono::duration<double, std::milli> dt =
        std::chrono::steady_clock::now() - t0;
    const double err = nmse(est.h_hat, ch.h);
    std::printf("nmse=%.6e nmse_db=%.3f estimator=%s beam=%s snr_db=%g "
                "k_paths=%d support=%d wall_ms=%.3f channel_hash=%llu\n",
                err, 10.0 * std::log10(err), to_string(cfg.estimators.front()),
                to_string(cfg.beams.front()), pt.snr_db, pt.k_paths,
                est.support_size, dt.count(),
                static_cast<unsigned long long>(channel_hash(ch)));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Group-wise beam design and sparse channel estimation"};
    app.require_subcommand(1);

    std::string config_path, out, trace_out, kind;
    double theta0 = 0.0;
    int points = 129;
    std::uint64_t seed = 1;

    auto* eda = app.add_subcommand("eda-optimize",
                                   "Optimize the antenna grouping pattern");
    eda->add_option("config", config_path, "config file")->required();
    eda->add_option("-o,--output", out, "pattern csv path");
    eda->add_option("--trace", trace_out, "best-fitness trace csv path");
    eda->callback([&] { cmd_eda_optimize(config_path, out, trace_out); });

    auto* sweep = app.add_subcommand("sweep", "Run a seeded Monte-Carlo sweep");
    sweep->add_option("config", config_path, "config file")->required();
    sweep->add_option("-o,--output", out, "results csv path");
    sweep->callback([&] { cmd_sweep(config_path, out); });

    auto* bench = app.add_subcommand("bench", "Time the estimators");
    bench->add_option("config", config_path, "config file")->required();
    bench->callback([&] { cmd_bench(config_path); });

    auto* af = app.add_subcommand("af", "Export an ambiguity curve");
    af->add_option("--kind", kind, "vertical or horizontal")->required();
    af->add_option("config", config_path, "config file")->required();
    af->add_option("-o,--output", out, "curve csv path");
    af->add_option("--theta0", theta0, "azimuth (radians) for vertical curves");
    af->add_option("--points", points, "curve sample count");
    af->callback([&] { cmd_af(config_path, kind, out, theta0, points); });

    auto* est = app.add_subcommand("estimate", "Single estimate, prints NMSE");
    est->add_option("config", config_path, "config file")->required();
    est->add_option("--seed", seed, "channel seed");
    est->callback([&] { cmd_estimate(config_path, seed); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        const int code = e.get_exit_code();
        return code == 0 ? 1 : code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
