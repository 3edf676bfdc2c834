// SPDX-License-Identifier: Apache-2.0
//
// Experiment harness: config-file ingestion, seeded Monte-Carlo sweeps over
// SNR or path count with a paired design, wall-time benchmarking, and
// plot-ready CSV exports. Everything is driven by a flat key = value config
// so that fixture files diff cleanly.

#ifndef GWBEAM_EXPERIMENT_HPP
#define GWBEAM_EXPERIMENT_HPP

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gwbeam/beams.hpp"
#include "gwbeam/eda.hpp"
#include "gwbeam/estimator.hpp"
#include "gwbeam/metrics.hpp"

namespace gwbeam {

// ---------------------------------------------------------------------------
// Enumerations

enum class BeamKind { group_wise_opt, group_wise_uniform, random_phases, wide };
enum class EstimatorKind { gw_scvbi, scvbi, omp };
enum class SweepAxis { snr_db, k_paths };
enum class CurveKind { vertical_af, horizontal_af, isl_trace };

inline const char* to_string(BeamKind k) {
    switch (k) {
    case BeamKind::group_wise_opt: return "group-wise-opt";
    case BeamKind::group_wise_uniform: return "group-wise-uniform";
    case BeamKind::random_phases: return "random";
    default: return "wide";
    }
}

inline const char* to_string(EstimatorKind k) {
    switch (k) {
    case EstimatorKind::gw_scvbi: return "gw-scvbi";
    case EstimatorKind::scvbi: return "scvbi";
    default: return "omp";
    }
}

inline BeamKind parse_beam_kind(const std::string& s) {
    if (s == "group-wise-opt") return BeamKind::group_wise_opt;
    if (s == "group-wise-uniform") return BeamKind::group_wise_uniform;
    if (s == "random") return BeamKind::random_phases;
    if (s == "wide") return BeamKind::wide;
    throw config_error("unknown beam kind: " + s);
}

inline EstimatorKind parse_estimator_kind(const std::string& s) {
    if (s == "gw-scvbi") return EstimatorKind::gw_scvbi;
    if (s == "scvbi") return EstimatorKind::scvbi;
    if (s == "omp") return EstimatorKind::omp;
    throw config_error("unknown estimator kind: " + s);
}

inline CurveKind parse_curve_kind(const std::string& s) {
    if (s == "vertical-af" || s == "vertical") return CurveKind::vertical_af;
    if (s == "horizontal-af" || s == "horizontal") return CurveKind::horizontal_af;
    if (s == "isl-trace") return CurveKind::isl_trace;
    throw config_error("unknown curve kind: " + s);
}

// ---------------------------------------------------------------------------
// Configuration

struct ExperimentConfig {
    UpaGeometry geom{16, 24, 6};
    VerticalPrior prior;
    int group_count = 4;
    std::vector<BeamKind> beams{BeamKind::group_wise_uniform};
    std::string pattern_file;
    std::vector<EstimatorKind> estimators{EstimatorKind::gw_scvbi};
    SweepAxis axis = SweepAxis::snr_db;
    std::vector<double> snr_values{5.0};
    std::vector<int> k_values{10};
    int trials = 1;
    std::uint64_t base_seed = 1;
    std::string output_dir = ".";
    int grid_l1 = 0; // 0: derive as 2 * N_y
    int grid_l2 = 64;
    EdaConfig eda;
    int srl_patterns = 200; // feasibility-bound calibration sample
    double srl_slack = 1.1;
    int bench_reps = 10;
    int bench_warmups = 2;

    int l1() const { return grid_l1 > 0 ? grid_l1 : 2 * geom.ny; }
    int l2() const { return grid_l2; }

    void validate() const {
        if (group_count < 1) throw config_error("group count must be >= 1");
        if (beams.empty()) throw config_error("at least one beam kind required");
        if (estimators.empty()) throw config_error("at least one estimator required");
        if (trials < 1) throw config_error("trials must be >= 1");
        if (snr_values.empty() || k_values.empty())
            throw config_error("sweep values must be nonempty");
        for (int k : k_values)
            if (k < 1) throw config_error("path counts must be >= 1");
        for (double s : snr_values)
            if (!std::isfinite(s)) throw config_error("snr values must be finite");
        if (grid_l2 < 1 || (grid_l1 != 0 && grid_l1 < 1))
            throw config_error("grid sizes must be >= 1");
        if (bench_reps < 1 || bench_warmups < 0)
            throw config_error("bench repetition counts invalid");
        if (srl_patterns < 1 || !(srl_slack > 0.0))
            throw config_error("bound calibration parameters invalid");
        const bool needs_pattern =
            std::find(beams.begin(), beams.end(), BeamKind::group_wise_opt) !=
            beams.end();
        if (needs_pattern) {
            if (pattern_file.empty())
                throw config_error("group-wise-opt beam requires a pattern file");
            if (!std::filesystem::exists(pattern_file))
                throw config_error("pattern file not found: " + pattern_file);
        }
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

inline double parse_double(const std::string& s, const std::string& key) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw config_error("invalid number for " + key + ": " + s);
    }
}

inline long long parse_int(const std::string& s, const std::string& key) {
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw config_error("invalid integer for " + key + ": " + s);
    }
}

inline std::uint64_t parse_u64(const std::string& s, const std::string& key) {
    try {
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return static_cast<std::uint64_t>(v);
    } catch (const std::exception&) {
        throw config_error("invalid seed for " + key + ": " + s);
    }
}

} // namespace detail

// Flat sectioned key = value files; '#' and ';' start comments; unknown keys
// are rejected so that typos fail loudly instead of silently using defaults.
inline ExperimentConfig parse_config(std::istream& in) {
    ExperimentConfig cfg;
    int ny = cfg.geom.ny, nz = cfg.geom.nz, m = cfg.geom.m;
    std::string section;
    std::string line;
    int line_no = 0;
    bool have_snr_list = false, have_k_list = false;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw config_error("malformed section header at line " +
                                   std::to_string(line_no));
            section = detail::trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("expected key = value at line " +
                               std::to_string(line_no));
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        const std::string full = section + "." + key;

        if (full == "geometry.profile") {
            if (val == "desk") {
                ny = 16; nz = 24; m = 6;
            } else if (val == "paper") {
                ny = 64; nz = 72; m = 12;
            } else {
                throw config_error("unknown geometry profile: " + val);
            }
        } else if (full == "geometry.ny") {
            ny = static_cast<int>(detail::parse_int(val, full));
        } else if (full == "geometry.nz") {
            nz = static_cast<int>(detail::parse_int(val, full));
        } else if (full == "geometry.m") {
            m = static_cast<int>(detail::parse_int(val, full));
        } else if (full == "prior.sin_lo") {
            cfg.prior.sin_lo = detail::parse_double(val, full);
        } else if (full == "prior.sin_hi") {
            cfg.prior.sin_hi = detail::parse_double(val, full);
        } else if (full == "beam.kinds" || full == "beam.kind") {
            cfg.beams.clear();
            for (const auto& item : detail::split_list(val))
                cfg.beams.push_back(parse_beam_kind(item));
        } else if (full == "beam.group_count") {
            cfg.group_count = static_cast<int>(detail::parse_int(val, full));
        } else if (full == "beam.pattern_file") {
            cfg.pattern_file = val;
        } else if (full == "estimator.kinds" || full == "estimator.kind") {
            cfg.estimators.clear();
            for (const auto& item : detail::split_list(val))
                cfg.estimators.push_back(parse_estimator_kind(item));
        } else if (full == "sweep.axis") {
            if (val == "snr_db") cfg.axis = SweepAxis::snr_db;
            else if (val == "k_paths") cfg.axis = SweepAxis::k_paths;
            else throw config_error("unknown sweep axis: " + val);
        } else if (full == "sweep.snr_db") {
            cfg.snr_values.clear();
            for (const auto& item : detail::split_list(val))
                cfg.snr_values.push_back(detail::parse_double(item, full));
            have_snr_list = cfg.snr_values.size() > 1;
        } else if (full == "sweep.k_paths") {
            cfg.k_values.clear();
            for (const auto& item : detail::split_list(val))
                cfg.k_values.push_back(
                    static_cast<int>(detail::parse_int(item, full)));
            have_k_list = cfg.k_values.size() > 1;
        } else if (full == "sweep.trials") {
            cfg.trials = static_cast<int>(detail::parse_int(val, full));
        } else if (full == "sweep.base_seed") {
            cfg.base_seed = detail::parse_u64(val, full);
        } else if (full == "grid.l1") {
            cfg.grid_l1 = static_cast<int>(detail::parse_int(val, full));
        } else if (full == "grid.l2") {
            cfg.grid_l2 = static_cast<int>(detail::parse_int(val, full));
        } else if (full == "eda.population") {
            cfg.eda.q = static_cast<int>(detail::parse_int(val, full));
        } else if (full == "eda.elite") {
            cfg.eda.t = static_cast<int>(detail::parse_int(val, full));
        } else if (full == "eda.iterations") {
            cfg.eda.i_max = static_cast<int>(detail::parse_int(val, full));
        } else if (full == "eda.seed") {
            cfg.eda.seed = detail::parse_u64(val, full);
        } else if (full == "eda.srl_patterns") {
            cfg.srl_patterns = static_cast<int>(detail::parse_int(val, full));
        } else if (full == "eda.srl_slack") {
            cfg.srl_slack = detail::parse_double(val, full);
        } else if (full == "bench.reps") {
            cfg.bench_reps = static_cast<int>(detail::parse_int(val, full));
        } else if (full == "bench.warmups") {
            cfg.bench_warmups = static_cast<int>(detail::parse_int(val, full));
        } else if (full == "output.dir") {
            cfg.output_dir = val;
        } else {
            throw config_error("unknown config key: " + full);
        }
    }
    if (!(cfg.prior.sin_lo < cfg.prior.sin_hi))
        throw config_error("prior interval is empty");
    // A multi-valued list on the non-axis variable is almost certainly a
    // config mistake; the sweep would silently use only the first entry.
    if (cfg.axis == SweepAxis::snr_db && have_k_list)
        throw config_error("k_paths must be a single value when sweeping snr_db");
    if (cfg.axis == SweepAxis::k_paths && have_snr_list)
        throw config_error("snr_db must be a single value when sweeping k_paths");
    cfg.geom = UpaGeometry(ny, nz, m);
    cfg.validate();
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    return parse_config(in);
}

// ---------------------------------------------------------------------------
// Grouping-pattern CSV: one "column,group" row per antenna column.

inline void write_pattern_csv(std::ostream& os, const GroupingPattern& pattern) {
    os << "column,group\n";
    for (int iy = 0; iy < pattern.ny; ++iy)
        os << iy << ',' << pattern.group_of[static_cast<std::size_t>(iy)] << '\n';
}

inline GroupingPattern read_pattern_csv(std::istream& in, int ny, int g) {
    GroupingPattern pat(ny, g);
    std::string line;
    if (!std::getline(in, line) || detail::trim(line) != "column,group")
        throw config_error("pattern file header must be 'column,group'");
    int rows = 0;
    while (std::getline(in, line)) {
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw config_error("malformed pattern row: " + line);
        const int col = static_cast<int>(
            detail::parse_int(detail::trim(line.substr(0, comma)), "column"));
        const int grp = static_cast<int>(
            detail::parse_int(detail::trim(line.substr(comma + 1)), "group"));
        if (col < 0 || col >= ny)
            throw config_error("pattern column index out of range");
        if (grp < 0 || grp >= g)
            throw config_error("pattern group index out of range");
        pat.group_of[static_cast<std::size_t>(col)] = grp;
        ++rows;
    }
    if (rows != ny)
        throw config_error("pattern file must assign every antenna column");
    return pat;
}

inline GroupingPattern load_pattern_csv(const std::string& path, int ny, int g) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open pattern file: " + path);
    return read_pattern_csv(in, ny, g);
}

// ---------------------------------------------------------------------------
// Beam construction per configured kind. The random baseline derives its
// phases from the base seed so a config reproduces the same beam bit for bit.

inline AnalogBeamMatrix make_beam(BeamKind kind, const ExperimentConfig& cfg) {
    const SubIntervalPartition part = make_partition(cfg.prior, cfg.group_count);
    switch (kind) {
    case BeamKind::group_wise_opt:
        if (cfg.pattern_file.empty())
            throw config_error("group-wise-opt beam requires a pattern file");
        return build_group_beam_matrix(
            part, load_pattern_csv(cfg.pattern_file, cfg.geom.ny, cfg.group_count),
            cfg.geom);
    case BeamKind::group_wise_uniform:
        return build_group_beam_matrix(
            part, uniform_pattern(cfg.geom.ny, cfg.group_count), cfg.geom);
    case BeamKind::random_phases:
        return random_beam_matrix(cfg.geom,
                                  derive_seed(cfg.base_seed, {0x6265616dULL}));
    default:
        return wide_beam_matrix(cfg.prior, cfg.geom);
    }
}

// ---------------------------------------------------------------------------
// Monte-Carlo sweep

struct SweepPoint {
    double snr_db = 0.0;
    int k_paths = 0;
};

inline std::vector<SweepPoint> sweep_points(const ExperimentConfig& cfg) {
    std::vector<SweepPoint> pts;
    if (cfg.axis == SweepAxis::snr_db) {
        for (double s : cfg.snr_values) pts.push_back({s, cfg.k_values.front()});
    } else {
        for (int k : cfg.k_values) pts.push_back({cfg.snr_values.front(), k});
    }
    return pts;
}

struct ResultRow {
    int trial = 0;
    std::uint64_t seed = 0; // channel seed of the paired (point, trial) cell
    std::string estimator;
    std::string beam;
    double snr_db = 0.0;
    int k_paths = 0;
    double nmse = 0.0;
    double wall_time_ms = 0.0;
    int support_size = 0;
    std::uint64_t channel_hash = 0;
};

// Noise variance from the per-antenna average channel power and the SNR.
inline double noise_var_for(const VectorXcd& h, int n_antennas, double snr_db) {
    return h.squaredNorm() /
           (static_cast<double>(n_antennas) * std::pow(10.0, snr_db / 10.0));
}

inline EstimateResult run_estimator(EstimatorKind kind, const VectorXcd& y,
                                    const AnalogBeamMatrix& fa,
                                    const DynamicGrid& grid, int k_paths,
                                    double noise_var) {
    if (kind == EstimatorKind::omp) return omp_estimate(y, fa, grid, k_paths);
    SparsePriorConfig pr = default_prior(k_paths, grid.size());
    ScvbiEngineConfig ec;
    ec.k_expected = k_paths;
    ec.noise_var = noise_var;
    return kind == EstimatorKind::gw_scvbi ? gw_scvbi(y, fa, grid, pr, ec)
                                           : scvbi_full(y, fa, grid, pr, ec);
}

// The measured wall times stay in the returned rows; the CSV written by
// run_sweep carries only the deterministic fields so that a rerun of the
// same config is byte identical. Timing reports come from run_bench.
inline void write_results_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
    os << "trial,seed,estimator,beam,snr_db,k_paths,nmse,support_size,"
          "channel_hash\n";
    char buf[64];
    for (const auto& r : rows) {
        os << r.trial << ',' << r.seed << ',' << r.estimator << ',' << r.beam
           << ',';
        std::snprintf(buf, sizeof buf, "%g", r.snr_db);
        os << buf << ',' << r.k_paths << ',';
        std::snprintf(buf, sizeof buf, "%.12e", r.nmse);
        os << buf << ',' << r.support_size << ',' << r.channel_hash << '\n';
    }
}

// Paired Monte-Carlo sweep. Per (point, trial) cell one channel and one
// noise realization are drawn and shared by every beam x estimator combo;
// an estimator failure is recorded as a NaN row and the sweep continues.
inline std::vector<ResultRow> run_sweep(const ExperimentConfig& cfg) {
    cfg.validate();
    const std::vector<SweepPoint> pts = sweep_points(cfg);
    const SubIntervalPartition part = make_partition(cfg.prior, cfg.group_count);
    const DynamicGrid grid = build_grid(cfg.l1(), cfg.l2(), cfg.prior, part);

    std::vector<AnalogBeamMatrix> beams;
    beams.reserve(cfg.beams.size());
    for (BeamKind kind : cfg.beams) beams.push_back(make_beam(kind, cfg));

    const std::size_t combos = cfg.beams.size() * cfg.estimators.size();
    const std::size_t per_point = static_cast<std::size_t>(cfg.trials) * combos;
    std::vector<ResultRow> rows(pts.size() * per_point);

    for (std::size_t pi = 0; pi < pts.size(); ++pi) {
        const SweepPoint& pt = pts[pi];
        parallel_for(static_cast<std::size_t>(cfg.trials), [&](std::size_t tr) {
            const std::uint64_t cseed = derive_seed(
                cfg.base_seed, {static_cast<std::uint64_t>(pi), tr, 0});
            const std::uint64_t nseed = derive_seed(
                cfg.base_seed, {static_cast<std::uint64_t>(pi), tr, 1});
            const ChannelRealization ch =
                sample_channel(pt.k_paths, cfg.prior, {-1.0, 1.0}, GainProfile{},
                               cfg.geom, cseed);
            const std::uint64_t chash = channel_hash(ch);
            const double sig2 = noise_var_for(ch.h, cfg.geom.nr(), pt.snr_db);
            std::size_t slot = pi * per_point + tr * combos;
            for (std::size_t bi = 0; bi < beams.size(); ++bi) {
                const VectorXcd y = received_signal(beams[bi], ch.h, sig2, nseed);
                for (std::size_t ei = 0; ei < cfg.estimators.size(); ++ei) {
                    ResultRow& row = rows[slot++];
                    row.trial = static_cast<int>(tr);
                    row.seed = cseed;
                    row.estimator = to_string(cfg.estimators[ei]);
                    row.beam = to_string(cfg.beams[bi]);
                    row.snr_db = pt.snr_db;
                    row.k_paths = pt.k_paths;
                    row.channel_hash = chash;
                    const auto t0 = std::chrono::steady_clock::now();
                    try {
                        const EstimateResult est =
                            run_estimator(cfg.estimators[ei], y, beams[bi], grid,
                                          pt.k_paths, sig2);
                        row.nmse = nmse(est.h_hat, ch.h);
                        row.support_size = est.support_size;
                    } catch (const std::exception&) {
                        row.nmse = std::numeric_limits<double>::quiet_NaN();
                        row.support_size = 0;
                    }
                    const std::chrono::duration<double, std::milli> dt =
                        std::chrono::steady_clock::now() - t0;
                    row.wall_time_ms = std::max(dt.count(), 1e-6);
                }
            }
        });
    }
    return rows;
}

inline void write_sweep_csv(const ExperimentConfig& cfg, const std::string& path) {
    const std::vector<ResultRow> rows = run_sweep(cfg);
    std::ofstream os(path, std::ios::binary);
    if (!os) throw config_error("cannot open output file: " + path);
    write_results_csv(os, rows);
}

// ---------------------------------------------------------------------------
// Benchmark: median wall time per estimator on one shared scenario, with
// ratios against the unpartitioned estimator.

struct BenchEntry {
    EstimatorKind kind = EstimatorKind::scvbi;
    double median_ms = 0.0;
    double ratio_vs_scvbi = 1.0;
};

struct BenchReport {
    std::vector<BenchEntry> entries;
    int reps = 0;
    int warmups = 0;
};

inline BenchReport run_bench(const ExperimentConfig& cfg) {
    cfg.validate();
    std::vector<EstimatorKind> kinds = cfg.estimators;
    if (std::find(kinds.begin(), kinds.end(), EstimatorKind::scvbi) == kinds.end())
        kinds.push_back(EstimatorKind::scvbi); // ratio reference
    const SubIntervalPartition part = make_partition(cfg.prior, cfg.group_count);
    const DynamicGrid grid = build_grid(cfg.l1(), cfg.l2(), cfg.prior, part);
    const AnalogBeamMatrix fa = make_beam(cfg.beams.front(), cfg);
    const SweepPoint pt = sweep_points(cfg).front();
    const ChannelRealization ch =
        sample_channel(pt.k_paths, cfg.prior, {-1.0, 1.0}, GainProfile{}, cfg.geom,
                       derive_seed(cfg.base_seed, {0, 0, 0}));
    const double sig2 = noise_var_for(ch.h, cfg.geom.nr(), pt.snr_db);
    const VectorXcd y =
        received_signal(fa, ch.h, sig2, derive_seed(cfg.base_seed, {0, 0, 1}));

    BenchReport report;
    report.reps = cfg.bench_reps;
    report.warmups = cfg.bench_warmups;
    double scvbi_ms = 0.0;
    for (EstimatorKind kind : kinds) {
        std::vector<double> times;
        times.reserve(static_cast<std::size_t>(cfg.bench_reps));
        for (int rep = 0; rep < cfg.bench_warmups + cfg.bench_reps; ++rep) {
            const auto t0 = std::chrono::steady_clock::now();
            run_estimator(kind, y, fa, grid, pt.k_paths, sig2);
            const std::chrono::duration<double, std::milli> dt =
                std::chrono::steady_clock::now() - t0;
            if (rep >= cfg.bench_warmups) times.push_back(dt.count());
        }
        std::sort(times.begin(), times.end());
        const std::size_t n = times.size();
        const double med = n % 2 ? times[n / 2]
                                 : 0.5 * (times[n / 2 - 1] + times[n / 2]);
        BenchEntry e;
        e.kind = kind;
        e.median_ms = med;
        report.entries.push_back(e);
        if (kind == EstimatorKind::scvbi) scvbi_ms = med;
    }
    for (BenchEntry& e : report.entries)
        e.ratio_vs_scvbi = e.median_ms / scvbi_ms;
    return report;
}

inline void write_bench_report(std::ostream& os, const BenchReport& report) {
    os << "estimator,median_ms,ratio_vs_scvbi\n";
    char buf[64];
    for (const auto& e : report.entries) {
        std::snprintf(buf, sizeof buf, "%.3f", e.median_ms);
        os << to_string(e.kind) << ',' << buf << ',';
        std::snprintf(buf, sizeof buf, "%.4f", e.ratio_vs_scvbi);
        os << buf << '\n';
    }
}

// ---------------------------------------------------------------------------
// Plot-data exports

// Vertical ambiguity vs candidate elevation. For a grouped beam one column
// per group is emitted, each normalized so the response at that group's own
// center elevation is exactly 1; ungrouped beams get a single column against
// the prior center. Columns: phi1_sin, af_<name>...
inline void export_vertical_af(std::ostream& os, const AnalogBeamMatrix& fa,
                               const VerticalPrior& prior, double theta0,
                               int n_points = 129) {
    if (n_points < 2) throw config_error("curve needs at least two points");
    std::vector<double> centers;
    std::vector<std::string> names;
    if (fa.grouped) {
        for (int g = 0; g < fa.partition.g; ++g) {
            centers.push_back(fa.partition.centers[static_cast<std::size_t>(g)]);
            names.push_back("af_g" + std::to_string(g));
        }
    } else {
        centers.push_back(prior.center());
        names.push_back("af");
    }
    std::vector<double> main_lobe(centers.size());
    for (std::size_t g = 0; g < centers.size(); ++g) {
        const double phi2 = std::asin(centers[g]);
        main_lobe[g] = std::abs(vertical_af(fa, theta0, phi2, phi2));
        if (!(main_lobe[g] > 0.0))
            throw config_error("vanishing main lobe; cannot normalize");
    }
    os << "phi1_sin";
    for (const auto& n : names) os << ',' << n;
    os << '\n';
    char buf[64];
    for (int i = 0; i < n_points; ++i) {
        const double v = prior.sin_lo +
                         (prior.sin_hi - prior.sin_lo) * i / (n_points - 1);
        std::snprintf(buf, sizeof buf, "%.9f", v);
        os << buf;
        for (std::size_t g = 0; g < centers.size(); ++g) {
            const double af = std::abs(vertical_af(fa, theta0, std::asin(v),
                                                   std::asin(centers[g]))) /
                              main_lobe[g];
            std::snprintf(buf, sizeof buf, "%.9e", af);
            os << ',' << buf;
        }
        os << '\n';
    }
}

// Horizontal ambiguity vs sin-domain offset for each group of a pattern,
// normalized to unit main lobe at zero offset. Columns: delta, af_g<g>...
inline void export_horizontal_af(std::ostream& os, const GroupingPattern& pattern,
                                 const SubIntervalPartition& part,
                                 int n_points = 201) {
    if (n_points < 2) throw config_error("curve needs at least two points");
    if (pattern.g != part.g)
        throw dimension_error("pattern group count does not match partition");
    std::vector<std::vector<int>> masks(static_cast<std::size_t>(pattern.g));
    for (int g = 0; g < pattern.g; ++g) {
        auto& s = masks[static_cast<std::size_t>(g)];
        s.assign(static_cast<std::size_t>(pattern.ny), 0);
        for (int c : pattern.columns_of(g)) s[static_cast<std::size_t>(c)] = 1;
        if (pattern.count(g) == 0)
            throw config_error("empty group in pattern; no main lobe");
    }
    os << "delta";
    for (int g = 0; g < pattern.g; ++g) os << ",af_g" << g;
    os << '\n';
    char buf[64];
    for (int i = 0; i < n_points; ++i) {
        const double delta = -1.0 + 2.0 * i / (n_points - 1);
        std::snprintf(buf, sizeof buf, "%.9f", delta);
        os << buf;
        for (int g = 0; g < pattern.g; ++g) {
            const double phi_g =
                std::asin(part.centers[static_cast<std::size_t>(g)]);
            const double af =
                std::abs(horizontal_af(masks[static_cast<std::size_t>(g)], delta,
                                       phi_g, 1.0)) /
                pattern.count(g);
            std::snprintf(buf, sizeof buf, "%.9e", af);
            os << ',' << buf;
        }
        os << '\n';
    }
}

// Best-fitness trace of an optimization run, exported row for row.
inline void export_isl_trace(std::ostream& os, const std::vector<double>& trace) {
    os << "iteration,best_fitness\n";
    char buf[64];
    for (std::size_t i = 0; i < trace.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.12e", trace[i]);
        os << i << ',' << buf << '\n';
    }
}

// ---------------------------------------------------------------------------
// Antenna-grouping optimization wired from a config: kernels and the
// information-matrix setup per group, feasibility bounds calibrated from
// random patterns, then the evolutionary search itself.

struct OptimizeOutcome {
    EdaResult result;
    std::vector<double> srl_bounds;
};

inline OptimizeOutcome optimize_grouping(const ExperimentConfig& cfg) {
    cfg.validate();
    const SubIntervalPartition part = make_partition(cfg.prior, cfg.group_count);
    std::vector<IslKernel> kernels;
    kernels.reserve(static_cast<std::size_t>(part.g));
    for (int g = 0; g < part.g; ++g)
        kernels.push_back(make_isl_kernel(
            std::asin(part.centers[static_cast<std::size_t>(g)]), cfg.geom.ny,
            default_region(cfg.geom.ny)));
    PatternEvaluator eval(std::move(kernels), make_fim_setup(part, cfg.geom));
    OptimizeOutcome out;
    out.srl_bounds = calibrate_srl_bounds(eval, cfg.geom.ny, cfg.srl_patterns,
                                          cfg.srl_slack,
                                          derive_seed(cfg.eda.seed, {0xca1b}));
    EdaConfig ec = cfg.eda;
    ec.srl_bounds = out.srl_bounds;
    out.result = run_eda(ec, eval, cfg.geom.ny);
    return out;
}

} // namespace gwbeam

#endif // GWBEAM_EXPERIMENT_HPP
