// SPDX-License-Identifier: Apache-2.0
//
// UPA geometry, steering vectors, synthetic multipath channels and noisy
// RF-chain observations.
//
// Conventions used throughout the library:
//   - the array lies in the yz plane with half-wavelength spacing;
//   - antenna (n_y, n_z) maps to flat index n_y * N_z + n_z;
//   - angles are carried in the sin domain where possible, u = sin(theta)
//     for azimuth and v = sin(phi) for elevation, so the y-axis steering
//     phase is pi * n * u * sqrt(1 - v^2) and the z-axis phase is pi * n * v.

#ifndef GWBEAM_ARRAY_HPP
#define GWBEAM_ARRAY_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gwbeam/common.hpp"

namespace gwbeam {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

struct UpaGeometry {
    int ny = 0; // horizontal antenna columns
    int nz = 0; // vertical antennas per column
    int m = 0;  // subarray size per RF chain

    UpaGeometry() = default;
    UpaGeometry(int ny_, int nz_, int m_) : ny(ny_), nz(nz_), m(m_) {
        if (ny < 1 || nz < 1 || m < 1)
            throw config_error("UPA geometry counts must be >= 1");
        if (nz % m != 0)
            throw config_error("subarray size must divide the column length");
    }

    int nr() const { return ny * nz; }
    int nrf() const { return nr() / m; }
    int t() const { return nz / m; } // RF chains per column
};

struct VerticalPrior {
    double sin_lo = -0.5;
    double sin_hi = 0.0;

    VerticalPrior() = default;
    VerticalPrior(double lo, double hi) : sin_lo(lo), sin_hi(hi) {
        if (!(lo >= -1.0 && lo < hi && hi <= 1.0))
            throw config_error("vertical prior must satisfy -1 <= lo < hi <= 1");
    }

    double center() const { return 0.5 * (sin_lo + sin_hi); }
};

// Both builders sit on the estimators' hot path, so they advance a unit
// phasor instead of calling trig per element; the accumulated drift is
// O(n * eps), orders of magnitude below any tolerance used downstream.
inline VectorXcd steering_y(double sin_theta, double cos_phi, int n) {
    if (n < 1) throw dimension_error("steering_y: need at least one element");
    if (std::abs(sin_theta) > 1.0 + 1e-12 || cos_phi < -1e-12 || cos_phi > 1.0 + 1e-12)
        throw dimension_error("steering_y: arguments outside the sin domain");
    VectorXcd a(n);
    const cd w = std::polar(1.0, kPi * sin_theta * cos_phi);
    cd p(1.0, 0.0);
    for (int k = 0; k < n; ++k) {
        a[k] = p;
        p *= w;
    }
    return a;
}

inline VectorXcd steering_z(double sin_phi, int n) {
    if (n < 1) throw dimension_error("steering_z: need at least one element");
    if (std::abs(sin_phi) > 1.0 + 1e-12)
        throw dimension_error("steering_z: argument outside the sin domain");
    VectorXcd a(n);
    const cd w = std::polar(1.0, kPi * sin_phi);
    cd p(1.0, 0.0);
    for (int k = 0; k < n; ++k) {
        a[k] = p;
        p *= w;
    }
    return a;
}

// Array response at sin-domain coordinates (u = sin theta, v = sin phi).
inline VectorXcd array_response_uv(double u, double v, const UpaGeometry& g) {
    const double c = std::sqrt(std::max(0.0, 1.0 - v * v));
    VectorXcd ay = steering_y(u, c, g.ny);
    VectorXcd az = steering_z(v, g.nz);
    VectorXcd a(g.nr());
    for (int iy = 0; iy < g.ny; ++iy)
        a.segment(iy * g.nz, g.nz) = ay[iy] * az;
    return a;
}

inline VectorXcd array_response(double theta, double phi, const UpaGeometry& g) {
    return array_response_uv(std::sin(theta), std::sin(phi), g);
}

struct PathParams {
    cd gain;
    double azimuth = 0.0;   // radians
    double elevation = 0.0; // radians
};

struct ChannelRealization {
    std::vector<PathParams> paths;
    VectorXcd h;
};

struct GainProfile {
    double los_mag = 1.0;          // magnitude of the first (LOS) path
    double nlos_total_power = 1.0; // total power spread over the other paths
};

// Synthetic geometric channel: one unit-magnitude LOS path with random phase
// plus k-1 weaker Gaussian paths, elevations limited to the prior interval.
inline ChannelRealization sample_channel(int k_paths, const VerticalPrior& prior,
                                         std::pair<double, double> azimuth_sin_range,
                                         const GainProfile& gains,
                                         const UpaGeometry& geom,
                                         std::uint64_t seed) {
    if (k_paths < 1) throw config_error("sample_channel: need at least one path");
    if (!(azimuth_sin_range.first < azimuth_sin_range.second))
        throw config_error("sample_channel: empty azimuth range");
    Rng rng(seed);
    ChannelRealization out;
    out.paths.resize(k_paths);
    const double nlos_scale =
        k_paths > 1 ? std::sqrt(gains.nlos_total_power / (k_paths - 1)) : 0.0;
    for (int k = 0; k < k_paths; ++k) {
        double u = rng.uniform(azimuth_sin_range.first, azimuth_sin_range.second);
        double v = rng.uniform(prior.sin_lo, prior.sin_hi);
        cd a = (k == 0) ? gains.los_mag * rng.phase() : nlos_scale * rng.cnormal();
        out.paths[k] = PathParams{a, std::asin(u), std::asin(v)};
    }
    out.h = VectorXcd::Zero(geom.nr());
    for (const auto& p : out.paths)
        out.h += p.gain * array_response(p.azimuth, p.elevation, geom);
    return out;
}

inline std::uint64_t channel_hash(const ChannelRealization& ch) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& p : ch.paths) {
        double vals[4] = {p.gain.real(), p.gain.imag(), p.azimuth, p.elevation};
        h = hash_doubles(vals, 4, h);
    }
    return h;
}

// ---------------------------------------------------------------------------
// Channel CSV fixtures: path,gain_re,gain_im,azimuth,elevation

inline void write_channel_csv(const ChannelRealization& ch, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw config_error("cannot open " + path + " for writing");
    f << "path,gain_re,gain_im,azimuth,elevation\n";
    char buf[256];
    for (std::size_t i = 0; i < ch.paths.size(); ++i) {
        const auto& p = ch.paths[i];
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g\n", i,
                      p.gain.real(), p.gain.imag(), p.azimuth, p.elevation);
        f << buf;
    }
}

inline ChannelRealization read_channel_csv(const std::string& path,
                                           const UpaGeometry& geom) {
    std::ifstream f(path);
    if (!f) throw config_error("cannot open " + path);
    std::string line;
    std::getline(f, line); // header
    ChannelRealization out;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string tok;
        double vals[5];
        for (int i = 0; i < 5; ++i) {
            if (!std::getline(ss, tok, ',')) throw config_error("bad channel row");
            vals[i] = std::stod(tok);
        }
        out.paths.push_back(PathParams{cd(vals[1], vals[2]), vals[3], vals[4]});
    }
    out.h = VectorXcd::Zero(geom.nr());
    for (const auto& p : out.paths)
        out.h += p.gain * array_response(p.azimuth, p.elevation, geom);
    return out;
}

} // namespace gwbeam

#endif // GWBEAM_ARRAY_HPP
