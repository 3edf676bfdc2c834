// SPDX-License-Identifier: Apache-2.0
//
// Analog beam construction for partially-connected hybrid arrays: vertical
// sub-interval partitions, antenna-column grouping patterns, and the three
// beam matrix kinds (group-wise narrow, wide, random). Also the noisy
// observation synthesis y = F_a h + w, which consumes these matrices.

#ifndef GWBEAM_BEAMS_HPP
#define GWBEAM_BEAMS_HPP

#include <cstdio>
#include <fstream>
#include <sstream>

#include "gwbeam/array.hpp"

namespace gwbeam {

struct SubIntervalPartition {
    int g = 0;
    std::vector<double> edges;   // g+1 ascending sin-domain breakpoints
    std::vector<double> centers; // midpoint of each sub-interval
};

inline SubIntervalPartition make_partition(const VerticalPrior& prior, int g) {
    if (g < 1) throw config_error("partition needs at least one sub-interval");
    SubIntervalPartition p;
    p.g = g;
    p.edges.resize(g + 1);
    p.centers.resize(g);
    const double span = prior.sin_hi - prior.sin_lo;
    for (int i = 0; i <= g; ++i) p.edges[i] = prior.sin_lo + span * i / g;
    for (int i = 0; i < g; ++i) p.centers[i] = 0.5 * (p.edges[i] + p.edges[i + 1]);
    return p;
}

// Assignment of the N_y antenna columns to at most one group each.
// group_of[iy] is the group index, or -1 for an unassigned column.
struct GroupingPattern {
    int ny = 0;
    int g = 0;
    std::vector<int> group_of;

    GroupingPattern() = default;
    GroupingPattern(int ny_, int g_) : ny(ny_), g(g_), group_of(ny_, -1) {}

    int count(int grp) const {
        int c = 0;
        for (int v : group_of) c += (v == grp);
        return c;
    }

    bool all_groups_nonempty() const {
        for (int grp = 0; grp < g; ++grp)
            if (count(grp) == 0) return false;
        return true;
    }

    // Column indicator of one group packed into a word (memoization key).
    std::uint64_t column_mask(int grp) const {
        if (ny > 64) throw dimension_error("column_mask requires ny <= 64");
        std::uint64_t m = 0;
        for (int i = 0; i < ny; ++i)
            if (group_of[i] == grp) m |= (1ULL << i);
        return m;
    }

    std::vector<int> columns_of(int grp) const {
        std::vector<int> c;
        for (int i = 0; i < ny; ++i)
            if (group_of[i] == grp) c.push_back(i);
        return c;
    }
};

// Contiguous blocks of columns, one block per group; the layout used by
// vertical-only experiments and as the unoptimized reference pattern.
inline GroupingPattern uniform_pattern(int ny, int g) {
    if (ny % g != 0)
        throw config_error("uniform pattern needs the group count to divide ny");
    GroupingPattern p(ny, g);
    const int per = ny / g;
    for (int i = 0; i < ny; ++i) p.group_of[i] = i / per;
    return p;
}

// Constant-modulus compression vector whose response peaks at center_sin.
inline VectorXcd narrow_beam(double center_sin, int m) {
    return steering_z(center_sin, m).conjugate();
}

// Block-diagonal analog beam matrix. Row k holds the compression vector of
// RF chain k, acting on antennas [k*M, (k+1)*M). Column iy of the array owns
// chains iy*T .. iy*T+T-1.
struct AnalogBeamMatrix {
    UpaGeometry geom;
    MatrixXcd comp;           // N_RF x M
    std::vector<bool> active; // false for chains of unassigned columns

    bool grouped = false;
    SubIntervalPartition partition;
    GroupingPattern pattern;

    VectorXcd apply(const VectorXcd& h) const {
        if (h.size() != geom.nr())
            throw dimension_error("beam apply: channel length mismatch");
        const int nrf = geom.nrf(), m = geom.m;
        VectorXcd y(nrf);
        for (int k = 0; k < nrf; ++k) {
            cd acc(0.0, 0.0);
            if (active[k])
                for (int i = 0; i < m; ++i) acc += comp(k, i) * h[k * m + i];
            y[k] = acc;
        }
        return y;
    }

    // Rows of F_a h restricted to a chain subset, without forming the rest.
    VectorXcd apply_rows(const VectorXcd& h, const std::vector<int>& rows) const {
        if (h.size() != geom.nr())
            throw dimension_error("beam apply: channel length mismatch");
        const int m = geom.m;
        VectorXcd y(static_cast<Eigen::Index>(rows.size()));
        for (std::size_t j = 0; j < rows.size(); ++j) {
            const int k = rows[j];
            cd acc(0.0, 0.0);
            if (active[k])
                for (int i = 0; i < m; ++i) acc += comp(k, i) * h[k * m + i];
            y[static_cast<Eigen::Index>(j)] = acc;
        }
        return y;
    }

    MatrixXcd dense() const {
        MatrixXcd f = MatrixXcd::Zero(geom.nrf(), geom.nr());
        for (int k = 0; k < geom.nrf(); ++k)
            if (active[k])
                for (int i = 0; i < geom.m; ++i) f(k, k * geom.m + i) = comp(k, i);
        return f;
    }

    // Chains belonging to the columns assigned to group grp.
    std::vector<int> rows_for_group(int grp) const {
        if (!grouped) throw dimension_error("beam matrix has no group structure");
        std::vector<int> rows;
        const int t = geom.t();
        for (int iy = 0; iy < geom.ny; ++iy)
            if (pattern.group_of[iy] == grp)
                for (int j = 0; j < t; ++j) rows.push_back(iy * t + j);
        return rows;
    }
};

inline AnalogBeamMatrix build_group_beam_matrix(const SubIntervalPartition& part,
                                                const GroupingPattern& pattern,
                                                const UpaGeometry& geom) {
    if (pattern.g != part.g)
        throw dimension_error("pattern group count does not match partition");
    if (pattern.ny != geom.ny)
        throw dimension_error("pattern row count does not match geometry");
    AnalogBeamMatrix f;
    f.geom = geom;
    f.comp = MatrixXcd::Zero(geom.nrf(), geom.m);
    f.active.assign(geom.nrf(), false);
    f.grouped = true;
    f.partition = part;
    f.pattern = pattern;
    const int t = geom.t();
    std::vector<VectorXcd> beams(part.g);
    for (int grp = 0; grp < part.g; ++grp)
        beams[grp] = narrow_beam(part.centers[grp], geom.m);
    for (int iy = 0; iy < geom.ny; ++iy) {
        const int grp = pattern.group_of[iy];
        if (grp < 0) continue;
        for (int j = 0; j < t; ++j) {
            f.comp.row(iy * t + j) = beams[grp].transpose();
            f.active[iy * t + j] = true;
        }
    }
    return f;
}

inline AnalogBeamMatrix wide_beam_matrix(const VerticalPrior& prior,
                                         const UpaGeometry& geom) {
    AnalogBeamMatrix f;
    f.geom = geom;
    f.comp.resize(geom.nrf(), geom.m);
    f.active.assign(geom.nrf(), true);
    VectorXcd b = narrow_beam(prior.center(), geom.m);
    for (int k = 0; k < geom.nrf(); ++k) f.comp.row(k) = b.transpose();
    return f;
}

inline AnalogBeamMatrix random_beam_matrix(const UpaGeometry& geom,
                                           std::uint64_t seed) {
    AnalogBeamMatrix f;
    f.geom = geom;
    f.comp.resize(geom.nrf(), geom.m);
    f.active.assign(geom.nrf(), true);
    Rng rng(seed);
    for (int k = 0; k < geom.nrf(); ++k)
        for (int i = 0; i < geom.m; ++i) f.comp(k, i) = rng.phase();
    return f;
}

// y = F_a h + w with circular complex Gaussian noise of per-entry variance
// noise_var. Zero variance gives the exact product.
inline VectorXcd received_signal(const AnalogBeamMatrix& f_a, const VectorXcd& h,
                                 double noise_var, std::uint64_t seed) {
    if (noise_var < 0.0) throw config_error("noise variance must be >= 0");
    VectorXcd y = f_a.apply(h);
    if (noise_var > 0.0) {
        Rng rng(seed);
        const double s = std::sqrt(noise_var);
        for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += s * rng.cnormal();
    }
    return y;
}

// ---------------------------------------------------------------------------
// CSV fixtures

// Beam matrices: nonzero entries as row,col,re,im.
inline void write_beam_csv(const AnalogBeamMatrix& f, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw config_error("cannot open " + path + " for writing");
    out << "row,col,re,im\n";
    char buf[160];
    for (int k = 0; k < f.geom.nrf(); ++k) {
        if (!f.active[k]) continue;
        for (int i = 0; i < f.geom.m; ++i) {
            std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g\n", k,
                          k * f.geom.m + i, f.comp(k, i).real(), f.comp(k, i).imag());
            out << buf;
        }
    }
}

// Patterns: '#'-prefixed header lines, then one 0/1 row per antenna column.
inline void write_pattern_csv(const GroupingPattern& p, const std::string& path,
                              const std::string& header_note = "") {
    std::ofstream out(path);
    if (!out) throw config_error("cannot open " + path + " for writing");
    if (!header_note.empty()) out << "# " << header_note << "\n";
    out << "# ny=" << p.ny << " groups=" << p.g << "\n";
    for (int i = 0; i < p.ny; ++i) {
        for (int grp = 0; grp < p.g; ++grp) {
            out << (p.group_of[i] == grp ? 1 : 0);
            out << (grp + 1 < p.g ? ',' : '\n');
        }
    }
}

inline GroupingPattern read_pattern_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open " + path);
    std::vector<std::vector<int>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<int> row;
        std::istringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) row.push_back(std::stoi(tok));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw config_error("empty pattern file: " + path);
    GroupingPattern p(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows[0].size())
            throw config_error("ragged pattern file: " + path);
        int sum = 0;
        for (std::size_t grp = 0; grp < rows[i].size(); ++grp) {
            sum += rows[i][grp];
            if (rows[i][grp] == 1) p.group_of[i] = static_cast<int>(grp);
        }
        if (sum > 1) throw config_error("pattern row assigns multiple groups");
    }
    return p;
}

} // namespace gwbeam

#endif // GWBEAM_BEAMS_HPP
