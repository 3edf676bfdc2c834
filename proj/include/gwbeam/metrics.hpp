// SPDX-License-Identifier: Apache-2.0
//
// Ambiguity metrics for grouped analog beams: vertical and horizontal
// ambiguity functions, integrated sidelobe level via its Toeplitz closed
// form, the 6x6 Fisher information matrix of the two-source horizontal
// model, and the statistical resolution limit fixed point.

#ifndef GWBEAM_METRICS_HPP
#define GWBEAM_METRICS_HPP

#include <Eigen/Eigenvalues>

#include "gwbeam/beams.hpp"

namespace gwbeam {

// chi(phi1, phi2) = (F_a a_R(theta0, phi1))^H (F_a a_R(theta0, phi2))
inline cd vertical_af(const AnalogBeamMatrix& f_a, double theta0, double phi1,
                      double phi2) {
    VectorXcd c1 = f_a.apply(array_response(theta0, phi1, f_a.geom));
    VectorXcd c2 = f_a.apply(array_response(theta0, phi2, f_a.geom));
    return c1.dot(c2);
}

// Sin-domain offsets bounding the horizontal sidelobe region
// [-b, -a] U [a, b].
struct SidelobeRegion {
    double a;
    double b;

    SidelobeRegion(double a_, double b_) : a(a_), b(b_) {
        if (!(0.0 < a && a < b && b <= 2.0))
            throw config_error("sidelobe region needs 0 < a < b <= 2");
    }

    double measure() const { return 2.0 * (b - a); }
};

// First Dirichlet null of the full aperture marks the main-lobe edge.
inline SidelobeRegion default_region(int ny) {
    return SidelobeRegion(4.0 / ny, 1.0);
}

// First column of the Toeplitz sidelobe-energy matrix:
//   f[n] = integral of e^{j pi n cos(phi_g) d} over the region
//        = 2 (sin(n pi c b) - sin(n pi c a)) / (n pi c),   f[0] = 2(b - a).
struct IslKernel {
    double phi_g;
    SidelobeRegion region;
    std::vector<double> f;
};

inline IslKernel make_isl_kernel(double phi_g, int ny, const SidelobeRegion& region) {
    IslKernel k{phi_g, region, std::vector<double>(static_cast<std::size_t>(ny))};
    const double c = std::cos(phi_g);
    k.f[0] = 2.0 * (region.b - region.a);
    for (int n = 1; n < ny; ++n) {
        const double w = n * kPi * c;
        if (std::abs(w) < 1e-14)
            k.f[static_cast<std::size_t>(n)] = 2.0 * (region.b - region.a);
        else
            k.f[static_cast<std::size_t>(n)] =
                2.0 * (std::sin(w * region.b) - std::sin(w * region.a)) / w;
    }
    return k;
}

// Sidelobe energy fraction for the columns assigned to one group:
// s^T V s / (|R_s| (s^T 1)^2), with V the Toeplitz matrix over f.
inline double isl_columns(const std::vector<int>& cols, const IslKernel& kernel) {
    if (cols.empty()) throw dimension_error("isl of an empty group");
    double quad = 0.0;
    for (std::size_t i = 0; i < cols.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j)
            quad += kernel.f[static_cast<std::size_t>(std::abs(cols[i] - cols[j]))];
    const double k = static_cast<double>(cols.size());
    return quad / (kernel.region.measure() * k * k);
}

inline double isl(const std::vector<int>& s_g, const IslKernel& kernel) {
    std::vector<int> cols;
    for (std::size_t n = 0; n < s_g.size(); ++n)
        if (s_g[n]) cols.push_back(static_cast<int>(n));
    return isl_columns(cols, kernel);
}

// chi_g(delta) = m_energy * sum_n s_g[n] e^{j pi n delta cos(phi_g)}
inline cd horizontal_af(const std::vector<int>& s_g, double delta, double phi_g,
                        double m_energy) {
    if (std::abs(delta) > 2.0)
        throw config_error("horizontal offset outside [-2, 2]");
    const double c = std::cos(phi_g);
    cd acc(0.0, 0.0);
    for (std::size_t n = 0; n < s_g.size(); ++n)
        if (s_g[n]) acc += std::polar(1.0, kPi * static_cast<double>(n) * delta * c);
    return m_energy * acc;
}

// Energy of one group's compressed response at elevation sin_phi: the T
// chains of a column contribute |beam . a_z|^2 each.
inline double group_beam_energy(const VectorXcd& beam, double sin_phi, int t) {
    VectorXcd az = steering_z(sin_phi, static_cast<int>(beam.size()));
    cd b(0.0, 0.0);
    for (Eigen::Index n = 0; n < beam.size(); ++n) b += beam[n] * az[n];
    return static_cast<double>(t) * std::norm(b);
}

using Matrix6d = Eigen::Matrix<double, 6, 6>;

// Two sources observed through one group beam. Parameter order:
// [sin_theta_1, sin_theta_2, alpha_1^R, alpha_2^R, alpha_1^I, alpha_2^I].
struct FimParams {
    std::vector<int> s_g;  // 0/1 over the antenna columns
    VectorXcd beam;        // length-M compression vector of the group
    double phi_g = 0.0;    // radians; sources share this elevation
    int t = 1;             // chains per column
    double sin_theta_1 = 0.0;
    double sin_theta_2 = 0.0;
    cd alpha_1{1.0, 0.0};
    cd alpha_2{1.0, 0.0};
    double noise_var = 1.0;
};

inline Matrix6d fim(const FimParams& p) {
    if (p.noise_var <= 0.0) throw config_error("fim needs noise_var > 0");
    int assigned = 0;
    for (int v : p.s_g) assigned += (v != 0);
    if (assigned == 0) throw dimension_error("fim of an empty group");

    const double c = std::cos(p.phi_g);
    const double e = group_beam_energy(p.beam, std::sin(p.phi_g), p.t);
    const std::size_t ny = p.s_g.size();

    // chi and its first two derivative sums over the assigned columns
    auto chi = [&](double d) {
        cd acc(0.0, 0.0);
        for (std::size_t n = 0; n < ny; ++n)
            if (p.s_g[n]) acc += std::polar(1.0, kPi * static_cast<double>(n) * d * c);
        return acc;
    };
    auto p1 = [&](double d) {
        cd acc(0.0, 0.0);
        for (std::size_t n = 0; n < ny; ++n)
            if (p.s_g[n])
                acc += cd(0.0, kPi * static_cast<double>(n) * c) *
                       std::polar(1.0, kPi * static_cast<double>(n) * d * c);
        return acc;
    };
    auto p2 = [&](double d) {
        cd acc(0.0, 0.0);
        for (std::size_t n = 0; n < ny; ++n)
            if (p.s_g[n]) {
                const double w = kPi * static_cast<double>(n) * c;
                acc += w * w * std::polar(1.0, w * d);
            }
        return acc;
    };

    const cd al[2] = {p.alpha_1, p.alpha_2};
    const double us[2] = {p.sin_theta_1, p.sin_theta_2};

    // <v_i, v_j> between derivative vectors of the mean observation
    auto ip = [&](int i, int j) -> cd {
        if (i < 2 && j < 2)
            return std::conj(al[i]) * al[j] * e * p2(us[j] - us[i]);
        if (i < 2) {
            const int k = (j - 2) % 2;
            cd base = -std::conj(al[i]) * e * p1(us[k] - us[i]);
            return j >= 4 ? base * cd(0.0, 1.0) : base;
        }
        if (j < 2) {
            const int k = (i - 2) % 2;
            cd base = al[j] * e * p1(us[j] - us[k]);
            return i >= 4 ? base * cd(0.0, -1.0) : base;
        }
        const int ki = (i - 2) % 2, kj = (j - 2) % 2;
        cd base = e * chi(us[kj] - us[ki]);
        if (i >= 4) base *= cd(0.0, -1.0);
        if (j >= 4) base *= cd(0.0, 1.0);
        return base;
    };

    Matrix6d j;
    for (int i = 0; i < 6; ++i)
        for (int k = 0; k < 6; ++k)
            j(i, k) = (2.0 / p.noise_var) * ip(i, k).real();
    return j;
}

// Variance lower bound of the separation sin_theta_2 - sin_theta_1:
// g^T J^{-1} g with g = [-1, 1, 0, 0, 0, 0].
inline double crb_delta(const Matrix6d& j, double cond_cap = 1e14) {
    Eigen::SelfAdjointEigenSolver<Matrix6d> es(j);
    const auto& w = es.eigenvalues();
    if (w[0] <= 0.0 || w[5] / std::max(w[0], 1e-300) > cond_cap)
        throw unresolvable_error("fim is singular or too ill-conditioned");
    Matrix6d ji = j.inverse();
    return ji(0, 0) + ji(1, 1) - ji(0, 1) - ji(1, 0);
}

// delta^2 - CRB(delta) for two unit-separation-symmetric sources; negative
// while the bound still exceeds the squared separation. Unresolvable
// configurations count as -inf.
inline double resolution_gap(const std::vector<int>& s_g, const VectorXcd& beam,
                             double phi_g, int t, cd alpha_1, cd alpha_2,
                             double noise_var, double d, double ref_sin = 0.0) {
    FimParams p;
    p.s_g = s_g;
    p.beam = beam;
    p.phi_g = phi_g;
    p.t = t;
    p.sin_theta_1 = ref_sin - 0.5 * d;
    p.sin_theta_2 = ref_sin + 0.5 * d;
    p.alpha_1 = alpha_1;
    p.alpha_2 = alpha_2;
    p.noise_var = noise_var;
    try {
        return d * d - crb_delta(fim(p));
    } catch (const unresolvable_error&) {
        return -std::numeric_limits<double>::infinity();
    }
}

// Smallest separation with delta^2 = CRB(delta), the separation at which
// the bound stops shrinking faster than the gap itself. Sources are placed
// symmetrically about ref_sin; bisection over [d_min, d_max].
inline double srl(const std::vector<int>& s_g, const VectorXcd& beam, double phi_g,
                  int t, cd alpha_1, cd alpha_2, double noise_var,
                  double d_min = 1e-4, double d_max = 1.0, double ref_sin = 0.0) {
    if (std::abs(alpha_1) == 0.0 || std::abs(alpha_2) == 0.0)
        throw config_error("srl needs nonzero gains");
    auto gap = [&](double d) {
        return resolution_gap(s_g, beam, phi_g, t, alpha_1, alpha_2, noise_var, d,
                              ref_sin);
    };
    double lo = d_min, hi = d_max;
    if (!(gap(lo) < 0.0 && gap(hi) > 0.0))
        throw srl_range_error("SRL outside search range");
    for (int it = 0; it < 100 && hi - lo > 1e-14; ++it) {
        const double mid = 0.5 * (lo + hi);
        (gap(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace gwbeam

#endif // GWBEAM_METRICS_HPP
