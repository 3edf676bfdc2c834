// SPDX-License-Identifier: Apache-2.0
//
// Angle-domain sparse channel estimation behind a partially-connected
// analog beam: compressed-sensing model assembly on a dynamic (theta, phi)
// grid, group decomposition, subspace-constrained variational Bayesian
// inference with gradient grid refinement, the group-wise two-stage
// estimator, its unpartitioned counterpart, and an OMP baseline.

#ifndef GWBEAM_ESTIMATOR_HPP
#define GWBEAM_ESTIMATOR_HPP

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "gwbeam/beams.hpp"

namespace gwbeam {

using Eigen::MatrixX2d;

// ---------------------------------------------------------------------------
// Dynamic dictionary grid
// ---------------------------------------------------------------------------

// Flat list of candidate (sin theta, sin phi) dictionary angles, u-major:
// point l = iu * l2 + iv. Cell-centered so every phi is interior to the
// elevation prior, and each point carries the label of the sub-interval
// containing its phi.
struct DynamicGrid {
    int l1 = 0;
    int l2 = 0;
    VectorXd theta;               // L sin-domain azimuth values
    VectorXd phi;                 // L sin-domain elevation values
    std::vector<int> group_index; // sub-interval label per point
    VectorXd u_axis;              // l1 distinct azimuth lattice values
    VectorXd v_axis;              // l2 distinct elevation lattice values
    double v_lo = 0.0;            // elevation prior bounds (refinement clamp)
    double v_hi = 0.0;

    int size() const { return l1 * l2; }

    MatrixX2d points() const {
        MatrixX2d p(size(), 2);
        p.col(0) = theta;
        p.col(1) = phi;
        return p;
    }
};

inline DynamicGrid build_grid(int l1, int l2, const VerticalPrior& prior,
                              const SubIntervalPartition& part) {
    if (l1 < 1 || l2 < 1) throw config_error("grid needs at least one point per axis");
    DynamicGrid grid;
    grid.l1 = l1;
    grid.l2 = l2;
    grid.v_lo = prior.sin_lo;
    grid.v_hi = prior.sin_hi;
    grid.u_axis.resize(l1);
    grid.v_axis.resize(l2);
    for (int i = 0; i < l1; ++i) grid.u_axis[i] = -1.0 + (i + 0.5) * 2.0 / l1;
    const double span = prior.sin_hi - prior.sin_lo;
    for (int i = 0; i < l2; ++i) grid.v_axis[i] = prior.sin_lo + (i + 0.5) * span / l2;
    const int l = l1 * l2;
    grid.theta.resize(l);
    grid.phi.resize(l);
    grid.group_index.resize(static_cast<std::size_t>(l));
    for (int iu = 0; iu < l1; ++iu) {
        for (int iv = 0; iv < l2; ++iv) {
            const int idx = iu * l2 + iv;
            grid.theta[idx] = grid.u_axis[iu];
            grid.phi[idx] = grid.v_axis[iv];
            const auto it = std::upper_bound(part.edges.begin(), part.edges.end(),
                                             grid.phi[idx]);
            int g = static_cast<int>(it - part.edges.begin()) - 1;
            g = std::clamp(g, 0, part.g - 1);
            grid.group_index[static_cast<std::size_t>(idx)] = g;
        }
    }
    return grid;
}

// ---------------------------------------------------------------------------
// Compressed observation model restricted to a row subset
// ---------------------------------------------------------------------------

// The analog beam is block-diagonal, so row k of F_a a_R(u, v) factors as
// a_y[iy] * sum_m comp(k, m) az[t*M + m] with k = iy*T + t. Columns and
// their (u, v) derivatives therefore cost O(N_y + N_z + M) per row instead
// of a dense N_r product.
class SubModel {
  public:
    SubModel(const AnalogBeamMatrix& f_a, std::vector<int> rows)
        : geom_(f_a.geom), rows_(std::move(rows)) {
        const int nrf = geom_.nrf(), t = geom_.t();
        comp_ = MatrixXcd::Zero(static_cast<Eigen::Index>(rows_.size()), geom_.m);
        iy_.resize(rows_.size());
        tb_.resize(rows_.size());
        for (std::size_t j = 0; j < rows_.size(); ++j) {
            const int k = rows_[j];
            if (k < 0 || k >= nrf) throw dimension_error("row index outside RF chains");
            iy_[j] = k / t;
            tb_[j] = k % t;
            if (f_a.active[static_cast<std::size_t>(k)])
                comp_.row(static_cast<Eigen::Index>(j)) = f_a.comp.row(k);
        }
    }

    int rows() const { return static_cast<int>(rows_.size()); }
    const std::vector<int>& row_ids() const { return rows_; }
    const UpaGeometry& geom() const { return geom_; }

    VectorXcd col(double u, double v) const {
        const double c = std::sqrt(std::max(0.0, 1.0 - v * v));
        const VectorXcd ay = steering_y(u, c, geom_.ny);
        const VectorXcd az = steering_z(v, geom_.nz);
        VectorXcd out(rows());
        for (std::size_t j = 0; j < rows_.size(); ++j) {
            cd sz(0.0, 0.0);
            const int base = tb_[j] * geom_.m;
            for (int m = 0; m < geom_.m; ++m)
                sz += comp_(static_cast<Eigen::Index>(j), m) * az[base + m];
            out[static_cast<Eigen::Index>(j)] = ay[iy_[j]] * sz;
        }
        return out;
    }

    void col_and_derivs(double u, double v, VectorXcd& c_out, VectorXcd& du,
                        VectorXcd& dv) const {
        const double c = std::sqrt(std::max(0.0, 1.0 - v * v));
        const double cg = std::max(c, 1e-12);
        const VectorXcd ay = steering_y(u, c, geom_.ny);
        const VectorXcd az = steering_z(v, geom_.nz);
        const cd jpi(0.0, kPi);
        c_out.resize(rows());
        du.resize(rows());
        dv.resize(rows());
        for (std::size_t j = 0; j < rows_.size(); ++j) {
            cd sz(0.0, 0.0), szd(0.0, 0.0);
            const int base = tb_[j] * geom_.m;
            for (int m = 0; m < geom_.m; ++m) {
                const cd w = comp_(static_cast<Eigen::Index>(j), m) * az[base + m];
                sz += w;
                szd += jpi * static_cast<double>(base + m) * w;
            }
            const Eigen::Index e = static_cast<Eigen::Index>(j);
            const cd col = ay[iy_[j]] * sz;
            c_out[e] = col;
            du[e] = jpi * c * static_cast<double>(iy_[j]) * col;
            dv[e] = ay[iy_[j]] * szd +
                    jpi * u * static_cast<double>(iy_[j]) * (-v / cg) * col;
        }
    }

  private:
    UpaGeometry geom_;
    std::vector<int> rows_;
    MatrixXcd comp_;      // per selected row, zeroed when the chain is inactive
    std::vector<int> iy_; // antenna column of each selected row
    std::vector<int> tb_; // vertical block of each selected row
};

inline std::vector<int> all_rf_rows(const UpaGeometry& geom) {
    std::vector<int> rows(static_cast<std::size_t>(geom.nrf()));
    for (int k = 0; k < geom.nrf(); ++k) rows[static_cast<std::size_t>(k)] = k;
    return rows;
}

// Column l = F_a a_R(theta_l, phi_l), over all RF-chain rows.
inline MatrixXcd build_sensing_matrix(const AnalogBeamMatrix& f_a,
                                      const DynamicGrid& grid) {
    const SubModel model(f_a, all_rf_rows(f_a.geom));
    MatrixXcd xi(f_a.geom.nrf(), grid.size());
    for (int l = 0; l < grid.size(); ++l)
        xi.col(l) = model.col(grid.theta[l], grid.phi[l]);
    return xi;
}

// ---------------------------------------------------------------------------
// Group decomposition of the observation model
// ---------------------------------------------------------------------------

struct GroupObservation {
    int g = 0;
    std::vector<int> rows; // RF-chain rows driven by this group's columns
    VectorXcd y_g;
    SubModel fbar;         // row slice of the beam acting on those chains
};

struct GroupBlock {
    GroupObservation obs;
    MatrixXcd xi;          // R_g x L_g per-group sensing block
    std::vector<int> cols; // grid indices labeled with this group
};

inline std::vector<GroupBlock> partition_groups(const VectorXcd& y,
                                                const AnalogBeamMatrix& f_a,
                                                const DynamicGrid& grid) {
    if (!f_a.grouped) throw config_error("group decomposition needs a grouped beam");
    if (y.size() != f_a.geom.nrf())
        throw dimension_error("observation length does not match RF chains");
    const int g_count = f_a.partition.g;
    for (int lab : grid.group_index)
        if (lab < 0 || lab >= g_count)
            throw config_error("grid point without a valid group label");
    std::vector<GroupBlock> blocks;
    blocks.reserve(static_cast<std::size_t>(g_count));
    for (int g = 0; g < g_count; ++g) {
        std::vector<int> rows = f_a.rows_for_group(g);
        SubModel fbar(f_a, rows);
        VectorXcd y_g(static_cast<Eigen::Index>(rows.size()));
        for (std::size_t j = 0; j < rows.size(); ++j)
            y_g[static_cast<Eigen::Index>(j)] = y[rows[j]];
        std::vector<int> cols;
        for (int l = 0; l < grid.size(); ++l)
            if (grid.group_index[static_cast<std::size_t>(l)] == g) cols.push_back(l);
        MatrixXcd xi(static_cast<Eigen::Index>(rows.size()),
                     static_cast<Eigen::Index>(cols.size()));
        for (std::size_t j = 0; j < cols.size(); ++j)
            xi.col(static_cast<Eigen::Index>(j)) =
                fbar.col(grid.theta[cols[j]], grid.phi[cols[j]]);
        blocks.push_back(GroupBlock{GroupObservation{g, std::move(rows), std::move(y_g),
                                                     std::move(fbar)},
                                    std::move(xi), std::move(cols)});
    }
    return blocks;
}

// ---------------------------------------------------------------------------
// Matched filtering over the pristine lattice
// ---------------------------------------------------------------------------

// |xi_l^H r| / ||xi_l|| for every lattice point, exploiting the kron
// structure: the correlation separates into a per-elevation chain reduction
// followed by one small GEMV per elevation, and the column norm depends on
// the elevation only. Valid only for unrefined lattice points.
class LatticeCorrelator {
  public:
    LatticeCorrelator(const AnalogBeamMatrix& f_a, const std::vector<int>& rows,
                      const VectorXd& u_axis, const VectorXd& v_axis)
        : l1_(static_cast<int>(u_axis.size())),
          l2_(static_cast<int>(v_axis.size())), ny_(f_a.geom.ny) {
        const SubModel model(f_a, rows);
        const int r = model.rows();
        const int t = f_a.geom.t(), m = f_a.geom.m;
        iy_.resize(static_cast<std::size_t>(r));
        for (int j = 0; j < r; ++j) iy_[static_cast<std::size_t>(j)] = rows[static_cast<std::size_t>(j)] / t;
        szc_.resize(r, l2_);
        inv_norm_.resize(l2_);
        ayc_.reserve(static_cast<std::size_t>(l2_));
        for (int iv = 0; iv < l2_; ++iv) {
            const double v = v_axis[iv];
            const VectorXcd az = steering_z(v, f_a.geom.nz);
            double norm2 = 0.0;
            for (int j = 0; j < r; ++j) {
                const int k = rows[static_cast<std::size_t>(j)];
                cd sz(0.0, 0.0);
                if (f_a.active[static_cast<std::size_t>(k)]) {
                    const int base = (k % t) * m;
                    for (int i = 0; i < m; ++i) sz += f_a.comp(k, i) * az[base + i];
                }
                szc_(j, iv) = std::conj(sz);
                norm2 += std::norm(sz);
            }
            inv_norm_[iv] = 1.0 / std::sqrt(std::max(norm2, 1e-300));
            const double c = std::sqrt(std::max(0.0, 1.0 - v * v));
            MatrixXcd ay(l1_, ny_);
            for (int iu = 0; iu < l1_; ++iu) {
                const cd w = std::polar(1.0, -kPi * u_axis[iu] * c);
                cd p(1.0, 0.0);
                for (int n = 0; n < ny_; ++n) {
                    ay(iu, n) = p;
                    p *= w;
                }
            }
            ayc_.push_back(std::move(ay));
        }
    }

    // Normalized correlation magnitudes, u-major lattice order.
    VectorXd correlate(const VectorXcd& r) const {
        MatrixXcd m = MatrixXcd::Zero(ny_, l2_);
        for (std::size_t j = 0; j < iy_.size(); ++j)
            m.row(iy_[j]) += szc_.row(static_cast<Eigen::Index>(j)) *
                             r[static_cast<Eigen::Index>(j)];
        VectorXd out(l1_ * l2_);
        for (int iv = 0; iv < l2_; ++iv) {
            const VectorXcd cv = ayc_[static_cast<std::size_t>(iv)] * m.col(iv);
            for (int iu = 0; iu < l1_; ++iu)
                out[iu * l2_ + iv] = std::abs(cv[iu]) * inv_norm_[iv];
        }
        return out;
    }

  private:
    int l1_, l2_, ny_;
    std::vector<int> iy_;
    MatrixXcd szc_;                // conj chain reductions, rows x l2
    std::vector<MatrixXcd> ayc_;   // per elevation: l1 x ny adjoint azimuth phases
    VectorXd inv_norm_;
};

inline std::vector<int> top_indices(const VectorXd& score, int k) {
    std::vector<int> idx(static_cast<std::size_t>(score.size()));
    std::iota(idx.begin(), idx.end(), 0);
    k = std::min<int>(k, static_cast<int>(idx.size()));
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return score[a] > score[b]; });
    idx.resize(static_cast<std::size_t>(std::max(k, 0)));
    return idx;
}

// ---------------------------------------------------------------------------
// Three-layer sparse prior and posterior state
// ---------------------------------------------------------------------------

struct SparsePriorConfig {
    double lambda = 0.01; // prior support probability per grid point
    double a = 1.0;       // active Gamma shape / rate: mean Theta(1)
    double b = 1.0;
    double a_bar = 1e3;   // inactive Gamma: mean >> 1 (large precision)
    double b_bar = 1.0;

    void validate() const {
        if (!(lambda > 0.0 && lambda < 1.0))
            throw config_error("sparsity ratio must lie in (0,1)");
        if (!(a > 0.0 && b > 0.0 && a_bar > 0.0 && b_bar > 0.0))
            throw config_error("Gamma hyper-parameters must be positive");
        if (!(a_bar / b_bar >= 1e3 * a / b))
            throw config_error("inactive precision mean must dominate the active one");
    }
};

inline SparsePriorConfig default_prior(int k_expected, int dict_size) {
    SparsePriorConfig p;
    p.lambda = std::clamp(static_cast<double>(k_expected) /
                              std::max(dict_size, 1), 1e-6, 1.0 - 1e-6);
    return p;
}

struct PosteriorState {
    VectorXcd x_mean;
    VectorXd x_var;
    VectorXd rho_mean;
    VectorXd s_prob;
    std::vector<int> support; // sorted indices currently declared active
};

// Matched-filter initialization: top k0 normalized correlations.
inline PosteriorState init_posterior(const VectorXcd& y, const MatrixXcd& sensing,
                                     const SparsePriorConfig& prior, int k0) {
    const int l = static_cast<int>(sensing.cols());
    PosteriorState st;
    st.x_mean = VectorXcd::Zero(l);
    st.rho_mean = VectorXd::Constant(l, prior.a_bar / prior.b_bar);
    st.s_prob = VectorXd::Constant(l, prior.lambda);
    VectorXd corr(l);
    for (int j = 0; j < l; ++j) {
        const double cn = std::sqrt(std::max(sensing.col(j).squaredNorm(), 1e-300));
        corr[j] = std::abs(sensing.col(j).dot(y)) / cn;
    }
    st.support = top_indices(corr, std::max(k0, 0));
    std::sort(st.support.begin(), st.support.end());
    for (int s : st.support) st.rho_mean[s] = prior.a / prior.b;
    st.x_var = st.rho_mean.cwiseInverse();
    return st;
}

// One mean-field sweep over q(x), q(rho), q(s). The Gaussian q(x) gets its
// full covariance only on the current support (a |S| x |S| solve); all other
// points receive a diagonal matched-filter update against the support
// residual. With max_admit unlimited the new support is exactly
// {l : s_prob > 0.5}; engines cap admissions per sweep for stability.
inline void scvbi_iterate(const VectorXcd& y, const MatrixXcd& sensing,
                          const SparsePriorConfig& prior, PosteriorState& st,
                          double noise_var,
                          int max_admit = std::numeric_limits<int>::max(),
                          int max_support = std::numeric_limits<int>::max(),
                          const VectorXd* cn2_hint = nullptr) {
    const int l = static_cast<int>(sensing.cols());
    const int r = static_cast<int>(sensing.rows());
    if (y.size() != r) throw dimension_error("observation length mismatch");
    if (!(noise_var > 0.0)) throw config_error("noise variance must be positive");
    if (static_cast<int>(st.support.size()) > r)
        throw overdense_error("over-dense support: " +
                              std::to_string(st.support.size()) + " atoms for " +
                              std::to_string(r) + " observation rows");

    VectorXd cn2(l);
    if (cn2_hint && cn2_hint->size() == l) {
        cn2 = *cn2_hint;
    } else {
        for (int j = 0; j < l; ++j)
            cn2[j] = std::max(sensing.col(j).squaredNorm(), 1e-300);
    }

    std::vector<char> in_s(static_cast<std::size_t>(l), 0);
    for (int s : st.support) in_s[static_cast<std::size_t>(s)] = 1;

    st.x_mean.setZero(l);
    st.x_var.setZero(l);
    VectorXcd resid = y;
    const int s_count = static_cast<int>(st.support.size());
    if (s_count > 0) {
        MatrixXcd xs(r, s_count);
        VectorXd rho_s(s_count);
        for (int j = 0; j < s_count; ++j) {
            xs.col(j) = sensing.col(st.support[static_cast<std::size_t>(j)]);
            rho_s[j] = st.rho_mean[st.support[static_cast<std::size_t>(j)]];
        }
        MatrixXcd p = (xs.adjoint() * xs) / noise_var;
        p.diagonal().array() += rho_s.array();
        Eigen::LDLT<MatrixXcd> ldlt(p);
        const MatrixXcd sig = ldlt.solve(MatrixXcd::Identity(s_count, s_count));
        const VectorXcd mu_s = sig * (xs.adjoint() * y) / noise_var;
        for (int j = 0; j < s_count; ++j) {
            st.x_mean[st.support[static_cast<std::size_t>(j)]] = mu_s[j];
            st.x_var[st.support[static_cast<std::size_t>(j)]] =
                std::max(sig(j, j).real(), 1e-300);
        }
        resid -= xs * mu_s;
    }
    const VectorXcd xr = sensing.adjoint() * resid;
    for (int j = 0; j < l; ++j) {
        if (in_s[static_cast<std::size_t>(j)]) continue;
        const double vv = 1.0 / (cn2[j] / noise_var + st.rho_mean[j]);
        st.x_mean[j] = vv * xr[j] / noise_var;
        st.x_var[j] = vv;
    }

    const double logit_lam = std::log(prior.lambda) - std::log1p(-prior.lambda);
    const double c1 = prior.a * std::log(prior.b) - std::lgamma(prior.a) +
                      std::lgamma(prior.a + 1.0);
    const double c0 = prior.a_bar * std::log(prior.b_bar) - std::lgamma(prior.a_bar) +
                      std::lgamma(prior.a_bar + 1.0);
    VectorXd ex2(l);
    for (int j = 0; j < l; ++j) {
        ex2[j] = std::norm(st.x_mean[j]) + st.x_var[j];
        double lod = logit_lam + (c1 - (prior.a + 1.0) * std::log(prior.b + ex2[j])) -
                     (c0 - (prior.a_bar + 1.0) * std::log(prior.b_bar + ex2[j]));
        lod = std::clamp(lod, -500.0, 500.0);
        const double sp = 1.0 / (1.0 + std::exp(-lod));
        st.s_prob[j] = sp;
        st.rho_mean[j] = sp * (prior.a + 1.0) / (prior.b + ex2[j]) +
                         (1.0 - sp) * (prior.a_bar + 1.0) / (prior.b_bar + ex2[j]);
    }

    std::vector<int> stay, fresh;
    for (int j = 0; j < l; ++j) {
        if (st.s_prob[j] > 0.5) {
            if (in_s[static_cast<std::size_t>(j)])
                stay.push_back(j);
            else
                fresh.push_back(j);
        }
    }
    std::stable_sort(fresh.begin(), fresh.end(),
                     [&](int a2, int b2) { return ex2[a2] > ex2[b2]; });
    const int room = std::max(0, max_support - static_cast<int>(stay.size()));
    const int take = std::min<int>({static_cast<int>(fresh.size()), max_admit, room});
    fresh.resize(static_cast<std::size_t>(take));
    stay.insert(stay.end(), fresh.begin(), fresh.end());
    std::sort(stay.begin(), stay.end());
    st.support = std::move(stay);
    if (static_cast<int>(st.support.size()) > r)
        throw overdense_error("over-dense support: " +
                              std::to_string(st.support.size()) + " atoms for " +
                              std::to_string(r) + " observation rows");
}

// ---------------------------------------------------------------------------
// Gradient grid refinement
// ---------------------------------------------------------------------------

struct RefineBounds {
    double u_lo = -1.0;
    double u_hi = 1.0;
    double v_lo = -1.0;
    double v_hi = 1.0;
};

struct RefineOptions {
    int b_steps = 3;
    double step0 = 0.01;     // initial Armijo step in sin units
    double shrink = 0.5;
    double c1 = 1e-4;        // sufficient-decrease constant
    int max_backtracks = 20;
};

// Objective L = -||y - Xi_S x_S||^2 / ||y||^2 and its analytic gradient with
// respect to the supported (theta, phi) coordinates.
inline double refine_objective_gradient(const VectorXcd& y, const SubModel& model,
                                        const MatrixX2d& pts,
                                        const std::vector<int>& support,
                                        const VectorXcd& x_s, const MatrixXcd& xi,
                                        VectorXd& gu, VectorXd& gv) {
    const int s = static_cast<int>(support.size());
    const double ynorm2 = std::max(y.squaredNorm(), 1e-300);
    VectorXcd r = y;
    for (int j = 0; j < s; ++j)
        r -= x_s[j] * xi.col(support[static_cast<std::size_t>(j)]);
    gu.resize(s);
    gv.resize(s);
    VectorXcd c, du, dv;
    for (int j = 0; j < s; ++j) {
        const int l = support[static_cast<std::size_t>(j)];
        model.col_and_derivs(pts(l, 0), pts(l, 1), c, du, dv);
        gu[j] = 2.0 * (x_s[j] * r.dot(du)).real() / ynorm2;
        gv[j] = 2.0 * (x_s[j] * r.dot(dv)).real() / ynorm2;
    }
    return -r.squaredNorm() / ynorm2;
}

// Up to b_steps joint ascent steps on the supported grid points, Armijo
// backtracking on the shared objective, coordinates clamped to bounds after
// each trial step. A non-finite gradient aborts, keeping the previous grid.
// Moved columns of xi (and cn2) are refreshed in place. Returns accepted steps.
inline int grid_refine(const VectorXcd& y, const SubModel& model, MatrixX2d& pts,
                       MatrixXcd& xi, VectorXd& cn2, const std::vector<int>& support,
                       const VectorXcd& x_s, const RefineBounds& bounds,
                       const RefineOptions& opt) {
    const int s = static_cast<int>(support.size());
    if (s == 0) return 0;
    const double ynorm2 = std::max(y.squaredNorm(), 1e-300);
    int accepted = 0;
    VectorXd gu, gv;
    MatrixXcd xc(xi.rows(), s);
    for (int step = 0; step < opt.b_steps; ++step) {
        const double l_old =
            refine_objective_gradient(y, model, pts, support, x_s, xi, gu, gv);
        const double g2 = gu.squaredNorm() + gv.squaredNorm();
        if (!std::isfinite(g2) || g2 == 0.0) break;
        double eps = opt.step0;
        bool ok = false;
        MatrixX2d cand(s, 2);
        for (int bt = 0; bt < opt.max_backtracks; ++bt) {
            for (int j = 0; j < s; ++j) {
                const int l = support[static_cast<std::size_t>(j)];
                cand(j, 0) = std::clamp(pts(l, 0) + eps * gu[j], bounds.u_lo, bounds.u_hi);
                cand(j, 1) = std::clamp(pts(l, 1) + eps * gv[j], bounds.v_lo, bounds.v_hi);
            }
            for (int j = 0; j < s; ++j) xc.col(j) = model.col(cand(j, 0), cand(j, 1));
            const VectorXcd rc = y - xc * x_s;
            const double l_new = -rc.squaredNorm() / ynorm2;
            if (l_new >= l_old + opt.c1 * eps * g2) {
                ok = true;
                break;
            }
            eps *= opt.shrink;
        }
        if (!ok) break;
        for (int j = 0; j < s; ++j) {
            const int l = support[static_cast<std::size_t>(j)];
            pts(l, 0) = cand(j, 0);
            pts(l, 1) = cand(j, 1);
            xi.col(l) = xc.col(j);
            cn2[l] = std::max(xc.col(j).squaredNorm(), 1e-300);
        }
        ++accepted;
    }
    return accepted;
}

// Refined points that collide within tol in both coordinates merge: the
// stronger atom absorbs the weaker one's coefficient.
inline void merge_close_atoms(PosteriorState& st, const MatrixX2d& pts, double tol,
                              const SparsePriorConfig& prior) {
    std::vector<int> sl = st.support;
    std::vector<char> alive(sl.size(), 1);
    for (std::size_t i = 0; i < sl.size(); ++i) {
        if (!alive[i]) continue;
        for (std::size_t j = i + 1; j < sl.size(); ++j) {
            if (!alive[j]) continue;
            const int li = sl[i], lj = sl[j];
            const double d = std::max(std::abs(pts(li, 0) - pts(lj, 0)),
                                      std::abs(pts(li, 1) - pts(lj, 1)));
            if (d >= tol) continue;
            int keep = li, drop = lj;
            std::size_t drop_slot = j;
            if (std::abs(st.x_mean[li]) < std::abs(st.x_mean[lj])) {
                keep = lj;
                drop = li;
                drop_slot = i;
            }
            st.x_mean[keep] += st.x_mean[drop];
            st.x_mean[drop] = cd(0.0, 0.0);
            st.rho_mean[drop] = (prior.a_bar + 1.0) / prior.b_bar;
            alive[drop_slot] = 0;
            if (drop == li) break;
        }
    }
    std::vector<int> next;
    for (std::size_t i = 0; i < sl.size(); ++i)
        if (alive[i]) next.push_back(sl[i]);
    st.support = std::move(next);
}

// ---------------------------------------------------------------------------
// Inner engine: alternate sweeps and refinement on one dictionary
// ---------------------------------------------------------------------------

struct ScvbiRunOptions {
    double noise_var = 1e-3;
    double lambda = 0.01;
    int k0 = 1;
    int sweeps = 10;
    int b_steps = 3;
    int max_admit = 2;
    RefineBounds bounds;
    double merge_tol = 1e-4;
    SparsePriorConfig hyper;             // lambda overridden by this struct
    const std::vector<int>* init_support = nullptr;
};

struct ScvbiRunResult {
    PosteriorState st;
    MatrixX2d pts;
    MatrixXcd xi;
    VectorXcd residual; // y - Xi_S mu_S at the final state
};

inline ScvbiRunResult scvbi_run(const VectorXcd& y, const SubModel& model,
                                MatrixX2d pts, MatrixXcd xi,
                                const ScvbiRunOptions& opt) {
    const int l = static_cast<int>(xi.cols());
    const int r = static_cast<int>(xi.rows());
    SparsePriorConfig prior = opt.hyper;
    prior.lambda = std::clamp(opt.lambda, 1e-6, 1.0 - 1e-6);
    prior.validate();
    const int max_support = std::max(1, r - 1);

    VectorXd cn2(l);
    for (int j = 0; j < l; ++j) cn2[j] = std::max(xi.col(j).squaredNorm(), 1e-300);

    PosteriorState st;
    st.x_mean = VectorXcd::Zero(l);
    st.rho_mean = VectorXd::Constant(l, prior.a_bar / prior.b_bar);
    st.s_prob = VectorXd::Constant(l, prior.lambda);
    if (opt.init_support) {
        std::vector<int> s = *opt.init_support;
        std::sort(s.begin(), s.end());
        s.erase(std::unique(s.begin(), s.end()), s.end());
        if (static_cast<int>(s.size()) > max_support)
            s.resize(static_cast<std::size_t>(max_support));
        st.support = std::move(s);
    } else {
        VectorXd corr(l);
        for (int j = 0; j < l; ++j)
            corr[j] = std::abs(xi.col(j).dot(y)) / std::sqrt(cn2[j]);
        st.support = top_indices(corr, std::min(std::max(opt.k0, 1), max_support));
        std::sort(st.support.begin(), st.support.end());
    }
    for (int s : st.support) st.rho_mean[s] = prior.a / prior.b;
    st.x_var = st.rho_mean.cwiseInverse();

    RefineOptions ropt;
    ropt.b_steps = opt.b_steps;
    for (int it = 0; it < opt.sweeps; ++it) {
        scvbi_iterate(y, xi, prior, st, opt.noise_var, opt.max_admit, max_support,
                      &cn2);
        if (!st.support.empty() && opt.b_steps > 0) {
            VectorXcd x_s(static_cast<Eigen::Index>(st.support.size()));
            for (std::size_t j = 0; j < st.support.size(); ++j)
                x_s[static_cast<Eigen::Index>(j)] = st.x_mean[st.support[j]];
            grid_refine(y, model, pts, xi, cn2, st.support, x_s, opt.bounds, ropt);
            merge_close_atoms(st, pts, opt.merge_tol, prior);
        }
    }

    ScvbiRunResult out;
    out.residual = y;
    for (int s : st.support) out.residual -= st.x_mean[s] * xi.col(s);
    out.st = std::move(st);
    out.pts = std::move(pts);
    out.xi = std::move(xi);
    return out;
}

// ---------------------------------------------------------------------------
// OMP
// ---------------------------------------------------------------------------

struct OmpResult {
    std::vector<int> support;
    VectorXcd coeffs;                   // least-squares fit on the support
    std::vector<double> residual_norms; // after each accepted atom
};

// Greedy atom selection with least-squares re-fit. Stops at k_max atoms, at
// the residual tolerance, on a repeated pick, or when the selected set loses
// full column rank.
inline OmpResult omp(const VectorXcd& y, const MatrixXcd& sensing, int k_max,
                     double residual_tol = 0.0) {
    const int l = static_cast<int>(sensing.cols());
    const int r = static_cast<int>(sensing.rows());
    OmpResult res;
    if (l == 0 || k_max <= 0) return res;
    VectorXd inv_cn(l);
    for (int j = 0; j < l; ++j)
        inv_cn[j] = 1.0 / std::sqrt(std::max(sensing.col(j).squaredNorm(), 1e-300));
    VectorXcd resid = y;
    const double yn = y.norm();
    MatrixXcd xs(r, std::min(k_max, l));
    for (int step = 0; step < k_max && static_cast<int>(res.support.size()) < l;
         ++step) {
        const VectorXd corr =
            (sensing.adjoint() * resid).cwiseAbs().cwiseProduct(inv_cn);
        int best = 0;
        corr.maxCoeff(&best);
        if (std::find(res.support.begin(), res.support.end(), best) !=
            res.support.end())
            break;
        res.support.push_back(best);
        const int s = static_cast<int>(res.support.size());
        xs.col(s - 1) = sensing.col(best);
        Eigen::ColPivHouseholderQR<MatrixXcd> qr(xs.leftCols(s));
        if (qr.rank() < s) {
            res.support.pop_back();
            break;
        }
        res.coeffs = qr.solve(y);
        resid = y - xs.leftCols(s) * res.coeffs;
        res.residual_norms.push_back(resid.norm());
        if (residual_tol > 0.0 && resid.norm() <= residual_tol * yn) break;
    }
    return res;
}

// OMP over the pristine lattice without materializing the dense sensing
// matrix; correlation via the factorized matched filter, columns built on
// demand for the least-squares re-fit.
inline OmpResult omp_lattice(const VectorXcd& y, const LatticeCorrelator& cor,
                             const SubModel& model, const DynamicGrid& grid,
                             int k_max, double residual_tol = 0.0) {
    OmpResult res;
    if (grid.size() == 0 || k_max <= 0) return res;
    VectorXcd resid = y;
    const double yn = y.norm();
    MatrixXcd xs(model.rows(), std::min(k_max, grid.size()));
    for (int step = 0; step < k_max; ++step) {
        const VectorXd corr = cor.correlate(resid);
        int best = 0;
        corr.maxCoeff(&best);
        if (std::find(res.support.begin(), res.support.end(), best) !=
            res.support.end())
            break;
        res.support.push_back(best);
        const int s = static_cast<int>(res.support.size());
        xs.col(s - 1) = model.col(grid.theta[best], grid.phi[best]);
        Eigen::ColPivHouseholderQR<MatrixXcd> qr(xs.leftCols(s));
        if (qr.rank() < s) {
            res.support.pop_back();
            break;
        }
        res.coeffs = qr.solve(y);
        resid = y - xs.leftCols(s) * res.coeffs;
        res.residual_norms.push_back(resid.norm());
        if (residual_tol > 0.0 && resid.norm() <= residual_tol * yn) break;
    }
    return res;
}

// ---------------------------------------------------------------------------
// Two-stage estimators
// ---------------------------------------------------------------------------

struct ScvbiEngineConfig {
    int k_expected = 10;
    double noise_var = 1e-3; // sigma^2, known from the simulation

    int stage1_rounds = 2;  // interference-cancellation rounds (group stage)
    int stage1_sweeps = 6;  // sweeps per round; rounds x sweeps = group budget
    int stage1_b_steps = 3;

    int joint_phases = 5;   // dictionary re-expansion phases, joint stage
    int joint_sweeps = 6;
    int joint_b_steps = 3;
    int joint_k0_step = 3;
    int aug_top = 8;        // residual lattice peaks appended between phases

    int group_cand_peaks = 5; // per-group residual peaks kept as candidates
    int full_stage1_sweeps = 30;
    int full_cand_peaks = 3;

    int max_admit = 2;
    double merge_tol = 1e-4;
    double sic_ridge = 0.5; // diagonal loading of the cross-group re-fit
    bool omp_seed = true;   // seed joint phases from a greedy selection
    bool omp_candidates = true; // append lattice OMP atoms to the candidates

    void validate() const {
        if (k_expected < 1) throw config_error("expected path count must be >= 1");
        if (stage1_rounds < 1 || stage1_sweeps < 1 || joint_phases < 1 ||
            joint_sweeps < 1 || full_stage1_sweeps < 1)
            throw config_error("iteration budgets must be >= 1");
        if (max_admit < 1) throw config_error("max_admit must be >= 1");
    }
};

struct EstimateResult {
    VectorXcd h_hat;
    PosteriorState state;  // posterior over the final joint dictionary
    MatrixX2d points;      // final refined dictionary angles
    bool empty_support = false;
    int support_size = 0;
};

namespace detail {

inline double floored_noise_var(double noise_var, const VectorXcd& y) {
    const double floor = 1e-12 * y.squaredNorm() /
                         std::max<double>(static_cast<double>(y.size()), 1.0);
    return std::max(noise_var, std::max(floor, 1e-300));
}

inline MatrixX2d gather_points(const MatrixX2d& pts, const std::vector<int>& idx) {
    MatrixX2d out(static_cast<Eigen::Index>(idx.size()), 2);
    for (std::size_t j = 0; j < idx.size(); ++j) {
        out(static_cast<Eigen::Index>(j), 0) = pts(idx[j], 0);
        out(static_cast<Eigen::Index>(j), 1) = pts(idx[j], 1);
    }
    return out;
}

inline MatrixXcd columns_at(const SubModel& model, const MatrixX2d& pts) {
    MatrixXcd xi(model.rows(), pts.rows());
    for (Eigen::Index j = 0; j < pts.rows(); ++j)
        xi.col(j) = model.col(pts(j, 0), pts(j, 1));
    return xi;
}

// Posterior-mean reconstruction over every dictionary atom: each conditional
// coefficient mean is weighted by the probability that its atom is active,
// so uncommitted matched-filter probes contribute only their expected mass.
inline VectorXcd reconstruct(const UpaGeometry& geom, const MatrixX2d& pts,
                             const VectorXcd& x_mean, const VectorXd& s_prob) {
    VectorXcd h = VectorXcd::Zero(geom.nr());
    for (Eigen::Index l2 = 0; l2 < pts.rows(); ++l2) {
        const cd w = x_mean[l2] * s_prob[l2];
        if (w == cd(0.0, 0.0)) continue;
        h += w * array_response_uv(pts(l2, 0), pts(l2, 1), geom);
    }
    return h;
}

// Joint processing over a pruned candidate dictionary: repeated short
// SC-VBI runs, each followed by appending the strongest residual lattice
// peaks, with elevation clamping released to the whole prior.
inline ScvbiRunResult joint_polish(const VectorXcd& y, const SubModel& model,
                                   const LatticeCorrelator& cor,
                                   const DynamicGrid& grid, MatrixX2d cand,
                                   double noise_var,
                                   const SparsePriorConfig& hyper,
                                   const ScvbiEngineConfig& cfg) {
    const int k = cfg.k_expected;
    const MatrixX2d lattice = grid.points();
    ScvbiRunResult run;
    for (int phase = 0; phase < cfg.joint_phases; ++phase) {
        const int len = static_cast<int>(cand.rows());
        ScvbiRunOptions opt;
        opt.noise_var = noise_var;
        opt.lambda = std::clamp(static_cast<double>(k) / std::max(len, 1), 0.05, 0.9);
        opt.k0 = std::min(len, (3 * k + 1) / 2 + cfg.joint_k0_step * phase);
        opt.sweeps = cfg.joint_sweeps;
        opt.b_steps = cfg.joint_b_steps;
        opt.max_admit = cfg.max_admit;
        opt.merge_tol = cfg.merge_tol;
        opt.hyper = hyper;
        opt.bounds.v_lo = grid.v_lo;
        opt.bounds.v_hi = grid.v_hi;
        MatrixXcd xi = columns_at(model, cand);
        std::vector<int> seed;
        if (cfg.omp_seed) {
            seed = omp(y, xi, std::min(len, k)).support;
            opt.init_support = &seed;
        }
        run = scvbi_run(y, model, cand, std::move(xi), opt);
        if (phase + 1 < cfg.joint_phases) {
            const std::vector<int> aug =
                top_indices(cor.correlate(run.residual), cfg.aug_top);
            const MatrixX2d kept = gather_points(run.pts, run.st.support);
            cand.resize(kept.rows() + static_cast<Eigen::Index>(aug.size()), 2);
            cand.topRows(kept.rows()) = kept;
            for (std::size_t j = 0; j < aug.size(); ++j) {
                cand(kept.rows() + static_cast<Eigen::Index>(j), 0) =
                    lattice(aug[j], 0);
                cand(kept.rows() + static_cast<Eigen::Index>(j), 1) =
                    lattice(aug[j], 1);
            }
        }
    }
    return run;
}

inline EstimateResult finish(const UpaGeometry& geom, ScvbiRunResult run) {
    EstimateResult res;
    res.h_hat = reconstruct(geom, run.pts, run.st.x_mean, run.st.s_prob);
    res.support_size = static_cast<int>(run.st.support.size());
    res.state = std::move(run.st);
    res.points = std::move(run.pts);
    return res;
}

} // namespace detail

// Group-wise two-stage estimator. Stage 1 solves each group's reduced model
// independently (concurrently when threads are available), with later rounds
// subtracting the other groups' fitted atoms from each group's observation.
// Stage 2 pools the surviving atoms plus residual lattice peaks and polishes
// them jointly on the full model.
inline EstimateResult gw_scvbi(const VectorXcd& y, const AnalogBeamMatrix& f_a,
                               const DynamicGrid& grid,
                               const SparsePriorConfig& prior,
                               const ScvbiEngineConfig& cfg) {
    cfg.validate();
    const UpaGeometry& geom = f_a.geom;
    if (y.squaredNorm() == 0.0) {
        EstimateResult res;
        res.h_hat = VectorXcd::Zero(geom.nr());
        res.empty_support = true;
        return res;
    }
    const double sig2 = detail::floored_noise_var(cfg.noise_var, y);
    const std::vector<GroupBlock> blocks = partition_groups(y, f_a, grid);
    const int g_count = static_cast<int>(blocks.size());
    const int gk0 = (2 * cfg.k_expected + g_count - 1) / g_count + 1;

    const std::vector<int> all_rows = all_rf_rows(geom);
    const SubModel joint_model(f_a, all_rows);
    const LatticeCorrelator cor(f_a, all_rows, grid.u_axis, grid.v_axis);

    std::vector<ScvbiRunResult> stage(static_cast<std::size_t>(g_count));
    std::vector<VectorXcd> y_eff(static_cast<std::size_t>(g_count));
    for (int g = 0; g < g_count; ++g) y_eff[static_cast<std::size_t>(g)] = blocks[static_cast<std::size_t>(g)].obs.y_g;

    for (int round = 0; round < cfg.stage1_rounds; ++round) {
        if (round > 0) {
            // Ridge re-fit of every surviving atom against the full
            // observation, then cancel the other groups' contributions from
            // each group's rows.
            std::vector<int> owner;
            std::vector<std::pair<double, double>> atom_pts;
            for (int g = 0; g < g_count; ++g) {
                const auto& run = stage[static_cast<std::size_t>(g)];
                for (int s : run.st.support) {
                    owner.push_back(g);
                    atom_pts.emplace_back(run.pts(s, 0), run.pts(s, 1));
                }
            }
            const int n_atoms = static_cast<int>(atom_pts.size());
            if (n_atoms > 0) {
                MatrixXcd xf(joint_model.rows(), n_atoms);
                for (int j = 0; j < n_atoms; ++j)
                    xf.col(j) = joint_model.col(atom_pts[static_cast<std::size_t>(j)].first,
                                                atom_pts[static_cast<std::size_t>(j)].second);
                MatrixXcd a = (xf.adjoint() * xf) / sig2;
                a.diagonal().array() += cfg.sic_ridge;
                const VectorXcd xfit =
                    Eigen::LDLT<MatrixXcd>(a).solve(xf.adjoint() * y / sig2);
                for (int g = 0; g < g_count; ++g) {
                    VectorXcd yg = blocks[static_cast<std::size_t>(g)].obs.y_g;
                    for (int j = 0; j < n_atoms; ++j) {
                        if (owner[static_cast<std::size_t>(j)] == g) continue;
                        yg -= xfit[j] *
                              blocks[static_cast<std::size_t>(g)].obs.fbar.col(
                                  atom_pts[static_cast<std::size_t>(j)].first,
                                  atom_pts[static_cast<std::size_t>(j)].second);
                    }
                    y_eff[static_cast<std::size_t>(g)] = std::move(yg);
                }
            }
        }
        parallel_for(static_cast<std::size_t>(g_count), [&](std::size_t gi) {
            const int g = static_cast<int>(gi);
            const GroupBlock& blk = blocks[static_cast<std::size_t>(g)];
            ScvbiRunOptions opt;
            opt.noise_var = sig2;
            opt.lambda = prior.lambda;
            opt.k0 = gk0;
            opt.sweeps = cfg.stage1_sweeps;
            opt.b_steps = cfg.stage1_b_steps;
            opt.max_admit = cfg.max_admit;
            opt.merge_tol = cfg.merge_tol;
            opt.hyper = prior;
            opt.bounds.v_lo = f_a.partition.edges[static_cast<std::size_t>(g)];
            opt.bounds.v_hi = f_a.partition.edges[static_cast<std::size_t>(g) + 1];
            MatrixX2d pts(static_cast<Eigen::Index>(blk.cols.size()), 2);
            for (std::size_t j = 0; j < blk.cols.size(); ++j) {
                pts(static_cast<Eigen::Index>(j), 0) = grid.theta[blk.cols[j]];
                pts(static_cast<Eigen::Index>(j), 1) = grid.phi[blk.cols[j]];
            }
            stage[static_cast<std::size_t>(g)] =
                scvbi_run(y_eff[static_cast<std::size_t>(g)], blk.obs.fbar,
                          std::move(pts), blk.xi, opt);
        });
    }

    bool any_support = false;
    for (const auto& run : stage) any_support = any_support || !run.st.support.empty();
    if (!any_support) {
        EstimateResult res;
        res.h_hat = VectorXcd::Zero(geom.nr());
        res.empty_support = true;
        return res;
    }

    // Candidate dictionary: refined supports, each group's strongest
    // off-support residual peaks, and a greedy lattice selection.
    std::vector<std::pair<double, double>> cand;
    for (int g = 0; g < g_count; ++g) {
        const auto& run = stage[static_cast<std::size_t>(g)];
        for (int s : run.st.support) cand.emplace_back(run.pts(s, 0), run.pts(s, 1));
        const int lg = static_cast<int>(run.xi.cols());
        VectorXd corr(lg);
        for (int j = 0; j < lg; ++j)
            corr[j] = std::abs(run.xi.col(j).dot(run.residual)) /
                      std::sqrt(std::max(run.xi.col(j).squaredNorm(), 1e-300));
        for (int s : run.st.support) corr[s] = -1.0;
        for (int j : top_indices(corr, cfg.group_cand_peaks))
            cand.emplace_back(run.pts(j, 0), run.pts(j, 1));
    }
    if (cfg.omp_candidates) {
        for (int l : omp_lattice(y, cor, joint_model, grid, cfg.k_expected).support)
            cand.emplace_back(grid.theta[l], grid.phi[l]);
    }
    MatrixX2d cand_pts(static_cast<Eigen::Index>(cand.size()), 2);
    for (std::size_t j = 0; j < cand.size(); ++j) {
        cand_pts(static_cast<Eigen::Index>(j), 0) = cand[j].first;
        cand_pts(static_cast<Eigen::Index>(j), 1) = cand[j].second;
    }
    return detail::finish(geom, detail::joint_polish(y, joint_model, cor, grid,
                                                     std::move(cand_pts), sig2,
                                                     prior, cfg));
}

// Unpartitioned counterpart: the same machinery applied to the full model,
// with a single grid-sized stage before the joint polish.
inline EstimateResult scvbi_full(const VectorXcd& y, const AnalogBeamMatrix& f_a,
                                 const DynamicGrid& grid,
                                 const SparsePriorConfig& prior,
                                 const ScvbiEngineConfig& cfg) {
    cfg.validate();
    const UpaGeometry& geom = f_a.geom;
    if (y.size() != geom.nrf())
        throw dimension_error("observation length does not match RF chains");
    if (y.squaredNorm() == 0.0) {
        EstimateResult res;
        res.h_hat = VectorXcd::Zero(geom.nr());
        res.empty_support = true;
        return res;
    }
    const double sig2 = detail::floored_noise_var(cfg.noise_var, y);
    const std::vector<int> all_rows = all_rf_rows(geom);
    const SubModel model(f_a, all_rows);
    const LatticeCorrelator cor(f_a, all_rows, grid.u_axis, grid.v_axis);

    ScvbiRunOptions opt;
    opt.noise_var = sig2;
    opt.lambda = prior.lambda;
    opt.k0 = (3 * cfg.k_expected + 1) / 2;
    opt.sweeps = cfg.full_stage1_sweeps;
    opt.b_steps = cfg.stage1_b_steps;
    opt.max_admit = cfg.max_admit;
    opt.merge_tol = cfg.merge_tol;
    opt.hyper = prior;
    opt.bounds.v_lo = grid.v_lo;
    opt.bounds.v_hi = grid.v_hi;
    ScvbiRunResult run =
        scvbi_run(y, model, grid.points(), build_sensing_matrix(f_a, grid), opt);

    if (run.st.support.empty()) {
        EstimateResult res;
        res.h_hat = VectorXcd::Zero(geom.nr());
        res.empty_support = true;
        return res;
    }

    std::vector<std::pair<double, double>> cand;
    for (int s : run.st.support) cand.emplace_back(run.pts(s, 0), run.pts(s, 1));
    for (int l : top_indices(cor.correlate(run.residual), cfg.full_cand_peaks))
        cand.emplace_back(grid.theta[l], grid.phi[l]);
    if (cfg.omp_candidates) {
        for (int l : omp_lattice(y, cor, model, grid, cfg.k_expected).support)
            cand.emplace_back(grid.theta[l], grid.phi[l]);
    }
    MatrixX2d cand_pts(static_cast<Eigen::Index>(cand.size()), 2);
    for (std::size_t j = 0; j < cand.size(); ++j) {
        cand_pts(static_cast<Eigen::Index>(j), 0) = cand[j].first;
        cand_pts(static_cast<Eigen::Index>(j), 1) = cand[j].second;
    }
    return detail::finish(geom, detail::joint_polish(y, model, cor, grid,
                                                     std::move(cand_pts), sig2,
                                                     prior, cfg));
}

// Greedy baseline on the pristine lattice: k_expected atoms, least-squares
// coefficients, reconstruction from the selected steering vectors.
inline EstimateResult omp_estimate(const VectorXcd& y, const AnalogBeamMatrix& f_a,
                                   const DynamicGrid& grid, int k_max) {
    const UpaGeometry& geom = f_a.geom;
    if (y.size() != geom.nrf())
        throw dimension_error("observation length does not match RF chains");
    const std::vector<int> all_rows = all_rf_rows(geom);
    const SubModel model(f_a, all_rows);
    const LatticeCorrelator cor(f_a, all_rows, grid.u_axis, grid.v_axis);
    const OmpResult sel = omp_lattice(y, cor, model, grid, k_max);
    EstimateResult res;
    res.h_hat = VectorXcd::Zero(geom.nr());
    res.support_size = static_cast<int>(sel.support.size());
    res.empty_support = sel.support.empty();
    res.points.resize(static_cast<Eigen::Index>(sel.support.size()), 2);
    for (std::size_t j = 0; j < sel.support.size(); ++j) {
        const int l = sel.support[j];
        res.points(static_cast<Eigen::Index>(j), 0) = grid.theta[l];
        res.points(static_cast<Eigen::Index>(j), 1) = grid.phi[l];
        res.h_hat += sel.coeffs[static_cast<Eigen::Index>(j)] *
                     array_response_uv(grid.theta[l], grid.phi[l], geom);
    }
    return res;
}

inline double nmse(const VectorXcd& h_hat, const VectorXcd& h_true) {
    if (h_hat.size() != h_true.size())
        throw dimension_error("channel estimate length mismatch");
    const double ref = h_true.squaredNorm();
    if (!(ref > 0.0)) throw config_error("reference channel has zero energy");
    return (h_hat - h_true).squaredNorm() / ref;
}

} // namespace gwbeam

#endif // GWBEAM_ESTIMATOR_HPP
