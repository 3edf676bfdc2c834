// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include "gwbeam/metrics.hpp"
#include "oracles.hpp"

using namespace gwbeam;

namespace {
std::vector<int> random_columns(int ny, Rng& rng, int min_count = 1) {
    std::vector<int> s(static_cast<std::size_t>(ny), 0);
    int count = 0;
    while (count < min_count) {
        count = 0;
        for (int n = 0; n < ny; ++n) {
            s[static_cast<std::size_t>(n)] = rng.uniform() < 0.5 ? 1 : 0;
            count += s[static_cast<std::size_t>(n)];
        }
    }
    return s;
}
} // namespace

TEST_CASE("single-antenna group integrates to one") {
    auto kernel = make_isl_kernel(-0.3, 16, SidelobeRegion(0.25, 1.0));
    std::vector<int> s(16, 0);
    s[5] = 1;
    CHECK(isl(s, kernel) == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("closed-form isl matches adaptive quadrature") {
    Rng rng(2024);
    for (int trial = 0; trial < 50; ++trial) {
        const int ny = 8 + static_cast<int>(rng.u64() % 57); // 8..64
        const double phi = std::asin(rng.uniform(-0.49, -0.01));
        const double a = rng.uniform(0.05, 0.5);
        const double b = rng.uniform(a + 0.1, 1.0);
        SidelobeRegion region(a, b);
        auto s = random_columns(ny, rng);
        const double closed = isl(s, make_isl_kernel(phi, ny, region));
        const double quad = oracles::isl_quadrature(s, phi, region);
        CHECK(std::abs(closed - quad) / quad < 1e-6);
    }
}

TEST_CASE("empty group is rejected") {
    auto kernel = make_isl_kernel(-0.3, 8, default_region(8));
    CHECK_THROWS_AS(isl(std::vector<int>(8, 0), kernel), dimension_error);
}

TEST_CASE("contiguous pattern beats random assignment on average") {
    const int ny = 64, per = 16;
    const double phi = std::asin(-0.4375);
    auto kernel = make_isl_kernel(phi, ny, default_region(ny));
    std::vector<int> uniform(ny, 0);
    for (int n = 0; n < per; ++n) uniform[static_cast<std::size_t>(n)] = 1;
    const double isl_uniform = isl(uniform, kernel);

    Rng rng(77);
    double acc = 0.0;
    const int trials = 100;
    for (int trial = 0; trial < trials; ++trial) {
        std::vector<int> s(ny, 0);
        int placed = 0;
        while (placed < per) {
            int n = static_cast<int>(rng.u64() % ny);
            if (!s[static_cast<std::size_t>(n)]) {
                s[static_cast<std::size_t>(n)] = 1;
                ++placed;
            }
        }
        acc += isl(s, kernel);
    }
    CHECK(isl_uniform < acc / trials);
}

TEST_CASE("horizontal af closed form equals the dense quadratic form") {
    Rng rng(5150);
    for (int trial = 0; trial < 200; ++trial) {
        const int ny = 4 + static_cast<int>(rng.u64() % 13);
        const int m = 2 + static_cast<int>(rng.u64() % 7);
        const int t = 1 + static_cast<int>(rng.u64() % 3);
        UpaGeometry geom(ny, m * t, m);
        auto s = random_columns(ny, rng);
        const double phi = std::asin(rng.uniform(-0.6, 0.6));
        const double v = std::sin(phi);
        VectorXcd beam = narrow_beam(rng.uniform(-0.5, 0.5), m);
        const double u1 = rng.uniform(-1.0, 1.0), u2 = rng.uniform(-1.0, 1.0);

        AnalogBeamMatrix f = oracles::single_group_beam(s, beam, geom);
        VectorXcd c1 = f.apply(array_response_uv(u1, v, geom));
        VectorXcd c2 = f.apply(array_response_uv(u2, v, geom));
        const cd dense = c1.dot(c2);

        const double energy = group_beam_energy(beam, v, t);
        const cd closed = horizontal_af(s, u2 - u1, phi, energy);
        CHECK(std::abs(closed - dense) <= 1e-9 * std::abs(dense));
    }
}

TEST_CASE("horizontal af basics") {
    std::vector<int> s = {1, 0, 1, 1, 0, 0, 1, 0};
    const double energy = 72.0;
    CHECK(std::abs(horizontal_af(s, 0.0, -0.3, energy) - cd(4.0 * energy, 0.0)) <
          1e-12);
    // stationary: only the offset enters
    CHECK(horizontal_af(s, 0.17, -0.3, energy) == horizontal_af(s, 0.17, -0.3, energy));
    CHECK_THROWS_AS(horizontal_af(s, 2.5, -0.3, energy), config_error);
}

TEST_CASE("vertical af symmetry and diagonal") {
    UpaGeometry g(8, 24, 6);
    auto part = make_partition(VerticalPrior{}, 4);
    GroupingPattern pat(8, 4);
    pat.group_of = {0, 1, 2, 3, 3, 2, 1, 0};
    for (const AnalogBeamMatrix& f :
         {build_group_beam_matrix(part, pat, g), wide_beam_matrix(VerticalPrior{}, g),
          random_beam_matrix(g, 9)}) {
        const double p1 = std::asin(-0.41), p2 = std::asin(-0.12);
        cd x12 = vertical_af(f, 0.2, p1, p2);
        cd x21 = vertical_af(f, 0.2, p2, p1);
        CHECK(std::abs(x12 - std::conj(x21)) < 1e-9);
        cd diag = vertical_af(f, 0.2, p1, p1);
        CHECK(diag.imag() == Catch::Approx(0.0).margin(1e-9));
        CHECK(diag.real() >= 0.0);
        VectorXcd c = f.apply(array_response(0.2, p1, f.geom));
        CHECK(diag.real() == Catch::Approx(c.squaredNorm()).epsilon(1e-9));
    }
}

TEST_CASE("grouped narrow beams suppress cross-interval ambiguity") {
    UpaGeometry g(8, 36, 12);
    auto part = make_partition(VerticalPrior{}, 4);
    AnalogBeamMatrix f = build_group_beam_matrix(part, uniform_pattern(8, 4), g);
    const double p1 = std::asin(part.centers[0]);
    const double p2 = std::asin(part.centers[3]);
    const double ratio = std::abs(vertical_af(f, 0.0, p1, p2)) /
                         std::abs(vertical_af(f, 0.0, p1, p1));
    CHECK(ratio < 0.3);
}

TEST_CASE("fim matches the finite-difference oracle") {
    Rng rng(314);
    for (int trial = 0; trial < 30; ++trial) {
        FimParams p;
        const int ny = 8 + static_cast<int>(rng.u64() % 9);
        p.s_g = random_columns(ny, rng);
        p.phi_g = std::asin(rng.uniform(-0.45, -0.05));
        p.t = 2;
        p.beam = narrow_beam(std::sin(p.phi_g), 6);
        p.sin_theta_1 = rng.uniform(-0.4, 0.4);
        p.sin_theta_2 = rng.uniform(-0.4, 0.4);
        p.alpha_1 = cd(rng.normal(), rng.normal());
        p.alpha_2 = cd(rng.normal(), rng.normal());
        p.noise_var = 0.0324;

        Matrix6d j = fim(p);
        Matrix6d jfd = oracles::fim_fd(p);
        CHECK(oracles::max_hybrid_rel_err(j, jfd) < 1e-4);

        CHECK((j - j.transpose()).cwiseAbs().maxCoeff() < 1e-9 * j.cwiseAbs().maxCoeff());
        Eigen::SelfAdjointEigenSolver<Matrix6d> es(j);
        CHECK(es.eigenvalues()[0] >= -1e-9 * j.norm());

        // noise variance only scales the matrix
        FimParams p2 = p;
        p2.noise_var = 3.0 * p.noise_var;
        CHECK((fim(p2) * 3.0 - j).cwiseAbs().maxCoeff() < 1e-9 * j.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("fim (1,2) element closed form") {
    FimParams p;
    p.s_g = {1, 0, 1, 1, 0, 1, 1, 0, 0, 1};
    p.phi_g = std::asin(-0.22);
    p.t = 3;
    p.beam = narrow_beam(std::sin(p.phi_g), 4);
    p.sin_theta_1 = -0.13;
    p.sin_theta_2 = 0.21;
    p.alpha_1 = cd(0.7, -0.4);
    p.alpha_2 = cd(-1.1, 0.25);
    p.noise_var = 0.05;

    const double c = std::cos(p.phi_g);
    const double energy = group_beam_energy(p.beam, std::sin(p.phi_g), p.t);
    const double k_const = 2.0 * kPi * kPi * energy * c * c / p.noise_var;
    double acc = 0.0;
    for (std::size_t n = 0; n < p.s_g.size(); ++n)
        if (p.s_g[n]) {
            cd term = std::conj(p.alpha_1) * p.alpha_2 *
                      std::polar(1.0, kPi * static_cast<double>(n) *
                                          (p.sin_theta_2 - p.sin_theta_1) * c);
            acc += static_cast<double>(n) * static_cast<double>(n) * term.real();
        }
    CHECK(fim(p)(0, 1) == Catch::Approx(k_const * acc).epsilon(1e-10));
}

TEST_CASE("fim rejects degenerate inputs") {
    FimParams p;
    p.s_g = std::vector<int>(8, 0);
    p.beam = narrow_beam(-0.2, 4);
    CHECK_THROWS_AS(fim(p), dimension_error);
    p.s_g[0] = 1;
    p.noise_var = 0.0;
    CHECK_THROWS_AS(fim(p), config_error);
}

TEST_CASE("crb identities") {
    CHECK(crb_delta(Matrix6d::Identity()) == Catch::Approx(2.0));

    FimParams p;
    p.s_g = {1, 1, 0, 1, 0, 1, 1, 1};
    p.phi_g = std::asin(-0.3);
    p.t = 2;
    p.beam = narrow_beam(std::sin(p.phi_g), 6);
    p.sin_theta_1 = -0.05;
    p.sin_theta_2 = 0.05;
    p.noise_var = 0.0324;
    const double c1 = crb_delta(fim(p));
    FimParams p2 = p;
    p2.noise_var *= 2.5;
    CHECK(crb_delta(fim(p2)) == Catch::Approx(2.5 * c1).epsilon(1e-9));

    // coincident sources give a singular information matrix
    FimParams bad = p;
    bad.sin_theta_2 = bad.sin_theta_1;
    CHECK_THROWS_AS(crb_delta(fim(bad)), unresolvable_error);

    // g^T J^{-1} g with the difference selector
    Matrix6d j = fim(p);
    Eigen::Matrix<double, 6, 1> grad;
    grad << -1, 1, 0, 0, 0, 0;
    CHECK(crb_delta(j) ==
          Catch::Approx((grad.transpose() * j.inverse() * grad)(0, 0)).epsilon(1e-12));
}

TEST_CASE("srl solves the fixed point") {
    const int ny = 16, m = 6, t = 4;
    const double phi = std::asin(-0.4375);
    VectorXcd beam = narrow_beam(std::sin(phi), m);
    std::vector<int> s = {1, 0, 0, 1, 1, 0, 1, 0, 0, 1, 1, 0, 0, 1, 0, 1};
    const double nv = 0.18 * 0.18;
    const cd one(1.0, 0.0);

    const double d = srl(s, beam, phi, t, one, one, nv);
    CHECK(std::abs(resolution_gap(s, beam, phi, t, one, one, nv, d)) < 1e-8);

    // more noise, coarser resolution
    const double d2 = srl(s, beam, phi, t, one, one, 4.0 * nv);
    CHECK(d2 > d);

    // common phase rotation leaves the limit unchanged
    const cd rot = std::polar(1.0, 1.234);
    const double d3 = srl(s, beam, phi, t, rot, rot, nv);
    CHECK(d3 == Catch::Approx(d).epsilon(1e-9));

    CHECK_THROWS_AS(srl(s, beam, phi, t, cd(0, 0), one, nv), config_error);
    // bracket with no sign change: upper end below the achievable limit
    CHECK_THROWS_AS(srl(s, beam, phi, t, one, one, nv, 1e-4, 1e-3), srl_range_error);
    (void)ny;
}

TEST_CASE("srl agrees with a dense sweep and favours spread patterns") {
    const int ny = 64, m = 12, t = 6;
    const double phi = std::asin(-0.4375);
    VectorXcd beam = narrow_beam(std::sin(phi), m);
    const double nv = 0.18 * 0.18;
    const cd one(1.0, 0.0);

    std::vector<int> uniform(ny, 0);
    for (int n = 0; n < 16; ++n) uniform[static_cast<std::size_t>(n)] = 1;
    const double d_uniform = srl(uniform, beam, phi, t, one, one, nv);

    // dense sweep oracle: first sign change of the gap on a fine grid
    double bracket_lo = 1e-4, bracket_hi = 1.0;
    const int steps = 20000;
    for (int i = 1; i <= steps; ++i) {
        const double d = 1e-4 + (1.0 - 1e-4) * i / steps;
        if (resolution_gap(uniform, beam, phi, t, one, one, nv, d) > 0.0) {
            bracket_hi = d;
            bracket_lo = d - (1.0 - 1e-4) / steps;
            break;
        }
    }
    CHECK(d_uniform >= bracket_lo);
    CHECK(d_uniform <= bracket_hi);

    Rng rng(11);
    int better = 0;
    const int trials = 20;
    for (int trial = 0; trial < trials; ++trial) {
        std::vector<int> s(ny, 0);
        int placed = 0;
        while (placed < 16) {
            int n = static_cast<int>(rng.u64() % ny);
            if (!s[static_cast<std::size_t>(n)]) {
                s[static_cast<std::size_t>(n)] = 1;
                ++placed;
            }
        }
        if (srl(s, beam, phi, t, one, one, nv) < d_uniform) ++better;
    }
    CHECK(better >= trials * 3 / 4);
}
