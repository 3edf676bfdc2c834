// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include "gwbeam/eda.hpp"

using namespace gwbeam;

namespace {

PatternEvaluator desk_evaluator(int ny, int m, int t, int groups) {
    UpaGeometry geom(ny, m * t, m);
    auto part = make_partition(VerticalPrior{}, groups);
    std::vector<IslKernel> kernels;
    for (int g = 0; g < groups; ++g)
        kernels.push_back(
            make_isl_kernel(std::asin(part.centers[g]), ny, default_region(ny)));
    return PatternEvaluator(kernels, make_fim_setup(part, geom));
}

GroupingPattern from_labels(std::vector<int> labels, int groups) {
    GroupingPattern p(static_cast<int>(labels.size()), groups);
    p.group_of = std::move(labels);
    return p;
}

} // namespace

TEST_CASE("fitness is the worst group's sidelobe level") {
    const int ny = 12;
    auto kernel = make_isl_kernel(-0.25, ny, default_region(ny));
    std::vector<IslKernel> kernels = {kernel, kernel};

    auto pat = from_labels({0, 0, 1, 1, 0, 1, 0, 1, 1, 0, 0, 1}, 2);
    const double f = fitness(pat, kernels);
    CHECK(f == Catch::Approx(std::max(isl_columns(pat.columns_of(0), kernel),
                                      isl_columns(pat.columns_of(1), kernel))));

    // identical kernels: swapping group labels changes nothing
    auto swapped = pat;
    for (auto& g : swapped.group_of) g = 1 - g;
    CHECK(fitness(swapped, kernels) == Catch::Approx(f));

    // single group over everything equals the full-array value
    std::vector<IslKernel> one = {kernel};
    auto all = from_labels(std::vector<int>(ny, 0), 1);
    std::vector<int> s(ny, 1);
    CHECK(fitness(all, one) == Catch::Approx(isl(s, kernel)));

    // an empty group marks the pattern infeasible
    auto hole = from_labels(std::vector<int>(ny, 0), 2);
    CHECK(std::isinf(fitness(hole, kernels)));
}

TEST_CASE("exhaustive minimum agrees with an independent brute force") {
    const int ny = 10;
    const double phi = -0.25;
    auto kernel = make_isl_kernel(phi, ny, default_region(ny));
    std::vector<IslKernel> kernels = {kernel, kernel};

    // brute force with a dense Toeplitz quadratic form built from scratch
    Eigen::MatrixXd v(ny, ny);
    const double c = std::cos(phi), a = 4.0 / ny, b = 1.0;
    for (int i = 0; i < ny; ++i)
        for (int j = 0; j < ny; ++j) {
            const int n = std::abs(i - j);
            v(i, j) = n == 0 ? 2.0 * (b - a)
                             : 2.0 * (std::sin(n * kPi * c * b) - std::sin(n * kPi * c * a)) /
                                   (n * kPi * c);
        }
    auto brute_isl = [&](const std::vector<int>& bits) {
        Eigen::VectorXd s(ny);
        double count = 0.0;
        for (int i = 0; i < ny; ++i) {
            s[i] = bits[static_cast<std::size_t>(i)];
            count += s[i];
        }
        return (s.transpose() * v * s)(0, 0) / (2.0 * (b - a) * count * count);
    };

    double best_brute = std::numeric_limits<double>::infinity();
    double best_lib = std::numeric_limits<double>::infinity();
    std::vector<int> labels(ny);
    const long total = static_cast<long>(std::pow(3.0, ny));
    for (long code = 0; code < total; ++code) {
        long rem = code;
        std::vector<int> bits0(ny, 0), bits1(ny, 0);
        bool g0 = false, g1 = false;
        for (int i = 0; i < ny; ++i) {
            const int d = static_cast<int>(rem % 3);
            rem /= 3;
            labels[static_cast<std::size_t>(i)] = d - 1;
            if (d == 1) bits0[static_cast<std::size_t>(i)] = 1, g0 = true;
            if (d == 2) bits1[static_cast<std::size_t>(i)] = 1, g1 = true;
        }
        if (!g0 || !g1) continue;
        best_brute = std::min(best_brute,
                              std::max(brute_isl(bits0), brute_isl(bits1)));
        auto pat = from_labels(labels, 2);
        best_lib = std::min(best_lib, fitness(pat, kernels));
    }
    CHECK(best_lib == Catch::Approx(best_brute).epsilon(1e-9));
}

TEST_CASE("feasibility follows the resolution bounds") {
    auto eval = desk_evaluator(12, 6, 2, 2);
    auto pat = from_labels({0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1}, 2);
    const double big = std::numeric_limits<double>::max();
    CHECK(check_feasible(pat, {big, big}, eval));
    CHECK_FALSE(check_feasible(pat, {1e-12, 1e-12}, eval));

    auto hole = from_labels(std::vector<int>(12, 0), 2);
    CHECK_FALSE(check_feasible(hole, {big, big}, eval));
}

TEST_CASE("elite selection orders deterministically") {
    std::vector<Individual> pop;
    for (int i = 0; i < 6; ++i) {
        Individual ind;
        ind.pattern = from_labels({i % 2, 1 - i % 2, 0, 1}, 2);
        ind.fitness = static_cast<double>(6 - i);
        ind.feasible = true;
        pop.push_back(ind);
    }
    auto elite = select_elite(pop, 3);
    REQUIRE(elite.size() == 3);
    CHECK(elite[0].fitness == 1.0);
    CHECK(elite[2].fitness <= 4.0);
    double worst_elite = elite.back().fitness;
    for (const auto& ind : pop)
        if (ind.fitness < worst_elite)
            CHECK(std::any_of(elite.begin(), elite.end(), [&](const Individual& e) {
                return e.fitness == ind.fitness;
            }));

    auto whole = select_elite(pop, static_cast<int>(pop.size()));
    CHECK(whole.size() == pop.size());

    // exact ties fall back to pattern order
    pop[0].fitness = pop[1].fitness = 0.5;
    pop[0].pattern = from_labels({1, 0, 0, 1}, 2);
    pop[1].pattern = from_labels({0, 1, 0, 1}, 2);
    auto tied = select_elite(pop, 2);
    CHECK(tied[0].pattern.group_of == std::vector<int>{0, 1, 0, 1});
}

TEST_CASE("probability update averages elite matrices") {
    Individual a, b;
    a.pattern = from_labels({0, 1, -1, 0}, 2);
    b.pattern = a.pattern;
    auto pm = update_probability({a, b});
    CHECK(pm.p(0, 0) == 1.0);
    CHECK(pm.p(1, 1) == 1.0);
    CHECK(pm.p(2, 0) == 0.0);
    CHECK(pm.p(2, 1) == 0.0);

    b.pattern.group_of[0] = 1;
    pm = update_probability({a, b});
    CHECK(pm.p(0, 0) == 0.5);
    CHECK(pm.p(0, 1) == 0.5);

    // entries are multiples of 1/T
    for (int n = 0; n < pm.p.rows(); ++n)
        for (int g = 0; g < pm.p.cols(); ++g) {
            const double scaled = pm.p(n, g) * 2.0;
            CHECK(scaled == Catch::Approx(std::round(scaled)).margin(1e-12));
        }
}

TEST_CASE("pattern sampling matches the probability matrix") {
    const int ny = 6, groups = 3;
    ProbabilityMatrix pm;
    pm.p = Eigen::MatrixXd(ny, groups);
    pm.p << 0.5, 0.3, 0.2,
            0.1, 0.1, 0.1,
            0.0, 0.0, 1.0,
            0.25, 0.25, 0.25,
            0.6, 0.0, 0.0,
            0.0, 0.9, 0.05;

    Rng rng(808);
    const int n_draws = 10000;
    Eigen::MatrixXd freq = Eigen::MatrixXd::Zero(ny, groups + 1);
    for (int i = 0; i < n_draws; ++i) {
        auto pat = sample_pattern(pm, rng);
        for (int n = 0; n < ny; ++n) {
            int g = pat.group_of[static_cast<std::size_t>(n)];
            freq(n, g < 0 ? groups : g) += 1.0;
        }
    }
    freq /= n_draws;
    for (int n = 0; n < ny; ++n) {
        double total = pm.p.row(n).sum();
        const double un = std::max(0.0, 1.0 - total);
        total += un;
        for (int g = 0; g <= groups; ++g) {
            const double expect =
                (g == groups ? un : pm.p(n, g)) / total;
            const double sd = std::sqrt(std::max(expect * (1.0 - expect), 1e-12) /
                                        n_draws);
            CHECK(std::abs(freq(n, g) - expect) <= 3.0 * sd + 1e-9);
        }
    }
}

TEST_CASE("forced assignment and row constraint") {
    ProbabilityMatrix pm;
    pm.p = Eigen::MatrixXd::Zero(4, 2);
    pm.p.col(1).setOnes();
    Rng rng(3);
    auto pat = sample_pattern(pm, rng);
    for (int n = 0; n < 4; ++n) CHECK(pat.group_of[static_cast<std::size_t>(n)] == 1);
}

TEST_CASE("individual sampling repairs empty groups when stuck") {
    auto eval = desk_evaluator(8, 6, 2, 2);
    ProbabilityMatrix pm;
    pm.p = Eigen::MatrixXd::Zero(8, 2);
    pm.p.col(0).setOnes(); // group 1 can never be drawn without repair
    Rng rng(15);
    // a repaired single-antenna group cannot resolve two sources, so only an
    // unbounded resolution constraint accepts it
    const double big = std::numeric_limits<double>::infinity();
    auto ind = sample_individual(pm, {big, big}, eval, rng, 5);
    CHECK(ind.feasible);
    CHECK(ind.pattern.count(1) >= 1);

    // unreachable bounds surface as a sampling error
    CHECK_THROWS_AS(sample_individual(pm, {1e-12, 1e-12}, eval, rng, 5),
                    sampling_error);
}

TEST_CASE("eda end to end on a small instance") {
    auto eval = desk_evaluator(12, 6, 2, 2);
    EdaConfig cfg;
    cfg.q = 60;
    cfg.t = 12;
    cfg.i_max = 12;
    cfg.seed = 4242;
    cfg.srl_bounds = calibrate_srl_bounds(eval, 12, 50, 1.1, 900);
    REQUIRE(cfg.srl_bounds.size() == 2);
    for (double r : cfg.srl_bounds) CHECK(r > 0.0);

    auto res = run_eda(cfg, eval, 12);
    REQUIRE(res.trace.size() == static_cast<std::size_t>(cfg.i_max));
    for (std::size_t i = 1; i < res.trace.size(); ++i)
        CHECK(res.trace[i] <= res.trace[i - 1]);
    CHECK(res.best.feasible);
    CHECK(res.best.fitness == res.trace.back());
    CHECK(res.best.pattern.all_groups_nonempty());
    CHECK(eval.fitness(res.best.pattern) == Catch::Approx(res.best.fitness));

    // same seed, same trace; different seed may differ
    auto res2 = run_eda(cfg, eval, 12);
    CHECK(res2.trace == res.trace);
    CHECK(res2.best.pattern.group_of == res.best.pattern.group_of);

    // a single iteration returns the best of the initial population
    EdaConfig one = cfg;
    one.i_max = 1;
    auto r1 = run_eda(one, eval, 12);
    CHECK(r1.trace.size() == 1);
    CHECK(r1.best.fitness == r1.trace[0]);
    CHECK(r1.best.fitness >= res.best.fitness);
}

TEST_CASE("config validation") {
    EdaConfig cfg;
    cfg.q = 10;
    cfg.t = 10;
    CHECK_THROWS_AS(cfg.validate(), config_error);
    cfg.t = 2;
    cfg.i_max = 0;
    CHECK_THROWS_AS(cfg.validate(), config_error);
    cfg.i_max = 5;
    cfg.srl_bounds = {0.1, -0.5};
    CHECK_THROWS_AS(cfg.validate(), config_error);
}
