// SPDX-License-Identifier: Apache-2.0
//
// Estimation-of-distribution search over antenna grouping patterns:
// minimize the maximum per-group sidelobe level subject to per-group
// resolution-limit bounds, with elitist probability-matrix resampling.

#ifndef GWBEAM_EDA_HPP
#define GWBEAM_EDA_HPP

#include <unordered_map>

#include "gwbeam/metrics.hpp"

namespace gwbeam {

using Eigen::MatrixXd;

struct FimSetup {
    std::vector<VectorXcd> beams; // per-group compression vector
    std::vector<double> phi;      // per-group elevation, radians
    int t = 1;
    cd alpha_1{1.0, 0.0};
    cd alpha_2{1.0, 0.0};
    double noise_var = 0.18 * 0.18;
};

inline FimSetup make_fim_setup(const SubIntervalPartition& part,
                               const UpaGeometry& geom, double sigma = 0.18) {
    FimSetup s;
    s.t = geom.t();
    s.noise_var = sigma * sigma;
    for (int g = 0; g < part.g; ++g) {
        s.beams.push_back(narrow_beam(part.centers[g], geom.m));
        s.phi.push_back(std::asin(part.centers[g]));
    }
    return s;
}

inline double fitness(const GroupingPattern& pattern,
                      const std::vector<IslKernel>& kernels) {
    if (static_cast<int>(kernels.size()) != pattern.g)
        throw dimension_error("one kernel per group required");
    double worst = 0.0;
    for (int g = 0; g < pattern.g; ++g) {
        auto cols = pattern.columns_of(g);
        if (cols.empty()) return std::numeric_limits<double>::infinity();
        worst = std::max(worst, isl_columns(cols, kernels[static_cast<std::size_t>(g)]));
    }
    return worst;
}

// Memoizes the two pattern metrics per (group, column subset). Subsets recur
// constantly during EDA resampling, so the cache carries most of the load.
class PatternEvaluator {
  public:
    PatternEvaluator(std::vector<IslKernel> kernels, FimSetup setup)
        : kernels_(std::move(kernels)), setup_(std::move(setup)),
          memo_(kernels_.size()) {
        if (kernels_.size() != setup_.beams.size())
            throw dimension_error("kernel/beam count mismatch");
    }

    int groups() const { return static_cast<int>(kernels_.size()); }
    const std::vector<IslKernel>& kernels() const { return kernels_; }
    const FimSetup& setup() const { return setup_; }

    double group_isl(const GroupingPattern& pattern, int g) const {
        return entry(pattern, g).first;
    }

    // +inf when the group cannot be resolved inside the search range;
    // d_min when it is already resolvable at the lower end.
    double group_srl(const GroupingPattern& pattern, int g) const {
        return entry(pattern, g).second;
    }

    double fitness(const GroupingPattern& pattern) const {
        double worst = 0.0;
        for (int g = 0; g < pattern.g; ++g) {
            if (pattern.count(g) == 0)
                return std::numeric_limits<double>::infinity();
            worst = std::max(worst, group_isl(pattern, g));
        }
        return worst;
    }

    bool feasible(const GroupingPattern& pattern,
                  const std::vector<double>& srl_bounds) const {
        if (static_cast<int>(srl_bounds.size()) != pattern.g)
            throw dimension_error("one srl bound per group required");
        for (int g = 0; g < pattern.g; ++g) {
            if (pattern.count(g) == 0) return false;
            if (group_srl(pattern, g) > srl_bounds[static_cast<std::size_t>(g)])
                return false;
        }
        return true;
    }

  private:
    static constexpr double kDMin = 1e-4;
    static constexpr double kDMax = 1.0;

    const std::pair<double, double>& entry(const GroupingPattern& pattern,
                                           int g) const {
        const std::uint64_t key = pattern.column_mask(g);
        auto& m = memo_[static_cast<std::size_t>(g)];
        auto it = m.find(key);
        if (it != m.end()) return it->second;
        auto cols = pattern.columns_of(g);
        std::vector<int> s(static_cast<std::size_t>(pattern.ny), 0);
        for (int c : cols) s[static_cast<std::size_t>(c)] = 1;
        const auto& beam = setup_.beams[static_cast<std::size_t>(g)];
        const double phi = setup_.phi[static_cast<std::size_t>(g)];
        double r;
        try {
            r = srl(s, beam, phi, setup_.t, setup_.alpha_1, setup_.alpha_2,
                    setup_.noise_var, kDMin, kDMax);
        } catch (const srl_range_error&) {
            const double glo = resolution_gap(s, beam, phi, setup_.t,
                                              setup_.alpha_1, setup_.alpha_2,
                                              setup_.noise_var, kDMin);
            r = glo >= 0.0 ? kDMin : std::numeric_limits<double>::infinity();
        }
        const double i = isl_columns(cols, kernels_[static_cast<std::size_t>(g)]);
        return m.emplace(key, std::make_pair(i, r)).first->second;
    }

    std::vector<IslKernel> kernels_;
    FimSetup setup_;
    mutable std::vector<std::unordered_map<std::uint64_t, std::pair<double, double>>>
        memo_;
};

inline bool check_feasible(const GroupingPattern& pattern,
                           const std::vector<double>& srl_bounds,
                           const PatternEvaluator& eval) {
    return eval.feasible(pattern, srl_bounds);
}

struct EdaConfig {
    int q = 200;
    int t = 40;
    int i_max = 50;
    std::vector<double> srl_bounds;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(1 <= t && t < q)) throw config_error("elite count must satisfy 1 <= T < Q");
        if (i_max < 1) throw config_error("iteration cap must be >= 1");
        for (double r : srl_bounds)
            if (!(r > 0.0)) throw config_error("srl bounds must be positive");
    }
};

struct Individual {
    GroupingPattern pattern;
    double fitness = std::numeric_limits<double>::infinity();
    bool feasible = false;
};

struct ProbabilityMatrix {
    MatrixXd p; // ny x g, entries in [0,1]
};

inline ProbabilityMatrix initial_probability(int ny, int g) {
    ProbabilityMatrix pm;
    pm.p = MatrixXd::Constant(ny, g, 1.0 / g);
    return pm;
}

inline bool pattern_less(const GroupingPattern& a, const GroupingPattern& b) {
    return a.group_of < b.group_of;
}

inline std::vector<Individual> select_elite(std::vector<Individual> population,
                                            int t) {
    if (static_cast<int>(population.size()) < t)
        throw config_error("elite count exceeds population");
    std::sort(population.begin(), population.end(),
              [](const Individual& a, const Individual& b) {
                  if (a.fitness != b.fitness) return a.fitness < b.fitness;
                  return pattern_less(a.pattern, b.pattern);
              });
    population.resize(static_cast<std::size_t>(t));
    return population;
}

inline ProbabilityMatrix update_probability(const std::vector<Individual>& elite) {
    if (elite.empty()) throw config_error("elite set is empty");
    const int ny = elite[0].pattern.ny, g = elite[0].pattern.g;
    ProbabilityMatrix pm;
    pm.p = MatrixXd::Zero(ny, g);
    for (const auto& ind : elite)
        for (int n = 0; n < ny; ++n)
            if (ind.pattern.group_of[static_cast<std::size_t>(n)] >= 0)
                pm.p(n, ind.pattern.group_of[static_cast<std::size_t>(n)]) += 1.0;
    pm.p /= static_cast<double>(elite.size());
    return pm;
}

// One categorical draw per row: group g with weight p(n,g), unassigned with
// the leftover mass. Keeps the row-sum constraint by construction.
inline GroupingPattern sample_pattern(const ProbabilityMatrix& pm, Rng& rng) {
    const int ny = static_cast<int>(pm.p.rows()), g = static_cast<int>(pm.p.cols());
    GroupingPattern pat(ny, g);
    for (int n = 0; n < ny; ++n) {
        double total = 0.0;
        for (int k = 0; k < g; ++k) total += pm.p(n, k);
        const double unassigned = std::max(0.0, 1.0 - total);
        double u = rng.uniform() * (total + unassigned);
        int pick = -1;
        for (int k = 0; k < g; ++k) {
            if (u < pm.p(n, k)) {
                pick = k;
                break;
            }
            u -= pm.p(n, k);
        }
        pat.group_of[static_cast<std::size_t>(n)] = pick;
    }
    return pat;
}

// Move one random column from a multi-column group (or the unassigned pool)
// into each empty group.
inline void repair_empty_groups(GroupingPattern& pat, Rng& rng) {
    for (int g = 0; g < pat.g; ++g) {
        if (pat.count(g) > 0) continue;
        std::vector<int> movable;
        for (int n = 0; n < pat.ny; ++n) {
            const int cur = pat.group_of[static_cast<std::size_t>(n)];
            if (cur < 0 || pat.count(cur) >= 2) movable.push_back(n);
        }
        if (movable.empty()) return;
        const int n = movable[static_cast<std::size_t>(
            rng.u64() % movable.size())];
        pat.group_of[static_cast<std::size_t>(n)] = g;
    }
}

// Draws until a feasible pattern appears; after exhausting the attempt
// budget (concentrated marginals can make joint feasibility rare) the last
// draw is repaired, and if that still violates the bounds the provided
// fallback individual is cloned rather than aborting the whole search.
inline Individual sample_individual(const ProbabilityMatrix& pm,
                                    const std::vector<double>& srl_bounds,
                                    const PatternEvaluator& eval, Rng& rng,
                                    int max_attempts = 100,
                                    const Individual* fallback = nullptr) {
    GroupingPattern pat;
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        pat = sample_pattern(pm, rng);
        if (eval.feasible(pat, srl_bounds))
            return Individual{pat, eval.fitness(pat), true};
    }
    repair_empty_groups(pat, rng);
    if (eval.feasible(pat, srl_bounds))
        return Individual{pat, eval.fitness(pat), true};
    if (fallback && fallback->feasible) return *fallback;
    throw sampling_error("no feasible individual after resampling and repair");
}

struct EdaResult {
    Individual best;
    std::vector<double> trace; // best-ever fitness after each iteration
};

inline EdaResult run_eda(const EdaConfig& config, const PatternEvaluator& eval,
                         int ny) {
    config.validate();
    if (static_cast<int>(config.srl_bounds.size()) != eval.groups())
        throw config_error("one srl bound per group required");
    Rng rng(config.seed);
    const int g = eval.groups();
    ProbabilityMatrix pm = initial_probability(ny, g);

    // Initial population by rejection from the uniform matrix; bail out if
    // the constraint set looks empty.
    std::vector<Individual> pop;
    pop.reserve(static_cast<std::size_t>(config.q));
    int draws = 0;
    while (static_cast<int>(pop.size()) < config.q) {
        GroupingPattern pat = sample_pattern(pm, rng);
        ++draws;
        if (eval.feasible(pat, config.srl_bounds)) {
            pop.push_back(Individual{pat, eval.fitness(pat), true});
        } else if (pop.empty() && draws >= 10000) {
            throw sampling_error("no feasible individual in 10000 draws");
        } else if (draws >= 1000000) {
            throw sampling_error("could not fill the initial population");
        } else if (draws >= 100 * config.q && !pop.empty()) {
            repair_empty_groups(pat, rng);
            if (eval.feasible(pat, config.srl_bounds))
                pop.push_back(Individual{pat, eval.fitness(pat), true});
        }
    }

    EdaResult result;
    for (int iter = 0; iter < config.i_max; ++iter) {
        for (const auto& ind : pop) {
            if (!result.best.feasible || ind.fitness < result.best.fitness ||
                (ind.fitness == result.best.fitness && result.best.feasible &&
                 pattern_less(ind.pattern, result.best.pattern)))
                result.best = ind;
        }
        result.trace.push_back(result.best.fitness);
        if (iter + 1 == config.i_max) break;
        auto elite = select_elite(pop, config.t);
        pm = update_probability(elite);
        pop.clear();
        pop.push_back(result.best);
        while (static_cast<int>(pop.size()) < config.q)
            pop.push_back(sample_individual(pm, config.srl_bounds, eval, rng,
                                            100, &result.best));
    }
    return result;
}

// Per-group bound = slack * median resolution limit over random patterns
// with all groups nonempty.
inline std::vector<double> calibrate_srl_bounds(const PatternEvaluator& eval,
                                                int ny, int n_patterns = 200,
                                                double slack = 1.1,
                                                std::uint64_t seed = 0x5eedb0) {
    Rng rng(seed);
    const int g = eval.groups();
    ProbabilityMatrix pm = initial_probability(ny, g);
    std::vector<std::vector<double>> vals(static_cast<std::size_t>(g));
    int found = 0, draws = 0;
    while (found < n_patterns) {
        GroupingPattern pat = sample_pattern(pm, rng);
        if (++draws > 100 * n_patterns)
            throw sampling_error("could not collect calibration patterns");
        if (!pat.all_groups_nonempty()) continue;
        ++found;
        for (int k = 0; k < g; ++k)
            vals[static_cast<std::size_t>(k)].push_back(eval.group_srl(pat, k));
    }
    std::vector<double> bounds(static_cast<std::size_t>(g));
    for (int k = 0; k < g; ++k) {
        auto& v = vals[static_cast<std::size_t>(k)];
        std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
        bounds[static_cast<std::size_t>(k)] = slack * v[v.size() / 2];
    }
    return bounds;
}

} // namespace gwbeam

#endif // GWBEAM_EDA_HPP
