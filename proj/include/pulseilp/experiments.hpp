#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

#include "pulseilp/dynamics.hpp"
#include "pulseilp/instance.hpp"
#include "pulseilp/oracle.hpp"
#include "pulseilp/rng.hpp"
#include "pulseilp/stats.hpp"

namespace pulseilp {

// Batch studies over planted instances:
//   - success-rate grids over (m, n, r) conditions, impulse vs randomize
//   - time-to-solution distributions with right-censoring at the budget
//   - basin-of-attraction size estimates under the pure (escape-free) flow
//   - basin location statistics (per-dimension t-tests, correlation screen)
//
// Every per-trial seed is a pure function of (base_seed, condition, trial),
// so any single trial can be reproduced in isolation and results do not
// depend on scheduling. Workers only ever write to their own index-addressed
// slots; aggregation happens after the parallel phase in index order, which
// makes every report bit-identical for any thread count.

// --- deterministic parallel fan-out ----------------------------------------

inline unsigned normalize_thread_count(unsigned threads) {
    if (threads != 0) return threads;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

// Runs fn(0..count-1), possibly concurrently. The callable must confine its
// writes to per-index state. The first exception thrown by any index is
// rethrown to the caller after all workers drain.
inline void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
    threads = normalize_thread_count(threads);
    if (threads <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mu;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count || failed.load(std::memory_order_relaxed)) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mu);
                    if (!first_error) first_error = std::current_exception();
                    failed.store(true, std::memory_order_relaxed);
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

// --- seed derivation tags ---------------------------------------------------

namespace seedtag {
constexpr std::uint64_t kGrid = 0xA1;
constexpr std::uint64_t kTts = 0xA2;
constexpr std::uint64_t kBasin = 0xA3;
constexpr std::uint64_t kLocate = 0xA4;
constexpr std::uint64_t kInstance = 1;
constexpr std::uint64_t kSolver = 2;
constexpr std::uint64_t kPoint = 3;
}  // namespace seedtag

struct Condition {
    std::size_t m = 1;
    std::size_t n = 1;
    std::int64_t r = 1;
    bool operator==(const Condition&) const = default;
};

// --- success-rate grid -------------------------------------------------------

struct GridSpec {
    std::vector<std::size_t> m_values;
    std::vector<std::size_t> n_values;
    std::vector<std::int64_t> r_values;
    std::size_t trials = 1;
    std::uint64_t base_seed = 0;
    // Solver prototype; seed/init/trace fields are overwritten per trial.
    SolverConfig solver;
};

struct GridCell {
    Condition cond;
    std::size_t trials = 0;
    std::size_t solved = 0;
    std::size_t diverged = 0;  // NaN/inf blow-ups, counted as failures
    double success_rate = 0.0;
};

struct GridResult {
    std::vector<GridCell> cells;  // ordered by (m, n, r) axis order
};

// Seed for one grid trial; escape mode is deliberately absent so that runs
// with different escapes see identical instances and starting points.
inline std::uint64_t grid_trial_seed(std::uint64_t base, const Condition& c, std::size_t trial) {
    return derive_seed(base, {seedtag::kGrid, c.m, c.n, static_cast<std::uint64_t>(c.r), trial});
}

inline GridResult run_success_grid(const GridSpec& spec, unsigned threads = 0) {
    if (spec.m_values.empty() || spec.n_values.empty() || spec.r_values.empty() || spec.trials < 1) {
        throw DimensionError("grid needs non-empty axes and trials >= 1");
    }
    std::vector<Condition> conds;
    for (std::size_t m : spec.m_values) {
        for (std::size_t n : spec.n_values) {
            for (std::int64_t r : spec.r_values) {
                conds.push_back(Condition{m, n, r});
            }
        }
    }
    const std::size_t total = conds.size() * spec.trials;
    // 0 = unsolved, 1 = solved, 2 = diverged
    std::vector<std::uint8_t> outcome(total, 0);
    parallel_for(total, threads, [&](std::size_t idx) {
        const Condition& c = conds[idx / spec.trials];
        const std::size_t trial = idx % spec.trials;
        const std::uint64_t ts = grid_trial_seed(spec.base_seed, c, trial);
        const Planted planted = generate_planted(
            GenSpec{c.m, c.n, c.r, derive_seed(ts, {seedtag::kInstance})});
        SolverConfig cfg = spec.solver;
        cfg.seed = derive_seed(ts, {seedtag::kSolver});
        cfg.init.clear();
        cfg.record_trace = false;
        cfg.impulse_log = nullptr;
        try {
            const SolveResult r = solve(planted.instance, cfg);
            outcome[idx] = r.status == SolveStatus::Solved ? 1 : 0;
        } catch (const DivergenceError&) {
            outcome[idx] = 2;
        }
    });
    GridResult res;
    res.cells.resize(conds.size());
    for (std::size_t ci = 0; ci < conds.size(); ++ci) {
        GridCell& cell = res.cells[ci];
        cell.cond = conds[ci];
        cell.trials = spec.trials;
        for (std::size_t t = 0; t < spec.trials; ++t) {
            const std::uint8_t o = outcome[ci * spec.trials + t];
            if (o == 1) ++cell.solved;
            if (o == 2) ++cell.diverged;
        }
        cell.success_rate = static_cast<double>(cell.solved) / static_cast<double>(cell.trials);
    }
    return res;
}

// --- time to solution --------------------------------------------------------

struct TtsSpec {
    Condition cond;
    std::size_t trials = 500;
    std::size_t budget = 2000;
    std::size_t bins = 100;
    std::uint64_t base_seed = 0;
    SolverConfig solver;  // max_iters is overridden by budget
};

struct TtsReport {
    TtsSpec spec;
    std::size_t solved = 0;
    std::size_t unsolved = 0;
    // Per trial: iteration of solution, right-censored at the budget for
    // unsolved trials (flagged false in `solved_flags`).
    std::vector<std::size_t> iterations;
    std::vector<std::uint8_t> solved_flags;
    double censored_median = 0.0;  // over all trials, unsolved at budget
    double censored_mean = 0.0;
    std::vector<std::size_t> histogram;  // solved iterations over [0, budget]
    // Cumulative success curve sampled at bin edges: fraction of trials
    // solved within t, for t = k * budget / bins.
    std::vector<double> cumulative;
};

inline TtsReport run_time_to_solution(const TtsSpec& spec, unsigned threads = 0) {
    if (spec.trials < 1 || spec.bins < 1 || spec.budget < 1) {
        throw DimensionError("time-to-solution needs trials, bins, budget >= 1");
    }
    TtsReport rep;
    rep.spec = spec;
    rep.iterations.assign(spec.trials, 0);
    rep.solved_flags.assign(spec.trials, 0);
    parallel_for(spec.trials, threads, [&](std::size_t trial) {
        const std::uint64_t ts = derive_seed(
            spec.base_seed,
            {seedtag::kTts, spec.cond.m, spec.cond.n, static_cast<std::uint64_t>(spec.cond.r), trial});
        const Planted planted = generate_planted(
            GenSpec{spec.cond.m, spec.cond.n, spec.cond.r, derive_seed(ts, {seedtag::kInstance})});
        SolverConfig cfg = spec.solver;
        cfg.max_iters = spec.budget;
        cfg.seed = derive_seed(ts, {seedtag::kSolver});
        cfg.init.clear();
        cfg.record_trace = false;
        cfg.impulse_log = nullptr;
        try {
            const SolveResult r = solve(planted.instance, cfg);
            if (r.status == SolveStatus::Solved) {
                rep.iterations[trial] = r.iterations;
                rep.solved_flags[trial] = 1;
            } else {
                rep.iterations[trial] = spec.budget;
            }
        } catch (const DivergenceError&) {
            rep.iterations[trial] = spec.budget;  // censored, like unsolved
        }
    });
    std::vector<double> censored(spec.trials);
    for (std::size_t t = 0; t < spec.trials; ++t) {
        censored[t] = static_cast<double>(rep.iterations[t]);
        if (rep.solved_flags[t]) ++rep.solved;
    }
    rep.unsolved = spec.trials - rep.solved;
    rep.censored_median = median(censored);
    rep.censored_mean = mean(censored);
    rep.histogram.assign(spec.bins, 0);
    for (std::size_t t = 0; t < spec.trials; ++t) {
        if (!rep.solved_flags[t]) continue;
        std::size_t bin = rep.iterations[t] * spec.bins / spec.budget;
        if (bin >= spec.bins) bin = spec.bins - 1;
        ++rep.histogram[bin];
    }
    rep.cumulative.assign(spec.bins + 1, 0.0);
    for (std::size_t k = 0; k <= spec.bins; ++k) {
        const double edge = static_cast<double>(k) * static_cast<double>(spec.budget) /
                            static_cast<double>(spec.bins);
        std::size_t within = 0;
        for (std::size_t t = 0; t < spec.trials; ++t) {
            if (rep.solved_flags[t] && static_cast<double>(rep.iterations[t]) <= edge) ++within;
        }
        rep.cumulative[k] = static_cast<double>(within) / static_cast<double>(spec.trials);
    }
    return rep;
}

// --- basin-of-attraction estimation -----------------------------------------

struct BasinSpec {
    Condition cond;
    std::size_t trials = 100;
    std::size_t points = 100;
    std::size_t budget = 1000;
    std::uint64_t base_seed = 0;
    SolverConfig solver;  // escape is forced to None; basin = property of the raw flow
};

struct BasinReport {
    BasinSpec spec;
    std::vector<double> per_trial_fraction;
    double basin_fraction = 0.0;   // mean over trials
    double ratio_vs_discrete = 0.0;  // basin_fraction * 2^n
};

namespace detail {

// Casts `points` uniform starts on one instance and descends each with the
// escape-free flow; returns the in-basin flags. Used by both basin studies.
// A start is in the basin iff the descent reaches a verified solution within
// the budget. x0_out, when given, receives every start (hit or miss).
inline std::vector<std::uint8_t> cast_and_descend(const SignedInstance& si, std::size_t points,
                                                  std::size_t budget, const SolverConfig& proto,
                                                  std::uint64_t trial_seed,
                                                  std::vector<std::vector<double>>* x0_out) {
    std::vector<std::uint8_t> hit(points, 0);
    if (x0_out) x0_out->assign(points, {});
    for (std::size_t p = 0; p < points; ++p) {
        const std::uint64_t ps = derive_seed(trial_seed, {seedtag::kPoint, p});
        Rng prng(ps);
        std::vector<double> x0(si.n());
        for (double& v : x0) v = prng.uniform01();
        if (x0_out) (*x0_out)[p] = x0;
        SolverConfig cfg = proto;
        cfg.escape = EscapeMode::None;
        cfg.max_iters = budget;
        cfg.seed = ps;
        cfg.init = std::move(x0);
        cfg.record_trace = false;
        cfg.impulse_log = nullptr;
        try {
            const SolveResult r = solve(si, cfg);
            hit[p] = r.status == SolveStatus::Solved ? 1 : 0;
        } catch (const DivergenceError&) {
            hit[p] = 0;
        }
    }
    return hit;
}

}  // namespace detail

inline std::uint64_t basin_trial_seed(std::uint64_t base, const Condition& c, std::size_t trial,
                                      std::uint64_t tag) {
    return derive_seed(base, {tag, c.m, c.n, static_cast<std::uint64_t>(c.r), trial});
}

inline BasinReport estimate_basin(const BasinSpec& spec, unsigned threads = 0) {
    if (spec.trials < 1 || spec.points < 1) {
        throw DimensionError("basin estimation needs trials, points >= 1");
    }
    BasinReport rep;
    rep.spec = spec;
    rep.per_trial_fraction.assign(spec.trials, 0.0);
    parallel_for(spec.trials, threads, [&](std::size_t trial) {
        const std::uint64_t ts = basin_trial_seed(spec.base_seed, spec.cond, trial, seedtag::kBasin);
        const Planted planted = generate_planted(
            GenSpec{spec.cond.m, spec.cond.n, spec.cond.r, derive_seed(ts, {seedtag::kInstance})});
        const SignedInstance si = normalize_signs(planted.instance);
        const auto hits = detail::cast_and_descend(si, spec.points, spec.budget, spec.solver, ts, nullptr);
        std::size_t in = 0;
        for (std::uint8_t h : hits) in += h;
        rep.per_trial_fraction[trial] = static_cast<double>(in) / static_cast<double>(spec.points);
    });
    rep.basin_fraction = mean(rep.per_trial_fraction);
    rep.ratio_vs_discrete = rep.basin_fraction * std::pow(2.0, static_cast<double>(spec.cond.n));
    return rep;
}

// --- basin location ----------------------------------------------------------

constexpr double kCorrelatedPairThreshold = 0.75;

// Per-trial location analysis. Kept separate from the driver so synthetic
// point clouds can be pushed through the identical code path in tests.
struct TrialLocation {
    std::size_t in_basin = 0;
    bool skipped = false;  // fewer than 3 in-basin points: excluded from tests
    std::vector<double> dim_mean;
    std::vector<double> dim_sd;
    std::vector<std::uint8_t> dim_deviates;  // t-test p < alpha_sig per dimension
    bool has_correlated_pair = false;        // any off-diagonal |r| > 0.75
};

inline TrialLocation analyze_basin_cloud(const std::vector<std::vector<double>>& cloud,
                                         std::size_t dims, double alpha_sig) {
    TrialLocation loc;
    loc.in_basin = cloud.size();
    loc.dim_mean.assign(dims, 0.0);
    loc.dim_sd.assign(dims, 0.0);
    loc.dim_deviates.assign(dims, 0);
    if (cloud.size() < 3) {
        loc.skipped = true;
        return loc;
    }
    std::vector<double> coord(cloud.size());
    for (std::size_t j = 0; j < dims; ++j) {
        for (std::size_t i = 0; i < cloud.size(); ++i) coord[i] = cloud[i][j];
        const TTestResult tt = t_test_one_sample(coord, 0.5);
        loc.dim_mean[j] = tt.sample_mean;
        loc.dim_sd[j] = tt.sample_sd;
        loc.dim_deviates[j] = tt.p < alpha_sig ? 1 : 0;
    }
    const auto corr = pearson_matrix(cloud);
    for (std::size_t a = 0; a < dims && !loc.has_correlated_pair; ++a) {
        for (std::size_t b = a + 1; b < dims; ++b) {
            if (std::fabs(corr[a][b]) > kCorrelatedPairThreshold) {
                loc.has_correlated_pair = true;
                break;
            }
        }
    }
    return loc;
}

struct LocateSpec {
    Condition cond;
    std::size_t trials = 50;
    std::size_t points = 1000;
    double alpha_sig = 0.05;
    std::size_t budget = 1000;
    std::uint64_t base_seed = 0;
    SolverConfig solver;  // escape forced to None, as in estimate_basin
};

struct LocationReport {
    LocateSpec spec;
    std::size_t tested_trials = 0;
    std::size_t skipped_trials = 0;
    std::vector<std::size_t> per_dimension_deviation_count;  // over tested trials
    std::size_t correlated_pair_trials = 0;
    std::vector<TrialLocation> trial_summaries;
};

inline LocationReport locate_basin(const LocateSpec& spec, unsigned threads = 0) {
    if (spec.trials < 1 || spec.points < 1) {
        throw DimensionError("basin location needs trials, points >= 1");
    }
    LocationReport rep;
    rep.spec = spec;
    rep.trial_summaries.assign(spec.trials, {});
    rep.per_dimension_deviation_count.assign(spec.cond.n, 0);
    parallel_for(spec.trials, threads, [&](std::size_t trial) {
        const std::uint64_t ts = basin_trial_seed(spec.base_seed, spec.cond, trial, seedtag::kLocate);
        const Planted planted = generate_planted(
            GenSpec{spec.cond.m, spec.cond.n, spec.cond.r, derive_seed(ts, {seedtag::kInstance})});
        const SignedInstance si = normalize_signs(planted.instance);
        std::vector<std::vector<double>> x0;
        const auto hits = detail::cast_and_descend(si, spec.points, spec.budget, spec.solver, ts, &x0);
        std::vector<std::vector<double>> cloud;
        for (std::size_t p = 0; p < spec.points; ++p) {
            if (hits[p]) cloud.push_back(std::move(x0[p]));
        }
        rep.trial_summaries[trial] = analyze_basin_cloud(cloud, spec.cond.n, spec.alpha_sig);
    });
    for (const TrialLocation& loc : rep.trial_summaries) {
        if (loc.skipped) {
            ++rep.skipped_trials;
            continue;
        }
        ++rep.tested_trials;
        for (std::size_t j = 0; j < spec.cond.n; ++j) {
            if (loc.dim_deviates[j]) ++rep.per_dimension_deviation_count[j];
        }
        if (loc.has_correlated_pair) ++rep.correlated_pair_trials;
    }
    return rep;
}

}  // namespace pulseilp
