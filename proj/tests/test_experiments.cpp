#include <atomic>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "catch2/catch_amalgamated.hpp"

#include "pulseilp/experiments.hpp"

using namespace pulseilp;

namespace {

bool same_grid(const GridResult& a, const GridResult& b) {
    if (a.cells.size() != b.cells.size()) return false;
    for (std::size_t i = 0; i < a.cells.size(); ++i) {
        const GridCell& x = a.cells[i];
        const GridCell& y = b.cells[i];
        if (!(x.cond == y.cond) || x.trials != y.trials || x.solved != y.solved ||
            x.diverged != y.diverged || x.success_rate != y.success_rate) {
            return false;
        }
    }
    return true;
}

bool same_tts(const TtsReport& a, const TtsReport& b) {
    return a.solved == b.solved && a.unsolved == b.unsolved && a.iterations == b.iterations &&
           a.solved_flags == b.solved_flags && a.censored_median == b.censored_median &&
           a.censored_mean == b.censored_mean && a.histogram == b.histogram &&
           a.cumulative == b.cumulative;
}

}  // namespace

TEST_CASE("parallel_for visits each index once and propagates errors", "[experiments]") {
    SECTION("coverage") {
        std::vector<std::atomic<int>> visits(100);
        parallel_for(100, 8, [&](std::size_t i) { visits[i].fetch_add(1); });
        for (const auto& v : visits) REQUIRE(v.load() == 1);
    }
    SECTION("first exception is rethrown") {
        REQUIRE_THROWS_AS(parallel_for(32, 4,
                                       [&](std::size_t i) {
                                           if (i == 7) throw std::runtime_error("boom");
                                       }),
                          std::runtime_error);
    }
    SECTION("thread count normalization") {
        REQUIRE(normalize_thread_count(5) == 5);
        REQUIRE(normalize_thread_count(0) >= 1);
    }
}

TEST_CASE("success grid is reproducible and thread invariant", "[experiments]") {
    GridSpec spec;
    spec.m_values = {2, 3};
    spec.n_values = {4, 6};
    spec.r_values = {5};
    spec.trials = 10;
    spec.base_seed = 42;
    spec.solver.max_iters = 200;
    const GridResult a = run_success_grid(spec, 1);
    const GridResult b = run_success_grid(spec, 1);
    const GridResult c = run_success_grid(spec, 4);
    REQUIRE(a.cells.size() == 4);
    REQUIRE(same_grid(a, b));
    REQUIRE(same_grid(a, c));
    for (const GridCell& cell : a.cells) {
        REQUIRE(cell.trials == 10);
        REQUIRE(cell.solved + cell.diverged <= cell.trials);
        REQUIRE(cell.success_rate == double(cell.solved) / 10.0);
    }
}

TEST_CASE("grid cells do not depend on which other cells run", "[experiments]") {
    // Trial seeds are keyed by condition, not by position in the axis lists,
    // so carving one cell out of a larger grid reproduces it exactly.
    GridSpec wide;
    wide.m_values = {3};
    wide.n_values = {4, 6};
    wide.r_values = {5};
    wide.trials = 20;
    wide.base_seed = 7;
    wide.solver.max_iters = 300;
    GridSpec narrow = wide;
    narrow.n_values = {6};
    const GridResult w = run_success_grid(wide, 2);
    const GridResult n = run_success_grid(narrow, 2);
    REQUIRE(n.cells.size() == 1);
    REQUIRE(w.cells[1].cond == Condition{3, 6, 5});
    REQUIRE(w.cells[1].solved == n.cells[0].solved);
    REQUIRE(w.cells[1].diverged == n.cells[0].diverged);
}

TEST_CASE("easy conditions solve almost always", "[experiments]") {
    for (EscapeMode mode : {EscapeMode::Impulse, EscapeMode::Randomize}) {
        GridSpec spec;
        spec.m_values = {1};
        spec.n_values = {3};
        spec.r_values = {1};
        spec.trials = 50;
        spec.base_seed = 11;
        spec.solver.max_iters = 1000;
        spec.solver.escape = mode;
        const GridResult res = run_success_grid(spec, 0);
        REQUIRE(res.cells[0].success_rate > 0.9);
    }
}

TEST_CASE("impulse escape outperforms restarts at moderate size", "[experiments][slow]") {
    GridSpec spec;
    spec.m_values = {3};
    spec.n_values = {10};
    spec.r_values = {10};
    spec.trials = 50;
    spec.base_seed = 2024;
    spec.solver.max_iters = 1000;
    spec.solver.escape = EscapeMode::Impulse;
    const std::size_t impulse = run_success_grid(spec, 0).cells[0].solved;
    spec.solver.escape = EscapeMode::Randomize;  // same instances, same starts
    const std::size_t randomize = run_success_grid(spec, 0).cells[0].solved;
    REQUIRE(impulse >= randomize);
}

TEST_CASE("time-to-solution report invariants", "[experiments]") {
    TtsSpec spec;
    spec.cond = Condition{3, 5, 10};
    spec.trials = 60;
    spec.budget = 500;
    spec.bins = 10;
    spec.base_seed = 99;
    const TtsReport rep = run_time_to_solution(spec, 0);
    REQUIRE(rep.iterations.size() == 60);
    REQUIRE(rep.solved + rep.unsolved == 60);
    std::size_t hist_total = 0;
    for (std::size_t c : rep.histogram) hist_total += c;
    REQUIRE(hist_total == rep.solved);
    REQUIRE(rep.cumulative.size() == 11);
    for (std::size_t k = 1; k < rep.cumulative.size(); ++k) {
        REQUIRE(rep.cumulative[k] >= rep.cumulative[k - 1]);
    }
    REQUIRE(rep.cumulative.back() == double(rep.solved) / 60.0);
    for (std::size_t t = 0; t < 60; ++t) {
        REQUIRE(rep.iterations[t] <= 500);
        if (!rep.solved_flags[t]) REQUIRE(rep.iterations[t] == 500);
    }
    // Censoring pins every unsolved trial at the budget, so the median of the
    // censored sample can never exceed it.
    REQUIRE(rep.censored_median <= 500.0);

    SECTION("thread invariance, including derived statistics") {
        const TtsReport one = run_time_to_solution(spec, 1);
        const TtsReport four = run_time_to_solution(spec, 4);
        REQUIRE(same_tts(one, four));
        REQUIRE(same_tts(one, rep));
    }
}

TEST_CASE("a one-iteration budget censors nearly everything", "[experiments]") {
    TtsSpec spec;
    spec.cond = Condition{3, 5, 10};
    spec.trials = 40;
    spec.budget = 1;
    spec.bins = 4;
    spec.base_seed = 5;
    const TtsReport rep = run_time_to_solution(spec, 0);
    for (std::size_t t = 0; t < 40; ++t) REQUIRE(rep.iterations[t] == 1);
    REQUIRE(rep.censored_median == 1.0);
    REQUIRE(rep.censored_mean == 1.0);
    REQUIRE(rep.cumulative.front() == 0.0);
}

TEST_CASE("basin of a one-variable instance is the whole box", "[experiments]") {
    BasinSpec spec;
    spec.cond = Condition{1, 1, 1};
    spec.trials = 10;
    spec.points = 50;
    spec.budget = 200;
    spec.base_seed = 17;
    const BasinReport rep = estimate_basin(spec, 0);
    REQUIRE(rep.basin_fraction > 0.9);
    REQUIRE(rep.ratio_vs_discrete > 1.8);
    REQUIRE(rep.per_trial_fraction.size() == 10);
}

TEST_CASE("larger coefficient ranges shrink the basin", "[experiments][slow]") {
    BasinSpec spec;
    spec.cond = Condition{3, 8, 3};
    spec.trials = 30;
    spec.points = 60;
    spec.budget = 500;
    spec.base_seed = 23;
    const double ratio_r3 = estimate_basin(spec, 0).ratio_vs_discrete;
    spec.cond.r = 10;
    const double ratio_r10 = estimate_basin(spec, 0).ratio_vs_discrete;
    REQUIRE(ratio_r3 > ratio_r10);
    REQUIRE(ratio_r10 > 1.0);
}

TEST_CASE("basin estimate error shrinks like one over root points", "[experiments][slow]") {
    // Monte Carlo sanity: quadrupling the points should roughly halve the
    // spread of the per-trial fraction estimate on a fixed instance.
    const Planted p = generate_planted(GenSpec{3, 8, 5, 314159});
    const SignedInstance si = normalize_signs(p.instance);
    SolverConfig proto;
    auto spread = [&](std::size_t points) {
        std::vector<double> fr;
        for (std::uint64_t rep = 0; rep < 20; ++rep) {
            const auto hits =
                detail::cast_and_descend(si, points, 500, proto, derive_seed(rep, {points}), nullptr);
            std::size_t in = 0;
            for (auto h : hits) in += h;
            fr.push_back(double(in) / double(points));
        }
        return sample_sd(fr);
    };
    const double sd_small = spread(100);
    const double sd_large = spread(400);
    REQUIRE(sd_large > 0.0);
    const double ratio = sd_small / sd_large;
    REQUIRE(ratio > 1.3);
    REQUIRE(ratio < 3.0);
}

TEST_CASE("cloud analysis flags shifts and correlations", "[experiments]") {
    Rng rng(64);
    // Mirror every point through the center so each coordinate mean is 0.5
    // exactly; the t-test must then find nothing anywhere.
    std::vector<std::vector<double>> centered;
    for (int i = 0; i < 60; ++i) {
        std::vector<double> pt(4), mirror(4);
        for (std::size_t j = 0; j < 4; ++j) {
            pt[j] = rng.uniform01();
            mirror[j] = 1.0 - pt[j];
        }
        centered.push_back(pt);
        centered.push_back(mirror);
    }
    SECTION("centered cloud") {
        const TrialLocation loc = analyze_basin_cloud(centered, 4, 0.05);
        REQUIRE_FALSE(loc.skipped);
        REQUIRE(loc.in_basin == 120);
        for (std::size_t j = 0; j < 4; ++j) {
            REQUIRE_THAT(loc.dim_mean[j], Catch::Matchers::WithinAbs(0.5, 1e-12));
            REQUIRE(loc.dim_deviates[j] == 0);
        }
        REQUIRE_FALSE(loc.has_correlated_pair);
    }
    SECTION("a shifted dimension deviates") {
        auto shifted = centered;
        for (auto& pt : shifted) pt[2] = 0.8 + 0.05 * (pt[2] - 0.5);
        const TrialLocation loc = analyze_basin_cloud(shifted, 4, 0.05);
        REQUIRE(loc.dim_deviates[2] == 1);
        REQUIRE(loc.dim_deviates[0] == 0);
        REQUIRE(loc.dim_mean[2] > 0.7);
    }
    SECTION("a near-duplicate dimension trips the correlation screen") {
        auto tied = centered;
        for (auto& pt : tied) pt[3] = pt[1] + 0.01 * (pt[3] - 0.5);
        REQUIRE(analyze_basin_cloud(tied, 4, 0.05).has_correlated_pair);
    }
    SECTION("tiny clouds are skipped") {
        const TrialLocation loc =
            analyze_basin_cloud({{0.1, 0.2, 0.3, 0.4}, {0.5, 0.5, 0.5, 0.5}}, 4, 0.05);
        REQUIRE(loc.skipped);
        REQUIRE(loc.in_basin == 2);
    }
}

TEST_CASE("basin location smoke run", "[experiments][slow]") {
    LocateSpec spec;
    spec.cond = Condition{3, 8, 5};
    spec.trials = 6;
    spec.points = 120;
    spec.budget = 400;
    spec.base_seed = 1234;
    const LocationReport rep = locate_basin(spec, 0);
    REQUIRE(rep.trial_summaries.size() == 6);
    REQUIRE(rep.tested_trials + rep.skipped_trials == 6);
    REQUIRE(rep.per_dimension_deviation_count.size() == 8);
    for (std::size_t c : rep.per_dimension_deviation_count) {
        REQUIRE(c <= rep.tested_trials);
    }
    REQUIRE(rep.correlated_pair_trials <= rep.tested_trials);
    REQUIRE(rep.tested_trials >= 1);

    SECTION("starving the point budget skips trials") {
        LocateSpec tiny = spec;
        tiny.points = 3;
        const LocationReport starved = locate_basin(tiny, 0);
        REQUIRE(starved.skipped_trials >= starved.tested_trials);
    }
}
