// pulse_ilp: command-line front end for the solver library.
//
// Subcommands: solve, gen, bench (success grid), tts (time to solution),
// basin (basin-size estimate), locate (basin location statistics), rerun
// (replay a manifest). Results are JSON/CSV; every experiment directory gets
// a manifest.json that reproduces it bit-for-bit.
//
// Exit codes: 0 solved / command succeeded, 1 budget exhausted (solve only),
// 2 usage, parse, or runtime error.

#include <cerrno>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "pulseilp/pulseilp.hpp"
#include "pulseilp/report_io.hpp"

namespace {

using nlohmann::json;
using namespace pulseilp;

constexpr std::uint64_t kDefaultSeed = 1;

// Seed resolution order: explicit --seed flag, then PULSE_ILP_SEED from the
// environment, then a fixed default. Everything downstream derives from it.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
    if (flag) return *flag;
    if (const char* env = std::getenv("PULSE_ILP_SEED")) {
        char* end = nullptr;
        errno = 0;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (errno != 0 || end == env || *end != '\0') {
            throw Error(std::string("PULSE_ILP_SEED is not a valid integer: '") + env + "'");
        }
        return static_cast<std::uint64_t>(v);
    }
    return kDefaultSeed;
}

// Solver knobs shared by several subcommands.
struct SolverFlags {
    double step = 1.0;
    double l0 = 1e-4;
    bool clamp = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--step", step, "Euler step length")->check(CLI::PositiveNumber);
        cmd->add_option("--l0", l0, "trap detector threshold on |dK/(K dt)|")
            ->check(CLI::PositiveNumber);
        cmd->add_flag("--clamp", clamp, "project the point onto [0,1]^n after each step");
    }

    SolverConfig to_config() const {
        SolverConfig cfg;
        cfg.step = step;
        cfg.l0 = l0;
        cfg.clamp = clamp;
        return cfg;
    }
};

json solution_to_json(const std::vector<std::uint8_t>& x) {
    json arr = json::array();
    for (std::uint8_t b : x) arr.push_back(static_cast<int>(b));
    return arr;
}

int run_solve(const std::string& file, const SolverFlags& flags, const std::string& escape,
              std::size_t max_iters, const std::optional<std::uint64_t>& seed_flag,
              const std::string& trace_path, bool oracle) {
    const Instance inst = read_instance(read_text_file(file));
    SolverConfig cfg = flags.to_config();
    cfg.max_iters = max_iters;
    cfg.escape = parse_escape_mode(escape);
    cfg.seed = resolve_seed(seed_flag);
    cfg.record_trace = !trace_path.empty();

    const SolveResult res = solve(inst, cfg);
    if (!trace_path.empty()) {
        write_text_file(trace_path, trace_csv(res.trace));
    }

    json out{{"status", res.status == SolveStatus::Solved ? "solved" : "budget-exhausted"},
             {"iterations", res.iterations},
             {"escapes_fired", res.escapes_fired},
             {"outside_box_steps", res.outside_box_steps},
             {"final_k", res.final_k},
             {"seed", cfg.seed}};
    if (res.status == SolveStatus::Solved) {
        out["solution"] = solution_to_json(res.solution);
    }
    if (oracle) {
        const OracleResult orc = exhaustive_solve(inst);
        out["oracle"] = json{{"solution_count", orc.count}};
        if (res.status == SolveStatus::Solved) {
            out["oracle"]["contains_reported_solution"] = oracle_contains(inst, res.solution);
        }
    }
    std::cout << out.dump(2) << '\n';
    return res.status == SolveStatus::Solved ? 0 : 1;
}

int run_gen(std::size_t m, std::size_t n, std::int64_t r,
            const std::optional<std::uint64_t>& seed_flag, const std::string& out_path) {
    const std::uint64_t seed = resolve_seed(seed_flag);
    const Planted planted = generate_planted(GenSpec{m, n, r, seed});
    write_text_file(out_path, write_instance(planted.instance));
    std::string sol_line;
    for (std::size_t i = 0; i < planted.solution.size(); ++i) {
        if (i) sol_line += ' ';
        sol_line += planted.solution[i] ? '1' : '0';
    }
    write_text_file(out_path + ".sol", sol_line + "\n");
    std::cout << "wrote " << out_path << " and " << out_path << ".sol (seed " << seed << ")\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gradient-flow solver for 0-1 integer feasibility problems"};
    app.require_subcommand(1);

    // --- solve ---
    auto* solve_cmd = app.add_subcommand("solve", "solve one instance file");
    std::string solve_file;
    solve_cmd->add_option("file", solve_file, "instance file")->required();
    SolverFlags solve_flags;
    solve_flags.attach(solve_cmd);
    std::string solve_escape = "impulse";
    solve_cmd->add_option("--escape", solve_escape, "escape mode: impulse|randomize|none")
        ->check(CLI::IsMember({"impulse", "randomize", "none"}));
    std::size_t solve_iters = 1000;
    solve_cmd->add_option("--max-iters", solve_iters, "iteration budget")->check(CLI::PositiveNumber);
    std::optional<std::uint64_t> solve_seed;
    solve_cmd->add_option("--seed", solve_seed, "RNG seed (default: $PULSE_ILP_SEED or 1)");
    std::string solve_trace;
    solve_cmd->add_option("--trace", solve_trace, "write the (t, K, event) trace CSV here");
    bool solve_oracle = false;
    solve_cmd->add_flag("--oracle", solve_oracle, "cross-check against exhaustive search");

    // --- gen ---
    auto* gen_cmd = app.add_subcommand("gen", "generate a planted-feasible instance");
    std::size_t gen_m = 3, gen_n = 5;
    std::int64_t gen_r = 10;
    gen_cmd->add_option("--m", gen_m, "constraints")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--n", gen_n, "variables")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--r", gen_r, "coefficient range (uniform on 0..r)")
        ->check(CLI::PositiveNumber);
    std::optional<std::uint64_t> gen_seed;
    gen_cmd->add_option("--seed", gen_seed, "RNG seed (default: $PULSE_ILP_SEED or 1)");
    std::string gen_out = "instance.ilp";
    gen_cmd->add_option("-o,--out", gen_out, "output file (planted vector goes to <out>.sol)");

    // --- shared experiment flags ---
    unsigned threads = 0;

    // --- bench ---
    auto* bench_cmd = app.add_subcommand("bench", "success-rate grid over (m, n, r) conditions");
    std::vector<std::size_t> m_list{3}, n_list{5};
    std::vector<std::int64_t> r_list{10};
    bench_cmd->add_option("--m-list", m_list, "constraint counts")->delimiter(',');
    bench_cmd->add_option("--n-list", n_list, "variable counts")->delimiter(',');
    bench_cmd->add_option("--r-list", r_list, "coefficient ranges")->delimiter(',');
    std::size_t bench_trials = 100;
    bench_cmd->add_option("--trials", bench_trials, "trials per cell")->check(CLI::PositiveNumber);
    std::size_t bench_iters = 1000;
    bench_cmd->add_option("--max-iters", bench_iters, "iteration budget per trial")
        ->check(CLI::PositiveNumber);
    std::string bench_escape = "impulse";
    bench_cmd->add_option("--escape", bench_escape, "escape mode: impulse|randomize|none")
        ->check(CLI::IsMember({"impulse", "randomize", "none"}));
    SolverFlags bench_flags;
    bench_flags.attach(bench_cmd);
    std::optional<std::uint64_t> bench_seed;
    bench_cmd->add_option("--seed", bench_seed, "base seed");
    bench_cmd->add_option("--threads", threads, "worker threads (0 = hardware)");
    std::string bench_out = "bench_out";
    bench_cmd->add_option("--out", bench_out, "output directory");

    // --- tts ---
    auto* tts_cmd = app.add_subcommand("tts", "time-to-solution distribution for one condition");
    std::size_t tts_m = 3, tts_n = 5;
    std::int64_t tts_r = 10;
    tts_cmd->add_option("--m", tts_m, "constraints")->check(CLI::PositiveNumber);
    tts_cmd->add_option("--n", tts_n, "variables")->check(CLI::PositiveNumber);
    tts_cmd->add_option("--r", tts_r, "coefficient range")->check(CLI::PositiveNumber);
    std::size_t tts_trials = 500, tts_budget = 2000, tts_bins = 100;
    tts_cmd->add_option("--trials", tts_trials)->check(CLI::PositiveNumber);
    tts_cmd->add_option("--budget", tts_budget, "iteration budget (censoring point)")
        ->check(CLI::PositiveNumber);
    tts_cmd->add_option("--bins", tts_bins, "histogram bins over [0, budget]")
        ->check(CLI::PositiveNumber);
    std::string tts_escape = "impulse";
    tts_cmd->add_option("--escape", tts_escape, "escape mode: impulse|randomize|none")
        ->check(CLI::IsMember({"impulse", "randomize", "none"}));
    SolverFlags tts_flags;
    tts_flags.attach(tts_cmd);
    std::optional<std::uint64_t> tts_seed;
    tts_cmd->add_option("--seed", tts_seed, "base seed");
    tts_cmd->add_option("--threads", threads, "worker threads (0 = hardware)");
    std::string tts_out = "tts_out";
    tts_cmd->add_option("--out", tts_out, "output directory");

    // --- basin ---
    auto* basin_cmd = app.add_subcommand("basin", "basin-of-attraction size for one condition");
    std::size_t basin_m = 3, basin_n = 5;
    std::int64_t basin_r = 3;
    basin_cmd->add_option("--m", basin_m, "constraints")->check(CLI::PositiveNumber);
    basin_cmd->add_option("--n", basin_n, "variables")->check(CLI::PositiveNumber);
    basin_cmd->add_option("--r", basin_r, "coefficient range")->check(CLI::PositiveNumber);
    std::size_t basin_trials = 100, basin_points = 100, basin_budget = 1000;
    basin_cmd->add_option("--trials", basin_trials, "instances")->check(CLI::PositiveNumber);
    basin_cmd->add_option("--points", basin_points, "uniform starts per instance")
        ->check(CLI::PositiveNumber);
    basin_cmd->add_option("--budget", basin_budget, "descent budget per start")
        ->check(CLI::PositiveNumber);
    SolverFlags basin_flags;
    basin_flags.attach(basin_cmd);
    std::optional<std::uint64_t> basin_seed;
    basin_cmd->add_option("--seed", basin_seed, "base seed");
    basin_cmd->add_option("--threads", threads, "worker threads (0 = hardware)");
    std::string basin_out = "basin_out";
    basin_cmd->add_option("--out", basin_out, "output directory");

    // --- locate ---
    auto* locate_cmd =
        app.add_subcommand("locate", "basin location statistics (t-tests and correlations)");
    std::size_t loc_m = 3, loc_n = 10;
    std::int64_t loc_r = 10;
    locate_cmd->add_option("--m", loc_m, "constraints")->check(CLI::PositiveNumber);
    locate_cmd->add_option("--n", loc_n, "variables")->check(CLI::PositiveNumber);
    locate_cmd->add_option("--r", loc_r, "coefficient range")->check(CLI::PositiveNumber);
    std::size_t loc_trials = 50, loc_points = 1000, loc_budget = 1000;
    double loc_sig = 0.05;
    locate_cmd->add_option("--trials", loc_trials, "instances")->check(CLI::PositiveNumber);
    locate_cmd->add_option("--points", loc_points, "uniform starts per instance")
        ->check(CLI::PositiveNumber);
    locate_cmd->add_option("--sig-level", loc_sig, "t-test significance level")
        ->check(CLI::Range(0.0, 1.0));
    locate_cmd->add_option("--budget", loc_budget, "descent budget per start")
        ->check(CLI::PositiveNumber);
    SolverFlags locate_flags;
    locate_flags.attach(locate_cmd);
    std::optional<std::uint64_t> locate_seed;
    locate_cmd->add_option("--seed", locate_seed, "base seed");
    locate_cmd->add_option("--threads", threads, "worker threads (0 = hardware)");
    std::string locate_out = "locate_out";
    locate_cmd->add_option("--out", locate_out, "output directory");

    // --- rerun ---
    auto* rerun_cmd = app.add_subcommand("rerun", "replay an experiment from its manifest");
    std::string rerun_manifest_path;
    rerun_cmd->add_option("manifest", rerun_manifest_path, "manifest.json path")->required();
    std::string rerun_out;
    rerun_cmd->add_option("--out", rerun_out, "output directory (default: manifest's directory)");
    rerun_cmd->add_option("--threads", threads, "worker threads (0 = hardware)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        // CLI11 returns 0 for --help; anything else is a usage error.
        return code == 0 ? 0 : 2;
    }

    try {
        if (solve_cmd->parsed()) {
            return run_solve(solve_file, solve_flags, solve_escape, solve_iters, solve_seed,
                             solve_trace, solve_oracle);
        }
        if (gen_cmd->parsed()) {
            return run_gen(gen_m, gen_n, gen_r, gen_seed, gen_out);
        }
        if (bench_cmd->parsed()) {
            GridSpec spec;
            spec.m_values = m_list;
            spec.n_values = n_list;
            spec.r_values = r_list;
            spec.trials = bench_trials;
            spec.base_seed = resolve_seed(bench_seed);
            spec.solver = bench_flags.to_config();
            spec.solver.max_iters = bench_iters;
            spec.solver.escape = parse_escape_mode(bench_escape);
            const GridResult res = run_and_write_grid(spec, bench_out, threads);
            std::cout << "bench: " << res.cells.size() << " cells x " << spec.trials
                      << " trials -> " << bench_out << "/grid.json\n";
            return 0;
        }
        if (tts_cmd->parsed()) {
            TtsSpec spec;
            spec.cond = Condition{tts_m, tts_n, tts_r};
            spec.trials = tts_trials;
            spec.budget = tts_budget;
            spec.bins = tts_bins;
            spec.base_seed = resolve_seed(tts_seed);
            spec.solver = tts_flags.to_config();
            spec.solver.escape = parse_escape_mode(tts_escape);
            const TtsReport rep = run_and_write_tts(spec, tts_out, threads);
            std::cout << "tts: solved " << rep.solved << "/" << spec.trials << ", censored median "
                      << rep.censored_median << ", censored mean " << rep.censored_mean << " -> "
                      << tts_out << "/tts.json\n";
            return 0;
        }
        if (basin_cmd->parsed()) {
            BasinSpec spec;
            spec.cond = Condition{basin_m, basin_n, basin_r};
            spec.trials = basin_trials;
            spec.points = basin_points;
            spec.budget = basin_budget;
            spec.base_seed = resolve_seed(basin_seed);
            spec.solver = basin_flags.to_config();
            const BasinReport rep = run_and_write_basin(spec, basin_out, threads);
            std::cout << "basin: fraction " << rep.basin_fraction << ", ratio vs 2^-n "
                      << rep.ratio_vs_discrete << " -> " << basin_out << "/basin.json\n";
            return 0;
        }
        if (locate_cmd->parsed()) {
            LocateSpec spec;
            spec.cond = Condition{loc_m, loc_n, loc_r};
            spec.trials = loc_trials;
            spec.points = loc_points;
            spec.alpha_sig = loc_sig;
            spec.budget = loc_budget;
            spec.base_seed = resolve_seed(locate_seed);
            spec.solver = locate_flags.to_config();
            const LocationReport rep = run_and_write_locate(spec, locate_out, threads);
            std::cout << "locate: tested " << rep.tested_trials << ", skipped " << rep.skipped_trials
                      << ", correlated-pair trials " << rep.correlated_pair_trials << " -> "
                      << locate_out << "/locate.json\n";
            return 0;
        }
        if (rerun_cmd->parsed()) {
            const std::filesystem::path manifest(rerun_manifest_path);
            const std::filesystem::path dir =
                rerun_out.empty() ? manifest.parent_path() : std::filesystem::path(rerun_out);
            const auto outputs = rerun_manifest(manifest, dir, threads);
            std::cout << "rerun: regenerated " << outputs.size() << " outputs in " << dir.string()
                      << '\n';
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
