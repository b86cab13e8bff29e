#pragma once

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include "json.hpp"

#include "pulseilp/dynamics.hpp"
#include "pulseilp/errors.hpp"
#include "pulseilp/experiments.hpp"

namespace pulseilp {

// Serialization of experiment reports (JSON for structure, CSV for anything
// a plotting tool consumes) and the run manifest that makes every output
// directory self-describing and replayable.
//
// Reproducibility contract: rerunning a manifest regenerates every listed
// output byte-for-byte, at any thread count. Only deterministic fields go
// into output files; wall-clock duration lives in the manifest alone and is
// excluded from the contract.

constexpr const char* kArtifactName = "pulse-ilp";
constexpr const char* kArtifactVersion = "1.0.0";

using nlohmann::json;

// Shortest round-trip decimal form; locale-independent, so CSV output is
// identical across environments.
inline std::string fmt_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// --- JSON mappings -----------------------------------------------------------

inline void to_json(json& j, const Condition& c) {
    j = json{{"m", c.m}, {"n", c.n}, {"r", c.r}};
}
inline void from_json(const json& j, Condition& c) {
    j.at("m").get_to(c.m);
    j.at("n").get_to(c.n);
    j.at("r").get_to(c.r);
}

// Only the knobs that shape the dynamics; per-run fields (seed, init, trace
// sinks) are driven by the experiment harness.
inline json solver_to_json(const SolverConfig& cfg) {
    return json{{"step", cfg.step},         {"max_iters", cfg.max_iters}, {"l0", cfg.l0},
                {"eps_trap", cfg.eps_trap}, {"escape", escape_mode_name(cfg.escape)},
                {"clamp", cfg.clamp}};
}
inline SolverConfig solver_from_json(const json& j) {
    SolverConfig cfg;
    j.at("step").get_to(cfg.step);
    j.at("max_iters").get_to(cfg.max_iters);
    j.at("l0").get_to(cfg.l0);
    j.at("eps_trap").get_to(cfg.eps_trap);
    cfg.escape = parse_escape_mode(j.at("escape").get<std::string>());
    j.at("clamp").get_to(cfg.clamp);
    return cfg;
}

inline void to_json(json& j, const GridSpec& s) {
    j = json{{"m_values", s.m_values}, {"n_values", s.n_values}, {"r_values", s.r_values},
             {"trials", s.trials},     {"base_seed", s.base_seed}, {"solver", solver_to_json(s.solver)}};
}
inline void from_json(const json& j, GridSpec& s) {
    j.at("m_values").get_to(s.m_values);
    j.at("n_values").get_to(s.n_values);
    j.at("r_values").get_to(s.r_values);
    j.at("trials").get_to(s.trials);
    j.at("base_seed").get_to(s.base_seed);
    s.solver = solver_from_json(j.at("solver"));
}

inline void to_json(json& j, const GridCell& c) {
    j = json{{"cond", c.cond},       {"trials", c.trials},         {"solved", c.solved},
             {"diverged", c.diverged}, {"success_rate", c.success_rate}};
}
inline void to_json(json& j, const GridResult& g) {
    j = json{{"cells", g.cells}};
}

inline void to_json(json& j, const TtsSpec& s) {
    j = json{{"cond", s.cond},   {"trials", s.trials},       {"budget", s.budget},
             {"bins", s.bins},   {"base_seed", s.base_seed}, {"solver", solver_to_json(s.solver)}};
}
inline void from_json(const json& j, TtsSpec& s) {
    j.at("cond").get_to(s.cond);
    j.at("trials").get_to(s.trials);
    j.at("budget").get_to(s.budget);
    j.at("bins").get_to(s.bins);
    j.at("base_seed").get_to(s.base_seed);
    s.solver = solver_from_json(j.at("solver"));
}

inline void to_json(json& j, const TtsReport& r) {
    j = json{{"spec", r.spec},
             {"solved", r.solved},
             {"unsolved", r.unsolved},
             {"iterations", r.iterations},
             {"solved_flags", r.solved_flags},
             {"censored_median", r.censored_median},
             {"censored_mean", r.censored_mean},
             {"histogram", r.histogram},
             {"cumulative", r.cumulative}};
}

inline void to_json(json& j, const BasinSpec& s) {
    j = json{{"cond", s.cond},     {"trials", s.trials},       {"points", s.points},
             {"budget", s.budget}, {"base_seed", s.base_seed}, {"solver", solver_to_json(s.solver)}};
}
inline void from_json(const json& j, BasinSpec& s) {
    j.at("cond").get_to(s.cond);
    j.at("trials").get_to(s.trials);
    j.at("points").get_to(s.points);
    j.at("budget").get_to(s.budget);
    j.at("base_seed").get_to(s.base_seed);
    s.solver = solver_from_json(j.at("solver"));
}

inline void to_json(json& j, const BasinReport& r) {
    j = json{{"spec", r.spec},
             {"per_trial_fraction", r.per_trial_fraction},
             {"basin_fraction", r.basin_fraction},
             {"ratio_vs_discrete", r.ratio_vs_discrete}};
}

inline void to_json(json& j, const LocateSpec& s) {
    j = json{{"cond", s.cond},         {"trials", s.trials},       {"points", s.points},
             {"alpha_sig", s.alpha_sig}, {"budget", s.budget},     {"base_seed", s.base_seed},
             {"solver", solver_to_json(s.solver)}};
}
inline void from_json(const json& j, LocateSpec& s) {
    j.at("cond").get_to(s.cond);
    j.at("trials").get_to(s.trials);
    j.at("points").get_to(s.points);
    j.at("alpha_sig").get_to(s.alpha_sig);
    j.at("budget").get_to(s.budget);
    j.at("base_seed").get_to(s.base_seed);
    s.solver = solver_from_json(j.at("solver"));
}

inline void to_json(json& j, const TrialLocation& t) {
    j = json{{"in_basin", t.in_basin},   {"skipped", t.skipped},
             {"dim_mean", t.dim_mean},   {"dim_sd", t.dim_sd},
             {"dim_deviates", t.dim_deviates}, {"has_correlated_pair", t.has_correlated_pair}};
}
inline void to_json(json& j, const LocationReport& r) {
    j = json{{"spec", r.spec},
             {"tested_trials", r.tested_trials},
             {"skipped_trials", r.skipped_trials},
             {"per_dimension_deviation_count", r.per_dimension_deviation_count},
             {"correlated_pair_trials", r.correlated_pair_trials},
             {"trial_summaries", r.trial_summaries}};
}

// --- CSV ----------------------------------------------------------------------

inline std::string grid_csv(const GridResult& g) {
    std::ostringstream out;
    out << "m,n,r,trials,solved,diverged,success_rate\n";
    for (const GridCell& c : g.cells) {
        out << c.cond.m << ',' << c.cond.n << ',' << c.cond.r << ',' << c.trials << ',' << c.solved
            << ',' << c.diverged << ',' << fmt_double(c.success_rate) << '\n';
    }
    return out.str();
}

inline std::string tts_histogram_csv(const TtsReport& r) {
    std::ostringstream out;
    out << "bin_lo,bin_hi,count\n";
    const double width = static_cast<double>(r.spec.budget) / static_cast<double>(r.spec.bins);
    for (std::size_t k = 0; k < r.histogram.size(); ++k) {
        out << fmt_double(width * static_cast<double>(k)) << ','
            << fmt_double(width * static_cast<double>(k + 1)) << ',' << r.histogram[k] << '\n';
    }
    return out.str();
}

inline std::string tts_cumulative_csv(const TtsReport& r) {
    std::ostringstream out;
    out << "t,solved_fraction\n";
    const double width = static_cast<double>(r.spec.budget) / static_cast<double>(r.spec.bins);
    for (std::size_t k = 0; k < r.cumulative.size(); ++k) {
        out << fmt_double(width * static_cast<double>(k)) << ',' << fmt_double(r.cumulative[k]) << '\n';
    }
    return out.str();
}

inline std::string basin_trials_csv(const BasinReport& r) {
    std::ostringstream out;
    out << "trial,fraction,ratio_vs_discrete\n";
    const double scale = std::pow(2.0, static_cast<double>(r.spec.cond.n));
    for (std::size_t t = 0; t < r.per_trial_fraction.size(); ++t) {
        out << t << ',' << fmt_double(r.per_trial_fraction[t]) << ','
            << fmt_double(r.per_trial_fraction[t] * scale) << '\n';
    }
    return out.str();
}

inline std::string locate_dims_csv(const LocationReport& r) {
    std::ostringstream out;
    out << "dimension,deviation_count,tested_trials,deviation_fraction\n";
    for (std::size_t j = 0; j < r.per_dimension_deviation_count.size(); ++j) {
        const double frac = r.tested_trials == 0
                                ? 0.0
                                : static_cast<double>(r.per_dimension_deviation_count[j]) /
                                      static_cast<double>(r.tested_trials);
        out << j << ',' << r.per_dimension_deviation_count[j] << ',' << r.tested_trials << ','
            << fmt_double(frac) << '\n';
    }
    return out.str();
}

// --- files ---------------------------------------------------------------------

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot open for writing: " + path.string());
    }
    out << content;
    if (!out) {
        throw Error("write failed: " + path.string());
    }
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open for reading: " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// --- run manifest ----------------------------------------------------------------

struct RunManifest {
    std::string command;   // bench | tts | basin | locate
    json params;           // the full experiment spec
    std::uint64_t seed = 0;
    std::string version = kArtifactVersion;
    std::int64_t duration_ms = 0;  // informational; excluded from reproduction
    std::vector<std::string> outputs;
};

inline void to_json(json& j, const RunManifest& m) {
    j = json{{"artifact", kArtifactName}, {"version", m.version}, {"command", m.command},
             {"seed", m.seed},            {"params", m.params},   {"duration_ms", m.duration_ms},
             {"outputs", m.outputs}};
}
inline void from_json(const json& j, RunManifest& m) {
    j.at("command").get_to(m.command);
    m.params = j.at("params");
    j.at("seed").get_to(m.seed);
    j.at("version").get_to(m.version);
    j.at("duration_ms").get_to(m.duration_ms);
    j.at("outputs").get_to(m.outputs);
}

namespace detail {

inline void write_outputs(const std::filesystem::path& dir,
                          const std::vector<std::pair<std::string, std::string>>& files,
                          const std::string& command, const json& params, std::uint64_t seed,
                          std::int64_t duration_ms) {
    std::filesystem::create_directories(dir);
    RunManifest man;
    man.command = command;
    man.params = params;
    man.seed = seed;
    man.duration_ms = duration_ms;
    for (const auto& [name, content] : files) {
        write_text_file(dir / name, content);
        man.outputs.push_back(name);
    }
    write_text_file(dir / "manifest.json", json(man).dump(2) + "\n");
}

class Stopwatch {
public:
    std::int64_t ms() const {
        return std::chrono::duration_cast<std::chrono::milliseconds>(
                   std::chrono::steady_clock::now() - start_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace detail

// Experiment drivers: run, then write report + CSVs + manifest into `dir`.
// The CLI calls these directly; rerun_manifest dispatches back into them, so
// a replay walks exactly the same code path.

inline GridResult run_and_write_grid(const GridSpec& spec, const std::filesystem::path& dir,
                                     unsigned threads = 0) {
    detail::Stopwatch sw;
    const GridResult res = run_success_grid(spec, threads);
    detail::write_outputs(dir,
                          {{"grid.json", json(res).dump(2) + "\n"}, {"grid.csv", grid_csv(res)}},
                          "bench", json(spec), spec.base_seed, sw.ms());
    return res;
}

inline TtsReport run_and_write_tts(const TtsSpec& spec, const std::filesystem::path& dir,
                                   unsigned threads = 0) {
    detail::Stopwatch sw;
    const TtsReport rep = run_time_to_solution(spec, threads);
    detail::write_outputs(dir,
                          {{"tts.json", json(rep).dump(2) + "\n"},
                           {"histogram.csv", tts_histogram_csv(rep)},
                           {"cumulative.csv", tts_cumulative_csv(rep)}},
                          "tts", json(spec), spec.base_seed, sw.ms());
    return rep;
}

inline BasinReport run_and_write_basin(const BasinSpec& spec, const std::filesystem::path& dir,
                                       unsigned threads = 0) {
    detail::Stopwatch sw;
    const BasinReport rep = estimate_basin(spec, threads);
    detail::write_outputs(dir,
                          {{"basin.json", json(rep).dump(2) + "\n"},
                           {"basin_trials.csv", basin_trials_csv(rep)}},
                          "basin", json(spec), spec.base_seed, sw.ms());
    return rep;
}

inline LocationReport run_and_write_locate(const LocateSpec& spec, const std::filesystem::path& dir,
                                           unsigned threads = 0) {
    detail::Stopwatch sw;
    const LocationReport rep = locate_basin(spec, threads);
    detail::write_outputs(dir,
                          {{"locate.json", json(rep).dump(2) + "\n"},
                           {"locate_dims.csv", locate_dims_csv(rep)}},
                          "locate", json(spec), spec.base_seed, sw.ms());
    return rep;
}

// Replays a manifest into `dir` (often the original directory). Returns the
// list of regenerated output files.
inline std::vector<std::string> rerun_manifest(const std::filesystem::path& manifest_path,
                                               const std::filesystem::path& dir,
                                               unsigned threads = 0) {
    const json j = json::parse(read_text_file(manifest_path));
    const RunManifest man = j.get<RunManifest>();
    if (man.command == "bench") {
        run_and_write_grid(man.params.get<GridSpec>(), dir, threads);
    } else if (man.command == "tts") {
        run_and_write_tts(man.params.get<TtsSpec>(), dir, threads);
    } else if (man.command == "basin") {
        run_and_write_basin(man.params.get<BasinSpec>(), dir, threads);
    } else if (man.command == "locate") {
        run_and_write_locate(man.params.get<LocateSpec>(), dir, threads);
    } else {
        throw Error("manifest has unknown command '" + man.command + "'");
    }
    return man.outputs;
}

}  // namespace pulseilp
