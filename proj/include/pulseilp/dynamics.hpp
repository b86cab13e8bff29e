#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "pulseilp/energy.hpp"
#include "pulseilp/errors.hpp"
#include "pulseilp/instance.hpp"
#include "pulseilp/rng.hpp"

namespace pulseilp {

// The solver integrates dx/dt = -grad K(x) with a fixed-step Euler scheme.
// Descent alone stalls in local traps (points with tiny gradient but K > 0);
// a relative-slope detector watches for stalls and fires an escape:
//
//   L = (K_t - K_{t-1}) / (K_t * dt)        trap  <=>  |L| <= l0 and K_t > eps
//
// The escape is either an inward impulse kick (see impulse_vector) or a full
// re-randomization of the point, or nothing (useful to study the raw flow).

enum class EscapeMode { Impulse, Randomize, None };

inline const char* escape_mode_name(EscapeMode m) {
    switch (m) {
        case EscapeMode::Impulse: return "impulse";
        case EscapeMode::Randomize: return "randomize";
        case EscapeMode::None: return "none";
    }
    return "?";
}

inline EscapeMode parse_escape_mode(const std::string& s) {
    if (s == "impulse") return EscapeMode::Impulse;
    if (s == "randomize") return EscapeMode::Randomize;
    if (s == "none") return EscapeMode::None;
    throw Error("unknown escape mode '" + s + "' (expected impulse, randomize, or none)");
}

enum class Event : std::uint8_t { Step, ImpulseFired, RandomizeFired };

inline const char* event_name(Event e) {
    switch (e) {
        case Event::Step: return "step";
        case Event::ImpulseFired: return "impulse";
        case Event::RandomizeFired: return "randomize";
    }
    return "?";
}

struct TraceRow {
    std::size_t t = 0;   // iteration index (0-based)
    double k = 0.0;      // energy at the start of the iteration
    Event event = Event::Step;
};

// Snapshot of one escape event; used by tests to audit the impulse contract.
struct ImpulseEvent {
    std::size_t t = 0;
    int alpha = 0;
    std::vector<double> x;        // position when the impulse fired
    std::vector<double> impulse;  // the applied I
};

struct SolverConfig {
    double step = 1.0;            // Euler step length
    std::size_t max_iters = 1000;
    double l0 = 1e-4;             // trap threshold on |L|
    double eps_trap = 1e-9;       // no trap below this energy (global minimum)
    EscapeMode escape = EscapeMode::Impulse;
    bool clamp = false;           // project x onto [0,1]^n after each step
    std::uint64_t seed = 0;
    std::vector<double> init;     // explicit start; empty = uniform in [0,1]^n
    bool record_trace = false;
    std::vector<ImpulseEvent>* impulse_log = nullptr;  // optional audit sink
};

enum class SolveStatus { Solved, BudgetExhausted };

struct SolveResult {
    SolveStatus status = SolveStatus::BudgetExhausted;
    std::vector<std::uint8_t> solution;  // set when solved
    std::size_t iterations = 0;          // steps taken at termination
    std::size_t escapes_fired = 0;
    std::size_t outside_box_steps = 0;   // iterations that left [0,1]^n
    double final_k = 0.0;                // energy at the last visited point
    std::vector<double> final_x;
    std::vector<TraceRow> trace;         // filled when record_trace
};

// --- trap detector ---------------------------------------------------------
//
// k_prev may be +infinity, meaning "no previous energy yet"; that never
// registers as a trap. k_now == 0 short-circuits to false (global minimum).
inline bool detect_trap(double k_prev, double k_now, double dt, double l0 = 1e-4,
                        double eps_trap = 1e-9) {
    if (!(k_now > eps_trap)) return false;
    const double slope = (k_now - k_prev) / (k_now * dt);
    return std::fabs(slope) <= l0;
}

// --- inward sign fix -------------------------------------------------------
//
// ins(g, x)_j = -sgn(g_j) * sgn(x_j - 1/2) * g_j, i.e. |g_j| pointed toward
// the interior of the box. sgn(0) is taken as +1 so the map stays
// deterministic on boundaries and at exact zeros.
inline double sgn_pos(double v) { return v < 0.0 ? -1.0 : 1.0; }

inline std::vector<double> ins(const std::vector<double>& grad, const std::vector<double>& x) {
    if (grad.size() != x.size()) {
        throw DimensionError("ins: gradient and point lengths differ");
    }
    std::vector<double> out(grad.size());
    for (std::size_t j = 0; j < grad.size(); ++j) {
        out[j] = -sgn_pos(grad[j]) * sgn_pos(x[j] - 0.5) * grad[j];
    }
    return out;
}

// --- smoothing filter ------------------------------------------------------
//
// F is n x n with 1/2 on the diagonal and 1/(2(n-1)) elsewhere: one
// application keeps half of each component and spreads the other half evenly
// over the rest. F has eigenvalue 1 on the all-ones direction and
// lambda = (n-2)/(2(n-1)) on its orthogonal complement, so
//
//   F^alpha v = mean(v) * 1 + lambda^alpha (v - mean(v) * 1)
//
// which is what we evaluate (no matrix is ever materialised). For n = 1 the
// filter degenerates to the 1x1 matrix [1/2].
inline double filter_lambda(std::size_t n) {
    if (n <= 1) return 0.5;
    return 0.5 * static_cast<double>(n - 2) / static_cast<double>(n - 1);
}

inline std::vector<double> filter_apply(const std::vector<double>& v, unsigned alpha) {
    if (alpha == 0) return v;  // exact identity, no mean round-trip
    const std::size_t n = v.size();
    std::vector<double> out(n);
    if (n == 1) {
        out[0] = std::pow(0.5, static_cast<double>(alpha)) * v[0];
        return out;
    }
    double mean = 0.0;
    for (double e : v) mean += e;
    mean /= static_cast<double>(n);
    const double damp = std::pow(filter_lambda(n), static_cast<double>(alpha));
    for (std::size_t j = 0; j < n; ++j) {
        out[j] = mean + damp * (v[j] - mean);
    }
    return out;
}

// --- impulse ---------------------------------------------------------------
//
// The escape kick. Requirements: mean absolute size exactly 1/2
// ((1/n)||I||_1 = 1/2), every component strictly inside the unit box
// (||I||_inf < 1), and every nonzero component pointing toward the interior.
//
// Construction: take the gradient magnitude profile, smooth it with F^alpha
// for the smallest alpha that tames the dominant component, scale to the L1
// target, and attach the inward signs. Filtering the magnitudes rather than
// the signed ins(...) vector matters: the filter mixes every component toward
// the mean, and when the mean is large it can drag small components across
// zero, i.e. point them outward. Magnitudes stay non-negative under F (its
// entries are non-negative), so the inward guarantee survives any alpha.
//
// If the gradient is exactly zero (a perfect stationary point; reachable in
// tests), the magnitude profile is drawn uniformly from the solver's
// generator and the same normalization applies.
struct ImpulseVec {
    std::vector<double> i;
    int alpha = 0;  // filter passes used; -1 for the capped fallback
};

constexpr unsigned kMaxFilterPasses = 200;

inline ImpulseVec impulse_vector(const std::vector<double>& grad, const std::vector<double>& x,
                                 Rng& rng) {
    if (grad.size() != x.size()) {
        throw DimensionError("impulse: gradient and point lengths differ");
    }
    const std::size_t n = x.size();
    std::vector<double> mag(n);
    bool degenerate = true;
    for (std::size_t j = 0; j < n; ++j) {
        mag[j] = std::fabs(grad[j]);
        if (mag[j] != 0.0) degenerate = false;
    }
    if (degenerate) {
        for (std::size_t j = 0; j < n; ++j) {
            do {
                mag[j] = rng.uniform01();
            } while (mag[j] == 0.0);
        }
    }

    ImpulseVec out;
    out.i.resize(n);
    const double nd = static_cast<double>(n);

    if (n == 1) {
        // Only magnitude scaling is left; both norms coincide at 1/2.
        out.i[0] = (x[0] - 0.5 >= 0.0 ? -0.5 : 0.5);
        out.alpha = 0;
        return out;
    }

    double mean = 0.0;
    for (double v : mag) mean += v;
    mean /= nd;
    const double lambda = filter_lambda(n);
    double damp = 1.0;
    for (unsigned alpha = 0; alpha <= kMaxFilterPasses; ++alpha) {
        // z = F^alpha mag, entrywise >= 0 with the same total mass n*mean.
        double zmax = 0.0;
        for (double v : mag) {
            const double z = mean + damp * (v - mean);
            if (z > zmax) zmax = z;
        }
        const double l1 = nd * mean;
        if (nd * zmax < 2.0 * l1) {
            const double k = nd / (2.0 * l1);
            for (std::size_t j = 0; j < n; ++j) {
                const double z = mean + damp * (mag[j] - mean);
                out.i[j] = -sgn_pos(x[j] - 0.5) * k * z;
            }
            out.alpha = static_cast<int>(alpha);
            return out;
        }
        damp *= lambda;
    }
    // Unreachable for mean > 0 (the smoothed profile converges to the mean),
    // but keep a kick that still honours the contract.
    for (std::size_t j = 0; j < n; ++j) {
        out.i[j] = -sgn_pos(x[j] - 0.5) * 0.5;
    }
    out.alpha = -1;
    return out;
}

// --- integration -----------------------------------------------------------

struct State {
    std::vector<double> x;
    std::size_t t = 0;
    double k_prev = std::numeric_limits<double>::infinity();  // none yet
};

namespace detail {

inline std::string trace_to_csv(const std::deque<TraceRow>& rows) {
    std::ostringstream out;
    out << std::setprecision(17);
    out << "t,K,event\n";
    for (const TraceRow& r : rows) {
        out << r.t << ',' << r.k << ',' << event_name(r.event) << '\n';
    }
    return out.str();
}

inline void draw_uniform_point(std::vector<double>& x, Rng& rng) {
    for (double& v : x) v = rng.uniform01();
}

}  // namespace detail

// One Euler iteration. Computes the energy and gradient at state.x, decides
// whether a trap fired, applies the configured update, and advances t. The
// caller owns the generator (escapes and re-randomization draw from it) and
// the scratch gradient buffer. Returns the event applied and writes the
// pre-step energy to k_out.
inline Event step(const SignedInstance& si, State& state, const SolverConfig& cfg, Rng& rng,
                  std::vector<double>& grad_scratch, double& k_out,
                  std::vector<ImpulseEvent>* impulse_log = nullptr) {
    const double k_now = energy_and_gradient(si, state.x, grad_scratch);
    k_out = k_now;
    const bool trapped = cfg.escape != EscapeMode::None &&
                         detect_trap(state.k_prev, k_now, cfg.step, cfg.l0, cfg.eps_trap);
    Event ev = Event::Step;
    if (trapped && cfg.escape == EscapeMode::Impulse) {
        ImpulseVec iv = impulse_vector(grad_scratch, state.x, rng);
        if (impulse_log) {
            impulse_log->push_back(ImpulseEvent{state.t, iv.alpha, state.x, iv.i});
        }
        for (std::size_t j = 0; j < state.x.size(); ++j) {
            state.x[j] += cfg.step * (-grad_scratch[j] + iv.i[j]);
        }
        ev = Event::ImpulseFired;
    } else if (trapped && cfg.escape == EscapeMode::Randomize) {
        detail::draw_uniform_point(state.x, rng);
        ev = Event::RandomizeFired;
    } else {
        for (std::size_t j = 0; j < state.x.size(); ++j) {
            state.x[j] += cfg.step * (-grad_scratch[j]);
        }
    }
    if (cfg.clamp) {
        for (double& v : state.x) {
            if (v < 0.0) v = 0.0;
            if (v > 1.0) v = 1.0;
        }
    }
    state.k_prev = k_now;
    ++state.t;
    return ev;
}

// Full solve loop. Starts from cfg.init (or a uniform draw), iterates up to
// cfg.max_iters steps, and after every step rounds the point and verifies
// C*x = d in exact integer arithmetic. Deterministic given (instance, config).
inline SolveResult solve(const SignedInstance& si, const SolverConfig& cfg) {
    const std::size_t n = si.n();
    Rng rng(cfg.seed);
    State state;
    if (!cfg.init.empty()) {
        if (cfg.init.size() != n) {
            throw DimensionError("explicit init has wrong length");
        }
        state.x = cfg.init;
    } else {
        state.x.assign(n, 0.0);
        detail::draw_uniform_point(state.x, rng);
    }

    SolveResult res;
    std::vector<double> grad;
    std::vector<std::uint8_t> rounded(n);
    // Bounded ring of recent rows so a divergence error always carries
    // context even when full tracing is off.
    std::deque<TraceRow> recent;
    constexpr std::size_t kRecentCap = 64;

    for (std::size_t t = 0; t < cfg.max_iters; ++t) {
        double k_now = 0.0;
        const Event ev = step(si, state, cfg, rng, grad, k_now, cfg.impulse_log);
        if (ev != Event::Step) ++res.escapes_fired;

        const TraceRow row{t, k_now, ev};
        if (cfg.record_trace) res.trace.push_back(row);
        recent.push_back(row);
        if (recent.size() > kRecentCap) recent.pop_front();

        bool outside = false;
        bool finite = true;
        for (double v : state.x) {
            if (!std::isfinite(v)) finite = false;
            if (v < 0.0 || v > 1.0) outside = true;
        }
        if (!finite) {
            throw DivergenceError(t, detail::trace_to_csv(recent));
        }
        if (outside) ++res.outside_box_steps;

        for (std::size_t j = 0; j < n; ++j) {
            rounded[j] = state.x[j] >= 0.5 ? 1 : 0;
        }
        if (satisfies(si.original, rounded)) {
            res.status = SolveStatus::Solved;
            res.solution = rounded;
            res.iterations = t + 1;
            res.final_k = total_energy(si, state.x).k_total;
            res.final_x = std::move(state.x);
            return res;
        }
    }
    res.status = SolveStatus::BudgetExhausted;
    res.iterations = cfg.max_iters;
    res.final_k = total_energy(si, state.x).k_total;
    res.final_x = std::move(state.x);
    return res;
}

inline SolveResult solve(const Instance& inst, const SolverConfig& cfg) {
    return solve(normalize_signs(inst), cfg);
}

// Serializes a recorded trace in the export format (one row per iteration).
inline std::string trace_csv(const std::vector<TraceRow>& rows) {
    std::ostringstream out;
    out << std::setprecision(17);
    out << "t,K,event\n";
    for (const TraceRow& r : rows) {
        out << r.t << ',' << r.k << ',' << event_name(r.event) << '\n';
    }
    return out.str();
}

}  // namespace pulseilp
