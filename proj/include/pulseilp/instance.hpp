#pragma once

#include <cstdint>
#include <cstdlib>
#include <string>
#include <utility>
#include <vector>

#include "pulseilp/errors.hpp"
#include "pulseilp/rng.hpp"

namespace pulseilp {

// A 0-1 integer feasibility problem: find binary x with C*x = d.
// Coefficients are exact integers; no floating point enters the problem data.
struct Instance {
    std::size_t m = 0;  // constraints
    std::size_t n = 0;  // variables
    std::vector<std::vector<std::int64_t>> c;  // m rows of n coefficients
    std::vector<std::int64_t> d;               // m targets

    bool operator==(const Instance&) const = default;
};

// Validates and builds an Instance. Rejects empty shapes, ragged rows, and
// all-zero constraint rows (the energy divides by sum(|c_i|); a zero row is
// either trivially satisfied or infeasible and carries no gradient signal).
inline Instance make_instance(std::vector<std::vector<std::int64_t>> c, std::vector<std::int64_t> d) {
    if (c.empty() || d.empty()) {
        throw DimensionError("instance needs at least one constraint row");
    }
    if (c.size() != d.size()) {
        throw DimensionError("row count " + std::to_string(c.size()) + " does not match target count " +
                             std::to_string(d.size()));
    }
    const std::size_t n = c.front().size();
    if (n == 0) {
        throw DimensionError("instance needs at least one variable");
    }
    for (std::size_t row = 0; row < c.size(); ++row) {
        if (c[row].size() != n) {
            throw DimensionError("row " + std::to_string(row) + " has " + std::to_string(c[row].size()) +
                                 " coefficients, expected " + std::to_string(n));
        }
        bool all_zero = true;
        for (std::int64_t v : c[row]) {
            if (v != 0) {
                all_zero = false;
                break;
            }
        }
        if (all_zero) {
            throw ZeroRowError("constraint row " + std::to_string(row) + " is all zeros");
        }
    }
    Instance inst;
    inst.m = c.size();
    inst.n = n;
    inst.c = std::move(c);
    inst.d = std::move(d);
    return inst;
}

// Exact integer check of C*x = d for a binary vector. This is the single
// source of truth for "solved" everywhere in the library.
inline bool satisfies(const Instance& inst, const std::vector<std::uint8_t>& x) {
    for (std::size_t m = 0; m < inst.m; ++m) {
        std::int64_t acc = 0;
        for (std::size_t i = 0; i < inst.n; ++i) {
            if (x[i]) acc += inst.c[m][i];
        }
        if (acc != inst.d[m]) return false;
    }
    return true;
}

// The negative-coefficient transformation. Each constraint keeps coefficient
// magnitudes |c_mi| plus a per-entry sign; wherever the original coefficient
// was negative the constraint is read in the substituted variable u = 1 - x,
// which shifts the target: d_adj[m] = d[m] + sum of |c_mi| over negative
// entries. Feasibility of binary vectors is preserved exactly.
//
// The mask representation (rather than materialising per-constraint variables
// y_mi) keeps one shared x; the dynamics applies the chain-rule sign when it
// maps per-constraint derivatives back to x.
struct SignedInstance {
    Instance original;                              // kept for exact checks & I/O
    std::vector<std::vector<std::int64_t>> base;    // |c_mi| >= 0
    std::vector<std::vector<std::int8_t>> signs;    // +1 / -1 (sign of original c_mi; zero -> +1)
    std::vector<std::int64_t> d_adj;                // shifted targets
    std::vector<std::int64_t> row_sums;             // sum_i |c_mi| > 0

    std::size_t m() const { return original.m; }
    std::size_t n() const { return original.n; }
};

inline SignedInstance normalize_signs(Instance inst) {
    SignedInstance si;
    si.base.resize(inst.m);
    si.signs.resize(inst.m);
    si.d_adj.resize(inst.m);
    si.row_sums.resize(inst.m);
    for (std::size_t m = 0; m < inst.m; ++m) {
        si.base[m].resize(inst.n);
        si.signs[m].resize(inst.n);
        std::int64_t shift = 0;
        std::int64_t row_sum = 0;
        for (std::size_t i = 0; i < inst.n; ++i) {
            const std::int64_t v = inst.c[m][i];
            const std::int64_t a = v < 0 ? -v : v;
            si.base[m][i] = a;
            si.signs[m][i] = v < 0 ? -1 : 1;
            if (v < 0) shift += a;
            row_sum += a;
        }
        si.d_adj[m] = inst.d[m] + shift;
        si.row_sums[m] = row_sum;  // > 0: zero rows rejected by make_instance
    }
    si.original = std::move(inst);
    return si;
}

// Generation spec for planted-feasible instances. Coefficients are i.i.d.
// uniform on {0..r}; the planted solution x* is uniform on {0,1}^n and
// d = C*x*, so feasibility holds by construction. Rows that come out all-zero
// are redrawn (they would be rejected by make_instance).
struct GenSpec {
    std::size_t m = 1;
    std::size_t n = 1;
    std::int64_t r = 1;  // coefficient range, must be >= 1
    std::uint64_t seed = 0;
};

struct Planted {
    Instance instance;
    std::vector<std::uint8_t> solution;
};

inline Planted generate_planted(const GenSpec& spec) {
    if (spec.m < 1 || spec.n < 1 || spec.r < 1) {
        throw DimensionError("generation needs m >= 1, n >= 1, r >= 1");
    }
    Rng rng(spec.seed);
    std::vector<std::vector<std::int64_t>> c(spec.m);
    for (std::size_t m = 0; m < spec.m; ++m) {
        c[m].resize(spec.n);
        bool all_zero = true;
        do {
            all_zero = true;
            for (std::size_t i = 0; i < spec.n; ++i) {
                c[m][i] = rng.uniform_int(0, spec.r);
                if (c[m][i] != 0) all_zero = false;
            }
        } while (all_zero);
    }
    std::vector<std::uint8_t> xs(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) {
        xs[i] = rng.coin() ? 1 : 0;
    }
    std::vector<std::int64_t> d(spec.m);
    for (std::size_t m = 0; m < spec.m; ++m) {
        std::int64_t acc = 0;
        for (std::size_t i = 0; i < spec.n; ++i) {
            if (xs[i]) acc += c[m][i];
        }
        d[m] = acc;
    }
    return Planted{make_instance(std::move(c), std::move(d)), std::move(xs)};
}

}  // namespace pulseilp
