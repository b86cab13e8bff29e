#pragma once

#include <bit>
#include <cstdint>
#include <optional>
#include <vector>

#include "pulseilp/errors.hpp"
#include "pulseilp/instance.hpp"
#include "pulseilp/rng.hpp"

namespace pulseilp {

// Brute-force ground truth: enumerate all 2^n binary vectors and keep the
// ones satisfying C*x = d exactly. Deliberately has no cleverness beyond a
// Gray-code walk (one bit flips per candidate, so the running row sums update
// in O(m) instead of O(m*n)). Hard-capped at n = 30; beyond that the oracle
// refuses rather than hangs.

constexpr std::size_t kOracleMaxN = 30;

struct OracleResult {
    std::vector<std::vector<std::uint8_t>> solutions;
    std::size_t count = 0;        // == solutions.size()
    std::uint64_t enumerated = 0; // candidates examined (2^n unless truncated)
    bool truncated = false;       // stopped early at `limit`
};

namespace detail {

inline void check_oracle_n(const Instance& inst) {
    if (inst.n > kOracleMaxN) {
        throw DimensionCapError("exhaustive search capped at n <= " + std::to_string(kOracleMaxN) +
                                ", got n = " + std::to_string(inst.n));
    }
}

}  // namespace detail

// Enumerates solutions; stops early once `limit` solutions are found.
inline OracleResult exhaustive_solve(const Instance& inst,
                                     std::optional<std::size_t> limit = std::nullopt) {
    detail::check_oracle_n(inst);
    OracleResult res;
    const std::uint64_t total = std::uint64_t(1) << inst.n;
    std::vector<std::int64_t> acc(inst.m, 0);  // running C*x for the current x
    std::vector<std::uint8_t> x(inst.n, 0);

    auto record_if_solution = [&]() {
        for (std::size_t m = 0; m < inst.m; ++m) {
            if (acc[m] != inst.d[m]) return false;
        }
        res.solutions.push_back(x);
        return true;
    };

    res.enumerated = 1;
    if (record_if_solution() && limit && res.solutions.size() >= *limit) {
        res.count = res.solutions.size();
        res.truncated = true;
        return res;
    }
    for (std::uint64_t i = 1; i < total; ++i) {
        const unsigned j = static_cast<unsigned>(std::countr_zero(i));  // Gray-code flip position
        x[j] ^= 1;
        if (x[j]) {
            for (std::size_t m = 0; m < inst.m; ++m) acc[m] += inst.c[m][j];
        } else {
            for (std::size_t m = 0; m < inst.m; ++m) acc[m] -= inst.c[m][j];
        }
        ++res.enumerated;
        if (record_if_solution() && limit && res.solutions.size() >= *limit) {
            res.truncated = i + 1 < total;
            break;
        }
    }
    res.count = res.solutions.size();
    return res;
}

// Counts solutions without storing them (an instance can have exponentially
// many).
inline std::uint64_t count_solutions(const Instance& inst) {
    detail::check_oracle_n(inst);
    const std::uint64_t total = std::uint64_t(1) << inst.n;
    std::vector<std::int64_t> acc(inst.m, 0);
    std::vector<std::uint8_t> x(inst.n, 0);
    std::uint64_t count = 0;
    auto hit = [&]() {
        for (std::size_t m = 0; m < inst.m; ++m) {
            if (acc[m] != inst.d[m]) return false;
        }
        return true;
    };
    if (hit()) ++count;
    for (std::uint64_t i = 1; i < total; ++i) {
        const unsigned j = static_cast<unsigned>(std::countr_zero(i));
        x[j] ^= 1;
        if (x[j]) {
            for (std::size_t m = 0; m < inst.m; ++m) acc[m] += inst.c[m][j];
        } else {
            for (std::size_t m = 0; m < inst.m; ++m) acc[m] -= inst.c[m][j];
        }
        if (hit()) ++count;
    }
    return count;
}

// Membership test against the ground truth; equivalent to exact verification.
inline bool oracle_contains(const Instance& inst, const std::vector<std::uint8_t>& x) {
    return x.size() == inst.n && satisfies(inst, x);
}

// Membership in an enumerated solution list (linear scan; lists stay small at
// oracle-friendly sizes).
inline bool oracle_contains(const OracleResult& res, const std::vector<std::uint8_t>& x) {
    for (const auto& s : res.solutions) {
        if (s == x) return true;
    }
    return false;
}

// Randomized-order search baseline: enumerate candidates in a random
// permutation and report (1 + index of the first solution) / 2^n. On
// instances with a unique solution this fraction is uniform on (0, 1], which
// is the reference distribution the solver's time-to-solution is compared
// against. Capped at n <= 20 (the permutation is materialised).
inline double uniform_search_fraction(const Instance& inst, Rng& rng) {
    if (inst.n > 20) {
        throw DimensionCapError("randomized-order search capped at n <= 20");
    }
    const std::uint64_t total = std::uint64_t(1) << inst.n;
    std::vector<std::uint32_t> order(total);
    for (std::uint64_t i = 0; i < total; ++i) order[i] = static_cast<std::uint32_t>(i);
    for (std::uint64_t i = total - 1; i > 0; --i) {
        const std::uint64_t j = static_cast<std::uint64_t>(rng.uniform_int(0, static_cast<std::int64_t>(i)));
        std::swap(order[i], order[j]);
    }
    std::vector<std::uint8_t> x(inst.n);
    for (std::uint64_t pos = 0; pos < total; ++pos) {
        const std::uint32_t mask = order[pos];
        for (std::size_t b = 0; b < inst.n; ++b) {
            x[b] = (mask >> b) & 1u;
        }
        if (satisfies(inst, x)) {
            return static_cast<double>(pos + 1) / static_cast<double>(total);
        }
    }
    return 1.0;  // infeasible: the whole space was examined
}

}  // namespace pulseilp
