#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "pulseilp/errors.hpp"
#include "pulseilp/instance.hpp"

namespace pulseilp {

// The energy of a relaxed point x in [0,1]^n against one constraint row,
// evaluated in that row's local coordinates u_i (u_i = x_i on positive
// entries, 1 - x_i on negative ones, coefficients |c_mi|, target d_adj):
//
//   K_m(u) = 1/2 * ((d_adj - sum_i c_i u_i) / S)^2  +  1/(2S) * sum_i c_i (u_i (1 - u_i))^2
//
// with S = sum_i c_i > 0. Both terms are scaled by the row sum so constraint
// magnitudes do not dominate each other. The first term is the squared
// residual; the second pushes coordinates toward binary values. K_m >= 0,
// and K_m = 0 exactly when u is binary and the row is satisfied.
//
// Two identities make evaluation in the original x cheap:
//   u_i (1 - u_i) = x_i (1 - x_i)                      (flip-invariant)
//   d_adj - sum |c| u = d_m - sum c x                  (residuals coincide)
// so the residual uses the original signed row while the penalty uses
// magnitudes. The gradient in x picks up the chain-rule sign du/dx = s_i:
//
//   dK_m/dx_i = ( |c_mi| * q_i - c_mi * r_m ) / S,
//     q_i = x_i (1 - x_i)(1 - 2 x_i),   r_m = (d_m - sum_j c_mj x_j) / S.
//
// The total energy is the mean over rows, K = (1/M) sum_m K_m.

constexpr double kEnergyZeroTol = 1e-12;  // "K is zero" tolerance for checks

struct EnergyEval {
    double k_total = 0.0;
    std::vector<double> k_per_constraint;
    std::vector<double> gradient;  // empty unless requested
};

namespace detail {

inline void check_point_length(const SignedInstance& si, const std::vector<double>& x) {
    if (x.size() != si.n()) {
        throw DimensionError("point length " + std::to_string(x.size()) + " does not match n = " +
                             std::to_string(si.n()));
    }
}

}  // namespace detail

// Energy of a single constraint row, written exactly as the defining formula
// in local u coordinates. The fast paths below are validated against this.
inline double constraint_energy(const SignedInstance& si, std::size_t m, const std::vector<double>& x) {
    if (m >= si.m()) {
        throw DimensionError("constraint index " + std::to_string(m) + " out of range");
    }
    detail::check_point_length(si, x);
    const double S = static_cast<double>(si.row_sums[m]);
    double dot = 0.0;
    double pen = 0.0;
    for (std::size_t i = 0; i < si.n(); ++i) {
        const double c = static_cast<double>(si.base[m][i]);
        const double u = si.signs[m][i] > 0 ? x[i] : 1.0 - x[i];
        dot += c * u;
        const double p = u * (1.0 - u);
        pen += c * p * p;
    }
    const double r = (static_cast<double>(si.d_adj[m]) - dot) / S;
    return 0.5 * r * r + pen / (2.0 * S);
}

// Total energy only (mean of the rows).
inline EnergyEval total_energy(const SignedInstance& si, const std::vector<double>& x) {
    detail::check_point_length(si, x);
    EnergyEval ev;
    ev.k_per_constraint.resize(si.m());
    double sum = 0.0;
    for (std::size_t m = 0; m < si.m(); ++m) {
        ev.k_per_constraint[m] = constraint_energy(si, m, x);
        sum += ev.k_per_constraint[m];
    }
    ev.k_total = sum / static_cast<double>(si.m());
    return ev;
}

// Energy and analytic gradient in one pass. `grad` is resized to n; scratch
// reuse across solver iterations avoids per-step allocation. Returns K(x).
inline double energy_and_gradient(const SignedInstance& si, const std::vector<double>& x,
                                  std::vector<double>& grad) {
    detail::check_point_length(si, x);
    const std::size_t M = si.m();
    const std::size_t N = si.n();
    grad.assign(N, 0.0);
    double k_total = 0.0;
    for (std::size_t m = 0; m < M; ++m) {
        const auto& base = si.base[m];
        const auto& sign = si.signs[m];
        const double S = static_cast<double>(si.row_sums[m]);
        double dot = 0.0;   // sum_i c_mi x_i with original signs
        double pen = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double a = static_cast<double>(base[i]);
            const double xv = x[i];
            dot += (sign[i] > 0 ? a : -a) * xv;
            const double p = xv * (1.0 - xv);
            pen += a * p * p;
        }
        const double r = (static_cast<double>(si.original.d[m]) - dot) / S;
        k_total += 0.5 * r * r + pen / (2.0 * S);
        for (std::size_t i = 0; i < N; ++i) {
            const double a = static_cast<double>(base[i]);
            if (a == 0.0) continue;  // the row does not touch x_i
            const double xv = x[i];
            const double q = xv * (1.0 - xv) * (1.0 - 2.0 * xv);
            const double c = sign[i] > 0 ? a : -a;
            grad[i] += (a * q - c * r) / S;
        }
    }
    const double inv_m = 1.0 / static_cast<double>(M);
    for (std::size_t i = 0; i < N; ++i) grad[i] *= inv_m;
    return k_total * inv_m;
}

inline std::vector<double> gradient(const SignedInstance& si, const std::vector<double>& x) {
    std::vector<double> g;
    energy_and_gradient(si, x, g);
    return g;
}

// Central-difference gradient of the total energy; the validation oracle for
// the analytic formula.
inline std::vector<double> finite_diff_gradient(const SignedInstance& si, const std::vector<double>& x,
                                                double h = 1e-6) {
    detail::check_point_length(si, x);
    std::vector<double> g(si.n());
    std::vector<double> probe = x;
    for (std::size_t i = 0; i < si.n(); ++i) {
        const double orig = probe[i];
        probe[i] = orig + h;
        const double up = total_energy(si, probe).k_total;
        probe[i] = orig - h;
        const double dn = total_energy(si, probe).k_total;
        probe[i] = orig;
        g[i] = (up - dn) / (2.0 * h);
    }
    return g;
}

}  // namespace pulseilp
