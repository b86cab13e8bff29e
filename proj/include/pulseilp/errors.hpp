#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pulseilp {

// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Structural problems with an instance: row/column mismatches, empty matrices.
struct DimensionError : Error {
    using Error::Error;
};

// A constraint row whose coefficients are all zero; the energy denominator
// sum(|c_i|) would vanish, so these are rejected at construction.
struct ZeroRowError : Error {
    using Error::Error;
};

// Text-format errors carry the 1-based position of the offending token.
struct ParseError : Error {
    std::size_t line = 0;
    std::size_t col = 0;
    ParseError(const std::string& msg, std::size_t line_, std::size_t col_)
        : Error(msg + " (line " + std::to_string(line_) + ", col " + std::to_string(col_) + ")"),
          line(line_),
          col(col_) {}
};

// The moving point picked up a NaN or infinity. The solver attaches the trace
// collected so far (if tracing was on) so the blow-up can be inspected.
struct DivergenceError : Error {
    std::size_t iteration = 0;
    // (t, K, event) rows recorded before the blow-up; see dynamics.hpp.
    std::string trace_csv;
    DivergenceError(std::size_t iteration_, std::string trace)
        : Error("state diverged to NaN/inf at iteration " + std::to_string(iteration_)),
          iteration(iteration_),
          trace_csv(std::move(trace)) {}
};

// Statistical routines require a minimum sample size (3 for t-test/Pearson).
struct UndersizedSampleError : Error {
    using Error::Error;
};

// The exhaustive oracle refuses N > 30 rather than hang.
struct DimensionCapError : Error {
    using Error::Error;
};

}  // namespace pulseilp
