#pragma once

#include <stdexcept>
#include <string>

namespace attnplan {

/// Absolute tolerance used when checking that probability rows are normalized.
inline constexpr double kStochasticTol = 1e-9;

/// Default convergence tolerance for the iterative solvers.
inline constexpr double kDefaultTol = 1e-6;

/// Default iteration cap for the iterative solvers.
inline constexpr int kDefaultMaxIters = 1000000;

/// Sweep-delta threshold for fixed-point iteration with contraction factor
/// `discount`. Stopping once successive iterates differ by at most this keeps
/// the sup-norm distance to the fixed point, and a fortiori the Bellman
/// residual, within tol: a final delta d implies an error of d*g/(1-g).
inline double sweep_threshold(double tol, double discount) {
    if (discount <= 0.5) return tol;
    return tol * (1.0 - discount) / discount;
}

struct NonConvergence : std::runtime_error {
    explicit NonConvergence(const std::string& what) : std::runtime_error(what) {}
};

struct DiscountOne : std::invalid_argument {
    explicit DiscountOne(const std::string& what) : std::invalid_argument(what) {}
};

struct EmptyPreimage : std::runtime_error {
    explicit EmptyPreimage(const std::string& what) : std::runtime_error(what) {}
};

struct ModeNotParentClosed : std::invalid_argument {
    explicit ModeNotParentClosed(const std::string& what) : std::invalid_argument(what) {}
};

struct StateSpaceTooLarge : std::runtime_error {
    explicit StateSpaceTooLarge(const std::string& what) : std::runtime_error(what) {}
};

struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace attnplan
