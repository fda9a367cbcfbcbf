#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace spanpca {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Sorted, duplicate-free list of 0-based feature indices.
using Support = std::vector<Index>;

/// Base class for failures of the numerical machinery (as opposed to bad input).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An iterative eigensolver hit its iteration cap.
class ConvergenceError : public NumericError {
public:
    ConvergenceError(const std::string& what, double best_residual)
        : NumericError(what), best_residual_(best_residual) {}
    double best_residual() const noexcept { return best_residual_; }

private:
    double best_residual_;
};

/// The curve-intersection system of a tuple has a nullspace of dimension > 1.
class DegenerateIntersection : public NumericError {
public:
    using NumericError::NumericError;
};

/// Largest rank the combinatorial search accepts.
inline constexpr Index kMaxRank = 6;

}  // namespace spanpca
