#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>

#include "mlprec/sparse.hpp"

namespace mlprec {

class FactorizationError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class DivergenceError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class IndefinitePreconditionerError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Sparse Cholesky factorization with a counted triangular solve.
class DirectSolver
{
public:
    DirectSolver() = default;
    /// Throws FactorizationError unless `a` is symmetric positive definite.
    explicit DirectSolver(const RowMatrix& a);

    std::size_t size() const { return n_; }
    Vector solve(std::span<const double> b) const;
    /// Flops charged per solve: two triangular substitutions.
    std::uint64_t solve_flops() const { return solve_flops_; }

private:
    struct Factor;
    std::shared_ptr<const Factor> factor_;
    std::size_t n_ = 0;
    std::uint64_t solve_flops_ = 0;
};

/// A linear map r -> B r.
using LinearOperator = std::function<Vector(std::span<const double>)>;

struct SolveOptions
{
    double tolerance = 1e-7;
    std::size_t max_iterations = 500;
    /// Zero if empty.
    Vector initial_guess;
};

struct SolveReport
{
    std::size_t iterations = 0;
    bool converged = false;
    /// One application of the preconditioner (the first one).
    std::uint64_t flops_per_cycle = 0;
    /// Everything counted over the iteration, divided by the iteration count.
    std::uint64_t flops_per_iteration = 0;
    std::uint64_t flops_total = 0;
    std::vector<double> residual_history;
    std::vector<double> error_history;
    /// lambda_max / lambda_min of the Lanczos matrix (PCG only).
    double cond_estimate = 0.0;
    Vector solution;
};

/// u <- u + B (b - A u) until ||u - u_ref||_A < tolerance. Throws
/// DivergenceError once the error exceeds ten times the initial error.
SolveReport stationary_solve(const RowMatrix& a, std::span<const double> b, const LinearOperator& cycle,
                             std::span<const double> u_ref, const SolveOptions& options = {});

/// Preconditioned conjugate gradients with the same stopping test. The
/// Lanczos matrix built from the step lengths gives the condition estimate.
SolveReport pcg(const RowMatrix& a, std::span<const double> b, const LinearOperator& precond,
                std::span<const double> u_ref, const SolveOptions& options = {});

/// Extreme eigenvalue ratio of the symmetric tridiagonal matrix
/// tridiag(off, diag, off).
double tridiagonal_condition(std::span<const double> diag, std::span<const double> off);

} // namespace mlprec
