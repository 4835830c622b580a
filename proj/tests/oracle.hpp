#pragma once

// Dense reference computations used as independent oracles by the tests.

#include <Eigen/Dense>
#include <random>
#include <span>
#include <vector>

#include "mlprec/sparse.hpp"

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline MatrixXd dense(std::size_t rows, std::size_t cols, std::span<const mlprec::Triplet> t)
{
    MatrixXd m = MatrixXd::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (const auto& e : t)
        m(static_cast<Eigen::Index>(e.row), static_cast<Eigen::Index>(e.col)) += e.value;
    return m;
}

inline MatrixXd dense(const mlprec::ColMatrix& a) { return dense(a.rows(), a.cols(), a.triplets()); }
inline MatrixXd dense(const mlprec::RowMatrix& a) { return dense(a.rows(), a.cols(), a.triplets()); }
inline MatrixXd dense(const mlprec::DrcMatrix& a) { return dense(a.size(), a.size(), a.triplets()); }
inline MatrixXd dense(const mlprec::XlnMatrix& a) { return dense(a.rows(), a.cols(), a.triplets()); }

inline std::vector<mlprec::Triplet> triplets_of(const MatrixXd& m)
{
    std::vector<mlprec::Triplet> t;
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            if (m(i, j) != 0.0)
                t.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j), m(i, j)});
    return t;
}

inline VectorXd vec(std::span<const double> v)
{
    return Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline std::vector<double> stl(const VectorXd& v) { return {v.data(), v.data() + v.size()}; }

inline double max_abs(const MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

inline double rel_diff(const MatrixXd& a, const MatrixXd& b)
{
    const double scale = std::max(1.0, max_abs(b));
    return max_abs(a - b) / scale;
}

inline std::vector<double> random_vector(std::size_t n, std::mt19937& rng)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v)
        x = u(rng);
    return v;
}

/// Sparse random matrix with density `fill`.
inline MatrixXd random_sparse(std::size_t rows, std::size_t cols, double fill, std::mt19937& rng)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::bernoulli_distribution keep(fill);
    MatrixXd m = MatrixXd::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            if (keep(rng))
                m(i, j) = u(rng);
    return m;
}

/// Symmetric positive definite with a symmetric sparsity pattern and a full diagonal.
inline MatrixXd random_spd(std::size_t n, double fill, std::mt19937& rng)
{
    MatrixXd b = random_sparse(n, n, fill, rng);
    MatrixXd s = b + b.transpose();
    for (Eigen::Index i = 0; i < s.rows(); ++i)
        s(i, i) = s.row(i).cwiseAbs().sum() + 1.0;
    return s;
}

/// One forward then one backward Gauss-Seidel sweep written as triangular solves.
inline VectorXd symmetric_gauss_seidel(const MatrixXd& a, const VectorXd& u0, const VectorXd& f)
{
    const MatrixXd lower = a.triangularView<Eigen::Lower>();
    const MatrixXd strict_upper = a.triangularView<Eigen::StrictlyUpper>();
    const VectorXd half = lower.triangularView<Eigen::Lower>().solve(f - strict_upper * u0);
    const MatrixXd upper = a.triangularView<Eigen::Upper>();
    const MatrixXd strict_lower = a.triangularView<Eigen::StrictlyLower>();
    return upper.triangularView<Eigen::Upper>().solve(f - strict_lower * half);
}

/// Spectral radius by power iteration on a square dense matrix.
inline double spectral_radius(const MatrixXd& m)
{
    Eigen::EigenSolver<MatrixXd> es(m, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

} // namespace oracle
