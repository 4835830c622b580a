#include "mlprec/solver.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <cmath>
#include <limits>

#include "mlprec/assembly.hpp"
#include "mlprec/flops.hpp"

namespace mlprec {

struct DirectSolver::Factor
{
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt;
};

DirectSolver::DirectSolver(const RowMatrix& a) : n_(a.rows())
{
    if (a.rows() != a.cols())
        throw FactorizationError("DirectSolver: matrix is not square");
    std::vector<Eigen::Triplet<double>> t;
    for (const auto& e : a.triplets())
        t.emplace_back(static_cast<int>(e.row), static_cast<int>(e.col), e.value);
    Eigen::SparseMatrix<double> m(static_cast<int>(n_), static_cast<int>(n_));
    m.setFromTriplets(t.begin(), t.end());

    auto f = std::make_shared<Factor>();
    if (n_ > 0) {
        f->llt.compute(m);
        if (f->llt.info() != Eigen::Success)
            throw FactorizationError("DirectSolver: matrix is not positive definite");
        const auto nnz_l = static_cast<std::uint64_t>(f->llt.matrixL().nestedExpression().nonZeros());
        solve_flops_ = 4 * (nnz_l - n_) + 2 * n_;
    }
    factor_ = std::move(f);
}

Vector DirectSolver::solve(std::span<const double> b) const
{
    if (b.size() != n_)
        throw std::invalid_argument("DirectSolver::solve: dimension mismatch");
    if (n_ == 0)
        return {};
    Eigen::Map<const Eigen::VectorXd> rhs(b.data(), static_cast<Eigen::Index>(n_));
    const Eigen::VectorXd x = factor_->llt.solve(rhs);
    if (flops::active_counter) {
        // Two substitutions: one division per row, the rest multiply-adds.
        const std::uint64_t divs = 2 * n_;
        flops::div(divs);
        flops::madd((solve_flops_ - divs) / 2);
    }
    return Vector(x.data(), x.data() + x.size());
}

double tridiagonal_condition(std::span<const double> diag, std::span<const double> off)
{
    const auto n = static_cast<Eigen::Index>(diag.size());
    if (n == 0)
        return 0.0;
    if (n == 1)
        return 1.0;
    Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(diag.data(), n);
    Eigen::VectorXd e = Eigen::Map<const Eigen::VectorXd>(off.data(), n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
    eig.computeFromTridiagonal(d, e, Eigen::EigenvaluesOnly);
    const auto& ev = eig.eigenvalues();
    return ev(n - 1) / ev(0);
}

namespace {

double dot(std::span<const double> x, std::span<const double> y)
{
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        s += x[i] * y[i];
    flops::madd(x.size());
    return s;
}

double error_norm(const RowMatrix& a, std::span<const double> u, std::span<const double> u_ref)
{
    FlopPause pause;
    Vector e(u.size());
    for (std::size_t i = 0; i < u.size(); ++i)
        e[i] = u[i] - u_ref[i];
    return energy_norm(a, e);
}

double residual_norm(std::span<const double> r)
{
    FlopPause pause;
    return std::sqrt(dot(r, r));
}

Vector start_vector(std::size_t n, const SolveOptions& options)
{
    if (options.initial_guess.empty())
        return Vector(n, 0.0);
    if (options.initial_guess.size() != n)
        throw std::invalid_argument("solve: initial guess has the wrong size");
    return options.initial_guess;
}

void check_sizes(const RowMatrix& a, std::span<const double> b, std::span<const double> u_ref)
{
    if (a.rows() != a.cols() || b.size() != a.rows() || u_ref.size() != a.rows())
        throw std::invalid_argument("solve: dimension mismatch");
}

} // namespace

SolveReport stationary_solve(const RowMatrix& a, std::span<const double> b, const LinearOperator& cycle,
                             std::span<const double> u_ref, const SolveOptions& options)
{
    check_sizes(a, b, u_ref);
    SolveReport rep;
    Vector u = start_vector(a.rows(), options);
    const double initial = error_norm(a, u, u_ref);
    rep.error_history.push_back(initial);

    FlopCounter total;
    {
        FlopScope scope(total);
        double err = initial;
        while (err >= options.tolerance && rep.iterations < options.max_iterations) {
            Vector r(b.begin(), b.end());
            a.multiply_add(u, r, -1.0);
            rep.residual_history.push_back(residual_norm(r));

            FlopCounter cycle_flops;
            Vector c;
            {
                FlopScope cs(cycle_flops);
                c = cycle(r);
            }
            if (rep.iterations == 0)
                rep.flops_per_cycle = cycle_flops.total();
            for (std::size_t i = 0; i < u.size(); ++i)
                u[i] += c[i];
            flops::add(u.size());

            ++rep.iterations;
            err = error_norm(a, u, u_ref);
            rep.error_history.push_back(err);
            if (!(err <= 10.0 * initial))
                throw DivergenceError("stationary_solve: error grew tenfold");
        }
        rep.converged = err < options.tolerance;
    }
    rep.flops_total = total.total();
    rep.flops_per_iteration = rep.iterations ? rep.flops_total / rep.iterations : 0;
    rep.solution = std::move(u);
    return rep;
}

SolveReport pcg(const RowMatrix& a, std::span<const double> b, const LinearOperator& precond,
                std::span<const double> u_ref, const SolveOptions& options)
{
    check_sizes(a, b, u_ref);
    const std::size_t n = a.rows();
    SolveReport rep;
    Vector u = start_vector(n, options);
    double err = error_norm(a, u, u_ref);
    rep.error_history.push_back(err);

    std::vector<double> alphas;
    std::vector<double> betas;
    FlopCounter total;
    {
        FlopScope scope(total);
        Vector r(b.begin(), b.end());
        a.multiply_add(u, r, -1.0);
        rep.residual_history.push_back(residual_norm(r));

        auto apply = [&](const Vector& v) {
            FlopCounter cf;
            Vector z;
            {
                FlopScope cs(cf);
                z = precond(v);
            }
            if (rep.flops_per_cycle == 0)
                rep.flops_per_cycle = cf.total();
            return z;
        };

        Vector z;
        Vector p;
        double rz = 0.0;
        if (err >= options.tolerance) {
            z = apply(r);
            rz = dot(r, z);
            if (!(rz > 0.0))
                throw IndefinitePreconditionerError("pcg: <B r, r> is not positive");
            p = z;
        }
        Vector ap(n);
        while (err >= options.tolerance && rep.iterations < options.max_iterations) {
            std::fill(ap.begin(), ap.end(), 0.0);
            a.multiply_add(p, ap);
            const double pap = dot(p, ap);
            const double alpha = rz / pap;
            flops::div(1);
            for (std::size_t i = 0; i < n; ++i) {
                u[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            flops::madd(2 * n);
            alphas.push_back(alpha);
            ++rep.iterations;

            err = error_norm(a, u, u_ref);
            rep.error_history.push_back(err);
            rep.residual_history.push_back(residual_norm(r));
            if (err < options.tolerance)
                break;

            z = apply(r);
            const double rz_next = dot(r, z);
            if (!(rz_next > 0.0))
                throw IndefinitePreconditionerError("pcg: <B r, r> is not positive");
            const double beta = rz_next / rz;
            flops::div(1);
            betas.push_back(beta);
            rz = rz_next;
            for (std::size_t i = 0; i < n; ++i)
                p[i] = z[i] + beta * p[i];
            flops::madd(n);
        }
        rep.converged = err < options.tolerance;
    }
    rep.flops_total = total.total();
    rep.flops_per_iteration = rep.iterations ? rep.flops_total / rep.iterations : 0;

    // T(k,k) = 1/alpha_k + beta_{k-1}/alpha_{k-1}, T(k,k+1) = sqrt(beta_k)/alpha_k.
    const std::size_t m = alphas.size();
    std::vector<double> diag(m);
    std::vector<double> off(m > 0 ? m - 1 : 0);
    for (std::size_t k = 0; k < m; ++k) {
        diag[k] = 1.0 / alphas[k];
        if (k > 0)
            diag[k] += betas[k - 1] / alphas[k - 1];
        if (k + 1 < m)
            off[k] = std::sqrt(betas[k]) / alphas[k];
    }
    rep.cond_estimate = tridiagonal_condition(diag, off);
    rep.solution = std::move(u);
    return rep;
}

} // namespace mlprec
