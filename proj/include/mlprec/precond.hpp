#pragma once

#include <span>
#include <string>
#include <vector>

#include "mlprec/hierarchy.hpp"
#include "mlprec/solver.hpp"
#include "mlprec/sparse.hpp"

namespace mlprec {

enum class Family { mg, bpx, hbmg, wmhbmg };
enum class Mode { multiplicative, additive };
enum class SmootherKey { sgs, jacobi };

struct MethodConfig
{
    Family family = Family::mg;
    Mode mode = Mode::multiplicative;
    SmootherKey smoother = SmootherKey::sgs;
    bool exact_coarse = true;
    int jacobi_steps = 2;

    bool uses_change_of_basis() const { return family == Family::hbmg || family == Family::wmhbmg; }
    Basis basis() const
    {
        switch (family) {
        case Family::hbmg:
            return Basis::hb;
        case Family::wmhbmg:
            return Basis::wmhb;
        default:
            return Basis::nodal;
        }
    }
};

/// One smoothing step for A u = f over `indices` (all rows when empty and
/// `all` is set). SGS runs ascending then descending; Jacobi updates every
/// listed row from the old iterate. Rows outside the set are left alone.
void smooth_point(const RowMatrix& a, std::span<double> u, std::span<const double> f, SmootherKey key,
                  std::span<const std::size_t> indices);
void smooth_point(const RowMatrix& a, std::span<double> u, std::span<const double> f, SmootherKey key);

/// Smoothing on the fine block A22 only.
void smooth_point(const DrcMatrix& a22, std::span<double> u_fine, std::span<const double> f_fine,
                  SmootherKey key);

/// The multilevel V-cycle (multiplicative) or its additive counterpart for
/// one hierarchy. The hierarchy must outlive the preconditioner.
class MultilevelPreconditioner
{
public:
    /// Throws std::invalid_argument if the hierarchy does not carry what the
    /// family needs (level matrices for mg/bpx, blocks for hbmg/wmhbmg).
    MultilevelPreconditioner(const Hierarchy& hierarchy, MethodConfig config);

    const MethodConfig& config() const { return config_; }

    /// Applies the cycle on the finest level.
    Vector apply(std::span<const double> b) const;
    Vector apply(std::span<const double> b, std::size_t level) const;

    Vector multiplicative(std::span<const double> b, std::size_t level) const;
    Vector additive(std::span<const double> f, std::size_t level) const;

    LinearOperator as_operator() const
    {
        return [this](std::span<const double> r) { return apply(r); };
    }

private:
    Vector coarse_solve(std::span<const double> b) const;

    const Hierarchy* h_;
    MethodConfig config_;
    DirectSolver coarse_;
};

/// sum_j P_j S_j P_j^T f with P_j the composite prolongation from level j
/// to the finest and S_j one Jacobi (diagonal) scaling on the level-j
/// matrix, including level 0. Needs a nodal hierarchy.
Vector bpx_classical_apply(const Hierarchy& nodal, std::span<const double> f);

/// sum_j H_j S_j H_j^T f with H_j the composite prolongation of the tail
/// of P_j (fine DOF of level j), S_j one SGS step on A22 of the HB
/// hierarchy, and an exact solve on the coarsest level.
Vector hb_additive_apply(const Hierarchy& hb, std::span<const double> f);

/// The twelve method names of the experiment tables.
struct NamedMethod
{
    std::string name;
    MethodConfig config;
    bool krylov = false; // PCG around the cycle, else stationary iteration
};

const std::vector<NamedMethod>& standard_methods();
/// Throws std::invalid_argument for unknown names.
const NamedMethod& find_method(const std::string& name);

} // namespace mlprec
