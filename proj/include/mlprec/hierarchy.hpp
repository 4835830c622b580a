#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "mlprec/assembly.hpp"
#include "mlprec/flops.hpp"
#include "mlprec/mesh.hpp"
#include "mlprec/sparse.hpp"

namespace mlprec {

/// Maps level j-1 coefficients to level j: identity on the inherited DOF,
/// linear interpolation on the new ones.
struct Prolongation
{
    std::size_t n_coarse = 0; // N_{j-1}
    std::size_t n_fine = 0;   // n_j = N_j - N_{j-1}
    ColMatrix matrix;         // N_j x N_{j-1}
    RowMatrix tail;           // last n_j rows of `matrix`
};

/// Prolongation from level-1 to level (level >= 1). Throws std::logic_error
/// if a new vertex has a parent that is not a level-1 vertex.
Prolongation build_prolongation(const Mesh& mesh, const DofMap& dofs, std::size_t level);

enum class Basis { nodal, hb, wmhb };

/// How inv[M11] is approximated for the wavelet modification.
enum class InverseApprox { jacobi, sgs };

/// G = I + S with S = [[0, K12], [K21, K22]] in coarse/fine block layout.
struct ChangeOfBasis
{
    RowMatrix k21;        // n_j x N_{j-1}
    ColMatrix k12;        // N_{j-1} x n_j, empty for HB
    ColMatrix k22;        // n_j x n_j, empty for HB
    ColMatrix stabilizer; // S, N_j x N_j
};

ChangeOfBasis hb_stabilizer(const Prolongation& p);

/// K12 = -inv[M11] M12 with inv[.] replaced by `steps` iterations of the
/// chosen method from a zero guess; K22 = K21 K12.
ChangeOfBasis wmhb_stabilizer(const Prolongation& p, const RowMatrix& m11, const ColMatrix& m12,
                              int steps = 2, InverseApprox approx = InverseApprox::jacobi);

/// `steps` Jacobi (or symmetric Gauss-Seidel) iterations for M x = m from
/// x = 0. Jacobi keeps the work proportional to the entries reached.
Vector approximate_inverse_apply(const RowMatrix& m, std::span<const double> rhs, int steps,
                                 InverseApprox approx);

/// HB-transformed mass matrix blocks at one level.
struct MassBlocks
{
    RowMatrix m11; // N_{j-1} x N_{j-1}
    ColMatrix m12; // N_{j-1} x n_j
};

/// Result of running the change of basis from the finest level down.
struct TransformedSystem
{
    /// Index j - 1 holds the blocks split off at level j.
    std::vector<StrippedBlocks> blocks;
    RowMatrix coarse;
    /// Nodal level matrices met on the way down (index j), if requested.
    std::vector<RowMatrix> snapshots;
};

/// Copies `a` into linked storage and, level by level from the finest,
/// forms A + A K, then K^T A, splits off A12/A21/A22 and descends with A11.
/// changes[j - 1] is the change of basis of level j.
TransformedSystem run_change_of_basis(const XlnMatrix& a, std::span<const ChangeOfBasis> changes,
                                      bool keep_snapshots = false);

/// Sorted union of {r} and the columns of row r, over the rows r >= first_fine.
std::vector<std::size_t> one_ring(const RowMatrix& a, std::size_t first_fine);

struct HierarchyLevel
{
    Prolongation prolongation;
    ChangeOfBasis change;
    StrippedBlocks blocks;
    /// Nodal level matrix; kept for nodal hierarchies or on request.
    RowMatrix full;
    std::vector<std::size_t> oner;
};

struct HierarchyOptions
{
    int jacobi_steps = 2;
    bool keep_level_matrices = false;
};

/// Everything the cycles need for one basis. Level 0 is the coarsest; entry
/// 0 only carries `full` = A_0.
struct Hierarchy
{
    Basis basis = Basis::nodal;
    std::vector<HierarchyLevel> levels;
    RowMatrix coarse;
    FlopCounter setup_flops;

    std::size_t num_levels() const { return levels.size(); }
    std::size_t finest() const { return levels.size() - 1; }
    std::size_t size(std::size_t level) const
    {
        return level == 0 ? coarse.rows() : levels[level].prolongation.matrix.rows();
    }
};

/// Builds the hierarchy for the finest level of `mesh`. Nodal hierarchies
/// form each level matrix by the Galerkin product P^T A P; HB and WMHB run
/// the change of basis. Setup flops are counted in the result.
Hierarchy build_hierarchy(const Mesh& mesh, const DofMap& dofs, const AssembledSystem& finest, Basis basis,
                          const HierarchyOptions& options = {});

/// P^T A P with A stored by rows.
RowMatrix galerkin_product(const RowMatrix& a, const ColMatrix& p);

RowMatrix transpose(const ColMatrix& a);

/// `level,n_coarse,n_fine,nnz_A12,nnz_A21,nnz_A22,oner_size`
void write_hierarchy_csv(std::ostream& os, const Hierarchy& h);

} // namespace mlprec
