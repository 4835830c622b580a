#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "mlprec/assembly.hpp"
#include "mlprec/hierarchy.hpp"
#include "mlprec/mesh.hpp"
#include "mlprec/precond.hpp"
#include "mlprec/solver.hpp"

namespace mlprec {

struct ExperimentPlan
{
    ExperimentSet set = ExperimentSet::one;
    std::size_t levels = 8;
    double arc_radius = 0.25;
    std::size_t initial_grid = 3;
    RefinementRule rule = RefinementRule::red_green;
    std::vector<std::string> methods;
    SmootherKey smoother = SmootherKey::sgs;
    int jacobi_steps = 2;
    SolveOptions solve;

    /// Set I: 3x3 grid, radius 0.25, red-green, 8 levels. Set II: 16x16
    /// grid, radius 0.05, longest-edge bisection, 14 levels. All methods.
    static ExperimentPlan standard(ExperimentSet set);
};

/// The plan's mesh with `levels` levels: the initial grid classified for
/// the set, then one arc-driven refinement per further level.
Mesh build_experiment_mesh(const ExperimentPlan& plan, std::size_t levels);

struct LevelResult
{
    std::size_t nodes = 0;
    std::size_t dof = 0;
    /// Indexed like plan.methods.
    std::vector<SolveReport> reports;
    std::vector<std::uint64_t> setup_flops;
};

struct ExperimentResult
{
    ExperimentPlan plan;
    std::vector<LevelResult> levels;
};

/// Runs every method on every level of the plan. Errors are rethrown as
/// std::runtime_error naming the method and the (1-based) level.
ExperimentResult run_experiment(const ExperimentPlan& plan);

/// A labelled grid of cells: header `method,L1..LJ`, one row per label.
struct Table
{
    std::vector<std::string> columns;
    std::vector<std::pair<std::string, std::vector<std::string>>> rows;

    bool operator==(const Table&) const = default;
    const std::vector<std::string>& row(const std::string& label) const;
    std::vector<double> numeric_row(const std::string& label) const;
};

void write_table(std::ostream& os, const Table& table);
Table read_table(std::istream& is);

enum class TableKind { iterations, flops_single_cycle, flops_setup, dof, condition };

/// Method rows (for `dof`, none) followed by the Nodes and DOF rows.
Table make_table(const ExperimentResult& result, TableKind kind);

/// Writes iterations.csv, flops_single_cycle.csv, flops_setup.csv, dof.csv
/// and condition.csv into `dir`.
void emit_tables(const ExperimentResult& result, const std::filesystem::path& dir);

enum class BasisKind { nodal, hb, wmhb_gs, wmhb_jacobi };

struct BasisSample
{
    double x;
    double y;
    double value;
};

/// Values at the level-`level` vertices of the basis function attached to
/// `dof`. HB and WMHB functions are built on the level where the DOF
/// appears and interpolated up. Throws std::invalid_argument for a DOF
/// outside the level.
std::vector<BasisSample> export_basis_function(const Mesh& mesh, const DofMap& dofs, std::size_t level,
                                               std::size_t dof, BasisKind kind);

void write_basis_csv(std::ostream& os, const std::vector<BasisSample>& samples);

} // namespace mlprec
