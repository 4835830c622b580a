#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mlprec/experiment.hpp"
#include "oracle.hpp"

using namespace mlprec;

TEST_CASE("a single level solves in one iteration for every method")
{
    for (auto set : {ExperimentSet::one, ExperimentSet::two}) {
        ExperimentPlan plan = ExperimentPlan::standard(set);
        plan.levels = 1;
        const auto result = run_experiment(plan);
        REQUIRE(result.levels.size() == 1);
        const auto t = make_table(result, TableKind::iterations);
        CHECK(t.rows.size() == 12 + 2);
        for (const auto& m : standard_methods())
            CHECK(t.numeric_row(m.name) == std::vector<double>{1.0});
    }
}

TEST_CASE("standard plans")
{
    const auto one = ExperimentPlan::standard(ExperimentSet::one);
    CHECK(one.levels == 8);
    CHECK(one.arc_radius == 0.25);
    CHECK(one.methods.size() == 12);
    const auto two = ExperimentPlan::standard(ExperimentSet::two);
    CHECK(two.levels == 14);
    CHECK(two.arc_radius == 0.05);
    CHECK(two.initial_grid == 16);
}

TEST_CASE("tables round trip through CSV")
{
    ExperimentPlan plan = ExperimentPlan::standard(ExperimentSet::one);
    plan.levels = 3;
    plan.methods = {"MG", "PCG-BPX", "PCG-HB"};
    const auto result = run_experiment(plan);
    for (auto kind : {TableKind::iterations, TableKind::flops_single_cycle, TableKind::flops_setup, TableKind::dof,
                      TableKind::condition}) {
        const Table t = make_table(result, kind);
        CHECK(t.columns == std::vector<std::string>{"L1", "L2", "L3"});
        std::stringstream ss;
        write_table(ss, t);
        CHECK(read_table(ss) == t);
    }
    const Table iters = make_table(result, TableKind::iterations);
    CHECK(iters.rows.size() == 5);
    CHECK(iters.numeric_row("DOF").size() == 3);
    CHECK_THROWS(iters.row("WMHB"));
    // Condition rows only for the Krylov methods.
    const Table cond = make_table(result, TableKind::condition);
    CHECK(cond.rows.size() == 4);
    CHECK(make_table(result, TableKind::dof).rows.size() == 2);
}

TEST_CASE("a header-only table")
{
    Table t;
    t.columns = {"L1", "L2"};
    std::stringstream ss;
    write_table(ss, t);
    CHECK(ss.str() == "method,L1,L2\n");
    CHECK(read_table(ss) == t);
    std::stringstream bad("level,L1\n");
    CHECK_THROWS(read_table(bad));
}

TEST_CASE("unknown methods are refused")
{
    ExperimentPlan plan = ExperimentPlan::standard(ExperimentSet::one);
    plan.levels = 2;
    plan.methods = {"MG", "SOR"};
    CHECK_THROWS(run_experiment(plan));
}

TEST_CASE("emit_tables writes the five files")
{
    ExperimentPlan plan = ExperimentPlan::standard(ExperimentSet::two);
    plan.levels = 2;
    const auto result = run_experiment(plan);
    const auto dir = std::filesystem::temp_directory_path() / "mlprec_emit_test";
    std::filesystem::remove_all(dir);
    emit_tables(result, dir);
    for (const char* name : {"iterations.csv", "flops_single_cycle.csv", "flops_setup.csv", "dof.csv",
                             "condition.csv"}) {
        std::ifstream is(dir / name);
        REQUIRE(is.good());
        CHECK(read_table(is).columns.size() == 2);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("basis functions")
{
    const ExperimentPlan plan = ExperimentPlan::standard(ExperimentSet::one);
    const Mesh mesh = build_experiment_mesh(plan, 4);
    const DofMap dofs(mesh);
    const std::size_t top = mesh.finest_level();

    // A DOF born on level 2.
    const std::size_t dof = dofs.num_dofs(1);
    REQUIRE(dof < dofs.num_dofs(2));
    const std::size_t vertex = dofs.vertex_of(dof);

    const auto nodal = export_basis_function(mesh, dofs, top, dof, BasisKind::nodal);
    CHECK(nodal.size() == mesh.num_vertices(top));
    for (std::size_t v = 0; v < nodal.size(); ++v)
        CHECK(nodal[v].value == (v == vertex ? 1.0 : 0.0));

    const auto hb = export_basis_function(mesh, dofs, top, dof, BasisKind::hb);
    for (std::size_t v = 0; v < hb.size(); ++v) {
        CHECK(hb[v].value >= 0.0);
        CHECK(hb[v].value <= 1.0);
        if (v < mesh.num_vertices(2))
            CHECK(hb[v].value == (v == vertex ? 1.0 : 0.0));
    }

    // The wavelet modification lowers the mass coupling to the coarse space.
    const AssembledSystem sys = assemble(mesh, 2, dofs, ProblemSpec::manufactured());
    const oracle::MatrixXd m = oracle::dense(sys.mass);
    auto coarse_moment = [&](BasisKind kind) {
        const auto s = export_basis_function(mesh, dofs, 2, dof, kind);
        oracle::VectorXd g = oracle::VectorXd::Zero(m.rows());
        for (std::size_t v = 0; v < s.size(); ++v)
            if (dofs.dof_of(v) != kNone)
                g(static_cast<Eigen::Index>(dofs.dof_of(v))) = s[v].value;
        const oracle::VectorXd mg = m * g;
        return mg.head(static_cast<Eigen::Index>(dofs.num_dofs(1))).norm();
    };
    const double m_hb = coarse_moment(BasisKind::hb);
    CHECK(coarse_moment(BasisKind::wmhb_jacobi) < m_hb);
    CHECK(coarse_moment(BasisKind::wmhb_gs) < m_hb);

    const auto w = export_basis_function(mesh, dofs, top, dof, BasisKind::wmhb_gs);
    double lowest = 0.0;
    for (const auto& s : w)
        lowest = std::min(lowest, s.value);
    CHECK(lowest < 0.0);

    CHECK_THROWS_AS(export_basis_function(mesh, dofs, 1, dof, BasisKind::nodal), std::invalid_argument);

    std::ostringstream os;
    write_basis_csv(os, nodal);
    CHECK(os.str().rfind("x,y,value\n", 0) == 0);
}
