#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "mlprec/experiment.hpp"

using namespace mlprec;

namespace {

ExperimentSet parse_set(const std::string& s)
{
    if (s == "I" || s == "1")
        return ExperimentSet::one;
    if (s == "II" || s == "2")
        return ExperimentSet::two;
    throw CLI::ValidationError("--set", "expected I or II");
}

std::vector<std::string> parse_methods(const std::string& list)
{
    if (list == "all") {
        std::vector<std::string> out;
        for (const auto& m : standard_methods())
            out.push_back(m.name);
        return out;
    }
    std::vector<std::string> out;
    std::stringstream ss(list);
    std::string name;
    while (std::getline(ss, name, ',')) {
        find_method(name); // rejects unknown names
        out.push_back(name);
    }
    if (out.empty())
        throw std::invalid_argument("no methods given");
    return out;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Multilevel preconditioning experiments on locally refined meshes"};
    app.require_subcommand(1);

    std::string set = "I";
    std::size_t levels = 0;
    std::string methods = "all";
    std::string out_dir;
    std::size_t grid = 0;
    double radius = 0.0;
    std::string smoother = "sgs";
    int jacobi_steps = 2;

    auto* run = app.add_subcommand("run", "run an experiment set and write CSV tables");
    run->add_option("--set", set, "experiment set: I or II")->required();
    run->add_option("--levels", levels, "number of levels (default 8 for I, 14 for II)");
    run->add_option("--methods", methods, "'all' or a comma separated list of method names");
    run->add_option("--out", out_dir, "output directory")->required();
    run->add_option("--grid", grid, "initial grid subdivisions per side");
    run->add_option("--radius", radius, "marking arc radius");
    run->add_option("--smoother", smoother, "sgs or jacobi")->check(CLI::IsMember({"sgs", "jacobi"}));
    run->add_option("--jacobi-steps", jacobi_steps, "Jacobi steps for the wavelet modification")
        ->check(CLI::PositiveNumber);

    std::size_t basis_level = 1;
    std::size_t basis_dof = 0;
    std::string basis = "nodal";
    std::string basis_out;
    auto* basis_cmd = app.add_subcommand("basis", "export one basis function as x,y,value CSV");
    basis_cmd->add_option("--level", basis_level, "level (1-based) of experiment set I")
        ->required()
        ->check(CLI::PositiveNumber);
    basis_cmd->add_option("--dof", basis_dof, "DOF index (0-based)")->required();
    basis_cmd->add_option("--basis", basis, "nodal, hb, wmhb-gs or wmhb-jac")
        ->check(CLI::IsMember({"nodal", "hb", "wmhb-gs", "wmhb-jac"}));
    basis_cmd->add_option("--out", basis_out, "output file")->required();

    std::string mesh_out;
    std::string mesh_set = "I";
    std::size_t mesh_levels = 0;
    auto* mesh_cmd = app.add_subcommand("mesh", "export the finest mesh of an experiment set");
    mesh_cmd->add_option("--export", mesh_out, "output file")->required();
    mesh_cmd->add_option("--set", mesh_set, "experiment set: I or II");
    mesh_cmd->add_option("--levels", mesh_levels, "number of levels");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            ExperimentPlan plan = ExperimentPlan::standard(parse_set(set));
            if (levels > 0)
                plan.levels = levels;
            if (grid > 0)
                plan.initial_grid = grid;
            if (radius > 0.0)
                plan.arc_radius = radius;
            plan.smoother = smoother == "jacobi" ? SmootherKey::jacobi : SmootherKey::sgs;
            plan.jacobi_steps = jacobi_steps;
            plan.methods = parse_methods(methods);
            const ExperimentResult result = run_experiment(plan);
            emit_tables(result, out_dir);
            write_table(std::cout, make_table(result, TableKind::iterations));
        } else if (*basis_cmd) {
            const ExperimentPlan plan = ExperimentPlan::standard(ExperimentSet::one);
            const Mesh mesh = build_experiment_mesh(plan, basis_level);
            const DofMap dofs(mesh);
            BasisKind kind = BasisKind::nodal;
            if (basis == "hb")
                kind = BasisKind::hb;
            else if (basis == "wmhb-gs")
                kind = BasisKind::wmhb_gs;
            else if (basis == "wmhb-jac")
                kind = BasisKind::wmhb_jacobi;
            const auto samples = export_basis_function(mesh, dofs, mesh.finest_level(), basis_dof, kind);
            std::ofstream os(basis_out, std::ios::binary);
            if (!os)
                throw std::runtime_error("cannot open " + basis_out);
            write_basis_csv(os, samples);
        } else if (*mesh_cmd) {
            ExperimentPlan plan = ExperimentPlan::standard(parse_set(mesh_set));
            const Mesh mesh = build_experiment_mesh(plan, mesh_levels > 0 ? mesh_levels : plan.levels);
            std::ofstream os(mesh_out, std::ios::binary);
            if (!os)
                throw std::runtime_error("cannot open " + mesh_out);
            mesh.write(os);
        }
    } catch (const std::exception& e) {
        std::cerr << "mlprec: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
