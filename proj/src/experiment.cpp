#include "mlprec/experiment.hpp"

#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace mlprec {

ExperimentPlan ExperimentPlan::standard(ExperimentSet set)
{
    ExperimentPlan plan;
    plan.set = set;
    if (set == ExperimentSet::two) {
        plan.levels = 14;
        plan.arc_radius = 0.05;
        plan.initial_grid = 16;
        plan.rule = RefinementRule::bisection;
    }
    for (const auto& m : standard_methods())
        plan.methods.push_back(m.name);
    return plan;
}

Mesh build_experiment_mesh(const ExperimentPlan& plan, std::size_t levels)
{
    if (levels == 0)
        throw std::invalid_argument("build_experiment_mesh: at least one level is needed");
    Mesh mesh = classify_boundary(Mesh::unit_square(plan.initial_grid), plan.set);
    while (mesh.num_levels() < levels) {
        const auto marked = mesh.mark_by_arc(plan.arc_radius);
        if (marked.empty())
            throw std::runtime_error("build_experiment_mesh: the arc misses the mesh");
        mesh = mesh.refine(marked, plan.rule);
    }
    return mesh;
}

ExperimentResult run_experiment(const ExperimentPlan& plan)
{
    if (plan.levels == 0)
        throw std::invalid_argument("run_experiment: levels must be at least 1");
    std::vector<const NamedMethod*> methods;
    for (const auto& name : plan.methods)
        methods.push_back(&find_method(name));

    ExperimentResult result;
    result.plan = plan;
    const ProblemSpec spec = ProblemSpec::manufactured();

    Mesh mesh = build_experiment_mesh(plan, 1);
    for (std::size_t level = 1; level <= plan.levels; ++level) {
        if (level > 1)
            mesh = mesh.refine(mesh.mark_by_arc(plan.arc_radius), plan.rule);
        const DofMap dofs(mesh);
        const AssembledSystem sys = assemble(mesh, mesh.finest_level(), dofs, spec);
        const RowMatrix a = sys.stiffness.to_row();
        const Vector u_ref = DirectSolver(a).solve(sys.load);

        LevelResult lr;
        lr.nodes = mesh.num_vertices(mesh.finest_level());
        lr.dof = sys.n_dof;

        std::map<Basis, Hierarchy> hierarchies;
        HierarchyOptions hopts;
        hopts.jacobi_steps = plan.jacobi_steps;
        for (const auto* m : methods) {
            const Basis basis = m->config.basis();
            try {
                if (!hierarchies.contains(basis))
                    hierarchies.emplace(basis, build_hierarchy(mesh, dofs, sys, basis, hopts));
                const Hierarchy& h = hierarchies.at(basis);

                MethodConfig config = m->config;
                config.smoother = plan.smoother;
                config.jacobi_steps = plan.jacobi_steps;
                const MultilevelPreconditioner prec(h, config);
                lr.reports.push_back(m->krylov ? pcg(a, sys.load, prec.as_operator(), u_ref, plan.solve)
                                               : stationary_solve(a, sys.load, prec.as_operator(), u_ref,
                                                                  plan.solve));
                lr.setup_flops.push_back(h.setup_flops.total());
            } catch (const std::exception& e) {
                throw std::runtime_error("method " + m->name + ", level " + std::to_string(level) + ": " +
                                         e.what());
            }
        }
        result.levels.push_back(std::move(lr));
    }
    return result;
}

const std::vector<std::string>& Table::row(const std::string& label) const
{
    for (const auto& [name, cells] : rows)
        if (name == label)
            return cells;
    throw std::out_of_range("Table: no row " + label);
}

std::vector<double> Table::numeric_row(const std::string& label) const
{
    std::vector<double> out;
    for (const auto& cell : row(label))
        out.push_back(cell.empty() ? 0.0 : std::stod(cell));
    return out;
}

void write_table(std::ostream& os, const Table& table)
{
    os << "method";
    for (const auto& c : table.columns)
        os << ',' << c;
    os << '\n';
    for (const auto& [label, cells] : table.rows) {
        os << label;
        for (const auto& cell : cells)
            os << ',' << cell;
        os << '\n';
    }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ','))
        out.push_back(cell);
    if (!line.empty() && line.back() == ',')
        out.emplace_back();
    return out;
}

} // namespace

Table read_table(std::istream& is)
{
    Table t;
    std::string line;
    if (!std::getline(is, line))
        throw std::runtime_error("read_table: missing header");
    auto header = split_csv_line(line);
    if (header.empty() || header[0] != "method")
        throw std::runtime_error("read_table: header must start with 'method'");
    t.columns.assign(header.begin() + 1, header.end());
    while (std::getline(is, line)) {
        if (line.empty())
            continue;
        auto cells = split_csv_line(line);
        cells.resize(t.columns.size() + 1);
        const std::string label = cells[0];
        t.rows.emplace_back(label, std::vector<std::string>(cells.begin() + 1, cells.end()));
    }
    return t;
}

namespace {

std::string format_number(double v)
{
    std::ostringstream ss;
    ss.precision(6);
    ss << v;
    return ss.str();
}

} // namespace

Table make_table(const ExperimentResult& result, TableKind kind)
{
    Table t;
    for (std::size_t l = 0; l < result.levels.size(); ++l)
        t.columns.push_back("L" + std::to_string(l + 1));

    if (kind != TableKind::dof) {
        for (std::size_t m = 0; m < result.plan.methods.size(); ++m) {
            const auto& name = result.plan.methods[m];
            if (kind == TableKind::condition && !find_method(name).krylov)
                continue;
            std::vector<std::string> cells;
            for (const auto& level : result.levels) {
                const auto& rep = level.reports[m];
                switch (kind) {
                case TableKind::iterations:
                    cells.push_back(std::to_string(rep.iterations));
                    break;
                case TableKind::flops_single_cycle:
                    cells.push_back(std::to_string(rep.flops_per_cycle));
                    break;
                case TableKind::flops_setup:
                    cells.push_back(std::to_string(level.setup_flops[m]));
                    break;
                case TableKind::condition:
                    cells.push_back(format_number(rep.cond_estimate));
                    break;
                case TableKind::dof:
                    break;
                }
            }
            t.rows.emplace_back(name, std::move(cells));
        }
    }
    std::vector<std::string> nodes;
    std::vector<std::string> dof;
    for (const auto& level : result.levels) {
        nodes.push_back(std::to_string(level.nodes));
        dof.push_back(std::to_string(level.dof));
    }
    t.rows.emplace_back("Nodes", std::move(nodes));
    t.rows.emplace_back("DOF", std::move(dof));
    return t;
}

void emit_tables(const ExperimentResult& result, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    const std::pair<const char*, TableKind> files[] = {
        {"iterations.csv", TableKind::iterations},
        {"flops_single_cycle.csv", TableKind::flops_single_cycle},
        {"flops_setup.csv", TableKind::flops_setup},
        {"dof.csv", TableKind::dof},
        {"condition.csv", TableKind::condition},
    };
    for (const auto& [name, kind] : files) {
        const auto path = dir / name;
        std::ofstream os(path, std::ios::binary);
        if (!os)
            throw std::runtime_error("cannot open " + path.string());
        write_table(os, make_table(result, kind));
        if (!os)
            throw std::runtime_error("write failed: " + path.string());
    }
}

std::vector<BasisSample> export_basis_function(const Mesh& mesh, const DofMap& dofs, std::size_t level,
                                               std::size_t dof, BasisKind kind)
{
    if (level >= mesh.num_levels())
        throw std::invalid_argument("export_basis_function: level out of range");
    if (dof >= dofs.num_dofs(level))
        throw std::invalid_argument("export_basis_function: DOF is not on this level");

    // Level on which the function is defined.
    std::size_t home = level;
    if (kind != BasisKind::nodal)
        while (home > 0 && dof < dofs.num_dofs(home - 1))
            --home;

    Vector g(dofs.num_dofs(home), 0.0);
    g[dof] = 1.0;
    if ((kind == BasisKind::wmhb_gs || kind == BasisKind::wmhb_jacobi) && home > 0) {
        const Prolongation p = build_prolongation(mesh, dofs, home);
        const AssembledSystem sys = assemble(mesh, home, dofs, ProblemSpec::manufactured());
        const RowMatrix m = sys.mass.to_row();
        // M12 column of the HB-transformed mass matrix: P^T M e_dof.
        const Vector m_col = m * g;
        Vector m12(p.n_coarse, 0.0);
        p.matrix.transpose_multiply_add(m_col, m12);
        const RowMatrix m11 = galerkin_product(m, p.matrix);
        const InverseApprox approx =
            kind == BasisKind::wmhb_gs ? InverseApprox::sgs : InverseApprox::jacobi;
        const Vector x = approximate_inverse_apply(m11, m12, 1, approx);
        // Column of G: [K12 e; e + K21 K12 e].
        for (std::size_t i = 0; i < p.n_coarse; ++i)
            g[i] = -x[i];
        Vector k12(x.size());
        for (std::size_t i = 0; i < x.size(); ++i)
            k12[i] = -x[i];
        p.tail.multiply_add(k12, std::span<double>(g).subspan(p.n_coarse));
    }
    for (std::size_t j = home + 1; j <= level; ++j) {
        const Prolongation p = build_prolongation(mesh, dofs, j);
        g = p.matrix * g;
    }

    std::vector<BasisSample> out;
    const auto& vertices = mesh.vertices();
    for (std::size_t v = 0; v < mesh.num_vertices(level); ++v) {
        const std::size_t d = dofs.dof_of(v);
        out.push_back({vertices[v].x, vertices[v].y, d == kNone ? 0.0 : g[d]});
    }
    return out;
}

void write_basis_csv(std::ostream& os, const std::vector<BasisSample>& samples)
{
    os << "x,y,value\n";
    const auto old = os.precision(17);
    for (const auto& s : samples)
        os << s.x << ',' << s.y << ',' << s.value << '\n';
    os.precision(old);
}

} // namespace mlprec
