#include "mlprec/assembly.hpp"

#include <numbers>
#include <unordered_map>

namespace mlprec {

using std::numbers::pi;

double manufactured_source(double x, double y)
{
    return (2.0 * pi * pi + 1.0) * std::sin(pi * x) * std::sin(pi * y);
}

double manufactured_flux(double x, double y, double nx, double ny)
{
    const double ux = pi * std::cos(pi * x) * std::sin(pi * y);
    const double uy = pi * std::sin(pi * x) * std::cos(pi * y);
    return nx * ux + ny * uy;
}

ProblemSpec ProblemSpec::manufactured()
{
    ProblemSpec spec;
    spec.p = [](double, double) { return std::array<double, 4>{1.0, 0.0, 0.0, 1.0}; };
    spec.q = [](double, double) { return 1.0; };
    spec.f = manufactured_source;
    spec.g = manufactured_flux;
    spec.u_exact = [](double x, double y) { return std::sin(pi * x) * std::sin(pi * y); };
    return spec;
}

DofMap::DofMap(const Mesh& mesh)
{
    const auto& vertices = mesh.vertices();
    dof_of_.assign(vertices.size(), kNone);
    for (std::size_t v = 0; v < vertices.size(); ++v) {
        if (vertices[v].bc == BoundaryClass::dirichlet)
            continue;
        dof_of_[v] = vertex_of_.size();
        vertex_of_.push_back(v);
    }
    for (std::size_t level = 0; level < mesh.num_levels(); ++level) {
        const std::size_t nv = mesh.num_vertices(level);
        std::size_t count = 0;
        for (std::size_t v = 0; v < nv; ++v)
            count += dof_of_[v] != kNone ? 1 : 0;
        level_counts_.push_back(count);
    }
}

ElementMatrices element_matrices(std::array<std::array<double, 2>, 3> c, const std::array<double, 4>& p,
                                 double q)
{
    ElementMatrices em;
    const double det = (c[1][0] - c[0][0]) * (c[2][1] - c[0][1]) - (c[2][0] - c[0][0]) * (c[1][1] - c[0][1]);
    em.area = 0.5 * det;
    if (!(em.area > 0.0))
        throw AssemblyError("element_matrices: degenerate or clockwise simplex");

    // Gradients of the barycentric coordinates.
    std::array<std::array<double, 2>, 3> grad;
    for (int i = 0; i < 3; ++i) {
        const auto& b = c[(i + 1) % 3];
        const auto& d = c[(i + 2) % 3];
        grad[i] = {(b[1] - d[1]) / det, (d[0] - b[0]) / det};
    }
    // Upper triangle only, mirrored, so the element matrix is exactly symmetric.
    for (int i = 0; i < 3; ++i) {
        for (int j = i; j < 3; ++j) {
            const double pgx = p[0] * grad[j][0] + p[1] * grad[j][1];
            const double pgy = p[2] * grad[j][0] + p[3] * grad[j][1];
            em.mass[i][j] = em.area / 12.0 * (i == j ? 2.0 : 1.0);
            em.stiffness[i][j] = em.area * (grad[i][0] * pgx + grad[i][1] * pgy) + q * em.mass[i][j];
            em.mass[j][i] = em.mass[i][j];
            em.stiffness[j][i] = em.stiffness[i][j];
        }
    }
    return em;
}

namespace {

std::uint64_t edge_key(std::size_t a, std::size_t b)
{
    if (a > b)
        std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
}

bool is_neumann_edge(const Mesh& mesh, const Vertex& a, const Vertex& b)
{
    if (mesh.partition() != BoundaryPartition::custom)
        return classify_point(0.5 * (a.x + b.x), 0.5 * (a.y + b.y), mesh.partition()) ==
               BoundaryClass::neumann;
    if (a.bc == BoundaryClass::interior || b.bc == BoundaryClass::interior)
        return false;
    return a.bc == BoundaryClass::neumann || b.bc == BoundaryClass::neumann;
}

} // namespace

AssembledSystem assemble(const Mesh& mesh, std::size_t level, const DofMap& dofs, const ProblemSpec& spec)
{
    const std::size_t n = dofs.num_dofs(level);
    AssembledSystem sys;
    sys.n_dof = n;
    sys.stiffness = XlnMatrix(n, n);
    sys.mass = XlnMatrix(n, n);
    sys.load.assign(n, 0.0);

    const auto& vertices = mesh.vertices();
    std::unordered_map<std::uint64_t, int> edge_uses;

    for (std::size_t s : mesh.level_simplices(level)) {
        const auto& tri = mesh.simplices()[s];
        std::array<std::array<double, 2>, 3> corners;
        std::array<std::size_t, 3> dof;
        for (int i = 0; i < 3; ++i) {
            const auto& v = vertices[tri.vertices[i]];
            corners[i] = {v.x, v.y};
            dof[i] = dofs.dof_of(tri.vertices[i]);
            ++edge_uses[edge_key(tri.vertices[i], tri.vertices[(i + 1) % 3])];
        }
        const double cx = (corners[0][0] + corners[1][0] + corners[2][0]) / 3.0;
        const double cy = (corners[0][1] + corners[1][1] + corners[2][1]) / 3.0;
        const auto em = element_matrices(corners, spec.p(cx, cy), spec.q(cx, cy));

        // Edge-midpoint rule; phi_i is 1/2 at the two midpoints next to i.
        std::array<double, 3> f_mid; // f at the midpoint of edge (i, i+1)
        for (int i = 0; i < 3; ++i) {
            const auto& a = corners[i];
            const auto& b = corners[(i + 1) % 3];
            f_mid[i] = spec.f(0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]));
        }

        for (int i = 0; i < 3; ++i) {
            if (dof[i] == kNone)
                continue;
            sys.load[dof[i]] += em.area / 6.0 * (f_mid[i] + f_mid[(i + 2) % 3]);
            for (int j = 0; j < 3; ++j) {
                if (dof[j] == kNone)
                    continue;
                sys.stiffness.insert_add(dof[i], dof[j], em.stiffness[i][j]);
                sys.mass.insert_add(dof[i], dof[j], em.mass[i][j]);
            }
        }
    }

    // Neumann boundary: edges used by a single simplex, two-point Gauss rule.
    const double gauss = 0.5 / std::sqrt(3.0);
    for (std::size_t s : mesh.level_simplices(level)) {
        const auto& tri = mesh.simplices()[s];
        for (int i = 0; i < 3; ++i) {
            const std::size_t ia = tri.vertices[i];
            const std::size_t ib = tri.vertices[(i + 1) % 3];
            if (edge_uses.at(edge_key(ia, ib)) != 1)
                continue;
            const auto& a = vertices[ia];
            const auto& b = vertices[ib];
            if (!is_neumann_edge(mesh, a, b))
                continue;
            const double dx = b.x - a.x, dy = b.y - a.y;
            const double len = std::hypot(dx, dy);
            // Counterclockwise boundary traversal: the outward normal is on the right.
            const double nx = dy / len, ny = -dx / len;
            for (double t : {0.5 - gauss, 0.5 + gauss}) {
                const double gv = spec.g(a.x + t * dx, a.y + t * dy, nx, ny) * 0.5 * len;
                if (dofs.dof_of(ia) != kNone)
                    sys.load[dofs.dof_of(ia)] += (1.0 - t) * gv;
                if (dofs.dof_of(ib) != kNone)
                    sys.load[dofs.dof_of(ib)] += t * gv;
            }
        }
    }
    return sys;
}

} // namespace mlprec
