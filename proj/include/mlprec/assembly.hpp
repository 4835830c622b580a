#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>

#include "mlprec/flops.hpp"
#include "mlprec/mesh.hpp"
#include "mlprec/sparse.hpp"

namespace mlprec {

/// -div(p grad u) + q u = f in the unit square, u = 0 on the Dirichlet part
/// and n . (p grad u) = g on the Neumann part.
struct ProblemSpec
{
    /// Row-major 2x2 coefficient {p11, p12, p21, p22}.
    std::function<std::array<double, 4>(double, double)> p;
    std::function<double(double, double)> q;
    std::function<double(double, double)> f;
    /// Flux for outward normal (nx, ny).
    std::function<double(double, double, double, double)> g;
    std::function<double(double, double)> u_exact;

    /// p = I, q = 1, u = sin(pi x) sin(pi y).
    static ProblemSpec manufactured();
};

double manufactured_source(double x, double y);
double manufactured_flux(double x, double y, double nx, double ny);

class AssemblyError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class SpdViolation : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Unknowns live on interior and Neumann vertices. Numbering follows the
/// vertex order, so the DOF created at level j come after all coarser ones
/// and the first N_j DOF are exactly the level-j unknowns.
class DofMap
{
public:
    DofMap() = default;
    explicit DofMap(const Mesh& mesh);

    std::size_t num_dofs(std::size_t level) const { return level_counts_.at(level); }
    std::size_t num_levels() const { return level_counts_.size(); }
    /// kNone for Dirichlet vertices.
    std::size_t dof_of(std::size_t vertex) const { return dof_of_.at(vertex); }
    std::size_t vertex_of(std::size_t dof) const { return vertex_of_.at(dof); }

private:
    std::vector<std::size_t> dof_of_;
    std::vector<std::size_t> vertex_of_;
    std::vector<std::size_t> level_counts_;
};

struct AssembledSystem
{
    XlnMatrix stiffness;
    XlnMatrix mass;
    Vector load;
    std::size_t n_dof = 0;
};

struct ElementMatrices
{
    std::array<std::array<double, 3>, 3> stiffness{};
    std::array<std::array<double, 3>, 3> mass{};
    double area = 0.0;
};

/// Linear-element matrices for the triangle (a, b, c): the diffusion part
/// plus q at the centroid times the mass, and the plain mass matrix.
ElementMatrices element_matrices(std::array<std::array<double, 2>, 3> corners,
                                 const std::array<double, 4>& p, double q);

/// Stiffness, mass and load on the level-j triangulation, restricted to the
/// first dofs.num_dofs(level) unknowns.
AssembledSystem assemble(const Mesh& mesh, std::size_t level, const DofMap& dofs,
                         const ProblemSpec& spec);

/// sqrt(v^T A v); throws SpdViolation when the form is below -1e-12.
template <class Matrix>
double energy_norm(const Matrix& a, std::span<const double> v)
{
    Vector av(v.size(), 0.0);
    a.multiply_add(v, av);
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
        s += v[i] * av[i];
    flops::madd(v.size());
    flops::mult(1);
    if (s < -1e-12)
        throw SpdViolation("energy_norm: negative quadratic form");
    return s > 0.0 ? std::sqrt(s) : 0.0;
}

} // namespace mlprec
