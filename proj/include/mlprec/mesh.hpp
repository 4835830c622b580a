#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "mlprec/sparse.hpp"

namespace mlprec {

enum class BoundaryClass : std::uint8_t { interior = 0, dirichlet = 1, neumann = 2 };

enum class SimplexKind : std::uint8_t { root = 0, red = 1, green = 2 };

/// Which sides of the unit square carry which boundary condition.
enum class BoundaryPartition : std::uint8_t {
    all_dirichlet,
    /// x = 0 and x = 1 Neumann; y = 0 and y = 1 Dirichlet (corners Dirichlet).
    experiment_one,
    /// The whole boundary is Neumann.
    experiment_two,
    /// Loaded from a file; classes come from the data.
    custom,
};

enum class ExperimentSet : std::uint8_t { one, two };

/// How marked simplices are subdivided.
enum class RefinementRule : std::uint8_t {
    /// Quadrisect marked simplices; close with green bisection (1 hanging
    /// node) or further red refinement (2 or more).
    red_green,
    /// Bisect the longest edge of marked simplices; the closure bisects
    /// longest edges until conforming.
    bisection,
};

struct Vertex
{
    double x = 0.0;
    double y = 0.0;
    BoundaryClass bc = BoundaryClass::interior;
    int level = 0;
    std::array<std::size_t, 2> parents{kNone, kNone};

    bool is_midpoint() const { return parents[0] != kNone; }
};

struct Simplex
{
    std::array<std::size_t, 3> vertices{}; // counterclockwise
    int level = 0;
    SimplexKind kind = SimplexKind::root;
    std::size_t parent = kNone;
};

BoundaryClass classify_point(double x, double y, BoundaryPartition partition);

/// A nested sequence of conforming triangulations of the unit square.
/// Vertices are append-only, so everything created at level j is numbered
/// after the vertices of coarser levels. The mesh is a value: refinement
/// returns a new mesh.
class Mesh
{
public:
    /// n x n squares, each cut along the (0,0)-(1,1) diagonal direction.
    /// Boundary vertices start out Dirichlet.
    static Mesh unit_square(std::size_t n);

    std::size_t num_levels() const { return levels_.size(); }
    std::size_t finest_level() const { return levels_.size() - 1; }

    const std::vector<Vertex>& vertices() const { return vertices_; }
    const std::vector<Simplex>& simplices() const { return simplices_; }

    /// Indices into simplices() forming the level-j triangulation.
    std::span<const std::size_t> level_simplices(std::size_t level) const
    {
        return levels_.at(level);
    }

    /// Number of vertices present at level j (a prefix of vertices()).
    std::size_t num_vertices(std::size_t level) const { return level_offsets_.at(level + 1); }
    /// First vertex index created at level j.
    std::size_t first_vertex(std::size_t level) const { return level_offsets_.at(level); }

    BoundaryPartition partition() const { return partition_; }

    double signed_area(const Simplex& s) const;

    /// Copy of the mesh with every vertex reclassified for `partition`.
    Mesh with_partition(BoundaryPartition partition) const;

    /// Finest-level simplices whose closure meets the circle of the given
    /// radius about the origin.
    std::vector<std::size_t> mark_by_arc(double radius) const;

    /// Subdivides the marked finest-level simplices and closes the result to
    /// a conforming triangulation, appending one level. An empty marking
    /// returns the mesh unchanged.
    Mesh refine(std::span<const std::size_t> marked, RefinementRule rule) const;

    Mesh refine_uniform() const;

    /// Writes the vertices and the finest-level simplices.
    void write(std::ostream& os) const;
    /// Reads a single-level mesh written by write().
    static Mesh read(std::istream& is);

private:
    std::vector<Vertex> vertices_;
    std::vector<Simplex> simplices_;
    std::vector<std::vector<std::size_t>> levels_;
    std::vector<std::size_t> level_offsets_;
    BoundaryPartition partition_ = BoundaryPartition::all_dirichlet;
};

Mesh classify_boundary(const Mesh& mesh, ExperimentSet set);

} // namespace mlprec
