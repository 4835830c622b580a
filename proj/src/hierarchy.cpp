#include "mlprec/hierarchy.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

namespace mlprec {

Prolongation build_prolongation(const Mesh& mesh, const DofMap& dofs, std::size_t level)
{
    if (level == 0 || level >= mesh.num_levels())
        throw std::invalid_argument("build_prolongation: level out of range");

    Prolongation p;
    p.n_coarse = dofs.num_dofs(level - 1);
    const std::size_t n = dofs.num_dofs(level);
    p.n_fine = n - p.n_coarse;
    const std::size_t coarse_vertices = mesh.num_vertices(level - 1);

    std::vector<Triplet> entries;
    std::vector<Triplet> tail;
    for (std::size_t d = 0; d < p.n_coarse; ++d)
        entries.push_back({d, d, 1.0});
    for (std::size_t d = p.n_coarse; d < n; ++d) {
        const auto& v = mesh.vertices()[dofs.vertex_of(d)];
        if (dofs.vertex_of(d) < coarse_vertices || !v.is_midpoint())
            throw std::logic_error("build_prolongation: new DOF is not an edge midpoint");
        for (std::size_t parent : v.parents) {
            if (parent >= coarse_vertices)
                throw std::logic_error("build_prolongation: parent is not a coarse vertex");
            const std::size_t c = dofs.dof_of(parent);
            if (c == kNone)
                continue;
            entries.push_back({d, c, 0.5});
            tail.push_back({d - p.n_coarse, c, 0.5});
        }
    }
    p.matrix = ColMatrix::from_triplets(n, p.n_coarse, entries);
    p.tail = RowMatrix::from_triplets(p.n_fine, p.n_coarse, tail);
    return p;
}

namespace {

ColMatrix assemble_stabilizer(std::size_t n_coarse, std::size_t n_fine, const RowMatrix& k21,
                              const ColMatrix* k12, const ColMatrix* k22)
{
    std::vector<Triplet> s;
    for (const auto& t : k21.triplets())
        s.push_back({n_coarse + t.row, t.col, t.value});
    if (k12)
        for (const auto& t : k12->triplets())
            s.push_back({t.row, n_coarse + t.col, t.value});
    if (k22)
        for (const auto& t : k22->triplets())
            s.push_back({n_coarse + t.row, n_coarse + t.col, t.value});
    const std::size_t n = n_coarse + n_fine;
    return ColMatrix::from_triplets(n, n, s);
}

} // namespace

ChangeOfBasis hb_stabilizer(const Prolongation& p)
{
    ChangeOfBasis g;
    g.k21 = p.tail;
    g.k12 = ColMatrix(p.n_coarse, p.n_fine);
    g.k22 = ColMatrix(p.n_fine, p.n_fine);
    g.stabilizer = assemble_stabilizer(p.n_coarse, p.n_fine, g.k21, nullptr, nullptr);
    return g;
}

Vector approximate_inverse_apply(const RowMatrix& m, std::span<const double> rhs, int steps,
                                 InverseApprox approx)
{
    const std::size_t n = m.rows();
    if (rhs.size() != n)
        throw std::invalid_argument("approximate_inverse_apply: dimension mismatch");
    const Vector diag = m.diagonal();
    Vector x(n, 0.0);

    if (approx == InverseApprox::jacobi) {
        for (int s = 0; s < steps; ++s) {
            Vector r(rhs.begin(), rhs.end());
            m.multiply_add(x, r, -1.0);
            for (std::size_t i = 0; i < n; ++i) {
                if (r[i] == 0.0)
                    continue;
                if (diag[i] == 0.0)
                    throw SingularSmootherError("approximate_inverse_apply: zero diagonal");
                x[i] += r[i] / diag[i];
            }
        }
        return x;
    }

    auto relax = [&](std::size_t i) {
        double s = rhs[i];
        double d = 0.0;
        m.for_each_in_row(i, [&](std::size_t c, double v) {
            if (c == i)
                d = v;
            else
                s -= v * x[c];
        });
        if (d == 0.0)
            throw SingularSmootherError("approximate_inverse_apply: zero diagonal");
        x[i] = s / d;
    };
    for (int s = 0; s < steps; ++s) {
        for (std::size_t i = 0; i < n; ++i)
            relax(i);
        for (std::size_t i = n; i-- > 0;)
            relax(i);
    }
    return x;
}

namespace {

/// One column of inv[M] m by Jacobi sweeps, touching only the rows reached
/// from the support of m. Scratch vectors are all-zero on entry and exit.
struct SparseJacobi
{
    const RowMatrix& m;
    Vector diag;
    Vector x;
    Vector r;
    std::vector<char> in_x;
    std::vector<char> in_r;
    std::vector<std::size_t> x_support;
    std::vector<std::size_t> r_support;

    explicit SparseJacobi(const RowMatrix& matrix)
        : m(matrix), diag(matrix.diagonal()), x(matrix.rows(), 0.0), r(matrix.rows(), 0.0),
          in_x(matrix.rows(), 0), in_r(matrix.rows(), 0)
    {
    }

    void touch_r(std::size_t i)
    {
        if (!in_r[i]) {
            in_r[i] = 1;
            r_support.push_back(i);
        }
    }

    // Returns the nonzeros of x after `steps` iterations and clears scratch.
    std::vector<std::pair<std::size_t, double>> solve(std::span<const std::pair<std::size_t, double>> rhs,
                                                      int steps)
    {
        for (int s = 0; s < steps; ++s) {
            // r = rhs - M x, with M symmetric so row i doubles as column i.
            for (const auto& [i, v] : rhs) {
                touch_r(i);
                r[i] += v;
            }
            std::uint64_t work = 0;
            for (std::size_t i : x_support) {
                const double xi = x[i];
                m.for_each_in_row(i, [&](std::size_t k, double v) {
                    touch_r(k);
                    r[k] -= v * xi;
                    ++work;
                });
            }
            flops::madd(work);
            for (std::size_t i : r_support) {
                if (diag[i] == 0.0)
                    throw SingularSmootherError("wmhb_stabilizer: zero diagonal in M11");
                if (!in_x[i]) {
                    in_x[i] = 1;
                    x_support.push_back(i);
                }
                x[i] += r[i] / diag[i];
                r[i] = 0.0;
                in_r[i] = 0;
            }
            flops::div(r_support.size());
            flops::add(r_support.size());
            r_support.clear();
        }
        std::sort(x_support.begin(), x_support.end());
        std::vector<std::pair<std::size_t, double>> out;
        out.reserve(x_support.size());
        for (std::size_t i : x_support) {
            out.emplace_back(i, x[i]);
            x[i] = 0.0;
            in_x[i] = 0;
        }
        x_support.clear();
        return out;
    }
};

} // namespace

ChangeOfBasis wmhb_stabilizer(const Prolongation& p, const RowMatrix& m11, const ColMatrix& m12, int steps,
                              InverseApprox approx)
{
    if (m11.rows() != p.n_coarse || m12.rows() != p.n_coarse || m12.cols() != p.n_fine)
        throw std::invalid_argument("wmhb_stabilizer: mass blocks do not match the prolongation");

    std::vector<Triplet> k12;
    if (approx == InverseApprox::jacobi) {
        SparseJacobi jacobi(m11);
        std::vector<std::pair<std::size_t, double>> column;
        for (std::size_t c = 0; c < p.n_fine; ++c) {
            column.clear();
            m12.for_each_in_col(c, [&](std::size_t r, double v) { column.emplace_back(r, v); });
            for (const auto& [r, v] : jacobi.solve(column, steps))
                k12.push_back({r, c, -v});
        }
    } else {
        Vector column(p.n_coarse, 0.0);
        for (std::size_t c = 0; c < p.n_fine; ++c) {
            std::fill(column.begin(), column.end(), 0.0);
            m12.for_each_in_col(c, [&](std::size_t r, double v) { column[r] = v; });
            const Vector x = approximate_inverse_apply(m11, column, steps, approx);
            for (std::size_t r = 0; r < x.size(); ++r)
                if (x[r] != 0.0)
                    k12.push_back({r, c, -x[r]});
        }
    }

    ChangeOfBasis g;
    g.k21 = p.tail;
    g.k12 = ColMatrix::from_triplets(p.n_coarse, p.n_fine, k12);
    g.k22 = multiply(g.k21, g.k12);
    g.stabilizer = assemble_stabilizer(p.n_coarse, p.n_fine, g.k21, &g.k12, &g.k22);
    return g;
}

namespace {

StrippedBlocks empty_blocks(std::size_t n_coarse)
{
    StrippedBlocks b;
    b.a12 = ColMatrix(n_coarse, 0);
    b.a21 = RowMatrix(0, n_coarse);
    b.a22 = DrcMatrix(0);
    return b;
}

StrippedBlocks transform_level(XlnMatrix& a, const ChangeOfBasis& change)
{
    const std::size_t n_coarse = change.k21.cols();
    if (change.stabilizer.rows() != a.rows())
        throw std::invalid_argument("run_change_of_basis: level sizes do not match");
    accumulate_right_product(a, change.stabilizer);
    accumulate_left_transpose_product(a, change.stabilizer);
    if (n_coarse == a.rows())
        return empty_blocks(n_coarse);
    return strip_blocks(a, n_coarse);
}

} // namespace

TransformedSystem run_change_of_basis(const XlnMatrix& a_fine, std::span<const ChangeOfBasis> changes,
                                      bool keep_snapshots)
{
    XlnMatrix a = a_fine;
    TransformedSystem out;
    out.blocks.resize(changes.size());
    if (keep_snapshots)
        out.snapshots.resize(changes.size() + 1);
    for (std::size_t j = changes.size(); j > 0; --j) {
        if (keep_snapshots)
            out.snapshots[j] = a.to_row();
        out.blocks[j - 1] = transform_level(a, changes[j - 1]);
    }
    out.coarse = a.to_row();
    if (keep_snapshots)
        out.snapshots[0] = out.coarse;
    return out;
}

std::vector<std::size_t> one_ring(const RowMatrix& a, std::size_t first_fine)
{
    std::vector<char> in(a.cols(), 0);
    for (std::size_t r = first_fine; r < a.rows(); ++r) {
        in[r] = 1;
        a.for_each_in_row(r, [&](std::size_t c, double) { in[c] = 1; });
    }
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < in.size(); ++i)
        if (in[i])
            out.push_back(i);
    return out;
}

RowMatrix transpose(const ColMatrix& a)
{
    std::vector<Triplet> t = a.triplets();
    for (auto& e : t)
        std::swap(e.row, e.col);
    return RowMatrix::from_triplets(a.cols(), a.rows(), t);
}

RowMatrix galerkin_product(const RowMatrix& a, const ColMatrix& p)
{
    const ColMatrix ap = multiply(a, p);
    const ColMatrix ptap = multiply(transpose(p), ap);
    const auto t = ptap.triplets();
    return RowMatrix::from_triplets(ptap.rows(), ptap.cols(), t);
}

Hierarchy build_hierarchy(const Mesh& mesh, const DofMap& dofs, const AssembledSystem& finest, Basis basis,
                          const HierarchyOptions& options)
{
    const std::size_t n_levels = mesh.num_levels();
    if (finest.n_dof != dofs.num_dofs(n_levels - 1))
        throw std::invalid_argument("build_hierarchy: system is not assembled on the finest level");

    Hierarchy h;
    h.basis = basis;
    h.levels.resize(n_levels);
    FlopScope scope(h.setup_flops);

    for (std::size_t j = 1; j < n_levels; ++j)
        h.levels[j].prolongation = build_prolongation(mesh, dofs, j);

    if (basis == Basis::nodal) {
        h.levels[n_levels - 1].full = finest.stiffness.to_row();
        for (std::size_t j = n_levels - 1; j > 0; --j)
            h.levels[j - 1].full = galerkin_product(h.levels[j].full, h.levels[j].prolongation.matrix);
        h.coarse = h.levels[0].full;
        for (std::size_t j = 1; j < n_levels; ++j)
            h.levels[j].oner = one_ring(h.levels[j].full, h.levels[j].prolongation.n_coarse);
        return h;
    }

    std::vector<ChangeOfBasis> hb(n_levels - 1);
    for (std::size_t j = 1; j < n_levels; ++j)
        hb[j - 1] = hb_stabilizer(h.levels[j].prolongation);

    std::vector<ChangeOfBasis> changes;
    if (basis == Basis::hb) {
        changes = std::move(hb);
    } else {
        // HB transform of the mass matrix gives the M11, M12 blocks per level.
        XlnMatrix m = finest.mass;
        changes.resize(n_levels - 1);
        for (std::size_t j = n_levels - 1; j > 0; --j) {
            const auto& p = h.levels[j].prolongation;
            auto mb = transform_level(m, hb[j - 1]);
            changes[j - 1] = wmhb_stabilizer(p, m.to_row(), mb.a12, options.jacobi_steps);
        }
    }

    auto transformed = run_change_of_basis(finest.stiffness, changes, options.keep_level_matrices);
    for (std::size_t j = 1; j < n_levels; ++j) {
        h.levels[j].change = std::move(changes[j - 1]);
        h.levels[j].blocks = std::move(transformed.blocks[j - 1]);
    }
    if (options.keep_level_matrices) {
        for (std::size_t j = 0; j < n_levels; ++j)
            h.levels[j].full = std::move(transformed.snapshots[j]);
        for (std::size_t j = 1; j < n_levels; ++j)
            h.levels[j].oner = one_ring(h.levels[j].full, h.levels[j].prolongation.n_coarse);
    }
    h.coarse = std::move(transformed.coarse);
    return h;
}

void write_hierarchy_csv(std::ostream& os, const Hierarchy& h)
{
    os << "level,n_coarse,n_fine,nnz_A12,nnz_A21,nnz_A22,oner_size\n";
    for (std::size_t j = 1; j < h.num_levels(); ++j) {
        const auto& l = h.levels[j];
        const std::size_t nnz22 = l.blocks.a22.size() + l.blocks.a22.nnz_offdiag() * 2;
        os << j + 1 << ',' << l.prolongation.n_coarse << ',' << l.prolongation.n_fine << ','
           << l.blocks.a12.nnz() << ',' << l.blocks.a21.nnz() << ',' << nnz22 << ',' << l.oner.size() << '\n';
    }
}

} // namespace mlprec
