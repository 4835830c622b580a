#include "mlprec/precond.hpp"

#include <algorithm>
#include <stdexcept>

#include "mlprec/flops.hpp"

namespace mlprec {

namespace {

void relax_row(const RowMatrix& a, std::span<double> u, std::span<const double> f, std::size_t i)
{
    double s = f[i];
    double d = 0.0;
    std::uint64_t work = 0;
    a.for_each_in_row(i, [&](std::size_t c, double v) {
        if (c == i) {
            d += v;
        } else {
            s -= v * u[c];
            ++work;
        }
    });
    if (d == 0.0)
        throw SingularSmootherError("smooth_point: zero diagonal entry");
    u[i] = s / d;
    flops::madd(work);
    flops::div(1);
}

void jacobi_rows(const RowMatrix& a, std::span<double> u, std::span<const double> f,
                 std::span<const std::size_t> rows)
{
    std::vector<double> step(rows.size());
    std::uint64_t work = 0;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const std::size_t i = rows[k];
        double s = f[i];
        double d = 0.0;
        a.for_each_in_row(i, [&](std::size_t c, double v) {
            if (c == i)
                d += v;
            s -= v * u[c];
            ++work;
        });
        if (d == 0.0)
            throw SingularSmootherError("smooth_point: zero diagonal entry");
        step[k] = s / d;
    }
    for (std::size_t k = 0; k < rows.size(); ++k)
        u[rows[k]] += step[k];
    flops::madd(work);
    flops::div(rows.size());
    flops::add(rows.size());
}

void check_vectors(std::size_t n, std::size_t u, std::size_t f)
{
    if (u != n || f != n)
        throw std::invalid_argument("smooth_point: dimension mismatch");
}

} // namespace

void smooth_point(const RowMatrix& a, std::span<double> u, std::span<const double> f, SmootherKey key,
                  std::span<const std::size_t> indices)
{
    check_vectors(a.rows(), u.size(), f.size());
    if (key == SmootherKey::jacobi) {
        jacobi_rows(a, u, f, indices);
        return;
    }
    for (std::size_t i : indices)
        relax_row(a, u, f, i);
    for (auto it = indices.rbegin(); it != indices.rend(); ++it)
        relax_row(a, u, f, *it);
}

void smooth_point(const RowMatrix& a, std::span<double> u, std::span<const double> f, SmootherKey key)
{
    std::vector<std::size_t> all(a.rows());
    for (std::size_t i = 0; i < all.size(); ++i)
        all[i] = i;
    smooth_point(a, u, f, key, all);
}

void smooth_point(const DrcMatrix& a22, std::span<double> u_fine, std::span<const double> f_fine,
                  SmootherKey key)
{
    if (key == SmootherKey::jacobi) {
        a22.jacobi_sweep(f_fine, u_fine);
        return;
    }
    a22.forward_sweep(f_fine, u_fine);
    a22.backward_sweep(f_fine, u_fine);
}

MultilevelPreconditioner::MultilevelPreconditioner(const Hierarchy& hierarchy, MethodConfig config)
    : h_(&hierarchy), config_(config)
{
    if (hierarchy.num_levels() == 0)
        throw std::invalid_argument("MultilevelPreconditioner: empty hierarchy");
    if (config.uses_change_of_basis()) {
        if (hierarchy.basis != config.basis())
            throw std::invalid_argument("MultilevelPreconditioner: hierarchy has the wrong basis");
    } else {
        for (std::size_t j = 1; j < hierarchy.num_levels(); ++j)
            if (hierarchy.levels[j].full.rows() != hierarchy.size(j))
                throw std::invalid_argument("MultilevelPreconditioner: level matrices are missing");
    }
    if (config.exact_coarse)
        coarse_ = DirectSolver(hierarchy.coarse);
}

Vector MultilevelPreconditioner::apply(std::span<const double> b) const
{
    return apply(b, h_->finest());
}

Vector MultilevelPreconditioner::apply(std::span<const double> b, std::size_t level) const
{
    if (level >= h_->num_levels() || b.size() != h_->size(level))
        throw std::invalid_argument("MultilevelPreconditioner::apply: bad level or size");
    return config_.mode == Mode::multiplicative ? multiplicative(b, level) : additive(b, level);
}

Vector MultilevelPreconditioner::coarse_solve(std::span<const double> b) const
{
    if (config_.exact_coarse)
        return coarse_.solve(b);
    return Vector(b.begin(), b.end());
}

namespace {

void add_into(std::span<double> y, std::span<const double> x)
{
    for (std::size_t i = 0; i < y.size(); ++i)
        y[i] += x[i];
    flops::add(y.size());
}

// y = x + S^T x
Vector wavelet_restrict(const ColMatrix& s, std::span<const double> x)
{
    Vector y(x.begin(), x.end());
    s.transpose_multiply_add(x, y);
    return y;
}

// x <- x + S x
void wavelet_extend(const ColMatrix& s, Vector& x)
{
    Vector y = x;
    s.multiply_add(x, y);
    x = std::move(y);
}

} // namespace

Vector MultilevelPreconditioner::multiplicative(std::span<const double> b, std::size_t lev) const
{
    if (lev == 0)
        return coarse_solve(b);

    const auto& level = h_->levels[lev];
    const std::size_t c = level.prolongation.n_coarse;
    const std::size_t r = b.size();
    const SmootherKey key = config_.smoother;

    if (config_.uses_change_of_basis()) {
        const auto& s = level.change.stabilizer;
        const auto& blk = level.blocks;
        Vector f = wavelet_restrict(s, b);
        Vector u(r, 0.0);
        std::span<double> fs(f), us(u);
        smooth_point(blk.a22, us.subspan(c), fs.subspan(c), key);
        blk.a12.multiply_add(us.subspan(c), fs.first(c), -1.0);

        const Vector uc = multiplicative(fs.first(c), lev - 1);
        std::copy(uc.begin(), uc.end(), u.begin());

        blk.a21.multiply_add(uc, fs.subspan(c), -1.0);
        smooth_point(blk.a22, us.subspan(c), fs.subspan(c), key);
        wavelet_extend(s, u);
        return u;
    }

    const auto& a = level.full;
    const auto& tail = level.prolongation.tail;
    const bool bpx = config_.family == Family::bpx;
    Vector d(r, 0.0);
    if (bpx)
        smooth_point(a, d, b, key, level.oner);
    else
        smooth_point(a, d, b, key);

    Vector f(b.begin(), b.end());
    if (bpx) {
        // f = b - A(:, ONER) d(ONER); A is symmetric, so row i is column i.
        std::uint64_t work = 0;
        for (std::size_t i : level.oner) {
            const double di = d[i];
            a.for_each_in_row(i, [&](std::size_t k, double v) {
                f[k] -= v * di;
                ++work;
            });
        }
        flops::madd(work);
    } else {
        a.multiply_add(d, f, -1.0);
    }
    std::span<double> fs(f);
    tail.transpose_multiply_add(fs.subspan(c), fs.first(c));

    const Vector uc = multiplicative(fs.first(c), lev - 1);
    Vector u(r, 0.0);
    std::copy(uc.begin(), uc.end(), u.begin());
    tail.multiply_add(uc, std::span<double>(u).subspan(c));

    if (bpx) {
        for (std::size_t i : level.oner)
            u[i] += d[i];
        flops::add(level.oner.size());
        smooth_point(a, u, b, key, level.oner);
    } else {
        add_into(u, d);
        smooth_point(a, u, b, key);
    }
    return u;
}

Vector MultilevelPreconditioner::additive(std::span<const double> f_in, std::size_t lev) const
{
    if (lev == 0)
        return coarse_solve(f_in);

    const auto& level = h_->levels[lev];
    const std::size_t c = level.prolongation.n_coarse;
    const std::size_t r = f_in.size();
    const SmootherKey key = config_.smoother;

    if (config_.uses_change_of_basis()) {
        const auto& s = level.change.stabilizer;
        Vector f = wavelet_restrict(s, f_in);
        Vector u(r, 0.0);
        std::span<double> fs(f), us(u);
        smooth_point(level.blocks.a22, us.subspan(c), fs.subspan(c), key);
        const Vector uc = additive(fs.first(c), lev - 1);
        std::copy(uc.begin(), uc.end(), u.begin());
        wavelet_extend(s, u);
        return u;
    }

    const auto& a = level.full;
    const auto& tail = level.prolongation.tail;
    const bool bpx = config_.family == Family::bpx;
    Vector d(r, 0.0);
    if (bpx)
        smooth_point(a, d, f_in, key, level.oner);
    else
        smooth_point(a, d, f_in, key);

    Vector f(f_in.begin(), f_in.end());
    std::span<double> fs(f);
    tail.transpose_multiply_add(fs.subspan(c), fs.first(c));

    const Vector uc = additive(fs.first(c), lev - 1);
    Vector u(r, 0.0);
    std::copy(uc.begin(), uc.end(), u.begin());
    tail.multiply_add(uc, std::span<double>(u).subspan(c));
    if (bpx) {
        for (std::size_t i : level.oner)
            u[i] += d[i];
        flops::add(level.oner.size());
    } else {
        add_into(u, d);
    }
    return u;
}

Vector bpx_classical_apply(const Hierarchy& nodal, std::span<const double> f)
{
    const std::size_t top = nodal.finest();
    if (f.size() != nodal.size(top))
        throw std::invalid_argument("bpx_classical_apply: dimension mismatch");
    for (std::size_t j = 0; j <= top; ++j)
        if (nodal.levels[j].full.rows() != nodal.size(j))
            throw std::invalid_argument("bpx_classical_apply: level matrices are missing");

    // Restrict to every level, scale, and prolongate back while summing.
    std::vector<Vector> restricted(top + 1);
    restricted[top].assign(f.begin(), f.end());
    for (std::size_t j = top; j > 0; --j) {
        const auto& p = nodal.levels[j].prolongation.matrix;
        restricted[j - 1].assign(p.cols(), 0.0);
        p.transpose_multiply_add(restricted[j], restricted[j - 1]);
    }
    Vector u;
    for (std::size_t j = 0; j <= top; ++j) {
        Vector s(restricted[j].size(), 0.0);
        smooth_point(nodal.levels[j].full, s, restricted[j], SmootherKey::jacobi);
        if (j == 0) {
            u = std::move(s);
            continue;
        }
        Vector up(s.size(), 0.0);
        nodal.levels[j].prolongation.matrix.multiply_add(u, up);
        add_into(up, s);
        u = std::move(up);
    }
    return u;
}

Vector hb_additive_apply(const Hierarchy& hb, std::span<const double> f)
{
    if (hb.basis != Basis::hb)
        throw std::invalid_argument("hb_additive_apply: needs an HB hierarchy");
    const std::size_t top = hb.finest();
    if (f.size() != hb.size(top))
        throw std::invalid_argument("hb_additive_apply: dimension mismatch");

    std::vector<Vector> restricted(top + 1);
    restricted[top].assign(f.begin(), f.end());
    for (std::size_t j = top; j > 0; --j) {
        const auto& p = hb.levels[j].prolongation.matrix;
        restricted[j - 1].assign(p.cols(), 0.0);
        p.transpose_multiply_add(restricted[j], restricted[j - 1]);
    }
    Vector u = DirectSolver(hb.coarse).solve(restricted[0]);
    for (std::size_t j = 1; j <= top; ++j) {
        const auto& level = hb.levels[j];
        const std::size_t c = level.prolongation.n_coarse;
        Vector up(restricted[j].size(), 0.0);
        level.prolongation.matrix.multiply_add(u, up);
        Vector t(restricted[j].size() - c, 0.0);
        smooth_point(level.blocks.a22, t, std::span<const double>(restricted[j]).subspan(c), SmootherKey::sgs);
        add_into(std::span<double>(up).subspan(c), t);
        u = std::move(up);
    }
    return u;
}

const std::vector<NamedMethod>& standard_methods()
{
    static const std::vector<NamedMethod> methods = [] {
        auto m = [](std::string name, Family family, Mode mode, bool krylov) {
            NamedMethod nm;
            nm.name = std::move(name);
            nm.config.family = family;
            nm.config.mode = mode;
            nm.krylov = krylov;
            return nm;
        };
        using enum Family;
        const Mode mul = Mode::multiplicative;
        const Mode add = Mode::additive;
        return std::vector<NamedMethod>{
            m("MG", mg, mul, false),           m("M.BPX", bpx, mul, false),
            m("HBMG", hbmg, mul, false),       m("WMHBMG", wmhbmg, mul, false),
            m("PCG-MG", mg, mul, true),        m("PCG-M.BPX", bpx, mul, true),
            m("PCG-HBMG", hbmg, mul, true),    m("PCG-WMHBMG", wmhbmg, mul, true),
            m("PCG-A.MG", mg, add, true),      m("PCG-BPX", bpx, add, true),
            m("PCG-HB", hbmg, add, true),      m("PCG-WMHB", wmhbmg, add, true),
        };
    }();
    return methods;
}

const NamedMethod& find_method(const std::string& name)
{
    for (const auto& m : standard_methods())
        if (m.name == name)
            return m;
    throw std::invalid_argument("unknown method: " + name);
}

} // namespace mlprec
