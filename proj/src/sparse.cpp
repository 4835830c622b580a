#include "mlprec/sparse.hpp"

#include "mlprec/flops.hpp"

#include <algorithm>
#include <sstream>
#include <type_traits>

namespace mlprec {

namespace detail {

Compressed Compressed::build(std::size_t n_major, std::size_t n_minor,
                             std::span<const Triplet> entries, bool by_column)
{
    auto major_of = [by_column](const Triplet& t) { return by_column ? t.col : t.row; };
    auto minor_of = [by_column](const Triplet& t) { return by_column ? t.row : t.col; };

    std::vector<std::size_t> count(n_major + 1, 0);
    for (const auto& t : entries) {
        if (major_of(t) >= n_major || minor_of(t) >= n_minor)
            throw std::invalid_argument("sparse: triplet index out of range");
        ++count[major_of(t) + 1];
    }
    for (std::size_t m = 0; m < n_major; ++m)
        count[m + 1] += count[m];

    // Stable bucket placement keeps insertion order inside each major slice.
    std::vector<std::size_t> order(entries.size());
    {
        std::vector<std::size_t> cursor(count.begin(), count.end() - 1);
        for (std::size_t k = 0; k < entries.size(); ++k)
            order[cursor[major_of(entries[k])]++] = k;
    }

    Compressed out;
    out.n_major = n_major;
    out.n_minor = n_minor;
    out.start.assign(n_major + 1, 0);
    out.index.reserve(entries.size());
    out.value.reserve(entries.size());

    for (std::size_t m = 0; m < n_major; ++m) {
        auto first = order.begin() + static_cast<std::ptrdiff_t>(count[m]);
        auto last = order.begin() + static_cast<std::ptrdiff_t>(count[m + 1]);
        std::stable_sort(first, last, [&](std::size_t a, std::size_t b) {
            return minor_of(entries[a]) < minor_of(entries[b]);
        });
        for (auto it = first; it != last; ++it) {
            const auto& t = entries[*it];
            const std::size_t minor = minor_of(t);
            if (out.index.size() > out.start[m] && out.index.back() == minor)
                out.value.back() += t.value;
            else {
                out.index.push_back(minor);
                out.value.push_back(t.value);
            }
        }
        out.start[m + 1] = out.index.size();
    }
    return out;
}

void Compressed::scatter_add(std::span<const double> x, std::span<double> y, double alpha) const
{
    for (std::size_t m = 0; m < n_major; ++m) {
        const double xm = alpha * x[m];
        for (std::size_t k = start[m]; k < start[m + 1]; ++k)
            y[index[k]] += value[k] * xm;
    }
    flops::madd(value.size());
    if (alpha != 1.0)
        flops::mult(n_major);
}

void Compressed::gather_add(std::span<const double> x, std::span<double> y, double alpha) const
{
    for (std::size_t m = 0; m < n_major; ++m) {
        double sum = 0.0;
        for (std::size_t k = start[m]; k < start[m + 1]; ++k)
            sum += value[k] * x[index[k]];
        y[m] += alpha * sum;
    }
    flops::madd(value.size() + n_major);
}

} // namespace detail

namespace {

void check_size(std::size_t expected, std::size_t actual, const char* what)
{
    if (expected != actual)
        throw std::invalid_argument(std::string("sparse: dimension mismatch in ") + what);
}

} // namespace

// ---------------------------------------------------------------- ColMatrix

ColMatrix::ColMatrix(std::size_t rows, std::size_t cols)
{
    data_.n_major = cols;
    data_.n_minor = rows;
    data_.start.assign(cols + 1, 0);
}

ColMatrix ColMatrix::from_triplets(std::size_t rows, std::size_t cols,
                                   std::span<const Triplet> entries)
{
    ColMatrix m;
    m.data_ = detail::Compressed::build(cols, rows, entries, true);
    return m;
}

void ColMatrix::multiply_add(std::span<const double> x, std::span<double> y, double alpha) const
{
    check_size(cols(), x.size(), "ColMatrix::multiply_add (x)");
    check_size(rows(), y.size(), "ColMatrix::multiply_add (y)");
    data_.scatter_add(x, y, alpha);
}

void ColMatrix::transpose_multiply_add(std::span<const double> x, std::span<double> y,
                                       double alpha) const
{
    check_size(rows(), x.size(), "ColMatrix::transpose_multiply_add (x)");
    check_size(cols(), y.size(), "ColMatrix::transpose_multiply_add (y)");
    data_.gather_add(x, y, alpha);
}

Vector ColMatrix::operator*(std::span<const double> x) const
{
    Vector y(rows(), 0.0);
    multiply_add(x, y);
    return y;
}

std::vector<Triplet> ColMatrix::triplets() const
{
    std::vector<Triplet> out;
    out.reserve(nnz());
    for (std::size_t c = 0; c < cols(); ++c)
        for_each_in_col(c, [&](std::size_t r, double v) { out.push_back({r, c, v}); });
    return out;
}

// ---------------------------------------------------------------- RowMatrix

RowMatrix::RowMatrix(std::size_t rows, std::size_t cols)
{
    data_.n_major = rows;
    data_.n_minor = cols;
    data_.start.assign(rows + 1, 0);
}

RowMatrix RowMatrix::from_triplets(std::size_t rows, std::size_t cols,
                                   std::span<const Triplet> entries)
{
    RowMatrix m;
    m.data_ = detail::Compressed::build(rows, cols, entries, false);
    return m;
}

void RowMatrix::multiply_add(std::span<const double> x, std::span<double> y, double alpha) const
{
    check_size(cols(), x.size(), "RowMatrix::multiply_add (x)");
    check_size(rows(), y.size(), "RowMatrix::multiply_add (y)");
    data_.gather_add(x, y, alpha);
}

void RowMatrix::transpose_multiply_add(std::span<const double> x, std::span<double> y,
                                       double alpha) const
{
    check_size(rows(), x.size(), "RowMatrix::transpose_multiply_add (x)");
    check_size(cols(), y.size(), "RowMatrix::transpose_multiply_add (y)");
    data_.scatter_add(x, y, alpha);
}

Vector RowMatrix::operator*(std::span<const double> x) const
{
    Vector y(rows(), 0.0);
    multiply_add(x, y);
    return y;
}

std::vector<Triplet> RowMatrix::triplets() const
{
    std::vector<Triplet> out;
    out.reserve(nnz());
    for (std::size_t r = 0; r < rows(); ++r)
        for_each_in_row(r, [&](std::size_t c, double v) { out.push_back({r, c, v}); });
    return out;
}

ColMatrix RowMatrix::to_col() const
{
    const auto t = triplets();
    return ColMatrix::from_triplets(rows(), cols(), t);
}

Vector RowMatrix::diagonal() const
{
    Vector d(std::min(rows(), cols()), 0.0);
    for (std::size_t r = 0; r < d.size(); ++r)
        for_each_in_row(r, [&](std::size_t c, double v) {
            if (c == r)
                d[r] += v;
        });
    return d;
}

// ---------------------------------------------------------------- DrcMatrix

DrcMatrix::DrcMatrix(std::size_t n) : diag_(n, 0.0), start_(n + 1, 0) {}

DrcMatrix DrcMatrix::from_triplets(std::size_t n, std::span<const Triplet> entries)
{
    DrcMatrix m(n);
    std::vector<Triplet> upper;
    std::vector<Triplet> lower_transposed;
    for (const auto& t : entries) {
        if (t.row >= n || t.col >= n)
            throw std::invalid_argument("DrcMatrix: triplet index out of range");
        if (t.row == t.col)
            m.diag_[t.row] += t.value;
        else if (t.row < t.col)
            upper.push_back(t);
        else
            lower_transposed.push_back({t.col, t.row, t.value});
    }
    // Both triangles compressed by "row" of the upper triangle.
    const auto u = detail::Compressed::build(n, n, upper, false);
    const auto l = detail::Compressed::build(n, n, lower_transposed, false);
    if (u.start != l.start || u.index != l.index)
        throw FormatError("DrcMatrix: matrix is not structurally symmetric");
    m.start_ = u.start;
    m.index_ = u.index;
    m.upper_ = u.value;
    m.lower_ = l.value;
    return m;
}

void DrcMatrix::multiply_add(std::span<const double> x, std::span<double> y, double alpha) const
{
    const std::size_t n = size();
    check_size(n, x.size(), "DrcMatrix::multiply_add (x)");
    check_size(n, y.size(), "DrcMatrix::multiply_add (y)");
    for (std::size_t i = 0; i < n; ++i) {
        double sum = diag_[i] * x[i];
        const double xi = alpha * x[i];
        for (std::size_t p = start_[i]; p < start_[i + 1]; ++p) {
            const std::size_t j = index_[p];
            sum += upper_[p] * x[j];
            y[j] += lower_[p] * xi;
        }
        y[i] += alpha * sum;
    }
    flops::madd(2 * n + 2 * upper_.size());
}

Vector DrcMatrix::operator*(std::span<const double> x) const
{
    Vector y(size(), 0.0);
    multiply_add(x, y);
    return y;
}

namespace {

double checked_pivot(double d)
{
    if (d == 0.0)
        throw SingularSmootherError("smoother: zero diagonal entry");
    return d;
}

} // namespace

void DrcMatrix::forward_sweep(std::span<const double> f, std::span<double> u) const
{
    const std::size_t n = size();
    check_size(n, f.size(), "DrcMatrix::forward_sweep (f)");
    check_size(n, u.size(), "DrcMatrix::forward_sweep (u)");
    // t accumulates the lower-triangle terms of already updated unknowns.
    Vector t(f.begin(), f.end());
    for (std::size_t i = 0; i < n; ++i) {
        double s = t[i];
        for (std::size_t p = start_[i]; p < start_[i + 1]; ++p)
            s -= upper_[p] * u[index_[p]];
        u[i] = s / checked_pivot(diag_[i]);
        for (std::size_t p = start_[i]; p < start_[i + 1]; ++p)
            t[index_[p]] -= lower_[p] * u[i];
    }
    flops::madd(2 * upper_.size());
    flops::div(n);
}

void DrcMatrix::backward_sweep(std::span<const double> f, std::span<double> u) const
{
    const std::size_t n = size();
    check_size(n, f.size(), "DrcMatrix::backward_sweep (f)");
    check_size(n, u.size(), "DrcMatrix::backward_sweep (u)");
    // Lower-triangle terms use the old values, which are all known up front.
    Vector t(f.begin(), f.end());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t p = start_[i]; p < start_[i + 1]; ++p)
            t[index_[p]] -= lower_[p] * u[i];
    for (std::size_t i = n; i-- > 0;) {
        double s = t[i];
        for (std::size_t p = start_[i]; p < start_[i + 1]; ++p)
            s -= upper_[p] * u[index_[p]];
        u[i] = s / checked_pivot(diag_[i]);
    }
    flops::madd(2 * upper_.size());
    flops::div(n);
}

void DrcMatrix::jacobi_sweep(std::span<const double> f, std::span<double> u) const
{
    const std::size_t n = size();
    check_size(n, f.size(), "DrcMatrix::jacobi_sweep (f)");
    check_size(n, u.size(), "DrcMatrix::jacobi_sweep (u)");
    Vector r(f.begin(), f.end());
    multiply_add(u, r, -1.0);
    for (std::size_t i = 0; i < n; ++i)
        u[i] += r[i] / checked_pivot(diag_[i]);
    flops::add(n);
    flops::div(n);
}

std::vector<Triplet> DrcMatrix::triplets() const
{
    std::vector<Triplet> out;
    for (std::size_t i = 0; i < size(); ++i) {
        out.push_back({i, i, diag_[i]});
        for (std::size_t p = start_[i]; p < start_[i + 1]; ++p) {
            out.push_back({i, index_[p], upper_[p]});
            out.push_back({index_[p], i, lower_[p]});
        }
    }
    return out;
}

// ---------------------------------------------------------------- XlnMatrix

XlnMatrix::XlnMatrix(std::size_t rows, std::size_t cols)
    : row_head_(rows, kNone), col_head_(cols, kNone)
{
}

XlnMatrix XlnMatrix::from_triplets(std::size_t rows, std::size_t cols,
                                   std::span<const Triplet> entries)
{
    XlnMatrix m(rows, cols);
    for (const auto& t : entries)
        m.insert_add(t.row, t.col, t.value);
    return m;
}

std::size_t XlnMatrix::allocate(std::size_t row, std::size_t col, double value)
{
    std::size_t l;
    if (free_ != kNone) {
        l = free_;
        free_ = links_[l].next_in_row;
    } else {
        l = links_.size();
        links_.emplace_back();
    }
    links_[l] = Link{row, col, value, row_head_[row], col_head_[col]};
    row_head_[row] = l;
    col_head_[col] = l;
    ++nnz_;
    return l;
}

void XlnMatrix::release(std::size_t link)
{
    links_[link].next_in_row = free_;
    links_[link].next_in_col = kNone;
    free_ = link;
    --nnz_;
}

void XlnMatrix::insert_add(std::size_t row, std::size_t col, double value)
{
    if (row >= rows() || col >= cols())
        throw std::invalid_argument("XlnMatrix::insert_add: index out of range");
    for (std::size_t l = row_head_[row]; l != kNone; l = links_[l].next_in_row) {
        if (links_[l].col == col) {
            links_[l].value += value;
            return;
        }
    }
    allocate(row, col, value);
}

double XlnMatrix::at(std::size_t row, std::size_t col) const
{
    for (std::size_t l = row_head_.at(row); l != kNone; l = links_[l].next_in_row)
        if (links_[l].col == col)
            return links_[l].value;
    return 0.0;
}

bool XlnMatrix::contains(std::size_t row, std::size_t col) const
{
    for (std::size_t l = row_head_.at(row); l != kNone; l = links_[l].next_in_row)
        if (links_[l].col == col)
            return true;
    return false;
}

void XlnMatrix::multiply_add(std::span<const double> x, std::span<double> y, double alpha) const
{
    check_size(cols(), x.size(), "XlnMatrix::multiply_add (x)");
    check_size(rows(), y.size(), "XlnMatrix::multiply_add (y)");
    for (std::size_t r = 0; r < rows(); ++r) {
        double sum = 0.0;
        for_each_in_row(r, [&](std::size_t c, double v) { sum += v * x[c]; });
        y[r] += alpha * sum;
    }
    flops::madd(nnz_ + rows());
}

Vector XlnMatrix::operator*(std::span<const double> x) const
{
    Vector y(rows(), 0.0);
    multiply_add(x, y);
    return y;
}

std::vector<Triplet> XlnMatrix::triplets() const
{
    std::vector<Triplet> out;
    out.reserve(nnz_);
    for (std::size_t r = 0; r < rows(); ++r)
        for_each_in_row(r, [&](std::size_t c, double v) { out.push_back({r, c, v}); });
    return out;
}

std::vector<Triplet> XlnMatrix::triplets_by_col() const
{
    std::vector<Triplet> out;
    out.reserve(nnz_);
    for (std::size_t c = 0; c < cols(); ++c)
        for_each_in_col(c, [&](std::size_t r, double v) { out.push_back({r, c, v}); });
    return out;
}

RowMatrix XlnMatrix::to_row() const
{
    const auto t = triplets();
    return RowMatrix::from_triplets(rows(), cols(), t);
}

ColMatrix XlnMatrix::to_col() const
{
    const auto t = triplets_by_col();
    return ColMatrix::from_triplets(rows(), cols(), t);
}

std::vector<Triplet> XlnMatrix::remove_trailing(std::size_t n_coarse)
{
    if (n_coarse > rows() || n_coarse > cols())
        throw std::invalid_argument("XlnMatrix::remove_trailing: n_coarse too large");

    std::vector<Triplet> removed;
    std::vector<std::size_t> doomed;
    std::vector<char> row_touched(n_coarse, 0);
    std::vector<char> col_touched(n_coarse, 0);
    std::vector<std::size_t> touched_rows;
    std::vector<std::size_t> touched_cols;

    // Links in trailing columns that sit in leading rows (the A12 part).
    for (std::size_t c = n_coarse; c < cols(); ++c) {
        for (std::size_t l = col_head_[c]; l != kNone; l = links_[l].next_in_col) {
            const auto& link = links_[l];
            if (link.row >= n_coarse)
                continue;
            removed.push_back({link.row, link.col, link.value});
            doomed.push_back(l);
            if (!row_touched[link.row]) {
                row_touched[link.row] = 1;
                touched_rows.push_back(link.row);
            }
        }
    }
    // Every link in a trailing row (the A21 and A22 parts).
    for (std::size_t r = n_coarse; r < rows(); ++r) {
        for (std::size_t l = row_head_[r]; l != kNone; l = links_[l].next_in_row) {
            const auto& link = links_[l];
            removed.push_back({link.row, link.col, link.value});
            doomed.push_back(l);
            if (link.col < n_coarse && !col_touched[link.col]) {
                col_touched[link.col] = 1;
                touched_cols.push_back(link.col);
            }
        }
    }

    for (std::size_t r : touched_rows) {
        std::size_t* slot = &row_head_[r];
        while (*slot != kNone) {
            Link& link = links_[*slot];
            if (link.col >= n_coarse)
                *slot = link.next_in_row;
            else
                slot = &link.next_in_row;
        }
    }
    for (std::size_t c : touched_cols) {
        std::size_t* slot = &col_head_[c];
        while (*slot != kNone) {
            Link& link = links_[*slot];
            if (link.row >= n_coarse)
                *slot = link.next_in_col;
            else
                slot = &link.next_in_col;
        }
    }

    for (std::size_t l : doomed)
        release(l);
    row_head_.resize(n_coarse);
    col_head_.resize(n_coarse);
    return removed;
}

// ---------------------------------------------------------------- products

void accumulate_right_product(XlnMatrix& a, const ColMatrix& k)
{
    if (k.rows() != a.cols() || k.cols() != a.cols())
        throw std::invalid_argument("accumulate_right_product: dimension mismatch");

    std::vector<Triplet> delta;
    for (std::size_t c = 0; c < k.cols(); ++c) {
        k.for_each_in_col(c, [&](std::size_t r, double kv) {
            a.for_each_in_col(r, [&](std::size_t i, double av) { delta.push_back({i, c, av * kv}); });
        });
    }
    for (const auto& t : delta)
        a.insert_add(t.row, t.col, t.value);
    flops::madd(delta.size());
}

void accumulate_left_transpose_product(XlnMatrix& a, const ColMatrix& k)
{
    if (k.rows() != a.rows() || k.cols() != a.rows())
        throw std::invalid_argument("accumulate_left_transpose_product: dimension mismatch");

    std::vector<Triplet> delta;
    for (std::size_t r = 0; r < k.cols(); ++r) {
        k.for_each_in_col(r, [&](std::size_t c, double kv) {
            a.for_each_in_row(c, [&](std::size_t j, double av) { delta.push_back({r, j, kv * av}); });
        });
    }
    for (const auto& t : delta)
        a.insert_add(t.row, t.col, t.value);
    flops::madd(delta.size());
}

StrippedBlocks strip_blocks(XlnMatrix& a, std::size_t n_coarse)
{
    if (a.rows() != a.cols())
        throw std::invalid_argument("strip_blocks: matrix must be square");
    if (n_coarse >= a.rows())
        throw std::invalid_argument("strip_blocks: n_coarse must be smaller than the dimension");

    const std::size_t n_fine = a.rows() - n_coarse;
    std::vector<Triplet> t12;
    std::vector<Triplet> t21;
    std::vector<Triplet> t22;
    for (const auto& t : a.remove_trailing(n_coarse)) {
        if (t.row < n_coarse)
            t12.push_back({t.row, t.col - n_coarse, t.value});
        else if (t.col < n_coarse)
            t21.push_back({t.row - n_coarse, t.col, t.value});
        else
            t22.push_back({t.row - n_coarse, t.col - n_coarse, t.value});
    }

    StrippedBlocks blocks;
    blocks.a12 = ColMatrix::from_triplets(n_coarse, n_fine, t12);
    blocks.a21 = RowMatrix::from_triplets(n_fine, n_coarse, t21);
    blocks.a22 = DrcMatrix::from_triplets(n_fine, t22);
    return blocks;
}

ColMatrix multiply(const RowMatrix& a, const ColMatrix& b)
{
    if (a.cols() != b.rows())
        throw std::invalid_argument("multiply: dimension mismatch");
    const ColMatrix a_col = a.to_col();

    std::vector<Triplet> out;
    Vector acc(a.rows(), 0.0);
    std::vector<char> used(a.rows(), 0);
    std::vector<std::size_t> pattern;
    std::size_t work = 0;
    for (std::size_t j = 0; j < b.cols(); ++j) {
        b.for_each_in_col(j, [&](std::size_t k, double bv) {
            a_col.for_each_in_col(k, [&](std::size_t i, double av) {
                if (!used[i]) {
                    used[i] = 1;
                    pattern.push_back(i);
                }
                acc[i] += av * bv;
                ++work;
            });
        });
        std::sort(pattern.begin(), pattern.end());
        for (std::size_t i : pattern) {
            out.push_back({i, j, acc[i]});
            acc[i] = 0.0;
            used[i] = 0;
        }
        pattern.clear();
    }
    flops::madd(work);
    return ColMatrix::from_triplets(a.rows(), b.cols(), out);
}

// ---------------------------------------------------------------- dumps

namespace {

template <class T>
void print_array(std::ostream& os, const char* name, std::span<const T> values, std::size_t shift)
{
    os << name << " = [";
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i)
            os << ", ";
        if constexpr (std::is_integral_v<T>)
            os << values[i] + shift;
        else
            os << values[i];
    }
    os << "]\n";
}

std::ostringstream dump_stream()
{
    std::ostringstream os;
    os.precision(15);
    return os;
}

} // namespace

std::string dump(const ColMatrix& a)
{
    auto os = dump_stream();
    print_array(os, "A", a.values(), 0);
    print_array(os, "IA", a.col_starts(), 1);
    print_array(os, "JA", a.row_indices(), 1);
    return os.str();
}

std::string dump(const RowMatrix& a)
{
    auto os = dump_stream();
    print_array(os, "A", a.values(), 0);
    print_array(os, "IA", a.row_starts(), 1);
    print_array(os, "JA", a.col_indices(), 1);
    return os.str();
}

std::string dump(const DrcMatrix& a)
{
    auto os = dump_stream();
    print_array(os, "AD", a.diagonal(), 0);
    print_array(os, "AU", a.upper(), 0);
    print_array(os, "AL", a.lower(), 0);
    print_array(os, "IA", a.starts(), 1);
    print_array(os, "JA", a.indices(), 1);
    return os.str();
}

} // namespace mlprec
