#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mlprec {

using Vector = std::vector<double>;

inline constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

struct Triplet
{
    std::size_t row;
    std::size_t col;
    double value;
};

/// Raised when a matrix does not have the structure a storage scheme needs
/// (e.g. a DRC matrix built from a pattern that is not structurally
/// symmetric).
class FormatError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Raised by a point smoother or Jacobi step that meets a zero diagonal.
class SingularSmootherError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

/// Compressed storage along one "major" dimension. Shared by the column and
/// row compressed formats, which are transposes of one another.
struct Compressed
{
    std::size_t n_major = 0;
    std::size_t n_minor = 0;
    std::vector<std::size_t> start; // n_major + 1
    std::vector<std::size_t> index; // minor index per nonzero
    std::vector<double> value;

    static Compressed build(std::size_t n_major, std::size_t n_minor,
                            std::span<const Triplet> entries, bool by_column);

    // y[minor] += alpha * A[major, minor] * x[major] summed over majors
    void scatter_add(std::span<const double> x, std::span<double> y, double alpha) const;
    // y[major] += alpha * sum_minor A[major, minor] * x[minor]
    void gather_add(std::span<const double> x, std::span<double> y, double alpha) const;
};

} // namespace detail

/// Compressed column storage (COL). Columns are ordered; rows are ascending
/// within a column. Duplicate triplets are summed.
class ColMatrix
{
public:
    ColMatrix() = default;
    ColMatrix(std::size_t rows, std::size_t cols);

    static ColMatrix from_triplets(std::size_t rows, std::size_t cols,
                                   std::span<const Triplet> entries);

    std::size_t rows() const { return data_.n_minor; }
    std::size_t cols() const { return data_.n_major; }
    std::size_t nnz() const { return data_.value.size(); }

    /// IA: first nonzero of each column, length cols() + 1.
    std::span<const std::size_t> col_starts() const { return data_.start; }
    /// JA: row index of each nonzero.
    std::span<const std::size_t> row_indices() const { return data_.index; }
    /// A: nonzero values, column-major.
    std::span<const double> values() const { return data_.value; }

    /// y += alpha * A x
    void multiply_add(std::span<const double> x, std::span<double> y, double alpha = 1.0) const;
    /// y += alpha * A^T x
    void transpose_multiply_add(std::span<const double> x, std::span<double> y,
                                double alpha = 1.0) const;
    Vector operator*(std::span<const double> x) const;

    std::vector<Triplet> triplets() const;

    /// Integer words used: nZ + nC + 1.
    std::size_t storage_integers() const { return nnz() + cols() + 1; }

    template <class F>
    void for_each_in_col(std::size_t c, F&& fn) const
    {
        for (std::size_t k = data_.start[c]; k < data_.start[c + 1]; ++k)
            fn(data_.index[k], data_.value[k]);
    }

private:
    detail::Compressed data_;
};

/// Compressed row storage (ROW), the transpose layout of ColMatrix.
class RowMatrix
{
public:
    RowMatrix() = default;
    RowMatrix(std::size_t rows, std::size_t cols);

    static RowMatrix from_triplets(std::size_t rows, std::size_t cols,
                                   std::span<const Triplet> entries);

    std::size_t rows() const { return data_.n_major; }
    std::size_t cols() const { return data_.n_minor; }
    std::size_t nnz() const { return data_.value.size(); }

    std::span<const std::size_t> row_starts() const { return data_.start; }
    std::span<const std::size_t> col_indices() const { return data_.index; }
    std::span<const double> values() const { return data_.value; }

    void multiply_add(std::span<const double> x, std::span<double> y, double alpha = 1.0) const;
    void transpose_multiply_add(std::span<const double> x, std::span<double> y,
                                double alpha = 1.0) const;
    Vector operator*(std::span<const double> x) const;

    std::vector<Triplet> triplets() const;
    ColMatrix to_col() const;
    Vector diagonal() const;

    std::size_t storage_integers() const { return nnz() + rows() + 1; }

    template <class F>
    void for_each_in_row(std::size_t r, F&& fn) const
    {
        for (std::size_t k = data_.start[r]; k < data_.start[r + 1]; ++k)
            fn(data_.index[k], data_.value[k]);
    }

private:
    detail::Compressed data_;
};

/// Diagonal-row-column storage (DRC) for square, structurally symmetric
/// matrices. The diagonal is dense; the strict upper triangle is stored by
/// rows and the strict lower triangle by columns, sharing one IA/JA pair:
/// for p in [IA[i], IA[i+1]), upper()[p] = A(i, JA[p]) and
/// lower()[p] = A(JA[p], i).
class DrcMatrix
{
public:
    DrcMatrix() = default;
    explicit DrcMatrix(std::size_t n);

    /// Throws FormatError if the off-diagonal pattern is not symmetric.
    static DrcMatrix from_triplets(std::size_t n, std::span<const Triplet> entries);

    std::size_t size() const { return diag_.size(); }
    std::size_t nnz_offdiag() const { return upper_.size(); }

    std::span<const double> diagonal() const { return diag_; }
    std::span<const double> upper() const { return upper_; }
    std::span<const double> lower() const { return lower_; }
    std::span<const std::size_t> starts() const { return start_; }
    std::span<const std::size_t> indices() const { return index_; }

    void multiply_add(std::span<const double> x, std::span<double> y, double alpha = 1.0) const;
    Vector operator*(std::span<const double> x) const;

    /// One Gauss-Seidel sweep for A u = f in ascending index order.
    void forward_sweep(std::span<const double> f, std::span<double> u) const;
    /// One Gauss-Seidel sweep in descending index order.
    void backward_sweep(std::span<const double> f, std::span<double> u) const;
    /// One Jacobi step u += D^{-1} (f - A u).
    void jacobi_sweep(std::span<const double> f, std::span<double> u) const;

    std::vector<Triplet> triplets() const;

    /// Integer words: (n + 1) + nnz_offdiag.
    std::size_t storage_integers() const { return start_.size() + index_.size(); }
    /// Floating point words: n + 2 * nnz_offdiag.
    std::size_t storage_values() const { return diag_.size() + upper_.size() + lower_.size(); }

private:
    std::vector<double> diag_;
    std::vector<double> upper_;
    std::vector<double> lower_;
    std::vector<std::size_t> start_;
    std::vector<std::size_t> index_;
};

/// Orthogonal-linked list storage (XLN). Every nonzero is a link threaded
/// onto an unsorted singly linked list for its row and one for its column,
/// so the matrix can be filled dynamically and traversed either way.
/// New links are pushed at the head of both lists.
class XlnMatrix
{
public:
    XlnMatrix() = default;
    XlnMatrix(std::size_t rows, std::size_t cols);

    static XlnMatrix from_triplets(std::size_t rows, std::size_t cols,
                                   std::span<const Triplet> entries);

    std::size_t rows() const { return row_head_.size(); }
    std::size_t cols() const { return col_head_.size(); }
    std::size_t nnz() const { return nnz_; }

    /// A(row, col) += value, creating the link if needed. Explicit zeros are
    /// kept once inserted.
    void insert_add(std::size_t row, std::size_t col, double value);

    /// Value at (row, col), 0 if there is no link.
    double at(std::size_t row, std::size_t col) const;
    bool contains(std::size_t row, std::size_t col) const;

    template <class F>
    void for_each_in_row(std::size_t r, F&& fn) const
    {
        for (std::size_t l = row_head_[r]; l != kNone; l = links_[l].next_in_row)
            fn(links_[l].col, links_[l].value);
    }

    template <class F>
    void for_each_in_col(std::size_t c, F&& fn) const
    {
        for (std::size_t l = col_head_[c]; l != kNone; l = links_[l].next_in_col)
            fn(links_[l].row, links_[l].value);
    }

    void multiply_add(std::span<const double> x, std::span<double> y, double alpha = 1.0) const;
    Vector operator*(std::span<const double> x) const;

    /// Nonzeros in row traversal order.
    std::vector<Triplet> triplets() const;
    /// Nonzeros in column traversal order.
    std::vector<Triplet> triplets_by_col() const;
    RowMatrix to_row() const;
    ColMatrix to_col() const;

    /// Removes every link with row >= n_coarse or col >= n_coarse and shrinks
    /// the matrix to n_coarse x n_coarse. Returns the removed links.
    std::vector<Triplet> remove_trailing(std::size_t n_coarse);

private:
    struct Link
    {
        std::size_t row;
        std::size_t col;
        double value;
        std::size_t next_in_row;
        std::size_t next_in_col;
    };

    std::size_t allocate(std::size_t row, std::size_t col, double value);
    void release(std::size_t link);

    std::vector<Link> links_;
    std::vector<std::size_t> row_head_; // IP
    std::vector<std::size_t> col_head_; // JP
    std::size_t free_ = kNone;
    std::size_t nnz_ = 0;
};

/// A += A * K for square K of the same order as A. The outer loop runs over
/// the columns of K, then over the nonzeros of each column, then down the
/// matching column of A, so the work is proportional to the nonzeros touched.
void accumulate_right_product(XlnMatrix& a, const ColMatrix& k);

/// A += K^T * A, traversing A by rows.
void accumulate_left_transpose_product(XlnMatrix& a, const ColMatrix& k);

/// Blocks split off the trailing part of an XLN matrix.
struct StrippedBlocks
{
    ColMatrix a12; // n_coarse x n_fine
    RowMatrix a21; // n_fine x n_coarse
    DrcMatrix a22; // n_fine x n_fine
};

/// Moves everything outside the leading n_coarse x n_coarse block of `a`
/// into COL/ROW/DRC blocks; `a` keeps only its A11 block.
StrippedBlocks strip_blocks(XlnMatrix& a, std::size_t n_coarse);

/// C = A * B with A by rows and B by columns; result stored by columns.
ColMatrix multiply(const RowMatrix& a, const ColMatrix& b);

/// 1-based dumps in the `A = [...]`, `IA = [...]`, `JA = [...]` layout.
std::string dump(const ColMatrix& a);
std::string dump(const RowMatrix& a);
/// `AD`, `AU`, `AL`, `IA`, `JA`.
std::string dump(const DrcMatrix& a);

} // namespace mlprec
