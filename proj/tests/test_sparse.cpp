#include <doctest.h>

#include <algorithm>
#include <tuple>

#include "mlprec/flops.hpp"
#include "mlprec/sparse.hpp"
#include "oracle.hpp"

using namespace mlprec;

namespace {

// The 5x5 example: rows [1 2 . . .; 3 4 5 . 6; . 7 8 . .; . . . 9 10; . 11 . 12 13].
std::vector<Triplet> example()
{
    return {{0, 0, 1},  {0, 1, 2},  {1, 0, 3}, {1, 1, 4},  {1, 2, 5},  {1, 4, 6},  {2, 1, 7},
            {2, 2, 8},  {3, 3, 9},  {3, 4, 10}, {4, 1, 11}, {4, 3, 12}, {4, 4, 13}};
}

std::vector<std::tuple<std::size_t, std::size_t, double>> sorted(std::vector<Triplet> t)
{
    std::vector<std::tuple<std::size_t, std::size_t, double>> out;
    for (const auto& e : t)
        out.emplace_back(e.row, e.col, e.value);
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

TEST_CASE("example dumps in column, row and DRC layout")
{
    const auto t = example();
    CHECK(dump(ColMatrix::from_triplets(5, 5, t)) ==
          "A = [1, 3, 2, 4, 7, 11, 5, 8, 9, 12, 6, 10, 13]\n"
          "IA = [1, 3, 7, 9, 11, 14]\n"
          "JA = [1, 2, 1, 2, 3, 5, 2, 3, 4, 5, 2, 4, 5]\n");
    CHECK(dump(RowMatrix::from_triplets(5, 5, t)) ==
          "A = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13]\n"
          "IA = [1, 3, 7, 9, 11, 14]\n"
          "JA = [1, 2, 1, 2, 3, 5, 2, 3, 4, 5, 2, 4, 5]\n");
    CHECK(dump(DrcMatrix::from_triplets(5, t)) ==
          "AD = [1, 4, 8, 9, 13]\n"
          "AU = [2, 5, 6, 10]\n"
          "AL = [3, 7, 11, 12]\n"
          "IA = [1, 2, 4, 4, 5, 5]\n"
          "JA = [2, 3, 5, 5]\n");
}

TEST_CASE("matvec of the example with ones")
{
    const auto t = example();
    const Vector ones(5, 1.0);
    const Vector expected{3, 18, 15, 19, 36};
    CHECK(ColMatrix::from_triplets(5, 5, t) * ones == expected);
    CHECK(RowMatrix::from_triplets(5, 5, t) * ones == expected);
    CHECK(DrcMatrix::from_triplets(5, t) * ones == expected);
    CHECK(XlnMatrix::from_triplets(5, 5, t) * ones == expected);
}

TEST_CASE("storage counts")
{
    const auto t = example();
    CHECK(ColMatrix::from_triplets(5, 5, t).storage_integers() == 19);
    CHECK(RowMatrix::from_triplets(5, 5, t).storage_integers() == 19);
    const auto d = DrcMatrix::from_triplets(5, t);
    CHECK(d.storage_integers() == 10);
    CHECK(d.storage_values() == 13);
}

TEST_CASE("XLN traversals hold the same nonzeros")
{
    const auto t = example();
    const auto x = XlnMatrix::from_triplets(5, 5, t);
    CHECK(x.nnz() == 13);
    CHECK(sorted(x.triplets()) == sorted(t));
    CHECK(sorted(x.triplets_by_col()) == sorted(t));
    CHECK(x.at(4, 3) == 12.0);
    CHECK(x.at(0, 4) == 0.0);
    CHECK_FALSE(x.contains(0, 4));
    CHECK(sorted(x.to_row().triplets()) == sorted(t));
    CHECK(sorted(x.to_col().triplets()) == sorted(t));
}

TEST_CASE("duplicates are summed and explicit zeros are kept in XLN")
{
    XlnMatrix x(2, 2);
    x.insert_add(0, 1, 2.0);
    x.insert_add(0, 1, -2.0);
    CHECK(x.nnz() == 1);
    CHECK(x.contains(0, 1));
    const std::vector<Triplet> dup{{0, 0, 1.0}, {0, 0, 2.5}};
    CHECK(ColMatrix::from_triplets(1, 1, dup).values()[0] == 3.5);
}

TEST_CASE("strip the example at three coarse unknowns")
{
    auto x = XlnMatrix::from_triplets(5, 5, example());
    const auto b = strip_blocks(x, 3);
    CHECK(x.rows() == 3);
    CHECK(x.cols() == 3);
    CHECK(x.nnz() == 7);
    const oracle::MatrixXd a22 = oracle::dense(b.a22);
    CHECK(a22(0, 0) == 9);
    CHECK(a22(0, 1) == 10);
    CHECK(a22(1, 0) == 12);
    CHECK(a22(1, 1) == 13);
    CHECK(b.a12.rows() == 3);
    CHECK(b.a12.cols() == 2);
    CHECK(b.a12.nnz() == 1);
    CHECK(oracle::dense(b.a12)(1, 1) == 6);
    CHECK(b.a21.nnz() == 1);
    CHECK(oracle::dense(b.a21)(1, 1) == 11);
}

TEST_CASE("strip rejects a coarse size at or past the order")
{
    auto x = XlnMatrix::from_triplets(5, 5, example());
    CHECK_THROWS_AS(strip_blocks(x, 5), std::invalid_argument);
    CHECK_THROWS_AS(strip_blocks(x, 7), std::invalid_argument);
}

TEST_CASE("DRC rejects an unsymmetric pattern")
{
    const std::vector<Triplet> t{{0, 0, 1}, {1, 1, 1}, {0, 1, 2}};
    CHECK_THROWS_AS(DrcMatrix::from_triplets(2, t), FormatError);
}

TEST_CASE("random matrices: formats, strip and reassembly agree with dense")
{
    std::mt19937 rng(11);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 2 + rng() % 20;
        const oracle::MatrixXd a = oracle::random_spd(n, 0.3, rng);
        const auto t = oracle::triplets_of(a);
        const auto v = oracle::random_vector(n, rng);
        const oracle::VectorXd av = a * oracle::vec(v);
        CHECK(oracle::rel_diff(oracle::vec(ColMatrix::from_triplets(n, n, t) * v), av) < 1e-14);
        CHECK(oracle::rel_diff(oracle::vec(RowMatrix::from_triplets(n, n, t) * v), av) < 1e-14);
        CHECK(oracle::rel_diff(oracle::vec(DrcMatrix::from_triplets(n, t) * v), av) < 1e-14);
        CHECK(oracle::rel_diff(oracle::vec(XlnMatrix::from_triplets(n, n, t) * v), av) < 1e-14);

        Vector y(n, 0.0);
        ColMatrix::from_triplets(n, n, t).transpose_multiply_add(v, y, 2.0);
        CHECK(oracle::rel_diff(oracle::vec(y), 2.0 * a.transpose() * oracle::vec(v)) < 1e-14);

        const std::size_t nc = 1 + rng() % (n - 1);
        auto x = XlnMatrix::from_triplets(n, n, t);
        const auto b = strip_blocks(x, nc);
        const auto e = static_cast<Eigen::Index>(nc);
        const auto f = static_cast<Eigen::Index>(n - nc);
        oracle::MatrixXd back = oracle::MatrixXd::Zero(a.rows(), a.cols());
        back.topLeftCorner(e, e) = oracle::dense(x);
        back.topRightCorner(e, f) = oracle::dense(b.a12);
        back.bottomLeftCorner(f, e) = oracle::dense(b.a21);
        back.bottomRightCorner(f, f) = oracle::dense(b.a22);
        CHECK(oracle::max_abs(back - a) == 0.0);
    }
}

TEST_CASE("linked-list products match dense products")
{
    std::mt19937 rng(5);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 2 + rng() % 25;
        const oracle::MatrixXd a = oracle::random_spd(n, 0.25, rng);
        const oracle::MatrixXd k = oracle::random_sparse(n, n, 0.15, rng);
        const auto kc = ColMatrix::from_triplets(n, n, oracle::triplets_of(k));

        auto x = XlnMatrix::from_triplets(n, n, oracle::triplets_of(a));
        accumulate_right_product(x, kc);
        const oracle::MatrixXd ak = a + a * k;
        CHECK(oracle::rel_diff(oracle::dense(x), ak) < 1e-12);

        accumulate_left_transpose_product(x, kc);
        CHECK(oracle::rel_diff(oracle::dense(x), ak + k.transpose() * ak) < 1e-12);

        const oracle::MatrixXd b = oracle::random_sparse(n, 3, 0.4, rng);
        const auto c = multiply(RowMatrix::from_triplets(n, n, oracle::triplets_of(a)),
                                ColMatrix::from_triplets(n, 3, oracle::triplets_of(b)));
        CHECK(oracle::rel_diff(oracle::dense(c), a * b) < 1e-12);
    }
}

TEST_CASE("remove_trailing returns exactly the dropped links")
{
    auto x = XlnMatrix::from_triplets(5, 5, example());
    const auto removed = x.remove_trailing(3);
    CHECK(removed.size() == 6);
    CHECK(x.nnz() == 7);
    for (const auto& e : removed)
        CHECK((e.row >= 3 || e.col >= 3));
}

TEST_CASE("DRC sweeps agree with triangular solves")
{
    std::mt19937 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 1 + rng() % 20;
        const oracle::MatrixXd a = oracle::random_spd(n, 0.3, rng);
        const auto d = DrcMatrix::from_triplets(n, oracle::triplets_of(a));
        const auto f = oracle::random_vector(n, rng);
        const auto u0 = oracle::random_vector(n, rng);

        Vector u = u0;
        d.forward_sweep(f, u);
        d.backward_sweep(f, u);
        const oracle::VectorXd expect = oracle::symmetric_gauss_seidel(a, oracle::vec(u0), oracle::vec(f));
        CHECK(oracle::rel_diff(oracle::vec(u), expect) < 1e-12);

        Vector j = u0;
        d.jacobi_sweep(f, j);
        const oracle::VectorXd dinv = a.diagonal().cwiseInverse();
        const oracle::VectorXd je =
            oracle::vec(u0) + dinv.cwiseProduct(oracle::vec(f) - a * oracle::vec(u0));
        CHECK(oracle::rel_diff(oracle::vec(j), je) < 1e-12);
    }
}

TEST_CASE("matvec flops: one multiply-add per nonzero, plus one per row when gathering")
{
    const auto r = RowMatrix::from_triplets(5, 5, example());
    FlopCounter c;
    {
        FlopScope scope(c);
        (void)(r * Vector(5, 1.0));
    }
    CHECK(c.total() == 2 * (13 + 5));
    const auto col = ColMatrix::from_triplets(5, 5, example());
    FlopCounter d;
    {
        FlopScope scope(d);
        (void)(col * Vector(5, 1.0));
    }
    CHECK(d.total() == 2 * 13);
}
