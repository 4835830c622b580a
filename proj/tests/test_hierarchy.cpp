#include <doctest.h>

#include <sstream>

#include "dense_cycles.hpp"
#include "mlprec/experiment.hpp"
#include "mlprec/hierarchy.hpp"

using namespace mlprec;

namespace {

struct Setup
{
    Mesh mesh;
    DofMap dofs;
    AssembledSystem system;
};

Setup experiment(ExperimentSet set, std::size_t levels)
{
    const ExperimentPlan plan = ExperimentPlan::standard(set);
    Mesh m = build_experiment_mesh(plan, levels);
    DofMap d(m);
    auto s = assemble(m, m.finest_level(), d, ProblemSpec::manufactured());
    return {std::move(m), std::move(d), std::move(s)};
}

} // namespace

TEST_CASE("prolongation matches the vertex parents")
{
    const auto e = experiment(ExperimentSet::one, 5);
    for (std::size_t j = 1; j < e.mesh.num_levels(); ++j) {
        const Prolongation p = build_prolongation(e.mesh, e.dofs, j);
        CHECK(p.n_coarse == e.dofs.num_dofs(j - 1));
        CHECK(p.n_fine == e.dofs.num_dofs(j) - p.n_coarse);
        const oracle::MatrixXd pd = oracle::dense(p.matrix);
        CHECK(oracle::max_abs(pd - oracle::prolongation(e.mesh, e.dofs, j)) == 0.0);
        CHECK(oracle::max_abs(oracle::dense(p.tail) - pd.bottomRows(p.n_fine)) == 0.0);
    }
    CHECK_THROWS_AS(build_prolongation(e.mesh, e.dofs, 0), std::invalid_argument);
}

TEST_CASE("prolongation reproduces linear functions")
{
    const ExperimentPlan plan = ExperimentPlan::standard(ExperimentSet::two);
    const Mesh m = build_experiment_mesh(plan, 5);
    const DofMap dofs(m);
    auto lin = [](const Vertex& v) { return 0.3 + 2.0 * v.x - 1.5 * v.y; };
    for (std::size_t j = 1; j < m.num_levels(); ++j) {
        const Prolongation p = build_prolongation(m, dofs, j);
        Vector coarse(p.n_coarse);
        for (std::size_t d = 0; d < p.n_coarse; ++d)
            coarse[d] = lin(m.vertices()[dofs.vertex_of(d)]);
        const Vector fine = p.matrix * coarse;
        for (std::size_t d = 0; d < fine.size(); ++d)
            CHECK(fine[d] == doctest::Approx(lin(m.vertices()[dofs.vertex_of(d)])).epsilon(1e-14));
    }
}

TEST_CASE("hierarchical stabilizer turns P into the first block of I + S")
{
    const auto e = experiment(ExperimentSet::one, 4);
    for (std::size_t j = 1; j < e.mesh.num_levels(); ++j) {
        const Prolongation p = build_prolongation(e.mesh, e.dofs, j);
        const auto g = hb_stabilizer(p);
        const auto n = static_cast<Eigen::Index>(p.n_coarse + p.n_fine);
        const auto c = static_cast<Eigen::Index>(p.n_coarse);
        const oracle::MatrixXd full = oracle::MatrixXd::Identity(n, n) + oracle::dense(g.stabilizer);
        CHECK(oracle::max_abs(full.leftCols(c) - oracle::dense(p.matrix)) == 0.0);
        CHECK(oracle::max_abs(full.rightCols(n - c) - oracle::MatrixXd::Identity(n, n).rightCols(n - c)) == 0.0);
        CHECK(g.k12.nnz() == 0);
        CHECK(g.k22.nnz() == 0);
        // (I + S)^{-1} = I - S for the hierarchical basis.
        const oracle::MatrixXd inv = oracle::MatrixXd::Identity(n, n) - oracle::dense(g.stabilizer);
        CHECK(oracle::max_abs(full * inv - oracle::MatrixXd::Identity(n, n)) < 1e-15);
    }
}

TEST_CASE("wavelet stabilizer blocks agree with dense Jacobi")
{
    std::mt19937 rng(17);
    for (int trial = 0; trial < 15; ++trial) {
        const auto inst = oracle::random_instance(rng);
        const std::size_t top = inst.mesh.finest_level();
        const Prolongation p = build_prolongation(inst.mesh, inst.dofs, top);
        const auto c = static_cast<Eigen::Index>(p.n_coarse);
        const auto nf = static_cast<Eigen::Index>(p.n_fine);
        const oracle::MatrixXd m11 = oracle::random_spd(p.n_coarse, 0.3, rng);
        const oracle::MatrixXd m12 = oracle::random_sparse(p.n_coarse, p.n_fine, 0.3, rng);
        for (int steps : {1, 2, 3}) {
            const auto g = wmhb_stabilizer(p, RowMatrix::from_triplets(p.n_coarse, p.n_coarse, oracle::triplets_of(m11)),
                                           ColMatrix::from_triplets(p.n_coarse, p.n_fine, oracle::triplets_of(m12)),
                                           steps);
            const oracle::MatrixXd k12 = -oracle::jacobi_solve(m11, m12, steps);
            const oracle::MatrixXd k21 = oracle::dense(p.tail);
            CHECK(oracle::rel_diff(oracle::dense(g.k12), k12) < 1e-12);
            CHECK(oracle::rel_diff(oracle::dense(g.k22), k21 * k12) < 1e-12);
            const oracle::MatrixXd s = oracle::dense(g.stabilizer);
            CHECK(oracle::max_abs(s.topLeftCorner(c, c)) == 0.0);
            CHECK(oracle::rel_diff(s.topRightCorner(c, nf), k12) < 1e-12);
            CHECK(oracle::rel_diff(s.bottomLeftCorner(nf, c), k21) < 1e-12);
            CHECK(oracle::rel_diff(s.bottomRightCorner(nf, nf), k21 * k12) < 1e-12);
        }
    }
}

TEST_CASE("approximate inverse: Jacobi and symmetric Gauss-Seidel")
{
    std::mt19937 rng(23);
    const oracle::MatrixXd m = oracle::random_spd(12, 0.3, rng);
    const auto rhs = oracle::random_vector(12, rng);
    const auto mr = RowMatrix::from_triplets(12, 12, oracle::triplets_of(m));
    const Vector x = approximate_inverse_apply(mr, rhs, 2, InverseApprox::jacobi);
    CHECK(oracle::rel_diff(oracle::vec(x), oracle::jacobi_solve(m, oracle::vec(rhs), 2)) < 1e-13);
    const Vector y = approximate_inverse_apply(mr, rhs, 1, InverseApprox::sgs);
    const oracle::VectorXd ye =
        oracle::symmetric_gauss_seidel(m, oracle::VectorXd::Zero(12), oracle::vec(rhs));
    CHECK(oracle::rel_diff(oracle::vec(y), ye) < 1e-13);
    // Many steps converge to the solve.
    const Vector z = approximate_inverse_apply(mr, rhs, 200, InverseApprox::sgs);
    CHECK(oracle::rel_diff(oracle::vec(z), m.llt().solve(oracle::vec(rhs))) < 1e-10);
}

TEST_CASE("change of basis on a single level is G^T A G")
{
    std::mt19937 rng(29);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 3 + rng() % 15;
        const std::size_t c = 1 + rng() % (n - 1);
        const oracle::MatrixXd a = oracle::random_spd(n, 0.3, rng);
        oracle::MatrixXd s = oracle::MatrixXd::Zero(n, n);
        const auto ec = static_cast<Eigen::Index>(c);
        const auto ef = static_cast<Eigen::Index>(n - c);
        s.bottomLeftCorner(ef, ec) = oracle::random_sparse(n - c, c, 0.3, rng);
        if (trial % 2) {
            s.topRightCorner(ec, ef) = oracle::random_sparse(c, n - c, 0.3, rng);
            s.bottomRightCorner(ef, ef) = s.bottomLeftCorner(ef, ec) * s.topRightCorner(ec, ef);
        }
        ChangeOfBasis g;
        g.k21 = RowMatrix::from_triplets(n - c, c, oracle::triplets_of(s.bottomLeftCorner(ef, ec)));
        g.stabilizer = ColMatrix::from_triplets(n, n, oracle::triplets_of(s));
        const auto t = run_change_of_basis(XlnMatrix::from_triplets(n, n, oracle::triplets_of(a)),
                                           std::span<const ChangeOfBasis>(&g, 1), true);
        const oracle::MatrixXd gd = oracle::MatrixXd::Identity(n, n) + s;
        const oracle::MatrixXd ahb = gd.transpose() * a * gd;
        REQUIRE(t.blocks.size() == 1);
        CHECK(oracle::rel_diff(oracle::dense(t.coarse), ahb.topLeftCorner(ec, ec)) < 1e-12);
        CHECK(oracle::rel_diff(oracle::dense(t.blocks[0].a12), ahb.topRightCorner(ec, ef)) < 1e-12);
        CHECK(oracle::rel_diff(oracle::dense(t.blocks[0].a21), ahb.bottomLeftCorner(ef, ec)) < 1e-12);
        CHECK(oracle::rel_diff(oracle::dense(t.blocks[0].a22), ahb.bottomRightCorner(ef, ef)) < 1e-12);
        REQUIRE(t.snapshots.size() == 2);
        CHECK(oracle::rel_diff(oracle::dense(t.snapshots[1]), a) < 1e-15);
    }
}

TEST_CASE("hierarchies match the dense construction on random meshes")
{
    std::mt19937 rng(31);
    for (int trial = 0; trial < 30; ++trial) {
        const auto inst = oracle::random_instance(rng);
        for (Basis basis : {Basis::nodal, Basis::hb, Basis::wmhb}) {
            HierarchyOptions opt;
            opt.keep_level_matrices = true;
            const Hierarchy h = build_hierarchy(inst.mesh, inst.dofs, inst.system, basis, opt);
            const auto d = oracle::build(inst.mesh, inst.dofs, inst.system, basis);
            CHECK(oracle::rel_diff(oracle::dense(h.coarse), d.coarse) < 1e-12);
            for (std::size_t j = 1; j < h.num_levels(); ++j) {
                const auto& l = d.levels[j];
                const Eigen::Index nf = l.n - l.c;
                CHECK(oracle::rel_diff(oracle::dense(h.levels[j].full), l.a) < 1e-12);
                if (basis == Basis::nodal)
                    continue;
                CHECK(oracle::rel_diff(oracle::dense(h.levels[j].change.stabilizer), l.s) < 1e-12);
                const auto& b = h.levels[j].blocks;
                CHECK(oracle::rel_diff(oracle::dense(b.a12), l.a_hb.topRightCorner(l.c, nf)) < 1e-12);
                CHECK(oracle::rel_diff(oracle::dense(b.a21), l.a_hb.bottomLeftCorner(nf, l.c)) < 1e-12);
                CHECK(oracle::rel_diff(oracle::dense(b.a22), l.a_hb.bottomRightCorner(nf, nf)) < 1e-12);
                // The coarse block of the transformed matrix is the Galerkin product.
                CHECK(oracle::rel_diff(l.a_hb.topLeftCorner(l.c, l.c), l.p.transpose() * l.a * l.p) < 1e-12);
            }
        }
    }
}

TEST_CASE("one ring of the example")
{
    const std::vector<Triplet> t{{0, 0, 1},  {0, 1, 2},  {1, 0, 3}, {1, 1, 4},  {1, 2, 5},  {1, 4, 6},  {2, 1, 7},
                                 {2, 2, 8},  {3, 3, 9},  {3, 4, 10}, {4, 1, 11}, {4, 3, 12}, {4, 4, 13}};
    const auto a = RowMatrix::from_triplets(5, 5, t);
    CHECK(one_ring(a, 3) == std::vector<std::size_t>{1, 3, 4});
    CHECK(one_ring(a, 5).empty());

    const std::vector<Triplet> diag{{0, 0, 1}, {1, 1, 1}, {2, 2, 1}};
    CHECK(one_ring(RowMatrix::from_triplets(3, 3, diag), 1) == std::vector<std::size_t>{1, 2});

    std::vector<Triplet> dense_row{{0, 0, 1}, {1, 1, 1}, {2, 2, 1}};
    dense_row.push_back({2, 0, 1});
    dense_row.push_back({2, 1, 1});
    CHECK(one_ring(RowMatrix::from_triplets(3, 3, dense_row), 2) == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("one ring sets contain the fine unknowns")
{
    const auto e = experiment(ExperimentSet::one, 5);
    const Hierarchy h = build_hierarchy(e.mesh, e.dofs, e.system, Basis::nodal);
    for (std::size_t j = 1; j < h.num_levels(); ++j) {
        const auto& oner = h.levels[j].oner;
        CHECK(std::is_sorted(oner.begin(), oner.end()));
        for (std::size_t i = h.levels[j].prolongation.n_coarse; i < h.size(j); ++i)
            CHECK(std::binary_search(oner.begin(), oner.end(), i));
        CHECK(oner.back() < h.size(j));
    }
}

TEST_CASE("block storage is linear in the refined unknowns")
{
    // Storage per level: nnz(A12) + nnz(A21) + nnz(A22) + n_j, summed.
    auto storage = [](const Hierarchy& h) {
        std::size_t total = 0;
        for (std::size_t j = 1; j < h.num_levels(); ++j) {
            const auto& b = h.levels[j].blocks;
            total += b.a12.nnz() + b.a21.nnz() + b.a22.size() + 2 * b.a22.nnz_offdiag() +
                     h.levels[j].prolongation.n_fine;
        }
        return total;
    };
    std::vector<double> per_dof[2];
    for (std::size_t levels : {10u, 12u, 14u}) {
        const auto e = experiment(ExperimentSet::two, levels);
        const double refined = double(e.dofs.num_dofs(levels - 1) - e.dofs.num_dofs(0));
        const std::size_t hb = storage(build_hierarchy(e.mesh, e.dofs, e.system, Basis::hb));
        const std::size_t wm = storage(build_hierarchy(e.mesh, e.dofs, e.system, Basis::wmhb));
        CHECK(hb <= 4 * e.system.stiffness.nnz());
        per_dof[0].push_back(double(hb) / refined);
        per_dof[1].push_back(double(wm) / refined);
        MESSAGE(levels << " levels: per refined DOF hb " << per_dof[0].back() << ", wmhb " << per_dof[1].back());
    }
    // The cost per refined unknown levels off.
    CHECK(per_dof[0].back() <= 1.05 * per_dof[0].front());
    CHECK(per_dof[1].back() <= 1.10 * per_dof[1][1]);
}

TEST_CASE("hierarchy CSV")
{
    const auto e = experiment(ExperimentSet::one, 3);
    const Hierarchy h = build_hierarchy(e.mesh, e.dofs, e.system, Basis::hb);
    std::ostringstream os;
    write_hierarchy_csv(os, h);
    const std::string s = os.str();
    CHECK(s.rfind("level,n_coarse,n_fine,nnz_A12,nnz_A21,nnz_A22,oner_size\n", 0) == 0);
    CHECK(std::count(s.begin(), s.end(), '\n') == 3);
}

TEST_CASE("setup flops are counted")
{
    const auto e = experiment(ExperimentSet::one, 4);
    const Hierarchy nodal = build_hierarchy(e.mesh, e.dofs, e.system, Basis::nodal);
    const Hierarchy hb = build_hierarchy(e.mesh, e.dofs, e.system, Basis::hb);
    const Hierarchy wmhb = build_hierarchy(e.mesh, e.dofs, e.system, Basis::wmhb);
    CHECK(nodal.setup_flops.total() > 0);
    CHECK(hb.setup_flops.total() > 0);
    CHECK(wmhb.setup_flops.total() > hb.setup_flops.total());
    const Hierarchy again = build_hierarchy(e.mesh, e.dofs, e.system, Basis::wmhb);
    CHECK(again.setup_flops.total() == wmhb.setup_flops.total());
}
