#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "acciht/models.hpp"
#include "oracles.hpp"

using namespace acciht;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

std::vector<std::vector<Index>> random_partition(Index n, Index groups, std::mt19937_64& rng) {
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::vector<Index>> out(static_cast<std::size_t>(groups));
  for (Index g = 0; g < groups; ++g) out[static_cast<std::size_t>(g)].push_back(perm[static_cast<std::size_t>(g)]);
  std::uniform_int_distribution<Index> pick(0, groups - 1);
  for (Index i = groups; i < n; ++i) out[static_cast<std::size_t>(pick(rng))].push_back(perm[static_cast<std::size_t>(i)]);
  return out;
}

} // namespace

TEST(SparseModel, ProjectKeepsLargestMagnitude) {
  const SparseModel m(3, 1);
  EXPECT_EQ(m.project(vec({3, -5, 1})), vec({0, -5, 0}));
}

TEST(SparseModel, SupportOfFeasibleAndZeroSignals) {
  EXPECT_EQ(SparseModel(3, 1).support_of(vec({0, 7, 0})).ids, (std::vector<Index>{1}));
  EXPECT_EQ(SparseModel(3, 2).support_of(Vector::Zero(3)).ids, (std::vector<Index>{0, 1}));
  EXPECT_EQ(SparseModel(3, 2).project(Vector::Zero(3)), Vector::Zero(3));
}

TEST(SparseModel, TiesBreakTowardLowestIndex) {
  EXPECT_EQ(SparseModel(4, 2).support_of(vec({1, -2, 2, 2})).ids, (std::vector<Index>{1, 2}));
}

TEST(SparseModel, RestrictAndUnion) {
  const SparseModel m(3, 2);
  EXPECT_EQ(m.restrict(vec({4, 5, 6}), CoordinateSupport({0, 2})), vec({4, 0, 6}));
  const Vector x = vec({1, 2, 3});
  EXPECT_EQ(m.restrict(x, m.full_support()), x);
  EXPECT_EQ(m.unite(CoordinateSupport({0, 1}), CoordinateSupport({1, 2})), CoordinateSupport({0, 1, 2}));
  EXPECT_EQ(m.unite(CoordinateSupport({2}), CoordinateSupport{}), CoordinateSupport({2}));
  EXPECT_THROW(m.restrict(x, CoordinateSupport({3})), ValidationError);
}

TEST(SparseModel, ValidatesShapeAndBudget) {
  EXPECT_THROW(SparseModel(3, 0), ValidationError);
  EXPECT_THROW(SparseModel(3, 4), ValidationError);
  EXPECT_THROW(SparseModel(3, 1).project(Vector::Zero(4)), ValidationError);
}

TEST(SparseModel, ProjectionMatchesBruteForce) {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<Index> nd(4, 12), kd(1, 3);
  for (int rep = 0; rep < 100; ++rep) {
    const Index n = nd(rng), k = kd(rng);
    const SparseModel m(n, k);
    const Vector x = oracle::gaussian(n, rng);
    const Vector p = m.project(x);
    EXPECT_LE(m.cardinality(p), k);
    EXPECT_NEAR((x - p).norm(), oracle::best_sparse_distance(x, k), 1e-12);
    EXPECT_EQ(m.project(p), p);
  }
}

TEST(BlockModel, ProjectKeepsHighestEnergyGroup) {
  const BlockModel m({{0, 1}, {2, 3}}, 1);
  EXPECT_EQ(m.project(vec({1, 1, 3, 0})), vec({0, 0, 3, 0}));
  EXPECT_EQ(m.support_of(vec({1, 1, 3, 0})).ids, (std::vector<Index>{1}));
}

TEST(BlockModel, ValidatesPartition) {
  EXPECT_THROW(BlockModel({{0, 1}, {1, 2}}, 1), ValidationError);
  EXPECT_THROW(BlockModel({{0, 1}, {3}}, 1), ValidationError);
  EXPECT_THROW(BlockModel({{0}, {}}, 1), ValidationError);
  EXPECT_THROW(BlockModel({{0}, {1}}, 3), ValidationError);
}

TEST(BlockModel, ProjectionMatchesBruteForce) {
  std::mt19937_64 rng(22);
  std::uniform_int_distribution<Index> nd(4, 12);
  for (int rep = 0; rep < 100; ++rep) {
    const Index n = nd(rng);
    std::uniform_int_distribution<Index> gd(2, std::min<Index>(n, 6));
    const Index groups = gd(rng);
    std::uniform_int_distribution<Index> kd(1, std::min<Index>(groups, 3));
    const Index k = kd(rng);
    const auto part = random_partition(n, groups, rng);
    const BlockModel m(part, k);
    const Vector x = oracle::gaussian(n, rng);
    const Vector p = m.project(x);
    EXPECT_LE(m.cardinality(p), k);
    EXPECT_NEAR((x - p).norm(), oracle::best_block_distance(x, part, k), 1e-12);
    EXPECT_EQ(m.project(p), p);
    const auto s = m.support_of(x);
    EXPECT_EQ(m.restrict(m.restrict(x, s), s), m.restrict(x, s));
  }
}

TEST(BlockModel, CoordinatesListGroupMembers) {
  const BlockModel m({{3, 0}, {1}, {2, 4}}, 2);
  EXPECT_EQ(m.coordinates(GroupSupport({0, 2})), (std::vector<Index>{0, 2, 3, 4}));
}

TEST(LowRankModel, RankOneIsFixedPoint) {
  std::mt19937_64 rng(23);
  const Matrix x = oracle::gaussian(5, 1, rng) * oracle::gaussian(1, 4, rng);
  const LowRankModel m(5, 4, 1);
  EXPECT_LT((m.project(x) - x).norm(), 1e-12 * x.norm());
}

TEST(LowRankModel, ProjectionIsIdempotentAndFeasible) {
  std::mt19937_64 rng(24);
  const LowRankModel m(6, 5, 2);
  const Matrix x = oracle::gaussian(6, 5, rng);
  const Matrix p = m.project(x);
  EXPECT_EQ(m.cardinality(p), 2);
  EXPECT_LT((m.project(p) - p).norm(), 1e-10 * p.norm());
}

TEST(LowRankModel, RestrictToTopSingularPair) {
  std::mt19937_64 rng(25);
  const LowRankModel m(6, 5, 1);
  const Matrix x = oracle::gaussian(6, 5, rng);
  const Matrix rank1 = truncated_svd(x, 1).reconstruct();
  EXPECT_LT((m.restrict(x, m.support_of(x)) - rank1).norm(), 1e-10);
  EXPECT_LT((m.restrict(x, m.full_support()) - x).norm(), 1e-12);
  EXPECT_EQ(m.restrict(x, m.empty_support()), Matrix::Zero(6, 5));
}

TEST(LowRankModel, UnionOfOrthogonalSubspaces) {
  const LowRankModel m(4, 3, 1);
  SubspaceSupport a{Matrix::Identity(4, 4).col(0), Matrix::Identity(3, 3).col(0)};
  SubspaceSupport b{Matrix::Identity(4, 4).col(2), Matrix::Identity(3, 3).col(1)};
  const auto u = m.unite(a, b);
  EXPECT_EQ(u.size(), 2);
  EXPECT_LT((u.left.transpose() * u.left - Matrix::Identity(2, 2)).norm(), 1e-8);
  EXPECT_LT((u.right.transpose() * u.right - Matrix::Identity(2, 2)).norm(), 1e-8);
  const auto same = m.unite(a, m.empty_support());
  EXPECT_EQ(same.size(), 1);
  const auto dup = m.unite(a, a);
  EXPECT_EQ(dup.size(), 1);
}

TEST(LowRankModel, ZeroMatrixProjectsToZero) {
  const LowRankModel m(3, 3, 2);
  EXPECT_EQ(m.project(Matrix::Zero(3, 3)), Matrix::Zero(3, 3));
  EXPECT_EQ(m.cardinality(Matrix::Zero(3, 3)), 0);
}

TEST(StructureVariant, DispatchesAndRejectsMismatch) {
  StructureModel sm = SparseModel(3, 1);
  const Signal x = vec({3, -5, 1});
  EXPECT_EQ(std::get<Vector>(project(x, sm)), vec({0, -5, 0}));
  EXPECT_EQ(budget_of(sm), 1);
  EXPECT_THROW(project(Signal(Matrix(Matrix::Zero(3, 3))), sm), ValidationError);
  EXPECT_THROW(restrict(x, Support(GroupSupport({0})), sm), ValidationError);
  const auto s = std::get<CoordinateSupport>(support_of(x, sm));
  EXPECT_EQ(s.ids, (std::vector<Index>{1}));
  const auto u = std::get<CoordinateSupport>(unite(Support(s), Support(CoordinateSupport({0})), sm));
  EXPECT_EQ(u.ids, (std::vector<Index>{0, 1}));
}

TEST(RestrictProperty, LinearAndIdempotent) {
  std::mt19937_64 rng(26);
  const SparseModel m(8, 3);
  for (int rep = 0; rep < 20; ++rep) {
    const Vector x = oracle::gaussian(8, rng), y = oracle::gaussian(8, rng);
    const auto s = m.support_of(oracle::gaussian(8, rng));
    EXPECT_LT((m.restrict(2.0 * x + y, s) - 2.0 * m.restrict(x, s) - m.restrict(y, s)).norm(), 1e-14);
    EXPECT_EQ(m.restrict(m.restrict(x, s), s), m.restrict(x, s));
  }
}
