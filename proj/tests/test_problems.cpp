#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "acciht/problems.hpp"
#include "oracles.hpp"

using namespace acciht;

TEST(GenIid, NoiselessConstructionAndNormalizedTruth) {
  const auto inst = gen_iid_gaussian(50, 20, 4, 0.0, 1);
  const auto& ls = inst.objective;
  EXPECT_EQ(ls.design().rows(), 20);
  EXPECT_EQ(ls.design().cols(), 50);
  EXPECT_EQ((ls.observations() - ls.design() * *inst.truth).norm(), 0.0);
  EXPECT_NEAR(inst.truth->norm(), 1.0, 1e-15);
  EXPECT_EQ(inst.model.active_support(*inst.truth).size(), 4);
  EXPECT_EQ(inst.descriptor.generator, "iid");
}

TEST(GenIid, NoisyIdentityIsExact) {
  const auto inst = gen_iid_gaussian(30, 15, 3, 0.5, 2);
  const auto& ls = inst.objective;
  EXPECT_LT((ls.observations() - ls.design() * *inst.truth - *inst.noise).norm(), 1e-14 * ls.observations().norm());
  EXPECT_GT(inst.noise->norm(), 0.0);
}

TEST(GenIid, SeedDeterminism) {
  const auto a = gen_iid_gaussian(40, 10, 3, 0.1, 99);
  const auto b = gen_iid_gaussian(40, 10, 3, 0.1, 99);
  const auto c = gen_iid_gaussian(40, 10, 3, 0.1, 100);
  EXPECT_EQ(a.objective.design(), b.objective.design());
  EXPECT_EQ(a.objective.observations(), b.objective.observations());
  EXPECT_EQ(*a.truth, *b.truth);
  EXPECT_NE(a.objective.design(), c.objective.design());
}

TEST(GenIid, ValidatesParameters) {
  EXPECT_THROW(gen_iid_gaussian(10, 5, 11, 0.0, 1), ValidationError);
  EXPECT_THROW(gen_iid_gaussian(10, 0, 2, 0.0, 1), ValidationError);
  EXPECT_THROW(gen_iid_gaussian(10, 5, 2, -1.0, 1), ValidationError);
}

TEST(GenToy, ScaledEntries) {
  const auto inst = gen_toy(3);
  EXPECT_EQ(inst.objective.design().rows(), 6);
  EXPECT_EQ(inst.objective.design().cols(), 10);
  EXPECT_EQ(inst.model.budget(), 2);
  const auto base = gen_iid_gaussian(10, 6, 2, 0.0, 3);
  EXPECT_LT((inst.objective.design() - base.objective.design() / std::sqrt(6.0)).norm(), 1e-14);
}

TEST(GenAr1, DefaultShapesUnitColumnsAndExactSnr) {
  const auto [train, test] = gen_ar1(200, 800, 20, 0.4, 10.0, 5);
  EXPECT_EQ(train.objective.design().rows(), 400);
  EXPECT_EQ(test.objective.design().rows(), 400);
  EXPECT_EQ(train.objective.design().cols(), 200);
  Matrix full(800, 200);
  full << train.objective.design(), test.objective.design();
  for (Index j = 0; j < 200; ++j) EXPECT_NEAR(full.col(j).norm(), 1.0, 1e-12);
  Vector noise(800);
  noise << *train.noise, *test.noise;
  const double snr = (full * *train.truth).squaredNorm() / noise.squaredNorm();
  EXPECT_NEAR(snr, 10.0, 1e-9);
  EXPECT_LT((train.objective.observations() - train.objective.design() * *train.truth - *train.noise).norm(),
            1e-14 * train.objective.observations().norm());
  EXPECT_EQ(*train.truth, *test.truth);
  EXPECT_NEAR(train.truth->norm(), 1.0, 1e-15);
}

TEST(GenAr1, ZeroCorrelationGivesUncorrelatedColumns) {
  const auto [train, test] = gen_ar1(20, 4000, 3, 0.0, 10.0, 6);
  Matrix full(4000, 20);
  full << train.objective.design(), test.objective.design();
  const Matrix c = full.transpose() * full;
  double worst = 0.0;
  for (Index i = 0; i < 20; ++i)
    for (Index j = 0; j < 20; ++j)
      if (i != j) worst = std::max(worst, std::abs(c(i, j)));
  EXPECT_LT(worst, 0.08);
  const auto [tr4, te4] = gen_ar1(20, 4000, 3, 0.4, 10.0, 6);
  Matrix f4(4000, 20);
  f4 << tr4.objective.design(), te4.objective.design();
  EXPECT_NEAR(f4.col(3).dot(f4.col(4)), 0.4, 0.05);
}

TEST(GenAr1, ValidatesParameters) {
  EXPECT_THROW(gen_ar1(10, 20, 2, 1.0, 10.0, 1), ValidationError);
  EXPECT_THROW(gen_ar1(10, 20, 2, 0.4, 0.0, 1), ValidationError);
  EXPECT_THROW(gen_ar1(10, 20, 12, 0.4, 10.0, 1), ValidationError);
}

TEST(GenMatrixCompletion, RankMaskAndFullObservation) {
  const auto inst = gen_matrix_completion(50, 60, 3, 0.35, 7);
  EXPECT_EQ(inst.objective.observed_count(), static_cast<Index>(std::floor(0.35 * 3000)));
  const auto sv = oracle::singular_values(*inst.truth);
  // The oracle works on the Gram matrix, so trailing values sit near sqrt(eps) * sv[0].
  EXPECT_GT(sv[2], 1e-3 * sv[0]);
  EXPECT_LT(sv[3], 1e-6 * sv[0]);

  const auto full = gen_matrix_completion(6, 5, 2, 1.0, 8);
  std::mt19937_64 rng(1);
  const Matrix x = oracle::gaussian(6, 5, rng);
  EXPECT_NEAR(full.objective.value(x), 0.5 * (x - *full.truth).squaredNorm(), 1e-12);
  EXPECT_NO_THROW(gen_matrix_completion(100, 100, 60, 0.35, 1));
  EXPECT_THROW(gen_matrix_completion(5, 5, 6, 0.5, 1), ValidationError);
  EXPECT_THROW(gen_matrix_completion(5, 5, 2, 0.0, 1), ValidationError);
}

TEST(Metrics, PerfectAndZeroEstimates) {
  const auto inst = gen_iid_gaussian(40, 20, 4, 0.0, 9);
  const auto perfect = evaluate(*inst.truth, inst);
  EXPECT_EQ(*perfect.support_auc, 1.0);
  EXPECT_EQ(*perfect.relative_error, 0.0);
  EXPECT_TRUE(*perfect.exact_support_match);
  const auto zero = evaluate(Vector::Zero(40), inst);
  EXPECT_EQ(*zero.relative_error, 1.0);
  EXPECT_FALSE(*zero.exact_support_match);
}

TEST(Metrics, AucMatchesPairwiseOracle) {
  std::mt19937_64 rng(10);
  for (int rep = 0; rep < 10; ++rep) {
    const Vector scores = oracle::gaussian(200, rng).cwiseAbs();
    std::vector<bool> labels(200, false);
    std::vector<Index> idx(200);
    std::iota(idx.begin(), idx.end(), Index{0});
    std::shuffle(idx.begin(), idx.end(), rng);
    for (int i = 0; i < 20; ++i) labels[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])] = true;
    EXPECT_NEAR(*roc_auc(scores, labels), oracle::pairwise_auc(scores, labels), 1e-12);
  }
  Vector tied = Vector::Zero(6);
  tied(0) = 1.0;
  std::vector<bool> lab{true, true, false, false, false, false};
  EXPECT_NEAR(*roc_auc(tied, lab), oracle::pairwise_auc(tied, lab), 1e-15);
  EXPECT_FALSE(roc_auc(tied, std::vector<bool>(6, false)));
}

TEST(Metrics, RSquaredAndLikelihoodOnHeldOutSplit) {
  const auto [train, test] = gen_ar1(30, 200, 3, 0.4, 10.0, 11);
  const auto rep = evaluate(*train.truth, train, &test);
  ASSERT_TRUE(rep.r2_test);
  EXPECT_GT(*rep.r2_test, 0.5);
  EXPECT_LE(*rep.r2_test, 1.0);
  const double rss = train.objective.residual(*train.truth).squaredNorm();
  EXPECT_NEAR(*rep.train_loglik, -0.5 * rss - 50.0 * std::log(2.0 * std::numbers::pi), 1e-10);
}

TEST(Metrics, MatrixRelativeError) {
  const auto inst = gen_matrix_completion(8, 9, 2, 0.5, 12);
  EXPECT_EQ(*evaluate(*inst.truth, inst).relative_error, 0.0);
  EXPECT_EQ(*evaluate(Matrix::Zero(8, 9), inst).relative_error, 1.0);
}
