#include <gtest/gtest.h>

#include <random>

#include "ncs/delay_chain.hpp"
#include "ncs/errors.hpp"
#include "support/oracles.hpp"

namespace ncs {
namespace {

Eigen::MatrixXd mat(std::initializer_list<std::initializer_list<double>> rows) {
  Eigen::MatrixXd M(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) M(i, j++) = v;
    ++i;
  }
  return M;
}

TEST(DelayChainValidate, RejectsMassAboveOneStepGrowth) {
  const Eigen::MatrixXd step = mat({{0.5, 0.4, 0.1}, {0.3, 0.3, 0.4}, {0.2, 0.3, 0.5}});
  EXPECT_THROW(validate_chain(0, 2, step), SupportError);
}

TEST(DelayChainValidate, AcceptsSingleStateChain) { EXPECT_NO_THROW(validate_chain(0, 0, mat({{1.0}}))); }

TEST(DelayChainValidate, AcceptsFullSupportTwoStateChain) {
  EXPECT_NO_THROW(validate_chain(0, 1, mat({{0.6, 0.4}, {0.5, 0.5}})));
}

TEST(DelayChainValidate, RejectsZeroWhereGrowthOfOneIsAllowed) {
  EXPECT_THROW(validate_chain(0, 1, mat({{1.0, 0.0}, {0.5, 0.5}})), SupportError);
}

TEST(DelayChainValidate, RowSumIsNotRenormalized) {
  try {
    validate_chain(0, 1, mat({{0.5, 0.4}, {0.5, 0.5}}));
    FAIL() << "expected RowSumError";
  } catch (const RowSumError& e) {
    EXPECT_NE(std::string(e.what()).find("row 0"), std::string::npos);
  }
  EXPECT_THROW(validate_chain(0, 1, mat({{0.6 + 2e-12, 0.4}, {0.5, 0.5}})), RowSumError);
  EXPECT_NO_THROW(validate_chain(0, 1, mat({{0.6 + 1e-13, 0.4}, {0.5, 0.5}})));
}

TEST(DelayChainValidate, RejectsWrongShapeAndBounds) {
  EXPECT_THROW(validate_chain(0, 1, mat({{1.0}})), ShapeError);
  EXPECT_THROW(validate_chain(2, 1, mat({{1.0}})), ShapeError);
  EXPECT_THROW(validate_chain(-1, 0, mat({{0.5, 0.5}, {0.5, 0.5}})), ShapeError);
}

TEST(DelayChainValidate, AuditReportsEveryIssue) {
  const auto issues = audit_chain(0, 2, mat({{0.5, 0.4, 0.0}, {0.3, 0.3, 0.4}, {0.2, 0.3, 0.5}}));
  ASSERT_EQ(issues.size(), 1u);
  EXPECT_EQ(issues[0].kind, ChainIssueKind::RowSum);
  EXPECT_EQ(issues[0].row, 0);
}

TEST(DelayChainNStep, ZeroStepsIsIdentity) {
  const DelayChain c(0, 1, mat({{0.6, 0.4}, {0.5, 0.5}}));
  EXPECT_EQ(c.n_step(1, 1, 0), 1.0);
  EXPECT_EQ(c.n_step(0, 1, 0), 0.0);
}

TEST(DelayChainNStep, UniformRowsStayUniform) {
  const DelayChain c(0, 1, mat({{0.5, 0.5}, {0.5, 0.5}}));
  EXPECT_DOUBLE_EQ(c.n_step(0, 1, 2), 0.5);
}

TEST(DelayChainNStep, TwoStepHandSquare) {
  const DelayChain c(0, 1, mat({{0.6, 0.4}, {0.5, 0.5}}));
  EXPECT_NEAR(c.n_step(0, 0, 2), 0.6 * 0.6 + 0.4 * 0.5, 1e-15);
  EXPECT_NEAR(c.n_step(TransitionQuery{0, 0, 2}), 0.56, 1e-15);
}

TEST(DelayChainNStep, OutOfRangeValues) {
  const DelayChain c(1, 2, mat({{0.6, 0.4}, {0.5, 0.5}}));
  EXPECT_THROW(c.n_step(0, 1, 1), OutOfRange);
  EXPECT_THROW(c.n_step(1, 3, 1), OutOfRange);
}

TEST(DelayChainNStep, BeyondCacheHorizonMatchesPower) {
  const DelayChain c(0, 1, mat({{0.6, 0.4}, {0.5, 0.5}}), 2);
  Eigen::MatrixXd P = Eigen::MatrixXd::Identity(2, 2);
  for (int s = 0; s < 7; ++s) P *= c.step();
  EXPECT_NEAR(c.n_step(0, 1, 7), P(0, 1), 1e-15);
}

TEST(DelayChainProperties, RowSumsChapmanKolmogorovAndSupport) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int lo = static_cast<int>(unit_uniform(rng) * 3);
    const int hi = lo + static_cast<int>(unit_uniform(rng) * 4);
    const DelayChain c(lo, hi, testing::random_step(rng, lo, hi));
    for (int n = 0; n <= 8; ++n)
      for (int a = lo; a <= hi; ++a) {
        double sum = 0.0;
        for (int b = lo; b <= hi; ++b) {
          sum += c.n_step(a, b, n);
          if (b > a + n) EXPECT_EQ(c.n_step(a, b, n), 0.0);
        }
        EXPECT_NEAR(sum, 1.0, 1e-10);
      }
    for (int n = 0; n <= 4; ++n)
      for (int mm = 0; mm <= 4; ++mm)
        for (int a = lo; a <= hi; ++a)
          for (int cc = lo; cc <= hi; ++cc) {
            double via = 0.0;
            for (int b = lo; b <= hi; ++b) via += c.n_step(a, b, n) * c.n_step(b, cc, mm);
            EXPECT_NEAR(c.n_step(a, cc, n + mm), via, 1e-10);
          }
  }
}

TEST(DelayChainSample, DeterministicAndPointMass) {
  std::mt19937_64 rng(1);
  const DelayChain one(0, 0, mat({{1.0}}));
  EXPECT_EQ(one.sample_next(0, rng), 0);
  const DelayChain c(0, 1, mat({{0.6, 0.4}, {0.5, 0.5}}));
  EXPECT_THROW(c.sample_next(2, rng), OutOfRange);
}

TEST(DelayChainSample, EmpiricalFrequency) {
  const DelayChain c(0, 1, mat({{0.6, 0.4}, {0.5, 0.5}}));
  std::mt19937_64 rng(2024);
  int zeros = 0;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) zeros += c.sample_next(0, rng) == 0;
  EXPECT_NEAR(static_cast<double>(zeros) / draws, 0.6, 0.01);
}

TEST(DelayChainSample, BitReproducible) {
  const DelayChain c(0, 2, mat({{0.5, 0.5, 0.0}, {0.2, 0.3, 0.5}, {0.1, 0.1, 0.8}}));
  std::mt19937_64 a(99), b(99);
  int cur_a = 0, cur_b = 0;
  for (int i = 0; i < 1000; ++i) {
    cur_a = c.sample_next(cur_a, a);
    cur_b = c.sample_next(cur_b, b);
    ASSERT_EQ(cur_a, cur_b);
  }
}

}  // namespace
}  // namespace ncs
