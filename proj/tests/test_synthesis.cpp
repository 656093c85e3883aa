#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "ncs/errors.hpp"
#include "ncs/schedule_io.hpp"
#include "ncs/synthesis.hpp"
#include "support/oracles.hpp"

namespace ncs {
namespace {

using testing::random_matrix;
using testing::random_spec;
using testing::SpecShape;

DelayChain fixed_chain(int value) { return DelayChain(value, value, Eigen::MatrixXd::Ones(1, 1)); }

double rel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).norm() / std::max({a.norm(), b.norm(), 1e-300});
}

ProblemSpec scalar_spec(double a, double b, DelayChain r_chain, DelayChain d_chain, int N = 3) {
  return make_problem({Eigen::MatrixXd::Constant(1, 1, a), Eigen::MatrixXd::Constant(1, 1, b)},
                      {Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Ones(1, 1), 0, N},
                      std::move(r_chain), std::move(d_chain));
}

// Quadratic E1 + E2 + E3 as a function of the packet for a fixed extended state.
double step_cost(const ExpectationKernels& kern, const Eigen::VectorXd& x_hat, const Eigen::VectorXd& u) {
  return u.dot((kern.R_hat + kern.O_hat) * u) + 2.0 * u.dot(kern.M_hat * x_hat) +
         x_hat.dot((kern.Q_hat + kern.H_hat) * x_hat);
}

TEST(ElapsedPhi, StepCountIsTimeDifference) {
  const DelayChain c(0, 1, (Eigen::MatrixXd(2, 2) << 0.6, 0.4, 0.5, 0.5).finished());
  EXPECT_EQ(elapsed_phi(c, 1, 1, -3, -3), 1.0);
  EXPECT_EQ(elapsed_phi(c, 0, 1, -1 - 2, -1), c.n_step(0, 1, 2));
  EXPECT_EQ(elapsed_phi(c, 0, 0, -1 - 1, 0), c.n_step(0, 0, 2));
  EXPECT_THROW(elapsed_phi(c, 0, 0, 0, -1), TimeOrderError);
}

TEST(KernelBuilder, PacketWeightWithSingleDelayIsR) {
  std::mt19937_64 rng(1);
  SpecShape s{2, 2, 0, 1, 1, 1, 0, 3};
  const ProblemSpec spec = random_spec(rng, s);
  const KernelBuilder kb(spec);
  for (int r = 0; r <= 1; ++r) EXPECT_EQ(kb.r_hat(r, 1), spec.cost.R);
}

TEST(KernelBuilder, PacketWeightWithUniformChainIsHalf) {
  const ProblemSpec spec = make_problem(
      {Eigen::MatrixXd::Identity(1, 1), Eigen::MatrixXd::Ones(1, 1)},
      {Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Constant(1, 1, 3.0), 0, 2},
      DelayChain(0, 1, Eigen::MatrixXd::Constant(2, 2, 0.5)), DelayChain(0, 1, Eigen::MatrixXd::Constant(2, 2, 0.5)));
  const KernelBuilder kb(spec);
  for (int r = 0; r <= 1; ++r)
    for (int d = 0; d <= 1; ++d) EXPECT_EQ(kb.r_hat(r, d), 1.5 * Eigen::MatrixXd::Identity(2, 2));
}

TEST(KernelBuilder, FreshMeasurementStateWeightIsBlockDiagonal) {
  std::mt19937_64 rng(2);
  const ProblemSpec spec = random_spec(rng, {2, 1, 0, 2, 0, 2, 0, 4});
  const KernelBuilder kb(spec);
  const int n = 2, mh = spec.layout().m_hat;
  for (int d = 0; d <= 2; ++d) {
    const Eigen::MatrixXd Qh = kb.q_hat(spec.cost.Q, 0, d);
    EXPECT_EQ(Qh.topLeftCorner(n, n), spec.cost.Q);
    EXPECT_TRUE(Qh.bottomRows(mh).isZero());
    EXPECT_TRUE(Qh.rightCols(mh).isZero());
  }
}

TEST(KernelBuilder, PairWeightVanishesForConflictingDelays) {
  std::mt19937_64 rng(3);
  const ProblemSpec spec = random_spec(rng, {1, 1, 0, 2, 0, 2, 0, 4});
  const KernelBuilder kb(spec);
  for (int r = 1; r <= 2; ++r)
    for (int i = 1; i <= r; ++i)
      for (int a = 0; a <= 2; ++a)
        for (int b = 0; b <= 2; ++b)
          if (a != b) EXPECT_EQ(kb.pair_weight(r, 1, i, i, a, b), 0.0);
}

TEST(KernelBuilder, PairAndTripleWeightsAreDistributions) {
  std::mt19937_64 rng(4);
  const ProblemSpec spec = random_spec(rng, {1, 1, 0, 2, 0, 2, 0, 4});
  const KernelBuilder kb(spec);
  for (int r = 1; r <= 2; ++r)
    for (int dt = 0; dt <= 2; ++dt)
      for (int i = 1; i <= r; ++i)
        for (int j = 1; j <= r; ++j) {
          double pair = 0.0;
          for (int a = 0; a <= 2; ++a)
            for (int b = 0; b <= 2; ++b) pair += kb.pair_weight(r, dt, i, j, a, b);
          EXPECT_NEAR(pair, 1.0, 1e-12);
          for (int rho = 0; rho <= std::min(i, j); ++rho) {
            double triple = 0.0;
            for (int a = 0; a <= 2; ++a)
              for (int b = 0; b <= 2; ++b)
                for (int c = 0; c <= 2; ++c) triple += kb.triple_weight(r, dt, i, j, rho, a, b, c);
            EXPECT_NEAR(triple, 1.0, 1e-12);
          }
        }
}

TEST(KernelBuilder, ScalarNoDelayKernelsAreOneStepLqr) {
  const double a = 1.3, b = 0.7, kn = 2.5;
  const ProblemSpec spec = scalar_spec(a, b, fixed_chain(0), fixed_chain(0));
  const KernelBuilder kb(spec);
  ModeTable next(0, 0, 0, 0);
  next.set(0, 0, Eigen::MatrixXd::Constant(1, 1, kn));
  const E3Kernels e3 = kb.e3_kernels(next, 0, 0);
  EXPECT_NEAR(e3.O_hat(0, 0), b * b * kn, 1e-15);
  EXPECT_NEAR(e3.M_hat(0, 0), b * kn * a, 1e-15);
  EXPECT_NEAR(e3.H_hat(0, 0), a * a * kn, 1e-15);
}

TEST(KernelBuilder, IncompleteNextTableIsRejected) {
  std::mt19937_64 rng(5);
  const ProblemSpec spec = random_spec(rng, {1, 1, 0, 1, 0, 1, 0, 3});
  const KernelBuilder kb(spec);
  ModeTable next(0, 1, 0, 1);
  next.set(0, 0, Eigen::MatrixXd::Identity(spec.plant.n() + spec.layout().m_hat, spec.plant.n() + spec.layout().m_hat));
  EXPECT_THROW(kb.e3_kernels(next, 1, 1), IncompleteTable);
  EXPECT_THROW(next.at(1, 1), IncompleteTable);
}

// Sampling oracles: average the realized quadratic forms over delay windows
// drawn from the chains and compare with the closed forms.
struct Sampled {
  double mean = 0.0, stderr_ = 0.0;
};

template <typename F>
Sampled sample_mean(int draws, F&& f) {
  double s = 0.0, s2 = 0.0;
  for (int t = 0; t < draws; ++t) {
    const double v = f();
    s += v;
    s2 += v * v;
  }
  const double mean = s / draws;
  return {mean, std::sqrt(std::max(0.0, s2 / draws - mean * mean) / (draws - 1))};
}

TEST(KernelSampling, StateWeightMatchesSampledDelays) {
  std::mt19937_64 rng(6);
  const ProblemSpec spec = random_spec(rng, {2, 1, 0, 2, 0, 2, 0, 4});
  const KernelBuilder kb(spec);
  const ExtendedModel& model = kb.model();
  const Eigen::VectorXd x_hat = random_matrix(rng, model.state_dim(), 1);
  const ExtendedState s = ExtendedState::split(x_hat, 2);
  for (int r = 0; r <= 2; ++r)
    for (int dt = 0; dt <= 2; ++dt) {
      const double closed = x_hat.dot(kb.q_hat(spec.cost.Q, r, dt) * x_hat);
      const Sampled est = sample_mean(100000, [&] {
        DelayWindow w;
        int cur = dt;  // time -1-r
        for (int lag = r; lag >= 1; --lag) {
          cur = spec.d_chain.sample_next(cur, rng);
          w.set(lag, cur);
        }
        const Eigen::VectorXd x = model.reconstruct_state(s, r, w);
        return x.dot(spec.cost.Q * x);
      });
      EXPECT_LE(std::abs(est.mean - closed), 3.0 * est.stderr_ + 1e-12 * (1 + std::abs(closed)))
          << "r=" << r << " d=" << dt;
    }
}

TEST(KernelSampling, NextValueWeightMatchesSampledModes) {
  std::mt19937_64 rng(7);
  const ProblemSpec spec = random_spec(rng, {2, 1, 0, 2, 0, 1, 0, 4});
  const GainSchedule sched = synthesize(spec);
  const KernelBuilder kb(spec);
  const ExtendedModel& model = kb.model();
  const ModeTable& next = sched.values_at(1);
  const Eigen::VectorXd x_hat = random_matrix(rng, model.state_dim(), 1);
  for (int r = 0; r <= 2; ++r)
    for (int dt = 0; dt <= 1; ++dt) {
      const double closed = x_hat.dot(kb.e3_kernels(next, r, dt).H_hat * x_hat);
      const Sampled est = sample_mean(100000, [&] {
        const int rho = spec.r_chain.sample_next(r, rng);
        DelayWindow w;
        w.set(r + 1, dt);
        int cur = dt;
        for (int lag = r; lag >= 0; --lag) {
          cur = spec.d_chain.sample_next(cur, rng);
          w.set(lag, cur);
        }
        const ModeMatrices mm = model.mode_matrices(r, rho, w);
        const Eigen::VectorXd y = (mm.a_tilde + mm.a_bar) * x_hat;
        return y.dot(next.at(rho, w.at(rho)) * y);
      });
      EXPECT_LE(std::abs(est.mean - closed), 3.0 * est.stderr_ + 1e-12 * (1 + std::abs(closed)))
          << "r=" << r << " d=" << dt;
    }
}

TEST(Synthesis, TerminalValueIsTerminalStateWeight) {
  std::mt19937_64 rng(8);
  const ProblemSpec spec = random_spec(rng, {2, 1, 0, 1, 0, 1, 0, 3});
  const GainSchedule sched = synthesize(spec);
  const KernelBuilder kb(spec);
  for (int r = 0; r <= 1; ++r)
    for (int d = 0; d <= 1; ++d) EXPECT_EQ(sched.value(4, r, d), kb.q_hat(spec.cost.Q_bar, r, d));
  const Eigen::MatrixXd& K0 = sched.value(4, 0, 1);
  EXPECT_EQ(K0.topLeftCorner(2, 2), spec.cost.Q_bar);
  EXPECT_TRUE(K0.bottomRows(spec.layout().m_hat).isZero());
}

TEST(Synthesis, ZeroStateCostGivesZeroSchedule) {
  std::mt19937_64 rng(9);
  ProblemSpec spec = random_spec(rng, {2, 2, 0, 1, 0, 2, 0, 4});
  spec.cost.Q.setZero();
  spec.cost.Q_bar.setZero();
  const GainSchedule sched = synthesize(spec);
  for (int k = 0; k <= 5; ++k)
    for (int r = 0; r <= 1; ++r)
      for (int d = 0; d <= 2; ++d) {
        EXPECT_TRUE(sched.value(k, r, d).isZero());
        if (k <= 4) EXPECT_TRUE(sched.gain(k, r, d).isZero());
      }
}

class RiccatiReduction : public ::testing::TestWithParam<int> {};

TEST_P(RiccatiReduction, NoDelayMatchesClassicRecursion) {
  std::mt19937_64 rng(static_cast<std::uint64_t>(100 + GetParam()));
  const int n = 1 + GetParam() % 3, m = 1 + GetParam() % 2;
  const ProblemSpec spec = random_spec(rng, {n, m, 0, 0, 0, 0, -2, 8});
  const GainSchedule sched = synthesize(spec);
  const auto oracle = testing::classic_riccati(spec.plant.A, spec.plant.B, spec.cost.Q, spec.cost.R, spec.cost.Q_bar,
                                               -2, 8);
  for (int k = -2; k <= 8; ++k) {
    EXPECT_LE(rel(sched.value(k, 0, 0), oracle.P[static_cast<std::size_t>(k + 2)]), 1e-10);
    EXPECT_LE(rel(sched.gain(k, 0, 0), oracle.L[static_cast<std::size_t>(k + 2)]), 1e-10);
  }
}

TEST_P(RiccatiReduction, UnitDelaysMatchAugmentedPlant) {
  std::mt19937_64 rng(static_cast<std::uint64_t>(200 + GetParam()));
  const int n = 1 + GetParam() % 3, m = 1 + GetParam() % 2;
  const ProblemSpec spec = random_spec(rng, {n, m, 1, 1, 1, 1, 0, 10});
  const GainSchedule sched = synthesize(spec);
  const auto aug = testing::unit_delay_augmentation(spec);
  const auto oracle = testing::classic_riccati(aug.F, aug.G, aug.Q, spec.cost.R, aug.Q_T, 0, 10);
  for (int k = 0; k <= 10; ++k) {
    EXPECT_LE(rel(sched.value(k, 1, 1), oracle.P[static_cast<std::size_t>(k)]), 1e-9);
    EXPECT_LE(rel(sched.gain(k, 1, 1), oracle.L[static_cast<std::size_t>(k)]), 1e-9);
  }
}

INSTANTIATE_TEST_SUITE_P(Specs, RiccatiReduction, ::testing::Range(0, 6));

class ScheduleProperties : public ::testing::TestWithParam<int> {};

TEST_P(ScheduleProperties, ValuesPsdAndStepOptimal) {
  std::mt19937_64 rng(static_cast<std::uint64_t>(300 + GetParam()));
  SpecShape s{2, 1 + GetParam() % 2, 0, 1 + GetParam() % 2, GetParam() % 2, 2, 0, 6};
  const ProblemSpec spec = random_spec(rng, s);
  const GainSchedule sched = synthesize(spec);
  const KernelBuilder kb(spec);
  const int dim = spec.plant.n() + spec.layout().m_hat;
  for (int k = 0; k <= 6; ++k)
    for (int r = s.r_lo; r <= s.r_hi; ++r)
      for (int d = s.d_lo; d <= s.d_hi; ++d) {
        const Eigen::MatrixXd& K = sched.value(k, r, d);
        EXPECT_EQ(K, K.transpose());
        EXPECT_GE(min_symmetric_eigenvalue(K), -1e-8);
        if (k == 6) continue;
        const ExpectationKernels kern = kb.kernels(sched.values_at(k + 1), spec.cost.Q, r, d);
        EXPECT_GT(min_symmetric_eigenvalue(kern.O_hat + kern.R_hat), 0.0);
        EXPECT_GE(min_symmetric_eigenvalue(kern.H_hat), -1e-8);
        const Eigen::VectorXd x = random_matrix(rng, dim, 1);
        const Eigen::VectorXd u = -sched.gain(k, r, d) * x;
        const double v = x.dot(K * x);
        EXPECT_LE(std::abs(step_cost(kern, x, u) - v), 1e-9 * std::max(1.0, std::abs(v)));
        // Central differences; the constant term is dropped to limit rounding.
        const double h = 1e-6;
        Eigen::VectorXd grad(u.size());
        for (Eigen::Index j = 0; j < u.size(); ++j) {
          Eigen::VectorXd up = u, dn = u;
          up(j) += h;
          dn(j) -= h;
          auto f = [&](const Eigen::VectorXd& w) { return w.dot((kern.R_hat + kern.O_hat) * w) + 2.0 * w.dot(kern.M_hat * x); };
          grad(j) = (f(up) - f(dn)) / (2 * h);
        }
        EXPECT_LE(grad.norm(), 1e-8 * (1 + x.norm()));
        const Eigen::VectorXd exact = 2.0 * ((kern.R_hat + kern.O_hat) * u + kern.M_hat * x);
        EXPECT_LE(exact.norm(), 1e-10 * (1 + x.norm()));
      }
}

TEST_P(ScheduleProperties, TailComponentsHaveZeroGain) {
  std::mt19937_64 rng(static_cast<std::uint64_t>(400 + GetParam()));
  SpecShape s{2, 2, 0, 1, 0, 3, 0, 5};
  const ProblemSpec spec = random_spec(rng, s);
  const GainSchedule sched = synthesize(spec);
  const PacketLayout L = spec.layout();
  for (int k = 0; k <= 5; ++k)
    for (int p : tail_components(L, k, 5))
      for (int r = 0; r <= 1; ++r)
        for (int d = 0; d <= 3; ++d)
          EXPECT_LE(sched.gain(k, r, d).middleRows(L.component_offset(p), L.m).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_EQ(tail_components(L, 3, 5), (std::vector<int>{3}));
  EXPECT_TRUE(tail_components(L, 1, 5).empty());
}

INSTANTIATE_TEST_SUITE_P(Specs, ScheduleProperties, ::testing::Range(0, 6));

TEST(Synthesis, ConditionNumbersAreRecorded) {
  std::mt19937_64 rng(10);
  const ProblemSpec spec = random_spec(rng, {2, 1, 0, 1, 0, 1, 0, 3});
  const GainSchedule sched = synthesize(spec);
  for (int k = 0; k <= 3; ++k) {
    EXPECT_GE(sched.max_condition(k), 1.0);
    EXPECT_LE(sched.max_condition(k), kMaxGainCondition);
  }
}

TEST(Synthesis, ScheduleLookupsOutsideTableThrow) {
  std::mt19937_64 rng(11);
  const ProblemSpec spec = random_spec(rng, {1, 1, 0, 1, 0, 1, 0, 3});
  const GainSchedule sched = synthesize(spec);
  EXPECT_THROW(sched.gain(4, 0, 0), ScheduleGap);
  EXPECT_THROW(sched.value(5, 0, 0), ScheduleGap);
  EXPECT_THROW(sched.gain(0, 2, 0), ScheduleGap);
  EXPECT_THROW(sched.value(-1, 0, 0), ScheduleGap);
}

TEST(ScheduleIo, RoundTripIsExact) {
  std::mt19937_64 rng(12);
  const ProblemSpec spec = random_spec(rng, {2, 2, 0, 2, 1, 2, -1, 4});
  const GainSchedule sched = synthesize(spec);
  const std::string text = schedule_to_string(sched);
  const GainSchedule back = schedule_from_string(text);
  EXPECT_TRUE(back == sched);
  EXPECT_EQ(schedule_to_string(back), text);
  EXPECT_NO_THROW(check_schedule_matches(back, spec));
  EXPECT_EQ(text.rfind("ncs-gain-schedule 1\n", 0), 0u);
}

TEST(ScheduleIo, MalformedInputIsFormatError) {
  std::mt19937_64 rng(13);
  const ProblemSpec spec = random_spec(rng, {1, 1, 0, 1, 0, 1, 0, 2});
  const std::string text = schedule_to_string(synthesize(spec));
  EXPECT_THROW(schedule_from_string(""), FormatError);
  EXPECT_THROW(schedule_from_string("ncs-gain-schedule 9\n"), FormatError);
  EXPECT_THROW(schedule_from_string(text.substr(0, text.size() / 2)), FormatError);
  std::string corrupted = text;
  const auto pos = corrupted.rfind("end");
  corrupted.replace(pos, 3, "xyz");
  EXPECT_THROW(schedule_from_string(corrupted), FormatError);
  EXPECT_THROW(load_schedule("/nonexistent/dir/schedule.txt"), IoError);
}

TEST(ScheduleIo, HashMismatchAcrossSpecs) {
  std::mt19937_64 rng(14);
  const ProblemSpec a = random_spec(rng, {1, 1, 0, 1, 0, 1, 0, 2});
  ProblemSpec b = a;
  b.cost.Q(0, 0) += 1.0;
  EXPECT_NE(spec_hash(a), spec_hash(b));
  EXPECT_THROW(check_schedule_matches(synthesize(a), b), HashMismatch);
}

}  // namespace
}  // namespace ncs
