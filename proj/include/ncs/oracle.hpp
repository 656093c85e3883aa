#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ncs/problem.hpp"
#include "ncs/simulation.hpp"
#include "ncs/synthesis.hpp"

namespace ncs {

/// Size limits under which every joint delay sequence can be enumerated.
struct TinyBounds {
  int max_n = 2;
  int max_m = 1;
  int max_r_hi = 1;
  int max_d_hi = 1;
  int max_steps = 3;  // N - k0
};

inline constexpr double kMaxEnumeratedPaths = 1e6;

/// Empty when spec fits the bounds, otherwise one message per violation.
std::vector<std::string> tiny_violations(const ProblemSpec& spec, const TinyBounds& bounds = {});

/// Number of joint (r, d) sequences with positive probability.
double count_realizations(const ProblemSpec& spec, const InitialCondition& init);

struct WeightedRealization {
  DelayRealization path;
  double probability = 0.0;
};

/// Every positive-probability realization rooted at the initial condition.
/// Throws Blowup outside TinyBounds or above kMaxEnumeratedPaths.
std::vector<WeightedRealization> enumerate_realizations(const ProblemSpec& spec, const InitialCondition& init);

/// Exact E{J} under the synthesized closed loop.
double enumerate_expected_cost(const ProblemSpec& spec, const GainSchedule& schedule, const InitialCondition& init);

/// E{J} = z' H z + 2 h' z + c over the stacked packets z = (u~_{k0}, ..., u~_N)
/// chosen without feedback.
struct OpenLoopQuadratic {
  Eigen::MatrixXd H;
  Eigen::VectorXd h;
  double c = 0.0;

  double eval(const Eigen::VectorXd& z) const { return z.dot(H * z) + 2.0 * h.dot(z) + c; }
};

OpenLoopQuadratic open_loop_quadratic(const ProblemSpec& spec, const InitialCondition& init);

struct OpenLoopResult {
  double value = 0.0;
  Eigen::VectorXd z;  // least-norm minimizer
};

OpenLoopResult joint_open_loop_min(const ProblemSpec& spec, const InitialCondition& init);

struct CostDecomposition {
  double state_cost = 0.0;  // sum of x'Qx plus the terminal term
  double U1 = 0.0;          // component p of packets sent at k0..N, charged iff d_{j+p} = p
  double U2 = 0.0;          // same charge for packets sent at k0-p..k0-1
  double U3 = 0.0;          // same charge for packets sent at N+1-p..N
  double J = 0.0;
  double J_tilde = 0.0;
  /// |J~ - (J + U2 - U3)| relative to max(|J~|, 1).
  double gap = 0.0;
};

/// Recomputes the U terms from the trace's packet log and delay path.
/// Throws LogGap when a required packet is missing.
CostDecomposition check_cost_identity(const ProblemSpec& spec, const SimTrace& trace);

/// One step's three expectations, closed form against enumeration.
struct KernelComparison {
  int k = 0, r = 0, d_tilde = 0;
  double e1_closed = 0.0, e1_enum = 0.0;
  double e2_closed = 0.0, e2_enum = 0.0;
  double e3_closed = 0.0, e3_enum = 0.0;
  double max_relative_gap = 0.0;
};

/// Enumerates sensor age rho = r_{k+1} and the actuator delays from the
/// controller's conditioning time to k + d_hi, propagates the plant from
/// x~ with packets unstacked from u_hat, and compares with the kernels.
KernelComparison check_kernel_expectations(const ProblemSpec& spec, const ModeTable& k_next, int k, int r,
                                           int d_tilde, const Eigen::VectorXd& x_hat, const Eigen::VectorXd& u_tilde);

double relative_gap(double a, double b);

enum class VerifyLevel { Quick, Exhaustive };

struct VerifyLine {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct VerifyReport {
  std::vector<VerifyLine> lines;
  bool all_passed() const;
};

/// Runs the property suite. Exhaustive checks throw Blowup on instances
/// that exceed TinyBounds.
VerifyReport verify(const ProblemSpec& spec, const InitialCondition& init, const RunSettings& run, VerifyLevel level);

void write_report(std::ostream& out, const VerifyReport& report);

}  // namespace ncs
