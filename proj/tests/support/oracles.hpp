#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "ncs/problem.hpp"
#include "ncs/simulation.hpp"

namespace ncs::testing {

/// Finite-horizon LQR for z_{k+1} = F z + G u with stage cost z'Qz + u'Ru
/// and terminal z'Q_T z, written without any of the library's kernels.
struct RiccatiResult {
  std::vector<Eigen::MatrixXd> P;  // P[k - k0], k = k0..N+1
  std::vector<Eigen::MatrixXd> L;  // L[k - k0], k = k0..N; u = -L z
};

RiccatiResult classic_riccati(const Eigen::MatrixXd& F, const Eigen::MatrixXd& G, const Eigen::MatrixXd& Q,
                              const Eigen::MatrixXd& R, const Eigen::MatrixXd& Q_T, int k0, int N);

/// Plant with every input delayed by exactly one step and every measurement
/// one step old: z_k = [x_{k-1}; u~_{k-1}; u~_{k-2}].
struct AugmentedPlant {
  Eigen::MatrixXd F, G, Q, Q_T;
};
AugmentedPlant unit_delay_augmentation(const ProblemSpec& spec);

/// Random chain on lo..hi obeying the support rule, row weights drawn in [0.1, 1].
Eigen::MatrixXd random_step(std::mt19937_64& rng, int lo, int hi);

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, int rows, int cols, double scale = 1.0);
Eigen::MatrixXd random_psd(std::mt19937_64& rng, int n, double floor = 0.0);

struct SpecShape {
  int n = 2, m = 1;
  int r_lo = 0, r_hi = 1, d_lo = 0, d_hi = 1;
  int k0 = 0, N = 3;
};
ProblemSpec random_spec(std::mt19937_64& rng, const SpecShape& shape);
ProblemSpec random_tiny_spec(std::mt19937_64& rng);
/// Random x0, r0, d_init and non-zero pre-history for spec.
InitialCondition random_init(std::mt19937_64& rng, const ProblemSpec& spec, bool zero_history = false);

/// Emits independent random packets, ignoring the information it receives.
class RandomPolicy : public PacketPolicy {
 public:
  RandomPolicy(int width, std::uint64_t seed) : width_(width), rng_(seed) {}
  Eigen::VectorXd act(const ControllerInput&) override;

 private:
  int width_;
  std::mt19937_64 rng_;
};

/// Symbolic packet entries: entry i of the packet sent at time j is
/// encoded as 1000*j + i + 0.5 (j may be negative), so any mis-addressed
/// read produces a distinguishable number.
double packet_tag(int j, int i);
Eigen::VectorXd tagged_packet(int j, int width);

}  // namespace ncs::testing
