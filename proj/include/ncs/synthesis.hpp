#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "ncs/delay_chain.hpp"
#include "ncs/extended_dynamics.hpp"
#include "ncs/problem.hpp"

namespace ncs {

/// Condition number above which O_hat + R_hat is rejected as singular.
inline constexpr double kMaxGainCondition = 1e12;

/// One matrix per mode pair (r, d~), dense over r_lo..r_hi x d_lo..d_hi.
class ModeTable {
 public:
  ModeTable() = default;
  ModeTable(int r_lo, int r_hi, int d_lo, int d_hi);

  int r_lo() const { return r_lo_; }
  int r_hi() const { return r_hi_; }
  int d_lo() const { return d_lo_; }
  int d_hi() const { return d_hi_; }

  bool contains(int r, int d) const { return r >= r_lo_ && r <= r_hi_ && d >= d_lo_ && d <= d_hi_; }
  bool filled(int r, int d) const;
  bool complete() const;

  /// Throws IncompleteTable for an empty or out-of-range cell.
  const Eigen::MatrixXd& at(int r, int d) const;
  void set(int r, int d, Eigen::MatrixXd value);

 private:
  std::size_t index(int r, int d) const {
    return static_cast<std::size_t>(r - r_lo_) * static_cast<std::size_t>(d_hi_ - d_lo_ + 1) +
           static_cast<std::size_t>(d - d_lo_);
  }

  int r_lo_ = 0, r_hi_ = -1, d_lo_ = 0, d_hi_ = -1;
  std::vector<Eigen::MatrixXd> cells_;
};

/// Value matrices K_k for k = k0..N+1 and gains L_k for k = k0..N, each
/// over every mode pair. The optimal packet is u~_k = -L_k(r_k, d~_k) x_hat_k
/// and the optimal expected cost-to-go is x_hat_k' K_k(r_k, d~_k) x_hat_k.
class GainSchedule {
 public:
  GainSchedule() = default;
  GainSchedule(int k0, int N, const PacketLayout& layout, int n, std::uint64_t spec_hash);

  int k0() const { return k0_; }
  int N() const { return N_; }
  int n() const { return n_; }
  int m() const { return m_; }
  int m_tilde() const { return m_tilde_; }
  int m_hat() const { return m_hat_; }
  int r_lo() const { return r_lo_; }
  int r_hi() const { return r_hi_; }
  int d_lo() const { return d_lo_; }
  int d_hi() const { return d_hi_; }
  std::uint64_t spec_hash() const { return spec_hash_; }

  /// Throw ScheduleGap when (k, r, d) lies outside the table or is unset.
  const Eigen::MatrixXd& value(int k, int r, int d) const;
  const Eigen::MatrixXd& gain(int k, int r, int d) const;

  const ModeTable& values_at(int k) const;
  ModeTable& values_at(int k);
  ModeTable& gains_at(int k);

  /// Largest condition number of O_hat + R_hat over the modes of step k.
  double max_condition(int k) const;
  void set_max_condition(int k, double cond);

  bool operator==(const GainSchedule& other) const;

 private:
  int k0_ = 0, N_ = -1, n_ = 0, m_ = 0, m_tilde_ = 0, m_hat_ = 0;
  int r_lo_ = 0, r_hi_ = 0, d_lo_ = 0, d_hi_ = 0;
  std::uint64_t spec_hash_ = 0;
  std::vector<ModeTable> values_;  // k0..N+1
  std::vector<ModeTable> gains_;   // k0..N
  std::vector<double> max_condition_;
};

/// Phi lookup with explicit absolute time stamps: the probability that the
/// actuator delay equals to_d at t_to given it equalled from_d at t_from.
double elapsed_phi(const DelayChain& d_chain, int from_d, int to_d, int t_from, int t_to);

struct E3Kernels {
  Eigen::MatrixXd O_hat;  // m~ x m~
  Eigen::MatrixXd M_hat;  // m~ x (n + m^)
  Eigen::MatrixXd H_hat;  // (n + m^) x (n + m^)
};

struct ExpectationKernels {
  Eigen::MatrixXd R_hat;
  Eigen::MatrixXd Q_hat;
  Eigen::MatrixXd O_hat;
  Eigen::MatrixXd M_hat;
  Eigen::MatrixXd H_hat;
};

/// Conditional expectations of one backward step, given the controller's
/// mode (r, d~). All times are relative to the current step k = 0, so the
/// newest known actuator delay d~ sits at time -1-r.
///
///   E{u~' R~ u~}       = u~' R_hat u~
///   E{x_k' W x_k}      = x_hat' Q_hat x_hat
///   E{v_{k+1}}         = x_hat' H_hat x_hat + 2 u~' M_hat x_hat + u~' O_hat u~
class KernelBuilder {
 public:
  explicit KernelBuilder(const ProblemSpec& spec);

  const ExtendedModel& model() const { return model_; }
  const DelayChain& r_chain() const { return r_chain_; }
  const DelayChain& d_chain() const { return d_chain_; }

  Eigen::MatrixXd r_hat(int r, int d_tilde) const;
  Eigen::MatrixXd q_hat(const Eigen::MatrixXd& weight, int r, int d_tilde) const;
  /// Reads k_next only at (rho, delta) cells reached with positive probability.
  E3Kernels e3_kernels(const ModeTable& k_next, int r, int d_tilde) const;
  ExpectationKernels kernels(const ModeTable& k_next, const Eigen::MatrixXd& weight, int r, int d_tilde) const;

  /// Joint weight of d_{-i} = delta1, d_{-j} = delta2 given d~ at -1-r.
  double pair_weight(int r, int d_tilde, int i, int j, int delta1, int delta2) const;
  /// Joint weight of d_{-i} = delta1, d_{-j} = delta2, d_{-rho} = delta3.
  double triple_weight(int r, int d_tilde, int i, int j, int rho, int delta1, int delta2, int delta3) const;

 private:
  double phi(int from_d, int to_d, int t_from, int t_to) const {
    return elapsed_phi(d_chain_, from_d, to_d, t_from, t_to);
  }

  ExtendedModel model_;
  DelayChain r_chain_;
  DelayChain d_chain_;
  Eigen::MatrixXd r_weight_;
};

/// Backward recursion over k = N..k0 for every mode pair. Throws SolveError
/// when O_hat + R_hat is not numerically positive definite.
GainSchedule synthesize(const ProblemSpec& spec);

/// Delays p for which the packet component u~_k^(p) could only be applied
/// after N (k + p > N).
std::vector<int> tail_components(const PacketLayout& layout, int k, int N);

}  // namespace ncs
