#pragma once

#include <vector>

#include <Eigen/Dense>

#include "ncs/packet_layout.hpp"
#include "ncs/problem.hpp"

namespace ncs {

/// Controller-side state: the newest delivered plant state stacked on top of
/// the packet history, [x_{k-r_k}; u_hat_k].
struct ExtendedState {
  Eigen::VectorXd x_tilde;
  Eigen::VectorXd u_hat;

  Eigen::VectorXd stacked() const;
  static ExtendedState split(const Eigen::VectorXd& stacked, int n);
};

/// Realized actuator delays d_{k-lag}, addressed by lag.
class DelayWindow {
 public:
  DelayWindow() = default;

  void set(int lag, int d);
  bool has(int lag) const;
  /// Throws WindowError when the lag has not been supplied.
  int at(int lag) const;

 private:
  std::vector<int> by_lag_;
};

struct ModeMatrices {
  Eigen::MatrixXd a_tilde;  // A-tilde(r, r_next)
  Eigen::MatrixXd a_bar;    // sum of A-bar_i over i = r_next..r for the window
  Eigen::MatrixXd b_tilde;  // B-tilde(r_next, d_k)
};

/// Mode-dependent extended-state model: x_hat_{k+1} =
///   A~(r, r') x_hat + sum_{i=r'}^{r} A-bar_i(r', d_{k-i}) x_hat + B~(r', d_k) u~_k.
class ExtendedModel {
 public:
  ExtendedModel(PlantModel plant, PacketLayout layout);

  const PlantModel& plant() const { return plant_; }
  const PacketLayout& layout() const { return layout_; }
  const SelectorSet& selectors() const { return selectors_; }
  int n() const { return plant_.n(); }
  int state_dim() const { return plant_.n() + layout_.m_hat; }

  /// A^i for 0 <= i <= r_hi + 1.
  const Eigen::MatrixXd& a_power(int i) const;

  Eigen::MatrixXd a_tilde(int r, int r_next) const;
  Eigen::MatrixXd a_bar(int i, int r_next, int d) const;
  Eigen::MatrixXd b_tilde(int r_next, int d) const;

  ModeMatrices mode_matrices(int r, int r_next, const DelayWindow& window) const;

  /// window must hold d_{k-i} for i = r_next..r (lag 0 is d_k).
  ExtendedState step(const ExtendedState& state, int r, int r_next, const DelayWindow& window,
                     const Eigen::VectorXd& u_tilde) const;

  /// x_k from the extended state; window must hold d_{k-i} for i = 1..r.
  Eigen::VectorXd reconstruct_state(const ExtendedState& state, int r, const DelayWindow& window) const;

  /// u_{k-i} given d_{k-i} = d.
  Eigen::VectorXd reconstruct_input(int i, int d, const Eigen::VectorXd& u_hat,
                                    const Eigen::VectorXd& u_tilde) const;

 private:
  void require_transition(int r, int r_next) const;
  void require_delay(int d) const;

  PlantModel plant_;
  PacketLayout layout_;
  SelectorSet selectors_;
  std::vector<Eigen::MatrixXd> a_powers_;
};

}  // namespace ncs
