#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace ncs {

/// Dimension bookkeeping for the packet vector and the stacked packet history.
///
/// A packet sent at time j carries one m-wide candidate input per possible
/// delivery delay, ordered from the largest delay d_hi at the top down to
/// d_lo at the bottom. The history vector stacks, for every lag p in
/// 1..d_hi+r_hi, the part of the packet sent p steps ago that can still be
/// applied or still be needed to reconstruct an unobserved state: the
/// components with delay d_hi down to max(d_lo, p - r_hi).
struct PacketLayout {
  int m = 1;
  int d_lo = 0;
  int d_hi = 0;
  int r_lo = 0;
  int r_hi = 0;
  int m_tilde = 0;
  std::vector<int> m_bar;         // width of history block p at index p-1
  std::vector<int> block_offset;  // start row of history block p at index p-1
  int m_hat = 0;

  int history_depth() const { return d_hi + r_hi; }
  int delay_count() const { return d_hi - d_lo + 1; }

  /// Width of history block p; block 0 is the current packet itself and
  /// blocks outside 0..history_depth() are empty.
  int bar_width(int p) const;
  /// Smallest delay still stored in history block p (p >= 0).
  int oldest_delay(int p) const { return p - r_hi > d_lo ? p - r_hi : d_lo; }
  /// Row offset of the delay-`delay` component inside a packet or block.
  int component_offset(int delay) const { return (d_hi - delay) * m; }
  bool holds_delay(int delay) const { return delay >= d_lo && delay <= d_hi; }
};

PacketLayout build_layout(int m, int d_lo, int d_hi, int r_lo, int r_hi);

/// Dense 0/1 selector and shift matrices over a layout.
struct SelectorSet {
  Eigen::MatrixXd shift_full;  // m_hat x m_hat, history -> next history
  Eigen::MatrixXd shift_in;    // m_hat x m_tilde, current packet -> next history

  /// Block picker for history block p (m_bar_p x m_hat); zero for p = 0.
  const Eigen::MatrixXd& pick_block(int p) const { return pick_block_[static_cast<std::size_t>(p)]; }
  /// Picks the delay-d component out of history block i+d (m x m_bar_{i+d}).
  const Eigen::MatrixXd& pick_check(int i, int d) const { return pick_check_[index(i, d)]; }
  /// pick_check(i, d) * pick_block(i+d): u_{k-i} out of the history when d_{k-i} = d.
  const Eigen::MatrixXd& pick_hat(int i, int d) const { return pick_hat_[index(i, d)]; }
  /// Picks the delay-0 component out of the current packet; zero unless d == 0.
  const Eigen::MatrixXd& pick_now(int d) const { return pick_now_[static_cast<std::size_t>(d - d_lo_)]; }

 private:
  friend SelectorSet build_selectors(const PacketLayout& layout);
  std::size_t index(int i, int d) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(delay_count_) +
           static_cast<std::size_t>(d - d_lo_);
  }

  int d_lo_ = 0;
  int delay_count_ = 1;
  std::vector<Eigen::MatrixXd> pick_block_;
  std::vector<Eigen::MatrixXd> pick_check_;
  std::vector<Eigen::MatrixXd> pick_hat_;
  std::vector<Eigen::MatrixXd> pick_now_;
};

SelectorSet build_selectors(const PacketLayout& layout);

/// components[j] is the candidate input for delay d_lo + j.
Eigen::VectorXd stack_packet(std::span<const Eigen::VectorXd> components, const PacketLayout& layout);
std::vector<Eigen::VectorXd> unstack_packet(const Eigen::VectorXd& packet, const PacketLayout& layout);

/// Builds the history vector from the most recent packets:
/// recent[p-1] is the full packet sent p steps ago, p = 1..history_depth().
Eigen::VectorXd stack_history(std::span<const Eigen::VectorXd> recent, const PacketLayout& layout);

}  // namespace ncs
