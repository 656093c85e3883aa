#include "ncs/packet_layout.hpp"

#include <algorithm>
#include <sstream>

#include "ncs/errors.hpp"

namespace ncs {

int PacketLayout::bar_width(int p) const {
  if (p == 0) return m_tilde;
  if (p < 0 || p > history_depth()) return 0;
  return m_bar[static_cast<std::size_t>(p - 1)];
}

PacketLayout build_layout(int m, int d_lo, int d_hi, int r_lo, int r_hi) {
  if (m < 1 || d_lo < 0 || d_hi < d_lo || r_lo < 0 || r_hi < r_lo) {
    std::ostringstream os;
    os << "invalid layout bounds m=" << m << " d=[" << d_lo << "," << d_hi << "] r=[" << r_lo << ","
       << r_hi << "]";
    throw BoundsError(os.str());
  }
  PacketLayout layout;
  layout.m = m;
  layout.d_lo = d_lo;
  layout.d_hi = d_hi;
  layout.r_lo = r_lo;
  layout.r_hi = r_hi;
  layout.m_tilde = (d_hi - d_lo + 1) * m;

  int offset = 0;
  for (int p = 1; p <= d_hi + r_hi; ++p) {
    const int width = layout.m_tilde - std::max(0, p - r_hi - d_lo) * m;
    layout.m_bar.push_back(width);
    layout.block_offset.push_back(offset);
    offset += width;
  }
  layout.m_hat = offset;
  return layout;
}

SelectorSet build_selectors(const PacketLayout& layout) {
  using Eigen::MatrixXd;
  const int m = layout.m;
  const int m_tilde = layout.m_tilde;
  const int m_hat = layout.m_hat;
  const int depth = layout.history_depth();

  SelectorSet set;
  set.d_lo_ = layout.d_lo;
  set.delay_count_ = layout.delay_count();

  // Block p of the next history is the m_bar_p-prefix of block p-1 of the
  // current one; block 0 is the packet sent now.
  set.shift_full = MatrixXd::Zero(m_hat, m_hat);
  set.shift_in = MatrixXd::Zero(m_hat, m_tilde);
  for (int p = 1; p <= depth; ++p) {
    const int width = layout.bar_width(p);
    const int row = layout.block_offset[static_cast<std::size_t>(p - 1)];
    if (p == 1) {
      set.shift_in.block(row, 0, width, width).setIdentity();
    } else {
      const int col = layout.block_offset[static_cast<std::size_t>(p - 2)];
      set.shift_full.block(row, col, width, width).setIdentity();
    }
  }

  set.pick_block_.reserve(static_cast<std::size_t>(depth) + 1);
  set.pick_block_.push_back(MatrixXd::Zero(m_tilde, m_hat));
  for (int p = 1; p <= depth; ++p) {
    const int width = layout.bar_width(p);
    MatrixXd pick = MatrixXd::Zero(width, m_hat);
    pick.block(0, layout.block_offset[static_cast<std::size_t>(p - 1)], width, width).setIdentity();
    set.pick_block_.push_back(std::move(pick));
  }

  for (int i = 0; i <= layout.r_hi; ++i) {
    for (int d = layout.d_lo; d <= layout.d_hi; ++d) {
      const int p = i + d;
      MatrixXd check = MatrixXd::Zero(m, layout.bar_width(p));
      check.block(0, layout.component_offset(d), m, m).setIdentity();
      MatrixXd hat = check * set.pick_block_[static_cast<std::size_t>(p)];
      set.pick_check_.push_back(std::move(check));
      set.pick_hat_.push_back(std::move(hat));
    }
  }

  for (int d = layout.d_lo; d <= layout.d_hi; ++d) {
    MatrixXd now = MatrixXd::Zero(m, m_tilde);
    if (d == 0) now.block(0, m_tilde - m, m, m).setIdentity();
    set.pick_now_.push_back(std::move(now));
  }
  return set;
}

Eigen::VectorXd stack_packet(std::span<const Eigen::VectorXd> components, const PacketLayout& layout) {
  if (static_cast<int>(components.size()) != layout.delay_count()) {
    std::ostringstream os;
    os << "expected " << layout.delay_count() << " packet components, got " << components.size();
    throw WidthError(os.str());
  }
  Eigen::VectorXd packet(layout.m_tilde);
  for (int j = 0; j < layout.delay_count(); ++j) {
    const Eigen::VectorXd& c = components[static_cast<std::size_t>(j)];
    if (c.size() != layout.m) {
      std::ostringstream os;
      os << "component for delay " << layout.d_lo + j << " has width " << c.size() << ", expected " << layout.m;
      throw WidthError(os.str());
    }
    packet.segment(layout.component_offset(layout.d_lo + j), layout.m) = c;
  }
  return packet;
}

std::vector<Eigen::VectorXd> unstack_packet(const Eigen::VectorXd& packet, const PacketLayout& layout) {
  if (packet.size() != layout.m_tilde) {
    std::ostringstream os;
    os << "packet has width " << packet.size() << ", expected " << layout.m_tilde;
    throw WidthError(os.str());
  }
  std::vector<Eigen::VectorXd> components;
  components.reserve(static_cast<std::size_t>(layout.delay_count()));
  for (int d = layout.d_lo; d <= layout.d_hi; ++d)
    components.emplace_back(packet.segment(layout.component_offset(d), layout.m));
  return components;
}

Eigen::VectorXd stack_history(std::span<const Eigen::VectorXd> recent, const PacketLayout& layout) {
  const int depth = layout.history_depth();
  if (static_cast<int>(recent.size()) != depth) {
    std::ostringstream os;
    os << "expected " << depth << " recent packets, got " << recent.size();
    throw WidthError(os.str());
  }
  Eigen::VectorXd history(layout.m_hat);
  for (int p = 1; p <= depth; ++p) {
    const Eigen::VectorXd& packet = recent[static_cast<std::size_t>(p - 1)];
    if (packet.size() != layout.m_tilde) throw WidthError("recent packet has wrong width");
    const int width = layout.bar_width(p);
    history.segment(layout.block_offset[static_cast<std::size_t>(p - 1)], width) = packet.head(width);
  }
  return history;
}

}  // namespace ncs
