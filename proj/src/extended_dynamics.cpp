#include "ncs/extended_dynamics.hpp"

#include <sstream>

#include "ncs/errors.hpp"

namespace ncs {

Eigen::VectorXd ExtendedState::stacked() const {
  Eigen::VectorXd out(x_tilde.size() + u_hat.size());
  out << x_tilde, u_hat;
  return out;
}

ExtendedState ExtendedState::split(const Eigen::VectorXd& stacked, int n) {
  return {stacked.head(n), stacked.tail(stacked.size() - n)};
}

void DelayWindow::set(int lag, int d) {
  if (lag < 0) throw WindowError("negative lag " + std::to_string(lag));
  if (static_cast<int>(by_lag_.size()) <= lag) by_lag_.resize(static_cast<std::size_t>(lag) + 1, -1);
  by_lag_[static_cast<std::size_t>(lag)] = d;
}

bool DelayWindow::has(int lag) const {
  return lag >= 0 && lag < static_cast<int>(by_lag_.size()) && by_lag_[static_cast<std::size_t>(lag)] >= 0;
}

int DelayWindow::at(int lag) const {
  if (!has(lag)) throw WindowError("no realized delay for lag " + std::to_string(lag));
  return by_lag_[static_cast<std::size_t>(lag)];
}

ExtendedModel::ExtendedModel(PlantModel plant, PacketLayout layout)
    : plant_(std::move(plant)), layout_(std::move(layout)), selectors_(build_selectors(layout_)) {
  if (plant_.m() != layout_.m) throw ShapeError("plant input width does not match the packet layout");
  const int n = plant_.n();
  a_powers_.push_back(Eigen::MatrixXd::Identity(n, n));
  for (int i = 1; i <= layout_.r_hi + 1; ++i) a_powers_.push_back(a_powers_.back() * plant_.A);
}

const Eigen::MatrixXd& ExtendedModel::a_power(int i) const {
  if (i < 0 || i >= static_cast<int>(a_powers_.size()))
    throw IndexError("A power " + std::to_string(i) + " outside the cached range");
  return a_powers_[static_cast<std::size_t>(i)];
}

void ExtendedModel::require_transition(int r, int r_next) const {
  if (r < layout_.r_lo || r > layout_.r_hi || r_next < layout_.r_lo || r_next > layout_.r_hi) {
    std::ostringstream os;
    os << "sensor ages r=" << r << " r_next=" << r_next << " outside [" << layout_.r_lo << ", " << layout_.r_hi
       << "]";
    throw ModeError(os.str());
  }
  if (r_next > r + 1) {
    std::ostringstream os;
    os << "impossible transition r=" << r << " -> r_next=" << r_next;
    throw ModeError(os.str());
  }
}

void ExtendedModel::require_delay(int d) const {
  if (!layout_.holds_delay(d)) {
    std::ostringstream os;
    os << "actuator delay " << d << " outside [" << layout_.d_lo << ", " << layout_.d_hi << "]";
    throw ModeError(os.str());
  }
}

Eigen::MatrixXd ExtendedModel::a_tilde(int r, int r_next) const {
  require_transition(r, r_next);
  const int n = plant_.n();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(state_dim(), state_dim());
  out.topLeftCorner(n, n) = a_power(1 + r - r_next);
  out.bottomRightCorner(layout_.m_hat, layout_.m_hat) = selectors_.shift_full;
  return out;
}

Eigen::MatrixXd ExtendedModel::a_bar(int i, int r_next, int d) const {
  require_delay(d);
  if (i < r_next || i > layout_.r_hi)
    throw IndexError("A-bar index " + std::to_string(i) + " outside [" + std::to_string(r_next) + ", " +
                     std::to_string(layout_.r_hi) + "]");
  const int n = plant_.n();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(state_dim(), state_dim());
  out.topRightCorner(n, layout_.m_hat) = a_power(i - r_next) * plant_.B * selectors_.pick_hat(i, d);
  return out;
}

Eigen::MatrixXd ExtendedModel::b_tilde(int r_next, int d) const {
  require_delay(d);
  const int n = plant_.n();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(state_dim(), layout_.m_tilde);
  if (r_next == 0) out.topRows(n) = plant_.B * selectors_.pick_now(d);
  out.bottomRows(layout_.m_hat) = selectors_.shift_in;
  return out;
}

ModeMatrices ExtendedModel::mode_matrices(int r, int r_next, const DelayWindow& window) const {
  ModeMatrices modes;
  modes.a_tilde = a_tilde(r, r_next);
  modes.a_bar = Eigen::MatrixXd::Zero(state_dim(), state_dim());
  for (int i = r_next; i <= r; ++i) modes.a_bar += a_bar(i, r_next, window.at(i));
  // B~ only reads d_k when the fresh packet can reach the next measurement.
  const int d_now = r_next == 0 ? window.at(0) : layout_.d_lo;
  modes.b_tilde = b_tilde(r_next, d_now);
  return modes;
}

ExtendedState ExtendedModel::step(const ExtendedState& state, int r, int r_next, const DelayWindow& window,
                                  const Eigen::VectorXd& u_tilde) const {
  if (u_tilde.size() != layout_.m_tilde) throw WidthError("packet width does not match the layout");
  const ModeMatrices modes = mode_matrices(r, r_next, window);
  const Eigen::VectorXd x_hat = state.stacked();
  const Eigen::VectorXd next = (modes.a_tilde + modes.a_bar) * x_hat + modes.b_tilde * u_tilde;
  return ExtendedState::split(next, plant_.n());
}

Eigen::VectorXd ExtendedModel::reconstruct_state(const ExtendedState& state, int r,
                                                 const DelayWindow& window) const {
  if (r < 0 || r > layout_.r_hi) throw ModeError("sensor age " + std::to_string(r) + " outside the chain bounds");
  Eigen::VectorXd x = a_power(r) * state.x_tilde;
  for (int i = 1; i <= r; ++i) {
    const int d = window.at(i);
    require_delay(d);
    x += a_power(i - 1) * plant_.B * (selectors_.pick_hat(i, d) * state.u_hat);
  }
  return x;
}

Eigen::VectorXd ExtendedModel::reconstruct_input(int i, int d, const Eigen::VectorXd& u_hat,
                                                 const Eigen::VectorXd& u_tilde) const {
  if (i < 0 || i > layout_.r_hi)
    throw IndexError("input lag " + std::to_string(i) + " outside [0, " + std::to_string(layout_.r_hi) + "]");
  if (!layout_.holds_delay(d)) throw IndexError("delay " + std::to_string(d) + " outside the chain bounds");
  Eigen::VectorXd u = selectors_.pick_hat(i, d) * u_hat;
  if (i == 0) u += selectors_.pick_now(d) * u_tilde;
  return u;
}

}  // namespace ncs
