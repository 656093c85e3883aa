#include "ncs/synthesis.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "ncs/errors.hpp"

namespace ncs {

// ---------------------------------------------------------------------------
// ModeTable / GainSchedule

ModeTable::ModeTable(int r_lo, int r_hi, int d_lo, int d_hi)
    : r_lo_(r_lo), r_hi_(r_hi), d_lo_(d_lo), d_hi_(d_hi),
      cells_(static_cast<std::size_t>((r_hi - r_lo + 1) * (d_hi - d_lo + 1))) {}

bool ModeTable::filled(int r, int d) const {
  return contains(r, d) && cells_[index(r, d)].size() > 0;
}

bool ModeTable::complete() const {
  return std::all_of(cells_.begin(), cells_.end(), [](const Eigen::MatrixXd& M) { return M.size() > 0; });
}

const Eigen::MatrixXd& ModeTable::at(int r, int d) const {
  if (!filled(r, d)) {
    std::ostringstream os;
    os << "no matrix stored for mode (r=" << r << ", d=" << d << ")";
    throw IncompleteTable(os.str());
  }
  return cells_[index(r, d)];
}

void ModeTable::set(int r, int d, Eigen::MatrixXd value) {
  if (!contains(r, d)) throw IncompleteTable("mode outside table bounds");
  cells_[index(r, d)] = std::move(value);
}

GainSchedule::GainSchedule(int k0, int N, const PacketLayout& layout, int n, std::uint64_t spec_hash)
    : k0_(k0), N_(N), n_(n), m_(layout.m), m_tilde_(layout.m_tilde), m_hat_(layout.m_hat),
      r_lo_(layout.r_lo), r_hi_(layout.r_hi), d_lo_(layout.d_lo), d_hi_(layout.d_hi), spec_hash_(spec_hash) {
  for (int k = k0; k <= N + 1; ++k) values_.emplace_back(r_lo_, r_hi_, d_lo_, d_hi_);
  for (int k = k0; k <= N; ++k) gains_.emplace_back(r_lo_, r_hi_, d_lo_, d_hi_);
  max_condition_.assign(static_cast<std::size_t>(N - k0 + 1), 0.0);
}

const Eigen::MatrixXd& GainSchedule::value(int k, int r, int d) const {
  if (k < k0_ || k > N_ + 1 || !values_[static_cast<std::size_t>(k - k0_)].filled(r, d)) {
    std::ostringstream os;
    os << "no value matrix for k=" << k << " r=" << r << " d=" << d;
    throw ScheduleGap(os.str());
  }
  return values_[static_cast<std::size_t>(k - k0_)].at(r, d);
}

const Eigen::MatrixXd& GainSchedule::gain(int k, int r, int d) const {
  if (k < k0_ || k > N_ || !gains_[static_cast<std::size_t>(k - k0_)].filled(r, d)) {
    std::ostringstream os;
    os << "no gain for k=" << k << " r=" << r << " d=" << d;
    throw ScheduleGap(os.str());
  }
  return gains_[static_cast<std::size_t>(k - k0_)].at(r, d);
}

const ModeTable& GainSchedule::values_at(int k) const {
  if (k < k0_ || k > N_ + 1) throw ScheduleGap("value table index " + std::to_string(k) + " out of range");
  return values_[static_cast<std::size_t>(k - k0_)];
}

ModeTable& GainSchedule::values_at(int k) {
  if (k < k0_ || k > N_ + 1) throw ScheduleGap("value table index " + std::to_string(k) + " out of range");
  return values_[static_cast<std::size_t>(k - k0_)];
}

ModeTable& GainSchedule::gains_at(int k) {
  if (k < k0_ || k > N_) throw ScheduleGap("gain table index " + std::to_string(k) + " out of range");
  return gains_[static_cast<std::size_t>(k - k0_)];
}

double GainSchedule::max_condition(int k) const {
  if (k < k0_ || k > N_) throw ScheduleGap("condition index " + std::to_string(k) + " out of range");
  return max_condition_[static_cast<std::size_t>(k - k0_)];
}

void GainSchedule::set_max_condition(int k, double cond) {
  if (k < k0_ || k > N_) throw ScheduleGap("condition index " + std::to_string(k) + " out of range");
  max_condition_[static_cast<std::size_t>(k - k0_)] = cond;
}

bool GainSchedule::operator==(const GainSchedule& other) const {
  if (k0_ != other.k0_ || N_ != other.N_ || n_ != other.n_ || m_ != other.m_ || m_tilde_ != other.m_tilde_ ||
      m_hat_ != other.m_hat_ || r_lo_ != other.r_lo_ || r_hi_ != other.r_hi_ || d_lo_ != other.d_lo_ ||
      d_hi_ != other.d_hi_ || spec_hash_ != other.spec_hash_ || max_condition_ != other.max_condition_)
    return false;
  for (int k = k0_; k <= N_ + 1; ++k)
    for (int r = r_lo_; r <= r_hi_; ++r)
      for (int d = d_lo_; d <= d_hi_; ++d) {
        if (values_at(k).filled(r, d) != other.values_at(k).filled(r, d)) return false;
        if (values_at(k).filled(r, d) && values_at(k).at(r, d) != other.values_at(k).at(r, d)) return false;
        if (k <= N_) {
          const auto& a = gains_[static_cast<std::size_t>(k - k0_)];
          const auto& b = other.gains_[static_cast<std::size_t>(k - k0_)];
          if (a.filled(r, d) != b.filled(r, d)) return false;
          if (a.filled(r, d) && a.at(r, d) != b.at(r, d)) return false;
        }
      }
  return true;
}

// ---------------------------------------------------------------------------
// Kernels

double elapsed_phi(const DelayChain& d_chain, int from_d, int to_d, int t_from, int t_to) {
  if (t_to < t_from) {
    std::ostringstream os;
    os << "target time " << t_to << " precedes conditioning time " << t_from;
    throw TimeOrderError(os.str());
  }
  return d_chain.n_step(from_d, to_d, t_to - t_from);
}

KernelBuilder::KernelBuilder(const ProblemSpec& spec)
    : model_(spec.plant, spec.layout()), r_chain_(spec.r_chain), d_chain_(spec.d_chain), r_weight_(spec.cost.R) {}

Eigen::MatrixXd KernelBuilder::r_hat(int r, int d_tilde) const {
  const PacketLayout& layout = model_.layout();
  const int m = layout.m;
  const int t_cond = -1 - r;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(layout.m_tilde, layout.m_tilde);
  // Block for delay p is charged when the packet arrives exactly p steps late.
  for (int p = layout.d_lo; p <= layout.d_hi; ++p) {
    const int at = layout.component_offset(p);
    out.block(at, at, m, m) = phi(d_tilde, p, t_cond, p) * r_weight_;
  }
  return out;
}

Eigen::MatrixXd KernelBuilder::q_hat(const Eigen::MatrixXd& weight, int r, int d_tilde) const {
  const PacketLayout& layout = model_.layout();
  const int n = model_.n();
  const int t_cond = -1 - r;
  const Eigen::MatrixXd& Ar = model_.a_power(r);
  const Eigen::MatrixXd& B = model_.plant().B;

  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(model_.state_dim(), model_.state_dim());
  out.topLeftCorner(n, n) = Ar.transpose() * weight * Ar;
  if (r == 0 || layout.m_hat == 0) return out;

  // feed(i, delta) maps the history to the contribution of u_{k-i} to x_k
  // when that input was applied with delay delta.
  auto feed = [&](int i, int delta) -> Eigen::MatrixXd {
    return model_.a_power(i - 1) * B * model_.selectors().pick_hat(i, delta);
  };

  Eigen::MatrixXd q12 = Eigen::MatrixXd::Zero(n, layout.m_hat);
  for (int i = 1; i <= r; ++i)
    for (int delta = layout.d_lo; delta <= layout.d_hi; ++delta) {
      const double w = phi(d_tilde, delta, t_cond, -i);
      if (w == 0.0) continue;
      q12 += w * (Ar.transpose() * weight * feed(i, delta));
    }

  Eigen::MatrixXd q22 = Eigen::MatrixXd::Zero(layout.m_hat, layout.m_hat);
  for (int i = 1; i <= r; ++i)
    for (int delta1 = layout.d_lo; delta1 <= layout.d_hi; ++delta1) {
      const Eigen::MatrixXd left = feed(i, delta1).transpose() * weight;
      for (int j = 1; j <= r; ++j)
        for (int delta2 = layout.d_lo; delta2 <= layout.d_hi; ++delta2) {
          const double w = pair_weight(r, d_tilde, i, j, delta1, delta2);
          if (w == 0.0) continue;
          q22 += w * (left * feed(j, delta2));
        }
    }

  out.topRightCorner(n, layout.m_hat) = q12;
  out.bottomLeftCorner(layout.m_hat, n) = q12.transpose();
  out.bottomRightCorner(layout.m_hat, layout.m_hat) = q22;
  return symmetrized(out);
}

double KernelBuilder::pair_weight(int r, int d_tilde, int i, int j, int delta1, int delta2) const {
  const int t_cond = -1 - r;
  if (i > j) return phi(d_tilde, delta1, t_cond, -i) * phi(delta1, delta2, -i, -j);
  if (i < j) return phi(d_tilde, delta2, t_cond, -j) * phi(delta2, delta1, -j, -i);
  return delta1 == delta2 ? phi(d_tilde, delta1, t_cond, -i) : 0.0;
}

double KernelBuilder::triple_weight(int r, int d_tilde, int i, int j, int rho, int delta1, int delta2,
                                    int delta3) const {
  const int t_cond = -1 - r;
  if (i > j)
    return phi(d_tilde, delta1, t_cond, -i) * phi(delta1, delta2, -i, -j) * phi(delta2, delta3, -j, -rho);
  if (i < j)
    return phi(d_tilde, delta2, t_cond, -j) * phi(delta2, delta1, -j, -i) * phi(delta1, delta3, -i, -rho);
  return delta1 == delta2 ? phi(d_tilde, delta1, t_cond, -i) * phi(delta1, delta3, -i, -rho) : 0.0;
}

E3Kernels KernelBuilder::e3_kernels(const ModeTable& k_next, int r, int d_tilde) const {
  const PacketLayout& layout = model_.layout();
  const int dim = model_.state_dim();
  const int t_cond = -1 - r;
  const int d_lo = layout.d_lo;
  const int d_hi = layout.d_hi;

  Eigen::MatrixXd O = Eigen::MatrixXd::Zero(layout.m_tilde, layout.m_tilde);
  Eigen::MatrixXd M1 = Eigen::MatrixXd::Zero(layout.m_tilde, dim);
  Eigen::MatrixXd M2 = Eigen::MatrixXd::Zero(layout.m_tilde, dim);
  Eigen::MatrixXd H11 = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::MatrixXd H12 = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::MatrixXd H22 = Eigen::MatrixXd::Zero(dim, dim);

  const int rho_max = std::min(layout.r_hi, r + 1);
  for (int rho = layout.r_lo; rho <= rho_max; ++rho) {
    const double psi = r_chain_.one_step(r, rho);
    if (psi == 0.0) continue;
    const Eigen::MatrixXd At = model_.a_tilde(r, rho);

    // delta1 = d_{-rho} (next mode's d~), delta2 = d_0.
    for (int delta1 = d_lo; delta1 <= d_hi; ++delta1) {
      const double w1 = psi * phi(d_tilde, delta1, t_cond, -rho);
      if (w1 == 0.0) continue;
      const Eigen::MatrixXd& K = k_next.at(rho, delta1);
      H11 += w1 * (At.transpose() * K * At);
      for (int delta2 = d_lo; delta2 <= d_hi; ++delta2) {
        const double w2 = w1 * phi(delta1, delta2, -rho, 0);
        if (w2 == 0.0) continue;
        const Eigen::MatrixXd Bt = model_.b_tilde(rho, delta2);
        const Eigen::MatrixXd BtK = Bt.transpose() * K;
        O += w2 * (BtK * Bt);
        M1 += w2 * (BtK * At);
      }
    }

    // delta1 = d_{-i}, delta2 = d_{-rho}, delta3 = d_0.
    for (int i = rho; i <= r; ++i)
      for (int delta1 = d_lo; delta1 <= d_hi; ++delta1) {
        const double w1 = psi * phi(d_tilde, delta1, t_cond, -i);
        if (w1 == 0.0) continue;
        const Eigen::MatrixXd Ab = model_.a_bar(i, rho, delta1);
        for (int delta2 = d_lo; delta2 <= d_hi; ++delta2) {
          const double w2 = w1 * phi(delta1, delta2, -i, -rho);
          if (w2 == 0.0) continue;
          const Eigen::MatrixXd KAb = k_next.at(rho, delta2) * Ab;
          H12 += w2 * (At.transpose() * KAb);
          for (int delta3 = d_lo; delta3 <= d_hi; ++delta3) {
            const double w3 = w2 * phi(delta2, delta3, -rho, 0);
            if (w3 == 0.0) continue;
            M2 += w3 * (model_.b_tilde(rho, delta3).transpose() * KAb);
          }
        }
      }

    // delta1 = d_{-i}, delta2 = d_{-j}, delta3 = d_{-rho}.
    for (int i = rho; i <= r; ++i)
      for (int delta1 = d_lo; delta1 <= d_hi; ++delta1) {
        const Eigen::MatrixXd AbI = model_.a_bar(i, rho, delta1);
        for (int j = rho; j <= r; ++j)
          for (int delta2 = d_lo; delta2 <= d_hi; ++delta2)
            for (int delta3 = d_lo; delta3 <= d_hi; ++delta3) {
              const double w = psi * triple_weight(r, d_tilde, i, j, rho, delta1, delta2, delta3);
              if (w == 0.0) continue;
              H22 += w * (AbI.transpose() * k_next.at(rho, delta3) * model_.a_bar(j, rho, delta2));
            }
      }
  }

  E3Kernels out;
  out.O_hat = symmetrized(O);
  out.M_hat = M1 + M2;
  out.H_hat = symmetrized(H11 + H12 + H12.transpose() + H22);
  return out;
}

ExpectationKernels KernelBuilder::kernels(const ModeTable& k_next, const Eigen::MatrixXd& weight, int r,
                                          int d_tilde) const {
  E3Kernels e3 = e3_kernels(k_next, r, d_tilde);
  return {r_hat(r, d_tilde), q_hat(weight, r, d_tilde), std::move(e3.O_hat), std::move(e3.M_hat),
          std::move(e3.H_hat)};
}

// ---------------------------------------------------------------------------
// Backward recursion

GainSchedule synthesize(const ProblemSpec& spec) {
  const PacketLayout layout = spec.layout();
  const KernelBuilder builder(spec);
  const int k0 = spec.cost.k0;
  const int N = spec.cost.N;
  GainSchedule schedule(k0, N, layout, spec.plant.n(), spec_hash(spec));

  for (int r = layout.r_lo; r <= layout.r_hi; ++r)
    for (int d = layout.d_lo; d <= layout.d_hi; ++d)
      schedule.values_at(N + 1).set(r, d, builder.q_hat(spec.cost.Q_bar, r, d));

  for (int k = N; k >= k0; --k) {
    const ModeTable& k_next = schedule.values_at(k + 1);
    double worst = 0.0;
    for (int r = layout.r_lo; r <= layout.r_hi; ++r)
      for (int d = layout.d_lo; d <= layout.d_hi; ++d) {
        const ExpectationKernels kern = builder.kernels(k_next, spec.cost.Q, r, d);
        const Eigen::MatrixXd S = symmetrized(kern.O_hat + kern.R_hat);

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S, Eigen::EigenvaluesOnly);
        const double lo = eig.eigenvalues().minCoeff();
        const double hi = eig.eigenvalues().maxCoeff();
        const double cond = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
        if (!(cond <= kMaxGainCondition)) {
          std::ostringstream os;
          os << "O_hat + R_hat is singular at k=" << k << " r=" << r << " d=" << d << " (condition " << cond
             << ")";
          throw SolveError(os.str());
        }
        worst = std::max(worst, cond);

        const Eigen::LLT<Eigen::MatrixXd> llt(S);
        if (llt.info() != Eigen::Success) {
          std::ostringstream os;
          os << "Cholesky factorization failed at k=" << k << " r=" << r << " d=" << d;
          throw SolveError(os.str());
        }
        Eigen::MatrixXd L = llt.solve(kern.M_hat);
        Eigen::MatrixXd K = symmetrized(kern.H_hat + kern.Q_hat - kern.M_hat.transpose() * L);
        schedule.gains_at(k).set(r, d, std::move(L));
        schedule.values_at(k).set(r, d, std::move(K));
      }
    schedule.set_max_condition(k, worst);
  }
  return schedule;
}

std::vector<int> tail_components(const PacketLayout& layout, int k, int N) {
  std::vector<int> delays;
  for (int p = layout.d_lo; p <= layout.d_hi; ++p)
    if (k + p > N) delays.push_back(p);
  return delays;
}

}  // namespace ncs
