#include "ncs/delay_chain.hpp"

#include <cmath>
#include <sstream>

#include "ncs/errors.hpp"

namespace ncs {

std::vector<ChainIssue> audit_chain(int lo, int hi, const Eigen::MatrixXd& step) {
  std::vector<ChainIssue> issues;
  if (lo < 0 || hi < lo) {
    std::ostringstream os;
    os << "delay bounds must satisfy 0 <= lo <= hi, got lo=" << lo << " hi=" << hi;
    issues.push_back({ChainIssueKind::Shape, -1, -1, os.str()});
    return issues;
  }
  const Eigen::Index side = hi - lo + 1;
  if (step.rows() != side || step.cols() != side) {
    std::ostringstream os;
    os << "step matrix is " << step.rows() << "x" << step.cols() << ", expected " << side << "x"
       << side;
    issues.push_back({ChainIssueKind::Shape, -1, -1, os.str()});
    return issues;
  }

  for (Eigen::Index a = 0; a < side; ++a) {
    double sum = 0.0;
    bool entries_ok = true;
    for (Eigen::Index b = 0; b < side; ++b) {
      const double p = step(a, b);
      if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
        std::ostringstream os;
        os << "row " << a << " (delay " << lo + a << ") has entry " << p << " at column " << b
           << " outside [0, 1]";
        issues.push_back({ChainIssueKind::RowSum, static_cast<int>(a), static_cast<int>(b), os.str()});
        entries_ok = false;
      }
      sum += p;
    }
    if (entries_ok && std::abs(sum - 1.0) > DelayChain::kRowSumTolerance) {
      std::ostringstream os;
      os.precision(17);
      os << "row " << a << " (delay " << lo + a << ") sums to " << sum;
      issues.push_back({ChainIssueKind::RowSum, static_cast<int>(a), -1, os.str()});
    }

    const int from = lo + static_cast<int>(a);
    for (Eigen::Index b = 0; b < side; ++b) {
      const int to = lo + static_cast<int>(b);
      const double p = step(a, b);
      if (to <= from + 1 && !(p > 0.0)) {
        std::ostringstream os;
        os << "transition " << from << " -> " << to << " must have positive probability";
        issues.push_back({ChainIssueKind::Support, static_cast<int>(a), static_cast<int>(b), os.str()});
      } else if (to > from + 1 && p != 0.0) {
        std::ostringstream os;
        os << "transition " << from << " -> " << to << " grows the delay by more than one step but has probability "
           << p;
        issues.push_back({ChainIssueKind::Support, static_cast<int>(a), static_cast<int>(b), os.str()});
      }
    }
  }
  return issues;
}

void validate_chain(int lo, int hi, const Eigen::MatrixXd& step) {
  const auto issues = audit_chain(lo, hi, step);
  if (issues.empty()) return;
  const ChainIssue& first = issues.front();
  switch (first.kind) {
    case ChainIssueKind::Shape:
      throw ShapeError(first.message);
    case ChainIssueKind::RowSum:
      throw RowSumError(first.message);
    case ChainIssueKind::Support:
      throw SupportError(first.message);
  }
}

DelayChain::DelayChain(int lo, int hi, Eigen::MatrixXd step, int cache_horizon) : lo_(lo), hi_(hi) {
  validate_chain(lo, hi, step);
  if (cache_horizon < 1) cache_horizon = 1;
  powers_.reserve(static_cast<std::size_t>(cache_horizon) + 1);
  powers_.push_back(Eigen::MatrixXd::Identity(step.rows(), step.cols()));
  powers_.push_back(std::move(step));
  for (int n = 2; n <= cache_horizon; ++n) powers_.push_back(powers_[n - 1] * powers_[1]);
}

void DelayChain::require_value(int value, const char* what) const {
  if (!contains(value)) {
    std::ostringstream os;
    os << what << " " << value << " outside [" << lo_ << ", " << hi_ << "]";
    throw OutOfRange(os.str());
  }
}

Eigen::MatrixXd DelayChain::power(int steps) const {
  if (steps < 0) throw OutOfRange("negative step count " + std::to_string(steps));
  if (steps <= cache_horizon()) return powers_[static_cast<std::size_t>(steps)];
  Eigen::MatrixXd out = powers_.back();
  for (int n = cache_horizon(); n < steps; ++n) out = out * powers_[1];
  return out;
}

double DelayChain::n_step(int from, int to, int steps) const {
  require_value(from, "from value");
  require_value(to, "to value");
  if (steps < 0) throw OutOfRange("negative step count " + std::to_string(steps));
  if (steps <= cache_horizon()) return powers_[static_cast<std::size_t>(steps)](from - lo_, to - lo_);
  return power(steps)(from - lo_, to - lo_);
}

int DelayChain::sample_next(int current, std::mt19937_64& rng) const {
  require_value(current, "current value");
  const double u = unit_uniform(rng);
  const auto row = powers_[1].row(current - lo_);
  double cumulative = 0.0;
  int last_positive = lo_;
  for (Eigen::Index b = 0; b < row.size(); ++b) {
    if (row(b) <= 0.0) continue;
    last_positive = lo_ + static_cast<int>(b);
    cumulative += row(b);
    if (u < cumulative) return last_positive;
  }
  // u landed in the rounding gap above the accumulated row sum.
  return last_positive;
}

}  // namespace ncs
