#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ncs {

/// Query for an n-step transition probability, in absolute delay units.
struct TransitionQuery {
  int from_value = 0;
  int to_value = 0;
  int steps = 0;
};

enum class ChainIssueKind { Shape, RowSum, Support };

struct ChainIssue {
  ChainIssueKind kind;
  int row = -1;  // matrix row (0-based), -1 when not row specific
  int col = -1;
  std::string message;
};

/// Lists every violation of the chain invariants: square shape of side
/// hi-lo+1, stochastic rows (tolerance 1e-12, no renormalization), and the
/// support rule step(a,b) > 0 <=> b <= a+1 in absolute delay units.
std::vector<ChainIssue> audit_chain(int lo, int hi, const Eigen::MatrixXd& step);

/// Throws the error matching the first issue reported by audit_chain.
void validate_chain(int lo, int hi, const Eigen::MatrixXd& step);

/// Bounded stationary Markov chain on the delay values lo..hi.
///
/// The n-step kernel is the n-th power of the one-step matrix. Powers up to
/// the cache horizon are computed once at construction; longer horizons are
/// computed on demand without touching the cache, so a chain is immutable
/// and safe to share between threads.
class DelayChain {
 public:
  static constexpr double kRowSumTolerance = 1e-12;

  DelayChain(int lo, int hi, Eigen::MatrixXd step, int cache_horizon = 16);

  int lo() const { return lo_; }
  int hi() const { return hi_; }
  int size() const { return hi_ - lo_ + 1; }
  bool contains(int value) const { return value >= lo_ && value <= hi_; }

  const Eigen::MatrixXd& step() const { return powers_[1]; }
  int cache_horizon() const { return static_cast<int>(powers_.size()) - 1; }

  double one_step(int from, int to) const { return n_step(from, to, 1); }
  double n_step(int from, int to, int steps) const;
  double n_step(const TransitionQuery& q) const { return n_step(q.from_value, q.to_value, q.steps); }

  /// step^steps (identity for steps == 0).
  Eigen::MatrixXd power(int steps) const;

  /// Draws the successor of `current` from its row. Uses only raw 64-bit
  /// draws of the engine, so a fixed seed reproduces bit-identical samples.
  int sample_next(int current, std::mt19937_64& rng) const;

 private:
  void require_value(int value, const char* what) const;

  int lo_;
  int hi_;
  std::vector<Eigen::MatrixXd> powers_;
};

/// Uniform double in [0, 1) built from the top 53 bits of one engine draw.
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace ncs
