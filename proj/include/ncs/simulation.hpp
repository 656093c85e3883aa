#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ncs/problem.hpp"
#include "ncs/synthesis.hpp"

namespace ncs {

/// One joint realization of both delay processes over an episode.
///
/// r is stored for k = k0..N. d is stored for every time from
/// k0-1-r_{k0} (the value the controller starts from) to N+d_hi, which
/// covers all packet deliveries charged by the cost.
struct DelayRealization {
  int k0 = 0;
  int N = 0;
  int d_start = 0;
  std::vector<int> r;
  std::vector<int> d;

  int r_at(int k) const;
  int d_at(int t) const;
  int d_end() const { return d_start + static_cast<int>(d.size()) - 1; }
};

/// Throws ChainViolation when a path leaves the chain bounds or grows by
/// more than one per step.
void check_realization(const ProblemSpec& spec, const DelayRealization& path);

/// Samples d first (oldest to newest), then r, from one engine.
DelayRealization sample_realization(const ProblemSpec& spec, const InitialCondition& init, std::mt19937_64& rng);

/// Packets sent by the controller, addressed by send time.
class PacketLog {
 public:
  PacketLog() = default;
  /// `first` is the send time of history[0].
  PacketLog(int first, std::vector<Eigen::VectorXd> history);

  int first() const { return first_; }
  int last() const { return first_ + static_cast<int>(packets_.size()) - 1; }
  bool has(int j) const { return j >= first_ && j <= last(); }
  /// Throws LogGap when no packet was recorded for time j.
  const Eigen::VectorXd& at(int j) const;
  void append(Eigen::VectorXd packet) { packets_.push_back(std::move(packet)); }

 private:
  int first_ = 0;
  std::vector<Eigen::VectorXd> packets_;
};

/// What the controller receives at step k and nothing else; the packet
/// history is reconstructed from its own sent log.
struct ControllerInput {
  int k = 0;
  int r = 0;
  Eigen::VectorXd x_tilde;
  int d_tilde = 0;
};

/// Interface for anything that emits packets from the controller-side information.
class PacketPolicy {
 public:
  virtual ~PacketPolicy() = default;
  virtual Eigen::VectorXd act(const ControllerInput& input) = 0;
};

/// Synthesized feedback u~_k = -L_k(r_k, d~_k) [x~_k; u_hat_k].
class Controller : public PacketPolicy {
 public:
  Controller(const GainSchedule& schedule, const PacketLayout& layout, const std::vector<Eigen::VectorXd>& pre_history,
             int k0);

  Eigen::VectorXd act(const ControllerInput& input) override;

  /// [x~_k; u_hat_k] assembled at the last call to act.
  const Eigen::VectorXd& last_extended_state() const { return last_x_hat_; }
  const PacketLog& sent() const { return log_; }

 private:
  const GainSchedule& schedule_;
  PacketLayout layout_;
  PacketLog log_;
  Eigen::VectorXd last_x_hat_;
};

struct StepRecord {
  int k = 0;
  Eigen::VectorXd x;
  Eigen::VectorXd u;
  Eigen::VectorXd u_tilde;
  int r = 0;
  int d = 0;
  double stage_cost = 0.0;  // x'Qx + u'Ru
  int applied_from = 0;  // send time of the packet u was taken from
};

struct SimTrace {
  std::vector<StepRecord> steps;
  Eigen::VectorXd x_final;  // x_{N+1}
  double terminal_cost = 0.0;
  double J_tilde = 0.0;  // applied-input accounting
  double J = 0.0;        // packet accounting: u~_k^(p) charged iff d_{k+p} = p
  DelayRealization delays;
  PacketLog packets;     // pre-history followed by every packet sent in k0..N
};

/// Closed loop over one fixed delay realization. The plant starts from x0 at
/// time k0 - r_{k0} and is propagated to k0 with the pre-history packets.
SimTrace run_realization(const ProblemSpec& spec, PacketPolicy& policy, const InitialCondition& init,
                         const DelayRealization& path);

SimTrace run_episode(const ProblemSpec& spec, const GainSchedule& schedule, const InitialCondition& init,
                     std::uint64_t seed);

/// [x0; u_hat_{k0}] built from the pre-history.
Eigen::VectorXd initial_extended_state(const ProblemSpec& spec, const InitialCondition& init);

/// x_hat' K_{k0}(r0, d_init) x_hat.
double predicted_value(const ProblemSpec& spec, const GainSchedule& schedule, const InitialCondition& init);

struct MonteCarloSummary {
  double mean_J = 0.0;
  double mean_J_tilde = 0.0;
  double stderr_J = 0.0;
  double stderr_J_tilde = 0.0;
  double v_k0 = 0.0;
  int episodes = 0;
  std::uint64_t seed = 0;
};

/// Seeds of episodes 0..count-1: successive draws of an engine seeded with `seed`.
std::vector<std::uint64_t> episode_seeds(std::uint64_t seed, int count);

/// Episode seeds are drawn in order from a master engine, so the result
/// does not depend on `threads` (0 picks the hardware concurrency).
MonteCarloSummary run_monte_carlo(const ProblemSpec& spec, const GainSchedule& schedule, const InitialCondition& init,
                                  int episodes, std::uint64_t seed, unsigned threads = 0);

void write_trace_csv(std::ostream& out, const SimTrace& trace);
void save_trace_csv(const std::string& path, const SimTrace& trace);
void write_summary(std::ostream& out, const MonteCarloSummary& summary);

}  // namespace ncs
