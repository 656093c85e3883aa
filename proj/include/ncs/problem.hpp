#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ncs/delay_chain.hpp"
#include "ncs/packet_layout.hpp"

namespace ncs {

/// Discrete-time LTI plant x_{k+1} = A x_k + B u_k.
struct PlantModel {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;

  int n() const { return static_cast<int>(A.rows()); }
  int m() const { return static_cast<int>(B.cols()); }
};

/// Quadratic cost weights and the horizon k0..N.
struct CostSpec {
  Eigen::MatrixXd Q;
  Eigen::MatrixXd Q_bar;
  Eigen::MatrixXd R;
  int k0 = 0;
  int N = 0;
};

inline constexpr double kSymmetryTolerance = 1e-12;
inline constexpr double kPsdFloor = -1e-10;
inline constexpr double kPdFloor = 1e-10;

/// Everything the gains depend on. Construct through make_problem, which
/// runs the load-time checks.
struct ProblemSpec {
  PlantModel plant;
  CostSpec cost;
  DelayChain r_chain;
  DelayChain d_chain;

  PacketLayout layout() const {
    return build_layout(plant.m(), d_chain.lo(), d_chain.hi(), r_chain.lo(), r_chain.hi());
  }
};

std::vector<std::string> audit_plant(const PlantModel& plant);
std::vector<std::string> audit_cost(const CostSpec& cost, int n, int m);

/// Throws ShapeError / CostError on the first violated invariant.
ProblemSpec make_problem(PlantModel plant, CostSpec cost, DelayChain r_chain, DelayChain d_chain);

/// Stable 64-bit FNV-1a digest over plant, cost, horizon and both chains.
/// Initial conditions and run settings are deliberately excluded.
std::uint64_t spec_hash(const ProblemSpec& spec);
std::string hash_hex(std::uint64_t hash);

/// Conditions at the start of the horizon.
///
/// x0 is the plant state at time k0 - r0, i.e. the newest measurement the
/// controller holds at k0 (it equals x_{k0} when r0 = 0). d_init is the
/// actuator-side delay at time k0 - 1 - r0, the value piggybacked on that
/// measurement. pre_history holds the packets sent at k0-P .. k0-1, oldest
/// first, where P = d_hi + r_hi; empty means all zeros.
struct InitialCondition {
  Eigen::VectorXd x0;
  int r0 = 0;
  int d_init = 0;
  std::vector<Eigen::VectorXd> pre_history;
};

/// Throws ShapeError / OutOfRange when init does not fit spec.
void validate_initial(const ProblemSpec& spec, const InitialCondition& init);

/// pre_history with zero packets filled in when it was left empty.
std::vector<Eigen::VectorXd> resolved_pre_history(const ProblemSpec& spec, const InitialCondition& init);

struct RunSettings {
  int episodes = 1000;
  std::uint64_t seed = 1;
};

/// Smallest eigenvalue of the symmetric part of M.
double min_symmetric_eigenvalue(const Eigen::MatrixXd& M);
Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& M);

}  // namespace ncs
