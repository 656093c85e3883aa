#include "ncs/problem.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "ncs/errors.hpp"

namespace ncs {

namespace {

std::string dims(const Eigen::MatrixXd& M) {
  return std::to_string(M.rows()) + "x" + std::to_string(M.cols());
}

bool all_finite(const Eigen::MatrixXd& M) { return M.allFinite(); }

void audit_weight(const char* name, const Eigen::MatrixXd& W, int side, double floor, bool strict,
                  std::vector<std::string>& issues) {
  if (W.rows() != side || W.cols() != side) {
    issues.push_back(std::string("ShapeError: ") + name + " is " + dims(W) + ", expected " +
                     std::to_string(side) + "x" + std::to_string(side));
    return;
  }
  if (!all_finite(W)) {
    issues.push_back(std::string("CostError: ") + name + " has non-finite entries");
    return;
  }
  const double asym = side == 0 ? 0.0 : (W - W.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymmetryTolerance) {
    std::ostringstream os;
    os << "CostError: " << name << " is not symmetric (max asymmetry " << asym << ")";
    issues.push_back(os.str());
    return;
  }
  const double lambda = min_symmetric_eigenvalue(W);
  if (!(lambda >= floor)) {
    std::ostringstream os;
    os.precision(17);
    os << "CostError: " << name << " must be " << (strict ? "positive definite" : "positive semidefinite")
       << ", smallest eigenvalue " << lambda;
    issues.push_back(os.str());
  }
}

void mix(std::uint64_t& h, const void* data, std::size_t size) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
}

void mix_text(std::uint64_t& h, const std::string& s) { mix(h, s.data(), s.size()); }

void mix_int(std::uint64_t& h, long long v) { mix_text(h, std::to_string(v) + ";"); }

void mix_matrix(std::uint64_t& h, const char* tag, const Eigen::MatrixXd& M) {
  mix_text(h, tag);
  mix_int(h, M.rows());
  mix_int(h, M.cols());
  char buf[40];
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g,", M(i, j));
      mix_text(h, buf);
    }
}

}  // namespace

double min_symmetric_eigenvalue(const Eigen::MatrixXd& M) {
  if (M.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(symmetrized(M), Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& M) { return 0.5 * (M + M.transpose()); }

std::vector<std::string> audit_plant(const PlantModel& plant) {
  std::vector<std::string> issues;
  if (plant.A.rows() < 1 || plant.A.rows() != plant.A.cols())
    issues.push_back("ShapeError: A must be square and non-empty, got " + dims(plant.A));
  if (plant.B.rows() != plant.A.rows() || plant.B.cols() < 1)
    issues.push_back("ShapeError: B must be " + std::to_string(plant.A.rows()) + "xm with m >= 1, got " +
                     dims(plant.B));
  if (!all_finite(plant.A) || !all_finite(plant.B)) issues.push_back("ShapeError: plant has non-finite entries");
  return issues;
}

std::vector<std::string> audit_cost(const CostSpec& cost, int n, int m) {
  std::vector<std::string> issues;
  audit_weight("Q", cost.Q, n, kPsdFloor, false, issues);
  audit_weight("Q_bar", cost.Q_bar, n, kPsdFloor, false, issues);
  audit_weight("R", cost.R, m, kPdFloor, true, issues);
  if (cost.k0 > cost.N)
    issues.push_back("CostError: horizon requires k0 <= N, got k0=" + std::to_string(cost.k0) +
                     " N=" + std::to_string(cost.N));
  return issues;
}

ProblemSpec make_problem(PlantModel plant, CostSpec cost, DelayChain r_chain, DelayChain d_chain) {
  auto raise = [](const std::string& issue) {
    const auto colon = issue.find(": ");
    const std::string kind = issue.substr(0, colon);
    const std::string what = issue.substr(colon + 2);
    if (kind == "ShapeError") throw ShapeError(what);
    throw CostError(what);
  };
  if (auto issues = audit_plant(plant); !issues.empty()) raise(issues.front());
  if (auto issues = audit_cost(cost, plant.n(), plant.m()); !issues.empty()) raise(issues.front());
  return ProblemSpec{std::move(plant), std::move(cost), std::move(r_chain), std::move(d_chain)};
}

std::uint64_t spec_hash(const ProblemSpec& spec) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  mix_text(h, "ncs-spec-v1;");
  mix_matrix(h, "A", spec.plant.A);
  mix_matrix(h, "B", spec.plant.B);
  mix_matrix(h, "Q", spec.cost.Q);
  mix_matrix(h, "Qbar", spec.cost.Q_bar);
  mix_matrix(h, "R", spec.cost.R);
  mix_int(h, spec.cost.k0);
  mix_int(h, spec.cost.N);
  mix_int(h, spec.r_chain.lo());
  mix_int(h, spec.r_chain.hi());
  mix_matrix(h, "r_step", spec.r_chain.step());
  mix_int(h, spec.d_chain.lo());
  mix_int(h, spec.d_chain.hi());
  mix_matrix(h, "d_step", spec.d_chain.step());
  return h;
}

std::string hash_hex(std::uint64_t hash) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

void validate_initial(const ProblemSpec& spec, const InitialCondition& init) {
  if (init.x0.size() != spec.plant.n())
    throw ShapeError("init.x0 has " + std::to_string(init.x0.size()) + " entries, expected " +
                     std::to_string(spec.plant.n()));
  if (!spec.r_chain.contains(init.r0))
    throw OutOfRange("init.r0 = " + std::to_string(init.r0) + " outside the r chain bounds");
  if (!spec.d_chain.contains(init.d_init))
    throw OutOfRange("init.d_init = " + std::to_string(init.d_init) + " outside the d chain bounds");
  const PacketLayout layout = spec.layout();
  if (init.pre_history.empty()) return;
  if (static_cast<int>(init.pre_history.size()) != layout.history_depth())
    throw ShapeError("init.pre_history has " + std::to_string(init.pre_history.size()) +
                     " packets, expected " + std::to_string(layout.history_depth()));
  for (const auto& packet : init.pre_history)
    if (packet.size() != layout.m_tilde)
      throw ShapeError("init.pre_history packet has width " + std::to_string(packet.size()) + ", expected " +
                       std::to_string(layout.m_tilde));
}

std::vector<Eigen::VectorXd> resolved_pre_history(const ProblemSpec& spec, const InitialCondition& init) {
  const PacketLayout layout = spec.layout();
  if (!init.pre_history.empty()) return init.pre_history;
  return std::vector<Eigen::VectorXd>(static_cast<std::size_t>(layout.history_depth()),
                                      Eigen::VectorXd::Zero(layout.m_tilde));
}

}  // namespace ncs
