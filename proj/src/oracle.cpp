#include "ncs/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "ncs/errors.hpp"
#include "ncs/schedule_io.hpp"

namespace ncs {

namespace {

double quad(const Eigen::VectorXd& v, const Eigen::MatrixXd& W) { return v.dot(W * v); }

// Number of support paths of `steps` transitions starting at `start`.
double count_paths(const DelayChain& chain, int start, int steps) {
  Eigen::VectorXd count = Eigen::VectorXd::Zero(chain.size());
  count(start - chain.lo()) = 1.0;
  Eigen::MatrixXd support = (chain.step().array() > 0.0).cast<double>();
  for (int s = 0; s < steps; ++s) count = support.transpose() * count;
  return count.sum();
}

// Depth-first walk over every positive-probability path of the chain.
void walk(const DelayChain& chain, std::vector<int>& path, double prob, int steps,
          const std::function<void(const std::vector<int>&, double)>& visit) {
  if (steps == 0) {
    visit(path, prob);
    return;
  }
  const int cur = path.back();
  for (int next = chain.lo(); next <= chain.hi(); ++next) {
    const double p = chain.one_step(cur, next);
    if (p == 0.0) continue;
    path.push_back(next);
    walk(chain, path, prob * p, steps - 1, visit);
    path.pop_back();
  }
}

void require_enumerable(const ProblemSpec& spec, const InitialCondition& init) {
  const auto issues = tiny_violations(spec);
  if (!issues.empty()) {
    std::string msg = "instance too large for exhaustive enumeration (";
    for (std::size_t i = 0; i < issues.size(); ++i) msg += (i ? "; " : "") + issues[i];
    throw Blowup(msg + "); shrink n, m, the delay bounds or the horizon");
  }
  const double count = count_realizations(spec, init);
  if (count > kMaxEnumeratedPaths) {
    std::ostringstream os;
    os << count << " joint delay sequences exceed the cap of " << kMaxEnumeratedPaths;
    throw Blowup(os.str());
  }
}

// Packet components addressed by lag p >= 1 behind the current step and delay.
// Offsets are recomputed here from the block widths rather than taken from the
// selector matrices.
struct PartialLog {
  int m = 1, d_lo = 0, d_hi = 0, r_hi = 0;
  std::vector<std::vector<Eigen::VectorXd>> by_lag;  // [p][delta - d_lo], empty when absent

  const Eigen::VectorXd& get(int lag, int delta) const {
    const auto& v = by_lag.at(static_cast<std::size_t>(lag)).at(static_cast<std::size_t>(delta - d_lo));
    if (v.size() == 0) throw LogGap("history holds no delay-" + std::to_string(delta) + " part of lag " + std::to_string(lag));
    return v;
  }
};

int block_width(const PacketLayout& L, int p) {
  const int cut = std::max(0, p - L.r_hi - L.d_lo);
  return std::max(0, L.m_tilde - cut * L.m);
}

PartialLog unstack_history(const PacketLayout& L, const Eigen::VectorXd& u_hat) {
  PartialLog log{L.m, L.d_lo, L.d_hi, L.r_hi, {}};
  const int P = L.d_hi + L.r_hi;
  log.by_lag.assign(static_cast<std::size_t>(P + 1), std::vector<Eigen::VectorXd>(static_cast<std::size_t>(L.d_hi - L.d_lo + 1)));
  int offset = 0;
  for (int p = 1; p <= P; ++p) {
    const int width = block_width(L, p);
    for (int delta = L.d_hi; delta >= L.d_lo; --delta) {
      const int at = (L.d_hi - delta) * L.m;
      if (at + L.m > width) break;
      log.by_lag[static_cast<std::size_t>(p)][static_cast<std::size_t>(delta - L.d_lo)] = u_hat.segment(offset + at, L.m);
    }
    offset += width;
  }
  if (offset != u_hat.size()) throw WidthError("history width disagrees with the block widths");
  return log;
}

Eigen::VectorXd restack_history(const PacketLayout& L, const std::vector<Eigen::VectorXd>& packets_by_lag) {
  // packets_by_lag[p] is the full packet sent p steps ago (entries may be partial for large p).
  const int P = L.d_hi + L.r_hi;
  std::vector<double> out;
  for (int p = 1; p <= P; ++p) {
    const int width = block_width(L, p);
    for (int i = 0; i < width; ++i) out.push_back(packets_by_lag[static_cast<std::size_t>(p)](i));
  }
  return Eigen::Map<Eigen::VectorXd>(out.data(), static_cast<Eigen::Index>(out.size()));
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

}  // namespace

double relative_gap(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-12});
}

std::vector<std::string> tiny_violations(const ProblemSpec& spec, const TinyBounds& b) {
  std::vector<std::string> out;
  if (spec.plant.n() > b.max_n) out.push_back("n=" + std::to_string(spec.plant.n()) + " > " + std::to_string(b.max_n));
  if (spec.plant.m() > b.max_m) out.push_back("m=" + std::to_string(spec.plant.m()) + " > " + std::to_string(b.max_m));
  if (spec.r_chain.hi() > b.max_r_hi)
    out.push_back("r_hi=" + std::to_string(spec.r_chain.hi()) + " > " + std::to_string(b.max_r_hi));
  if (spec.d_chain.hi() > b.max_d_hi)
    out.push_back("d_hi=" + std::to_string(spec.d_chain.hi()) + " > " + std::to_string(b.max_d_hi));
  if (spec.cost.N - spec.cost.k0 > b.max_steps)
    out.push_back("N-k0=" + std::to_string(spec.cost.N - spec.cost.k0) + " > " + std::to_string(b.max_steps));
  return out;
}

double count_realizations(const ProblemSpec& spec, const InitialCondition& init) {
  const int k0 = spec.cost.k0, N = spec.cost.N;
  const int d_steps = (N + spec.d_chain.hi()) - (k0 - 1 - init.r0);
  return count_paths(spec.d_chain, init.d_init, d_steps) * count_paths(spec.r_chain, init.r0, N - k0);
}

std::vector<WeightedRealization> enumerate_realizations(const ProblemSpec& spec, const InitialCondition& init) {
  validate_initial(spec, init);
  require_enumerable(spec, init);
  const int k0 = spec.cost.k0, N = spec.cost.N;
  const int d_start = k0 - 1 - init.r0;
  const int d_steps = N + spec.d_chain.hi() - d_start;

  std::vector<std::pair<std::vector<int>, double>> d_paths, r_paths;
  std::vector<int> seed{init.d_init};
  walk(spec.d_chain, seed, 1.0, d_steps, [&](const std::vector<int>& p, double w) { d_paths.emplace_back(p, w); });
  seed = {init.r0};
  walk(spec.r_chain, seed, 1.0, N - k0, [&](const std::vector<int>& p, double w) { r_paths.emplace_back(p, w); });

  std::vector<WeightedRealization> out;
  out.reserve(d_paths.size() * r_paths.size());
  for (const auto& [r, wr] : r_paths)
    for (const auto& [d, wd] : d_paths) {
      WeightedRealization w;
      w.path.k0 = k0;
      w.path.N = N;
      w.path.d_start = d_start;
      w.path.r = r;
      w.path.d = d;
      w.probability = wr * wd;
      out.push_back(std::move(w));
    }
  return out;
}

double enumerate_expected_cost(const ProblemSpec& spec, const GainSchedule& schedule, const InitialCondition& init) {
  const auto paths = enumerate_realizations(spec, init);
  const auto pre = resolved_pre_history(spec, init);
  double total = 0.0;
  for (const auto& w : paths) {
    Controller controller(schedule, spec.layout(), pre, spec.cost.k0);
    total += w.probability * run_realization(spec, controller, init, w.path).J;
  }
  return total;
}

OpenLoopQuadratic open_loop_quadratic(const ProblemSpec& spec, const InitialCondition& init) {
  const auto paths = enumerate_realizations(spec, init);
  const PacketLayout L = spec.layout();
  const auto pre = resolved_pre_history(spec, init);
  const int k0 = spec.cost.k0, N = spec.cost.N, n = spec.plant.n(), m = L.m;
  const int P = L.history_depth();
  const int dz = (N - k0 + 1) * L.m_tilde;
  const Eigen::MatrixXd& A = spec.plant.A;
  const Eigen::MatrixXd& B = spec.plant.B;

  OpenLoopQuadratic q{Eigen::MatrixXd::Zero(dz, dz), Eigen::VectorXd::Zero(dz), 0.0};

  // Affine map z -> value: lin * z + off.
  struct Affine {
    Eigen::MatrixXd lin;
    Eigen::VectorXd off;
  };
  auto component = [&](int j, int delta) -> Affine {
    const int row = L.component_offset(delta);
    Affine a{Eigen::MatrixXd::Zero(m, dz), Eigen::VectorXd::Zero(m)};
    if (j >= k0)
      a.lin.block(0, (j - k0) * L.m_tilde + row, m, m).setIdentity();
    else
      a.off = pre.at(static_cast<std::size_t>(j - (k0 - P))).segment(row, m);
    return a;
  };
  auto charge = [&](const Affine& a, const Eigen::MatrixXd& W, double w) {
    const Eigen::MatrixXd WL = W * a.lin;
    q.H += w * (a.lin.transpose() * WL);
    q.h += w * (WL.transpose() * a.off);
    q.c += w * quad(a.off, W);
  };

  for (const auto& wr : paths) {
    const DelayRealization& path = wr.path;
    Affine x{Eigen::MatrixXd::Zero(n, dz), init.x0};
    auto advance = [&](int t) {
      const Affine u = component(t - path.d_at(t), path.d_at(t));
      x.lin = A * x.lin + B * u.lin;
      x.off = A * x.off + B * u.off;
    };
    for (int t = k0 - init.r0; t < k0; ++t) advance(t);
    for (int k = k0; k <= N; ++k) {
      charge(x, spec.cost.Q, wr.probability);
      for (int p = L.d_lo; p <= L.d_hi; ++p)
        if (path.d_at(k + p) == p) charge(component(k, p), spec.cost.R, wr.probability);
      advance(k);
    }
    charge(x, spec.cost.Q_bar, wr.probability);
  }
  q.H = symmetrized(q.H);
  return q;
}

OpenLoopResult joint_open_loop_min(const ProblemSpec& spec, const InitialCondition& init) {
  const OpenLoopQuadratic q = open_loop_quadratic(spec, init);
  const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(q.H);
  OpenLoopResult out;
  out.z = -cod.solve(q.h);
  out.value = q.eval(out.z);
  return out;
}

CostDecomposition check_cost_identity(const ProblemSpec& spec, const SimTrace& trace) {
  const PacketLayout L = spec.layout();
  const int k0 = spec.cost.k0, N = spec.cost.N;
  const DelayRealization& d = trace.delays;
  const Eigen::MatrixXd& R = spec.cost.R;

  CostDecomposition c;
  for (const StepRecord& s : trace.steps) c.state_cost += quad(s.x, spec.cost.Q);
  c.state_cost += trace.terminal_cost;

  auto charged = [&](int j, int p) {
    if (d.d_at(j + p) != p) return 0.0;
    return quad(trace.packets.at(j).segment(L.component_offset(p), L.m), R);
  };
  for (int p = L.d_lo; p <= L.d_hi; ++p) {
    for (int j = k0; j <= N; ++j) c.U1 += charged(j, p);
    for (int j = k0 - p; j <= k0 - 1; ++j) c.U2 += charged(j, p);
    for (int j = N + 1 - p; j <= N; ++j) c.U3 += charged(j, p);
  }
  c.J = trace.J;
  c.J_tilde = trace.J_tilde;
  c.gap = relative_gap(c.J_tilde, c.J + c.U2 - c.U3);
  return c;
}

KernelComparison check_kernel_expectations(const ProblemSpec& spec, const ModeTable& k_next, int k, int r,
                                           int d_tilde, const Eigen::VectorXd& x_hat, const Eigen::VectorXd& u_tilde) {
  require_enumerable(spec, InitialCondition{Eigen::VectorXd::Zero(spec.plant.n()), r, d_tilde, {}});
  const PacketLayout L = spec.layout();
  const int n = spec.plant.n();
  const int P = L.history_depth();
  const Eigen::MatrixXd& A = spec.plant.A;
  const Eigen::MatrixXd& B = spec.plant.B;
  if (x_hat.size() != n + L.m_hat || u_tilde.size() != L.m_tilde) throw WidthError("probe vectors have the wrong width");

  const Eigen::VectorXd x_tilde = x_hat.head(n);
  const PartialLog log = unstack_history(L, x_hat.tail(L.m_hat));
  auto packet_part = [&](int lag, int delta) -> Eigen::VectorXd {
    if (lag == 0) return u_tilde.segment((L.d_hi - delta) * L.m, L.m);
    return log.get(lag, delta);
  };

  KernelComparison out;
  out.k = k;
  out.r = r;
  out.d_tilde = d_tilde;

  // Times relative to k; d path from -1-r to d_hi.
  const int t0 = -1 - r;
  std::vector<int> seed{d_tilde};
  std::vector<std::pair<std::vector<int>, double>> d_paths;
  walk(spec.d_chain, seed, 1.0, L.d_hi - t0, [&](const std::vector<int>& p, double w) { d_paths.emplace_back(p, w); });

  for (const auto& [dp, wd] : d_paths) {
    auto d_at = [&, &dp = dp](int t) { return dp[static_cast<std::size_t>(t - t0)]; };

    for (int p = L.d_lo; p <= L.d_hi; ++p)
      if (d_at(p) == p) out.e1_enum += wd * quad(u_tilde.segment((L.d_hi - p) * L.m, L.m), spec.cost.R);

    // Plant from x_{-r} = x~ up to x_1.
    std::vector<Eigen::VectorXd> xs{x_tilde};
    for (int t = -r; t <= 0; ++t) {
      const int delta = d_at(t);
      xs.push_back(A * xs.back() + B * packet_part(-(t - delta), delta));
    }
    const Eigen::VectorXd& x_now = xs[static_cast<std::size_t>(r)];
    out.e2_enum += wd * quad(x_now, spec.cost.Q);

    // Next history: lag 1 is u~, lag p >= 2 is today's lag p-1.
    std::vector<Eigen::VectorXd> next_packets(static_cast<std::size_t>(P + 1));
    for (int p = 1; p <= P; ++p) {
      Eigen::VectorXd full = Eigen::VectorXd::Zero(L.m_tilde);
      for (int delta = L.d_hi; delta >= L.d_lo; --delta) {
        const int at = (L.d_hi - delta) * L.m;
        if (at + L.m > block_width(L, p)) break;
        full.segment(at, L.m) = packet_part(p - 1, delta);
      }
      next_packets[static_cast<std::size_t>(p)] = full;
    }
    const Eigen::VectorXd u_hat_next = restack_history(L, next_packets);

    const int rho_max = std::min(L.r_hi, r + 1);
    for (int rho = L.r_lo; rho <= rho_max; ++rho) {
      const double psi = spec.r_chain.one_step(r, rho);
      if (psi == 0.0) continue;
      Eigen::VectorXd x_hat_next(n + L.m_hat);
      x_hat_next << xs[static_cast<std::size_t>(r + 1 - rho)], u_hat_next;
      out.e3_enum += psi * wd * quad(x_hat_next, k_next.at(rho, d_at(-rho)));
    }
  }

  const KernelBuilder builder(spec);
  const E3Kernels e3 = builder.e3_kernels(k_next, r, d_tilde);
  out.e1_closed = quad(u_tilde, builder.r_hat(r, d_tilde));
  out.e2_closed = quad(x_hat, builder.q_hat(spec.cost.Q, r, d_tilde));
  out.e3_closed = quad(x_hat, e3.H_hat) + 2.0 * u_tilde.dot(e3.M_hat * x_hat) + quad(u_tilde, e3.O_hat);
  out.max_relative_gap = std::max({relative_gap(out.e1_closed, out.e1_enum), relative_gap(out.e2_closed, out.e2_enum),
                                   relative_gap(out.e3_closed, out.e3_enum)});
  return out;
}

bool VerifyReport::all_passed() const {
  return std::all_of(lines.begin(), lines.end(), [](const VerifyLine& l) { return l.passed; });
}

namespace {

Eigen::VectorXd random_vector(std::mt19937_64& rng, Eigen::Index size) {
  Eigen::VectorXd v(size);
  for (Eigen::Index i = 0; i < size; ++i) v(i) = 2.0 * unit_uniform(rng) - 1.0;
  return v;
}

// Upper bound check: passes iff measured <= tol.
VerifyLine at_most(std::string name, double measured, double tol, std::string detail = {}) {
  return {std::move(name), measured <= tol, measured, tol, std::move(detail)};
}

}  // namespace

VerifyReport verify(const ProblemSpec& spec, const InitialCondition& init, const RunSettings& run, VerifyLevel level) {
  validate_initial(spec, init);
  if (level == VerifyLevel::Exhaustive) require_enumerable(spec, init);

  VerifyReport report;
  const PacketLayout L = spec.layout();
  std::mt19937_64 rng(run.seed);

  // Chain kernels.
  double row_gap = 0.0, ck_gap = 0.0;
  for (const DelayChain* chain : {&spec.r_chain, &spec.d_chain}) {
    for (int s = 0; s <= 8; ++s) {
      const Eigen::MatrixXd Pn = chain->power(s);
      row_gap = std::max(row_gap, (Pn.rowwise().sum().array() - 1.0).abs().maxCoeff());
    }
    for (int a = 0; a <= 4; ++a)
      for (int b = 0; b <= 4; ++b)
        ck_gap = std::max(ck_gap, (chain->power(a + b) - chain->power(a) * chain->power(b)).cwiseAbs().maxCoeff());
  }
  report.lines.push_back(at_most("chain_row_sums", row_gap, 1e-10));
  report.lines.push_back(at_most("chapman_kolmogorov", ck_gap, 1e-10));

  const GainSchedule schedule = synthesize(spec);
  const KernelBuilder builder(spec);
  const int k0 = spec.cost.k0, N = spec.cost.N;

  double asym = 0.0, min_eig = std::numeric_limits<double>::infinity(), max_cond = 0.0, tail = 0.0;
  double cos_gap = 0.0, grad = 0.0;
  for (int k = k0; k <= N + 1; ++k)
    for (int r = L.r_lo; r <= L.r_hi; ++r)
      for (int d = L.d_lo; d <= L.d_hi; ++d) {
        const Eigen::MatrixXd& K = schedule.value(k, r, d);
        asym = std::max(asym, K.size() ? (K - K.transpose()).cwiseAbs().maxCoeff() : 0.0);
        min_eig = std::min(min_eig, min_symmetric_eigenvalue(K));
        if (k > N) continue;
        const Eigen::MatrixXd& G = schedule.gain(k, r, d);
        for (int p : tail_components(L, k, N))
          tail = std::max(tail, G.middleRows(L.component_offset(p), L.m).norm());

        const ExpectationKernels kern = builder.kernels(schedule.values_at(k + 1), spec.cost.Q, r, d);
        Eigen::VectorXd x_hat = random_vector(rng, K.rows());
        x_hat /= std::max(1.0, x_hat.norm());
        const Eigen::MatrixXd S = kern.O_hat + kern.R_hat;
        const Eigen::VectorXd linear = kern.M_hat * x_hat;
        auto f = [&](const Eigen::VectorXd& u) { return quad(u, S) + 2.0 * u.dot(linear); };
        const Eigen::VectorXd u_star = -G * x_hat;
        const double v = quad(x_hat, K);
        cos_gap = std::max(cos_gap, std::abs(f(u_star) + quad(x_hat, kern.H_hat + kern.Q_hat) - v) / std::max(1.0, std::abs(v)));
        Eigen::VectorXd g(u_star.size());
        const double h = 1e-6;
        for (Eigen::Index i = 0; i < g.size(); ++i) {
          Eigen::VectorXd up = u_star, dn = u_star;
          up(i) += h;
          dn(i) -= h;
          g(i) = (f(up) - f(dn)) / (2.0 * h);
        }
        grad = std::max(grad, g.norm() / (1.0 + x_hat.norm()));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(symmetrized(S), Eigen::EigenvaluesOnly);
        max_cond = std::max(max_cond, eig.eigenvalues().maxCoeff() / eig.eigenvalues().minCoeff());
      }
  report.lines.push_back(at_most("value_symmetry", asym, 1e-9));
  report.lines.push_back({"value_psd", min_eig >= -1e-8, min_eig, -1e-8, "smallest eigenvalue over all K"});
  report.lines.push_back(at_most("gain_condition", max_cond, kMaxGainCondition));
  report.lines.push_back(at_most("tail_gain_rows", tail, 1e-9));
  report.lines.push_back(at_most("completion_of_squares", cos_gap, 1e-9));
  report.lines.push_back(at_most("first_order_optimality", grad, 1e-8));

  // Sampled closed loop.
  const int episodes = std::max(2, run.episodes);
  const MonteCarloSummary mc = run_monte_carlo(spec, schedule, init, episodes, run.seed);
  // Deterministic chains give stderr 0; allow round-off on top of 3 stderr.
  const double mc_tol = 3.0 * mc.stderr_J + 1e-9 * std::max(1.0, std::abs(mc.v_k0));
  report.lines.push_back(at_most("mc_value_agreement", std::abs(mc.mean_J - mc.v_k0), mc_tol,
                                 "mean_J=" + fmt(mc.mean_J) + " v_k0=" + fmt(mc.v_k0)));

  double identity = 0.0;
  std::mt19937_64 seeds(run.seed ^ 0x9e3779b97f4a7c15ULL);
  for (int e = 0; e < std::min(episodes, 100); ++e)
    identity = std::max(identity, check_cost_identity(spec, run_episode(spec, schedule, init, seeds())).gap);
  report.lines.push_back(at_most("cost_identity", identity, 1e-10));

  const bool same_trace = [&] {
    const SimTrace a = run_episode(spec, schedule, init, run.seed);
    const SimTrace b = run_episode(spec, schedule, init, run.seed);
    if (a.J != b.J || a.J_tilde != b.J_tilde || a.steps.size() != b.steps.size()) return false;
    for (std::size_t i = 0; i < a.steps.size(); ++i)
      if (a.steps[i].x != b.steps[i].x || a.steps[i].u != b.steps[i].u || a.steps[i].d != b.steps[i].d ||
          a.steps[i].r != b.steps[i].r)
        return false;
    return true;
  }();
  const bool same_schedule = schedule_to_string(schedule) == schedule_to_string(synthesize(spec));
  report.lines.push_back({"determinism", same_trace && same_schedule, same_trace && same_schedule ? 0.0 : 1.0, 0.0,
                          "trace and schedule bytes"});

  if (level == VerifyLevel::Quick) return report;

  const auto paths = enumerate_realizations(spec, init);
  double total = 0.0;
  for (const auto& w : paths) total += w.probability;
  report.lines.push_back(at_most("enumeration_probability_sum", std::abs(total - 1.0), 1e-12,
                                 std::to_string(paths.size()) + " sequences"));

  const double expected = enumerate_expected_cost(spec, schedule, init);
  report.lines.push_back(at_most("dp_value_equality", relative_gap(expected, mc.v_k0), 1e-8,
                                 "E[J]=" + fmt(expected) + " v_k0=" + fmt(mc.v_k0)));

  const OpenLoopResult open = joint_open_loop_min(spec, init);
  report.lines.push_back(at_most("open_loop_ordering", mc.v_k0 - open.value, 1e-9,
                                 "v_k0=" + fmt(mc.v_k0) + " open_loop=" + fmt(open.value)));

  double kernel_gap = 0.0;
  for (int k = k0; k <= N; ++k)
    for (int r = L.r_lo; r <= L.r_hi; ++r)
      for (int d = L.d_lo; d <= L.d_hi; ++d) {
        const Eigen::VectorXd x_hat = random_vector(rng, spec.plant.n() + L.m_hat);
        const Eigen::VectorXd u = random_vector(rng, L.m_tilde);
        kernel_gap = std::max(
            kernel_gap, check_kernel_expectations(spec, schedule.values_at(k + 1), k, r, d, x_hat, u).max_relative_gap);
      }
  report.lines.push_back(at_most("kernel_expectations", kernel_gap, 1e-10));

  report.lines.push_back(at_most("mc_vs_enumeration", std::abs(mc.mean_J - expected),
                                 3.0 * mc.stderr_J + 1e-9 * std::max(1.0, std::abs(expected))));
  return report;
}

void write_report(std::ostream& out, const VerifyReport& report) {
  for (const VerifyLine& l : report.lines) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "measured=%.6e tol=%.3e", l.measured, l.tolerance);
    out << (l.passed ? "PASS " : "FAIL ") << l.name << ' ' << buf;
    if (!l.detail.empty()) out << ' ' << l.detail;
    out << '\n';
  }
  out << (report.all_passed() ? "all checks passed" : "some checks FAILED") << '\n';
}

}  // namespace ncs
