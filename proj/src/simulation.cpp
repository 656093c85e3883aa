#include "ncs/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <ostream>
#include <thread>

#include "ncs/errors.hpp"

namespace ncs {

namespace {

Eigen::VectorXd component(const Eigen::VectorXd& packet, const PacketLayout& layout, int delay) {
  return packet.segment(layout.component_offset(delay), layout.m);
}

double quad(const Eigen::VectorXd& v, const Eigen::MatrixXd& W) { return v.dot(W * v); }

void put(std::ostream& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}

}  // namespace

int DelayRealization::r_at(int k) const {
  if (k < k0 || k > N || k - k0 >= static_cast<int>(r.size()))
    throw IndexError("no sensor age recorded for k=" + std::to_string(k));
  return r[static_cast<std::size_t>(k - k0)];
}

int DelayRealization::d_at(int t) const {
  if (t < d_start || t > d_end()) throw IndexError("no actuator delay recorded for t=" + std::to_string(t));
  return d[static_cast<std::size_t>(t - d_start)];
}

void check_realization(const ProblemSpec& spec, const DelayRealization& path) {
  auto check = [](const DelayChain& chain, const std::vector<int>& seq, int t0, const char* name) {
    for (std::size_t i = 0; i < seq.size(); ++i) {
      const int t = t0 + static_cast<int>(i);
      if (!chain.contains(seq[i]))
        throw ChainViolation(std::string(name) + "_" + std::to_string(t) + " = " + std::to_string(seq[i]) +
                             " outside the chain bounds");
      if (i > 0 && seq[i] > seq[i - 1] + 1)
        throw ChainViolation(std::string(name) + " grows from " + std::to_string(seq[i - 1]) + " to " +
                             std::to_string(seq[i]) + " at t=" + std::to_string(t));
    }
  };
  if (static_cast<int>(path.r.size()) != path.N - path.k0 + 1) throw ChainViolation("r path does not cover k0..N");
  check(spec.r_chain, path.r, path.k0, "r");
  check(spec.d_chain, path.d, path.d_start, "d");
  if (path.d_start != path.k0 - 1 - path.r.front() || path.d_end() < path.N + spec.d_chain.hi())
    throw ChainViolation("d path does not cover k0-1-r0..N+d_hi");
}

DelayRealization sample_realization(const ProblemSpec& spec, const InitialCondition& init, std::mt19937_64& rng) {
  DelayRealization path;
  path.k0 = spec.cost.k0;
  path.N = spec.cost.N;
  path.d_start = path.k0 - 1 - init.r0;
  const int d_last = path.N + spec.d_chain.hi();
  path.d.reserve(static_cast<std::size_t>(d_last - path.d_start + 1));
  path.d.push_back(init.d_init);
  for (int t = path.d_start + 1; t <= d_last; ++t) path.d.push_back(spec.d_chain.sample_next(path.d.back(), rng));
  path.r.push_back(init.r0);
  for (int k = path.k0 + 1; k <= path.N; ++k) path.r.push_back(spec.r_chain.sample_next(path.r.back(), rng));
  check_realization(spec, path);
  return path;
}

PacketLog::PacketLog(int first, std::vector<Eigen::VectorXd> history) : first_(first), packets_(std::move(history)) {}

const Eigen::VectorXd& PacketLog::at(int j) const {
  if (!has(j)) throw LogGap("no packet logged for send time " + std::to_string(j));
  return packets_[static_cast<std::size_t>(j - first_)];
}

Controller::Controller(const GainSchedule& schedule, const PacketLayout& layout,
                       const std::vector<Eigen::VectorXd>& pre_history, int k0)
    : schedule_(schedule), layout_(layout), log_(k0 - layout.history_depth(), pre_history) {}

Eigen::VectorXd Controller::act(const ControllerInput& input) {
  if (input.k != log_.last() + 1) throw LogGap("controller called out of order at k=" + std::to_string(input.k));
  const int P = layout_.history_depth();
  std::vector<Eigen::VectorXd> recent;
  recent.reserve(static_cast<std::size_t>(P));
  for (int p = 1; p <= P; ++p) recent.push_back(log_.at(input.k - p));
  const Eigen::VectorXd u_hat = stack_history(recent, layout_);

  last_x_hat_.resize(input.x_tilde.size() + u_hat.size());
  last_x_hat_ << input.x_tilde, u_hat;
  Eigen::VectorXd packet = -schedule_.gain(input.k, input.r, input.d_tilde) * last_x_hat_;
  log_.append(packet);
  return packet;
}

SimTrace run_realization(const ProblemSpec& spec, PacketPolicy& policy, const InitialCondition& init,
                         const DelayRealization& path) {
  validate_initial(spec, init);
  check_realization(spec, path);
  if (path.k0 != spec.cost.k0 || path.N != spec.cost.N) throw ChainViolation("realization horizon differs from cost");
  if (path.r.front() != init.r0 || path.d.front() != init.d_init)
    throw ChainViolation("realization is not rooted at the initial condition");

  const PacketLayout layout = spec.layout();
  const Eigen::MatrixXd& A = spec.plant.A;
  const Eigen::MatrixXd& B = spec.plant.B;
  const Eigen::MatrixXd& Q = spec.cost.Q;
  const Eigen::MatrixXd& R = spec.cost.R;
  const int k0 = spec.cost.k0;
  const int N = spec.cost.N;

  SimTrace trace;
  trace.delays = path;
  trace.packets = PacketLog(k0 - layout.history_depth(), resolved_pre_history(spec, init));

  auto applied = [&](int t) { return component(trace.packets.at(t - path.d_at(t)), layout, path.d_at(t)); };

  // Plant history from the newest measurement held at k0 onward.
  const int x_first = k0 - init.r0;
  std::vector<Eigen::VectorXd> xs{init.x0};
  for (int t = x_first; t < k0; ++t) xs.push_back(A * xs.back() + B * applied(t));

  for (int k = k0; k <= N; ++k) {
    const int r = path.r_at(k);
    ControllerInput input{k, r, xs[static_cast<std::size_t>(k - r - x_first)], path.d_at(k - 1 - r)};
    Eigen::VectorXd packet = policy.act(input);
    if (packet.size() != layout.m_tilde) throw WidthError("policy returned a packet of the wrong width");
    trace.packets.append(packet);

    StepRecord rec;
    rec.k = k;
    rec.x = xs.back();
    rec.r = r;
    rec.d = path.d_at(k);
    rec.applied_from = k - rec.d;
    rec.u = applied(k);
    rec.u_tilde = std::move(packet);
    rec.stage_cost = quad(rec.x, Q) + quad(rec.u, R);
    trace.J_tilde += rec.stage_cost;
    trace.J += quad(rec.x, Q);
    for (int p = layout.d_lo; p <= layout.d_hi; ++p)
      if (path.d_at(k + p) == p) trace.J += quad(component(rec.u_tilde, layout, p), R);

    xs.push_back(A * rec.x + B * rec.u);
    trace.steps.push_back(std::move(rec));
  }
  trace.x_final = xs.back();
  trace.terminal_cost = quad(trace.x_final, spec.cost.Q_bar);
  trace.J_tilde += trace.terminal_cost;
  trace.J += trace.terminal_cost;
  return trace;
}

SimTrace run_episode(const ProblemSpec& spec, const GainSchedule& schedule, const InitialCondition& init,
                     std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const DelayRealization path = sample_realization(spec, init, rng);
  Controller controller(schedule, spec.layout(), resolved_pre_history(spec, init), spec.cost.k0);
  return run_realization(spec, controller, init, path);
}

Eigen::VectorXd initial_extended_state(const ProblemSpec& spec, const InitialCondition& init) {
  validate_initial(spec, init);
  const PacketLayout layout = spec.layout();
  const std::vector<Eigen::VectorXd> pre = resolved_pre_history(spec, init);
  const int P = layout.history_depth();
  std::vector<Eigen::VectorXd> recent;
  for (int p = 1; p <= P; ++p) recent.push_back(pre[static_cast<std::size_t>(P - p)]);
  const Eigen::VectorXd u_hat = stack_history(recent, layout);
  Eigen::VectorXd x_hat(init.x0.size() + u_hat.size());
  x_hat << init.x0, u_hat;
  return x_hat;
}

double predicted_value(const ProblemSpec& spec, const GainSchedule& schedule, const InitialCondition& init) {
  const Eigen::VectorXd x_hat = initial_extended_state(spec, init);
  return x_hat.dot(schedule.value(spec.cost.k0, init.r0, init.d_init) * x_hat);
}

std::vector<std::uint64_t> episode_seeds(std::uint64_t seed, int count) {
  std::mt19937_64 master(seed);
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(std::max(count, 0)));
  for (auto& s : seeds) s = master();
  return seeds;
}

MonteCarloSummary run_monte_carlo(const ProblemSpec& spec, const GainSchedule& schedule, const InitialCondition& init,
                                  int episodes, std::uint64_t seed, unsigned threads) {
  if (episodes < 2) throw OutOfRange("Monte-Carlo needs at least 2 episodes, got " + std::to_string(episodes));
  if (schedule.k0() != spec.cost.k0 || schedule.N() != spec.cost.N)
    throw ScheduleGap("schedule horizon does not cover k0..N of the problem");

  const std::vector<std::uint64_t> seeds = episode_seeds(seed, episodes);

  std::vector<double> J(seeds.size()), J_tilde(seeds.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(episodes));

  std::vector<std::exception_ptr> failures(threads);
  auto work = [&](unsigned w) {
    try {
      for (std::size_t e = w; e < seeds.size(); e += threads) {
        const SimTrace trace = run_episode(spec, schedule, init, seeds[e]);
        J[e] = trace.J;
        J_tilde[e] = trace.J_tilde;
      }
    } catch (...) {
      failures[w] = std::current_exception();
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);

  auto stats = [](const std::vector<double>& v, double& mean, double& se) {
    double sum = 0.0;
    for (double x : v) sum += x;
    mean = sum / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  };

  MonteCarloSummary out;
  stats(J, out.mean_J, out.stderr_J);
  stats(J_tilde, out.mean_J_tilde, out.stderr_J_tilde);
  out.v_k0 = predicted_value(spec, schedule, init);
  out.episodes = episodes;
  out.seed = seed;
  return out;
}

void write_trace_csv(std::ostream& out, const SimTrace& trace) {
  const std::size_t n = trace.steps.empty() ? 0 : static_cast<std::size_t>(trace.steps.front().x.size());
  const std::size_t m = trace.steps.empty() ? 0 : static_cast<std::size_t>(trace.steps.front().u.size());
  out << "k";
  for (std::size_t i = 0; i < n; ++i) out << ",x" << i;
  for (std::size_t i = 0; i < m; ++i) out << ",u" << i;
  out << ",r,d,stage_cost\n";
  for (const StepRecord& s : trace.steps) {
    out << s.k;
    for (Eigen::Index i = 0; i < s.x.size(); ++i) {
      out << ',';
      put(out, s.x(i));
    }
    for (Eigen::Index i = 0; i < s.u.size(); ++i) {
      out << ',';
      put(out, s.u(i));
    }
    out << ',' << s.r << ',' << s.d << ',';
    put(out, s.stage_cost);
    out << '\n';
  }
}

void save_trace_csv(const std::string& path, const SimTrace& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_trace_csv(out, trace);
  if (!out) throw IoError("failed writing '" + path + "'");
}

void write_summary(std::ostream& out, const MonteCarloSummary& s) {
  out << "mean_J ";
  put(out, s.mean_J);
  out << "\nmean_Jtilde ";
  put(out, s.mean_J_tilde);
  out << "\nstderr_J ";
  put(out, s.stderr_J);
  out << "\nstderr_Jtilde ";
  put(out, s.stderr_J_tilde);
  out << "\nv_k0 ";
  put(out, s.v_k0);
  out << "\nepisodes " << s.episodes << "\nseed " << s.seed << '\n';
}

}  // namespace ncs
