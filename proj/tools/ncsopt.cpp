// ncsopt: validate a problem config, synthesize its gain schedule, simulate
// the closed loop and run the oracle checks.
//
// Exit codes: 0 success, 1 validation or verification failure, 2 I/O or
// format error.

#include <cstdio>
#include <iostream>
#include <limits>
#include <string>

#include <CLI11.hpp>

#include "ncs/config.hpp"
#include "ncs/errors.hpp"
#include "ncs/oracle.hpp"
#include "ncs/schedule_io.hpp"
#include "ncs/simulation.hpp"
#include "ncs/synthesis.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kIoError = 2;

int cmd_validate(const std::string& path) {
  const ncs::RawConfig raw = ncs::parse_raw_config(ncs::read_text_file(path), path);
  const auto issues = ncs::audit_config(raw);
  if (issues.empty()) {
    std::cout << "ok\n";
    return kOk;
  }
  for (const auto& issue : issues) std::cout << path << ": " << issue << '\n';
  return kFailed;
}

int cmd_synthesize(const std::string& path, const std::string& out) {
  const ncs::Config cfg = ncs::load_config(path);
  const ncs::GainSchedule schedule = ncs::synthesize(cfg.spec);
  ncs::save_schedule(out, schedule);
  std::cout << "spec_hash " << ncs::hash_hex(schedule.spec_hash()) << '\n';
  for (int k = schedule.k0(); k <= schedule.N(); ++k) {
    std::printf("k %d max_condition %.6e\n", k, schedule.max_condition(k));
  }
  std::cout << "wrote " << out << '\n';
  return kOk;
}

int cmd_simulate(const std::string& path, const std::string& gains, int episodes, long long seed_flag,
                 const std::string& trace_path) {
  const ncs::Config cfg = ncs::load_config(path);
  const ncs::GainSchedule schedule = ncs::load_schedule(gains);
  ncs::check_schedule_matches(schedule, cfg.spec);

  const int m = episodes > 0 ? episodes : cfg.run.episodes;
  const std::uint64_t seed = seed_flag >= 0 ? static_cast<std::uint64_t>(seed_flag) : cfg.run.seed;
  const auto seeds = ncs::episode_seeds(seed, 1);

  if (!trace_path.empty()) ncs::save_trace_csv(trace_path, ncs::run_episode(cfg.spec, schedule, cfg.init, seeds[0]));

  ncs::MonteCarloSummary summary;
  if (m >= 2) {
    summary = ncs::run_monte_carlo(cfg.spec, schedule, cfg.init, m, seed);
  } else {
    const ncs::SimTrace trace = ncs::run_episode(cfg.spec, schedule, cfg.init, seeds[0]);
    summary.mean_J = trace.J;
    summary.mean_J_tilde = trace.J_tilde;
    summary.stderr_J = summary.stderr_J_tilde = std::numeric_limits<double>::quiet_NaN();
    summary.v_k0 = ncs::predicted_value(cfg.spec, schedule, cfg.init);
    summary.episodes = 1;
    summary.seed = seed;
  }
  ncs::write_summary(std::cout, summary);
  return kOk;
}

int cmd_verify(const std::string& path, const std::string& level) {
  const ncs::Config cfg = ncs::load_config(path);
  const auto lvl = level == "exhaustive" ? ncs::VerifyLevel::Exhaustive : ncs::VerifyLevel::Quick;
  const ncs::VerifyReport report = ncs::verify(cfg.spec, cfg.init, cfg.run, lvl);
  ncs::write_report(std::cout, report);
  return report.all_passed() ? kOk : kFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal gain scheduling for control loops with Markov sensor and actuator delays"};
  app.require_subcommand(1);

  std::string config, out, gains, trace, level = "quick";
  int episodes = 0;
  long long seed = -1;

  auto* validate = app.add_subcommand("validate", "Check a config against every load-time invariant");
  validate->add_option("config", config, "Problem config (JSON)")->required();

  auto* synth = app.add_subcommand("synthesize", "Run the backward recursion and write the gain schedule");
  synth->add_option("config", config, "Problem config (JSON)")->required();
  synth->add_option("-o,--out", out, "Output schedule file")->required();

  auto* sim = app.add_subcommand("simulate", "Monte-Carlo evaluation of the closed loop");
  sim->add_option("config", config, "Problem config (JSON)")->required();
  sim->add_option("-g,--gains", gains, "Schedule file written by synthesize")->required();
  sim->add_option("--episodes", episodes, "Episode count (default: run.episodes)")->check(CLI::PositiveNumber);
  sim->add_option("--seed", seed, "Master seed (default: run.seed)")->check(CLI::NonNegativeNumber);
  sim->add_option("--trace", trace, "Write the first episode as CSV");

  auto* ver = app.add_subcommand("verify", "Run the oracle property suite");
  ver->add_option("config", config, "Problem config (JSON)")->required();
  ver->add_option("--level", level, "quick | exhaustive")->check(CLI::IsMember({"quick", "exhaustive"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kIoError;
  }

  try {
    if (*validate) return cmd_validate(config);
    if (*synth) return cmd_synthesize(config, out);
    if (*sim) return cmd_simulate(config, gains, episodes, seed, trace);
    if (*ver) return cmd_verify(config, level);
  } catch (const ncs::FormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const ncs::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIoError;
  }
  return kFailed;
}
