#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ncs/problem.hpp"

namespace ncs {

struct ChainConfig {
  int lo = 0;
  int hi = 0;
  Eigen::MatrixXd step;
};

/// Config fields as read, before any semantic check.
struct RawConfig {
  PlantModel plant;
  CostSpec cost;
  ChainConfig r_chain;
  ChainConfig d_chain;
  InitialCondition init;
  RunSettings run;
};

struct Config {
  ProblemSpec spec;
  InitialCondition init;
  RunSettings run;
};

/// JSON with sections plant {A, B}, cost {Q, Q_bar, R, k0, N},
/// r_chain / d_chain {lo, hi, step}, init {x0, r0, d_init, pre_history?}
/// and run {episodes?, seed?}. Matrices are lists of rows. Throws
/// FormatError naming the offending field path.
RawConfig parse_raw_config(const std::string& text, const std::string& origin = "<config>");

/// Every semantic issue as "Kind: message", in a stable order.
std::vector<std::string> audit_config(const RawConfig& raw);

/// Throws the error of the first audit issue.
Config build_config(const RawConfig& raw);

Config parse_config(const std::string& text, const std::string& origin = "<config>");
/// Throws IoError when the file cannot be read.
std::string read_text_file(const std::string& path);
Config load_config(const std::string& path);

}  // namespace ncs
