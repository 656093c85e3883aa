#include "ncs/config.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ncs/errors.hpp"

namespace ncs {

namespace {

using nlohmann::json;

class Reader {
 public:
  explicit Reader(std::string origin) : origin_(std::move(origin)) {}

  [[noreturn]] void fail(const std::string& path, const std::string& what) const {
    throw FormatError(origin_ + ": " + path + ": " + what);
  }

  const json& field(const json& obj, const std::string& path, const char* key) const {
    if (!obj.is_object()) fail(path, "expected an object");
    const auto it = obj.find(key);
    if (it == obj.end()) fail(join(path, key), "missing required field");
    return *it;
  }

  const json* optional(const json& obj, const char* key) const {
    const auto it = obj.find(key);
    return it == obj.end() || it->is_null() ? nullptr : &*it;
  }

  double number(const json& v, const std::string& path) const {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
  }

  long long integer(const json& v, const std::string& path) const {
    if (!v.is_number_integer()) fail(path, "expected an integer");
    return v.get<long long>();
  }

  int small_int(const json& v, const std::string& path) const {
    const long long x = integer(v, path);
    if (x < -1000000000LL || x > 1000000000LL) fail(path, "integer out of range");
    return static_cast<int>(x);
  }

  Eigen::VectorXd vector(const json& v, const std::string& path) const {
    if (!v.is_array()) fail(path, "expected a list of numbers");
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = number(v[i], index(path, i));
    return out;
  }

  Eigen::MatrixXd matrix(const json& v, const std::string& path) const {
    if (!v.is_array()) fail(path, "expected a list of rows");
    if (v.empty()) return Eigen::MatrixXd(0, 0);
    std::size_t cols = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_array()) fail(index(path, i), "expected a row list");
      if (i == 0) cols = v[i].size();
      if (v[i].size() != cols) fail(index(path, i), "ragged row: " + std::to_string(v[i].size()) + " entries, expected " + std::to_string(cols));
    }
    Eigen::MatrixXd out(static_cast<Eigen::Index>(v.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < v.size(); ++i)
      for (std::size_t j = 0; j < cols; ++j)
        out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = number(v[i][j], index(index(path, i), j));
    return out;
  }

  static std::string join(const std::string& path, const char* key) { return path.empty() ? key : path + "." + key; }
  static std::string index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

 private:
  std::string origin_;
};

ChainConfig read_chain(const Reader& rd, const json& root, const char* name) {
  const json& c = rd.field(root, "", name);
  const std::string path = name;
  ChainConfig out;
  out.lo = rd.small_int(rd.field(c, path, "lo"), path + ".lo");
  out.hi = rd.small_int(rd.field(c, path, "hi"), path + ".hi");
  out.step = rd.matrix(rd.field(c, path, "step"), path + ".step");
  return out;
}

void add_chain_issues(std::vector<std::string>& issues, const char* name, const ChainConfig& c) {
  for (const ChainIssue& issue : audit_chain(c.lo, c.hi, c.step)) {
    const char* kind = issue.kind == ChainIssueKind::Shape    ? "ShapeError"
                       : issue.kind == ChainIssueKind::RowSum ? "RowSumError"
                                                              : "SupportError";
    issues.push_back(std::string(kind) + ": " + name + ".step: " + issue.message);
  }
}

[[noreturn]] void raise(const std::string& issue) {
  const auto colon = issue.find(": ");
  const std::string kind = issue.substr(0, colon);
  const std::string what = issue.substr(colon + 2);
  if (kind == "RowSumError") throw RowSumError(what);
  if (kind == "SupportError") throw SupportError(what);
  if (kind == "CostError") throw CostError(what);
  if (kind == "OutOfRange") throw OutOfRange(what);
  if (kind == "BoundsError") throw BoundsError(what);
  throw ShapeError(what);
}

}  // namespace

RawConfig parse_raw_config(const std::string& text, const std::string& origin) {
  Reader rd(origin);
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(origin + ": invalid JSON: " + e.what());
  }
  if (!root.is_object()) rd.fail("<root>", "expected an object");

  RawConfig raw;
  const json& plant = rd.field(root, "", "plant");
  raw.plant.A = rd.matrix(rd.field(plant, "plant", "A"), "plant.A");
  raw.plant.B = rd.matrix(rd.field(plant, "plant", "B"), "plant.B");
  if (const json* n = rd.optional(plant, "n"); n && rd.integer(*n, "plant.n") != raw.plant.A.rows())
    rd.fail("plant.n", "disagrees with the rows of A");
  if (const json* m = rd.optional(plant, "m"); m && rd.integer(*m, "plant.m") != raw.plant.B.cols())
    rd.fail("plant.m", "disagrees with the columns of B");

  const json& cost = rd.field(root, "", "cost");
  raw.cost.Q = rd.matrix(rd.field(cost, "cost", "Q"), "cost.Q");
  raw.cost.Q_bar = rd.matrix(rd.field(cost, "cost", "Q_bar"), "cost.Q_bar");
  raw.cost.R = rd.matrix(rd.field(cost, "cost", "R"), "cost.R");
  raw.cost.k0 = rd.small_int(rd.field(cost, "cost", "k0"), "cost.k0");
  raw.cost.N = rd.small_int(rd.field(cost, "cost", "N"), "cost.N");

  raw.r_chain = read_chain(rd, root, "r_chain");
  raw.d_chain = read_chain(rd, root, "d_chain");

  const json& init = rd.field(root, "", "init");
  raw.init.x0 = rd.vector(rd.field(init, "init", "x0"), "init.x0");
  raw.init.r0 = rd.small_int(rd.field(init, "init", "r0"), "init.r0");
  raw.init.d_init = rd.small_int(rd.field(init, "init", "d_init"), "init.d_init");
  if (const json* pre = rd.optional(init, "pre_history")) {
    if (!pre->is_array()) rd.fail("init.pre_history", "expected a list of packets");
    for (std::size_t i = 0; i < pre->size(); ++i)
      raw.init.pre_history.push_back(rd.vector((*pre)[i], Reader::index("init.pre_history", i)));
  }

  if (const json* run = rd.optional(root, "run")) {
    if (const json* e = rd.optional(*run, "episodes")) raw.run.episodes = rd.small_int(*e, "run.episodes");
    if (const json* s = rd.optional(*run, "seed")) {
      if (!s->is_number_unsigned() && !(s->is_number_integer() && s->get<long long>() >= 0))
        rd.fail("run.seed", "expected a non-negative integer");
      raw.run.seed = s->get<std::uint64_t>();
    }
  }
  return raw;
}

std::vector<std::string> audit_config(const RawConfig& raw) {
  std::vector<std::string> issues;
  for (auto& s : audit_plant(raw.plant)) issues.push_back(s);
  const bool plant_ok = issues.empty();
  if (plant_ok)
    for (auto& s : audit_cost(raw.cost, raw.plant.n(), raw.plant.m())) issues.push_back(s);
  add_chain_issues(issues, "r_chain", raw.r_chain);
  add_chain_issues(issues, "d_chain", raw.d_chain);
  if (raw.run.episodes < 1) issues.push_back("OutOfRange: run.episodes must be positive");
  if (!issues.empty()) return issues;

  // Initial-condition checks need a consistent problem.
  const DelayChain r_chain(raw.r_chain.lo, raw.r_chain.hi, raw.r_chain.step);
  const DelayChain d_chain(raw.d_chain.lo, raw.d_chain.hi, raw.d_chain.step);
  const ProblemSpec spec{raw.plant, raw.cost, r_chain, d_chain};
  try {
    validate_initial(spec, raw.init);
  } catch (const Error& e) {
    issues.push_back(e.what());
  }
  return issues;
}

Config build_config(const RawConfig& raw) {
  const auto issues = audit_config(raw);
  if (!issues.empty()) raise(issues.front());
  Config cfg{make_problem(raw.plant, raw.cost, DelayChain(raw.r_chain.lo, raw.r_chain.hi, raw.r_chain.step),
                         DelayChain(raw.d_chain.lo, raw.d_chain.hi, raw.d_chain.step)),
             raw.init, raw.run};
  return cfg;
}

Config parse_config(const std::string& text, const std::string& origin) {
  return build_config(parse_raw_config(text, origin));
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("failed reading '" + path + "'");
  return ss.str();
}

Config load_config(const std::string& path) { return parse_config(read_text_file(path), path); }

}  // namespace ncs
