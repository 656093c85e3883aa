#include "ncs/schedule_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "ncs/errors.hpp"

namespace ncs {

namespace {

constexpr const char* kMagic = "ncs-gain-schedule";

void put_number(std::ostream& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}

void put_matrix(std::ostream& out, const char* tag, int k, int r, int d, const Eigen::MatrixXd& M) {
  out << tag << ' ' << k << ' ' << r << ' ' << d << ' ' << M.rows() << ' ' << M.cols();
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      out << ' ';
      put_number(out, M(i, j));
    }
  out << '\n';
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  std::vector<std::string> next(const char* expected) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (line.empty() || line[0] == '#') continue;
      std::vector<std::string> words;
      std::istringstream ss(line);
      for (std::string w; ss >> w;) words.push_back(std::move(w));
      if (words.empty()) continue;
      if (expected != nullptr && words[0] != expected) fail(std::string("expected '") + expected + "', got '" + words[0] + "'");
      return words;
    }
    fail(std::string("unexpected end of file, expected '") + (expected ? expected : "record") + "'");
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw FormatError("schedule line " + std::to_string(line_no_) + ": " + what);
  }

  template <typename T>
  T number(const std::vector<std::string>& words, std::size_t at) const {
    if (at >= words.size()) fail("missing field " + std::to_string(at));
    const std::string& w = words[at];
    T value{};
    const auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), value);
    if (ec != std::errc() || ptr != w.data() + w.size()) fail("bad number '" + w + "'");
    return value;
  }

  std::uint64_t hex(const std::vector<std::string>& words, std::size_t at) const {
    if (at >= words.size()) fail("missing hash");
    const std::string& w = words[at];
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), value, 16);
    if (ec != std::errc() || ptr != w.data() + w.size()) fail("bad hash '" + w + "'");
    return value;
  }

 private:
  std::istream& in_;
  int line_no_ = 0;
};

}  // namespace

void write_schedule(std::ostream& out, const GainSchedule& s) {
  out << kMagic << ' ' << kScheduleFormatVersion << '\n';
  out << "spec_hash " << hash_hex(s.spec_hash()) << '\n';
  out << "dims " << s.n() << ' ' << s.m() << ' ' << s.m_tilde() << ' ' << s.m_hat() << '\n';
  out << "horizon " << s.k0() << ' ' << s.N() << '\n';
  out << "r_range " << s.r_lo() << ' ' << s.r_hi() << '\n';
  out << "d_range " << s.d_lo() << ' ' << s.d_hi() << '\n';
  for (int k = s.k0(); k <= s.N(); ++k) {
    out << "cond " << k << ' ';
    put_number(out, s.max_condition(k));
    out << '\n';
  }
  for (int k = s.k0(); k <= s.N() + 1; ++k)
    for (int r = s.r_lo(); r <= s.r_hi(); ++r)
      for (int d = s.d_lo(); d <= s.d_hi(); ++d) put_matrix(out, "K", k, r, d, s.value(k, r, d));
  for (int k = s.k0(); k <= s.N(); ++k)
    for (int r = s.r_lo(); r <= s.r_hi(); ++r)
      for (int d = s.d_lo(); d <= s.d_hi(); ++d) put_matrix(out, "L", k, r, d, s.gain(k, r, d));
  out << "end\n";
}

std::string schedule_to_string(const GainSchedule& schedule) {
  std::ostringstream os;
  write_schedule(os, schedule);
  return os.str();
}

void save_schedule(const std::string& path, const GainSchedule& schedule) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_schedule(out, schedule);
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

GainSchedule read_schedule(std::istream& in) {
  LineReader rd(in);
  auto words = rd.next(kMagic);
  if (rd.number<int>(words, 1) != kScheduleFormatVersion) rd.fail("unsupported format version " + words.at(1));
  const std::uint64_t hash = rd.hex(rd.next("spec_hash"), 1);
  words = rd.next("dims");
  const int n = rd.number<int>(words, 1), m = rd.number<int>(words, 2);
  const int m_tilde = rd.number<int>(words, 3), m_hat = rd.number<int>(words, 4);
  words = rd.next("horizon");
  const int k0 = rd.number<int>(words, 1), N = rd.number<int>(words, 2);
  words = rd.next("r_range");
  const int r_lo = rd.number<int>(words, 1), r_hi = rd.number<int>(words, 2);
  words = rd.next("d_range");
  const int d_lo = rd.number<int>(words, 1), d_hi = rd.number<int>(words, 2);
  if (n < 1 || m < 1 || k0 > N || r_lo < 0 || r_lo > r_hi || d_lo < 0 || d_lo > d_hi) rd.fail("inconsistent header");

  PacketLayout layout;
  try {
    layout = build_layout(m, d_lo, d_hi, r_lo, r_hi);
  } catch (const Error& e) {
    rd.fail(e.what());
  }
  if (layout.m_tilde != m_tilde || layout.m_hat != m_hat) rd.fail("dimensions disagree with the delay ranges");
  GainSchedule s(k0, N, layout, n, hash);

  for (int k = k0; k <= N; ++k) {
    words = rd.next("cond");
    if (rd.number<int>(words, 1) != k) rd.fail("condition lines out of order");
    s.set_max_condition(k, rd.number<double>(words, 2));
  }

  const int dim = n + m_hat;
  const std::size_t cells = static_cast<std::size_t>((r_hi - r_lo + 1) * (d_hi - d_lo + 1));
  const std::size_t total = cells * static_cast<std::size_t>(N - k0 + 2) + cells * static_cast<std::size_t>(N - k0 + 1);
  for (std::size_t c = 0; c < total; ++c) {
    words = rd.next(nullptr);
    const bool is_value = words[0] == "K";
    if (!is_value && words[0] != "L") rd.fail("expected 'K' or 'L', got '" + words[0] + "'");
    const int k = rd.number<int>(words, 1), r = rd.number<int>(words, 2), d = rd.number<int>(words, 3);
    const int rows = rd.number<int>(words, 4), cols = rd.number<int>(words, 5);
    const int want_rows = is_value ? dim : m_tilde;
    if (rows != want_rows || cols != dim) rd.fail("matrix shape " + std::to_string(rows) + "x" + std::to_string(cols));
    if (words.size() != 6 + static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols))
      rd.fail("matrix payload has the wrong number of entries");
    Eigen::MatrixXd M(rows, cols);
    std::size_t at = 6;
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) M(i, j) = rd.number<double>(words, at++);
    const bool k_ok = is_value ? (k >= k0 && k <= N + 1) : (k >= k0 && k <= N);
    if (!k_ok || r < r_lo || r > r_hi || d < d_lo || d > d_hi) rd.fail("matrix index outside the header ranges");
    ModeTable& table = is_value ? s.values_at(k) : s.gains_at(k);
    if (table.filled(r, d)) rd.fail("duplicate matrix entry");
    table.set(r, d, std::move(M));
  }
  rd.next("end");
  return s;
}

GainSchedule schedule_from_string(const std::string& text) {
  std::istringstream in(text);
  return read_schedule(in);
}

GainSchedule load_schedule(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return read_schedule(in);
}

void check_schedule_matches(const GainSchedule& schedule, const ProblemSpec& spec) {
  const std::uint64_t expected = spec_hash(spec);
  if (schedule.spec_hash() != expected)
    throw HashMismatch("schedule was built for spec " + hash_hex(schedule.spec_hash()) + ", config hashes to " +
                       hash_hex(expected));
}

}  // namespace ncs
