#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace ncs {

// Every failure raised by the library carries a short kind tag ("RowSumError",
// "SupportError", ...) so that callers and the CLI can report it by name.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

// Malformed input files and filesystem problems (CLI exit code 2).
class FormatError : public Error {
 public:
  using Error::Error;
  explicit FormatError(const std::string& what) : Error("FormatError", what) {}
};

class IoError : public FormatError {
 public:
  explicit IoError(const std::string& what) : FormatError("IoError", what) {}
};

#define NCS_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                    \
   public:                                                       \
    explicit Name(const std::string& what) : Error(#Name, what) {} \
  }

// delay_model
NCS_DEFINE_ERROR(ShapeError);
NCS_DEFINE_ERROR(RowSumError);
NCS_DEFINE_ERROR(SupportError);
NCS_DEFINE_ERROR(OutOfRange);
// packet_layout
NCS_DEFINE_ERROR(BoundsError);
NCS_DEFINE_ERROR(WidthError);
// extended_dynamics
NCS_DEFINE_ERROR(ModeError);
NCS_DEFINE_ERROR(WindowError);
NCS_DEFINE_ERROR(IndexError);
// synthesis
NCS_DEFINE_ERROR(CostError);
NCS_DEFINE_ERROR(TimeOrderError);
NCS_DEFINE_ERROR(IncompleteTable);
NCS_DEFINE_ERROR(SolveError);
// simulation
NCS_DEFINE_ERROR(ScheduleGap);
NCS_DEFINE_ERROR(ChainViolation);
NCS_DEFINE_ERROR(HashMismatch);
// oracle
NCS_DEFINE_ERROR(Blowup);
NCS_DEFINE_ERROR(LogGap);

#undef NCS_DEFINE_ERROR

}  // namespace ncs
