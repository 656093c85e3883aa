#pragma once

#include <iosfwd>
#include <string>

#include "ncs/synthesis.hpp"

namespace ncs {

inline constexpr int kScheduleFormatVersion = 1;

/// Line-oriented text with a header block followed by one line per matrix;
/// every number is written with 17 significant digits so that a reload
/// reproduces the stored doubles exactly.
void write_schedule(std::ostream& out, const GainSchedule& schedule);
std::string schedule_to_string(const GainSchedule& schedule);
void save_schedule(const std::string& path, const GainSchedule& schedule);

/// Throws FormatError on malformed content, IoError when the file cannot be read.
GainSchedule read_schedule(std::istream& in);
GainSchedule schedule_from_string(const std::string& text);
GainSchedule load_schedule(const std::string& path);

/// Throws HashMismatch when the schedule was built from a different problem.
void check_schedule_matches(const GainSchedule& schedule, const ProblemSpec& spec);

}  // namespace ncs
