#pragma once

#include <stdexcept>
#include <string>

namespace hees {

/// Vector/matrix dimensions of the operands do not match.
struct DimensionMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Input set is numerically linearly dependent.
struct DegenerateInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotSymmetric : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Iteration budget of a numerical method was exhausted.
struct NoConvergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotSPD : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NonPositiveCurvature : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Sample blocks and fitness values disagree in shape.
struct ShapeMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct SingularMap : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Requested trace window contains no usable records.
struct EmptyWindow : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct UnknownColumn : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Config text could not be parsed; carries the offending line number.
struct ParseError : std::runtime_error {
  int line;
  ParseError(const std::string& msg, int line_no)
      : std::runtime_error("line " + std::to_string(line_no) + ": " + msg),
        line(line_no) {}
};

/// A parsed config value violates a constraint; carries the field name.
struct ValidationError : std::runtime_error {
  std::string field;
  explicit ValidationError(const std::string& field_name,
                           const std::string& msg = "")
      : std::runtime_error("invalid value for '" + field_name + "'" +
                           (msg.empty() ? "" : ": " + msg)),
        field(field_name) {}
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace hees
