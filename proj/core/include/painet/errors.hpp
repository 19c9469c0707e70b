#pragma once

#include <stdexcept>
#include <string>

namespace painet {

/// Dimension or shape disagreement between operands.
struct shape_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A documented precondition of an operation was violated at runtime.
struct contract_error : std::logic_error {
  using std::logic_error::logic_error;
};

/// Edge list references a node outside the graph.
struct graph_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// File could not be read, written, or decoded.
struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Text input failed to parse; carries a 1-based line number.
struct parse_error : std::runtime_error {
  parse_error(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_number(line) {}
  std::size_t line_number;
};

/// Numerical process diverged (NaN loss, integrator blow-up).
struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace painet
