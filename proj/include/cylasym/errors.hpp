#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace cylasym {

/// Invalid arguments: negative inputs, degenerate extents, p <= 1, ...
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An iterative or quadrature routine failed to reach its tolerance.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what,
                          std::vector<std::string> trace = {})
      : std::runtime_error(what), trace_(std::move(trace)) {}

  const std::vector<std::string>& trace() const noexcept { return trace_; }

 private:
  std::vector<std::string> trace_;
};

/// An improper integral that should be finite was found divergent.
class DivergentError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A mathematical precondition (e.g. the Keller-Osserman condition) fails.
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace cylasym
