#pragma once

#include <stdexcept>
#include <string>

namespace csd {

// Input outside an operation's domain (negative intensity, beta < 0, bad config value).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical procedure failed to produce a result: no half-maximum crossing,
// a fit that did not converge, a degenerate data set.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what, double best_residual = 0.0)
      : std::runtime_error(what), best_residual_(best_residual) {}

  double best_residual() const noexcept { return best_residual_; }

 private:
  double best_residual_;
};

}  // namespace csd
