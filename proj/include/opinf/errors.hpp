#pragma once

#include <stdexcept>
#include <string>

namespace opinf {

/// Violated input contract (dimension mismatch, bad argument, non-orthonormal basis, ...).
class PreconditionError : public std::invalid_argument {
  public:
    explicit PreconditionError(const std::string &what) : std::invalid_argument(what) {}
};

/// Regression or selection problem is rank deficient / under-determined.
class RankError : public std::runtime_error {
  public:
    explicit RankError(const std::string &what) : std::runtime_error(what) {}
};

/// A simulated trajectory left the representable range (non-finite state).
class InstabilityError : public std::runtime_error {
  public:
    InstabilityError(const std::string &what, long step) : std::runtime_error(what), step_(step) {}
    long step() const { return step_; }

  private:
    long step_;
};

} // namespace opinf
