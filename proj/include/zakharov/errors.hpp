#pragma once

#include <stdexcept>
#include <string>

namespace zakharov {

/// Raised when an argument violates an operation's precondition.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A negative-order multiplier was asked to keep a nonzero mean.
class SingularZeroMode : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A state constraint (zero mean, reality) does not hold.
class ConstraintViolation : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The (u, n+, n-) triple is not self-consistent (n- != conj(n+)).
class InconsistentState : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Non-finite values appeared during time stepping.
class BlowUpDetected : public std::runtime_error {
 public:
  BlowUpDetected(const std::string& what, double last_valid_time)
      : std::runtime_error(what), last_valid_time_(last_valid_time) {}

  double last_valid_time() const noexcept { return last_valid_time_; }

 private:
  double last_valid_time_;
};

}  // namespace zakharov
