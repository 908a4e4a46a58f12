#pragma once

#include <stdexcept>
#include <string>

namespace rtinterp {

/// Bad input: out-of-range parameters, malformed records, unknown names.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation could not be carried out to the required accuracy.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateElementError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ConditioningError : public NumericalError {
 public:
  ConditioningError(const std::string& what, double condition_estimate)
      : NumericalError(what), condition_estimate_(condition_estimate) {}
  double condition_estimate() const { return condition_estimate_; }

 private:
  double condition_estimate_;
};

/// The degree-19 and degree-24 evaluations of an integral disagreed.
class QuadratureDisagreement : public NumericalError {
 public:
  QuadratureDisagreement(const std::string& what, double relative_gap)
      : NumericalError(what), relative_gap_(relative_gap) {}
  double relative_gap() const { return relative_gap_; }

 private:
  double relative_gap_;
};

}  // namespace rtinterp
