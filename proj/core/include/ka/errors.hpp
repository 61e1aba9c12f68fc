#pragma once

#include <stdexcept>
#include <string>

namespace ka {

// Exact-search or state-space budget exceeded. Never degraded to an
// approximation; callers map this to a distinct exit code.
class BudgetExceeded : public std::runtime_error {
 public:
  explicit BudgetExceeded(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure (eigensolve degeneracy, overflow in iterated
// exponentials, zero-consistent denominators).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Estimator cannot resolve the requested quantity from the given data.
class HorizonTooShort : public std::runtime_error {
 public:
  HorizonTooShort(const std::string& what, double suggested)
      : std::runtime_error(what), suggested_horizon(suggested) {}
  double suggested_horizon;
};

}  // namespace ka
