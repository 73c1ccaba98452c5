#pragma once

#include <stdexcept>
#include <string>

namespace singlecopy {

/// Base for everything the library throws. The CLI maps InputError to exit
/// code 1 and NumericalError to exit code 2.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Rejected arguments: non-finite couplings, bad block lengths, unsorted
/// spectra and the like.
class InputError : public Error {
public:
  using Error::Error;
};

class NumericalError : public Error {
public:
  using Error::Error;
};

class DecompositionError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

class DegenerateGroundState : public NumericalError {
public:
  explicit DegenerateGroundState(double gap)
      : NumericalError("degenerate ground state: many-body gap " + std::to_string(gap)),
        gap_(gap) {}
  double gap() const noexcept { return gap_; }

private:
  double gap_;
};

/// Quadrature did not reach the requested tolerance within its budget.
class AccuracyError : public NumericalError {
public:
  AccuracyError(const std::string& what, double achieved)
      : NumericalError(what + " (achieved error estimate " + std::to_string(achieved) + ")"),
        achieved_(achieved) {}
  double achieved() const noexcept { return achieved_; }

private:
  double achieved_;
};

class SingularSymbol : public NumericalError {
public:
  explicit SingularSymbol(double k)
      : NumericalError("symbol singular at k = " + std::to_string(k)), k_(k) {}
  double k() const noexcept { return k_; }

private:
  double k_;
};

} // namespace singlecopy
