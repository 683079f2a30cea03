#pragma once

#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace tfim {

using Complex = std::complex<double>;
using StateVector = Eigen::VectorXcd;

/// Every frequency is carried in kHz and every time in ms. A level at f kHz
/// accrues a phase of kAngular * f * t radians after t ms.
inline constexpr double kAngular = 2.0 * std::numbers::pi;

/// Largest Hilbert-space dimension handled by dense diagonalization (N = 12).
inline constexpr std::size_t kDefaultDenseLimit = 4096;

/// Default cap on the number of spins a run may request.
inline constexpr std::size_t kDefaultSpinCap = 16;

enum class ErrorKind {
  invalid_argument,
  dimension_mismatch,
  cap_breach,
  schema,
  solver_failure,
  chain_instability,
  resonance,
  fit_undefined,
  structural,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);

  ErrorKind kind() const noexcept { return kind_; }

  /// True for failures of the numerics rather than of the caller's input.
  bool numerical() const noexcept;

 private:
  ErrorKind kind_;
};

}  // namespace tfim
