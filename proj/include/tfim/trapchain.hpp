#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "tfim/core.hpp"

namespace tfim {

/// Linear Paul trap driven by a spin-dependent force. Frequencies in kHz.
struct TrapConfig {
  std::size_t n_ions = 10;
  double axial_freq = 620.0;
  double transverse_freq = 4800.0;
  double detuning = 4900.0;
  double rabi_freq = 600.0;
  double recoil_freq = 18.5;

  /// Throws Error(invalid_argument) unless the chain is a stable linear crystal.
  void validate() const;

  /// h / (M lambda^2) in kHz for an ion of `mass_amu` driven at `wavelength_nm`.
  static double recoil_from(double mass_amu, double wavelength_nm);
};

/// Dimensionless equilibrium coordinates, in units of
/// (e^2 / 4 pi eps0 M w_ax^2)^(1/3), sorted ascending.
struct IonChain {
  std::vector<double> positions;

  std::size_t size() const noexcept { return positions.size(); }
};

/// Transverse normal modes. Column m of `vectors` is the mode b^m.
struct ModeSpectrum {
  Eigen::VectorXd frequencies;  // kHz, descending
  Eigen::MatrixXd vectors;
};

struct CouplingMatrix {
  Eigen::MatrixXd j;  // kHz, symmetric, zero diagonal
  double j0 = 0.0;    // mean nearest-neighbour coupling, signed
  double alpha_fit = 0.0;

  std::size_t size() const noexcept { return static_cast<std::size_t>(j.rows()); }
};

/// Minimizes sum u_i^2/2 + sum_{i<j} 1/|u_i - u_j| by damped Newton.
IonChain equilibrium_positions(std::size_t n);

/// Transverse Hessian of the chain, A_ij in units of w_ax^2.
Eigen::MatrixXd transverse_hessian(const IonChain& chain, const TrapConfig& cfg);

ModeSpectrum transverse_modes(const IonChain& chain, const TrapConfig& cfg);

/// J_ij = Omega^2 nu_R sum_m b_i^m b_j^m / (mu^2 - w_m^2).
CouplingMatrix coupling_matrix(const IonChain& chain, const ModeSpectrum& modes,
                               const TrapConfig& cfg);

/// Full pipeline: positions, modes, couplings.
CouplingMatrix trap_couplings(const TrapConfig& cfg);

/// Least-squares decay exponent of |J_ij| against the index distance |i - j|.
double fit_power_law(const Eigen::MatrixXd& j);

/// J_ij = j0 / |i - j|^alpha.
CouplingMatrix synthetic_couplings(std::size_t n, double j0, double alpha);

/// Mean of the superdiagonal.
double mean_nearest_neighbor(const Eigen::MatrixXd& j);

}  // namespace tfim
