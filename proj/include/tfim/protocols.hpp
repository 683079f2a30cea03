#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "tfim/gapspec.hpp"
#include "tfim/krylov.hpp"
#include "tfim/spinmodel.hpp"

namespace tfim {

/// Numerical knobs shared by the protocol runners and the optimizer.
struct Numerics {
  std::size_t dense_limit = kDefaultDenseLimit;
  std::size_t krylov_dim = 40;
  double krylov_infidelity = 1e-9;
  double cn_solve_tol = 1e-10;
  double cn_convergence = 1e-6;
  std::size_t cn_max_steps = std::size_t{1} << 20;
  double norm_drift_tol = 1e-8;
  std::size_t histogram_bins = 64;
  std::uint64_t seed = 20150101;

  SolverOptions solver() const;
};

/// Quench from the polarized state to B_q, hold for tau, quench to zero.
struct BangBangParams {
  double quench_field = 0.0;  // units of |J0|
  double hold_time = 0.0;     // ms
};

/// Field schedule B(t) in kHz on an ascending time grid in ms.
struct RampProfile {
  std::vector<double> times;
  std::vector<double> fields;
  std::vector<double> rates;  // dB/dt at each node, kHz/ms
  double gamma = 0.0;
  double endpoint = 0.0;  // integrated B(t_f) before it is set to zero, kHz

  double t_final() const noexcept { return times.empty() ? 0.0 : times.back(); }

  /// Cubic Hermite interpolation through (fields, rates); clamped outside the grid.
  double field_at(double t) const;

  static RampProfile linear(double b0_khz, double t_final, std::size_t steps);
  static RampProfile constant(double b_khz, double t_final, std::size_t steps);
};

struct ExcitationBin {
  double energy_low = 0.0;  // kHz above the classical ground energy
  double energy_high = 0.0;
  double probability = 0.0;
};

struct ProtocolResult {
  StateVector final_state;
  double ground_probability = 0.0;
  /// Weight outside the ground manifold, binned by classical excitation energy.
  std::vector<ExcitationBin> excitation_histogram;
  double field_integral = 0.0;  // kHz ms
  std::size_t steps = 0;
  double norm_drift = 0.0;
  double energy_drift = 0.0;  // relative, constant-field evolution only
  double convergence_delta = 0.0;
};

/// Constant-field evolution of the polarized state, reused across hold times.
/// Dense eigendecomposition up to the dense limit, Krylov stepping above it.
class HoldPropagator {
 public:
  HoldPropagator(const CouplingMatrix& j, double field_khz, const GroundManifold& manifold,
                 const Numerics& numerics = {});

  /// Ground-manifold probability after each hold time.
  std::vector<double> probabilities(std::span<const double> hold_times) const;

  StateVector state_at(double t) const;

  bool dense() const noexcept { return dense_; }
  const Hamiltonian& hamiltonian() const noexcept { return h_; }

 private:
  Hamiltonian h_;
  GroundManifold manifold_;
  Numerics numerics_;
  bool dense_ = true;
  Eigen::VectorXd energies_;
  Eigen::MatrixXd vectors_;
  Eigen::VectorXd overlaps_;        // <k|up...up>
  Eigen::MatrixXd manifold_weights_;  // <s_x|k><k|up...up>, one row per member
};

ProtocolResult bangbang_run(const CouplingMatrix& j, const BangBangParams& params,
                            const Numerics& numerics = {});

/// t_f divided by the integral of 1/Delta^2 over [0, B_0].
double la_gamma(const GapProfile& profile, double t_final);

/// Integrates dB/dt = -Delta^2(B)/gamma from B_0 with fourth-order Runge-Kutta.
RampProfile la_ramp(const GapProfile& profile, double t_final, std::size_t steps = 4096);

/// Crank-Nicolson propagation with a fixed number of midpoint-field steps.
ProtocolResult cn_propagate(const CouplingMatrix& j, const RampProfile& ramp, std::size_t steps,
                            const Numerics& numerics = {});

/// Crank-Nicolson with step halving until P changes by less than cn_convergence.
ProtocolResult cn_evolve(const CouplingMatrix& j, const RampProfile& ramp,
                         const Numerics& numerics = {});

double ground_probability(const StateVector& v, const GroundManifold& manifold);

/// Histogram of x-basis weight against E(s) - E_min. When `exclude` is given,
/// its configurations are left out of the bins.
std::vector<ExcitationBin> excitation_histogram(const StateVector& v, const CouplingMatrix& j,
                                                std::size_t bins = 64,
                                                const GroundManifold* exclude = nullptr);

double field_integral(const RampProfile& ramp);
double field_integral(const BangBangParams& params, double field_unit);

}  // namespace tfim
