#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "tfim/spinmodel.hpp"

namespace tfim {

struct GapOptions {
  std::size_t initial_levels = 8;
  /// A level is coupled when |<k| sum_i sz_i |0>| exceeds this times N.
  double coupling_tol_per_spin = 1e-8;
  /// Levels within this fraction of the energy scale of E_0 form the ground group.
  double ground_tol = 1e-9;
  SolverOptions solver;
};

struct CoupledGap {
  double gap = 0.0;  // kHz
  std::size_t index = 0;
  double ground_energy = 0.0;
  double excited_energy = 0.0;
  double coupling = 0.0;
};

/// Gap from the ground state to the lowest level with a nonzero dH/dB matrix
/// element. A degenerate ground group is handled member by member.
CoupledGap coupled_gap(const Hamiltonian& h, const GapOptions& options = {});

/// Delta(B) sampled on a field grid with a monotone cubic interpolant.
class GapProfile {
 public:
  GapProfile(std::vector<double> fields_khz, std::vector<double> gaps,
             std::vector<double> ground_energies, double field_unit);

  /// Node fields in units of |J0|.
  std::vector<double> field_grid() const;
  const std::vector<double>& fields_khz() const noexcept { return fields_; }
  const std::vector<double>& gaps() const noexcept { return gaps_; }
  const std::vector<double>& ground_energies() const noexcept { return ground_; }
  double field_unit() const noexcept { return unit_; }
  double b_max() const noexcept { return fields_.back(); }

  /// Interpolated Delta at `field_khz`; uses Delta(|B|), clamped to the grid.
  double gap_at(double field_khz) const;

  /// Constant Delta on [0, b_max]; used for analytic checks.
  static GapProfile constant(double gap, double b_max_khz, std::size_t nodes, double field_unit);

 private:
  std::vector<double> fields_;
  std::vector<double> gaps_;
  std::vector<double> ground_;
  double unit_ = 1.0;
  struct Interpolant;
  std::shared_ptr<const Interpolant> interp_;
};

struct ProfileOptions {
  double b_max = 5.0;  // units of |J0|
  std::size_t n_grid = 64;
  bool refine = true;
  GapOptions gap;
};

/// Uniform pass, then 3x densification within +-10% of b_max around the minimum.
GapProfile gap_profile(const CouplingMatrix& j, const ProfileOptions& options = {});

}  // namespace tfim
