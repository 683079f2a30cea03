#pragma once

#include <cstddef>

#include "tfim/spinmodel.hpp"

namespace tfim {

/// Lowest k eigenpairs by Lanczos with full reorthogonalization and locking.
/// Each cycle starts from a seeded random vector orthogonal to the locked
/// pairs, so exactly degenerate levels are recovered one per cycle.
/// Throws Error(solver_failure) listing the achieved residuals.
Spectrum lanczos_lowest(const Hamiltonian& h, std::size_t k, const SolverOptions& options);

/// exp(-i kAngular H t) applied through short Lanczos expansions.
class KrylovPropagator {
 public:
  explicit KrylovPropagator(Hamiltonian h, std::size_t krylov_dim = 40);

  /// Advances `v` by `t` ms in `substeps` equal Krylov steps.
  void advance(StateVector& v, double t, std::size_t substeps) const;

  /// Smallest power-of-two multiple of a phase-based initial guess for which
  /// halving the step keeps the fidelity above 1 - `infidelity`.
  std::size_t calibrate(const StateVector& v, double t, double infidelity,
                        std::size_t max_substeps = std::size_t{1} << 16) const;

  const Hamiltonian& hamiltonian() const noexcept { return h_; }

 private:
  void step(StateVector& v, double dt) const;

  Hamiltonian h_;
  std::size_t krylov_dim_;
};

/// |<a|b>|^2 for normalized a, b.
double fidelity(const StateVector& a, const StateVector& b);

}  // namespace tfim
