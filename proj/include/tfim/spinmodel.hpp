#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "tfim/core.hpp"
#include "tfim/trapchain.hpp"

namespace tfim {

/// z-basis bookkeeping. Bit i of a basis index is 0 when spin i points up
/// (sigma^z_i = +1) and 1 when it points down. The same convention labels
/// x-basis configurations: bit i = 0 is |+x>, s_i = +1.
struct SpinBasis {
  std::size_t n_spins = 0;

  SpinBasis() = default;
  explicit SpinBasis(std::size_t n, std::size_t cap = kDefaultSpinCap);

  std::size_t dimension() const noexcept { return std::size_t{1} << n_spins; }

  static int sigma_z(std::uint64_t index, std::size_t site) noexcept {
    return ((index >> site) & 1U) != 0 ? -1 : 1;
  }

  /// Sum_i sigma^z_i of a basis state.
  int magnetization(std::uint64_t index) const noexcept {
    return static_cast<int>(n_spins) - 2 * std::popcount(index);
  }
};

/// H(B) = -sum_{i<j} J_ij sx_i sx_j - B sum_i sz_i, entries in kHz.
/// Immutable; copies share the coupling data.
class Hamiltonian {
 public:
  Hamiltonian(const CouplingMatrix& couplings, double field,
              std::size_t spin_cap = kDefaultSpinCap);

  Hamiltonian with_field(double field) const;

  const SpinBasis& basis() const noexcept { return basis_; }
  std::size_t dimension() const noexcept { return basis_.dimension(); }
  double field() const noexcept { return field_; }
  const CouplingMatrix& couplings() const noexcept { return pairs_->couplings; }

  double diagonal(std::uint64_t index) const noexcept {
    return -field_ * basis_.magnetization(index);
  }

  /// out = H in. Throws Error(dimension_mismatch) on length mismatch.
  void apply(const Eigen::Ref<const Eigen::VectorXd>& in, Eigen::Ref<Eigen::VectorXd> out) const;
  void apply(const Eigen::Ref<const Eigen::VectorXcd>& in,
             Eigen::Ref<Eigen::VectorXcd> out) const;
  StateVector apply(const StateVector& in) const;

  /// <v|H|v> for normalized v.
  double expectation(const StateVector& v) const;

  /// Dense materialization; only for dimension <= kDefaultDenseLimit unless forced.
  Eigen::MatrixXd dense(std::size_t limit = kDefaultDenseLimit) const;

  /// Upper bound on the spectral radius.
  double norm_bound() const noexcept;

  /// Nonzero entries (row, value) of column `index` of H.
  void column(std::uint64_t index, std::vector<std::pair<std::uint64_t, double>>& out) const;

 private:
  struct Flip {
    std::uint64_t mask;
    double amplitude;  // -J_ij
  };
  struct Pairs {
    CouplingMatrix couplings;
    std::vector<Flip> flips;
    double coupling_sum = 0.0;
  };

  Hamiltonian(std::shared_ptr<const Pairs> pairs, SpinBasis basis, double field)
      : pairs_(std::move(pairs)), basis_(basis), field_(field) {}

  template <class Vec, class Out>
  void apply_impl(const Vec& in, Out& out) const;

  std::shared_ptr<const Pairs> pairs_;
  SpinBasis basis_;
  double field_ = 0.0;
};

/// Orthonormal basis of one symmetry sector of H: fixed spin reflection and,
/// for mirror-symmetric couplings, fixed site reversal. Column c is |reps[c]>,
/// or (|reps[c]> + spatial_parity |R reps[c]>) / sqrt(2) when reps[c] is not
/// its own mirror image.
struct SymmetryBlock {
  std::size_t n_spins = 0;
  int spin_parity = 1;
  int spatial_parity = 0;  // 0 when reversal is not used
  std::vector<std::uint64_t> reps;  // ascending

  std::size_t size() const noexcept { return reps.size(); }
  /// Full-space vectors from block coordinates (one column per vector).
  Eigen::MatrixXd embed(const Eigen::MatrixXd& y) const;
};

/// All sectors, ordered (+,+), (+,-), (-,+), (-,-).
std::vector<SymmetryBlock> symmetry_blocks(std::size_t n_spins, bool use_reversal);
/// The sector holding |up ... up>.
SymmetryBlock polarized_block(std::size_t n_spins, bool use_reversal);
/// H restricted to the block, in the block basis.
Eigen::MatrixXd block_matrix(const Hamiltonian& h, const SymmetryBlock& block);

/// Lowest eigenpairs, energies ascending.
struct Spectrum {
  Eigen::VectorXd energies;
  Eigen::MatrixXd states;  // columns, orthonormal
  Eigen::VectorXd residuals;
  bool dense = true;

  std::size_t size() const noexcept { return static_cast<std::size_t>(energies.size()); }
};

struct SolverOptions {
  std::size_t dense_limit = kDefaultDenseLimit;
  double residual_tol = 1e-9;
  std::uint64_t seed = 20150101;
  std::size_t max_restarts = 64;
};

/// k lowest eigenpairs: dense per symmetry block below the crossover, Lanczos above.
Spectrum low_spectrum(const Hamiltonian& h, std::size_t k, const SolverOptions& options = {});

/// Spin-reflection (prod_i sz_i) and site-reversal labels per eigenstate.
/// Label 0 marks a state that could not be resolved to +-1.
struct SectorLabels {
  std::vector<int> spin_parity;
  std::vector<int> spatial_parity;
  bool spatial_defined = false;
  Eigen::MatrixXd states;  // rotated within degenerate groups so both labels are sharp
};

SectorLabels sector_labels(const Spectrum& spectrum, const Hamiltonian& h,
                           double degeneracy_tol = 1e-8);

/// prod_i sz_i v
Eigen::VectorXd apply_spin_parity(const Eigen::VectorXd& v);
/// Site reversal i -> N-1-i.
Eigen::VectorXd apply_reversal(const Eigen::VectorXd& v, std::size_t n_spins);
std::uint64_t reverse_bits(std::uint64_t index, std::size_t n_spins) noexcept;

/// True when J_ij = J_{N-1-i, N-1-j} to the given tolerance.
bool reversal_symmetric(const Eigen::MatrixXd& j, double tol = 1e-12);

/// Zero-field ground configurations in the x basis.
struct GroundManifold {
  std::vector<std::uint64_t> configurations;  // x-basis indices, ascending
  double energy = 0.0;
  std::size_t n_spins = 0;

  std::size_t degeneracy() const noexcept { return configurations.size(); }
};

/// E(s) = -sum_{i<j} J_ij s_i s_j, s_i = +1 for bit i clear.
double classical_energy(const Eigen::MatrixXd& j, std::uint64_t configuration);

/// All 2^N classical energies, indexed by configuration.
std::vector<double> classical_energies(const Eigen::MatrixXd& j);

/// Exhaustive search; members lie within 1e-9 |J0| of the minimum.
GroundManifold classical_ground_manifold(const CouplingMatrix& j);

/// Amplitudes <s_x|v> for every x-basis configuration s.
StateVector x_amplitudes(const StateVector& v);
/// In-place normalized Walsh-Hadamard transform (self-inverse).
void walsh_hadamard(Eigen::Ref<Eigen::VectorXcd> v);
void walsh_hadamard(Eigen::Ref<Eigen::VectorXd> v);

/// |up ... up> in the z basis.
StateVector polarized_state(std::size_t n_spins);

}  // namespace tfim
