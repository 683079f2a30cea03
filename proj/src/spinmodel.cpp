#include "tfim/spinmodel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

#include "tfim/krylov.hpp"

namespace tfim {

SpinBasis::SpinBasis(std::size_t n, std::size_t cap) : n_spins(n) {
  if (n < 1) throw Error(ErrorKind::invalid_argument, "spin basis needs at least one spin");
  if (n > cap || n > 30) {
    std::ostringstream msg;
    msg << "N=" << n << " exceeds the spin cap of " << cap;
    throw Error(ErrorKind::cap_breach, msg.str());
  }
}

Hamiltonian::Hamiltonian(const CouplingMatrix& couplings, double field, std::size_t spin_cap)
    : basis_(couplings.size(), spin_cap), field_(field) {
  const auto n = couplings.j.rows();
  if (couplings.j.cols() != n) {
    throw Error(ErrorKind::dimension_mismatch, "coupling matrix must be square");
  }
  if (!std::isfinite(field)) throw Error(ErrorKind::invalid_argument, "field must be finite");
  auto pairs = std::make_shared<Pairs>();
  pairs->couplings = couplings;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = i + 1; k < n; ++k) {
      const double jik = couplings.j(i, k);
      if (jik == 0.0) continue;
      pairs->flips.push_back({(std::uint64_t{1} << i) | (std::uint64_t{1} << k), -jik});
      pairs->coupling_sum += std::abs(jik);
    }
  }
  pairs_ = std::move(pairs);
}

Hamiltonian Hamiltonian::with_field(double field) const {
  if (!std::isfinite(field)) throw Error(ErrorKind::invalid_argument, "field must be finite");
  return Hamiltonian(pairs_, basis_, field);
}

template <class Vec, class Out>
void Hamiltonian::apply_impl(const Vec& in, Out& out) const {
  const auto dim = static_cast<Eigen::Index>(dimension());
  if (in.size() != dim || out.size() != dim) {
    throw Error(ErrorKind::dimension_mismatch, "state length does not match 2^N");
  }
  const auto& flips = pairs_->flips;
  for (Eigen::Index k = 0; k < dim; ++k) {
    const auto index = static_cast<std::uint64_t>(k);
    auto acc = diagonal(index) * in[k];
    for (const Flip& f : flips) acc += f.amplitude * in[static_cast<Eigen::Index>(index ^ f.mask)];
    out[k] = acc;
  }
}

void Hamiltonian::apply(const Eigen::Ref<const Eigen::VectorXd>& in,
                        Eigen::Ref<Eigen::VectorXd> out) const {
  apply_impl(in, out);
}

void Hamiltonian::apply(const Eigen::Ref<const Eigen::VectorXcd>& in,
                        Eigen::Ref<Eigen::VectorXcd> out) const {
  apply_impl(in, out);
}

StateVector Hamiltonian::apply(const StateVector& in) const {
  StateVector out(in.size());
  apply_impl(in, out);
  return out;
}

double Hamiltonian::expectation(const StateVector& v) const {
  return v.dot(apply(v)).real();
}

Eigen::MatrixXd Hamiltonian::dense(std::size_t limit) const {
  const std::size_t dim = dimension();
  if (dim > limit) {
    throw Error(ErrorKind::cap_breach, "dense Hamiltonian requested above the dense limit");
  }
  const auto d = static_cast<Eigen::Index>(dim);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    const auto index = static_cast<std::uint64_t>(k);
    m(k, k) = diagonal(index);
    for (const Flip& f : pairs_->flips) m(static_cast<Eigen::Index>(index ^ f.mask), k) += f.amplitude;
  }
  return m;
}

double Hamiltonian::norm_bound() const noexcept {
  return pairs_->coupling_sum + std::abs(field_) * static_cast<double>(basis_.n_spins);
}

void Hamiltonian::column(std::uint64_t index,
                         std::vector<std::pair<std::uint64_t, double>>& out) const {
  out.clear();
  out.emplace_back(index, diagonal(index));
  for (const Flip& f : pairs_->flips) out.emplace_back(index ^ f.mask, f.amplitude);
}

Eigen::MatrixXd SymmetryBlock::embed(const Eigen::MatrixXd& y) const {
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << n_spins);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(dim, y.cols());
  const double half = std::sqrt(0.5);
  for (std::size_t c = 0; c < reps.size(); ++c) {
    const auto row = static_cast<Eigen::Index>(c);
    const std::uint64_t u = reps[c];
    const std::uint64_t m = spatial_parity != 0 ? reverse_bits(u, n_spins) : u;
    if (m == u) {
      out.row(static_cast<Eigen::Index>(u)) = y.row(row);
    } else {
      out.row(static_cast<Eigen::Index>(u)) = half * y.row(row);
      out.row(static_cast<Eigen::Index>(m)) = (spatial_parity * half) * y.row(row);
    }
  }
  return out;
}

std::vector<SymmetryBlock> symmetry_blocks(std::size_t n_spins, bool use_reversal) {
  const SpinBasis basis(n_spins, 30);
  std::vector<SymmetryBlock> blocks;
  for (int p : {1, -1}) {
    for (int r : use_reversal ? std::vector<int>{1, -1} : std::vector<int>{0}) {
      SymmetryBlock b;
      b.n_spins = n_spins;
      b.spin_parity = p;
      b.spatial_parity = r;
      for (std::uint64_t s = 0; s < basis.dimension(); ++s) {
        if ((std::popcount(s) % 2 == 0) != (p == 1)) continue;
        if (r != 0) {
          const std::uint64_t m = reverse_bits(s, n_spins);
          if (m < s || (m == s && r == -1)) continue;
        }
        b.reps.push_back(s);
      }
      blocks.push_back(std::move(b));
    }
  }
  return blocks;
}

SymmetryBlock polarized_block(std::size_t n_spins, bool use_reversal) {
  return symmetry_blocks(n_spins, use_reversal).front();
}

Eigen::MatrixXd block_matrix(const Hamiltonian& h, const SymmetryBlock& block) {
  const std::size_t n = h.basis().n_spins;
  if (block.n_spins != n) {
    throw Error(ErrorKind::dimension_mismatch, "symmetry block does not match the Hamiltonian");
  }
  const bool mirrored = block.spatial_parity != 0;
  std::vector<std::int64_t> slot(h.dimension(), -1);
  for (std::size_t c = 0; c < block.size(); ++c) slot[block.reps[c]] = static_cast<std::int64_t>(c);
  const double half = std::sqrt(0.5);
  // Block coordinate and weight of a full-space basis state.
  const auto locate = [&](std::uint64_t t) -> std::pair<std::int64_t, double> {
    if (!mirrored) return {slot[t], 1.0};
    const std::uint64_t m = reverse_bits(t, n);
    const std::uint64_t u = std::min(t, m);
    if (slot[u] < 0) return {-1, 0.0};
    if (m == t) return {slot[u], 1.0};
    return {slot[u], t == u ? half : block.spatial_parity * half};
  };

  const auto size = static_cast<Eigen::Index>(block.size());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(size, size);
  std::vector<std::pair<std::uint64_t, double>> entries;
  for (std::size_t c = 0; c < block.size(); ++c) {
    const std::uint64_t u = block.reps[c];
    const std::uint64_t m = mirrored ? reverse_bits(u, n) : u;
    std::pair<std::uint64_t, double> members[2] = {{u, m == u ? 1.0 : half},
                                                   {m, block.spatial_parity * half}};
    for (int k = 0; k < (m == u ? 1 : 2); ++k) {
      h.column(members[k].first, entries);
      for (const auto& [t, value] : entries) {
        const auto [row, weight] = locate(t);
        if (row < 0) continue;
        out(row, static_cast<Eigen::Index>(c)) += weight * members[k].second * value;
      }
    }
  }
  return out;
}

Spectrum low_spectrum(const Hamiltonian& h, std::size_t k, const SolverOptions& options) {
  const std::size_t dim = h.dimension();
  if (k > dim) throw Error(ErrorKind::invalid_argument, "requested more eigenpairs than 2^N");
  if (k == 0) return Spectrum{};
  if (dim > options.dense_limit) return lanczos_lowest(h, k, options);

  const std::vector<SymmetryBlock> blocks =
      symmetry_blocks(h.basis().n_spins, reversal_symmetric(h.couplings().j));
  struct Level {
    double energy;
    std::size_t block;
    Eigen::Index index;
  };
  std::vector<Level> levels;
  std::vector<Eigen::MatrixXd> vectors(blocks.size());
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (blocks[b].size() == 0) continue;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(block_matrix(h, blocks[b]));
    if (eig.info() != Eigen::Success) {
      throw Error(ErrorKind::solver_failure, "dense diagonalization failed");
    }
    const Eigen::Index keep = std::min<Eigen::Index>(eig.eigenvalues().size(),
                                                     static_cast<Eigen::Index>(k));
    for (Eigen::Index i = 0; i < keep; ++i) levels.push_back({eig.eigenvalues()[i], b, i});
    vectors[b] = eig.eigenvectors().leftCols(keep);
  }
  std::stable_sort(levels.begin(), levels.end(),
                   [](const Level& a, const Level& b) { return a.energy < b.energy; });

  const auto count = static_cast<Eigen::Index>(k);
  Spectrum s;
  s.energies.resize(count);
  s.states.resize(static_cast<Eigen::Index>(dim), count);
  for (Eigen::Index i = 0; i < count; ++i) {
    const Level& l = levels[static_cast<std::size_t>(i)];
    s.energies[i] = l.energy;
    s.states.col(i) = blocks[l.block].embed(vectors[l.block].col(l.index));
  }
  s.residuals = Eigen::VectorXd::Zero(count);
  s.dense = true;
  return s;
}

Eigen::VectorXd apply_spin_parity(const Eigen::VectorXd& v) {
  Eigen::VectorXd out = v;
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (std::popcount(static_cast<std::uint64_t>(k)) & 1) out[k] = -out[k];
  }
  return out;
}

std::uint64_t reverse_bits(std::uint64_t index, std::size_t n_spins) noexcept {
  std::uint64_t out = 0;
  for (std::size_t i = 0; i < n_spins; ++i) {
    if ((index >> i) & 1U) out |= std::uint64_t{1} << (n_spins - 1 - i);
  }
  return out;
}

Eigen::VectorXd apply_reversal(const Eigen::VectorXd& v, std::size_t n_spins) {
  Eigen::VectorXd out(v.size());
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    out[static_cast<Eigen::Index>(reverse_bits(static_cast<std::uint64_t>(k), n_spins))] = v[k];
  }
  return out;
}

bool reversal_symmetric(const Eigen::MatrixXd& j, double tol) {
  const auto n = j.rows();
  const double scale = std::max(1.0, j.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < n; ++k) {
      if (std::abs(j(i, k) - j(n - 1 - i, n - 1 - k)) > tol * scale) return false;
    }
  }
  return true;
}

namespace {

// Diagonalizes `op` restricted to span(block) and rotates the block so each
// column is an eigenvector of it. Returns the rounded labels.
std::vector<int> sharpen(Eigen::MatrixXd& block, const Eigen::MatrixXd& op_block) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(block.transpose() * op_block);
  block = block * eig.eigenvectors();
  std::vector<int> labels;
  for (Eigen::Index c = 0; c < eig.eigenvalues().size(); ++c) {
    const double e = eig.eigenvalues()[c];
    labels.push_back(std::abs(e - 1.0) < 1e-8 ? 1 : (std::abs(e + 1.0) < 1e-8 ? -1 : 0));
  }
  return labels;
}

}  // namespace

SectorLabels sector_labels(const Spectrum& spectrum, const Hamiltonian& h, double degeneracy_tol) {
  const std::size_t n = h.basis().n_spins;
  const auto count = spectrum.states.cols();
  SectorLabels out;
  out.states = spectrum.states;
  out.spin_parity.assign(static_cast<std::size_t>(count), 0);
  out.spatial_parity.assign(static_cast<std::size_t>(count), 0);
  out.spatial_defined = reversal_symmetric(h.couplings().j);

  const double scale = std::max(1.0, spectrum.energies.cwiseAbs().maxCoeff());
  Eigen::Index start = 0;
  while (start < count) {
    Eigen::Index stop = start + 1;
    while (stop < count &&
           spectrum.energies[stop] - spectrum.energies[stop - 1] <= degeneracy_tol * scale) {
      ++stop;
    }
    const Eigen::Index width = stop - start;
    Eigen::MatrixXd block = out.states.middleCols(start, width);

    Eigen::MatrixXd parity_image(block.rows(), width);
    for (Eigen::Index c = 0; c < width; ++c) parity_image.col(c) = apply_spin_parity(block.col(c));
    const std::vector<int> spin = sharpen(block, parity_image);

    // Within each spin-parity subspace, diagonalize the reversal.
    std::vector<int> spatial(static_cast<std::size_t>(width), 0);
    if (out.spatial_defined) {
      for (int label : {1, -1, 0}) {
        std::vector<Eigen::Index> cols;
        for (Eigen::Index c = 0; c < width; ++c) {
          if (spin[static_cast<std::size_t>(c)] == label) cols.push_back(c);
        }
        if (cols.empty()) continue;
        const auto sub_width = static_cast<Eigen::Index>(cols.size());
        Eigen::MatrixXd sub(block.rows(), sub_width);
        Eigen::MatrixXd image(block.rows(), sub_width);
        for (Eigen::Index c = 0; c < sub_width; ++c) {
          sub.col(c) = block.col(cols[static_cast<std::size_t>(c)]);
          image.col(c) = apply_reversal(sub.col(c), n);
        }
        const std::vector<int> sub_labels = sharpen(sub, image);
        for (Eigen::Index c = 0; c < sub_width; ++c) {
          block.col(cols[static_cast<std::size_t>(c)]) = sub.col(c);
          spatial[static_cast<std::size_t>(cols[static_cast<std::size_t>(c)])] =
              sub_labels[static_cast<std::size_t>(c)];
        }
      }
    }

    out.states.middleCols(start, width) = block;
    for (Eigen::Index c = 0; c < width; ++c) {
      // Re-measure after rotation; expectation must be sharp.
      const Eigen::VectorXd v = block.col(c);
      const double ps = v.dot(apply_spin_parity(v));
      out.spin_parity[static_cast<std::size_t>(start + c)] =
          std::abs(std::abs(ps) - 1.0) < 1e-8 ? (ps > 0 ? 1 : -1) : 0;
      if (out.spatial_defined) {
        const double pr = v.dot(apply_reversal(v, n));
        out.spatial_parity[static_cast<std::size_t>(start + c)] =
            std::abs(std::abs(pr) - 1.0) < 1e-8 ? (pr > 0 ? 1 : -1) : 0;
      }
    }
    start = stop;
  }
  return out;
}

double classical_energy(const Eigen::MatrixXd& j, std::uint64_t configuration) {
  const auto n = j.rows();
  double e = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int si = SpinBasis::sigma_z(configuration, static_cast<std::size_t>(i));
    for (Eigen::Index k = i + 1; k < n; ++k) {
      e -= j(i, k) * si * SpinBasis::sigma_z(configuration, static_cast<std::size_t>(k));
    }
  }
  return e;
}

std::vector<double> classical_energies(const Eigen::MatrixXd& j) {
  const auto n = static_cast<std::size_t>(j.rows());
  if (n > 24) throw Error(ErrorKind::cap_breach, "classical enumeration is limited to N <= 24");
  const std::size_t dim = std::size_t{1} << n;
  std::vector<double> energies(dim);
  // Gray-code walk: flipping spin i changes E by 2 s_i sum_k J_ik s_k.
  std::vector<int> s(n, 1);
  Eigen::VectorXd field = j.rowwise().sum();  // sum_k J_ik s_k
  double e = classical_energy(j, 0);
  std::uint64_t config = 0;
  energies[0] = e;
  for (std::size_t step = 1; step < dim; ++step) {
    const auto site = static_cast<std::size_t>(std::countr_zero(step));
    const auto i = static_cast<Eigen::Index>(site);
    e += 2.0 * s[site] * field[i];
    s[site] = -s[site];
    field += 2.0 * s[site] * j.col(i);
    config ^= std::uint64_t{1} << site;
    energies[config] = e;
  }
  return energies;
}

GroundManifold classical_ground_manifold(const CouplingMatrix& j) {
  const std::vector<double> energies = classical_energies(j.j);
  const double minimum = *std::min_element(energies.begin(), energies.end());
  const double tol = 1e-9 * std::abs(j.j0);
  GroundManifold out;
  out.n_spins = j.size();
  for (std::size_t c = 0; c < energies.size(); ++c) {
    if (energies[c] <= minimum + tol) out.configurations.push_back(c);
  }
  // Report the exact energy of the lowest member rather than the Gray-walk sum.
  out.energy = classical_energy(j.j, out.configurations.front());
  for (std::uint64_t c : out.configurations) out.energy = std::min(out.energy, classical_energy(j.j, c));
  return out;
}

namespace {

template <class Vec>
void hadamard_impl(Vec& v) {
  const auto dim = v.size();
  if (dim == 0 || (dim & (dim - 1)) != 0) {
    throw Error(ErrorKind::dimension_mismatch, "Walsh-Hadamard transform needs a power-of-two length");
  }
  for (Eigen::Index half = 1; half < dim; half <<= 1) {
    for (Eigen::Index block = 0; block < dim; block += 2 * half) {
      for (Eigen::Index k = block; k < block + half; ++k) {
        const auto a = v[k];
        const auto b = v[k + half];
        v[k] = a + b;
        v[k + half] = a - b;
      }
    }
  }
  v *= 1.0 / std::sqrt(static_cast<double>(dim));
}

}  // namespace

void walsh_hadamard(Eigen::Ref<Eigen::VectorXcd> v) { hadamard_impl(v); }
void walsh_hadamard(Eigen::Ref<Eigen::VectorXd> v) { hadamard_impl(v); }

StateVector x_amplitudes(const StateVector& v) {
  StateVector out = v;
  walsh_hadamard(out);
  return out;
}

StateVector polarized_state(std::size_t n_spins) {
  const SpinBasis basis(n_spins, 30);
  StateVector v = StateVector::Zero(static_cast<Eigen::Index>(basis.dimension()));
  v[0] = 1.0;
  return v;
}

}  // namespace tfim
