#include "tfim/krylov.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Dense>

namespace tfim {
namespace {

constexpr std::size_t kMaxBasis = 400;

// Removes the components of `w` along the columns of `basis` (two passes).
template <class Mat, class Vec>
void orthogonalize(const Mat& basis, Vec& w) {
  if (basis.cols() == 0) return;
  for (int pass = 0; pass < 2; ++pass) w -= basis * (basis.adjoint() * w);
}

struct LanczosCycle {
  Eigen::VectorXd ritz_values;
  Eigen::MatrixXd ritz_vectors;  // only the converged prefix
  Eigen::VectorXd residuals;
};

LanczosCycle lanczos_cycle(const Hamiltonian& h, const Eigen::MatrixXd& locked, std::size_t m,
                           std::mt19937_64& rng, double tol) {
  const auto dim = static_cast<Eigen::Index>(h.dimension());
  const auto size = static_cast<Eigen::Index>(m);
  const double scale = std::max(1.0, h.norm_bound());

  Eigen::MatrixXd basis(dim, size);
  Eigen::VectorXd alpha(size);
  Eigen::VectorXd beta(size);

  std::normal_distribution<double> gauss;
  Eigen::VectorXd v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v[i] = gauss(rng);
  orthogonalize(locked, v);
  v.normalize();

  Eigen::Index steps = 0;
  Eigen::VectorXd w(dim);
  double last_beta = 0.0;
  for (Eigen::Index j = 0; j < size; ++j) {
    basis.col(j) = v;
    h.apply(v, w);
    alpha[j] = v.dot(w);
    w -= alpha[j] * v;
    if (j > 0) w -= beta[j - 1] * basis.col(j - 1);
    orthogonalize(locked, w);
    orthogonalize(basis.leftCols(j + 1), w);
    steps = j + 1;
    last_beta = w.norm();
    if (last_beta < 1e-12 * scale) {
      last_beta = 0.0;  // invariant subspace reached
      break;
    }
    beta[j] = last_beta;
    v = w / last_beta;
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
  tri.computeFromTridiagonal(alpha.head(steps), beta.head(std::max<Eigen::Index>(steps - 1, 0)),
                             Eigen::ComputeEigenvectors);

  LanczosCycle out;
  std::vector<Eigen::Index> accepted;
  std::vector<double> residuals;
  Eigen::MatrixXd vectors(dim, 0);
  Eigen::VectorXd hx(dim);
  for (Eigen::Index i = 0; i < steps; ++i) {
    const double estimate = last_beta * std::abs(tri.eigenvectors()(steps - 1, i));
    if (estimate > 10.0 * tol) break;
    Eigen::VectorXd x = basis.leftCols(steps) * tri.eigenvectors().col(i);
    x.normalize();
    h.apply(x, hx);
    const double residual = (hx - tri.eigenvalues()[i] * x).norm();
    if (residual > tol) break;
    accepted.push_back(i);
    residuals.push_back(residual);
    vectors.conservativeResize(Eigen::NoChange, vectors.cols() + 1);
    vectors.col(vectors.cols() - 1) = x;
  }
  const auto count = static_cast<Eigen::Index>(accepted.size());
  out.ritz_values.resize(count);
  out.residuals.resize(count);
  for (Eigen::Index c = 0; c < count; ++c) {
    out.ritz_values[c] = tri.eigenvalues()[accepted[static_cast<std::size_t>(c)]];
    out.residuals[c] = residuals[static_cast<std::size_t>(c)];
  }
  out.ritz_vectors = std::move(vectors);
  return out;
}

}  // namespace

Spectrum lanczos_lowest(const Hamiltonian& h, std::size_t k, const SolverOptions& options) {
  const std::size_t dim = h.dimension();
  if (k > dim) throw Error(ErrorKind::invalid_argument, "requested more eigenpairs than 2^N");
  const auto d = static_cast<Eigen::Index>(dim);
  std::mt19937_64 rng(options.seed);

  Eigen::MatrixXd locked(d, 0);
  std::vector<double> energies;
  std::vector<double> residuals;
  std::size_t m = std::min({dim, std::max<std::size_t>(2 * k + 60, 100), kMaxBasis});
  bool complete = false;

  for (std::size_t cycle = 0; cycle < options.max_restarts && !complete; ++cycle) {
    const std::size_t free = dim - static_cast<std::size_t>(locked.cols());
    if (free == 0) {
      complete = true;
      break;
    }
    const LanczosCycle found =
        lanczos_cycle(h, locked, std::min(m, free), rng, options.residual_tol);
    if (found.ritz_values.size() == 0) {
      if (m >= std::min(dim, kMaxBasis)) continue;  // retry with a fresh start vector
      m = std::min({2 * m, dim, kMaxBasis});
      continue;
    }

    if (energies.size() >= k) {
      std::vector<double> sorted = energies;
      std::sort(sorted.begin(), sorted.end());
      const double kth = sorted[k - 1];
      // Nothing below the current k-th level survives in the complement.
      if (found.ritz_values[0] >= kth - options.residual_tol) {
        complete = true;
        break;
      }
    }
    for (Eigen::Index c = 0; c < found.ritz_values.size(); ++c) {
      Eigen::VectorXd x = found.ritz_vectors.col(c);
      orthogonalize(locked, x);
      x.normalize();
      locked.conservativeResize(Eigen::NoChange, locked.cols() + 1);
      locked.col(locked.cols() - 1) = x;
      energies.push_back(found.ritz_values[c]);
      residuals.push_back(found.residuals[c]);
    }
  }

  if (!complete || energies.size() < k) {
    std::ostringstream msg;
    msg << "Lanczos did not converge " << k << " eigenpairs; locked " << energies.size()
        << " with residuals";
    for (double r : residuals) msg << ' ' << r;
    throw Error(ErrorKind::solver_failure, msg.str());
  }

  std::vector<std::size_t> order(energies.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return energies[a] < energies[b]; });

  const auto count = static_cast<Eigen::Index>(k);
  Spectrum s;
  s.dense = false;
  s.energies.resize(count);
  s.residuals.resize(count);
  s.states.resize(d, count);
  Eigen::VectorXd hx(d);
  for (Eigen::Index c = 0; c < count; ++c) {
    const std::size_t src = order[static_cast<std::size_t>(c)];
    s.energies[c] = energies[src];
    s.states.col(c) = locked.col(static_cast<Eigen::Index>(src));
    h.apply(s.states.col(c), hx);
    s.residuals[c] = (hx - s.energies[c] * s.states.col(c)).norm();
  }
  return s;
}

KrylovPropagator::KrylovPropagator(Hamiltonian h, std::size_t krylov_dim)
    : h_(std::move(h)), krylov_dim_(std::max<std::size_t>(krylov_dim, 2)) {}

void KrylovPropagator::step(StateVector& v, double dt) const {
  const auto dim = v.size();
  const double norm = v.norm();
  if (norm == 0.0 || dt == 0.0) return;
  const auto m = static_cast<Eigen::Index>(std::min<std::size_t>(krylov_dim_, h_.dimension()));
  const double scale = std::max(1.0, h_.norm_bound());

  Eigen::MatrixXcd basis(dim, m);
  Eigen::VectorXd alpha(m);
  Eigen::VectorXd beta(m);
  StateVector q = v / norm;
  StateVector w(dim);
  Eigen::Index steps = 0;
  double last_beta = 0.0;
  for (Eigen::Index j = 0; j < m; ++j) {
    basis.col(j) = q;
    h_.apply(q, w);
    alpha[j] = q.dot(w).real();
    w -= alpha[j] * q;
    if (j > 0) w -= beta[j - 1] * basis.col(j - 1);
    orthogonalize(basis.leftCols(j + 1), w);
    steps = j + 1;
    last_beta = w.norm();
    if (last_beta < 1e-14 * scale) {
      last_beta = 0.0;
      break;
    }
    beta[j] = last_beta;
    q = w / last_beta;
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
  tri.computeFromTridiagonal(alpha.head(steps), beta.head(std::max<Eigen::Index>(steps - 1, 0)),
                             Eigen::ComputeEigenvectors);
  Eigen::VectorXcd phases(steps);
  for (Eigen::Index i = 0; i < steps; ++i) {
    phases[i] = std::polar(1.0, -kAngular * dt * tri.eigenvalues()[i]) *
                tri.eigenvectors()(0, i);
  }
  const Eigen::VectorXcd coeffs = tri.eigenvectors().cast<Complex>() * phases;

  // Truncation estimate: weight leaking into the next Krylov direction.
  const double error = last_beta * std::abs(coeffs[steps - 1]) * kAngular * std::abs(dt);
  if (last_beta > 0.0 && error > 1e-13) {
    step(v, 0.5 * dt);
    step(v, 0.5 * dt);
    return;
  }
  v = norm * (basis.leftCols(steps) * coeffs);
}

void KrylovPropagator::advance(StateVector& v, double t, std::size_t substeps) const {
  if (static_cast<std::size_t>(v.size()) != h_.dimension()) {
    throw Error(ErrorKind::dimension_mismatch, "state length does not match 2^N");
  }
  substeps = std::max<std::size_t>(substeps, 1);
  const double dt = t / static_cast<double>(substeps);
  for (std::size_t s = 0; s < substeps; ++s) step(v, dt);
}

std::size_t KrylovPropagator::calibrate(const StateVector& v, double t, double infidelity,
                                        std::size_t max_substeps) const {
  const double phase = kAngular * h_.norm_bound() * std::abs(t);
  auto substeps = static_cast<std::size_t>(std::max(1.0, std::ceil(phase / 10.0)));
  StateVector coarse = v;
  advance(coarse, t, substeps);
  while (substeps <= max_substeps) {
    StateVector fine = v;
    advance(fine, t, 2 * substeps);
    if (1.0 - fidelity(coarse, fine) < infidelity) return substeps;
    coarse = std::move(fine);
    substeps *= 2;
  }
  throw Error(ErrorKind::solver_failure, "Krylov propagation did not converge under step halving");
}

double fidelity(const StateVector& a, const StateVector& b) {
  const double overlap = std::norm(a.dot(b));
  return overlap / (a.squaredNorm() * b.squaredNorm());
}

}  // namespace tfim
