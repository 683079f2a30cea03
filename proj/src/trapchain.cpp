#include "tfim/trapchain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <Eigen/Dense>

#include "tfim/core.hpp"

namespace tfim {
namespace {

constexpr double kGradientTol = 1e-12;
constexpr int kNewtonIterations = 500;
constexpr double kResonanceTol = 1e-9;

// Potential energy; infinite if the ordering is violated.
double chain_potential(const Eigen::VectorXd& u) {
  const auto n = u.size();
  double v = 0.5 * u.squaredNorm();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = i + 1; k < n; ++k) {
      const double d = u[k] - u[i];
      if (!(d > 0.0)) return std::numeric_limits<double>::infinity();
      v += 1.0 / d;
    }
  }
  return v;
}

Eigen::VectorXd chain_gradient(const Eigen::VectorXd& u) {
  const auto n = u.size();
  Eigen::VectorXd g = u;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < n; ++k) {
      if (k == i) continue;
      const double d = u[i] - u[k];
      g[i] -= std::copysign(1.0 / (d * d), d);
    }
  }
  return g;
}

Eigen::MatrixXd chain_hessian(const Eigen::VectorXd& u) {
  const auto n = u.size();
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < n; ++k) {
      if (k == i) continue;
      const double c = 2.0 / std::pow(std::abs(u[i] - u[k]), 3);
      h(i, i) += c;
      h(i, k) = -c;
    }
  }
  return h;
}

void symmetrize(Eigen::VectorXd& u) {
  const Eigen::VectorXd mirrored = -u.reverse();
  u = 0.5 * (u + mirrored);
}

}  // namespace

void TrapConfig::validate() const {
  if (n_ions < 1) throw Error(ErrorKind::invalid_argument, "trap needs at least one ion");
  for (double f : {axial_freq, transverse_freq, detuning, rabi_freq, recoil_freq}) {
    if (!(f > 0.0) || !std::isfinite(f)) {
      throw Error(ErrorKind::invalid_argument, "trap frequencies must be positive and finite");
    }
  }
  if (!(transverse_freq > axial_freq)) {
    throw Error(ErrorKind::invalid_argument,
                "transverse frequency must exceed the axial frequency for a linear chain");
  }
}

double TrapConfig::recoil_from(double mass_amu, double wavelength_nm) {
  constexpr double kPlanck = 6.62607015e-34;
  constexpr double kAtomicMass = 1.66053906660e-27;
  if (!(mass_amu > 0.0) || !(wavelength_nm > 0.0)) {
    throw Error(ErrorKind::invalid_argument, "ion mass and wavelength must be positive");
  }
  const double lambda = wavelength_nm * 1e-9;
  return kPlanck / (mass_amu * kAtomicMass * lambda * lambda) * 1e-3;
}

IonChain equilibrium_positions(std::size_t n) {
  if (n < 1) throw Error(ErrorKind::invalid_argument, "chain needs at least one ion");
  const auto size = static_cast<Eigen::Index>(n);
  Eigen::VectorXd u(size);
  for (Eigen::Index i = 0; i < size; ++i) u[i] = static_cast<double>(i) - 0.5 * (size - 1);

  Eigen::VectorXd g = chain_gradient(u);
  int iter = 0;
  for (; iter < kNewtonIterations && g.norm() >= kGradientTol; ++iter) {
    const Eigen::VectorXd step = chain_hessian(u).llt().solve(g);
    const double v0 = chain_potential(u);
    double t = 1.0;
    Eigen::VectorXd trial = u - step;
    // Backtrack until the ordering survives and the potential does not rise.
    while (t > 1e-12 && !(chain_potential(trial) <= v0 + 1e-14 * std::abs(v0))) {
      t *= 0.5;
      trial = u - t * step;
    }
    u = trial;
    symmetrize(u);
    g = chain_gradient(u);
  }
  if (g.norm() >= kGradientTol) {
    std::ostringstream msg;
    msg << "equilibrium solve did not converge for n=" << n << " (gradient " << g.norm() << ")";
    throw Error(ErrorKind::solver_failure, msg.str());
  }
  return IonChain{std::vector<double>(u.data(), u.data() + size)};
}

Eigen::MatrixXd transverse_hessian(const IonChain& chain, const TrapConfig& cfg) {
  const auto n = static_cast<Eigen::Index>(chain.size());
  const double ratio = cfg.transverse_freq / cfg.axial_freq;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, i) = ratio * ratio;
    for (Eigen::Index k = 0; k < n; ++k) {
      if (k == i) continue;
      const double c = 1.0 / std::pow(std::abs(chain.positions[i] - chain.positions[k]), 3);
      a(i, i) -= c;
      a(i, k) = c;
    }
  }
  return a;
}

ModeSpectrum transverse_modes(const IonChain& chain, const TrapConfig& cfg) {
  cfg.validate();
  if (chain.size() != cfg.n_ions) {
    throw Error(ErrorKind::invalid_argument, "chain length does not match n_ions");
  }
  const auto n = static_cast<Eigen::Index>(chain.size());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(transverse_hessian(chain, cfg));
  if (eig.info() != Eigen::Success) {
    throw Error(ErrorKind::solver_failure, "transverse Hessian diagonalization failed");
  }
  if (eig.eigenvalues().minCoeff() <= 0.0) {
    throw Error(ErrorKind::chain_instability,
                "transverse Hessian has a non-positive eigenvalue (zig-zag regime)");
  }

  ModeSpectrum modes;
  modes.frequencies.resize(n);
  modes.vectors.resize(n, n);
  // Eigen sorts ascending; modes are stored descending.
  for (Eigen::Index m = 0; m < n; ++m) {
    const Eigen::Index src = n - 1 - m;
    modes.frequencies[m] = cfg.axial_freq * std::sqrt(eig.eigenvalues()[src]);
    Eigen::VectorXd b = eig.eigenvectors().col(src);
    // Sign fixed so the first significant entry is positive.
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(b[i]) > 1e-8) {
        if (b[i] < 0.0) b = -b;
        break;
      }
    }
    modes.vectors.col(m) = b;
  }
  return modes;
}

CouplingMatrix coupling_matrix(const IonChain& chain, const ModeSpectrum& modes,
                               const TrapConfig& cfg) {
  const auto n = static_cast<Eigen::Index>(chain.size());
  if (modes.frequencies.size() != n || modes.vectors.rows() != n) {
    throw Error(ErrorKind::dimension_mismatch, "mode spectrum does not match the chain");
  }
  const double mu = cfg.detuning;
  Eigen::VectorXd weights(n);
  for (Eigen::Index m = 0; m < n; ++m) {
    const double w = modes.frequencies[m];
    if (std::abs(mu - w) <= kResonanceTol * mu) {
      std::ostringstream msg;
      msg << "detuning " << mu << " kHz collides with transverse mode " << m << " at " << w
          << " kHz";
      throw Error(ErrorKind::resonance, msg.str());
    }
    weights[m] = 1.0 / (mu * mu - w * w);
  }

  const double prefactor = cfg.rabi_freq * cfg.rabi_freq * cfg.recoil_freq;
  CouplingMatrix out;
  out.j = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = i + 1; k < n; ++k) {
      double sum = 0.0;
      for (Eigen::Index m = 0; m < n; ++m) {
        sum += modes.vectors(i, m) * modes.vectors(k, m) * weights[m];
      }
      out.j(i, k) = out.j(k, i) = prefactor * sum;
    }
  }
  out.j0 = mean_nearest_neighbor(out.j);
  out.alpha_fit = n >= 3 ? fit_power_law(out.j) : std::numeric_limits<double>::quiet_NaN();
  return out;
}

CouplingMatrix trap_couplings(const TrapConfig& cfg) {
  cfg.validate();
  const IonChain chain = equilibrium_positions(cfg.n_ions);
  return coupling_matrix(chain, transverse_modes(chain, cfg), cfg);
}

double fit_power_law(const Eigen::MatrixXd& j) {
  const auto n = j.rows();
  if (n < 3) throw Error(ErrorKind::fit_undefined, "power-law fit needs at least three ions");
  std::vector<double> xs;
  std::vector<double> ys;
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = i + 1; k < n; ++k) {
      const double v = std::abs(j(i, k));
      if (v == 0.0) continue;
      xs.push_back(std::log(static_cast<double>(k - i)));
      ys.push_back(std::log(v));
      seen[static_cast<std::size_t>(k - i)] = true;
    }
  }
  if (std::count(seen.begin(), seen.end(), true) < 2) {
    throw Error(ErrorKind::fit_undefined, "power-law fit needs two distinct distances");
  }
  const double count = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / count;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / count;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t p = 0; p < xs.size(); ++p) {
    sxy += (xs[p] - mx) * (ys[p] - my);
    sxx += (xs[p] - mx) * (xs[p] - mx);
  }
  return -sxy / sxx;
}

CouplingMatrix synthetic_couplings(std::size_t n, double j0, double alpha) {
  if (n < 2) throw Error(ErrorKind::invalid_argument, "synthetic couplings need n >= 2");
  if (!(alpha > 0.0)) throw Error(ErrorKind::invalid_argument, "alpha must be positive");
  const auto size = static_cast<Eigen::Index>(n);
  CouplingMatrix out;
  out.j = Eigen::MatrixXd::Zero(size, size);
  for (Eigen::Index i = 0; i < size; ++i) {
    for (Eigen::Index k = i + 1; k < size; ++k) {
      out.j(i, k) = out.j(k, i) = j0 / std::pow(static_cast<double>(k - i), alpha);
    }
  }
  out.j0 = j0;
  out.alpha_fit = alpha;
  return out;
}

double mean_nearest_neighbor(const Eigen::MatrixXd& j) {
  const auto n = j.rows();
  if (n < 2) return 0.0;
  double sum = 0.0;
  for (Eigen::Index i = 0; i + 1 < n; ++i) sum += j(i, i + 1);
  return sum / static_cast<double>(n - 1);
}

}  // namespace tfim
