#include "tfim/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace tfim {

SolverOptions Numerics::solver() const {
  SolverOptions s;
  s.dense_limit = dense_limit;
  s.seed = seed;
  return s;
}

double RampProfile::field_at(double t) const {
  if (times.empty()) return 0.0;
  if (t <= times.front()) return fields.front();
  if (t >= times.back()) return fields.back();
  const auto hi = static_cast<std::size_t>(
      std::upper_bound(times.begin(), times.end(), t) - times.begin());
  const std::size_t lo = hi - 1;
  const double h = times[hi] - times[lo];
  const double s = (t - times[lo]) / h;
  const double s2 = s * s;
  const double s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * fields[lo] + (s3 - 2 * s2 + s) * h * rates[lo] +
         (-2 * s3 + 3 * s2) * fields[hi] + (s3 - s2) * h * rates[hi];
}

RampProfile RampProfile::linear(double b0_khz, double t_final, std::size_t steps) {
  steps = std::max<std::size_t>(steps, 1);
  RampProfile r;
  const double rate = t_final > 0.0 ? -b0_khz / t_final : 0.0;
  for (std::size_t i = 0; i <= steps; ++i) {
    const double t = t_final * static_cast<double>(i) / static_cast<double>(steps);
    r.times.push_back(t);
    r.fields.push_back(i == steps ? 0.0 : b0_khz + rate * t);
    r.rates.push_back(rate);
  }
  return r;
}

RampProfile RampProfile::constant(double b_khz, double t_final, std::size_t steps) {
  steps = std::max<std::size_t>(steps, 1);
  RampProfile r;
  for (std::size_t i = 0; i <= steps; ++i) {
    r.times.push_back(t_final * static_cast<double>(i) / static_cast<double>(steps));
    r.fields.push_back(b_khz);
    r.rates.push_back(0.0);
  }
  return r;
}

HoldPropagator::HoldPropagator(const CouplingMatrix& j, double field_khz,
                               const GroundManifold& manifold, const Numerics& numerics)
    : h_(j, field_khz, j.size()),
      manifold_(manifold),
      numerics_(numerics),
      dense_(h_.dimension() <= numerics.dense_limit) {
  if (manifold_.n_spins != j.size()) {
    throw Error(ErrorKind::dimension_mismatch, "ground manifold does not match the couplings");
  }
  if (!dense_) return;

  // |up...up> never leaves its symmetry sector.
  const SymmetryBlock block = polarized_block(j.size(), reversal_symmetric(j.j));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(block_matrix(h_, block));
  if (eig.info() != Eigen::Success) {
    throw Error(ErrorKind::solver_failure, "dense diagonalization of the hold Hamiltonian failed");
  }
  energies_ = eig.eigenvalues();
  overlaps_ = eig.eigenvectors().row(0).transpose();
  vectors_ = block.embed(eig.eigenvectors());

  const auto dim = static_cast<Eigen::Index>(h_.dimension());
  const auto g = static_cast<Eigen::Index>(manifold_.degeneracy());
  const double norm = 1.0 / std::sqrt(static_cast<double>(dim));
  Eigen::MatrixXd signs(g, dim);
  for (Eigen::Index s = 0; s < g; ++s) {
    const std::uint64_t config = manifold_.configurations[static_cast<std::size_t>(s)];
    for (Eigen::Index z = 0; z < dim; ++z) {
      signs(s, z) = (std::popcount(config & static_cast<std::uint64_t>(z)) & 1) ? -norm : norm;
    }
  }
  manifold_weights_ = (signs * vectors_) * overlaps_.asDiagonal();
}

std::vector<double> HoldPropagator::probabilities(std::span<const double> hold_times) const {
  std::vector<double> out(hold_times.size());
  if (dense_) {
    const auto dim = energies_.size();
    Eigen::VectorXcd phases(dim);
    for (std::size_t i = 0; i < hold_times.size(); ++i) {
      for (Eigen::Index k = 0; k < dim; ++k) {
        phases[k] = std::polar(1.0, -kAngular * energies_[k] * hold_times[i]);
      }
      const Eigen::VectorXcd amps = manifold_weights_.cast<Complex>() * phases;
      out[i] = std::min(1.0, amps.squaredNorm());
    }
    return out;
  }

  // Krylov path: march through the hold times in ascending order.
  std::vector<std::size_t> order(hold_times.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return hold_times[a] < hold_times[b]; });
  const KrylovPropagator prop(h_, numerics_.krylov_dim);
  StateVector psi = polarized_state(h_.basis().n_spins);
  double now = 0.0;
  std::map<double, std::size_t> substeps;
  for (std::size_t idx : order) {
    const double dt = hold_times[idx] - now;
    if (dt > 0.0) {
      auto it = substeps.find(dt);
      if (it == substeps.end()) {
        it = substeps.emplace(dt, prop.calibrate(psi, dt, numerics_.krylov_infidelity)).first;
      }
      prop.advance(psi, dt, it->second);
      now = hold_times[idx];
    }
    out[idx] = ground_probability(psi, manifold_);
  }
  return out;
}

StateVector HoldPropagator::state_at(double t) const {
  if (dense_) {
    const auto dim = energies_.size();
    Eigen::VectorXcd coeffs(dim);
    for (Eigen::Index k = 0; k < dim; ++k) {
      coeffs[k] = std::polar(overlaps_[k], -kAngular * energies_[k] * t);
    }
    return vectors_.cast<Complex>() * coeffs;
  }
  const KrylovPropagator prop(h_, numerics_.krylov_dim);
  StateVector psi = polarized_state(h_.basis().n_spins);
  if (t != 0.0) prop.advance(psi, t, prop.calibrate(psi, t, numerics_.krylov_infidelity));
  return psi;
}

double ground_probability(const StateVector& v, const GroundManifold& manifold) {
  const StateVector x = x_amplitudes(v);
  double p = 0.0;
  for (std::uint64_t c : manifold.configurations) {
    if (c >= static_cast<std::uint64_t>(x.size())) {
      throw Error(ErrorKind::dimension_mismatch, "manifold configuration outside the basis");
    }
    p += std::norm(x[static_cast<Eigen::Index>(c)]);
  }
  return p;
}

std::vector<ExcitationBin> excitation_histogram(const StateVector& v, const CouplingMatrix& j,
                                                std::size_t bins, const GroundManifold* exclude) {
  bins = std::max<std::size_t>(bins, 1);
  const std::vector<double> energies = classical_energies(j.j);
  if (energies.size() != static_cast<std::size_t>(v.size())) {
    throw Error(ErrorKind::dimension_mismatch, "state length does not match 2^N");
  }
  const auto [lo_it, hi_it] = std::minmax_element(energies.begin(), energies.end());
  const double e_min = *lo_it;
  const double span = *hi_it - e_min;
  const double width = span > 0.0 ? span / static_cast<double>(bins) : 1.0;

  std::vector<ExcitationBin> out(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    out[b].energy_low = width * static_cast<double>(b);
    out[b].energy_high = width * static_cast<double>(b + 1);
  }
  std::vector<bool> skip;
  if (exclude != nullptr) {
    skip.assign(energies.size(), false);
    for (std::uint64_t c : exclude->configurations) skip[c] = true;
  }
  const StateVector x = x_amplitudes(v);
  for (std::size_t c = 0; c < energies.size(); ++c) {
    if (!skip.empty() && skip[c]) continue;
    const auto b = std::min(static_cast<std::size_t>((energies[c] - e_min) / width), bins - 1);
    out[b].probability += std::norm(x[static_cast<Eigen::Index>(c)]);
  }
  return out;
}

double field_integral(const RampProfile& ramp) {
  double total = 0.0;
  for (std::size_t i = 1; i < ramp.times.size(); ++i) {
    total += 0.5 * (ramp.fields[i] + ramp.fields[i - 1]) * (ramp.times[i] - ramp.times[i - 1]);
  }
  return total;
}

double field_integral(const BangBangParams& params, double field_unit) {
  return params.quench_field * field_unit * params.hold_time;
}

ProtocolResult bangbang_run(const CouplingMatrix& j, const BangBangParams& params,
                            const Numerics& numerics) {
  if (!(params.quench_field >= 0.0) || !(params.hold_time >= 0.0)) {
    throw Error(ErrorKind::invalid_argument, "quench field and hold time must be non-negative");
  }
  const double unit = std::abs(j.j0);
  const GroundManifold manifold = classical_ground_manifold(j);
  const HoldPropagator prop(j, params.quench_field * unit, manifold, numerics);

  ProtocolResult r;
  r.final_state = prop.state_at(params.hold_time);
  r.ground_probability = ground_probability(r.final_state, manifold);
  r.excitation_histogram =
      excitation_histogram(r.final_state, j, numerics.histogram_bins, &manifold);
  r.field_integral = field_integral(params, unit);
  r.norm_drift = std::abs(r.final_state.norm() - 1.0);
  const double e_start = prop.hamiltonian().diagonal(0);
  const double e_end = prop.hamiltonian().expectation(r.final_state);
  r.energy_drift = std::abs(e_end - e_start) / std::max(std::abs(e_start), 1e-300);
  if (e_start == 0.0) r.energy_drift = std::abs(e_end);
  return r;
}

double la_gamma(const GapProfile& profile, double t_final) {
  if (!(t_final >= 0.0)) throw Error(ErrorKind::invalid_argument, "ramp time must be non-negative");
  const auto integrand = [&](double b) {
    const double d = profile.gap_at(b);
    return 1.0 / (d * d);
  };
  const std::vector<double>& nodes = profile.fields_khz();
  double total = 0.0;
  double total_error = 0.0;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    double error = 0.0;
    const double part = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        integrand, nodes[i], nodes[i + 1], 10, 1e-10, &error);
    total += part;
    total_error += error;
  }
  if (!std::isfinite(total) || total_error > 1e-9 * total) {
    std::ostringstream msg;
    msg << "quadrature of 1/Delta^2 did not converge (estimated relative error "
        << total_error / total << ")";
    throw Error(ErrorKind::solver_failure, msg.str());
  }
  return t_final / total;
}

RampProfile la_ramp(const GapProfile& profile, double t_final, std::size_t steps) {
  if (!(t_final > 0.0)) throw Error(ErrorKind::invalid_argument, "ramp time must be positive");
  steps = std::max<std::size_t>(steps, 1);
  RampProfile r;
  r.gamma = la_gamma(profile, t_final);
  const double b0 = profile.b_max();
  const auto rate = [&](double b) {
    const double d = profile.gap_at(b);
    return -d * d / r.gamma;
  };
  const double dt = t_final / static_cast<double>(steps);
  double b = b0;
  r.times.reserve(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) {
    r.times.push_back(i == steps ? t_final : dt * static_cast<double>(i));
    r.fields.push_back(b);
    r.rates.push_back(rate(b));
    if (i == steps) break;
    const double k1 = rate(b);
    const double k2 = rate(b + 0.5 * dt * k1);
    const double k3 = rate(b + 0.5 * dt * k2);
    const double k4 = rate(b + dt * k3);
    b += dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  r.endpoint = r.fields.back();
  if (std::abs(r.endpoint) > 1e-3 * b0) {
    std::ostringstream msg;
    msg << "ramp ends at B=" << r.fields.back() << " kHz instead of 0 (B0=" << b0
        << "); refine the gap grid or quadrature";
    throw Error(ErrorKind::structural, msg.str());
  }
  r.fields.back() = 0.0;
  return r;
}

namespace {

// Solves (1 + i a (H - shift)) x = rhs by conjugate gradients on the normal equations.
void cayley_solve(const Hamiltonian& h, double shift, double a, const StateVector& rhs,
                  StateVector& x, double tol) {
  const Complex ia(0.0, a);
  const auto dim = rhs.size();
  StateVector hv(dim);
  const auto apply_a = [&](const StateVector& in, StateVector& out, const Complex& sign) {
    h.apply(in, hv);
    out = in + sign * (hv - shift * in);
  };

  StateVector ax(dim);
  apply_a(x, ax, ia);
  StateVector res = rhs - ax;
  StateVector r(dim);
  apply_a(res, r, -ia);
  StateVector p = r;
  StateVector q(dim);
  double rs = r.squaredNorm();
  const double target = tol * rhs.norm();
  for (int iter = 0; iter < 1000; ++iter) {
    if (res.norm() <= target) return;
    apply_a(p, q, ia);
    const double alpha = rs / q.squaredNorm();
    x += alpha * p;
    res -= alpha * q;
    apply_a(res, r, -ia);
    const double rs_new = r.squaredNorm();
    p = r + (rs_new / rs) * p;
    rs = rs_new;
  }
  if (res.norm() > target) {
    std::ostringstream msg;
    msg << "Crank-Nicolson linear solve stagnated at residual " << res.norm() / rhs.norm();
    throw Error(ErrorKind::solver_failure, msg.str());
  }
}

}  // namespace

ProtocolResult cn_propagate(const CouplingMatrix& j, const RampProfile& ramp, std::size_t steps,
                            const Numerics& numerics) {
  const std::size_t n = j.size();
  const GroundManifold manifold = classical_ground_manifold(j);
  const Hamiltonian base(j, 0.0, n);
  StateVector psi = polarized_state(n);

  const double t_final = ramp.t_final();
  if (t_final <= 0.0 || ramp.times.size() < 2) steps = 0;

  ProtocolResult r;
  r.steps = steps;
  if (steps > 0) {
    const double dt = t_final / static_cast<double>(steps);
    const double a = 0.5 * kAngular * dt;
    const double solve_tol = std::min(
        numerics.cn_solve_tol,
        std::max(1e-15, 0.1 * numerics.norm_drift_tol / static_cast<double>(steps)));
    const Complex ia(0.0, a);
    StateVector hv(psi.size());
    StateVector rhs(psi.size());
    StateVector next(psi.size());
    const bool constant_field =
        std::all_of(ramp.fields.begin(), ramp.fields.end(),
                    [&](double b) { return b == ramp.fields.front(); });
    const double e_start = constant_field ? base.with_field(ramp.fields.front()).expectation(psi) : 0.0;
    for (std::size_t s = 0; s < steps; ++s) {
      const Hamiltonian h = base.with_field(ramp.field_at((static_cast<double>(s) + 0.5) * dt));
      h.apply(psi, hv);
      // Removing <H> only changes the global phase and keeps the Cayley
      // phase error set by the spread of occupied levels.
      const double shift = psi.dot(hv).real() / psi.squaredNorm();
      hv -= shift * psi;
      rhs = psi - ia * hv;
      next = 2.0 * rhs - psi;
      cayley_solve(h, shift, a, rhs, next, solve_tol);
      psi.swap(next);
      r.norm_drift = std::max(r.norm_drift, std::abs(psi.norm() - 1.0));
    }
    if (constant_field) {
      const double e_end = base.with_field(ramp.fields.front()).expectation(psi);
      r.energy_drift = std::abs(e_end - e_start) / std::max(std::abs(e_start), 1e-300);
    }
  }
  if (r.norm_drift > numerics.norm_drift_tol) {
    std::ostringstream msg;
    msg << "Crank-Nicolson norm drift " << r.norm_drift << " exceeds " << numerics.norm_drift_tol;
    throw Error(ErrorKind::solver_failure, msg.str());
  }

  r.final_state = std::move(psi);
  r.ground_probability = ground_probability(r.final_state, manifold);
  r.excitation_histogram =
      excitation_histogram(r.final_state, j, numerics.histogram_bins, &manifold);
  r.field_integral = field_integral(ramp);
  return r;
}

ProtocolResult cn_evolve(const CouplingMatrix& j, const RampProfile& ramp,
                         const Numerics& numerics) {
  if (ramp.t_final() <= 0.0 || ramp.times.size() < 2) return cn_propagate(j, ramp, 0, numerics);
  std::size_t steps = ramp.times.size() - 1;
  ProtocolResult coarse = cn_propagate(j, ramp, steps, numerics);
  while (2 * steps <= numerics.cn_max_steps) {
    steps *= 2;
    ProtocolResult fine = cn_propagate(j, ramp, steps, numerics);
    const double delta = std::abs(fine.ground_probability - coarse.ground_probability);
    fine.convergence_delta = delta;
    if (delta < numerics.cn_convergence) return fine;
    coarse = std::move(fine);
  }
  std::ostringstream msg;
  msg << "Crank-Nicolson probability still moving by " << coarse.convergence_delta << " at "
      << steps << " steps";
  throw Error(ErrorKind::solver_failure, msg.str());
}

}  // namespace tfim
