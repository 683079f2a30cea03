#include "tfim/gapspec.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <sstream>

#include <boost/math/special_functions/fpclassify.hpp>
#include <boost/math/interpolators/pchip.hpp>

namespace tfim {

struct GapProfile::Interpolant {
  boost::math::interpolators::pchip<std::vector<double>> spline;
};

CoupledGap coupled_gap(const Hamiltonian& h, const GapOptions& options) {
  if (h.field() < 0.0) throw Error(ErrorKind::invalid_argument, "coupled gap needs B >= 0");
  const std::size_t dim = h.dimension();
  const std::size_t n = h.basis().n_spins;
  const double coupling_tol = options.coupling_tol_per_spin * static_cast<double>(n);

  std::size_t k = std::min(std::max<std::size_t>(options.initial_levels, 2), dim);
  while (true) {
    const Spectrum s = low_spectrum(h, k, options.solver);
    const double e0 = s.energies[0];
    const double scale = std::max(1.0, std::abs(e0));

    Eigen::Index group = 1;
    while (group < s.energies.size() && s.energies[group] - e0 <= options.ground_tol * scale) {
      ++group;
    }
    // dH/dB = -sum_i sz_i is diagonal in the z basis.
    Eigen::MatrixXd driven(s.states.rows(), group);
    for (Eigen::Index m = 0; m < group; ++m) {
      for (Eigen::Index z = 0; z < s.states.rows(); ++z) {
        driven(z, m) = h.basis().magnetization(static_cast<std::uint64_t>(z)) * s.states(z, m);
      }
    }
    for (Eigen::Index idx = group; idx < s.energies.size(); ++idx) {
      const double c = (s.states.col(idx).transpose() * driven).cwiseAbs().maxCoeff();
      if (c > coupling_tol) {
        CoupledGap out;
        out.index = static_cast<std::size_t>(idx);
        out.ground_energy = e0;
        out.excited_energy = s.energies[idx];
        out.gap = out.excited_energy - e0;
        out.coupling = c;
        return out;
      }
    }
    if (k == dim) {
      throw Error(ErrorKind::structural, "no level couples to the ground state through dH/dB");
    }
    k = std::min(2 * k, dim);
  }
}

GapProfile::GapProfile(std::vector<double> fields_khz, std::vector<double> gaps,
                       std::vector<double> ground_energies, double field_unit)
    : fields_(std::move(fields_khz)),
      gaps_(std::move(gaps)),
      ground_(std::move(ground_energies)),
      unit_(field_unit) {
  if (fields_.size() != gaps_.size() || fields_.size() != ground_.size()) {
    throw Error(ErrorKind::dimension_mismatch, "gap profile columns differ in length");
  }
  if (fields_.size() < 4) throw Error(ErrorKind::invalid_argument, "gap profile needs >= 4 nodes");
  if (!(unit_ > 0.0)) throw Error(ErrorKind::invalid_argument, "field unit |J0| must be positive");
  for (std::size_t i = 0; i < fields_.size(); ++i) {
    if (!(gaps_[i] > 0.0)) {
      std::ostringstream msg;
      msg << "gap profile has a non-positive gap " << gaps_[i] << " at B=" << fields_[i];
      throw Error(ErrorKind::structural, msg.str());
    }
    if (i > 0 && !(fields_[i] > fields_[i - 1])) {
      throw Error(ErrorKind::invalid_argument, "gap profile fields must increase strictly");
    }
  }
  std::vector<double> x = fields_;
  std::vector<double> y = gaps_;
  interp_ = std::make_shared<const Interpolant>(
      Interpolant{boost::math::interpolators::pchip<std::vector<double>>(std::move(x), std::move(y))});
}

std::vector<double> GapProfile::field_grid() const {
  std::vector<double> out(fields_.size());
  std::transform(fields_.begin(), fields_.end(), out.begin(), [&](double b) { return b / unit_; });
  return out;
}

double GapProfile::gap_at(double field_khz) const {
  const double b = std::clamp(std::abs(field_khz), fields_.front(), fields_.back());
  return interp_->spline(b);
}

GapProfile GapProfile::constant(double gap, double b_max_khz, std::size_t nodes,
                                double field_unit) {
  nodes = std::max<std::size_t>(nodes, 4);
  std::vector<double> fields(nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    fields[i] = b_max_khz * static_cast<double>(i) / static_cast<double>(nodes - 1);
  }
  return GapProfile(std::move(fields), std::vector<double>(nodes, gap),
                    std::vector<double>(nodes, 0.0), field_unit);
}

namespace {

void evaluate(const Hamiltonian& base, const std::vector<double>& fields,
              const GapOptions& options, std::vector<double>& gaps,
              std::vector<double>& ground) {
  const auto count = static_cast<std::ptrdiff_t>(fields.size());
  gaps.assign(fields.size(), 0.0);
  ground.assign(fields.size(), 0.0);
  std::vector<std::exception_ptr> failures(fields.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    const auto u = static_cast<std::size_t>(i);
    try {
      const CoupledGap g = coupled_gap(base.with_field(fields[u]), options);
      gaps[u] = g.gap;
      ground[u] = g.ground_energy;
    } catch (...) {
      failures[u] = std::current_exception();
    }
  }
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (!failures[i]) continue;
    try {
      std::rethrow_exception(failures[i]);
    } catch (const Error& e) {
      std::ostringstream msg;
      msg << "gap profile failed at grid point " << i << " (B=" << fields[i]
          << " kHz): " << e.what();
      throw Error(e.kind(), msg.str());
    }
  }
}

}  // namespace

GapProfile gap_profile(const CouplingMatrix& j, const ProfileOptions& options) {
  if (options.n_grid < 16) throw Error(ErrorKind::invalid_argument, "gap profile needs n_grid >= 16");
  if (!(options.b_max > 0.0)) throw Error(ErrorKind::invalid_argument, "b_max must be positive");
  const double unit = std::abs(j.j0);
  if (!(unit > 0.0)) throw Error(ErrorKind::invalid_argument, "|J0| must be nonzero");

  const Hamiltonian base(j, 0.0, j.size());
  const double b_max = options.b_max * unit;
  std::vector<double> fields(options.n_grid);
  for (std::size_t i = 0; i < fields.size(); ++i) {
    fields[i] = b_max * static_cast<double>(i) / static_cast<double>(fields.size() - 1);
  }
  std::vector<double> gaps;
  std::vector<double> ground;
  evaluate(base, fields, options.gap, gaps, ground);

  if (options.refine) {
    const auto argmin = static_cast<std::size_t>(
        std::min_element(gaps.begin(), gaps.end()) - gaps.begin());
    const double lo = fields[argmin] - 0.1 * b_max;
    const double hi = fields[argmin] + 0.1 * b_max;
    std::vector<double> extra;
    for (std::size_t i = 0; i + 1 < fields.size(); ++i) {
      if (fields[i + 1] < lo || fields[i] > hi) continue;
      const double step = (fields[i + 1] - fields[i]) / 3.0;
      extra.push_back(fields[i] + step);
      extra.push_back(fields[i] + 2.0 * step);
    }
    std::vector<double> extra_gaps;
    std::vector<double> extra_ground;
    evaluate(base, extra, options.gap, extra_gaps, extra_ground);

    std::vector<std::size_t> order(fields.size() + extra.size());
    std::vector<double> all_fields = fields;
    all_fields.insert(all_fields.end(), extra.begin(), extra.end());
    gaps.insert(gaps.end(), extra_gaps.begin(), extra_gaps.end());
    ground.insert(ground.end(), extra_ground.begin(), extra_ground.end());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return all_fields[a] < all_fields[b]; });
    std::vector<double> f2;
    std::vector<double> g2;
    std::vector<double> e2;
    for (std::size_t i : order) {
      f2.push_back(all_fields[i]);
      g2.push_back(gaps[i]);
      e2.push_back(ground[i]);
    }
    fields = std::move(f2);
    gaps = std::move(g2);
    ground = std::move(e2);
  }
  return GapProfile(std::move(fields), std::move(gaps), std::move(ground), unit);
}

}  // namespace tfim
