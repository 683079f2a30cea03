#include "tfim/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <sstream>

namespace tfim {
namespace {

void require_increasing(const std::vector<double>& axis, const char* name) {
  if (axis.empty()) {
    throw Error(ErrorKind::invalid_argument, std::string(name) + " axis is empty");
  }
  for (std::size_t i = 1; i < axis.size(); ++i) {
    if (!(axis[i] > axis[i - 1])) {
      throw Error(ErrorKind::invalid_argument, std::string(name) + " axis must increase strictly");
    }
  }
}

}  // namespace

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return out;
}

ScanGrid scan_bangbang(const CouplingMatrix& j, const std::vector<double>& b_axis,
                       const std::vector<double>& t_axis, const Numerics& numerics,
                       double t_budget) {
  require_increasing(b_axis, "field");
  require_increasing(t_axis, "hold-time");
  if (b_axis.front() < 0.0 || t_axis.front() < 0.0) {
    throw Error(ErrorKind::invalid_argument, "scan axes must be non-negative");
  }
  if (t_axis.back() > t_budget) {
    throw Error(ErrorKind::invalid_argument, "hold-time axis exceeds the time budget");
  }

  const double unit = std::abs(j.j0);
  const GroundManifold manifold = classical_ground_manifold(j);
  ScanGrid grid;
  grid.b_axis = b_axis;
  grid.t_axis = t_axis;
  grid.n_spins = j.size();
  grid.alpha = j.alpha_fit;
  grid.j0 = j.j0;
  grid.probabilities.resize(static_cast<Eigen::Index>(b_axis.size()),
                            static_cast<Eigen::Index>(t_axis.size()));

  const auto columns = static_cast<std::ptrdiff_t>(b_axis.size());
  std::vector<std::exception_ptr> failures(b_axis.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t c = 0; c < columns; ++c) {
    const auto u = static_cast<std::size_t>(c);
    try {
      const HoldPropagator prop(j, b_axis[u] * unit, manifold, numerics);
      const std::vector<double> p = prop.probabilities(t_axis);
      for (std::size_t t = 0; t < p.size(); ++t) {
        grid.probabilities(c, static_cast<Eigen::Index>(t)) = p[t];
      }
    } catch (...) {
      failures[u] = std::current_exception();
    }
  }
  for (std::size_t c = 0; c < failures.size(); ++c) {
    if (!failures[c]) continue;
    try {
      std::rethrow_exception(failures[c]);
    } catch (const Error& e) {
      std::ostringstream msg;
      msg << "scan failed at B_q=" << b_axis[c] << " |J0|: " << e.what();
      throw Error(e.kind(), msg.str());
    }
  }
  return grid;
}

BestPoint best_point(const ScanGrid& grid, double t_budget) {
  BestPoint best;
  bool found = false;
  // Column-major walk over tau first, then B_q, so strict improvement keeps
  // the smallest tau and then the smallest field on ties.
  for (std::size_t t = 0; t < grid.t_axis.size(); ++t) {
    if (grid.t_axis[t] > t_budget) continue;
    for (std::size_t b = 0; b < grid.b_axis.size(); ++b) {
      const double p = grid.probabilities(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(t));
      if (!found || p > best.probability) {
        best = BestPoint{grid.b_axis[b], grid.t_axis[t], p, b, t};
        found = true;
      }
    }
  }
  if (!found) throw Error(ErrorKind::invalid_argument, "no scan point within the time budget");
  return best;
}

std::vector<ComparisonRow> compare_protocols(const CouplingFactory& couplings,
                                             const CompareOptions& options) {
  std::vector<ComparisonRow> rows;
  for (std::size_t n : options.n_list) {
    const CouplingMatrix j = couplings(n);
    const double unit = std::abs(j.j0);
    ComparisonRow row;
    row.n_ions = n;

    const ScanGrid grid =
        scan_bangbang(j, options.b_axis, options.t_axis, options.numerics, options.t_final);
    const BestPoint best = best_point(grid, options.t_final);
    row.p_bangbang = best.probability;
    row.quench_field = best.quench_field;
    row.hold_time = best.hold_time;
    row.field_integral_bangbang =
        field_integral(BangBangParams{best.quench_field, best.hold_time}, unit);

    ProfileOptions profile_options;
    profile_options.b_max = options.b0;
    profile_options.n_grid = options.gap_grid;
    profile_options.gap.solver = options.numerics.solver();
    const GapProfile profile = gap_profile(j, profile_options);
    const RampProfile ramp = la_ramp(profile, options.t_final, options.ramp_steps);
    const ProtocolResult la = cn_evolve(j, ramp, options.numerics);
    row.p_locally_adiabatic = la.ground_probability;
    row.gamma = ramp.gamma;
    row.field_integral_adiabatic = la.field_integral;
    row.cn_steps = la.steps;
    row.ratio = row.p_bangbang / row.p_locally_adiabatic;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace tfim
