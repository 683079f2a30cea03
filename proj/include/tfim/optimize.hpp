#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "tfim/protocols.hpp"

namespace tfim {

/// Ground-state probability over the (quench field, hold time) plane.
struct ScanGrid {
  std::vector<double> b_axis;  // units of |J0|
  std::vector<double> t_axis;  // ms
  Eigen::MatrixXd probabilities;  // rows follow b_axis, columns t_axis
  std::size_t n_spins = 0;
  double alpha = 0.0;
  double j0 = 0.0;
  std::string trap;
};

struct BestPoint {
  double quench_field = 0.0;
  double hold_time = 0.0;
  double probability = 0.0;
  std::size_t b_index = 0;
  std::size_t t_index = 0;
};

/// One propagator per field column, evaluated at every hold time.
ScanGrid scan_bangbang(const CouplingMatrix& j, const std::vector<double>& b_axis,
                       const std::vector<double>& t_axis, const Numerics& numerics = {},
                       double t_budget = 6.0);

/// Maximum over tau <= t_budget; ties go to smaller tau, then smaller B_q.
BestPoint best_point(const ScanGrid& grid, double t_budget);

struct ComparisonRow {
  std::size_t n_ions = 0;
  double p_bangbang = 0.0;
  double quench_field = 0.0;
  double hold_time = 0.0;
  double p_locally_adiabatic = 0.0;
  double ratio = 0.0;
  double gamma = 0.0;
  double field_integral_bangbang = 0.0;
  double field_integral_adiabatic = 0.0;
  std::size_t cn_steps = 0;
};

struct CompareOptions {
  std::vector<std::size_t> n_list;
  double t_final = 6.0;
  std::vector<double> b_axis;
  std::vector<double> t_axis;
  double b0 = 5.0;  // units of |J0|
  std::size_t gap_grid = 64;
  std::size_t ramp_steps = 4096;
  Numerics numerics;
};

/// Builds the coupling matrix for a given chain length.
using CouplingFactory = std::function<CouplingMatrix(std::size_t)>;

std::vector<ComparisonRow> compare_protocols(const CouplingFactory& couplings,
                                             const CompareOptions& options);

/// n evenly spaced points on [lo, hi], endpoints included.
std::vector<double> linspace(double lo, double hi, std::size_t n);

}  // namespace tfim
