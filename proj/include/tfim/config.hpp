#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tfim/optimize.hpp"
#include "tfim/trapchain.hpp"

namespace tfim {

struct SyntheticCouplings {
  double j0 = 1.0;  // kHz, signed
  double alpha = 1.05;
};

/// Everything a CLI run needs. Parsed from JSON; unknown keys are rejected.
struct RunConfig {
  std::optional<TrapConfig> trap;
  std::optional<SyntheticCouplings> synthetic;

  std::vector<std::size_t> n_list{4, 5, 6, 7, 8, 9, 10};
  std::size_t spin_cap = kDefaultSpinCap;

  double spectrum_b_max = 5.0;
  std::size_t spectrum_grid = 64;
  std::size_t spectrum_levels = 8;
  bool spectrum_refine = true;

  double scan_b_min = 0.0;
  double scan_b_max = 5.0;
  std::size_t scan_b_points = 64;
  double scan_t_min = 0.0;
  double scan_t_max = 6.0;
  std::size_t scan_t_points = 64;
  double t_budget = 6.0;

  double t_final = 6.0;
  double b0 = 5.0;
  std::size_t gap_grid = 64;
  std::size_t ramp_steps = 4096;

  Numerics numerics;
  std::size_t threads = 0;  // 0 = all available cores

  std::string out_dir = "out";

  /// Couplings for a chain of n ions under this configuration.
  CouplingMatrix couplings(std::size_t n) const;

  std::vector<double> b_axis() const;
  std::vector<double> t_axis() const;
  CompareOptions compare_options() const;
};

/// Throws Error(schema) on unknown keys or wrong types, Error(cap_breach) when
/// a requested N exceeds the spin cap.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);

/// Fully resolved configuration; feeding it back reproduces the run.
nlohmann::ordered_json to_json(const RunConfig& cfg);

}  // namespace tfim
