#include "tfim/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace tfim::io {

std::string format(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::invalid_argument, "cannot open " + path.string() + " for writing");
  out << content;
  if (!out) throw Error(ErrorKind::invalid_argument, "failed writing " + path.string());
}

std::string couplings_csv(const CouplingMatrix& j) {
  std::ostringstream out;
  out << "i,j,j_khz\n";
  for (Eigen::Index r = 0; r < j.j.rows(); ++r) {
    for (Eigen::Index c = 0; c < j.j.cols(); ++c) {
      out << r + 1 << ',' << c + 1 << ',' << format(j.j(r, c)) << '\n';
    }
  }
  return out.str();
}

std::string modes_csv(const ModeSpectrum& modes) {
  std::ostringstream out;
  out << "mode,frequency_khz";
  for (Eigen::Index i = 0; i < modes.vectors.rows(); ++i) out << ",b_" << i + 1;
  out << '\n';
  for (Eigen::Index m = 0; m < modes.frequencies.size(); ++m) {
    out << m + 1 << ',' << format(modes.frequencies[m]);
    for (Eigen::Index i = 0; i < modes.vectors.rows(); ++i) out << ',' << format(modes.vectors(i, m));
    out << '\n';
  }
  return out.str();
}

std::string gap_csv(const GapProfile& profile) {
  std::ostringstream out;
  out << "b_over_j0,b_khz,gap_khz,ground_energy_khz\n";
  const std::vector<double> grid = profile.field_grid();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out << format(grid[i]) << ',' << format(profile.fields_khz()[i]) << ','
        << format(profile.gaps()[i]) << ',' << format(profile.ground_energies()[i]) << '\n';
  }
  return out.str();
}

std::string levels_csv(const std::vector<double>& fields_over_j0,
                       const std::vector<Spectrum>& spectra,
                       const std::vector<SectorLabels>& labels) {
  std::ostringstream out;
  out << "b_over_j0,level,energy_khz,excitation_khz,spin_parity,spatial_parity\n";
  for (std::size_t f = 0; f < spectra.size(); ++f) {
    const Spectrum& s = spectra[f];
    for (Eigen::Index k = 0; k < s.energies.size(); ++k) {
      const auto u = static_cast<std::size_t>(k);
      out << format(fields_over_j0[f]) << ',' << k << ',' << format(s.energies[k]) << ','
          << format(s.energies[k] - s.energies[0]) << ',' << labels[f].spin_parity[u] << ','
          << labels[f].spatial_parity[u] << '\n';
    }
  }
  return out.str();
}

std::string ramp_csv(const RampProfile& ramp, double field_unit) {
  std::ostringstream out;
  out << "t_ms,b_over_j0\n";
  for (std::size_t i = 0; i < ramp.times.size(); ++i) {
    out << format(ramp.times[i]) << ',' << format(ramp.fields[i] / field_unit) << '\n';
  }
  return out.str();
}

std::string scan_csv(const ScanGrid& grid) {
  std::ostringstream out;
  out << "b_over_j0,t_ms,p\n";
  for (std::size_t b = 0; b < grid.b_axis.size(); ++b) {
    for (std::size_t t = 0; t < grid.t_axis.size(); ++t) {
      out << format(grid.b_axis[b]) << ',' << format(grid.t_axis[t]) << ','
          << format(grid.probabilities(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(t)))
          << '\n';
    }
  }
  return out.str();
}

std::string comparison_csv(const std::vector<ComparisonRow>& rows) {
  std::ostringstream out;
  out << "n,p_bb,p_la,ratio,b_quench_over_j0,hold_time_ms,gamma,field_integral_bb,"
         "field_integral_la,cn_steps\n";
  for (const ComparisonRow& r : rows) {
    out << r.n_ions << ',' << format(r.p_bangbang) << ',' << format(r.p_locally_adiabatic) << ','
        << format(r.ratio) << ',' << format(r.quench_field) << ',' << format(r.hold_time) << ','
        << format(r.gamma) << ',' << format(r.field_integral_bangbang) << ','
        << format(r.field_integral_adiabatic) << ',' << r.cn_steps << '\n';
  }
  return out.str();
}

nlohmann::ordered_json scan_sidecar(const ScanGrid& grid, const BestPoint& best, double t_budget) {
  nlohmann::ordered_json j;
  j["n"] = grid.n_spins;
  j["alpha"] = grid.alpha;
  j["j0_khz"] = grid.j0;
  j["trap"] = grid.trap;
  j["b_axis"] = {{"min", grid.b_axis.front()}, {"max", grid.b_axis.back()}, {"points", grid.b_axis.size()}};
  j["t_axis"] = {{"min", grid.t_axis.front()}, {"max", grid.t_axis.back()}, {"points", grid.t_axis.size()}};
  j["t_budget_ms"] = t_budget;
  j["best"] = {{"b_over_j0", best.quench_field},
               {"t_ms", best.hold_time},
               {"p", best.probability},
               {"b_index", best.b_index},
               {"t_index", best.t_index}};
  return j;
}

nlohmann::ordered_json protocol_json(const nlohmann::ordered_json& params,
                                     const ProtocolResult& result) {
  nlohmann::ordered_json j;
  j["params"] = params;
  j["P"] = result.ground_probability;
  j["field_integral"] = result.field_integral;
  j["steps"] = result.steps;
  j["norm_drift"] = result.norm_drift;
  nlohmann::ordered_json hist = nlohmann::ordered_json::array();
  for (const ExcitationBin& b : result.excitation_histogram) {
    hist.push_back({{"energy_low_khz", b.energy_low},
                    {"energy_high_khz", b.energy_high},
                    {"p", b.probability}});
  }
  j["histogram"] = std::move(hist);
  return j;
}

}  // namespace tfim::io
