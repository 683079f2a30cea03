#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "tfim/optimize.hpp"

namespace tfim::io {

/// 17 significant digits, "%.17g".
std::string format(double value);

/// Writes with '\n' line ends, replacing any existing file.
void write_file(const std::filesystem::path& path, const std::string& content);

std::string couplings_csv(const CouplingMatrix& j);
std::string modes_csv(const ModeSpectrum& modes);
std::string gap_csv(const GapProfile& profile);
std::string levels_csv(const std::vector<double>& fields_over_j0,
                       const std::vector<Spectrum>& spectra,
                       const std::vector<SectorLabels>& labels);
std::string ramp_csv(const RampProfile& ramp, double field_unit);
std::string scan_csv(const ScanGrid& grid);
std::string comparison_csv(const std::vector<ComparisonRow>& rows);

nlohmann::ordered_json scan_sidecar(const ScanGrid& grid, const BestPoint& best, double t_budget);
nlohmann::ordered_json protocol_json(const nlohmann::ordered_json& params,
                                     const ProtocolResult& result);

}  // namespace tfim::io
