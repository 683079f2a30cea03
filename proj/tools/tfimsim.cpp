// Command-line driver: one subcommand per artifact family.
//
//   tfimsim couplings spectrum scan ramp compare --config run.json [--out dir] [--threads n]
//
// Exit codes: 0 success, 1 user error, 2 numerical failure.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <omp.h>

#include <CLI11.hpp>

#include "tfim/config.hpp"
#include "tfim/io.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "1.0.0";
constexpr const char* kOutEnv = "TFIM_OUT_DIR";

std::string tag(std::size_t n) { return "N" + std::to_string(n); }

ordered_json run_couplings(const tfim::RunConfig& cfg, const fs::path& out) {
  ordered_json achieved = ordered_json::object();
  for (std::size_t n : cfg.n_list) {
    const tfim::CouplingMatrix j = cfg.couplings(n);
    tfim::io::write_file(out / ("couplings_" + tag(n) + ".csv"), tfim::io::couplings_csv(j));
    if (cfg.trap) {
      tfim::TrapConfig trap = *cfg.trap;
      trap.n_ions = n;
      const tfim::IonChain chain = tfim::equilibrium_positions(n);
      tfim::io::write_file(out / ("modes_" + tag(n) + ".csv"),
                           tfim::io::modes_csv(tfim::transverse_modes(chain, trap)));
    }
    achieved[tag(n)] = {{"j0_khz", j.j0}, {"alpha_fit", j.alpha_fit}};
  }
  return achieved;
}

ordered_json run_spectrum(const tfim::RunConfig& cfg, const fs::path& out) {
  ordered_json achieved = ordered_json::object();
  for (std::size_t n : cfg.n_list) {
    const tfim::CouplingMatrix j = cfg.couplings(n);
    tfim::ProfileOptions options;
    options.b_max = cfg.spectrum_b_max;
    options.n_grid = cfg.spectrum_grid;
    options.refine = cfg.spectrum_refine;
    options.gap.solver = cfg.numerics.solver();
    const tfim::GapProfile profile = tfim::gap_profile(j, options);
    tfim::io::write_file(out / ("gap_" + tag(n) + ".csv"), tfim::io::gap_csv(profile));

    const std::vector<double> grid = tfim::linspace(0.0, cfg.spectrum_b_max, cfg.spectrum_grid);
    const tfim::Hamiltonian base(j, 0.0, cfg.spin_cap);
    const std::size_t levels = std::min(cfg.spectrum_levels, base.dimension());
    std::vector<tfim::Spectrum> spectra(grid.size());
    std::vector<tfim::SectorLabels> labels(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const tfim::Hamiltonian h = base.with_field(grid[i] * std::abs(j.j0));
      spectra[i] = tfim::low_spectrum(h, levels, cfg.numerics.solver());
      labels[i] = tfim::sector_labels(spectra[i], h);
    }
    tfim::io::write_file(out / ("levels_" + tag(n) + ".csv"),
                         tfim::io::levels_csv(grid, spectra, labels));
    const auto min_it = std::min_element(profile.gaps().begin(), profile.gaps().end());
    achieved[tag(n)] = {
        {"min_gap_khz", *min_it},
        {"argmin_b_over_j0", profile.field_grid()[static_cast<std::size_t>(min_it - profile.gaps().begin())]},
        {"nodes", profile.fields_khz().size()}};
  }
  return achieved;
}

ordered_json run_scan(const tfim::RunConfig& cfg, const fs::path& out) {
  ordered_json achieved = ordered_json::object();
  for (std::size_t n : cfg.n_list) {
    const tfim::CouplingMatrix j = cfg.couplings(n);
    tfim::ScanGrid grid =
        tfim::scan_bangbang(j, cfg.b_axis(), cfg.t_axis(), cfg.numerics, cfg.t_budget);
    grid.trap = cfg.trap ? "trap" : "synthetic";
    const tfim::BestPoint best = tfim::best_point(grid, cfg.t_budget);
    tfim::io::write_file(out / ("scan_" + tag(n) + ".csv"), tfim::io::scan_csv(grid));
    tfim::io::write_file(out / ("scan_" + tag(n) + ".json"),
                         tfim::io::scan_sidecar(grid, best, cfg.t_budget).dump(2) + "\n");
    const tfim::BangBangParams params{best.quench_field, best.hold_time};
    const tfim::ProtocolResult result = tfim::bangbang_run(j, params, cfg.numerics);
    const ordered_json p = {{"protocol", "bangbang"},
                            {"n", n},
                            {"b_quench_over_j0", params.quench_field},
                            {"hold_time_ms", params.hold_time}};
    tfim::io::write_file(out / ("bangbang_" + tag(n) + ".json"),
                         tfim::io::protocol_json(p, result).dump(2) + "\n");
    achieved[tag(n)] = {{"p_best", best.probability}, {"energy_drift", result.energy_drift}};
  }
  return achieved;
}

ordered_json run_ramp(const tfim::RunConfig& cfg, const fs::path& out) {
  ordered_json achieved = ordered_json::object();
  for (std::size_t n : cfg.n_list) {
    const tfim::CouplingMatrix j = cfg.couplings(n);
    tfim::ProfileOptions options;
    options.b_max = cfg.b0;
    options.n_grid = cfg.gap_grid;
    options.gap.solver = cfg.numerics.solver();
    const tfim::GapProfile profile = tfim::gap_profile(j, options);
    const tfim::RampProfile ramp = tfim::la_ramp(profile, cfg.t_final, cfg.ramp_steps);
    tfim::io::write_file(out / ("ramp_" + tag(n) + ".csv"),
                         tfim::io::ramp_csv(ramp, std::abs(j.j0)));
    const tfim::ProtocolResult result = tfim::cn_evolve(j, ramp, cfg.numerics);
    const ordered_json p = {{"protocol", "locally_adiabatic"},
                            {"n", n},
                            {"t_final_ms", cfg.t_final},
                            {"b0_over_j0", cfg.b0},
                            {"gamma", ramp.gamma}};
    tfim::io::write_file(out / ("adiabatic_" + tag(n) + ".json"),
                         tfim::io::protocol_json(p, result).dump(2) + "\n");
    achieved[tag(n)] = {{"cn_steps", result.steps},
                        {"convergence_delta", result.convergence_delta},
                        {"norm_drift", result.norm_drift}};
  }
  return achieved;
}

ordered_json run_compare(const tfim::RunConfig& cfg, const fs::path& out) {
  const auto rows = tfim::compare_protocols([&](std::size_t n) { return cfg.couplings(n); },
                                            cfg.compare_options());
  tfim::io::write_file(out / "comparison.csv", tfim::io::comparison_csv(rows));
  ordered_json achieved = ordered_json::object();
  double mean = 0.0;
  for (const auto& r : rows) mean += r.ratio / static_cast<double>(rows.size());
  achieved["mean_ratio"] = mean;
  return achieved;
}

void report_error(std::string_view kind, const std::string& message, const fs::path* out) {
  const ordered_json record = {{"error", kind}, {"message", message}};
  std::cerr << record.dump() << '\n';
  if (out != nullptr) {
    try {
      tfim::io::write_file(*out / "error.json", record.dump(2) + "\n");
    } catch (...) {
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bang-bang versus locally adiabatic ground-state preparation in trapped-ion Ising simulators"};
  std::vector<std::string> commands;
  std::string config_path;
  std::string out_flag;
  std::size_t threads = 0;
  app.add_option("commands", commands, "couplings, spectrum, scan, ramp, compare")
      ->required()
      ->check(CLI::IsMember({"couplings", "spectrum", "scan", "ramp", "compare"}));
  app.add_option("--config", config_path, "JSON run configuration")->required();
  app.add_option("--out", out_flag, "output directory (overrides $TFIM_OUT_DIR and the config)");
  app.add_option("--threads", threads, "worker threads (0 = all cores)");
  app.set_version_flag("--version", kVersion);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  fs::path out;
  bool have_out = false;
  try {
    tfim::RunConfig cfg = tfim::load_config(config_path);
    if (const char* env = std::getenv(kOutEnv); env != nullptr && *env != '\0') cfg.out_dir = env;
    if (!out_flag.empty()) cfg.out_dir = out_flag;
    if (app.count("--threads") > 0) cfg.threads = threads;
    out = cfg.out_dir;
    have_out = true;
    fs::create_directories(out);
    if (cfg.threads > 0) omp_set_num_threads(static_cast<int>(cfg.threads));

    tfim::io::write_file(out / "resolved_config.json", tfim::to_json(cfg).dump(2) + "\n");

    ordered_json manifest;
    manifest["version"] = kVersion;
    manifest["config"] = config_path;
    manifest["threads"] = cfg.threads == 0 ? omp_get_max_threads() : static_cast<int>(cfg.threads);
    manifest["commands"] = commands;
    ordered_json timings = ordered_json::object();
    ordered_json achieved = ordered_json::object();
    for (const std::string& cmd : commands) {
      const auto start = std::chrono::steady_clock::now();
      ordered_json result;
      if (cmd == "couplings") result = run_couplings(cfg, out);
      else if (cmd == "spectrum") result = run_spectrum(cfg, out);
      else if (cmd == "scan") result = run_scan(cfg, out);
      else if (cmd == "ramp") result = run_ramp(cfg, out);
      else result = run_compare(cfg, out);
      timings[cmd] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      achieved[cmd] = std::move(result);
    }
    manifest["timings_s"] = std::move(timings);
    manifest["achieved"] = std::move(achieved);
    tfim::io::write_file(out / "manifest.json", manifest.dump(2) + "\n");
    return 0;
  } catch (const tfim::Error& e) {
    report_error(tfim::to_string(e.kind()), e.what(), have_out ? &out : nullptr);
    return e.numerical() ? 2 : 1;
  } catch (const std::exception& e) {
    report_error("internal", e.what(), have_out ? &out : nullptr);
    return 2;
  }
}
