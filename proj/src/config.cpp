#include "tfim/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace tfim {
namespace {

using nlohmann::json;

// Reads typed fields from one JSON object and rejects keys nobody asked for.
class Section {
 public:
  Section(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) fail("must be an object");
  }

  const json* find(const char* key) {
    seen_.insert(key);
    const auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  void get(const char* key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) fail(std::string(key) + " must be a number");
      out = v->get<double>();
    }
  }

  void get(const char* key, std::size_t& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer() || v->get<long long>() < 0) {
        fail(std::string(key) + " must be a non-negative integer");
      }
      out = v->get<std::size_t>();
    }
  }

  void get(const char* key, std::uint64_t& out, int) {
    std::size_t tmp = out;
    get(key, tmp);
    out = tmp;
  }

  void get(const char* key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) fail(std::string(key) + " must be a boolean");
      out = v->get<bool>();
    }
  }

  void get(const char* key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) fail(std::string(key) + " must be a string");
      out = v->get<std::string>();
    }
  }

  void finish() const {
    for (const auto& [key, value] : obj_.items()) {
      if (!seen_.count(key)) fail("unknown key '" + key + "'");
    }
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorKind::schema, path_ + ": " + what);
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

void require_positive(double v, const char* name) {
  if (!(v > 0.0)) throw Error(ErrorKind::schema, std::string(name) + " must be positive");
}

}  // namespace

CouplingMatrix RunConfig::couplings(std::size_t n) const {
  if (trap) {
    TrapConfig t = *trap;
    t.n_ions = n;
    return trap_couplings(t);
  }
  const SyntheticCouplings s = synthetic.value_or(SyntheticCouplings{});
  return synthetic_couplings(n, s.j0, s.alpha);
}

std::vector<double> RunConfig::b_axis() const {
  return linspace(scan_b_min, scan_b_max, scan_b_points);
}

std::vector<double> RunConfig::t_axis() const {
  return linspace(scan_t_min, scan_t_max, scan_t_points);
}

CompareOptions RunConfig::compare_options() const {
  CompareOptions o;
  o.n_list = n_list;
  o.t_final = t_final;
  o.b_axis = b_axis();
  o.t_axis = t_axis();
  o.b0 = b0;
  o.gap_grid = gap_grid;
  o.ramp_steps = ramp_steps;
  o.numerics = numerics;
  return o;
}

RunConfig parse_config(const json& doc) {
  RunConfig cfg;
  Section root(doc, "config");

  if (const json* t = root.find("trap")) {
    Section s(*t, "trap");
    TrapConfig trap;
    s.get("axial_freq", trap.axial_freq);
    s.get("transverse_freq", trap.transverse_freq);
    s.get("detuning", trap.detuning);
    s.get("rabi_freq", trap.rabi_freq);
    double mass = 0.0;
    double wavelength = 0.0;
    s.get("ion_mass_amu", mass);
    s.get("wavelength_nm", wavelength);
    const bool has_recoil = s.find("recoil_freq") != nullptr;
    s.get("recoil_freq", trap.recoil_freq);
    if (mass > 0.0 || wavelength > 0.0) {
      if (has_recoil) s.fail("give either recoil_freq or (ion_mass_amu, wavelength_nm), not both");
      trap.recoil_freq = TrapConfig::recoil_from(mass, wavelength);
    }
    s.finish();
    try {
      trap.validate();
    } catch (const Error& e) {
      throw Error(ErrorKind::schema, std::string("trap: ") + e.what());
    }
    cfg.trap = trap;
  }
  if (const json* t = root.find("synthetic")) {
    if (cfg.trap) root.fail("give either trap or synthetic, not both");
    Section s(*t, "synthetic");
    SyntheticCouplings syn;
    s.get("j0", syn.j0);
    s.get("alpha", syn.alpha);
    s.finish();
    if (syn.j0 == 0.0) s.fail("j0 must be nonzero");
    require_positive(syn.alpha, "synthetic.alpha");
    cfg.synthetic = syn;
  }
  if (!cfg.trap && !cfg.synthetic) cfg.synthetic = SyntheticCouplings{};

  if (const json* t = root.find("model")) {
    Section s(*t, "model");
    if (const json* n = s.find("n")) {
      cfg.n_list.clear();
      if (n->is_number_integer()) {
        cfg.n_list.push_back(n->get<std::size_t>());
      } else if (n->is_array() && !n->empty()) {
        for (const json& v : *n) {
          if (!v.is_number_integer()) s.fail("n entries must be integers");
          cfg.n_list.push_back(v.get<std::size_t>());
        }
      } else {
        s.fail("n must be an integer or a non-empty integer array");
      }
    }
    s.get("spin_cap", cfg.spin_cap);
    s.finish();
  }
  for (std::size_t n : cfg.n_list) {
    if (n < 2) throw Error(ErrorKind::schema, "model: every N must be at least 2");
    if (n > cfg.spin_cap) {
      std::ostringstream msg;
      msg << "model: N=" << n << " exceeds the spin cap of " << cfg.spin_cap;
      throw Error(ErrorKind::cap_breach, msg.str());
    }
  }

  if (const json* t = root.find("spectrum")) {
    Section s(*t, "spectrum");
    s.get("b_max", cfg.spectrum_b_max);
    s.get("n_grid", cfg.spectrum_grid);
    s.get("levels", cfg.spectrum_levels);
    s.get("refine", cfg.spectrum_refine);
    s.finish();
  }
  require_positive(cfg.spectrum_b_max, "spectrum.b_max");
  if (cfg.spectrum_grid < 16) throw Error(ErrorKind::schema, "spectrum.n_grid must be >= 16");

  if (const json* t = root.find("bangbang")) {
    Section s(*t, "bangbang");
    s.get("b_min", cfg.scan_b_min);
    s.get("b_max", cfg.scan_b_max);
    s.get("b_points", cfg.scan_b_points);
    s.get("t_min", cfg.scan_t_min);
    s.get("t_max", cfg.scan_t_max);
    s.get("t_points", cfg.scan_t_points);
    s.get("t_budget", cfg.t_budget);
    s.finish();
  }
  if (cfg.scan_b_points < 1 || cfg.scan_t_points < 1) {
    throw Error(ErrorKind::schema, "bangbang: axes need at least one point");
  }
  if (cfg.scan_b_min < 0.0 || cfg.scan_t_min < 0.0 || cfg.scan_b_max < cfg.scan_b_min ||
      cfg.scan_t_max < cfg.scan_t_min) {
    throw Error(ErrorKind::schema, "bangbang: axis bounds must be non-negative and ordered");
  }
  if (cfg.scan_t_max > cfg.t_budget) {
    throw Error(ErrorKind::schema, "bangbang: t_max exceeds t_budget");
  }

  if (const json* t = root.find("ramp")) {
    Section s(*t, "ramp");
    s.get("t_final", cfg.t_final);
    s.get("b0", cfg.b0);
    s.get("gap_grid", cfg.gap_grid);
    s.get("steps", cfg.ramp_steps);
    s.finish();
  }
  require_positive(cfg.t_final, "ramp.t_final");
  require_positive(cfg.b0, "ramp.b0");
  if (cfg.gap_grid < 16) throw Error(ErrorKind::schema, "ramp.gap_grid must be >= 16");
  if (cfg.ramp_steps < 1) throw Error(ErrorKind::schema, "ramp.steps must be positive");

  if (const json* t = root.find("numerics")) {
    Section s(*t, "numerics");
    Numerics& n = cfg.numerics;
    s.get("dense_limit", n.dense_limit);
    s.get("krylov_dim", n.krylov_dim);
    s.get("krylov_infidelity", n.krylov_infidelity);
    s.get("cn_solve_tol", n.cn_solve_tol);
    s.get("cn_convergence", n.cn_convergence);
    s.get("cn_max_steps", n.cn_max_steps);
    s.get("norm_drift_tol", n.norm_drift_tol);
    s.get("histogram_bins", n.histogram_bins);
    s.get("seed", n.seed, 0);
    s.get("threads", cfg.threads);
    s.finish();
    require_positive(n.krylov_infidelity, "numerics.krylov_infidelity");
    require_positive(n.cn_solve_tol, "numerics.cn_solve_tol");
    require_positive(n.cn_convergence, "numerics.cn_convergence");
    require_positive(n.norm_drift_tol, "numerics.norm_drift_tol");
  }

  if (const json* t = root.find("output")) {
    Section s(*t, "output");
    s.get("dir", cfg.out_dir);
    s.finish();
  }
  root.finish();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::invalid_argument, "cannot read config file " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::schema, std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

nlohmann::ordered_json to_json(const RunConfig& cfg) {
  nlohmann::ordered_json j;
  if (cfg.trap) {
    j["trap"] = {{"axial_freq", cfg.trap->axial_freq},
                 {"transverse_freq", cfg.trap->transverse_freq},
                 {"detuning", cfg.trap->detuning},
                 {"rabi_freq", cfg.trap->rabi_freq},
                 {"recoil_freq", cfg.trap->recoil_freq}};
  } else {
    const SyntheticCouplings s = cfg.synthetic.value_or(SyntheticCouplings{});
    j["synthetic"] = {{"j0", s.j0}, {"alpha", s.alpha}};
  }
  j["model"] = {{"n", cfg.n_list}, {"spin_cap", cfg.spin_cap}};
  j["spectrum"] = {{"b_max", cfg.spectrum_b_max},
                   {"n_grid", cfg.spectrum_grid},
                   {"levels", cfg.spectrum_levels},
                   {"refine", cfg.spectrum_refine}};
  j["bangbang"] = {{"b_min", cfg.scan_b_min},   {"b_max", cfg.scan_b_max},
                   {"b_points", cfg.scan_b_points}, {"t_min", cfg.scan_t_min},
                   {"t_max", cfg.scan_t_max},   {"t_points", cfg.scan_t_points},
                   {"t_budget", cfg.t_budget}};
  j["ramp"] = {{"t_final", cfg.t_final},
               {"b0", cfg.b0},
               {"gap_grid", cfg.gap_grid},
               {"steps", cfg.ramp_steps}};
  const Numerics& n = cfg.numerics;
  j["numerics"] = {{"dense_limit", n.dense_limit},
                   {"krylov_dim", n.krylov_dim},
                   {"krylov_infidelity", n.krylov_infidelity},
                   {"cn_solve_tol", n.cn_solve_tol},
                   {"cn_convergence", n.cn_convergence},
                   {"cn_max_steps", n.cn_max_steps},
                   {"norm_drift_tol", n.norm_drift_tol},
                   {"histogram_bins", n.histogram_bins},
                   {"seed", n.seed},
                   {"threads", cfg.threads}};
  j["output"] = {{"dir", cfg.out_dir}};
  return j;
}

}  // namespace tfim
