// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <queue>
#include <random>
#include <string>
#include <vector>

#include "reference/dense_reference.hpp"
#include "tfim/optimize.hpp"

using namespace tfim;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(const char* id, const char* title, const std::function<Outcome()>& check) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!o.pass) ++failures;
  std::printf("%s %s %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

CouplingMatrix random_couplings(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  CouplingMatrix c;
  const auto k = static_cast<Eigen::Index>(n);
  c.j = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = a + 1; b < k; ++b) c.j(a, b) = c.j(b, a) = u(rng);
  }
  c.j0 = mean_nearest_neighbor(c.j);
  return c;
}

Outcome oracle_equivalence() {
  std::mt19937_64 rng(20150101);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst_bb = 0.0;
  double worst_la = 0.0;
  double worst_ref = 0.0;
  Numerics tight;
  tight.cn_convergence = 1e-8;
  for (std::size_t n = 2; n <= 6; ++n) {
    for (int trial = 0; trial < 20; ++trial) {
      const double j0 = unit(rng) < 0.5 ? -1.0 : 1.0;
      const CouplingMatrix c = synthetic_couplings(n, j0, 0.75 + 0.5 * unit(rng));
      const BangBangParams p{5.0 * unit(rng), 6.0 * unit(rng)};
      const double got = bangbang_run(c, p).ground_probability;
      const double want = ref::bangbang_probability(c.j, p.quench_field, p.hold_time);
      worst_bb = std::max(worst_bb, std::abs(got - want));
    }
    for (int trial = 0; trial < 5; ++trial) {
      const double j0 = unit(rng) < 0.5 ? -1.0 : 1.0;
      const CouplingMatrix c = synthetic_couplings(n, j0, 0.75 + 0.5 * unit(rng));
      ProfileOptions po;
      po.b_max = 2.0 + 3.0 * unit(rng);
      const double t_f = 0.5 + 1.5 * unit(rng);
      const RampProfile ramp = la_ramp(gap_profile(c, po), t_f, 256);
      const double got = cn_evolve(c, ramp, tight).ground_probability;
      const auto field = [&](double t) { return ramp.field_at(t); };
      const double coarse = ref::ramp_probability(c.j, field, ramp.times, 4);
      const double want = ref::ramp_probability(c.j, field, ramp.times, 8);
      worst_ref = std::max(worst_ref, std::abs(coarse - want) / 15.0);
      worst_la = std::max(worst_la, std::abs(got - want));
    }
  }
  Outcome o;
  o.pass = worst_bb <= 1e-8 && worst_la <= 1e-8 && worst_ref <= 1e-9;
  o.detail = fmt("max |dP| bang-bang %.2e", worst_bb) + fmt(", adiabatic %.2e", worst_la) +
             fmt(" (reference error estimate %.1e)", worst_ref);
  return o;
}

Outcome two_spin() {
  double worst = 0.0;
  for (double jv : {-1.0, -0.35, 0.8}) {
    for (double b : {0.0, 0.2, 1.1, 4.0}) {
      const Hamiltonian h(synthetic_couplings(2, jv, 1.0), b);
      const Spectrum s = low_spectrum(h, 4);
      const double r = std::sqrt(4 * b * b + jv * jv);
      const double want[4] = {-r, -std::abs(jv), std::abs(jv), r};
      for (int k = 0; k < 4; ++k) worst = std::max(worst, std::abs(s.energies[k] - want[k]) / r);
      worst = std::max(worst, std::abs(coupled_gap(h).gap - 2 * r) / (2 * r));
    }
  }
  double worst_ramp = 0.0;
  for (double jv : {-1.0, 0.8}) {
    const CouplingMatrix c = synthetic_couplings(2, jv, 1.0);
    ProfileOptions po;
    po.n_grid = 8001;
    po.refine = false;
    const double t_f = 6.0;
    const RampProfile ramp = la_ramp(gap_profile(c, po), t_f, 4096);
    const double a = std::abs(jv);
    const double b0 = 5.0 * a;
    const double theta = std::atan(2 * b0 / a);
    worst_ramp = std::max(worst_ramp, std::abs(ramp.gamma - t_f * 8 * a / theta) / ramp.gamma);
    for (std::size_t i = 0; i < ramp.times.size(); ++i) {
      const double want = 0.5 * a * std::tan(theta * (1 - ramp.times[i] / t_f));
      worst_ramp = std::max(worst_ramp, std::abs(ramp.fields[i] - want) / b0);
    }
  }
  Outcome o;
  o.pass = worst <= 1e-9 && worst_ramp <= 1e-9;
  o.detail = fmt("spectrum/gap rel err %.2e", worst) + fmt(", ramp rel err %.2e", worst_ramp);
  return o;
}

Outcome sudden_limits() {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial) % 9;
    const CouplingMatrix c = random_couplings(n, rng);
    const double g = static_cast<double>(classical_ground_manifold(c).degeneracy());
    const double want = g / std::ldexp(1.0, static_cast<int>(n));
    const double quench = bangbang_run(c, {5.0 * unit(rng), 0.0}).ground_probability;
    const double idle = bangbang_run(c, {0.0, 6.0 * unit(rng)}).ground_probability;
    worst = std::max({worst, std::abs(quench - want), std::abs(idle - want)});
  }
  return {worst <= 1e-12, fmt("max |P - g/2^N| %.2e over N = 2..10", worst)};
}

Outcome unitarity() {
  const CouplingMatrix c = synthetic_couplings(10, 1.0, 1.05);
  const RampProfile ramp = la_ramp(gap_profile(c), 6.0);
  const ProtocolResult r = cn_evolve(c, ramp);
  const ProtocolResult hold = cn_propagate(c, RampProfile::constant(2.0, 6.0, 4096), 4096);
  Outcome o;
  o.pass = r.norm_drift < 1e-8 && hold.norm_drift < 1e-8 && hold.energy_drift < 1e-9;
  o.detail = fmt("ramp norm drift %.2e", r.norm_drift) + fmt(" over %.0f steps", double(r.steps)) +
             fmt(", constant-field energy drift %.2e", hold.energy_drift);
  return o;
}

Outcome ramp_endpoint() {
  double worst = 0.0;
  for (std::size_t n : {4u, 8u, 10u}) {
    for (double alpha : {0.75, 1.05, 1.25}) {
      const GapProfile profile = gap_profile(synthetic_couplings(n, 1.0, alpha));
      const RampProfile ramp = la_ramp(profile, 6.0);
      worst = std::max(worst, std::abs(ramp.endpoint) / profile.b_max());
    }
  }
  return {worst <= 1e-3, fmt("max |B(t_f)| / B0 = %.2e", worst)};
}

CompareOptions headline_options() {
  CompareOptions o;
  o.n_list = {4, 5, 6, 7, 8, 9, 10};
  o.b_axis = linspace(0.0, 5.0, 64);
  o.t_axis = linspace(0.0, 6.0, 64);
  return o;
}

double mean_ratio(const std::vector<ComparisonRow>& rows) {
  double m = 0.0;
  for (const ComparisonRow& r : rows) m += r.ratio / static_cast<double>(rows.size());
  return m;
}

std::string ratio_list(const std::vector<ComparisonRow>& rows) {
  std::string s;
  for (const ComparisonRow& r : rows) {
    s += (s.empty() ? "" : " ") + std::to_string(r.n_ions) + ":" + fmt("%.3f", r.ratio);
  }
  return s;
}

// Widest 4-connected region of cells with P >= 0.95 P_max: its extent in rows
// and columns, and whether any solid 3x3 block clears the cut.
struct Plateau {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t cells = 0;
  bool solid = false;
};

Plateau plateau(const Eigen::MatrixXd& p) {
  const double cut = 0.95 * p.maxCoeff();
  const auto nr = p.rows();
  const auto nc = p.cols();
  Eigen::MatrixXi label = Eigen::MatrixXi::Zero(nr, nc);
  Plateau best;
  int next = 0;
  for (Eigen::Index r0 = 0; r0 < nr; ++r0) {
    for (Eigen::Index c0 = 0; c0 < nc; ++c0) {
      if (p(r0, c0) < cut || label(r0, c0) != 0) continue;
      ++next;
      std::queue<std::pair<Eigen::Index, Eigen::Index>> q;
      q.push({r0, c0});
      label(r0, c0) = next;
      Eigen::Index rmin = r0, rmax = r0, cmin = c0, cmax = c0;
      std::size_t cells = 0;
      while (!q.empty()) {
        const auto [r, c] = q.front();
        q.pop();
        ++cells;
        rmin = std::min(rmin, r);
        rmax = std::max(rmax, r);
        cmin = std::min(cmin, c);
        cmax = std::max(cmax, c);
        const Eigen::Index dr[4] = {1, -1, 0, 0};
        const Eigen::Index dc[4] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
          const Eigen::Index rr = r + dr[k];
          const Eigen::Index cc = c + dc[k];
          if (rr < 0 || cc < 0 || rr >= nr || cc >= nc) continue;
          if (p(rr, cc) < cut || label(rr, cc) != 0) continue;
          label(rr, cc) = next;
          q.push({rr, cc});
        }
      }
      const auto rows = static_cast<std::size_t>(rmax - rmin + 1);
      const auto cols = static_cast<std::size_t>(cmax - cmin + 1);
      const std::size_t span = std::min(rows, cols);
      if (span > std::min(best.rows, best.cols) ||
          (span == std::min(best.rows, best.cols) && cells > best.cells)) {
        best.cells = cells;
        best.rows = rows;
        best.cols = cols;
      }
    }
  }
  for (Eigen::Index r = 0; r + 2 < nr && !best.solid; ++r) {
    for (Eigen::Index c = 0; c + 2 < nc && !best.solid; ++c) {
      best.solid = (p.block(r, c, 3, 3).array() >= cut).all();
    }
  }
  return best;
}

Outcome plateau_structure() {
  const std::vector<double> b = linspace(0.0, 5.0, 64);
  const std::vector<double> t = linspace(0.0, 6.0, 64);
  const ScanGrid g8 = scan_bangbang(synthetic_couplings(8, 1.0, 1.05), b, t);
  const ScanGrid g4 = scan_bangbang(synthetic_couplings(4, 1.0, 1.05), b, t);
  const BestPoint best8 = best_point(g8, 6.0);
  const BestPoint best4 = best_point(g4, 6.0);
  const Plateau pl = plateau(g8.probabilities);
  const bool spans = pl.rows >= 3 && pl.cols >= 3;
  const bool trend = best8.hold_time >= best4.hold_time;
  Outcome o;
  o.pass = spans && trend;
  o.detail = "N=8 widest 95% region " + std::to_string(pl.rows) + "x" + std::to_string(pl.cols) +
             " cells (" + std::to_string(pl.cells) + " total, solid 3x3 block: " +
             (pl.solid ? "yes" : "no") + ")" + fmt("; optimal tau N=4 %.3f ms", best4.hold_time) +
             fmt(", N=8 %.3f ms", best8.hold_time);
  return o;
}

Outcome trap_physics() {
  const IonChain three = equilibrium_positions(3);
  const double edge = std::cbrt(1.25);
  const double pos_err = std::max({std::abs(three.positions[0] + edge), std::abs(three.positions[1]),
                                   std::abs(three.positions[2] - edge)});
  TrapConfig cfg;
  double com_err = 0.0;
  for (std::size_t n : {3u, 10u}) {
    cfg.n_ions = n;
    const ModeSpectrum m = transverse_modes(equilibrium_positions(n), cfg);
    com_err = std::max(com_err, std::abs(m.frequencies[0] - cfg.transverse_freq) / cfg.transverse_freq);
  }
  cfg.n_ions = 10;
  double lo = 1e9;
  double hi = -1e9;
  for (double axial = 620.0; axial <= 950.0 + 1e-9; axial += 55.0) {
    cfg.axial_freq = axial;
    const double a = trap_couplings(cfg).alpha_fit;
    lo = std::min(lo, a);
    hi = std::max(hi, a);
  }
  Outcome o;
  o.pass = pos_err <= 1e-9 && com_err <= 1e-12 && lo >= 0.7 && hi <= 1.2;
  o.detail = fmt("N=3 position err %.1e", pos_err) + fmt(", COM rel err %.1e", com_err) +
             fmt(", alpha over 620..950 kHz in [%.3f", lo) + fmt(", %.3f]", hi);
  return o;
}

}  // namespace

int main() {
  report("C1", "oracle equivalence", oracle_equivalence);
  report("C2", "two-spin closed forms", two_spin);
  report("C3", "sudden limits", sudden_limits);
  report("C4", "unitarity and conservation", unitarity);
  report("C5", "ramp self-consistency", ramp_endpoint);

  std::vector<ComparisonRow> rows;
  report("C6", "headline ratio", [&] {
    rows = compare_protocols([](std::size_t n) { return synthetic_couplings(n, 1.0, 1.05); },
                             headline_options());
    bool per_n = true;
    for (const ComparisonRow& r : rows) per_n = per_n && r.ratio >= 0.6 && r.ratio <= 1.0;
    const double mean = mean_ratio(rows);
    return Outcome{per_n && mean >= 0.65 && mean <= 0.95,
                   "P_bb/P_la " + ratio_list(rows) + fmt(", mean %.3f", mean)};
  });
  report("C7", "locally adiabatic never worse", [&] {
    if (rows.empty()) throw std::runtime_error("headline comparison did not run");
    bool ok = true;
    double margin = 1.0;
    for (const ComparisonRow& r : rows) {
      ok = ok && r.p_locally_adiabatic >= r.p_bangbang;
      margin = std::min(margin, r.p_locally_adiabatic - r.p_bangbang);
    }
    return Outcome{ok, fmt("min P_la - P_bb = %.4f", margin)};
  });
  report("C8", "plateau structure", plateau_structure);
  report("C9", "trap physics", trap_physics);

  // Not a criterion: the same comparison with antiferromagnetic couplings.
  try {
    const auto afm = compare_protocols(
        [](std::size_t n) { return synthetic_couplings(n, -1.0, 1.05); }, headline_options());
    std::printf("INFO J0=-1 kHz ratios %s, mean %.3f\n", ratio_list(afm).c_str(), mean_ratio(afm));
  } catch (const std::exception& e) {
    std::printf("INFO J0=-1 kHz comparison failed: %s\n", e.what());
  }

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
