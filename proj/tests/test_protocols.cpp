#include <cmath>
#include <numeric>
#include <random>

#include <doctest.h>

#include "reference/dense_reference.hpp"
#include "tfim/protocols.hpp"

using namespace tfim;

namespace {

double histogram_total(const std::vector<ExcitationBin>& h) {
  return std::accumulate(h.begin(), h.end(), 0.0,
                         [](double acc, const ExcitationBin& b) { return acc + b.probability; });
}

// Gap profile sampled from the two-spin closed form 2 sqrt(4B^2 + J^2).
GapProfile two_spin_profile(double jv, double b0, std::size_t nodes) {
  std::vector<double> f(nodes), g(nodes), e(nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    f[i] = b0 * static_cast<double>(i) / static_cast<double>(nodes - 1);
    g[i] = 2.0 * std::sqrt(4.0 * f[i] * f[i] + jv * jv);
  }
  return GapProfile(f, g, e, std::abs(jv));
}

}  // namespace

TEST_SUITE("protocols") {

TEST_CASE("bang-bang reference value") {
  const ProtocolResult r = bangbang_run(synthetic_couplings(4, -1.0, 1.05), {1.0, 2.0});
  CHECK(r.ground_probability == doctest::Approx(0.3500208058247378).epsilon(1e-12));
  CHECK(std::abs(histogram_total(r.excitation_histogram) + r.ground_probability - 1.0) < 1e-12);
  CHECK(r.norm_drift < 1e-12);
  CHECK(r.energy_drift < 1e-12);
  CHECK(r.field_integral == doctest::Approx(2.0));
}

TEST_CASE("bang-bang against the dense reference") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> field(0.0, 5.0);
  std::uniform_real_distribution<double> hold(0.0, 6.0);
  for (std::size_t n = 2; n <= 5; ++n) {
    for (double j0 : {-1.0, 1.0}) {
      const CouplingMatrix c = synthetic_couplings(n, j0, 0.9);
      for (int trial = 0; trial < 3; ++trial) {
        const BangBangParams p{field(rng), hold(rng)};
        const double expected = ref::bangbang_probability(c.j, p.quench_field, p.hold_time);
        CHECK(std::abs(bangbang_run(c, p).ground_probability - expected) < 1e-10);
      }
    }
  }
}

TEST_CASE("Krylov hold path agrees with the dense path") {
  const CouplingMatrix c = synthetic_couplings(8, -1.0, 1.05);
  const GroundManifold m = classical_ground_manifold(c);
  Numerics krylov;
  krylov.dense_limit = 1;
  const HoldPropagator dense(c, 0.8, m);
  const HoldPropagator sparse(c, 0.8, m, krylov);
  CHECK(dense.dense());
  CHECK_FALSE(sparse.dense());
  const std::vector<double> times{0.0, 0.4, 1.7, 5.5};
  const std::vector<double> pd = dense.probabilities(times);
  const std::vector<double> ps = sparse.probabilities(times);
  for (std::size_t i = 0; i < times.size(); ++i) CHECK(std::abs(pd[i] - ps[i]) < 1e-8);
}

TEST_CASE("sudden limits give g / 2^N") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::size_t n : {3u, 6u, 9u}) {
    CouplingMatrix c = synthetic_couplings(n, 1.0, 1.0);
    for (Eigen::Index a = 0; a < c.j.rows(); ++a) {
      for (Eigen::Index b = a + 1; b < c.j.cols(); ++b) c.j(a, b) = c.j(b, a) = u(rng);
    }
    c.j0 = mean_nearest_neighbor(c.j);
    const double g = static_cast<double>(classical_ground_manifold(c).degeneracy());
    const double expected = g / std::ldexp(1.0, static_cast<int>(n));
    CHECK(std::abs(bangbang_run(c, {2.5, 0.0}).ground_probability - expected) < 1e-12);
    CHECK(std::abs(bangbang_run(c, {0.0, 3.3}).ground_probability - expected) < 1e-12);
  }
}

TEST_CASE("two-spin adiabaticity parameter and ramp in closed form") {
  for (double jv : {-1.0, 0.6}) {
    const double b0 = 5.0 * std::abs(jv);
    const double t_f = 6.0;
    const GapProfile profile = two_spin_profile(jv, b0, 8001);
    const double theta = std::atan(2.0 * b0 / std::abs(jv));
    const double gamma = t_f * 8.0 * std::abs(jv) / theta;
    CHECK(std::abs(la_gamma(profile, t_f) - gamma) <= 1e-9 * gamma);

    const RampProfile ramp = la_ramp(profile, t_f, 4096);
    CHECK(std::abs(ramp.gamma - gamma) <= 1e-9 * gamma);
    CHECK(std::abs(ramp.endpoint) < 1e-9 * b0);
    for (std::size_t i = 0; i < ramp.times.size(); i += 97) {
      const double exact = 0.5 * std::abs(jv) * std::tan(theta * (1.0 - ramp.times[i] / t_f));
      CHECK(std::abs(ramp.fields[i] - exact) <= 1e-9 * b0);
    }
    const double integral = 0.5 * std::abs(jv) * t_f / theta * -std::log(std::cos(theta));
    CHECK(field_integral(ramp) == doctest::Approx(integral).epsilon(1e-6));
  }
}

TEST_CASE("constant gap gives a linear ramp") {
  const GapProfile flat = GapProfile::constant(2.0, 5.0, 16, 1.0);
  const RampProfile ramp = la_ramp(flat, 3.0, 64);
  CHECK(ramp.gamma == doctest::Approx(3.0 * 4.0 / 5.0));
  for (std::size_t i = 0; i < ramp.times.size(); ++i) {
    CHECK(ramp.fields[i] == doctest::Approx(5.0 * (1.0 - ramp.times[i] / 3.0)).epsilon(1e-12));
  }
  CHECK(ramp.field_at(1.5) == doctest::Approx(2.5));
  CHECK(ramp.field_at(-1.0) == 5.0);
  CHECK(ramp.field_at(9.0) == 0.0);
}

TEST_CASE("Crank-Nicolson at constant field matches the exact exponential") {
  const CouplingMatrix c = synthetic_couplings(4, -1.0, 1.05);
  const RampProfile hold = RampProfile::constant(1.0, 2.0, 16);
  Numerics tight;
  tight.cn_convergence = 1e-8;
  const ProtocolResult r = cn_evolve(c, hold, tight);
  CHECK(std::abs(r.ground_probability - 0.3500208058247378) < 1e-8);
  CHECK(r.norm_drift < 1e-8);
  CHECK(r.energy_drift < 1e-9);
  CHECK(std::abs(histogram_total(r.excitation_histogram) + r.ground_probability - 1.0) < 1e-9);
}

TEST_CASE("Crank-Nicolson ramp against the dense Magnus reference") {
  const CouplingMatrix c = synthetic_couplings(3, 1.0, 1.05);
  ProfileOptions po;
  po.n_grid = 32;
  const GapProfile profile = gap_profile(c, po);
  const RampProfile ramp = la_ramp(profile, 1.0, 64);
  Numerics tight;
  tight.cn_convergence = 1e-8;
  const ProtocolResult r = cn_evolve(c, ramp, tight);
  const auto field = [&](double t) { return ramp.field_at(t); };
  const double coarse = ref::ramp_probability(c.j, field, ramp.times, 16);
  const double fine = ref::ramp_probability(c.j, field, ramp.times, 32);
  CHECK(std::abs(coarse - fine) < 1e-10);
  CHECK(std::abs(r.ground_probability - fine) < 1e-8);
  CHECK(r.norm_drift < 1e-8);
}

TEST_CASE("excitation histogram") {
  const CouplingMatrix c = synthetic_couplings(5, -1.0, 1.05);
  const GroundManifold m = classical_ground_manifold(c);
  StateVector v = StateVector::Random(32);
  v.normalize();
  const std::vector<ExcitationBin> all = excitation_histogram(v, c, 16);
  const std::vector<ExcitationBin> rest = excitation_histogram(v, c, 16, &m);
  CHECK(histogram_total(all) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(histogram_total(rest) + ground_probability(v, m) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(all[0].energy_low == 0.0);
  CHECK(all.back().probability >= 0.0);
  CHECK(all[0].probability >= ground_probability(v, m) - 1e-15);
}

TEST_CASE("protocol argument checks") {
  const CouplingMatrix c = synthetic_couplings(3, 1.0, 1.0);
  CHECK_THROWS_AS(bangbang_run(c, {-1.0, 1.0}), Error);
  CHECK_THROWS_AS(bangbang_run(c, {1.0, -1.0}), Error);
  CHECK_THROWS_AS(la_ramp(GapProfile::constant(1.0, 5.0, 8, 1.0), 0.0), Error);
  CHECK_THROWS_AS(HoldPropagator(c, 1.0, classical_ground_manifold(synthetic_couplings(4, 1.0, 1.0))), Error);
}

}
