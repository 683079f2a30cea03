#include <cmath>
#include <random>

#include <doctest.h>

#include "reference/dense_reference.hpp"
#include "tfim/krylov.hpp"

using namespace tfim;

TEST_SUITE("krylov") {

TEST_CASE("Krylov propagation matches the dense exponential") {
  for (std::size_t n : {4u, 7u, 9u}) {
    const CouplingMatrix c = synthetic_couplings(n, -1.0, 1.05);
    const double b = 1.3;
    const Hamiltonian h(c, b);
    StateVector v = StateVector::Random(static_cast<Eigen::Index>(h.dimension()));
    v.normalize();
    const StateVector exact = ref::expm(ref::hamiltonian(c.j, b), 0.9) * v;

    const KrylovPropagator prop(h, 30);
    const std::size_t substeps = prop.calibrate(v, 0.9, 1e-12);
    StateVector w = v;
    prop.advance(w, 0.9, substeps);
    CHECK((w - exact).norm() < 1e-8);
    CHECK(std::abs(w.norm() - 1.0) < 1e-12);
    CHECK(fidelity(w, exact) > 1.0 - 1e-12);
  }
}

TEST_CASE("zero time and unit fidelity") {
  const Hamiltonian h(synthetic_couplings(5, 1.0, 1.0), 0.5);
  StateVector v = polarized_state(5);
  const KrylovPropagator prop(h);
  prop.advance(v, 0.0, 1);
  CHECK((v - polarized_state(5)).norm() == 0.0);
  CHECK(fidelity(v, v) == doctest::Approx(1.0));
  StateVector wrong(3);
  CHECK_THROWS_AS(prop.advance(wrong, 1.0, 1), Error);
}

TEST_CASE("eigenstates only acquire a phase") {
  const Hamiltonian h(synthetic_couplings(6, -1.0, 1.05), 0.7);
  const Spectrum s = low_spectrum(h, 1);
  StateVector v = s.states.col(0).cast<Complex>();
  const KrylovPropagator prop(h);
  prop.advance(v, 2.0, 8);
  const Complex expected = std::polar(1.0, -kAngular * s.energies[0] * 2.0);
  CHECK(std::abs(v.dot(s.states.col(0).cast<Complex>()) - std::conj(expected)) < 1e-9);
}

}
