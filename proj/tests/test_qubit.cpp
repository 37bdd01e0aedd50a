#include <catch_amalgamated.hpp>

#include "oracles.hpp"
#include "qfb/qubit.hpp"
#include "support.hpp"

using namespace qfb;
using Catch::Matchers::WithinAbs;

TEST_CASE("input states sit at (cos theta, 0, +-sin theta) on the Bloch sphere") {
  for (double theta : {0.0, 0.3, 0.715, 1.2, kHalfPi}) {
    const BlochVector bp = bloch(to_density(make_input_state(theta, Sign::plus)));
    const BlochVector bm = bloch(to_density(make_input_state(theta, Sign::minus)));
    CHECK_THAT(bp.x, WithinAbs(std::cos(theta), 1e-14));
    CHECK_THAT(bp.y, WithinAbs(0.0, 1e-14));
    CHECK_THAT(bp.z, WithinAbs(std::sin(theta), 1e-14));
    CHECK_THAT(bm.z, WithinAbs(-std::sin(theta), 1e-14));
    // the two states subtend 2 theta
    CHECK_THAT(std::acos(std::clamp(bp.dot(bm), -1.0, 1.0)), WithinAbs(2 * theta, 1e-7));
  }
}

TEST_CASE("input state agrees with the amplitude formula") {
  const PureQubit psi = make_input_state(0.715, Sign::minus);
  const auto ref = oracle::input_state(0.715, -1);
  CHECK(testing::max_abs_diff(psi.amplitudes(), ref) < 1e-15);
}

TEST_CASE("theta outside [0, pi/2] is rejected") {
  CHECK_THROWS_AS(make_input_state(-0.01, Sign::plus), DomainError);
  CHECK_THROWS_AS(make_input_state(kHalfPi + 1e-9, Sign::plus), DomainError);
}

TEST_CASE("rotation_y matches exp(sign * i * eta * Y)") {
  for (double eta : {0.0, 0.1, 0.846, 1.5, 3.0}) {
    for (Sign s : kSigns) {
      const Matrix2 ref = oracle::expm<Matrix2>(Complex(0.0, to_double(s) * eta) * pauli_y());
      CHECK(testing::max_abs_diff(rotation_y(eta, s).matrix(), ref) < 1e-13);
    }
  }
}

TEST_CASE("bloch_rotation_y turns +z towards +x by the given angle") {
  const QubitState up = to_density(ket0());
  for (double a : {0.2, 0.7, kHalfPi}) {
    const BlochVector b = bloch(apply_unitary(up, bloch_rotation_y(a)));
    CHECK_THAT(b.x, WithinAbs(std::sin(a), 1e-14));
    CHECK_THAT(b.z, WithinAbs(std::cos(a), 1e-14));
    CHECK_THAT(b.y, WithinAbs(0.0, 1e-14));
  }
}

TEST_CASE("Bloch round trip") {
  testing::Sampler rng(7);
  for (int i = 0; i < 200; ++i) {
    const QubitState rho = rng.mixed_state();
    const QubitState back = density_from_bloch(bloch(rho));
    CHECK(testing::max_abs_diff(rho.matrix(), back.matrix()) < 1e-15);
  }
}

TEST_CASE("fidelity of a pure state with itself is one, with its orthogonal zero") {
  testing::Sampler rng(11);
  for (int i = 0; i < 50; ++i) {
    const PureQubit psi = rng.pure_state();
    CHECK_THAT(fidelity(psi, to_density(psi)), WithinAbs(1.0, 1e-14));
    const PureQubit perp{-std::conj(psi[1]), std::conj(psi[0])};
    CHECK_THAT(fidelity(psi, to_density(perp)), WithinAbs(0.0, 1e-14));
    CHECK_THAT(fidelity(psi, QubitState::maximally_mixed()), WithinAbs(0.5, 1e-14));
  }
}

TEST_CASE("validation catches malformed objects") {
  CHECK_THROWS_AS(validate(PureQubit{1.0, 1.0}), ValidationError);
  Matrix2 m = Matrix2::Identity() * 0.5;
  m(0, 1) = 0.6;  // not Hermitian
  CHECK_THROWS_AS(validate(QubitState{m}), ValidationError);
  m(1, 0) = 0.6;  // Hermitian but negative eigenvalue
  CHECK_THROWS_AS(validate(QubitState{m}), ValidationError);
  CHECK_THROWS_AS(validate(QubitState{Matrix2::Identity()}), ValidationError);
  CHECK_THROWS_AS(validate(Unitary2{Matrix2::Identity() * 2.0}), ValidationError);
  CHECK_THROWS_AS(density_from_bloch({1.0, 1.0, 0.0}), ValidationError);
  CHECK_NOTHROW(validate(QubitState::maximally_mixed()));
  CHECK(is_valid(to_density(ket_plus())));
  CHECK_FALSE(is_valid(PureQubit{2.0, 0.0}));
}

TEST_CASE("tensor product and two-qubit validation") {
  const TwoQubitState s = tensor(to_density(ket0()), to_density(ket_plus()));
  CHECK_NOTHROW(validate(s));
  CHECK_THAT(s.matrix().trace().real(), WithinAbs(1.0, 1e-15));
  CHECK_THAT(s.matrix()(0, 1).real(), WithinAbs(0.5, 1e-15));
  CHECK_THAT(min_eigenvalue(s), WithinAbs(0.0, 1e-12));
}
