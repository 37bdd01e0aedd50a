// channels.hpp
// The phase-flip (dephasing) channel and the variable-strength measurement in
// the logical basis.
//
// The measurement has Kraus operators
//   M+ = cos(chi/2)|0><0| + sin(chi/2)|1><1|
//   M- = sin(chi/2)|0><0| + cos(chi/2)|1><1|
// with POVM elements (1 +- cos(chi) Z)/2.  chi = 0 is projective, chi = pi/2
// is no measurement at all; cos(chi) is reported as the measurement strength.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>

#include "qfb/errors.hpp"
#include "qfb/qubit.hpp"
#include "qfb/random.hpp"

namespace qfb {

/// Outcome probabilities below this are treated as impossible branches.
inline constexpr double kDegenerateProbability = 1e-14;

inline void check_noise_probability(double p) {
  if (!(p >= 0.0 && p <= 0.5)) {
    throw DomainError("noise probability must lie in [0, 1/2], got " + detail::fmt_double(p));
  }
}

inline void check_measurement_angle(double chi) {
  if (!(chi >= 0.0 && chi <= kHalfPi)) {
    throw DomainError("measurement angle chi must lie in [0, pi/2], got " + detail::fmt_double(chi));
  }
}

class DephasingChannel {
 public:
  explicit DephasingChannel(double p) : p_(p) { check_noise_probability(p); }

  double p() const noexcept { return p_; }

  /// (1 - p) rho + p Z rho Z: off-diagonals shrink by (1 - 2p).
  QubitState operator()(const QubitState& rho) const {
    Matrix2 m = rho.matrix();
    const double k = 1.0 - 2.0 * p_;
    m(0, 1) *= k;
    m(1, 0) *= k;
    return QubitState{m};
  }

 private:
  double p_;
};

inline QubitState dephase(const QubitState& rho, double p) { return DephasingChannel(p)(rho); }

class KrausPair {
 public:
  explicit KrausPair(double chi) : chi_(chi) {
    check_measurement_angle(chi);
    const double c = std::cos(chi / 2.0);
    const double s = std::sin(chi / 2.0);
    plus_ = {c, s};
    minus_ = {s, c};
  }

  double chi() const noexcept { return chi_; }
  double strength() const noexcept { return std::cos(chi_); }

  /// Diagonal entries (on |0>, |1>) of M+ or M-.
  const std::array<double, 2>& diagonal(Sign outcome) const noexcept {
    return outcome == Sign::plus ? plus_ : minus_;
  }

  Matrix2 kraus(Sign outcome) const {
    const auto& d = diagonal(outcome);
    Matrix2 m = Matrix2::Zero();
    m(0, 0) = d[0];
    m(1, 1) = d[1];
    return m;
  }

  Matrix2 m_plus() const { return kraus(Sign::plus); }
  Matrix2 m_minus() const { return kraus(Sign::minus); }

  /// M^dagger M = (1 + sign cos(chi) Z) / 2.
  Matrix2 povm(Sign outcome) const {
    const Matrix2 m = kraus(outcome);
    return m.adjoint() * m;
  }

  /// M rho M^dagger, unnormalized.
  Matrix2 apply(Sign outcome, const Matrix2& rho) const {
    const auto& d = diagonal(outcome);
    Matrix2 out;
    out(0, 0) = d[0] * d[0] * rho(0, 0);
    out(0, 1) = d[0] * d[1] * rho(0, 1);
    out(1, 0) = d[0] * d[1] * rho(1, 0);
    out(1, 1) = d[1] * d[1] * rho(1, 1);
    return out;
  }

 private:
  double chi_;
  std::array<double, 2> plus_{};
  std::array<double, 2> minus_{};
};

inline KrausPair kraus_pair(double chi) { return KrausPair(chi); }

/// One branch of a two-outcome measurement.  A degenerate branch has zero
/// probability and carries the maximally mixed state as a placeholder;
/// callers must skip it.
struct MeasurementOutcome {
  Sign sign = Sign::plus;
  double probability = 0.0;
  QubitState post_state;
  bool degenerate = false;
};

namespace detail {

inline MeasurementOutcome kraus_branch(const KrausPair& kraus, Sign outcome, const Matrix2& rho) {
  const Matrix2 unnormalized = kraus.apply(outcome, rho);
  const double prob = unnormalized.trace().real();
  if (prob < kDegenerateProbability) {
    return {outcome, std::max(prob, 0.0), QubitState::maximally_mixed(), true};
  }
  return {outcome, prob, QubitState{unnormalized / prob}, false};
}

}  // namespace detail

/// Born-rule statistics and post-measurement states for both outcomes
/// (index 0 is outcome +).
inline std::array<MeasurementOutcome, 2> measure(const QubitState& rho, double chi) {
  validate(rho);
  const KrausPair kraus(chi);
  return {detail::kraus_branch(kraus, Sign::plus, rho.matrix()),
          detail::kraus_branch(kraus, Sign::minus, rho.matrix())};
}

/// Draws a single outcome with Born probabilities.
inline MeasurementOutcome sample_outcome(const QubitState& rho, double chi, RandomStream& rng) {
  const KrausPair kraus(chi);
  const double p_plus = std::real(kraus.apply(Sign::plus, rho.matrix()).trace());
  const Sign outcome = rng.uniform() < p_plus ? Sign::plus : Sign::minus;
  return detail::kraus_branch(kraus, outcome, rho.matrix());
}

}  // namespace qfb
