// protocol.hpp
// Feedback control of a qubit prepared in one of two non-orthogonal states:
// dephasing noise, a weak measurement of strength cos(chi), then a rotation
// about y whose sense depends on the measurement outcome.
//
// The correction angle eta is a Bloch-sphere angle: outcome + rotates by +eta
// (z towards +x), outcome - by -eta.  With that pairing the exact
// density-matrix propagation reproduces the closed forms below.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>

#include "qfb/channels.hpp"
#include "qfb/errors.hpp"
#include "qfb/qubit.hpp"
#include "qfb/random.hpp"

namespace qfb {

/// Bloch rotation sign applied after outcome +; outcome - uses the opposite.
inline constexpr Sign kCorrectionAfterPlus = Sign::plus;

/// Correction unitary for a measurement outcome: Bloch rotation by +-eta.
inline Unitary2 correction_rotation(double eta, Sign outcome) {
  const double sense = outcome == Sign::plus ? to_double(kCorrectionAfterPlus)
                                             : -to_double(kCorrectionAfterPlus);
  return bloch_rotation_y(sense * eta);
}

struct ProtocolParams {
  double theta = 0.0;
  double p = 0.0;
  double chi = kHalfPi;
  double eta = 0.0;
};

inline void check_theta(double theta) {
  if (!(theta >= 0.0 && theta <= kHalfPi)) {
    throw DomainError("theta must lie in [0, pi/2], got " + detail::fmt_double(theta));
  }
}

inline void validate(const ProtocolParams& params) {
  check_theta(params.theta);
  check_noise_probability(params.p);
  check_measurement_angle(params.chi);
  if (!std::isfinite(params.eta)) throw DomainError("correction angle eta must be finite");
}

/// Named operating points.
struct OperatingPoint {
  double theta;
  double p;
};
/// Where the photonic experiment was run.
inline constexpr OperatingPoint kExperimentPoint{0.715, 0.145};
/// Where the largest improvement over the limiting schemes is reported.
inline constexpr OperatingPoint kMaxImprovementPoint{0.715, 0.115};

// ---------------------------------------------------------------------------
// Closed forms

namespace detail {

/// A = 1 - (1 - (1-2p) sin chi) cos^2 theta,  B = cos chi cos theta.
struct FidelityCoefficients {
  double a;
  double b;
};

inline FidelityCoefficients fidelity_coefficients(double theta, double p, double chi) {
  const double c = std::cos(theta);
  return {1.0 - (1.0 - (1.0 - 2.0 * p) * std::sin(chi)) * c * c, std::cos(chi) * c};
}

}  // namespace detail

/// Average fidelity with the correction angle already optimized.
inline double avg_fidelity_analytic(double theta, double p, double chi) {
  check_theta(theta);
  check_noise_probability(p);
  check_measurement_angle(chi);
  const auto [a, b] = detail::fidelity_coefficients(theta, p, chi);
  return 0.5 + 0.5 * std::sqrt(a * a + b * b);
}

/// Optimal correction angle, in [0, pi/2].
inline double eta_opt(double theta, double p, double chi) {
  check_theta(theta);
  check_noise_probability(p);
  check_measurement_angle(chi);
  const auto [a, b] = detail::fidelity_coefficients(theta, p, chi);
  return std::atan2(b, a);
}

struct ChiOptimum {
  double chi = kHalfPi;
  /// theta = 0 and p = 0: every chi is optimal, chi reports pi/2.
  bool degenerate = false;
};

inline ChiOptimum chi_opt(double theta, double p) {
  check_theta(theta);
  check_noise_probability(p);
  const double q = 1.0 - 2.0 * p;
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double denominator = 1.0 - q * q * c * c;
  if (denominator <= 0.0) return {kHalfPi, true};
  const double arg = std::clamp(q * s * s / denominator, 0.0, 1.0);
  return {std::asin(arg), false};
}

/// Best average fidelity over measurement strength and correction angle.
inline double avg_fidelity_opt(double theta, double p) {
  check_theta(theta);
  check_noise_probability(p);
  const double q = 1.0 - 2.0 * p;
  const double c2 = std::cos(theta) * std::cos(theta);
  const double s2 = std::sin(theta) * std::sin(theta);
  const double denominator = 1.0 - q * q * c2;
  if (denominator <= 0.0) return 1.0;
  return 0.5 + 0.5 * std::sqrt(c2 + s2 * s2 / denominator);
}

/// Do-nothing scheme (chi = pi/2, eta = 0).
inline double fidelity_dn(double theta, double p) {
  check_theta(theta);
  check_noise_probability(p);
  const double c = std::cos(theta);
  return 1.0 - p * c * c;
}

/// Helstrom scheme (projective measurement, chi = 0); independent of p.
inline double fidelity_h(double theta, double p) {
  check_theta(theta);
  check_noise_probability(p);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return 0.5 + 0.5 * std::sqrt(s * s * s * s + c * c);
}

// ---------------------------------------------------------------------------
// Schemes

enum class SchemeKind { do_nothing, helstrom, optimal, custom };

struct Scheme {
  SchemeKind kind = SchemeKind::optimal;
  double chi = kHalfPi;  // custom only
  double eta = 0.0;      // custom only

  static Scheme do_nothing() { return {SchemeKind::do_nothing}; }
  static Scheme helstrom() { return {SchemeKind::helstrom}; }
  static Scheme optimal() { return {SchemeKind::optimal}; }
  static Scheme custom(double chi, double eta) { return {SchemeKind::custom, chi, eta}; }
};

inline const char* to_string(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::do_nothing: return "dn";
    case SchemeKind::helstrom: return "helstrom";
    case SchemeKind::optimal: return "optimal";
    case SchemeKind::custom: return "custom";
  }
  return "unknown";
}

/// Full parameter set for a scheme at (theta, p).
inline ProtocolParams resolve(const Scheme& scheme, double theta, double p) {
  check_theta(theta);
  check_noise_probability(p);
  switch (scheme.kind) {
    case SchemeKind::do_nothing:
      return {theta, p, kHalfPi, 0.0};
    case SchemeKind::helstrom:
      return {theta, p, 0.0, eta_opt(theta, p, 0.0)};
    case SchemeKind::optimal: {
      const double chi = chi_opt(theta, p).chi;
      return {theta, p, chi, eta_opt(theta, p, chi)};
    }
    case SchemeKind::custom: {
      ProtocolParams params{theta, p, scheme.chi, scheme.eta};
      validate(params);
      return params;
    }
  }
  throw DomainError("unknown scheme");
}

// ---------------------------------------------------------------------------
// Exact propagation

struct ProtocolResult {
  double fidelity_plus = 0.0;
  double fidelity_minus = 0.0;
  double fidelity_avg = 0.0;
  QubitState output_plus;
  QubitState output_minus;
  /// outcome_probabilities[input][outcome], index 0 = plus.
  std::array<std::array<double, 2>, 2> outcome_probabilities{};
};

/// Noise and measurement stages for fixed (theta, p, chi); evaluates the
/// correction for any eta.  Construction does not validate its arguments.
class ProtocolEvaluator {
 public:
  ProtocolEvaluator(double theta, double p, double chi) : kraus_(chi) {
    for (std::size_t i = 0; i < 2; ++i) {
      inputs_[i] = make_input_state(theta, kSigns[i]);
      const QubitState noisy = dephase(to_density(inputs_[i]), p);
      for (std::size_t o = 0; o < 2; ++o) branches_[i][o] = kraus_.apply(kSigns[o], noisy.matrix());
    }
  }

  /// Average fidelity only; the hot path of the brute-force scans.
  double average_fidelity(double eta) const {
    return average_fidelity({correction_rotation(eta, Sign::plus), correction_rotation(eta, Sign::minus)});
  }

  /// Same, with the correction unitaries for outcomes (+, -) precomputed.
  double average_fidelity(const std::array<Unitary2, 2>& rot) const {
    double total = 0.0;
    for (std::size_t i = 0; i < 2; ++i) {
      for (std::size_t o = 0; o < 2; ++o) {
        const Vector2 back = rot[o].matrix().adjoint() * inputs_[i].amplitudes();
        total += (back.adjoint() * branches_[i][o] * back)(0, 0).real();
      }
    }
    return 0.5 * total;
  }

  ProtocolResult evaluate(double eta) const {
    ProtocolResult result;
    std::array<Matrix2, 2> outputs;
    for (std::size_t i = 0; i < 2; ++i) {
      outputs[i] = Matrix2::Zero();
      for (std::size_t o = 0; o < 2; ++o) {
        const Unitary2 u = correction_rotation(eta, kSigns[o]);
        outputs[i] += u.matrix() * branches_[i][o] * u.matrix().adjoint();
        result.outcome_probabilities[i][o] = branches_[i][o].trace().real();
      }
    }
    result.output_plus = QubitState{outputs[0]};
    result.output_minus = QubitState{outputs[1]};
    result.fidelity_plus = detail::overlap(inputs_[0], outputs[0]);
    result.fidelity_minus = detail::overlap(inputs_[1], outputs[1]);
    result.fidelity_avg = 0.5 * (result.fidelity_plus + result.fidelity_minus);
    return result;
  }

 private:
  KrausPair kraus_;
  std::array<PureQubit, 2> inputs_;
  std::array<std::array<Matrix2, 2>, 2> branches_;
};

/// Deterministic density-matrix evaluation of the control scheme.
inline ProtocolResult run_protocol_exact(const ProtocolParams& params) {
  validate(params);
  return ProtocolEvaluator(params.theta, params.p, params.chi).evaluate(params.eta);
}

// ---------------------------------------------------------------------------
// Monte Carlo

namespace detail {

/// Welford running mean / variance.
class RunningStats {
 public:
  void add(double x) noexcept {
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }
  std::uint64_t count() const noexcept { return n_; }
  double mean() const noexcept { return mean_; }
  double variance() const noexcept { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double stderr_of_mean() const noexcept {
    return n_ > 0 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
  }

 private:
  std::uint64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

}  // namespace detail

struct MonteCarloResult {
  std::uint64_t shots = 0;
  double fidelity_avg = 0.0;
  double stderr_avg = 0.0;
  double fidelity_plus = 0.0;
  double stderr_plus = 0.0;
  std::uint64_t shots_plus = 0;
  double fidelity_minus = 0.0;
  double stderr_minus = 0.0;
  std::uint64_t shots_minus = 0;
};

/// Shot-by-shot simulation: random input, random phase flip, sampled
/// measurement outcome, conditional correction, scored against the noiseless
/// input.
inline MonteCarloResult run_protocol_mc(const ProtocolParams& params, std::uint64_t n_shots,
                                        RandomStream& rng) {
  validate(params);
  if (n_shots < 1) throw DomainError("run_protocol_mc: n_shots must be at least 1");

  const std::array<PureQubit, 2> inputs{make_input_state(params.theta, Sign::plus),
                                        make_input_state(params.theta, Sign::minus)};
  const std::array<QubitState, 2> clean{to_density(inputs[0]), to_density(inputs[1])};
  const std::array<QubitState, 2> flipped{apply_unitary(clean[0], phase_flip()),
                                          apply_unitary(clean[1], phase_flip())};
  const std::array<Unitary2, 2> corrections{correction_rotation(params.eta, Sign::plus),
                                            correction_rotation(params.eta, Sign::minus)};

  detail::RunningStats all;
  std::array<detail::RunningStats, 2> per_input;
  for (std::uint64_t shot = 0; shot < n_shots; ++shot) {
    const std::size_t input = rng.uniform() < 0.5 ? 0 : 1;
    const QubitState& noisy = rng.bernoulli(params.p) ? flipped[input] : clean[input];
    const MeasurementOutcome outcome = sample_outcome(noisy, params.chi, rng);
    const Unitary2& u = corrections[outcome.sign == Sign::plus ? 0 : 1];
    const double f = detail::overlap(inputs[input], u.matrix() * outcome.post_state.matrix() * u.matrix().adjoint());
    all.add(f);
    per_input[input].add(f);
  }

  MonteCarloResult result;
  result.shots = n_shots;
  result.fidelity_avg = all.mean();
  result.stderr_avg = all.stderr_of_mean();
  result.fidelity_plus = per_input[0].mean();
  result.stderr_plus = per_input[0].stderr_of_mean();
  result.shots_plus = per_input[0].count();
  result.fidelity_minus = per_input[1].mean();
  result.stderr_minus = per_input[1].stderr_of_mean();
  result.shots_minus = per_input[1].count();
  return result;
}

}  // namespace qfb
