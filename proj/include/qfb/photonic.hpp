// photonic.hpp
// Linear-optics realization of the weak measurement: a postselected
// controlled-Z built from a partially polarizing beamsplitter (PPBS), a meter
// photon prepared as cos(chi/2)|+> + sin(chi/2)|->, and a projective meter
// readout in the +/- basis.
//
// Polarization encoding: V = |0>, H = |1>.  The gate operator acts on the
// ordered two-photon basis {VV, VH, HV, HH} (signal first, meter second).

#pragma once

#include <Eigen/SVD>

#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "qfb/channels.hpp"
#include "qfb/errors.hpp"
#include "qfb/protocol.hpp"
#include "qfb/qubit.hpp"

namespace qfb {

/// Intensity reflectivities of the central beamsplitter.
struct Ppbs {
  double r_h = 1.0 / 3.0;
  double r_v = 1.0;

  static constexpr Ppbs ideal() { return {1.0 / 3.0, 1.0}; }
  /// Characterized values of the manufactured element.
  static constexpr Ppbs measured() { return {0.345, 0.995}; }
};

inline void validate(const Ppbs& ppbs) {
  auto ok = [](double r) { return r >= 0.0 && r <= 1.0; };
  if (!ok(ppbs.r_h) || !ok(ppbs.r_v)) {
    throw DomainError("PPBS reflectivities must lie in [0, 1], got R_H=" + detail::fmt_double(ppbs.r_h) +
                      " R_V=" + detail::fmt_double(ppbs.r_v));
  }
}

/// Amplitude applied to each photon's V component after the PPBS.
inline const double kIdealLossAmplitude = 1.0 / std::sqrt(3.0);

struct PostselectedGate {
  Matrix4 op = Matrix4::Identity();
  double loss_attenuation = kIdealLossAmplitude;
};

inline double largest_singular_value(const Matrix4& m) {
  return Eigen::JacobiSVD<Matrix4>(m).singularValues()(0);
}

inline void validate(const PostselectedGate& gate) {
  const double s = largest_singular_value(gate.op);
  if (!(s <= 1.0 + tol::positivity)) {
    throw ValidationError("PostselectedGate: largest singular value " + detail::fmt_double(s) + " exceeds 1");
  }
}

/// Coincidence operator of the PPBS gate: one photon in each output port.
///
/// Beamsplitter convention a -> r c + t d, b -> t c - r d (a: signal input,
/// b: meter input, c: signal output, d: meter output).  A same-polarization
/// pair gets t^2 - r^2; a cross-polarized pair stays with -r_p r_q or swaps
/// polarizations between ports with t_p t_q.
inline PostselectedGate ppbs_conditional(const Ppbs& ppbs, double loss_attenuation = kIdealLossAmplitude) {
  validate(ppbs);
  const std::array<double, 2> r{std::sqrt(ppbs.r_v), std::sqrt(ppbs.r_h)};
  const std::array<double, 2> t{std::sqrt(1.0 - ppbs.r_v), std::sqrt(1.0 - ppbs.r_h)};

  Matrix4 op = Matrix4::Zero();
  for (int s = 0; s < 2; ++s) {
    for (int m = 0; m < 2; ++m) {
      const int in = 2 * s + m;
      if (s == m) {
        op(in, in) += t[s] * t[s] - r[s] * r[s];
      } else {
        op(in, in) += -r[s] * r[m];
        op(2 * m + s, in) += t[s] * t[m];
      }
    }
  }
  for (int s = 0; s < 2; ++s) {
    for (int m = 0; m < 2; ++m) {
      const int vertical = (s == 0) + (m == 0);
      op.row(2 * s + m) *= std::pow(loss_attenuation, vertical);
    }
  }
  const Complex vv = op(0, 0);
  if (std::abs(vv) > 0.0) op *= std::conj(vv) / std::abs(vv);
  return {op, loss_attenuation};
}

/// Meter photon cos(chi/2)|+> + sin(chi/2)|->.
class MeterState {
 public:
  explicit MeterState(double chi) : chi_(chi) { check_measurement_angle(chi); }

  double chi() const noexcept { return chi_; }

  PureQubit ket() const {
    const double c = std::cos(chi_ / 2.0);
    const double s = std::sin(chi_ / 2.0);
    const double k = std::numbers::sqrt2 / 2.0;
    return PureQubit{k * (c + s), k * (c - s)};
  }

 private:
  double chi_;
};

struct GateOutcome {
  Sign sign = Sign::plus;
  /// Joint probability of coincidence and this meter outcome.
  double success_probability = 0.0;
  QubitState post_signal;
  bool degenerate = false;
};

namespace detail {

inline const PureQubit& meter_readout(Sign outcome) {
  static const PureQubit plus = ket_plus();
  static const PureQubit minus = ket_minus();
  return outcome == Sign::plus ? plus : minus;
}

/// Unnormalized signal states conditioned on coincidence and meter outcome
/// (index 0 = +).  Linear in rho.
inline std::array<Matrix2, 2> gate_branches(const Matrix2& rho, const Matrix2& meter_rho, const Matrix4& op) {
  const Matrix4 joint = apply_operator(tensor(QubitState{rho}, QubitState{meter_rho}), op);
  std::array<Matrix2, 2> out;
  for (std::size_t o = 0; o < 2; ++o) {
    const Vector2& bra = meter_readout(kSigns[o]).amplitudes();
    Matrix2 sigma = Matrix2::Zero();
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int c = 0; c < 2; ++c)
          for (int d = 0; d < 2; ++d)
            sigma(a, b) += std::conj(bra(c)) * joint(2 * a + c, 2 * b + d) * bra(d);
    out[o] = sigma;
  }
  return out;
}

}  // namespace detail

/// Runs the signal through the gate with the given meter and reads the meter
/// out in the +/- basis.
inline std::array<GateOutcome, 2> gate_measurement(const QubitState& rho_signal, const MeterState& meter,
                                                   const PostselectedGate& gate) {
  validate(rho_signal);
  const auto branches =
      detail::gate_branches(rho_signal.matrix(), to_density(meter.ket()).matrix(), gate.op);
  const double total = branches[0].trace().real() + branches[1].trace().real();
  std::array<GateOutcome, 2> out;
  for (std::size_t o = 0; o < 2; ++o) {
    const double prob = std::max(branches[o].trace().real(), 0.0);
    out[o].sign = kSigns[o];
    out[o].success_probability = prob;
    if (total < 1e-12 || prob < kDegenerateProbability) {
      out[o].degenerate = true;
      out[o].post_signal = QubitState::maximally_mixed();
    } else {
      out[o].post_signal = QubitState{branches[o] / prob};
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Experimental model

/// Per-input result of the gate-based control pipeline.
struct ModelEvaluation {
  double fidelity_plus = 0.0;
  double fidelity_minus = 0.0;
  double fidelity_avg = 0.0;
  QubitState output_plus;
  QubitState output_minus;
  /// Coincidence probability per input, averaged over the noise ensemble.
  std::array<double, 2> success_probability{};
};

/// Gate-based pipeline for fixed (theta, p, chi): dephasing as an ensemble of
/// {rho, Z rho Z} weighted by p, postselected measurement, conditional
/// correction, renormalization over coincidences.
class PhotonicPipeline {
 public:
  PhotonicPipeline(const PostselectedGate& gate, double theta, double p, double chi) {
    check_theta(theta);
    check_noise_probability(p);
    const Matrix2 meter_rho = to_density(MeterState(chi).ket()).matrix();
    for (std::size_t i = 0; i < 2; ++i) {
      inputs_[i] = make_input_state(theta, kSigns[i]);
      const QubitState clean = to_density(inputs_[i]);
      const QubitState flipped = apply_unitary(clean, phase_flip());
      const auto a = detail::gate_branches(clean.matrix(), meter_rho, gate.op);
      const auto b = detail::gate_branches(flipped.matrix(), meter_rho, gate.op);
      for (std::size_t o = 0; o < 2; ++o) branches_[i][o] = (1.0 - p) * a[o] + p * b[o];
    }
  }

  ModelEvaluation evaluate(double eta) const {
    ModelEvaluation result;
    std::array<double, 2> f{};
    std::array<Matrix2, 2> outputs;
    for (std::size_t i = 0; i < 2; ++i) {
      Matrix2 out = Matrix2::Zero();
      double total = 0.0;
      for (std::size_t o = 0; o < 2; ++o) {
        const Unitary2 u = correction_rotation(eta, kSigns[o]);
        out += u.matrix() * branches_[i][o] * u.matrix().adjoint();
        total += branches_[i][o].trace().real();
      }
      if (total < 1e-12) throw ValidationError("photonic pipeline: coincidence probability vanishes");
      outputs[i] = out / total;
      result.success_probability[i] = total;
      f[i] = detail::overlap(inputs_[i], outputs[i]);
    }
    result.output_plus = QubitState{outputs[0]};
    result.output_minus = QubitState{outputs[1]};
    result.fidelity_plus = f[0];
    result.fidelity_minus = f[1];
    result.fidelity_avg = 0.5 * (f[0] + f[1]);
    return result;
  }

  /// Correction angle maximizing the average fidelity of this pipeline.
  /// F(eta) = c + a cos(eta) + b sin(eta) exactly, so three samples fix it.
  double best_eta() const {
    const double f0 = evaluate(0.0).fidelity_avg;
    const double f90 = evaluate(kHalfPi).fidelity_avg;
    const double f180 = evaluate(std::numbers::pi).fidelity_avg;
    const double c = 0.5 * (f0 + f180);
    return std::atan2(f90 - c, f0 - c);
  }

 private:
  std::array<PureQubit, 2> inputs_;
  std::array<std::array<Matrix2, 2>, 2> branches_;
};

enum class CorrectionMode {
  /// eta_opt from the ideal closed form, as the hardware was configured.
  ideal_theory,
  /// eta re-optimized against the imperfect pipeline.
  reoptimized,
};

struct ModelPoint {
  double chi = 0.0;
  double cos_chi = 0.0;
  double eta = 0.0;
  /// Ideal gate at the same (chi, eta).
  double f_ideal = 0.0;
  double f_model = 0.0;
  double f_plus = 0.0;
  double f_minus = 0.0;
  BlochVector bloch_plus;
  BlochVector bloch_minus;
  double success_probability = 0.0;
};

struct ModelOptions {
  CorrectionMode mode = CorrectionMode::ideal_theory;
  /// Explicit per-chi correction angles; overrides `mode` when present.
  std::optional<std::vector<double>> etas;
  double loss_attenuation = kIdealLossAmplitude;
};

inline std::vector<ModelPoint> experimental_model_curve(double theta, double p, const std::vector<double>& chi_list,
                                                        const Ppbs& ppbs, const ModelOptions& options = {}) {
  check_theta(theta);
  check_noise_probability(p);
  if (options.etas && options.etas->size() != chi_list.size()) {
    throw DomainError("experimental_model_curve: eta list length does not match chi list");
  }
  const PostselectedGate gate = ppbs_conditional(ppbs, options.loss_attenuation);

  std::vector<ModelPoint> curve;
  curve.reserve(chi_list.size());
  for (std::size_t k = 0; k < chi_list.size(); ++k) {
    const double chi = chi_list[k];
    check_measurement_angle(chi);
    const PhotonicPipeline pipeline(gate, theta, p, chi);

    double eta = 0.0;
    if (options.etas) {
      eta = (*options.etas)[k];
    } else if (options.mode == CorrectionMode::reoptimized) {
      eta = pipeline.best_eta();
    } else {
      eta = eta_opt(theta, p, chi);
    }

    const ModelEvaluation model = pipeline.evaluate(eta);
    ModelPoint point;
    point.chi = chi;
    point.cos_chi = std::cos(chi);
    point.eta = eta;
    point.f_ideal = ProtocolEvaluator(theta, p, chi).average_fidelity(eta);
    point.f_model = model.fidelity_avg;
    point.f_plus = model.fidelity_plus;
    point.f_minus = model.fidelity_minus;
    point.bloch_plus = bloch(model.output_plus);
    point.bloch_minus = bloch(model.output_minus);
    point.success_probability = 0.5 * (model.success_probability[0] + model.success_probability[1]);
    curve.push_back(point);
  }
  return curve;
}

/// chi values for a list of measurement strengths cos(chi) in [0, 1].
inline std::vector<double> chi_from_strengths(const std::vector<double>& strengths) {
  std::vector<double> chis;
  chis.reserve(strengths.size());
  for (double s : strengths) {
    if (!(s >= 0.0 && s <= 1.0)) {
      throw DomainError("measurement strength cos(chi) must lie in [0, 1], got " + detail::fmt_double(s));
    }
    chis.push_back(std::acos(s));
  }
  return chis;
}

}  // namespace qfb
