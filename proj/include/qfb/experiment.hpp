// experiment.hpp
// End-to-end simulation of the measured data: each input state and its
// phase-flipped partner go through the control map separately, their
// tomography counts are combined with weights (1 - p, p), and the noisy
// output is reconstructed by linear inversion.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "qfb/channels.hpp"
#include "qfb/photonic.hpp"
#include "qfb/protocol.hpp"
#include "qfb/qubit.hpp"
#include "qfb/random.hpp"
#include "qfb/tomography.hpp"

namespace qfb {

/// Ideal control map: sum over outcomes of R_o M_o rho M_o^dagger R_o^dagger.
inline QubitState control_output(const QubitState& rho, double chi, double eta) {
  const KrausPair kraus(chi);
  Matrix2 out = Matrix2::Zero();
  for (Sign o : kSigns) {
    const Unitary2 u = correction_rotation(eta, o);
    out += u.matrix() * kraus.apply(o, rho.matrix()) * u.matrix().adjoint();
  }
  return QubitState{out};
}

/// Gate-based control map, renormalized over coincidences.
inline QubitState control_output(const QubitState& rho, double chi, double eta, const PostselectedGate& gate) {
  const auto branches = detail::gate_branches(rho.matrix(), to_density(MeterState(chi).ket()).matrix(), gate.op);
  Matrix2 out = Matrix2::Zero();
  double total = 0.0;
  for (std::size_t o = 0; o < 2; ++o) {
    const Unitary2 u = correction_rotation(eta, kSigns[o]);
    out += u.matrix() * branches[o] * u.matrix().adjoint();
    total += branches[o].trace().real();
  }
  if (total < 1e-12) throw ValidationError("control_output: coincidence probability vanishes");
  return QubitState{out / total};
}

struct TomographyRunConfig {
  ProtocolParams params;
  double rate = 100.0;      // coincidences per second
  double duration = 60.0;   // seconds per setting and ensemble member
  std::size_t resamples = 1000;
  std::uint64_t seed = 0;
  /// Gate model; ideal Kraus measurement when empty.
  std::optional<Ppbs> ppbs;
  bool clip_eigenvalues = false;
};

struct TomographyInputResult {
  Sign input = Sign::plus;
  CountSet clean;
  CountSet flipped;
  CountSet mixed;
  ReconstructedState reconstruction;
  /// Fidelity of the simulated (noise-free statistics) output state.
  double fidelity_exact = 0.0;
  FidelityEstimate estimate;
};

struct TomographyRunResult {
  std::array<TomographyInputResult, 2> inputs;
  double fidelity_exact_avg = 0.0;
  FidelityEstimate average;
};

inline TomographyRunResult run_tomography_experiment(const TomographyRunConfig& config) {
  validate(config.params);
  const auto& prm = config.params;
  const std::optional<PostselectedGate> gate =
      config.ppbs ? std::optional<PostselectedGate>(ppbs_conditional(*config.ppbs)) : std::nullopt;
  auto control = [&](const QubitState& rho) {
    return gate ? control_output(rho, prm.chi, prm.eta, *gate) : control_output(rho, prm.chi, prm.eta);
  };

  const RandomStream root(config.seed);
  TomographyRunResult result;
  std::vector<PureQubit> targets;
  std::vector<CountSet> mixed;
  for (std::size_t i = 0; i < 2; ++i) {
    auto& r = result.inputs[i];
    r.input = kSigns[i];
    const PureQubit psi = make_input_state(prm.theta, kSigns[i]);
    const QubitState clean = to_density(psi);
    const QubitState flipped = apply_unitary(clean, phase_flip());
    const QubitState out_clean = control(clean);
    const QubitState out_flipped = control(flipped);

    RandomStream s_clean = root.substream(2 * i);
    RandomStream s_flipped = root.substream(2 * i + 1);
    r.clean = simulate_counts(out_clean, config.rate, config.duration, s_clean);
    r.flipped = simulate_counts(out_flipped, config.rate, config.duration, s_flipped);
    r.mixed = mix_ensemble_counts(r.clean, r.flipped, prm.p);
    r.reconstruction = linear_inversion(r.mixed, config.clip_eigenvalues);

    const Matrix2 exact = (1.0 - prm.p) * out_clean.matrix() + prm.p * out_flipped.matrix();
    r.fidelity_exact = detail::overlap(psi, exact);
    r.estimate = fidelity_with_error(psi, r.mixed, config.resamples, root.substream(10 + i));
    targets.push_back(psi);
    mixed.push_back(r.mixed);
  }
  result.fidelity_exact_avg = 0.5 * (result.inputs[0].fidelity_exact + result.inputs[1].fidelity_exact);
  result.average = average_fidelity_with_error(targets, mixed, config.resamples, root.substream(20));
  return result;
}

}  // namespace qfb
