// tomography.hpp
// Single-qubit state tomography as run on the photonic signal: Poissonian
// coincidence counts for the six Pauli projectors, noise introduced by
// mixing the count records of an input and its phase-flipped partner, and
// reconstruction by linear inversion.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "qfb/channels.hpp"
#include "qfb/errors.hpp"
#include "qfb/qubit.hpp"
#include "qfb/random.hpp"

namespace qfb {

enum class Basis { x, y, z };

inline constexpr std::array<Basis, 3> kBases{Basis::x, Basis::y, Basis::z};

inline const char* to_string(Basis b) {
  switch (b) {
    case Basis::x: return "X";
    case Basis::y: return "Y";
    case Basis::z: return "Z";
  }
  return "?";
}

inline std::size_t index_of(Basis b) { return static_cast<std::size_t>(b); }

struct MeasurementSetting {
  Basis basis = Basis::z;
  Sign outcome = Sign::plus;

  friend bool operator==(const MeasurementSetting&, const MeasurementSetting&) = default;
};

/// The six settings in canonical order X+, X-, Y+, Y-, Z+, Z-.
inline std::array<MeasurementSetting, 6> all_settings() {
  std::array<MeasurementSetting, 6> out;
  std::size_t k = 0;
  for (Basis b : kBases)
    for (Sign s : kSigns) out[k++] = {b, s};
  return out;
}

/// (1 + outcome * sigma_basis) / 2.
inline Matrix2 projector(const MeasurementSetting& setting) {
  Matrix2 sigma;
  switch (setting.basis) {
    case Basis::x: sigma = pauli_x(); break;
    case Basis::y: sigma = pauli_y(); break;
    case Basis::z: sigma = pauli_z(); break;
  }
  return 0.5 * (Matrix2::Identity() + to_double(setting.outcome) * sigma);
}

/// Coincidences recorded for one setting.  `counts` is integral for sampled
/// data; expectation-level records carry the exact (real) mean.
struct CountRecord {
  MeasurementSetting setting;
  double counts = 0.0;
  double duration = 0.0;  // seconds
};

using CountSet = std::vector<CountRecord>;

namespace detail {

inline void check_rate_duration(double rate, double duration) {
  if (!(rate > 0.0) || !std::isfinite(rate)) throw DomainError("count rate must be positive");
  if (!(duration > 0.0) || !std::isfinite(duration)) throw DomainError("integration time must be positive");
}

inline double setting_mean(const QubitState& rho, const MeasurementSetting& setting, double rate, double duration) {
  const double prob = std::max((projector(setting) * rho.matrix()).trace().real(), 0.0);
  return rate * duration * prob;
}

}  // namespace detail

/// Mean counts per setting: rate * duration * tr(P rho); each of the six
/// projectors is integrated for `duration`.
inline CountSet expected_counts(const QubitState& rho, double rate, double duration) {
  detail::check_rate_duration(rate, duration);
  CountSet out;
  for (const auto& s : all_settings()) out.push_back({s, detail::setting_mean(rho, s, rate, duration), duration});
  return out;
}

inline CountSet simulate_counts(const QubitState& rho, double rate, double duration, RandomStream& rng) {
  detail::check_rate_duration(rate, duration);
  CountSet out;
  for (const auto& s : all_settings()) {
    const double mean = detail::setting_mean(rho, s, rate, duration);
    out.push_back({s, static_cast<double>(rng.poisson(mean)), duration});
  }
  return out;
}

/// (1 - p) * clean + p * flipped per setting, rounded to the nearest integer.
inline CountSet mix_ensemble_counts(const CountSet& clean, const CountSet& flipped, double p) {
  check_noise_probability(p);
  if (clean.size() != flipped.size()) throw ValidationError("mix_ensemble_counts: record counts differ");
  CountSet out;
  out.reserve(clean.size());
  for (std::size_t k = 0; k < clean.size(); ++k) {
    if (!(clean[k].setting == flipped[k].setting)) {
      throw ValidationError("mix_ensemble_counts: settings differ at record " + std::to_string(k));
    }
    if (clean[k].duration != flipped[k].duration) {
      throw ValidationError("mix_ensemble_counts: durations differ at record " + std::to_string(k));
    }
    out.push_back({clean[k].setting, std::round((1.0 - p) * clean[k].counts + p * flipped[k].counts),
                   clean[k].duration});
  }
  return out;
}

struct ReconstructedState {
  Matrix2 matrix = Matrix2::Identity() * 0.5;
  BlochVector bloch;
  double min_eigenvalue = 0.5;
  bool physical = true;
};

/// Bloch components from per-basis count asymmetries, rho = (1 + r.sigma)/2.
/// Non-physical reconstructions (|r| > 1) are reported as such unless
/// `clip_eigenvalues` is set, which rescales r onto the unit sphere.
inline ReconstructedState linear_inversion(const CountSet& counts, bool clip_eigenvalues = false) {
  std::array<std::array<double, 2>, 3> n{};
  std::array<std::array<bool, 2>, 3> seen{};
  for (const auto& rec : counts) {
    if (!(rec.counts >= 0.0)) throw ReconstructionError("negative or non-finite count");
    const std::size_t o = rec.setting.outcome == Sign::plus ? 0 : 1;
    n[index_of(rec.setting.basis)][o] += rec.counts;
    seen[index_of(rec.setting.basis)][o] = true;
  }
  std::array<double, 3> r{};
  for (Basis b : kBases) {
    const auto i = index_of(b);
    if (!seen[i][0] || !seen[i][1]) {
      throw ReconstructionError(std::string("missing setting in basis ") + to_string(b));
    }
    const double total = n[i][0] + n[i][1];
    if (!(total > 0.0)) throw ReconstructionError(std::string("no counts in basis ") + to_string(b));
    r[i] = (n[i][0] - n[i][1]) / total;
  }

  ReconstructedState out;
  out.bloch = {r[0], r[1], r[2]};
  const double len = out.bloch.norm();
  out.min_eigenvalue = 0.5 * (1.0 - len);
  out.physical = out.min_eigenvalue >= -tol::positivity;
  if (clip_eigenvalues && len > 1.0) {
    out.bloch = {r[0] / len, r[1] / len, r[2] / len};
    out.min_eigenvalue = 0.0;
    out.physical = true;
  }
  const BlochVector& b = out.bloch;
  out.matrix << Complex{0.5 * (1.0 + b.z), 0.0}, Complex{0.5 * b.x, -0.5 * b.y},
      Complex{0.5 * b.x, 0.5 * b.y}, Complex{0.5 * (1.0 - b.z), 0.0};
  return out;
}

/// <psi|rho|psi> for a reconstruction; not clamped, so non-physical
/// reconstructions may score outside [0, 1].
inline double reconstructed_fidelity(const PureQubit& target, const ReconstructedState& state) {
  return detail::overlap(target, state.matrix);
}

struct FidelityEstimate {
  /// Fidelity of the reconstruction from the observed counts.
  double point = 0.0;
  /// Bootstrap mean and standard deviation.
  double fidelity = 0.0;
  double std_error = 0.0;
};

/// Parametric bootstrap: every resample redraws each count as Poisson with
/// the observed value as mean, re-inverts and re-scores.  With several
/// targets the score is their mean fidelity (e.g. the average over psi+ and
/// psi-), each target paired with its own count set.
inline FidelityEstimate average_fidelity_with_error(const std::vector<PureQubit>& targets,
                                                    const std::vector<CountSet>& counts, std::size_t n_resamples,
                                                    const RandomStream& rng) {
  if (targets.empty() || targets.size() != counts.size()) {
    throw DomainError("fidelity_with_error: need one count set per target");
  }
  if (n_resamples < 100) throw DomainError("fidelity_with_error: at least 100 resamples required");

  FidelityEstimate est;
  for (std::size_t k = 0; k < targets.size(); ++k) {
    est.point += reconstructed_fidelity(targets[k], linear_inversion(counts[k]));
  }
  est.point /= static_cast<double>(targets.size());

  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t r = 0; r < n_resamples; ++r) {
    RandomStream sub = rng.substream(r);
    double score = 0.0;
    for (std::size_t k = 0; k < targets.size(); ++k) {
      CountSet resampled = counts[k];
      for (auto& rec : resampled) rec.counts = static_cast<double>(sub.poisson(rec.counts));
      score += reconstructed_fidelity(targets[k], linear_inversion(resampled));
    }
    score /= static_cast<double>(targets.size());
    const double d = score - mean;
    mean += d / static_cast<double>(r + 1);
    m2 += d * (score - mean);
  }
  est.fidelity = mean;
  est.std_error = std::sqrt(m2 / static_cast<double>(n_resamples - 1));
  return est;
}

inline FidelityEstimate fidelity_with_error(const PureQubit& target, const CountSet& counts,
                                            std::size_t n_resamples, const RandomStream& rng) {
  return average_fidelity_with_error({target}, {counts}, n_resamples, rng);
}

}  // namespace qfb
