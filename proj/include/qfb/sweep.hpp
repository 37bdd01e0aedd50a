// sweep.hpp
// Parameter-plane sweeps over (theta, p), location of the largest gain of
// weak measurement over the two limiting schemes, the do-nothing / Helstrom
// crossover, and an exhaustive (chi, eta) search used as an independent
// check on the closed-form optima.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <thread>
#include <vector>

#include "qfb/errors.hpp"
#include "qfb/protocol.hpp"

namespace qfb {

struct GridSpec {
  double theta_min = 0.0;
  double theta_max = kHalfPi;
  double p_min = 0.0;
  double p_max = 0.5;
  std::size_t n_theta = 200;
  std::size_t n_p = 200;

  double theta_at(std::size_t i) const { return axis_value(theta_min, theta_max, n_theta, i); }
  double p_at(std::size_t j) const { return axis_value(p_min, p_max, n_p, j); }
  double theta_step() const { return (theta_max - theta_min) / static_cast<double>(n_theta - 1); }
  double p_step() const { return (p_max - p_min) / static_cast<double>(n_p - 1); }
  std::size_t size() const { return n_theta * n_p; }

 private:
  static double axis_value(double lo, double hi, std::size_t n, std::size_t i) {
    if (i + 1 == n) return hi;
    return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
};

inline void validate(const GridSpec& grid) {
  check_theta(grid.theta_min);
  check_theta(grid.theta_max);
  check_noise_probability(grid.p_min);
  check_noise_probability(grid.p_max);
  if (grid.theta_min > grid.theta_max || grid.p_min > grid.p_max) {
    throw DomainError("grid bounds must satisfy min <= max");
  }
  if (grid.n_theta < 2 || grid.n_p < 2) throw DomainError("grid needs at least 2 points per axis");
}

struct SweepCell {
  double theta = 0.0;
  double p = 0.0;
  double chi_opt = 0.0;
  double eta_opt = 0.0;
  double f_opt = 0.0;
  double f_dn = 0.0;
  double f_h = 0.0;
  double f_diff = 0.0;
  bool chi_degenerate = false;
};

inline SweepCell evaluate_cell(double theta, double p) {
  SweepCell cell;
  cell.theta = theta;
  cell.p = p;
  const ChiOptimum chi = chi_opt(theta, p);
  cell.chi_opt = chi.chi;
  cell.chi_degenerate = chi.degenerate;
  cell.eta_opt = eta_opt(theta, p, chi.chi);
  cell.f_opt = avg_fidelity_opt(theta, p);
  cell.f_dn = fidelity_dn(theta, p);
  cell.f_h = fidelity_h(theta, p);
  cell.f_diff = cell.f_opt - std::max(cell.f_dn, cell.f_h);
  return cell;
}

/// Gain of the optimal scheme over the better of do-nothing and Helstrom.
inline double improvement(double theta, double p) {
  return avg_fidelity_opt(theta, p) - std::max(fidelity_dn(theta, p), fidelity_h(theta, p));
}

/// One cell per grid point, row-major with theta as the row index.  Cells are
/// computed independently, so any thread count yields the same list.
inline std::vector<SweepCell> sweep(const GridSpec& grid, unsigned threads = 1) {
  validate(grid);
  std::vector<SweepCell> cells(grid.size());
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      cells[k] = evaluate_cell(grid.theta_at(k / grid.n_p), grid.p_at(k % grid.n_p));
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(cells.size())));
  if (threads == 1) {
    work(0, cells.size());
    return cells;
  }
  {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (cells.size() + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t begin = t * chunk;
      const std::size_t end = std::min(cells.size(), begin + chunk);
      if (begin < end) pool.emplace_back(work, begin, end);
    }
  }
  return cells;
}

// ---------------------------------------------------------------------------
// One-dimensional maximization

struct Maximum1D {
  double x = 0.0;
  double value = 0.0;
};

/// Golden-section search for the maximum of a unimodal function on [lo, hi].
/// Both end points are also evaluated so edge maxima are located exactly.
inline Maximum1D golden_section_max(const std::function<double(double)>& f, double lo, double hi,
                                    double tolerance) {
  if (hi < lo) std::swap(lo, hi);
  Maximum1D best{lo, f(lo)};
  if (hi == lo) return best;
  if (const double fh = f(hi); fh > best.value) best = {hi, fh};

  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo;
  double b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tolerance) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  const Maximum1D interior = fc >= fd ? Maximum1D{c, fc} : Maximum1D{d, fd};
  return interior.value > best.value ? interior : best;
}

// ---------------------------------------------------------------------------
// Largest improvement

struct MaxImprovement {
  double theta = 0.0;
  double p = 0.0;
  double f_diff = 0.0;
  /// The maximum sits on the edge of the searched region.
  bool on_boundary = false;
};

/// Coarse grid argmax, then golden-section refinement within a few cells.
/// The maximum lies on the kink where do-nothing and Helstrom tie, so p is
/// maximized exactly for each trial theta (nested search) instead of
/// alternating single-axis passes that would stall on the ridge.
inline MaxImprovement find_max_improvement(const GridSpec& grid, double refine_tolerance) {
  if (!(refine_tolerance > 0.0)) throw DomainError("refine_tolerance must be positive");
  const std::vector<SweepCell> cells = sweep(grid);
  const auto it = std::max_element(cells.begin(), cells.end(),
                                   [](const SweepCell& a, const SweepCell& b) { return a.f_diff < b.f_diff; });
  MaxImprovement best{it->theta, it->p, it->f_diff, false};

  constexpr double kBracketCells = 5.0;
  constexpr double kInnerTolerance = 1e-11;
  const double t_lo = std::max(grid.theta_min, best.theta - kBracketCells * grid.theta_step());
  const double t_hi = std::min(grid.theta_max, best.theta + kBracketCells * grid.theta_step());
  const double p_lo = std::max(grid.p_min, best.p - kBracketCells * grid.p_step());
  const double p_hi = std::min(grid.p_max, best.p + kBracketCells * grid.p_step());

  auto best_p = [&](double theta) {
    return golden_section_max([theta](double p) { return improvement(theta, p); }, p_lo, p_hi,
                              std::min(kInnerTolerance, refine_tolerance));
  };
  const Maximum1D outer =
      golden_section_max([&](double theta) { return best_p(theta).value; }, t_lo, t_hi, refine_tolerance);
  const Maximum1D inner = best_p(outer.x);
  if (inner.value >= best.f_diff) best = {outer.x, inner.x, inner.value, false};

  auto near = [refine_tolerance](double a, double b) { return std::abs(a - b) <= refine_tolerance; };
  const bool theta_span = grid.theta_max > grid.theta_min;
  const bool p_span = grid.p_max > grid.p_min;
  best.on_boundary = (theta_span && (near(best.theta, grid.theta_min) || near(best.theta, grid.theta_max))) ||
                     (p_span && (near(best.p, grid.p_min) || near(best.p, grid.p_max)));
  return best;
}

// ---------------------------------------------------------------------------
// Do-nothing / Helstrom crossover

struct CrossoverPoint {
  double theta = 0.0;
  /// Noise level at which both limiting schemes tie; empty when they do not
  /// cross inside (0, 1/2].
  std::optional<double> p_star;
  std::optional<double> p_star_closed_form;
};

/// p* = [1 - sqrt(sin^4 theta + cos^2 theta)] / (2 cos^2 theta).
inline std::optional<double> crossover_closed_form(double theta) {
  check_theta(theta);
  const double c2 = std::cos(theta) * std::cos(theta);
  const double s2 = std::sin(theta) * std::sin(theta);
  if (c2 <= 0.0) return std::nullopt;
  const double p = (1.0 - std::sqrt(s2 * s2 + c2)) / (2.0 * c2);
  if (!(p >= 0.0 && p <= 0.5)) return std::nullopt;
  return p;
}

inline std::vector<CrossoverPoint> crossover_curve(const std::vector<double>& theta_list, double tolerance) {
  if (!(tolerance > 0.0)) throw DomainError("crossover tolerance must be positive");
  constexpr double kNoCrossing = 1e-15;
  std::vector<CrossoverPoint> out;
  out.reserve(theta_list.size());
  for (double theta : theta_list) {
    check_theta(theta);
    auto gap = [theta](double p) { return fidelity_dn(theta, p) - fidelity_h(theta, p); };
    CrossoverPoint point{theta, std::nullopt, std::nullopt};
    double lo = 0.0;
    double hi = 0.5;
    if (gap(lo) >= 0.0 && gap(hi) < -kNoCrossing) {
      while (hi - lo > tolerance) {
        const double mid = 0.5 * (lo + hi);
        (gap(mid) >= 0.0 ? lo : hi) = mid;
      }
      point.p_star = 0.5 * (lo + hi);
      point.p_star_closed_form = crossover_closed_form(theta);
    }
    out.push_back(point);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Exhaustive protocol optimization

struct ProtocolOptimum {
  double chi = 0.0;
  double eta = 0.0;
  double fidelity = 0.0;
};

/// Scans (chi, eta) over [0, pi/2]^2 with exact propagation, then refines
/// the grid argmax by a nested golden-section search.
inline ProtocolOptimum brute_force_protocol_opt(double theta, double p, double resolution) {
  check_theta(theta);
  check_noise_probability(p);
  if (!(resolution > 0.0 && resolution <= 1e-2)) throw DomainError("resolution must lie in (0, 1e-2]");

  const auto n = static_cast<std::size_t>(std::ceil(kHalfPi / resolution)) + 1;
  const double step = kHalfPi / static_cast<double>(n - 1);
  auto angle = [&](std::size_t i) { return i + 1 == n ? kHalfPi : step * static_cast<double>(i); };

  std::vector<std::array<Unitary2, 2>> rotations(n);
  for (std::size_t j = 0; j < n; ++j) {
    rotations[j] = {correction_rotation(angle(j), Sign::plus), correction_rotation(angle(j), Sign::minus)};
  }

  ProtocolOptimum best{0.0, 0.0, -1.0};
  for (std::size_t i = 0; i < n; ++i) {
    const ProtocolEvaluator evaluator(theta, p, angle(i));
    for (std::size_t j = 0; j < n; ++j) {
      const double f = evaluator.average_fidelity(rotations[j]);
      if (f > best.fidelity) best = {angle(i), angle(j), f};
    }
  }

  // The optimum lies on a shallow ridge along which chi and eta move
  // together, so eta is re-maximized for every trial chi.
  constexpr double kPolish = 1e-10;
  constexpr double kChiCells = 2.0;
  constexpr double kEtaCells = 6.0;
  const double eta_lo = std::max(0.0, best.eta - kEtaCells * step);
  const double eta_hi = std::min(kHalfPi, best.eta + kEtaCells * step);
  auto best_eta = [&](double chi) {
    const ProtocolEvaluator at_chi(theta, p, chi);
    return golden_section_max([&](double eta) { return at_chi.average_fidelity(eta); }, eta_lo, eta_hi, kPolish);
  };
  const Maximum1D chi_pass = golden_section_max([&](double chi) { return best_eta(chi).value; },
                                                std::max(0.0, best.chi - kChiCells * step),
                                                std::min(kHalfPi, best.chi + kChiCells * step), kPolish);
  const Maximum1D eta_pass = best_eta(chi_pass.x);
  if (eta_pass.value > best.fidelity) best = {chi_pass.x, eta_pass.x, eta_pass.value};
  return best;
}

}  // namespace qfb
