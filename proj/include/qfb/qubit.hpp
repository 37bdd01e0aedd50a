// qubit.hpp
// Exact one- and two-qubit state algebra: pure states, density matrices,
// Bloch vectors, single-qubit rotations and fidelity.
//
// Conventions: |0> = (1,0), |1> = (0,1), |+-> = (|0> +- |1>)/sqrt(2),
// X = [[0,1],[1,0]], Y = [[0,-i],[i,0]], Z = diag(1,-1).  Two-qubit matrices
// act on signal (x) meter with index 2*signal + meter.
//
// Values are not validated on construction; call validate() where inputs
// cross a trust boundary.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <string>

#include "qfb/errors.hpp"

namespace qfb {

using Complex = std::complex<double>;
using Matrix2 = Eigen::Matrix2cd;
using Matrix4 = Eigen::Matrix4cd;
using Vector2 = Eigen::Vector2cd;
using Vector4 = Eigen::Vector4cd;

namespace tol {
inline constexpr double algebraic = 1e-12;
inline constexpr double positivity = 1e-10;
}  // namespace tol

inline constexpr double kHalfPi = std::numbers::pi / 2.0;

/// Label of an input state (psi+ / psi-) or a measurement outcome.
enum class Sign : int { plus = 1, minus = -1 };

inline constexpr std::array<Sign, 2> kSigns{Sign::plus, Sign::minus};

constexpr int to_int(Sign s) noexcept { return static_cast<int>(s); }
constexpr double to_double(Sign s) noexcept { return static_cast<double>(static_cast<int>(s)); }
constexpr Sign opposite(Sign s) noexcept { return s == Sign::plus ? Sign::minus : Sign::plus; }
constexpr const char* to_string(Sign s) noexcept { return s == Sign::plus ? "+" : "-"; }

class PureQubit {
 public:
  PureQubit() : amplitudes_(1.0, 0.0) {}
  explicit PureQubit(const Vector2& amplitudes) : amplitudes_(amplitudes) {}
  PureQubit(Complex a0, Complex a1) : amplitudes_(a0, a1) {}

  const Vector2& amplitudes() const noexcept { return amplitudes_; }
  Complex operator[](int i) const { return amplitudes_(i); }

 private:
  Vector2 amplitudes_;
};

class QubitState {
 public:
  /// Defaults to the maximally mixed state.
  QubitState() : matrix_(Matrix2::Identity() * 0.5) {}
  explicit QubitState(const Matrix2& matrix) : matrix_(matrix) {}

  const Matrix2& matrix() const noexcept { return matrix_; }
  Complex operator()(int row, int col) const { return matrix_(row, col); }

  static QubitState maximally_mixed() { return QubitState{}; }

 private:
  Matrix2 matrix_;
};

class TwoQubitState {
 public:
  TwoQubitState() : matrix_(Matrix4::Identity() * 0.25) {}
  explicit TwoQubitState(const Matrix4& matrix) : matrix_(matrix) {}

  const Matrix4& matrix() const noexcept { return matrix_; }

 private:
  Matrix4 matrix_;
};

class Unitary2 {
 public:
  Unitary2() : matrix_(Matrix2::Identity()) {}
  explicit Unitary2(const Matrix2& matrix) : matrix_(matrix) {}

  const Matrix2& matrix() const noexcept { return matrix_; }
  Unitary2 operator*(const Unitary2& rhs) const { return Unitary2{matrix_ * rhs.matrix_}; }

 private:
  Matrix2 matrix_;
};

struct BlochVector {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double norm() const noexcept { return std::sqrt(x * x + y * y + z * z); }
  double dot(const BlochVector& o) const noexcept { return x * o.x + y * o.y + z * o.z; }
};

// ---------------------------------------------------------------------------
// Fixed states and operators

inline PureQubit ket0() { return PureQubit{1.0, 0.0}; }
inline PureQubit ket1() { return PureQubit{0.0, 1.0}; }
inline PureQubit ket_plus() { return PureQubit{std::numbers::sqrt2 / 2, std::numbers::sqrt2 / 2}; }
inline PureQubit ket_minus() { return PureQubit{std::numbers::sqrt2 / 2, -std::numbers::sqrt2 / 2}; }

inline Matrix2 pauli_x() {
  Matrix2 m;
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}

inline Matrix2 pauli_y() {
  const Complex i{0.0, 1.0};
  Matrix2 m;
  m << 0.0, -i, i, 0.0;
  return m;
}

inline Matrix2 pauli_z() {
  Matrix2 m;
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}

inline Unitary2 phase_flip() { return Unitary2{pauli_z()}; }

// ---------------------------------------------------------------------------
// Validators

namespace detail {

inline double max_abs(const auto& m) { return m.cwiseAbs().maxCoeff(); }

inline std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

/// Eigenvalues of a Hermitian 2x2 matrix, ascending.
inline std::array<double, 2> hermitian_eigenvalues(const Matrix2& m) {
  const double a = m(0, 0).real();
  const double d = m(1, 1).real();
  const double half_gap = std::hypot(0.5 * (a - d), std::abs(m(0, 1)));
  const double mid = 0.5 * (a + d);
  return {mid - half_gap, mid + half_gap};
}

}  // namespace detail

inline double min_eigenvalue(const QubitState& rho) {
  return detail::hermitian_eigenvalues(rho.matrix())[0];
}

inline double min_eigenvalue(const TwoQubitState& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix4> solver(rho.matrix(), Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

inline void validate(const PureQubit& psi) {
  const double n = psi.amplitudes().norm();
  if (!std::isfinite(n) || std::abs(n - 1.0) > tol::algebraic) {
    throw ValidationError("PureQubit: norm " + detail::fmt_double(n) + " differs from 1");
  }
}

namespace detail {

template <typename State>
void validate_density(const State& rho, const char* name) {
  const auto& m = rho.matrix();
  if (!m.allFinite()) throw ValidationError(std::string(name) + ": non-finite entries");
  const double herm = max_abs(m - m.adjoint());
  if (herm > tol::algebraic) {
    throw ValidationError(std::string(name) + ": not Hermitian (deviation " + fmt_double(herm) + ")");
  }
  const Complex tr = m.trace();
  if (std::abs(tr - 1.0) > tol::algebraic) {
    throw ValidationError(std::string(name) + ": trace " + fmt_double(tr.real()) + " differs from 1");
  }
  const double lo = min_eigenvalue(rho);
  if (lo < -tol::positivity) {
    throw ValidationError(std::string(name) + ": negative eigenvalue " + fmt_double(lo));
  }
}

}  // namespace detail

inline void validate(const QubitState& rho) { detail::validate_density(rho, "QubitState"); }
inline void validate(const TwoQubitState& rho) { detail::validate_density(rho, "TwoQubitState"); }

inline void validate(const Unitary2& u) {
  const double dev = detail::max_abs(u.matrix() * u.matrix().adjoint() - Matrix2::Identity());
  if (!(dev <= tol::algebraic)) {
    throw ValidationError("Unitary2: U U^dagger deviates from identity by " + detail::fmt_double(dev));
  }
}

inline void validate(const BlochVector& b) {
  const double n = b.norm();
  if (!(n <= 1.0 + tol::positivity)) {
    throw ValidationError("BlochVector: length " + detail::fmt_double(n) + " exceeds 1");
  }
}

template <typename T>
bool is_valid(const T& value) {
  try {
    validate(value);
    return true;
  } catch (const ValidationError&) {
    return false;
  }
}

// ---------------------------------------------------------------------------
// Construction

/// cos(theta/2)|+> + sign * sin(theta/2)|->; the pair is separated by 2*theta
/// on the Bloch sphere and has overlap cos(theta).
inline PureQubit make_input_state(double theta, Sign sign) {
  if (!(theta >= 0.0 && theta <= kHalfPi)) {
    throw DomainError("make_input_state: theta must lie in [0, pi/2], got " + detail::fmt_double(theta));
  }
  const double c = std::cos(theta / 2.0);
  const double s = to_double(sign) * std::sin(theta / 2.0);
  const double k = std::numbers::sqrt2 / 2.0;
  return PureQubit{k * (c + s), k * (c - s)};
}

inline QubitState to_density(const PureQubit& psi) {
  return QubitState{psi.amplitudes() * psi.amplitudes().adjoint()};
}

inline BlochVector bloch(const QubitState& rho) {
  const Matrix2& m = rho.matrix();
  return {2.0 * m(1, 0).real(), 2.0 * m(1, 0).imag(), (m(0, 0) - m(1, 1)).real()};
}

inline QubitState density_from_bloch(const BlochVector& b) {
  validate(b);
  Matrix2 m;
  m << Complex{0.5 * (1.0 + b.z), 0.0}, Complex{0.5 * b.x, -0.5 * b.y},
      Complex{0.5 * b.x, 0.5 * b.y}, Complex{0.5 * (1.0 - b.z), 0.0};
  return QubitState{m};
}

/// exp(sign * i * eta * Y).  Rotates Bloch vectors about y by -2*sign*eta
/// (z towards -x for positive sign*eta).
inline Unitary2 rotation_y(double eta, Sign sign) {
  const double a = to_double(sign) * eta;
  const double c = std::cos(a);
  const double s = std::sin(a);
  Matrix2 m;
  m << c, s, -s, c;
  return Unitary2{m};
}

/// Rotation of the Bloch sphere by `angle` about +y (z towards +x).
inline Unitary2 bloch_rotation_y(double angle) { return rotation_y(angle / 2.0, Sign::minus); }

// ---------------------------------------------------------------------------
// Evolution and figures of merit

inline QubitState apply_unitary(const QubitState& rho, const Unitary2& u) {
  return QubitState{u.matrix() * rho.matrix() * u.matrix().adjoint()};
}

inline TwoQubitState apply_unitary(const TwoQubitState& rho, const Matrix4& u) {
  return TwoQubitState{u * rho.matrix() * u.adjoint()};
}

/// K rho K^dagger for a possibly non-unitary two-qubit operator (result is
/// unnormalized).
inline Matrix4 apply_operator(const TwoQubitState& rho, const Matrix4& k) {
  return k * rho.matrix() * k.adjoint();
}

inline TwoQubitState tensor(const QubitState& signal, const QubitState& meter) {
  Matrix4 m;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d) m(2 * a + c, 2 * b + d) = signal(a, b) * meter(c, d);
  return TwoQubitState{m};
}

namespace detail {

/// <psi|rho|psi> without validation.
inline double overlap(const PureQubit& psi, const Matrix2& rho) {
  return (psi.amplitudes().adjoint() * rho * psi.amplitudes())(0, 0).real();
}

}  // namespace detail

/// <psi|rho|psi> for a pure reference state.
inline double fidelity(const PureQubit& psi, const QubitState& rho) {
  validate(psi);
  validate(rho);
  const Complex f = (psi.amplitudes().adjoint() * rho.matrix() * psi.amplitudes())(0, 0);
  if (std::abs(f.imag()) > tol::algebraic) {
    throw ValidationError("fidelity: imaginary residue " + detail::fmt_double(f.imag()));
  }
  return std::clamp(f.real(), 0.0, 1.0);
}

}  // namespace qfb
