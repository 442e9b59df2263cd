#pragma once

// Truncated Fock-space representation of the motional state of a trapped
// ion, plus the operator constructions everything else consumes.
//
// Conventions:
//   - |n> is the number basis of the x-mode, n = 0 .. dim-1.
//   - D(alpha) = exp(alpha a^dag - conj(alpha) a). Matrix elements are
//     evaluated with the exact associated-Laguerre closed form
//         <m|D(alpha)|n> = sqrt(n!/m!) alpha^(m-n) e^(-|alpha|^2/2)
//                          L_n^(m-n)(|alpha|^2),    m >= n,
//     so individual entries carry no truncation error. Finite-dimensional
//     *products* of cropped matrices still miss the summed-out tail; use
//     displacement_safe_block() to size the block on which products are
//     clean.
//   - All constructors renormalize over the truncated basis and return
//     unit-norm states / trace-one densities.
//
// Everything here is immutable after construction and safe to share
// across threads.

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "motional/common.hpp"

namespace motional {

inline constexpr int kDefaultMargin = 20;

struct StateVector {
  Eigen::VectorXcd amplitudes;

  int dim() const { return static_cast<int>(amplitudes.size()); }
  double norm() const { return amplitudes.norm(); }
};

struct DensityMatrix {
  Eigen::MatrixXcd entries;

  int dim() const { return static_cast<int>(entries.rows()); }
  double trace_real() const { return entries.trace().real(); }
};

// Entangled spin-motion state: the two branches share the motional basis
// and are individually unnormalized; |down|^2 + |up|^2 = 1.
struct SpinMotionState {
  Eigen::VectorXcd down;
  Eigen::VectorXcd up;

  int dim() const { return static_cast<int>(down.size()); }
  double down_population() const { return down.squaredNorm(); }
  double up_population() const { return up.squaredNorm(); }
};

// Trap and coupling constants. The Raman detuning from the intermediate
// level (~ -2pi x 12 GHz in the apparatus) only sets the interaction
// strength and appears in no equation handled here, so it is not a field.
struct OscillatorParams {
  double omega_x;  // secular frequency of the x-mode (rad/s)
  double omega_0;  // internal-state splitting (rad/s)
  double eta;      // Lamb-Dicke parameter
  double x0;       // ground-state wave-packet size (m), (hbar/2 m omega_x)^(1/2)
};

/// Number state |n>.
inline StateVector make_fock(int n, int dim) {
  if (dim < 1) throw std::invalid_argument("make_fock: dim must be >= 1");
  if (n < 0) throw std::out_of_range("make_fock: n must be nonnegative");
  if (n >= dim)
    throw std::out_of_range("make_fock: n = " + std::to_string(n) +
                            " out of range for dim = " + std::to_string(dim));
  StateVector s{Eigen::VectorXcd::Zero(dim)};
  s.amplitudes[n] = 1.0;
  return s;
}

/// Coherent state |alpha>, amplitudes e^{-|a|^2/2} a^n / sqrt(n!),
/// renormalized over the truncated basis. Mean occupation is |alpha|^2
/// up to the truncation tail; |alpha|^2 > dim/4 triggers a warning.
inline StateVector make_coherent(cxd alpha, int dim) {
  if (dim < 1) throw std::invalid_argument("make_coherent: dim must be >= 1");
  const double nbar = std::norm(alpha);
  if (nbar > 0.25 * dim) {
    detail::warn("make_coherent: |alpha|^2 = " + std::to_string(nbar) +
                 " exceeds dim/4 = " + std::to_string(0.25 * dim) +
                 "; truncation tail may be significant");
  }
  StateVector s{Eigen::VectorXcd(dim)};
  cxd c = std::exp(-0.5 * nbar);
  for (int n = 0; n < dim; ++n) {
    s.amplitudes[n] = c;
    c *= alpha / std::sqrt(double(n + 1));
  }
  s.amplitudes /= s.amplitudes.norm();
  return s;
}

/// Thermal density matrix, diagonal P_n = nbar^n / (nbar+1)^(n+1),
/// renormalized over the truncated basis.
inline DensityMatrix make_thermal(double nbar, int dim) {
  if (dim < 1) throw std::invalid_argument("make_thermal: dim must be >= 1");
  if (nbar < 0.0) throw std::domain_error("make_thermal: nbar must be >= 0");
  Eigen::VectorXd p(dim);
  const double ratio = nbar / (nbar + 1.0);
  double v = 1.0 / (nbar + 1.0);
  for (int n = 0; n < dim; ++n) {
    p[n] = v;
    v *= ratio;
  }
  p /= p.sum();
  DensityMatrix rho{Eigen::MatrixXcd::Zero(dim, dim)};
  rho.entries.diagonal() = p.cast<cxd>();
  return rho;
}

/// Squeezed vacuum with squeeze factor beta = e^{2r} >= 1. Amplitudes
/// live on even n only,
///   c_{2n} = (-tanh r)^n sqrt((2n)!) / (2^n n! sqrt(cosh r)),
/// the standard sign convention (the measured quantity fixes only the
/// populations). Warns when the ideal-law tail outside the basis
/// exceeds 1e-6.
inline StateVector make_squeezed_vacuum(double beta, int dim) {
  if (dim < 1)
    throw std::invalid_argument("make_squeezed_vacuum: dim must be >= 1");
  if (beta < 1.0)
    throw std::domain_error("make_squeezed_vacuum: beta must be >= 1");
  const double r = 0.5 * std::log(beta);
  const double th = std::tanh(r);
  StateVector s{Eigen::VectorXcd::Zero(dim)};
  double c = 1.0 / std::sqrt(std::cosh(r));
  double mass = 0.0;
  for (int n = 0; 2 * n < dim; ++n) {
    s.amplitudes[2 * n] = c;
    mass += c * c;
    // c_{2(n+1)} / c_{2n} = -tanh r * sqrt((2n+1)/(2n+2))
    c *= -th * std::sqrt((2.0 * n + 1.0) / (2.0 * n + 2.0));
  }
  if (1.0 - mass > 1e-6) {
    detail::warn("make_squeezed_vacuum: truncated tail mass " +
                 std::to_string(1.0 - mass) + " exceeds 1e-6 at dim = " +
                 std::to_string(dim));
  }
  s.amplitudes /= s.amplitudes.norm();
  return s;
}

/// Exact matrix element <m|D(alpha)|n> of the displacement operator.
inline cxd displacement_element(int m, int n, cxd alpha) {
  if (m < 0 || n < 0)
    throw std::out_of_range("displacement_element: negative index");
  const double x = std::norm(alpha);
  int a, k;
  cxd z;
  if (m >= n) {
    a = m - n;
    k = n;
    z = alpha;
  } else {
    a = n - m;
    k = m;
    z = -std::conj(alpha);
  }
  cxd pref = std::exp(-0.5 * x);
  for (int j = k + 1; j <= k + a; ++j) pref *= z / std::sqrt(double(j));
  // L_k^a(x) by upward recurrence in the degree.
  double lag = 1.0;
  if (k >= 1) {
    double prev = 1.0;
    lag = 1.0 + a - x;
    for (int i = 1; i < k; ++i) {
      const double next = ((2.0 * i + 1.0 + a - x) * lag - (i + a) * prev) / (i + 1.0);
      prev = lag;
      lag = next;
    }
  }
  return pref * lag;
}

/// Displacement operator on the truncated basis, entries exact.
inline Eigen::MatrixXcd displacement_matrix(cxd alpha, int dim) {
  if (dim < 1)
    throw std::invalid_argument("displacement_matrix: dim must be >= 1");
  Eigen::MatrixXcd d(dim, dim);
  for (int n = 0; n < dim; ++n)
    for (int m = 0; m < dim; ++m) d(m, n) = displacement_element(m, n, alpha);
  return d;
}

/// Same operator by scaling-and-squaring Pade exponentiation of the
/// truncated generator alpha a^dag - conj(alpha) a, computed at working
/// dimension dim + margin and cropped. Kept as the independent route the
/// closed form is checked against; the closed form is the default
/// because it is exact per entry and cheaper.
Eigen::MatrixXcd displacement_matrix_pade(cxd alpha, int dim,
                                          int margin = kDefaultMargin);

/// Rectangular block of exact elements, rows 0..rows-1, cols 0..cols-1.
/// This is what tomography uses: summing over the full support of a
/// truncated state against exact elements leaves no truncation error.
inline Eigen::MatrixXcd displacement_block(cxd alpha, int rows, int cols) {
  Eigen::MatrixXcd d(rows, cols);
  for (int n = 0; n < cols; ++n)
    for (int m = 0; m < rows; ++m) d(m, n) = displacement_element(m, n, alpha);
  return d;
}

/// Largest leading block of a dim-dimensional crop on which displaced
/// columns keep their full support: the number distribution of D(a)|n>
/// ends near (sqrt(n)+|a|)^2 with an Airy-scale edge, so products of
/// cropped matrices are clean up to this block.
inline int displacement_safe_block(int dim, double abs_alpha) {
  int n = 0;
  while (n < dim) {
    const double edge = (std::sqrt(double(n + 1)) + abs_alpha) *
                        (std::sqrt(double(n + 1)) + abs_alpha);
    if (edge + 8.0 * std::cbrt(edge) > dim) break;
    ++n;
  }
  return n;
}

/// Schroedinger-cat spin-motion state
///   (|up>|alpha e^{i phi}> + |down>|alpha>) / sqrt(2),
/// the state after step (e) of the interferometer sequence. phi = pi
/// gives the familiar pair of oppositely displaced wave packets.
inline SpinMotionState make_cat(cxd alpha, double phi, int dim) {
  const StateVector down = make_coherent(alpha, dim);
  const StateVector up = make_coherent(alpha * std::exp(cxd(0.0, phi)), dim);
  const double inv = 1.0 / std::sqrt(2.0);
  return SpinMotionState{down.amplitudes * inv, up.amplitudes * inv};
}

inline Eigen::VectorXd populations(const StateVector& s) {
  return s.amplitudes.cwiseAbs2();
}

inline Eigen::VectorXd populations(const DensityMatrix& rho) {
  return rho.entries.diagonal().real().cwiseMax(0.0);
}

/// Motional populations of an entangled state, traced over the spin.
inline Eigen::VectorXd populations(const SpinMotionState& s) {
  return s.down.cwiseAbs2() + s.up.cwiseAbs2();
}

inline double mean_n(const Eigen::VectorXd& pops) {
  double m = 0.0;
  for (int n = 0; n < pops.size(); ++n) m += n * pops[n];
  return m;
}

inline double mean_n(const StateVector& s) { return mean_n(Eigen::VectorXd(populations(s))); }
inline double mean_n(const DensityMatrix& rho) { return mean_n(Eigen::VectorXd(populations(rho))); }

/// Nearest physical density matrix: Hermitize, clip negative eigenvalues,
/// renormalize the trace.
inline DensityMatrix project_physical(const Eigen::MatrixXcd& m) {
  if (m.rows() != m.cols())
    throw std::invalid_argument("project_physical: matrix must be square");
  const Eigen::MatrixXcd h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  if (es.info() != Eigen::Success)
    throw NumericError("project_physical: eigendecomposition failed");
  Eigen::VectorXd w = es.eigenvalues().cwiseMax(0.0);
  const double tr = w.sum();
  if (tr < 1e-12)
    throw NumericError("project_physical: matrix has no positive part");
  w /= tr;
  DensityMatrix rho{es.eigenvectors() * w.asDiagonal().toDenseMatrix().cast<cxd>() *
                    es.eigenvectors().adjoint()};
  return rho;
}

}  // namespace motional

#include <unsupported/Eigen/MatrixFunctions>

namespace motional {

inline Eigen::MatrixXcd displacement_matrix_pade(cxd alpha, int dim,
                                                 int margin) {
  if (dim < 1)
    throw std::invalid_argument("displacement_matrix_pade: dim must be >= 1");
  if (margin < 0)
    throw std::invalid_argument("displacement_matrix_pade: margin must be >= 0");
  const int w = dim + margin;
  Eigen::MatrixXcd gen = Eigen::MatrixXcd::Zero(w, w);
  for (int n = 0; n + 1 < w; ++n) {
    const double sq = std::sqrt(double(n + 1));
    gen(n + 1, n) = alpha * sq;          // a^dag
    gen(n, n + 1) = -std::conj(alpha) * sq;  // -conj(alpha) a
  }
  const Eigen::MatrixXcd full = gen.exp();
  return full.topLeftCorner(dim, dim);
}

}  // namespace motional
