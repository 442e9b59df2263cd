#pragma once

// State reconstruction from displaced number-state populations.
//
//   Q_k(alpha) = <k| D(-alpha) rho D(-alpha)^dag |k>,
//
// measured on a circle of displacements alpha_p = |alpha| e^{i pi p / N},
// p = -N .. N-1, determines rho_nm up to n, m = N-1. The inversion here
// is real linear least squares over the free parameters of a Hermitian
// trace-one matrix (trace eliminated by substitution), solved by
// orthogonal factorization and projected onto the physical cone. The
// Wigner function follows from the parity-weighted sum
//
//   W(alpha) = (2/pi) sum_n (-1)^n Q_n(alpha).
//
// Grid points are independent; everything here is safe to run
// concurrently over points.

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <string>
#include <thread>
#include <vector>

#include "motional/common.hpp"
#include "motional/fock.hpp"
#include "motional/rng.hpp"

namespace motional {

inline constexpr double kTwoOverPi = 0.63661977236758134308;

struct DisplacementGrid {
  double radius = 0.0;
  int count_n = 0;          // N; the circle has 2N points
  std::vector<cxd> points;  // alpha_p, p = -N .. N-1

  static DisplacementGrid make(double radius, int count_n) {
    if (count_n < 1)
      throw std::invalid_argument("DisplacementGrid: N must be >= 1");
    if (radius < 0.0)
      throw std::invalid_argument("DisplacementGrid: radius must be >= 0");
    DisplacementGrid g;
    g.radius = radius;
    g.count_n = count_n;
    g.points.reserve(2 * count_n);
    for (int p = -count_n; p < count_n; ++p) {
      const double ph = kPi * double(p) / double(count_n);
      g.points.push_back(radius * std::exp(cxd(0.0, ph)));
    }
    return g;
  }
};

// Rows indexed by grid point p = -N .. N-1 (row p + N), columns by the
// vibrational index k. Truncation may drop tail mass, so rows sum to <= 1.
struct QTable {
  int count_n = 0;
  Eigen::MatrixXd values;

  int kmax() const { return static_cast<int>(values.cols()) - 1; }
  int rows() const { return static_cast<int>(values.rows()); }

  // Strict row sums hold for simulated tables; finite-shot resampling
  // fluctuates above 1, so noisy consumers check with strict = false.
  void validate(bool strict_row_sums = true) const {
    if (rows() != 2 * count_n)
      throw std::invalid_argument("QTable: expected 2N rows");
    for (int r = 0; r < rows(); ++r) {
      double sum = 0.0;
      for (int c = 0; c < values.cols(); ++c) {
        if (values(r, c) < -1e-12 || values(r, c) > 1.0 + 1e-9)
          throw std::invalid_argument("QTable: entry outside [0,1]");
        sum += values(r, c);
      }
      if (strict_row_sums && sum > 1.0 + 1e-9)
        throw std::invalid_argument("QTable: row sums must be <= 1");
    }
  }
};

/// Occupation probabilities of the displaced state, k = 0 .. kmax.
/// Exact elements are summed over the full support of rho, so the only
/// approximation is rho's own truncation.
inline Eigen::VectorXd simulate_q(const DensityMatrix& rho, cxd alpha,
                                  int kmax) {
  if (kmax < 0) throw std::invalid_argument("simulate_q: kmax must be >= 0");
  const Eigen::MatrixXcd a = displacement_block(-alpha, kmax + 1, rho.dim());
  const Eigen::MatrixXcd b = a * rho.entries;
  Eigen::VectorXd q(kmax + 1);
  for (int k = 0; k <= kmax; ++k) {
    const double v = (b.row(k).array() * a.row(k).array().conjugate()).sum().real();
    q[k] = std::min(1.0, std::max(0.0, v));
  }
  return q;
}

inline Eigen::VectorXd simulate_q(const StateVector& psi, cxd alpha, int kmax) {
  if (kmax < 0) throw std::invalid_argument("simulate_q: kmax must be >= 0");
  const Eigen::MatrixXcd a = displacement_block(-alpha, kmax + 1, psi.dim());
  const Eigen::VectorXcd v = a * psi.amplitudes;
  Eigen::VectorXd q = v.cwiseAbs2();
  for (int k = 0; k <= kmax; ++k) q[k] = std::min(1.0, q[k]);
  return q;
}

template <class State>
inline QTable simulate_qtable(const State& s, const DisplacementGrid& grid,
                              int kmax) {
  QTable t;
  t.count_n = grid.count_n;
  t.values.resize(2 * grid.count_n, kmax + 1);
  for (int r = 0; r < 2 * grid.count_n; ++r)
    t.values.row(r) = simulate_q(s, grid.points[r], kmax).transpose();
  return t;
}

/// Finite-measurement statistics: every entry resampled as
/// Binomial(shots, q)/shots, keyed by (seed, row, col, shot).
inline QTable add_projection_noise(const QTable& table, long shots,
                                   std::uint64_t seed) {
  if (shots <= 0)
    throw std::domain_error("add_projection_noise: shots must be > 0");
  QTable out = table;
  const int cols = static_cast<int>(table.values.cols());
  for (int r = 0; r < table.rows(); ++r) {
    for (int c = 0; c < cols; ++c) {
      const double p = std::min(1.0, std::max(0.0, table.values(r, c)));
      const std::uint64_t stream =
          static_cast<std::uint64_t>(r) * static_cast<std::uint64_t>(cols) + c;
      out.values(r, c) = double(rng::binomial(seed, stream, shots, p)) / double(shots);
    }
  }
  return out;
}

struct ReconstructionResult {
  DensityMatrix density;
  double condition_number = 0.0;
  double residual_norm = 0.0;
};

/// Least-squares inversion of the displaced-population model. Requires
/// the rank condition nmax <= N-1; the result is projected to the nearest
/// Hermitian, trace-one, positive-semidefinite matrix.
inline ReconstructionResult reconstruct_density(const QTable& table,
                                                const DisplacementGrid& grid,
                                                int nmax) {
  table.validate(false);
  if (table.count_n != grid.count_n ||
      static_cast<int>(grid.points.size()) != table.rows())
    throw std::invalid_argument("reconstruct_density: qtable/grid mismatch");
  if (nmax < 0) throw std::invalid_argument("reconstruct_density: nmax must be >= 0");
  if (nmax > grid.count_n - 1)
    throw std::invalid_argument(
        "reconstruct_density: rank condition nmax <= N-1 violated (nmax = " +
        std::to_string(nmax) + ", N = " + std::to_string(grid.count_n) +
        "): 2N circle points determine rho_nm only up to N-1");
  const int kmax = table.kmax();
  if (kmax < nmax)
    throw std::invalid_argument(
        "reconstruct_density: qtable must cover k up to at least nmax");

  const int d = nmax + 1;
  const int nparams = d * d - 1;  // Hermitian, trace substituted out
  const int neq = table.rows() * (kmax + 1);
  Eigen::MatrixXd design(neq, nparams);
  Eigen::VectorXd rhs(neq);

  int row = 0;
  for (int p = 0; p < table.rows(); ++p) {
    const Eigen::MatrixXcd a = displacement_block(-grid.points[p], kmax + 1, d);
    for (int k = 0; k <= kmax; ++k, ++row) {
      const double last = std::norm(a(k, nmax));
      int col = 0;
      for (int n = 0; n < nmax; ++n) design(row, col++) = std::norm(a(k, n)) - last;
      for (int n = 0; n < d; ++n) {
        for (int m = n + 1; m < d; ++m) {
          const cxd c = a(k, n) * std::conj(a(k, m));
          design(row, col++) = 2.0 * c.real();
          design(row, col++) = -2.0 * c.imag();
        }
      }
      rhs(row) = table.values(p, k) - last;
    }
  }

  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(design);
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(svd.singularValues().size() - 1);
  if (!(smin > smax * 1e-12))
    throw NumericError(
        "reconstruct_density: design matrix is rank deficient (grid too "
        "small or degenerate for the requested nmax; need nmax <= N-1 with "
        "nonzero radius)");

  const Eigen::VectorXd sol = design.colPivHouseholderQr().solve(rhs);

  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(d, d);
  double diag_sum = 0.0;
  int col = 0;
  for (int n = 0; n < nmax; ++n) {
    rho(n, n) = sol(col++);
    diag_sum += rho(n, n).real();
  }
  rho(nmax, nmax) = 1.0 - diag_sum;
  for (int n = 0; n < d; ++n) {
    for (int m = n + 1; m < d; ++m) {
      rho(n, m) = cxd(sol(col), sol(col + 1));
      rho(m, n) = std::conj(rho(n, m));
      col += 2;
    }
  }

  ReconstructionResult res;
  res.condition_number = smax / smin;
  res.residual_norm = (design * sol - rhs).norm();
  res.density = project_physical(rho);
  return res;
}

struct WignerPoint {
  double value = 0.0;
  bool converged = false;
};

/// Parity-weighted sum over a Q sequence. Converged when the last two
/// entries are both below 1e-9; otherwise the flag marks a truncated tail.
inline WignerPoint wigner_point(const Eigen::VectorXd& q) {
  WignerPoint w;
  double sum = 0.0;
  for (int n = 0; n < q.size(); ++n) sum += (n % 2 == 0 ? q[n] : -q[n]);
  w.value = kTwoOverPi * sum;
  const auto sz = q.size();
  w.converged = sz >= 2 && std::abs(q[sz - 1]) < 1e-9 && std::abs(q[sz - 2]) < 1e-9;
  return w;
}

namespace detail {

template <class State>
inline WignerPoint wigner_adaptive(const State& s, cxd alpha, int kmax_cap) {
  int kmax = 8;
  for (;;) {
    const Eigen::VectorXd q = simulate_q(s, alpha, kmax);
    const WignerPoint w = wigner_point(q);
    if (w.converged || kmax >= kmax_cap) return w;
    kmax = std::min(kmax_cap, 2 * kmax);
  }
}

}  // namespace detail

inline WignerPoint wigner_at(const DensityMatrix& rho, cxd alpha,
                             int kmax_cap = 4096) {
  return detail::wigner_adaptive(rho, alpha, kmax_cap);
}

inline WignerPoint wigner_at(const StateVector& psi, cxd alpha,
                             int kmax_cap = 4096) {
  return detail::wigner_adaptive(psi, alpha, kmax_cap);
}

struct WignerGridSpec {
  double re_min = -3.0, re_max = 3.0;
  double im_min = -3.0, im_max = 3.0;
  int re_points = 41, im_points = 41;
};

struct WignerField {
  WignerGridSpec spec;
  std::vector<cxd> points;      // row-major over (im, re)
  std::vector<double> values;   // W(alpha)
  std::vector<char> converged;  // per-point tail flag
};

template <class State>
inline WignerField wigner_field(const State& s, const WignerGridSpec& spec,
                                int threads = 1) {
  if (spec.re_points < 1 || spec.im_points < 1)
    throw std::invalid_argument("wigner_field: grid must be non-empty");
  WignerField f;
  f.spec = spec;
  const int total = spec.re_points * spec.im_points;
  f.points.resize(total);
  f.values.resize(total);
  f.converged.resize(total);
  for (int j = 0; j < spec.im_points; ++j) {
    const double im = spec.im_points == 1
                          ? spec.im_min
                          : spec.im_min + (spec.im_max - spec.im_min) * j /
                                              double(spec.im_points - 1);
    for (int i = 0; i < spec.re_points; ++i) {
      const double re = spec.re_points == 1
                            ? spec.re_min
                            : spec.re_min + (spec.re_max - spec.re_min) * i /
                                                double(spec.re_points - 1);
      f.points[j * spec.re_points + i] = cxd(re, im);
    }
  }
  auto work = [&](int lo, int hi) {
    for (int idx = lo; idx < hi; ++idx) {
      const WignerPoint w = detail::wigner_adaptive(s, f.points[idx], 4096);
      f.values[idx] = w.value;
      f.converged[idx] = w.converged ? 1 : 0;
    }
  };
  if (threads <= 1) {
    work(0, total);
  } else {
    std::vector<std::thread> pool;
    const int nw = std::min(threads, total);
    for (int w = 0; w < nw; ++w) {
      const int lo = total * w / nw;
      const int hi = total * (w + 1) / nw;
      pool.emplace_back(work, lo, hi);
    }
    for (auto& th : pool) th.join();
  }
  return f;
}

}  // namespace motional
