#pragma once

// Parameter extraction from signal traces: damped-sinusoid fits,
// inversion of the flopping signal into number-state populations
// (nonnegative least squares with the unit-sum cap), and the parametric
// distribution fits for thermal, Poissonian, squeezed, and cat-fringe
// data.
//
// All nonlinear fits run the same damped Gauss-Newton engine with
// multiplicative trust damping: the step solves
// (J^T W J + lambda diag(J^T W J)) d = -J^T W r, lambda shrinks on
// accepted steps and grows on rejected ones, so the accepted cost is
// monotone. Non-convergence is reported through the flag, never thrown.
// Distribution models are renormalized over the data's support, matching
// the library-wide truncation convention.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "motional/common.hpp"
#include "motional/signal.hpp"

namespace motional {

struct FitResult {
  std::vector<std::string> param_names;
  Eigen::VectorXd params;
  Eigen::MatrixXd covariance;
  double residual_norm = 0.0;
  bool converged = false;
  int iterations = 0;
  std::string diagnostic;
  std::vector<std::string> active_constraints;

  double param(const std::string& name) const {
    for (std::size_t i = 0; i < param_names.size(); ++i)
      if (param_names[i] == name) return params[static_cast<int>(i)];
    throw std::out_of_range("FitResult: no parameter named " + name);
  }

  double stderror(const std::string& name) const {
    for (std::size_t i = 0; i < param_names.size(); ++i)
      if (param_names[i] == name) {
        const int k = static_cast<int>(i);
        return std::sqrt(std::max(0.0, covariance(k, k)));
      }
    throw std::out_of_range("FitResult: no parameter named " + name);
  }
};

struct FitOptions {
  bool use_shot_weights = false;  // weights = shots / (P(1-P) + 1e-6)
  int max_iterations = 200;
};

namespace detail {

struct GnSpec {
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> residual;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> jacobian;
  Eigen::VectorXd weights;  // size 0 = unweighted
  Eigen::VectorXd lower;    // size 0 = unbounded
  Eigen::VectorXd upper;
};

inline Eigen::VectorXd clamp_params(const GnSpec& spec, Eigen::VectorXd p) {
  if (spec.lower.size() > 0) p = p.cwiseMax(spec.lower);
  if (spec.upper.size() > 0) p = p.cwiseMin(spec.upper);
  return p;
}

inline FitResult damped_gauss_newton(const GnSpec& spec, Eigen::VectorXd p0,
                                     const FitOptions& opt) {
  FitResult out;
  const int np = static_cast<int>(p0.size());
  Eigen::VectorXd p = clamp_params(spec, std::move(p0));

  auto weighted = [&](Eigen::VectorXd r) {
    if (spec.weights.size() > 0)
      r.array() *= spec.weights.array().sqrt();
    return r;
  };
  auto weighted_jac = [&](Eigen::MatrixXd j) {
    if (spec.weights.size() > 0)
      for (int c = 0; c < j.cols(); ++c)
        j.col(c).array() *= spec.weights.array().sqrt();
    return j;
  };

  Eigen::VectorXd r = weighted(spec.residual(p));
  double cost = 0.5 * r.squaredNorm();
  double lambda = 1e-3;
  int accepted = 0;
  Eigen::MatrixXd j;

  for (int it = 0; it < opt.max_iterations; ++it) {
    j = weighted_jac(spec.jacobian(p));
    const Eigen::VectorXd grad = j.transpose() * r;
    if (grad.lpNorm<Eigen::Infinity>() <= 1e-10 * (1.0 + r.norm())) {
      out.converged = true;
      break;
    }
    const Eigen::MatrixXd jtj = j.transpose() * j;
    bool stepped = false;
    for (int tries = 0; tries < 25; ++tries) {
      Eigen::MatrixXd damped = jtj;
      damped.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-12);
      const Eigen::VectorXd delta = damped.ldlt().solve(-grad);
      const Eigen::VectorXd pn = clamp_params(spec, p + delta);
      const Eigen::VectorXd rn = weighted(spec.residual(pn));
      const double cn = 0.5 * rn.squaredNorm();
      if (std::isfinite(cn) && cn < cost) {
        p = pn;
        r = rn;
        cost = cn;
        lambda = std::max(lambda * 0.3, 1e-14);
        ++accepted;
        stepped = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!stepped) {
      // No downhill step at any damping: stationary as far as we can tell.
      out.converged = grad.lpNorm<Eigen::Infinity>() <= 1e-8 * (1.0 + r.norm());
      break;
    }
  }

  out.params = p;
  out.iterations = accepted;
  out.residual_norm = r.norm();
  // Covariance sigma^2 (J^T W J)^-1 at the solution.
  j = weighted_jac(spec.jacobian(p));
  const Eigen::MatrixXd jtj = j.transpose() * j;
  const int dof = static_cast<int>(r.size()) - np;
  const double sigma2 = dof > 0 ? r.squaredNorm() / dof : 0.0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(jtj);
  if (lu.isInvertible()) {
    out.covariance = sigma2 * lu.inverse();
  } else {
    out.covariance = Eigen::MatrixXd::Zero(np, np);
    out.diagnostic = "singular normal equations; covariance unavailable";
  }
  return out;
}

// Lawson-Hanson nonnegative least squares.
inline Eigen::VectorXd nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  const int n = static_cast<int>(a.cols());
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  std::vector<bool> passive(n, false);
  const double tol = 1e-10 * (a.transpose() * b).cwiseAbs().maxCoeff();

  auto solve_passive = [&](const std::vector<bool>& pset) {
    std::vector<int> idx;
    for (int i = 0; i < n; ++i)
      if (pset[i]) idx.push_back(i);
    Eigen::MatrixXd ap(a.rows(), idx.size());
    for (std::size_t c = 0; c < idx.size(); ++c) ap.col(c) = a.col(idx[c]);
    const Eigen::VectorXd z = ap.colPivHouseholderQr().solve(b);
    Eigen::VectorXd full = Eigen::VectorXd::Zero(n);
    for (std::size_t c = 0; c < idx.size(); ++c) full[idx[c]] = z[c];
    return full;
  };

  for (int outer = 0; outer < 3 * n + 10; ++outer) {
    const Eigen::VectorXd w = a.transpose() * (b - a * x);
    int best = -1;
    double wbest = tol;
    for (int i = 0; i < n; ++i)
      if (!passive[i] && w[i] > wbest) {
        wbest = w[i];
        best = i;
      }
    if (best < 0) break;
    passive[best] = true;
    Eigen::VectorXd z = solve_passive(passive);
    for (int inner = 0; inner < 3 * n + 10; ++inner) {
      bool ok = true;
      for (int i = 0; i < n; ++i)
        if (passive[i] && z[i] <= 0.0) ok = false;
      if (ok) break;
      double step = 1.0;
      for (int i = 0; i < n; ++i)
        if (passive[i] && z[i] <= 0.0)
          step = std::min(step, x[i] / (x[i] - z[i]));
      x += step * (z - x);
      for (int i = 0; i < n; ++i)
        if (passive[i] && x[i] <= 1e-14) {
          passive[i] = false;
          x[i] = 0.0;
        }
      z = solve_passive(passive);
    }
    x = z;
  }
  return x.cwiseMax(0.0);
}

// min ||A x - b|| subject to x >= 0 and sum(x) = 1: active-set iteration
// on the simplex face, the equality eliminated through a null-space basis.
inline Eigen::VectorXd simplex_face_ls(const Eigen::MatrixXd& a,
                                       const Eigen::VectorXd& b) {
  const int n = static_cast<int>(a.cols());
  std::vector<bool> free_var(n, true);
  Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 1.0 / n);
  const double tol = 1e-10 * (a.transpose() * b).cwiseAbs().maxCoeff();

  auto solve_face = [&]() {
    std::vector<int> idx;
    for (int i = 0; i < n; ++i)
      if (free_var[i]) idx.push_back(i);
    const int k = static_cast<int>(idx.size());
    Eigen::VectorXd full = Eigen::VectorXd::Zero(n);
    if (k == 1) {
      full[idx[0]] = 1.0;
      return full;
    }
    Eigen::MatrixXd af(a.rows(), k);
    for (int c = 0; c < k; ++c) af.col(c) = a.col(idx[c]);
    // x_f = 1/k + N z with N spanning the zero-sum subspace.
    const Eigen::MatrixXd q =
        Eigen::HouseholderQR<Eigen::MatrixXd>(
            Eigen::MatrixXd(Eigen::VectorXd::Ones(k)))
            .householderQ();
    const Eigen::MatrixXd nullb = q.rightCols(k - 1);
    const Eigen::VectorXd part = Eigen::VectorXd::Constant(k, 1.0 / k);
    const Eigen::VectorXd z =
        (af * nullb).colPivHouseholderQr().solve(b - af * part);
    const Eigen::VectorXd xf = part + nullb * z;
    for (int c = 0; c < k; ++c) full[idx[c]] = xf[c];
    return full;
  };

  for (int outer = 0; outer < 6 * n + 10; ++outer) {
    Eigen::VectorXd z = solve_face();
    // Clip along the segment from the last feasible point.
    for (int inner = 0; inner < n + 2; ++inner) {
      double step = 1.0;
      for (int i = 0; i < n; ++i)
        if (free_var[i] && z[i] < 0.0 && x[i] > z[i])
          step = std::min(step, x[i] / (x[i] - z[i]));
      if (step >= 1.0) break;
      x += step * (z - x);
      for (int i = 0; i < n; ++i)
        if (free_var[i] && x[i] <= 1e-14) {
          free_var[i] = false;
          x[i] = 0.0;
        }
      z = solve_face();
    }
    x = z.cwiseMax(0.0);
    x /= x.sum();
    // KKT: at the optimum the gradient is uniform over the free set; a
    // bound variable re-enters when it beats that level.
    const Eigen::VectorXd w = a.transpose() * (b - a * x);
    double level = 0.0;
    int nf = 0;
    for (int i = 0; i < n; ++i)
      if (free_var[i]) {
        level += w[i];
        ++nf;
      }
    level /= std::max(nf, 1);
    int enter = -1;
    double best = tol;
    for (int i = 0; i < n; ++i)
      if (!free_var[i] && w[i] - level > best) {
        best = w[i] - level;
        enter = i;
      }
    if (enter < 0) break;
    free_var[enter] = true;
  }
  return x;
}

inline Eigen::VectorXd shot_weights(const SignalTrace& tr) {
  Eigen::VectorXd w(tr.size());
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const double p = tr.values[i];
    w[static_cast<int>(i)] = double(tr.shots[i]) / (p * (1.0 - p) + 1e-6);
  }
  return w;
}

}  // namespace detail

/// Fit y(t) = offset + amplitude e^{-gamma t} cos(Omega t). The frequency
/// is seeded from the peak of the discrete spectrum of the de-meaned data.
inline FitResult fit_damped_sinusoid(const SignalTrace& trace,
                                     const FitOptions& opt = {}) {
  trace.validate();
  const int n = static_cast<int>(trace.size());
  if (n < 8)
    throw std::invalid_argument("fit_damped_sinusoid: need at least 8 points");
  Eigen::Map<const Eigen::VectorXd> t(trace.abscissa.data(), n);
  Eigen::Map<const Eigen::VectorXd> y(trace.values.data(), n);

  const double offset0 = y.mean();
  const Eigen::VectorXd yc = y.array() - offset0;
  const double amp0 = std::max(yc.cwiseAbs().maxCoeff(), 1e-12);

  // Discrete spectrum peak of the de-meaned data.
  const double span = t[n - 1] - t[0];
  double dt_min = span;
  for (int i = 1; i < n; ++i) dt_min = std::min(dt_min, t[i] - t[i - 1]);
  const double w_max = kPi / dt_min;
  const double dw = kPi / (2.0 * span);
  double omega0 = dw, pbest = -1.0;
  for (double w = dw; w <= w_max; w += dw) {
    cxd acc(0.0, 0.0);
    for (int i = 0; i < n; ++i) acc += yc[i] * std::exp(cxd(0.0, -w * t[i]));
    const double pw = std::norm(acc);
    if (pw > pbest) {
      pbest = pw;
      omega0 = w;
    }
  }

  // Envelope decay seed from first/last third amplitudes.
  const int third = std::max(1, n / 3);
  double e1 = 0.0, e2 = 0.0;
  for (int i = 0; i < third; ++i) e1 += std::abs(yc[i]);
  for (int i = n - third; i < n; ++i) e2 += std::abs(yc[i]);
  e1 /= third;
  e2 /= third;
  double gamma0 = 0.0;
  if (e1 > 1e-12 && e2 > 1e-12 && e1 > e2) {
    const double tmid = t[n - third] + 0.5 * (t[n - 1] - t[n - third]) -
                        0.5 * (t[0] + t[third - 1]);
    if (tmid > 0.0) gamma0 = std::log(e1 / e2) / tmid;
  }

  detail::GnSpec spec;
  spec.residual = [&](const Eigen::VectorXd& p) {
    Eigen::VectorXd r(n);
    for (int i = 0; i < n; ++i)
      r[i] = y[i] - (p[3] + p[2] * std::exp(-p[1] * t[i]) * std::cos(p[0] * t[i]));
    return r;
  };
  spec.jacobian = [&](const Eigen::VectorXd& p) {
    Eigen::MatrixXd j(n, 4);
    for (int i = 0; i < n; ++i) {
      const double env = std::exp(-p[1] * t[i]);
      const double c = std::cos(p[0] * t[i]);
      const double s = std::sin(p[0] * t[i]);
      j(i, 0) = p[2] * env * t[i] * s;   // -d/dOmega of model, sign folded in r
      j(i, 1) = p[2] * env * t[i] * c;
      j(i, 2) = -env * c;
      j(i, 3) = -1.0;
    }
    return j;
  };
  if (opt.use_shot_weights && trace.has_shots())
    spec.weights = detail::shot_weights(trace);
  spec.lower = Eigen::VectorXd(4);
  spec.lower << 0.0, 0.0, -std::numeric_limits<double>::infinity(),
      -std::numeric_limits<double>::infinity();

  Eigen::VectorXd p0(4);
  p0 << omega0, std::max(gamma0, 0.0), amp0, offset0;
  FitResult res = detail::damped_gauss_newton(spec, p0, opt);
  res.param_names = {"omega", "gamma", "amplitude", "offset"};
  return res;
}

/// Invert the flopping signal into populations P_0..P_nmax by constrained
/// linear least squares (P_n >= 0, sum <= 1). The sideband frequencies and
/// damping come from the drive, not the fit. Throws when the trace cannot
/// resolve adjacent sideband frequencies.
inline FitResult extract_populations(const SignalTrace& trace,
                                     const DriveParams& drive, int nmax,
                                     const FitOptions& opt = {}) {
  trace.validate();
  if (nmax < 0)
    throw std::invalid_argument("extract_populations: nmax must be >= 0");
  const int n = static_cast<int>(trace.size());
  const int d = nmax + 1;
  if (n < d + 1)
    throw std::invalid_argument("extract_populations: need more points than populations");

  Eigen::MatrixXd design(n, d);
  Eigen::VectorXd rhs(n);
  for (int i = 0; i < n; ++i) {
    const double t = trace.abscissa[i];
    for (int m = 0; m < d; ++m)
      design(i, m) = std::cos(2.0 * rabi_frequency(m, drive) * t) *
                     std::exp(-drive.gamma(m) * t);
    rhs[i] = 2.0 * (trace.values[i] - 0.5);
  }
  if (opt.use_shot_weights && trace.has_shots()) {
    const Eigen::VectorXd w = detail::shot_weights(trace).array().sqrt();
    for (int i = 0; i < n; ++i) {
      design.row(i) *= w[i];
      rhs[i] *= w[i];
    }
  }

  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(design);
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(svd.singularValues().size() - 1);
  const double cond = smax / std::max(smin, 1e-300);
  if (cond > 1e10) {
    double min_gap = std::numeric_limits<double>::infinity();
    std::vector<double> freqs(d);
    for (int m = 0; m < d; ++m) freqs[m] = 2.0 * rabi_frequency(m, drive);
    std::sort(freqs.begin(), freqs.end());
    for (int m = 1; m < d; ++m) min_gap = std::min(min_gap, freqs[m] - freqs[m - 1]);
    const double needed = min_gap > 0.0 ? 4.0 * kPi / min_gap
                                        : std::numeric_limits<double>::infinity();
    throw std::invalid_argument(
        "extract_populations: design condition " + std::to_string(cond) +
        " too poor; closest sideband pair differs by " + std::to_string(min_gap) +
        " rad/s, extend the trace to roughly T >= " + std::to_string(needed) + " s");
  }

  Eigen::VectorXd x = design.colPivHouseholderQr().solve(rhs);
  std::vector<std::string> active;
  bool bound_hit = false;
  for (int m = 0; m < d; ++m)
    if (x[m] < 0.0) bound_hit = true;
  if (bound_hit) x = detail::nnls(design, rhs);
  x = x.cwiseMax(0.0);
  bool sum_hit = false;
  if (x.sum() > 1.0) {
    x = detail::simplex_face_ls(design, rhs);
    sum_hit = true;
  }
  if (sum_hit) active.push_back("sum <= 1");
  if (bound_hit || sum_hit)
    for (int m = 0; m < d; ++m)
      if (x[m] == 0.0) active.push_back("P_" + std::to_string(m) + " >= 0");

  FitResult res;
  res.params = x;
  res.param_names.resize(d);
  for (int m = 0; m < d; ++m) res.param_names[m] = "P_" + std::to_string(m);
  res.active_constraints = std::move(active);
  res.residual_norm = (design * x - rhs).norm();
  res.converged = true;
  res.iterations = 1;
  const int dof = n - d;
  const double sigma2 = dof > 0 ? res.residual_norm * res.residual_norm / dof : 0.0;
  res.covariance = sigma2 * (design.transpose() * design)
                                .ldlt()
                                .solve(Eigen::MatrixXd::Identity(d, d));
  return res;
}

namespace detail {

// Shared scalar-parameter distribution fit: model(p) returns the
// unnormalized populations and their d/dp log-derivatives; the model is
// renormalized over the data's support.
inline FitResult fit_distribution(
    const Eigen::VectorXd& pops, double p_init, double p_lower,
    const std::string& name,
    const std::function<void(double, Eigen::VectorXd&, Eigen::VectorXd&)>& model,
    const FitOptions& opt) {
  const int n = static_cast<int>(pops.size());
  if (n < 1) throw std::invalid_argument("fit: empty populations");

  auto eval = [&](double p, Eigen::VectorXd& m, Eigen::VectorXd& dm) {
    Eigen::VectorXd u(n), g(n);
    model(p, u, g);
    const double z = u.sum();
    m = u / z;
    const double gbar = (u.array() * g.array()).sum() / z;
    dm = (m.array() * (g.array() - gbar)).matrix();
  };

  detail::GnSpec spec;
  spec.residual = [&, eval](const Eigen::VectorXd& p) {
    Eigen::VectorXd m, dm;
    eval(p[0], m, dm);
    return Eigen::VectorXd(pops - m);
  };
  spec.jacobian = [&, eval](const Eigen::VectorXd& p) {
    Eigen::VectorXd m, dm;
    eval(p[0], m, dm);
    Eigen::MatrixXd j(n, 1);
    j.col(0) = -dm;
    return j;
  };
  spec.lower = Eigen::VectorXd::Constant(1, p_lower);

  FitResult res = detail::damped_gauss_newton(
      spec, Eigen::VectorXd::Constant(1, p_init), opt);
  res.param_names = {name};
  return res;
}

}  // namespace detail

/// Geometric (thermal) law P_n prop nbar^n / (nbar+1)^(n+1).
inline FitResult fit_thermal(const Eigen::VectorXd& pops,
                             const FitOptions& opt = {}) {
  const double nbar0 = std::max(0.0, mean_n(pops));
  return detail::fit_distribution(
      pops, nbar0, 0.0, "nbar",
      [](double nb, Eigen::VectorXd& u, Eigen::VectorXd& g) {
        const int n = static_cast<int>(u.size());
        const double nbs = std::max(nb, 1e-12);
        const double ratio = nb / (nb + 1.0);
        double v = 1.0 / (nb + 1.0);
        for (int i = 0; i < n; ++i) {
          u[i] = v;
          g[i] = i / nbs - (i + 1.0) / (nb + 1.0);
          v *= ratio;
        }
      },
      opt);
}

/// Poissonian law P_n prop e^{-nbar} nbar^n / n!.
inline FitResult fit_poissonian(const Eigen::VectorXd& pops,
                                const FitOptions& opt = {}) {
  const double nbar0 = std::max(0.0, mean_n(pops));
  return detail::fit_distribution(
      pops, nbar0, 0.0, "nbar",
      [](double nb, Eigen::VectorXd& u, Eigen::VectorXd& g) {
        const int n = static_cast<int>(u.size());
        const double nbs = std::max(nb, 1e-12);
        double v = std::exp(-nb);
        for (int i = 0; i < n; ++i) {
          u[i] = v;
          g[i] = -1.0 + i / nbs;
          v *= nb / double(i + 1);
        }
      },
      opt);
}

/// Squeezed-vacuum law on even n, P_2n prop (2n)! tanh^{2n} r / (2^n n!)^2
/// with beta = e^{2r}. Returns beta.
inline FitResult fit_squeezed(const Eigen::VectorXd& pops,
                              const FitOptions& opt = {}) {
  const int n = static_cast<int>(pops.size());
  if (n < 1) throw std::invalid_argument("fit_squeezed: empty populations");
  const double p0 = std::min(1.0, std::max(pops[0], 1e-12));
  const double r0 = p0 < 1.0 ? std::acosh(1.0 / p0) : 0.0;
  const double beta0 = std::exp(2.0 * r0);

  FitResult res = detail::fit_distribution(
      pops, std::max(1.0, beta0), 1.0, "beta",
      [](double beta, Eigen::VectorXd& u, Eigen::VectorXd& g) {
        const int len = static_cast<int>(u.size());
        const double r = 0.5 * std::log(beta);
        const double th = std::max(std::tanh(r), 1e-12);
        const double sech2 = 1.0 - std::tanh(r) * std::tanh(r);
        u.setZero();
        g.setZero();
        double v = 1.0;
        for (int j = 0; 2 * j < len; ++j) {
          u[2 * j] = v;
          // d ln u_{2j} / d beta = 2j sech^2(r) / (tanh r) * dr/dbeta
          g[2 * j] = double(j) * sech2 / (th * beta);
          v *= th * th * (2.0 * j + 1.0) / (2.0 * j + 2.0);
        }
      },
      opt);
  return res;
}

/// Two-parameter fit of the cat fringe, P(phi) per cat_fringe. alpha is
/// seeded from the fringe width, the contrast from the phi = 0 depth.
inline FitResult fit_cat(const SignalTrace& trace, const FitOptions& opt = {}) {
  trace.validate();
  const int n = static_cast<int>(trace.size());
  if (n < 5) throw std::invalid_argument("fit_cat: need at least 5 points");
  Eigen::Map<const Eigen::VectorXd> phi(trace.abscissa.data(), n);
  Eigen::Map<const Eigen::VectorXd> y(trace.values.data(), n);

  FitResult degenerate;
  degenerate.param_names = {"alpha", "c"};
  degenerate.params = Eigen::VectorXd::Zero(2);
  degenerate.covariance = Eigen::MatrixXd::Zero(2, 2);
  degenerate.converged = false;

  const double ybar = y.mean();
  const double ystd = std::sqrt((y.array() - ybar).square().mean());
  // Contrast seed from the sample nearest phi = 0.
  int i0 = 0;
  for (int i = 1; i < n; ++i)
    if (std::abs(phi[i]) < std::abs(phi[i0])) i0 = i;
  const double c0 = std::min(1.0, std::max(0.0, 1.0 - 2.0 * y[i0]));
  if (ystd < 1e-12 || c0 < 1e-9) {
    degenerate.params[1] = c0;
    degenerate.residual_norm = std::sqrt((y.array() - ybar).square().sum());
    degenerate.diagnostic =
        "flat fringe: contrast ~ 0, alpha is unidentifiable";
    return degenerate;
  }

  // alpha seeds: circle mean of the overlap (exact e^{-alpha^2} for full
  // coverage), the first return of y through 1/2, and fixed fallbacks.
  std::vector<double> seeds;
  double mean_overlap = 0.0;
  for (int i = 0; i < n; ++i) mean_overlap += (1.0 - 2.0 * y[i]) / c0;
  mean_overlap /= n;
  if (mean_overlap > 1e-12 && mean_overlap < 1.0)
    seeds.push_back(std::sqrt(-std::log(mean_overlap)));
  for (int i = 0; i < n; ++i) {
    if (phi[i] > 0.0 && y[i] >= 0.5) {
      seeds.push_back(std::sqrt(kPi / (2.0 * phi[i])));
      break;
    }
  }
  seeds.insert(seeds.end(), {0.5, 1.0, 2.0, 4.0, 8.0});

  auto cost_of = [&](double a, double c) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      const double r = y[i] - cat_fringe(phi[i], a, c);
      acc += r * r;
    }
    return acc;
  };
  double alpha0 = seeds[0], cbest = cost_of(seeds[0], c0);
  for (double s : seeds) {
    const double cc = cost_of(s, c0);
    if (cc < cbest) {
      cbest = cc;
      alpha0 = s;
    }
  }

  detail::GnSpec spec;
  spec.residual = [&](const Eigen::VectorXd& p) {
    Eigen::VectorXd r(n);
    for (int i = 0; i < n; ++i) r[i] = y[i] - cat_fringe(phi[i], p[0], p[1]);
    return r;
  };
  spec.jacobian = [&](const Eigen::VectorXd& p) {
    Eigen::MatrixXd j(n, 2);
    const double a2 = p[0] * p[0];
    for (int i = 0; i < n; ++i) {
      const double cph = std::cos(phi[i]);
      const double sph = std::sin(phi[i]);
      const double env = std::exp(-a2 * (1.0 - cph));
      const double cosas = std::cos(a2 * sph);
      const double sinas = std::sin(a2 * sph);
      // model F = 1/2 (1 - c env cos(a2 sph)); residual = y - F
      const double dFdA = 0.5 * p[1] * env * ((1.0 - cph) * cosas + sph * sinas);
      j(i, 0) = -dFdA * 2.0 * p[0];
      j(i, 1) = 0.5 * env * cosas;
    }
    return j;
  };
  if (opt.use_shot_weights && trace.has_shots())
    spec.weights = detail::shot_weights(trace);
  spec.lower = Eigen::VectorXd(2);
  spec.lower << 0.0, 0.0;
  spec.upper = Eigen::VectorXd(2);
  spec.upper << std::numeric_limits<double>::infinity(), 1.0;

  Eigen::VectorXd p0(2);
  p0 << alpha0, c0;
  FitResult res = detail::damped_gauss_newton(spec, p0, opt);
  res.param_names = {"alpha", "c"};
  if (res.params[1] < 1e-9) {
    res.converged = false;
    res.diagnostic = "fitted contrast ~ 0: alpha is unidentifiable";
  }
  return res;
}

}  // namespace motional
