#pragma once

// Exact propagator for a coherent state driven by a spatially uniform
// time-dependent force, in the interaction picture:
//
//   |Psi(t)> = e^{i theta(t)} |alpha(t)>,
//   alpha(t) = alpha(0) + i Int_0^t f(t') e^{i w t'} dt',
//   theta(t) = theta(0) + Re alpha(0) Int f cos(w t')
//                       + Im alpha(0) Int f sin(w t')
//                       + Int_0^t dt' f(t') Int_0^t' dt'' f(t'') sin(w (t'-t'')),
//
// with f(t) = x0 F(t) / hbar stored directly in rad/s so no mass or charge
// enters here. Constant and piecewise-constant profiles integrate in
// closed form segment by segment; the sinusoid's double integral uses
// adaptive Gauss-Kronrod quadrature on top of closed-form inner integrals.
// A 4th-order integrator of the truncated Schroedinger equation serves as
// the independent oracle.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "motional/common.hpp"
#include "motional/fock.hpp"

namespace motional {

struct CoherentLabel {
  cxd alpha{0.0, 0.0};
  double theta = 0.0;
};

/// Wrap an angle to (-pi, pi].
inline double wrap_angle(double theta) {
  double w = std::remainder(theta, 2.0 * kPi);
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

struct ForceProfile {
  enum class Kind { Constant, Sinusoid, Table };

  Kind kind = Kind::Constant;
  double value = 0.0;      // Constant
  double amplitude = 0.0;  // Sinusoid
  double frequency = 0.0;  // Sinusoid (rad/s)
  double phase = 0.0;      // Sinusoid
  std::vector<double> breakpoints;  // Table, strictly increasing, size k+1
  std::vector<double> values;       // Table, size k

  static ForceProfile constant(double f0) {
    ForceProfile p;
    p.kind = Kind::Constant;
    p.value = f0;
    return p;
  }

  static ForceProfile sinusoid(double amplitude, double frequency,
                               double phase = 0.0) {
    ForceProfile p;
    p.kind = Kind::Sinusoid;
    p.amplitude = amplitude;
    p.frequency = frequency;
    p.phase = phase;
    return p;
  }

  static ForceProfile table(std::vector<double> breakpoints,
                            std::vector<double> values) {
    if (breakpoints.size() < 2 || values.size() + 1 != breakpoints.size())
      throw std::invalid_argument(
          "ForceProfile::table: need k+1 breakpoints for k values");
    for (std::size_t i = 1; i < breakpoints.size(); ++i)
      if (!(breakpoints[i] > breakpoints[i - 1]))
        throw std::invalid_argument(
            "ForceProfile::table: breakpoints must be strictly increasing");
    ForceProfile p;
    p.kind = Kind::Table;
    p.breakpoints = std::move(breakpoints);
    p.values = std::move(values);
    return p;
  }

  // Pointwise value; tables are zero outside their breakpoint range.
  double operator()(double t) const {
    switch (kind) {
      case Kind::Constant:
        return value;
      case Kind::Sinusoid:
        return amplitude * std::cos(frequency * t + phase);
      case Kind::Table: {
        if (t < breakpoints.front() || t >= breakpoints.back()) return 0.0;
        const auto it =
            std::upper_bound(breakpoints.begin(), breakpoints.end(), t);
        return values[static_cast<std::size_t>(it - breakpoints.begin()) - 1];
      }
    }
    return 0.0;
  }
};

namespace detail {

// Int_a^b e^{i k s} ds, stable near k (b-a) = 0.
inline cxd cis_integral(double k, double a, double b) {
  const double tau = b - a;
  const double kt = k * tau;
  if (std::abs(kt) < 1e-6) {
    const cxd ea = std::exp(cxd(0.0, k * a));
    return ea * tau * cxd(1.0 - kt * kt / 6.0, 0.5 * kt);
  }
  return (std::exp(cxd(0.0, k * b)) - std::exp(cxd(0.0, k * a))) / cxd(0.0, k);
}

// tau - sin(w tau)/w, stable near w tau = 0.
inline double tau_minus_sinc(double w, double tau) {
  const double wt = w * tau;
  if (std::abs(wt) < 1e-4) {
    return wt * wt * tau / 6.0 * (1.0 - wt * wt / 20.0);
  }
  return tau - std::sin(wt) / w;
}

// Running quadratures of a piecewise-constant force against the e^{iwt}
// kernels, plus the theta double integral, advanced one segment at a time
// in closed form.
struct ForcedQuadrature {
  double omega;
  double cc = 0.0;   // Int f cos(w s)
  double ss = 0.0;   // Int f sin(w s)
  double dbl = 0.0;  // Int Int f f sin(w (s'-s''))
  cxd iplus{0.0, 0.0};

  explicit ForcedQuadrature(double w) : omega(w) {}

  void add_segment(double v, double a, double b) {
    const cxd seg = cis_integral(omega, a, b);
    dbl += v * cc * seg.imag() - v * ss * seg.real() +
           v * v / omega * tau_minus_sinc(omega, b - a);
    cc += v * seg.real();
    ss += v * seg.imag();
    iplus += v * seg;
  }
};

// Adaptive Gauss-Kronrod (G7, K15) quadrature.
inline void gk15(const std::function<double(double)>& f, double a, double b,
                 double& result, double& err) {
  static const double xk[8] = {0.0,
                               0.2077849550078985,
                               0.4058451513773972,
                               0.5860872354676911,
                               0.7415311855993944,
                               0.8648644233597691,
                               0.9491079123427585,
                               0.9914553711208126};
  static const double wk[8] = {0.2094821410847278, 0.2044329400752989,
                               0.1903505780647854, 0.1690047266392679,
                               0.1406532597155259, 0.1047900103222502,
                               0.0630920926299786, 0.0229353220105292};
  static const double wg[4] = {0.4179591836734694, 0.3818300505051189,
                               0.2797053914892767, 0.1294849661688697};
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double f0 = f(c);
  double resk = wk[0] * f0;
  double resg = wg[0] * f0;
  for (int j = 1; j < 8; ++j) {
    const double fv = f(c - h * xk[j]) + f(c + h * xk[j]);
    resk += wk[j] * fv;
    if (j % 2 == 0) resg += wg[j / 2] * fv;
  }
  result = resk * h;
  err = std::abs((resk - resg) * h);
}

inline double adaptive_quadrature(const std::function<double(double)>& f,
                                  double a, double b, double tol,
                                  int depth = 0) {
  double result, err;
  gk15(f, a, b, result, err);
  if (err <= tol || depth >= 48) return result;
  const double c = 0.5 * (a + b);
  return adaptive_quadrature(f, a, c, 0.5 * tol, depth + 1) +
         adaptive_quadrature(f, c, b, 0.5 * tol, depth + 1);
}

// Closed-form running integrals Int_0^tau f cos(w s) ds and the sine
// counterpart for the analytic profiles.
inline cxd iplus_closed(const ForceProfile& p, double tau, double omega) {
  switch (p.kind) {
    case ForceProfile::Kind::Constant:
      return p.value * cis_integral(omega, 0.0, tau);
    case ForceProfile::Kind::Sinusoid: {
      const cxd ep = std::exp(cxd(0.0, p.phase));
      return 0.5 * p.amplitude *
             (ep * cis_integral(omega + p.frequency, 0.0, tau) +
              std::conj(ep) * cis_integral(omega - p.frequency, 0.0, tau));
    }
    case ForceProfile::Kind::Table: {
      ForcedQuadrature q(omega);
      for (std::size_t k = 0; k < p.values.size(); ++k) {
        const double a = p.breakpoints[k];
        if (a >= tau) break;
        const double b = std::min(p.breakpoints[k + 1], tau);
        q.add_segment(p.values[k], a, b);
      }
      return q.iplus;
    }
  }
  return cxd(0.0, 0.0);
}

inline double double_integral(const ForceProfile& p, double t, double omega) {
  switch (p.kind) {
    case ForceProfile::Kind::Constant: {
      ForcedQuadrature q(omega);
      q.add_segment(p.value, 0.0, t);
      return q.dbl;
    }
    case ForceProfile::Kind::Table: {
      ForcedQuadrature q(omega);
      for (std::size_t k = 0; k < p.values.size(); ++k) {
        const double a = p.breakpoints[k];
        if (a >= t) break;
        const double b = std::min(p.breakpoints[k + 1], t);
        q.add_segment(p.values[k], a, b);
      }
      return q.dbl;
    }
    case ForceProfile::Kind::Sinusoid: {
      const auto outer = [&](double s) {
        const cxd ip = iplus_closed(p, s, omega);
        return p(s) * (std::sin(omega * s) * ip.real() -
                       std::cos(omega * s) * ip.imag());
      };
      const double scale =
          std::max(1.0, std::abs(p.amplitude) * std::abs(p.amplitude) * t);
      return adaptive_quadrature(outer, 0.0, t, 1e-12 * scale);
    }
  }
  return 0.0;
}

}  // namespace detail

/// alpha(t) = alpha(0) + i Int_0^t f e^{i w t'} dt'. The increment is
/// independent of alpha(0), so label differences are conserved exactly.
inline cxd alpha_of_t(cxd alpha0, const ForceProfile& force, double t,
                      double omega_x) {
  if (t < 0.0) throw std::domain_error("alpha_of_t: t must be >= 0");
  if (omega_x <= 0.0) throw std::domain_error("alpha_of_t: omega_x must be > 0");
  return alpha0 + cxd(0.0, 1.0) * detail::iplus_closed(force, t, omega_x);
}

/// theta(t) from the three single integrals plus the double integral.
/// Returned unwrapped; propagate_label wraps.
inline double theta_of_t(const CoherentLabel& label0, const ForceProfile& force,
                         double t, double omega_x) {
  if (t < 0.0) throw std::domain_error("theta_of_t: t must be >= 0");
  if (omega_x <= 0.0) throw std::domain_error("theta_of_t: omega_x must be > 0");
  const cxd ip = detail::iplus_closed(force, t, omega_x);
  return label0.theta + label0.alpha.real() * ip.real() +
         label0.alpha.imag() * ip.imag() +
         detail::double_integral(force, t, omega_x);
}

inline CoherentLabel propagate_label(const CoherentLabel& label0,
                                     const ForceProfile& force, double t,
                                     double omega_x) {
  CoherentLabel out;
  out.alpha = alpha_of_t(label0.alpha, force, t, omega_x);
  out.theta = wrap_angle(theta_of_t(label0, force, t, omega_x));
  return out;
}

namespace detail {

inline void schrodinger_rhs(const Eigen::VectorXcd& psi, double f, double t,
                            double omega, Eigen::VectorXcd& out) {
  const int dim = static_cast<int>(psi.size());
  const cxd em = std::exp(cxd(0.0, -omega * t));
  const cxd ep = std::conj(em);
  for (int n = 0; n < dim; ++n) {
    cxd v(0.0, 0.0);
    if (n + 1 < dim) v += em * std::sqrt(double(n + 1)) * psi[n + 1];
    if (n > 0) v += ep * std::sqrt(double(n)) * psi[n - 1];
    out[n] = cxd(0.0, f) * v;
  }
}

// Classic RK4 across [a, b] in nsub equal steps; f_of must be smooth on
// the interval (callers split piecewise profiles at their breakpoints).
inline void rk4_span(Eigen::VectorXcd& psi, double a, double b, int nsub,
                     double omega,
                     const std::function<double(double)>& f_of) {
  const int dim = static_cast<int>(psi.size());
  Eigen::VectorXcd k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
  const double h = (b - a) / nsub;
  for (int i = 0; i < nsub; ++i) {
    const double t = a + i * h;
    schrodinger_rhs(psi, f_of(t), t, omega, k1);
    tmp = psi + 0.5 * h * k1;
    schrodinger_rhs(tmp, f_of(t + 0.5 * h), t + 0.5 * h, omega, k2);
    tmp = psi + 0.5 * h * k2;
    schrodinger_rhs(tmp, f_of(t + 0.5 * h), t + 0.5 * h, omega, k3);
    tmp = psi + h * k3;
    schrodinger_rhs(tmp, f_of(t + h), t + h, omega, k4);
    psi += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
}

}  // namespace detail

/// Direct 4th-order integration of the interaction-picture Schroedinger
/// equation d|Psi>/dt = i f(t) (a e^{-iwt} + a^dag e^{iwt}) |Psi> on the
/// truncated basis. Steps are aligned to table breakpoints so the force
/// is smooth within every RK4 step. Norm drift beyond norm_tol raises a
/// step-size error.
inline StateVector numeric_propagate(const StateVector& psi0,
                                     const ForceProfile& force, double t,
                                     double dt, double omega_x,
                                     double norm_tol = 1e-9) {
  if (t < 0.0) throw std::domain_error("numeric_propagate: t must be >= 0");
  if (dt <= 0.0) throw std::domain_error("numeric_propagate: dt must be > 0");
  if (omega_x <= 0.0)
    throw std::domain_error("numeric_propagate: omega_x must be > 0");
  Eigen::VectorXcd psi = psi0.amplitudes;

  if (force.kind == ForceProfile::Kind::Table) {
    // Smooth spans: [0, first breakpoint), each table segment, trailing 0.
    std::vector<double> edges;
    edges.push_back(0.0);
    for (double bp : force.breakpoints)
      if (bp > 0.0 && bp < t) edges.push_back(bp);
    edges.push_back(t);
    for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
      const double a = edges[k], b = edges[k + 1];
      if (b <= a) continue;
      const double v = force(0.5 * (a + b));
      const int nsub = std::max(1, int(std::ceil((b - a) / dt)));
      detail::rk4_span(psi, a, b, nsub, omega_x,
                       [v](double) { return v; });
    }
  } else {
    const int nsub = std::max(1, int(std::ceil(t / dt)));
    detail::rk4_span(psi, 0.0, t, nsub, omega_x,
                     [&force](double s) { return force(s); });
  }

  const double drift = std::abs(psi.norm() - psi0.amplitudes.norm());
  if (drift > norm_tol)
    throw NumericError("numeric_propagate: norm drift " +
                       std::to_string(drift) + " exceeds tolerance " +
                       std::to_string(norm_tol) + "; reduce dt");
  return StateVector{psi};
}

}  // namespace motional
