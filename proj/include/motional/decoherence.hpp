#pragma once

// Monte Carlo dephasing of a superposition of two coherent states under a
// white-noise uniform force, R(tau) = C delta(tau). Each trajectory draws
// independent Gaussian segment values with variance C/dt and accumulates
//
//   Dtheta(t) = Re[ Dalpha conj( Int_0^t f e^{i w t'} dt' ) ],
//
// the phase-difference quadrature; the double-integral part of theta is
// common to both labels and drops out. Both labels move by the same
// increment, so Dalpha = alpha_1 - alpha_2 is conserved identically.
//
// Asymptotics checked against the ensemble (w t >> 1):
//   <Dtheta^2>           -> C |Dalpha|^2 t / 2
//   <|alpha(t)-alpha(0)|^2> -> C t
//   <e^{i Dtheta}>       -> exp(-C |Dalpha|^2 t / 4)
//
// Draws are counter-based on (seed, trajectory, step); reduction is
// chunked in a fixed order, so results are identical for any thread count.

#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <thread>
#include <vector>

#include "motional/common.hpp"
#include "motional/forced.hpp"
#include "motional/rng.hpp"

namespace motional {

struct NoiseConfig {
  double noise_strength_c = 0.0;  // C in R(tau) = C delta(tau), rad^2/s
  double dt = 0.0;                // step (s)
  int steps = 0;
  int trajectories = 0;
  std::uint64_t seed = 0;
  cxd delta_alpha{0.0, 0.0};  // alpha_1 - alpha_2, conserved
  double omega_x = 0.0;       // rad/s
  int store_every = 1;        // record every k-th step (plus t = 0)

  void validate() const {
    if (noise_strength_c < 0.0)
      throw std::domain_error("NoiseConfig: noise strength must be >= 0");
    if (dt <= 0.0 || omega_x <= 0.0)
      throw std::domain_error("NoiseConfig: dt and omega_x must be > 0");
    if (dt * omega_x >= 0.1)
      throw std::domain_error(
          "NoiseConfig: dt * omega_x must be < 0.1 to resolve the oscillation");
    if (steps < 1) throw std::domain_error("NoiseConfig: steps must be >= 1");
    if (trajectories < 1)
      throw std::domain_error("NoiseConfig: trajectories must be >= 1");
    if (store_every < 1)
      throw std::domain_error("NoiseConfig: store_every must be >= 1");
  }
};

/// One realization of the discretized white-noise force: per-step
/// independent Gaussians with variance C/dt, keyed by (seed, trajectory).
inline ForceProfile sample_force(const NoiseConfig& cfg, int trajectory_index) {
  cfg.validate();
  const double sd = std::sqrt(cfg.noise_strength_c / cfg.dt);
  std::vector<double> breaks(cfg.steps + 1);
  std::vector<double> vals(cfg.steps);
  for (int k = 0; k <= cfg.steps; ++k) breaks[k] = k * cfg.dt;
  for (int k = 0; k < cfg.steps; ++k)
    vals[k] = sd * rng::normal(cfg.seed, static_cast<std::uint64_t>(trajectory_index),
                               static_cast<std::uint64_t>(k));
  return ForceProfile::table(std::move(breaks), std::move(vals));
}

namespace detail {

// Walk one trajectory, invoking visit(sample_index, quadrature) at t = 0
// and after every store_every-th step. Identical draws to sample_force.
template <class Visitor>
inline void scan_trajectory(const NoiseConfig& cfg, int traj, Visitor&& visit) {
  ForcedQuadrature q(cfg.omega_x);
  const double sd = std::sqrt(cfg.noise_strength_c / cfg.dt);
  int si = 0;
  visit(si++, q);
  for (int k = 0; k < cfg.steps; ++k) {
    const double v =
        sd * rng::normal(cfg.seed, static_cast<std::uint64_t>(traj),
                         static_cast<std::uint64_t>(k));
    q.add_segment(v, k * cfg.dt, (k + 1) * cfg.dt);
    if ((k + 1) % cfg.store_every == 0 || k + 1 == cfg.steps) visit(si++, q);
  }
}

inline std::vector<double> sample_times(const NoiseConfig& cfg) {
  std::vector<double> t;
  t.push_back(0.0);
  for (int k = 0; k < cfg.steps; ++k)
    if ((k + 1) % cfg.store_every == 0 || k + 1 == cfg.steps)
      t.push_back((k + 1) * cfg.dt);
  return t;
}

}  // namespace detail

// Per-time record of one trajectory. The labels start at +-Dalpha/2 and
// move together; alpha1 - alpha2 stays Dalpha by construction.
struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<double> dtheta;
  std::vector<cxd> alpha1;
  std::vector<cxd> alpha2;
};

inline TrajectoryRecord run_trajectory(const NoiseConfig& cfg, int index) {
  cfg.validate();
  TrajectoryRecord rec;
  rec.times = detail::sample_times(cfg);
  rec.dtheta.reserve(rec.times.size());
  rec.alpha1.reserve(rec.times.size());
  rec.alpha2.reserve(rec.times.size());
  const cxd a10 = 0.5 * cfg.delta_alpha;
  const cxd a20 = -0.5 * cfg.delta_alpha;
  detail::scan_trajectory(cfg, index, [&](int, const detail::ForcedQuadrature& q) {
    const cxd move = cxd(0.0, 1.0) * q.iplus;
    rec.dtheta.push_back((cfg.delta_alpha * std::conj(q.iplus)).real());
    rec.alpha1.push_back(a10 + move);
    rec.alpha2.push_back(a20 + move);
  });
  return rec;
}

struct EnsembleStats {
  std::vector<double> times;
  std::vector<double> mean_dtheta_sq;
  std::vector<double> se_dtheta_sq;
  std::vector<cxd> mean_phase_factor;  // <e^{i Dtheta}>
  std::vector<double> se_phase;
  std::vector<double> mean_amp_diffusion;  // <|alpha(t)-alpha(0)|^2>
  std::vector<double> se_amp;
  int trajectories = 0;
};

inline EnsembleStats ensemble_stats(const NoiseConfig& cfg, int threads = 1) {
  cfg.validate();
  const std::vector<double> times = detail::sample_times(cfg);
  const std::size_t ns = times.size();

  struct Partial {
    std::vector<double> th2, th4, re, im, re2, im2, amp, amp2;
    void init(std::size_t n) {
      th2.assign(n, 0.0); th4.assign(n, 0.0);
      re.assign(n, 0.0); im.assign(n, 0.0);
      re2.assign(n, 0.0); im2.assign(n, 0.0);
      amp.assign(n, 0.0); amp2.assign(n, 0.0);
    }
  };

  constexpr int kChunk = 64;  // fixed, so the reduction order never changes
  const int nchunks = (cfg.trajectories + kChunk - 1) / kChunk;
  std::vector<Partial> partials(nchunks);

  auto run_chunk = [&](int c) {
    Partial& p = partials[c];
    p.init(ns);
    const int lo = c * kChunk;
    const int hi = std::min(cfg.trajectories, lo + kChunk);
    for (int traj = lo; traj < hi; ++traj) {
      detail::scan_trajectory(cfg, traj, [&](int si, const detail::ForcedQuadrature& q) {
        const double th = (cfg.delta_alpha * std::conj(q.iplus)).real();
        const double a2 = std::norm(q.iplus);
        p.th2[si] += th * th;
        p.th4[si] += th * th * th * th;
        p.re[si] += std::cos(th);
        p.im[si] += std::sin(th);
        p.re2[si] += std::cos(th) * std::cos(th);
        p.im2[si] += std::sin(th) * std::sin(th);
        p.amp[si] += a2;
        p.amp2[si] += a2 * a2;
      });
    }
  };

  if (threads <= 1 || nchunks == 1) {
    for (int c = 0; c < nchunks; ++c) run_chunk(c);
  } else {
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    const int nw = std::min(threads, nchunks);
    for (int w = 0; w < nw; ++w) {
      pool.emplace_back([&]() {
        for (int c = next.fetch_add(1); c < nchunks; c = next.fetch_add(1))
          run_chunk(c);
      });
    }
    for (auto& th : pool) th.join();
  }

  Partial total;
  total.init(ns);
  for (const Partial& p : partials) {  // fixed combine order
    for (std::size_t i = 0; i < ns; ++i) {
      total.th2[i] += p.th2[i]; total.th4[i] += p.th4[i];
      total.re[i] += p.re[i]; total.im[i] += p.im[i];
      total.re2[i] += p.re2[i]; total.im2[i] += p.im2[i];
      total.amp[i] += p.amp[i]; total.amp2[i] += p.amp2[i];
    }
  }

  const double n = double(cfg.trajectories);
  EnsembleStats out;
  out.times = times;
  out.trajectories = cfg.trajectories;
  out.mean_dtheta_sq.resize(ns);
  out.se_dtheta_sq.resize(ns);
  out.mean_phase_factor.resize(ns);
  out.se_phase.resize(ns);
  out.mean_amp_diffusion.resize(ns);
  out.se_amp.resize(ns);
  auto se_of = [n](double sum, double sumsq) {
    const double mean = sum / n;
    const double var = std::max(0.0, sumsq / n - mean * mean);
    return std::sqrt(var / n);
  };
  for (std::size_t i = 0; i < ns; ++i) {
    out.mean_dtheta_sq[i] = total.th2[i] / n;
    out.se_dtheta_sq[i] = se_of(total.th2[i], total.th4[i]);
    out.mean_phase_factor[i] = cxd(total.re[i] / n, total.im[i] / n);
    const double var_re =
        std::max(0.0, total.re2[i] / n - (total.re[i] / n) * (total.re[i] / n));
    const double var_im =
        std::max(0.0, total.im2[i] / n - (total.im[i] / n) * (total.im[i] / n));
    out.se_phase[i] = std::sqrt((var_re + var_im) / n);
    out.mean_amp_diffusion[i] = total.amp[i] / n;
    out.se_amp[i] = se_of(total.amp[i], total.amp2[i]);
  }
  return out;
}

/// Time for the rms phase difference to reach ~1 rad: 2 / (C |Dalpha|^2).
inline double decoherence_time(double noise_strength_c, cxd delta_alpha) {
  if (noise_strength_c <= 0.0)
    throw std::domain_error("decoherence_time: C must be > 0");
  const double da2 = std::norm(delta_alpha);
  if (da2 <= 0.0)
    throw std::domain_error("decoherence_time: delta_alpha must be nonzero");
  return 2.0 / (noise_strength_c * da2);
}

// Decay factor of the off-diagonal element |alpha_2><alpha_1| at the
// requested times (mapped to the nearest step), with per-time Gaussianity
// z-scores of the Dtheta samples backing the Gaussian-phase assumption.
struct OffdiagDecay {
  std::vector<double> times;
  std::vector<cxd> phase_factor;
  std::vector<double> se;
  std::vector<double> skew_z;
  std::vector<double> kurtosis_z;
};

inline OffdiagDecay offdiag_decay(const NoiseConfig& cfg,
                                  const std::vector<double>& times) {
  cfg.validate();
  if (std::abs(cfg.delta_alpha) < 1.0)
    detail::warn("offdiag_decay: |delta_alpha| < 1; the phase-dominated "
                 "decay model assumes |delta_alpha| >> 1");
  std::vector<int> steps(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    int k = int(std::llround(times[i] / cfg.dt));
    steps[i] = std::min(std::max(k, 0), cfg.steps);
  }

  const std::size_t ns = times.size();
  std::vector<double> s1(ns, 0.0), s2(ns, 0.0), s3(ns, 0.0), s4(ns, 0.0),
      re(ns, 0.0), im(ns, 0.0), re2(ns, 0.0), im2(ns, 0.0);

  for (int traj = 0; traj < cfg.trajectories; ++traj) {
    detail::ForcedQuadrature q(cfg.omega_x);
    const double sd = std::sqrt(cfg.noise_strength_c / cfg.dt);
    int k = 0;
    auto record = [&](std::size_t i) {
      const double th = (cfg.delta_alpha * std::conj(q.iplus)).real();
      s1[i] += th; s2[i] += th * th; s3[i] += th * th * th;
      s4[i] += th * th * th * th;
      re[i] += std::cos(th); im[i] += std::sin(th);
      re2[i] += std::cos(th) * std::cos(th);
      im2[i] += std::sin(th) * std::sin(th);
    };
    // times need not be sorted: visit steps in order, record all matches
    for (int target = 0; target <= cfg.steps; ++target) {
      for (; k < target; ++k) {
        const double v =
            sd * rng::normal(cfg.seed, static_cast<std::uint64_t>(traj),
                             static_cast<std::uint64_t>(k));
        q.add_segment(v, k * cfg.dt, (k + 1) * cfg.dt);
      }
      for (std::size_t i = 0; i < ns; ++i)
        if (steps[i] == target) record(i);
    }
  }

  const double n = double(cfg.trajectories);
  OffdiagDecay out;
  out.times = times;
  out.phase_factor.resize(ns);
  out.se.resize(ns);
  out.skew_z.resize(ns);
  out.kurtosis_z.resize(ns);
  for (std::size_t i = 0; i < ns; ++i) {
    out.phase_factor[i] = cxd(re[i] / n, im[i] / n);
    const double var_re = std::max(0.0, re2[i] / n - (re[i] / n) * (re[i] / n));
    const double var_im = std::max(0.0, im2[i] / n - (im[i] / n) * (im[i] / n));
    out.se[i] = std::sqrt((var_re + var_im) / n);
    const double mean = s1[i] / n;
    const double var = s2[i] / n - mean * mean;
    if (var < 1e-30) {  // degenerate sample (e.g. t = 0): no test to run
      out.skew_z[i] = 0.0;
      out.kurtosis_z[i] = 0.0;
      continue;
    }
    const double m3 = s3[i] / n - 3.0 * mean * s2[i] / n + 2.0 * mean * mean * mean;
    const double m4 = s4[i] / n - 4.0 * mean * s3[i] / n +
                      6.0 * mean * mean * s2[i] / n - 3.0 * mean * mean * mean * mean;
    const double skew = m3 / std::pow(var, 1.5);
    const double exkurt = m4 / (var * var) - 3.0;
    out.skew_z[i] = skew / std::sqrt(6.0 / n);
    out.kurtosis_z[i] = exkurt / std::sqrt(24.0 / n);
  }
  return out;
}

}  // namespace motional
