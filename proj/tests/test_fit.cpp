#include <catch2/catch_amalgamated.hpp>

#include "motional/fit.hpp"

#include "helpers.hpp"

using namespace motional;
using Catch::Approx;

namespace {

SignalTrace damped_cosine_trace(double omega, double gamma, double amp,
                                double offset, double tmax, int n) {
  SignalTrace tr;
  for (int i = 0; i < n; ++i) {
    const double t = tmax * i / (n - 1.0);
    tr.abscissa.push_back(t);
    tr.values.push_back(offset + amp * std::exp(-gamma * t) * std::cos(omega * t));
  }
  return tr;
}

SignalTrace cat_trace(double alpha, double c, int n) {
  SignalTrace tr;
  for (int i = 0; i < n; ++i) {
    const double phi = 2.0 * kPi * i / n;
    tr.abscissa.push_back(phi);
    tr.values.push_back(cat_fringe(phi, alpha, c));
  }
  return tr;
}

// Central finite-difference check of an analytic jacobian column.
template <class Residual, class Jacobian>
void check_jacobian(Residual res, Jacobian jac, Eigen::VectorXd p, double tol) {
  const Eigen::MatrixXd j = jac(p);
  for (int c = 0; c < p.size(); ++c) {
    const double h = 1e-6 * std::max(1.0, std::abs(p[c]));
    Eigen::VectorXd pp = p, pm = p;
    pp[c] += h;
    pm[c] -= h;
    const Eigen::VectorXd fd = (res(pp) - res(pm)) / (2.0 * h);
    const double scale = std::max(1.0, j.col(c).norm());
    REQUIRE((j.col(c) - fd).norm() / scale < tol);
  }
}

}  // namespace

TEST_CASE("fit_damped_sinusoid") {
  SECTION("noiseless round trip to 1e-8 relative") {
    const SignalTrace tr = damped_cosine_trace(2.7, 0.08, 0.5, 0.5, 25.0, 300);
    const FitResult r = fit_damped_sinusoid(tr);
    REQUIRE(r.converged);
    REQUIRE(r.param("omega") == Approx(2.7).epsilon(1e-8));
    REQUIRE(r.param("gamma") == Approx(0.08).epsilon(1e-8));
    REQUIRE(r.param("amplitude") == Approx(0.5).epsilon(1e-8));
    REQUIRE(r.param("offset") == Approx(0.5).epsilon(1e-8));
    REQUIRE(r.residual_norm < 1e-10);
  }

  SECTION("pure cosine fits gamma below 1e-8") {
    const SignalTrace tr = damped_cosine_trace(1.9, 0.0, 0.5, 0.5, 30.0, 240);
    const FitResult r = fit_damped_sinusoid(tr);
    REQUIRE(r.converged);
    REQUIRE(r.param("gamma") < 1e-8);
  }

  SECTION("1% noise, 200 points: omega within 0.5% (median of seeds)") {
    std::vector<double> errs;
    for (std::uint64_t seed = 0; seed < 9; ++seed) {
      SignalTrace tr = damped_cosine_trace(2.2, 0.05, 0.45, 0.5, 30.0, 200);
      for (std::size_t i = 0; i < tr.size(); ++i)
        tr.values[i] = std::min(1.0, std::max(0.0, tr.values[i] +
                                0.01 * rng::normal(seed, 1, i)));
      const FitResult r = fit_damped_sinusoid(tr);
      REQUIRE(r.converged);
      errs.push_back(std::abs(r.param("omega") - 2.2) / 2.2);
    }
    std::sort(errs.begin(), errs.end());
    REQUIRE(errs[errs.size() / 2] < 0.005);
  }

  SECTION("covariance is symmetric PSD") {
    const SignalTrace tr = damped_cosine_trace(2.0, 0.1, 0.5, 0.5, 20.0, 100);
    const FitResult r = fit_damped_sinusoid(tr);
    REQUIRE((r.covariance - r.covariance.transpose()).cwiseAbs().maxCoeff() <
            1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r.covariance);
    REQUIRE(es.eigenvalues().minCoeff() >= -1e-12);
  }

  REQUIRE_THROWS_AS(fit_damped_sinusoid(damped_cosine_trace(1, 0, .4, .5, 3, 4)),
                    std::invalid_argument);
}

TEST_CASE("extract_populations") {
  const DriveParams drive{1.0, 0.202, 0.01, 0.7};

  SECTION("ground state trace returns P_0 = 1") {
    Eigen::VectorXd pops = Eigen::VectorXd::Zero(6);
    pops[0] = 1.0;
    const SignalTrace tr = make_flopping_trace(pops, drive, 40.0, 400);
    const FitResult r = extract_populations(tr, drive, 5);
    REQUIRE(r.param("P_0") == Approx(1.0).margin(1e-9));
    for (int n = 1; n <= 5; ++n)
      REQUIRE(r.param("P_" + std::to_string(n)) == Approx(0.0).margin(1e-9));
  }

  SECTION("thermal nbar = 1.3 noiseless round trip") {
    const Eigen::VectorXd pops = populations(make_thermal(1.3, 32));
    const SignalTrace tr = make_flopping_trace(pops, drive, 120.0, 1500);
    const FitResult r = extract_populations(tr, drive, 31);
    for (int n = 0; n < 32; ++n)
      REQUIRE(r.params[n] == Approx(pops[n]).margin(1e-6));
    REQUIRE(fit_thermal(r.params).param("nbar") == Approx(1.3).epsilon(1e-6));
  }

  SECTION("constraints hold exactly under shot noise") {
    const Eigen::VectorXd pops = populations(make_coherent(std::sqrt(2.0), 24));
    SignalTrace tr = make_flopping_trace(pops, drive, 60.0, 600);
    tr = simulate_detection(tr, 500, 4);
    const FitResult r = extract_populations(tr, drive, 23);
    REQUIRE(r.params.minCoeff() >= 0.0);
    REQUIRE(r.params.sum() <= 1.0 + 1e-12);
  }

  SECTION("coherent nbar = 3.1 with 1e3 shots lands within 0.1") {
    const Eigen::VectorXd pops = populations(make_coherent(std::sqrt(3.1), 24));
    SignalTrace tr = make_flopping_trace(pops, drive, 80.0, 800);
    tr = simulate_detection(tr, 1000, 9);
    const FitResult r = extract_populations(tr, drive, 23);
    const FitResult pf = fit_poissonian(r.params);
    REQUIRE(pf.param("nbar") == Approx(3.1).margin(0.1));
  }

  SECTION("too-short trace raises a conditioning error with a duration hint") {
    const Eigen::VectorXd pops = populations(make_thermal(1.3, 32));
    const SignalTrace tr = make_flopping_trace(pops, drive, 1.0, 64);
    REQUIRE_THROWS_WITH(extract_populations(tr, drive, 31),
                        Catch::Matchers::ContainsSubstring("extend the trace"));
  }
}

TEST_CASE("fit_thermal") {
  SECTION("exact geometric input at nbar = 1.5") {
    const Eigen::VectorXd pops = populations(make_thermal(1.5, 64));
    const FitResult r = fit_thermal(pops);
    REQUIRE(r.converged);
    REQUIRE(r.param("nbar") == Approx(1.5).margin(1e-10));
  }

  SECTION("delta at n = 0 gives nbar = 0") {
    Eigen::VectorXd pops = Eigen::VectorXd::Zero(8);
    pops[0] = 1.0;
    REQUIRE(fit_thermal(pops).param("nbar") == Approx(0.0).margin(1e-12));
  }

  SECTION("estimate responds continuously to a perturbation") {
    const Eigen::VectorXd pops = populations(make_thermal(0.9, 32));
    const double base = fit_thermal(pops).param("nbar");
    double prev = base;
    for (double eps : {1e-4, 2e-4, 3e-4}) {
      Eigen::VectorXd p = pops;
      p[1] += eps;
      p /= p.sum();
      const double nb = fit_thermal(p).param("nbar");
      REQUIRE(std::abs(nb - base) < 0.05);
      REQUIRE(nb != prev);
      prev = nb;
    }
  }
}

TEST_CASE("fit_poissonian") {
  SECTION("exact Poissonian at nbar = 2.9") {
    const Eigen::VectorXd pops = populations(make_coherent(std::sqrt(2.9), 64));
    const FitResult r = fit_poissonian(pops);
    REQUIRE(r.converged);
    REQUIRE(r.param("nbar") == Approx(2.9).margin(1e-8));
  }

  SECTION("delta at n = 0 gives nbar = 0") {
    Eigen::VectorXd pops = Eigen::VectorXd::Zero(8);
    pops[0] = 1.0;
    REQUIRE(fit_poissonian(pops).param("nbar") == Approx(0.0).margin(1e-12));
  }

  SECTION("thermal data prefers the thermal model") {
    const Eigen::VectorXd pops = populations(make_thermal(1.8, 48));
    const FitResult poiss = fit_poissonian(pops);
    const FitResult therm = fit_thermal(pops);
    REQUIRE(therm.residual_norm < poiss.residual_norm);
  }
}

TEST_CASE("fit_squeezed") {
  SECTION("exact populations at beta = 40") {
    test_helpers::ScopedWarnCapture capture;
    const Eigen::VectorXd pops = populations(make_squeezed_vacuum(40.0, 256));
    const FitResult r = fit_squeezed(pops);
    REQUIRE(r.converged);
    REQUIRE(r.param("beta") == Approx(40.0).epsilon(1e-6));
  }

  SECTION("vacuum gives beta = 1") {
    Eigen::VectorXd pops = Eigen::VectorXd::Zero(16);
    pops[0] = 1.0;
    REQUIRE(fit_squeezed(pops).param("beta") == Approx(1.0).margin(1e-10));
  }

  SECTION("10% multiplicative noise keeps beta within 25%") {
    test_helpers::ScopedWarnCapture capture;
    const Eigen::VectorXd pops = populations(make_squeezed_vacuum(40.0, 256));
    std::vector<double> errs;
    for (std::uint64_t seed = 0; seed < 9; ++seed) {
      Eigen::VectorXd noisy = pops;
      for (int n = 0; n < noisy.size(); ++n)
        noisy[n] *= 1.0 + 0.1 * rng::normal(seed, 5, n);
      noisy = noisy.cwiseMax(0.0);
      noisy /= noisy.sum();
      errs.push_back(std::abs(fit_squeezed(noisy).param("beta") - 40.0) / 40.0);
    }
    std::sort(errs.begin(), errs.end());
    REQUIRE(errs[errs.size() / 2] < 0.25);
  }
}

TEST_CASE("fit_cat") {
  SECTION("alpha = 6 full-contrast round trip") {
    const FitResult r = fit_cat(cat_trace(6.0, 1.0, 256));
    REQUIRE(r.converged);
    REQUIRE(r.param("alpha") == Approx(6.0).epsilon(1e-6));
    REQUIRE(r.param("c") == Approx(1.0).epsilon(1e-6));
  }

  SECTION("reduced contrast is recovered") {
    const FitResult r = fit_cat(cat_trace(2.97, 0.6, 128));
    REQUIRE(r.converged);
    REQUIRE(r.param("c") == Approx(0.6).epsilon(1e-6));
    REQUIRE(r.param("alpha") == Approx(2.97).epsilon(1e-6));
  }

  SECTION("flat trace flags alpha as unidentifiable") {
    const FitResult r = fit_cat(cat_trace(3.0, 0.0, 64));
    REQUIRE_FALSE(r.converged);
    REQUIRE_FALSE(r.diagnostic.empty());
  }
}

TEST_CASE("analytic jacobians match central differences") {
  SECTION("damped sinusoid") {
    const SignalTrace tr = damped_cosine_trace(2.1, 0.07, 0.45, 0.5, 20.0, 60);
    Eigen::Map<const Eigen::VectorXd> t(tr.abscissa.data(), tr.size());
    Eigen::Map<const Eigen::VectorXd> y(tr.values.data(), tr.size());
    auto res = [&](const Eigen::VectorXd& p) {
      Eigen::VectorXd r(t.size());
      for (int i = 0; i < t.size(); ++i)
        r[i] = y[i] - (p[3] + p[2] * std::exp(-p[1] * t[i]) * std::cos(p[0] * t[i]));
      return r;
    };
    auto jac = [&](const Eigen::VectorXd& p) {
      Eigen::MatrixXd j(t.size(), 4);
      for (int i = 0; i < t.size(); ++i) {
        const double env = std::exp(-p[1] * t[i]);
        j(i, 0) = p[2] * env * t[i] * std::sin(p[0] * t[i]);
        j(i, 1) = p[2] * env * t[i] * std::cos(p[0] * t[i]);
        j(i, 2) = -env * std::cos(p[0] * t[i]);
        j(i, 3) = -1.0;
      }
      return j;
    };
    Eigen::VectorXd p(4);
    p << 2.3, 0.09, 0.4, 0.48;
    check_jacobian(res, jac, p, 1e-6);
  }

  SECTION("cat fringe") {
    const SignalTrace tr = cat_trace(2.5, 0.8, 48);
    Eigen::Map<const Eigen::VectorXd> phi(tr.abscissa.data(), tr.size());
    Eigen::Map<const Eigen::VectorXd> y(tr.values.data(), tr.size());
    auto res = [&](const Eigen::VectorXd& p) {
      Eigen::VectorXd r(phi.size());
      for (int i = 0; i < phi.size(); ++i)
        r[i] = y[i] - cat_fringe(phi[i], p[0], p[1]);
      return r;
    };
    auto jac = [&](const Eigen::VectorXd& p) {
      Eigen::MatrixXd j(phi.size(), 2);
      const double a2 = p[0] * p[0];
      for (int i = 0; i < phi.size(); ++i) {
        const double cph = std::cos(phi[i]);
        const double sph = std::sin(phi[i]);
        const double env = std::exp(-a2 * (1.0 - cph));
        const double dFdA =
            0.5 * p[1] * env *
            ((1.0 - cph) * std::cos(a2 * sph) + sph * std::sin(a2 * sph));
        j(i, 0) = -dFdA * 2.0 * p[0];
        j(i, 1) = 0.5 * env * std::cos(a2 * sph);
      }
      return j;
    };
    Eigen::VectorXd p(2);
    p << 2.2, 0.7;
    check_jacobian(res, jac, p, 1e-6);
  }
}

TEST_CASE("weighted fits downweight rail points") {
  SignalTrace tr = cat_trace(1.5, 0.9, 96);
  tr = simulate_detection(tr, 2000, 31);
  FitOptions opt;
  opt.use_shot_weights = true;
  const FitResult r = fit_cat(tr, opt);
  REQUIRE(r.converged);
  REQUIRE(r.param("alpha") == Approx(1.5).epsilon(0.05));
  REQUIRE(r.param("c") == Approx(0.9).epsilon(0.05));
}

TEST_CASE("nnls returns nonnegative minimizers") {
  Eigen::MatrixXd a(6, 3);
  a << 1, 0.5, 0.2, 0.3, 1, 0.4, 0.2, 0.3, 1, 0.9, 0.1, 0.5, 0.4, 0.8, 0.3,
      0.1, 0.2, 0.9;
  const Eigen::VectorXd xtrue = (Eigen::VectorXd(3) << 0.7, 0.0, 0.3).finished();
  const Eigen::VectorXd b = a * xtrue - 0.3 * a.col(1);  // pull toward x1 < 0
  const Eigen::VectorXd x = detail::nnls(a, b);
  REQUIRE(x.minCoeff() >= 0.0);
  // KKT: gradient must be nonnegative on the active set, ~zero on passive.
  const Eigen::VectorXd g = a.transpose() * (a * x - b);
  for (int i = 0; i < 3; ++i) {
    if (x[i] > 1e-10)
      REQUIRE(std::abs(g[i]) < 1e-10);
    else
      REQUIRE(g[i] > -1e-10);
  }
}
