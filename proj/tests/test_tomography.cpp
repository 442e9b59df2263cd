#include <catch2/catch_amalgamated.hpp>

#include "motional/tomography.hpp"

#include "helpers.hpp"

using namespace motional;
using Catch::Approx;

namespace {

double frobenius_error(const DensityMatrix& a, const DensityMatrix& b) {
  return (a.entries - b.entries).norm();
}

DensityMatrix pure_density(const StateVector& s) {
  return DensityMatrix{s.amplitudes * s.amplitudes.adjoint()};
}

}  // namespace

TEST_CASE("displacement grid layout") {
  const DisplacementGrid g = DisplacementGrid::make(1.0, 4);
  REQUIRE(g.points.size() == 8);
  for (int p = -4; p < 4; ++p) {
    const cxd expected = std::exp(cxd(0.0, kPi * p / 4.0));
    REQUIRE(std::abs(g.points[p + 4] - expected) < 1e-15);
  }
  REQUIRE_THROWS_AS(DisplacementGrid::make(1.0, 0), std::invalid_argument);
}

TEST_CASE("simulate_q") {
  SECTION("displaced vacuum is Poissonian in |alpha|^2") {
    const DensityMatrix vac = pure_density(make_fock(0, 24));
    const cxd alpha(0.9, -0.3);
    const Eigen::VectorXd q = simulate_q(vac, alpha, 15);
    const double lam = std::norm(alpha);
    double expected = test_helpers::series_exp(-lam);
    for (int k = 0; k <= 15; ++k) {
      REQUIRE(q[k] == Approx(expected).margin(1e-12));
      expected *= lam / (k + 1.0);
    }
  }

  SECTION("zero displacement returns the diagonal") {
    const DensityMatrix rho = make_thermal(0.8, 16);
    const Eigen::VectorXd q = simulate_q(rho, 0.0, 15);
    const Eigen::VectorXd diag = populations(rho);
    REQUIRE((q - diag.head(16)).cwiseAbs().maxCoeff() < 1e-14);
  }

  SECTION("fock(1) undisplaced") {
    const Eigen::VectorXd q = simulate_q(make_fock(1, 8), cxd(0.0, 0.0), 5);
    REQUIRE(q[1] == Approx(1.0));
    REQUIRE(q.sum() == Approx(1.0));
  }

  SECTION("pure-state and density routes agree") {
    const StateVector s = make_coherent(cxd(0.5, 0.4), 32);
    const Eigen::VectorXd qa = simulate_q(s, cxd(-0.7, 0.2), 20);
    const Eigen::VectorXd qb = simulate_q(pure_density(s), cxd(-0.7, 0.2), 20);
    REQUIRE((qa - qb).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("reconstruct_density round trips") {
  const DisplacementGrid grid = DisplacementGrid::make(1.0, 4);

  SECTION("fock(1)") {
    const DensityMatrix truth = pure_density(make_fock(1, 4));
    const QTable q = simulate_qtable(truth, grid, 11);
    const ReconstructionResult r = reconstruct_density(q, grid, 3);
    REQUIRE(r.density.entries(1, 1).real() == Approx(1.0).margin(1e-6));
    REQUIRE(frobenius_error(r.density, truth) < 1e-6);
    REQUIRE(r.condition_number < 100.0);
  }

  SECTION("vacuum") {
    const DensityMatrix truth = pure_density(make_fock(0, 4));
    const QTable q = simulate_qtable(truth, grid, 11);
    const ReconstructionResult r = reconstruct_density(q, grid, 3);
    REQUIRE(r.density.entries(0, 0).real() == Approx(1.0).margin(1e-8));
  }

  SECTION("truncated coherent state, matrix recovered entrywise") {
    const StateVector s = make_coherent(0.67, 4);
    const DensityMatrix truth = pure_density(s);
    const QTable q = simulate_qtable(truth, grid, 11);
    const ReconstructionResult r = reconstruct_density(q, grid, 3);
    REQUIRE(frobenius_error(r.density, truth) < 1e-6);
  }

  SECTION("ideal coherent matrix elements emerge at larger N") {
    // With support comfortably inside nmax the reconstruction matches the
    // ideal outer product e^{-|b|^2} b^n conj(b)^m / sqrt(n! m!).
    const double b = 0.67;
    const DisplacementGrid g8 = DisplacementGrid::make(1.0, 8);
    const StateVector s = make_coherent(b, 8);
    const QTable q = simulate_qtable(pure_density(s), g8, 15);
    const ReconstructionResult r = reconstruct_density(q, g8, 7);
    double fact_n = 1.0;
    for (int n = 0; n < 4; ++n) {
      double fact_m = 1.0;
      for (int m = 0; m < 4; ++m) {
        const double ideal = test_helpers::series_exp(-b * b) *
                             std::pow(b, n + m) / std::sqrt(fact_n * fact_m);
        REQUIRE(std::abs(r.density.entries(n, m) - cxd(ideal, 0.0)) < 1e-6);
        fact_m *= (m + 1.0);
      }
      fact_n *= (n + 1.0);
    }
  }

  SECTION("squeezed state inside the block") {
    const StateVector s = make_squeezed_vacuum(10.0, 4);
    const DensityMatrix truth = pure_density(s);
    const QTable q = simulate_qtable(truth, grid, 11);
    const ReconstructionResult r = reconstruct_density(q, grid, 3);
    REQUIRE(frobenius_error(r.density, truth) < 1e-6);
  }

  SECTION("rank condition names the constraint") {
    const QTable q = simulate_qtable(pure_density(make_fock(1, 4)), grid, 11);
    REQUIRE_THROWS_WITH(reconstruct_density(q, grid, 4),
                        Catch::Matchers::ContainsSubstring("nmax <= N-1"));
  }

  SECTION("zero-radius grid is rank deficient") {
    const DisplacementGrid degenerate = DisplacementGrid::make(0.0, 4);
    const QTable q =
        simulate_qtable(pure_density(make_fock(1, 4)), degenerate, 11);
    REQUIRE_THROWS_AS(reconstruct_density(q, degenerate, 3), NumericError);
  }

  SECTION("noisy reconstruction lands within 5e-2 at 1e4 shots") {
    const StateVector s = make_coherent(0.67, 4);
    const DensityMatrix truth = pure_density(s);
    const QTable q = simulate_qtable(truth, grid, 11);
    std::vector<double> errs;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const QTable noisy = add_projection_noise(q, 10000, seed);
      const ReconstructionResult r = reconstruct_density(noisy, grid, 3);
      errs.push_back(frobenius_error(r.density, truth));
    }
    std::sort(errs.begin(), errs.end());
    REQUIRE(errs[errs.size() / 2] < 5e-2);
  }
}

TEST_CASE("reconstruction equivariance under grid rotation") {
  // Data taken on a grid rotated by -chi, inverted against the unrotated
  // grid, lands on rho_nm e^{i (n-m) chi}.
  const double chi = 0.37;
  const StateVector s = make_coherent(cxd(0.4, 0.3), 4);
  const DensityMatrix truth = pure_density(s);

  const DisplacementGrid grid = DisplacementGrid::make(1.0, 4);
  DisplacementGrid rotated = grid;
  for (cxd& p : rotated.points) p *= std::exp(cxd(0.0, -chi));

  const QTable q = simulate_qtable(truth, rotated, 11);
  const ReconstructionResult r = reconstruct_density(q, grid, 3);
  for (int n = 0; n < 4; ++n)
    for (int m = 0; m < 4; ++m) {
      const cxd expected =
          truth.entries(n, m) * std::exp(cxd(0.0, chi * double(n - m)));
      REQUIRE(std::abs(r.density.entries(n, m) - expected) < 1e-8);
    }
}

TEST_CASE("add_projection_noise") {
  const DisplacementGrid grid = DisplacementGrid::make(0.8, 3);
  const QTable q = simulate_qtable(make_thermal(0.9, 24), grid, 9);

  SECTION("determinism and rails") {
    QTable ones = q;
    ones.values.setOnes();
    const QTable sampled = add_projection_noise(ones, 500, 3);
    REQUIRE((sampled.values.array() == 1.0).all());

    const QTable a = add_projection_noise(q, 200, 11);
    const QTable b = add_projection_noise(q, 200, 11);
    REQUIRE((a.values.array() == b.values.array()).all());
  }

  SECTION("error scales like 1/sqrt(shots)") {
    auto rms_err = [&](long shots, std::uint64_t seed) {
      const QTable n = add_projection_noise(q, shots, seed);
      return std::sqrt((n.values - q.values).array().square().mean());
    };
    double r_small = 0.0, r_big = 0.0;
    for (std::uint64_t s = 0; s < 6; ++s) {
      r_small += rms_err(100, s);
      r_big += rms_err(10000, 100 + s);
    }
    const double ratio = r_small / r_big;
    REQUIRE(ratio > 6.0);  // ideal 10, finite-sample slack
    REQUIRE(ratio < 16.0);
  }

  REQUIRE_THROWS_AS(add_projection_noise(q, 0, 1), std::domain_error);
}

TEST_CASE("wigner_point parity sum") {
  SECTION("vacuum at the origin") {
    Eigen::VectorXd q = Eigen::VectorXd::Zero(6);
    q[0] = 1.0;
    const WignerPoint w = wigner_point(q);
    REQUIRE(w.value == Approx(kTwoOverPi).margin(1e-15));
    REQUIRE(w.converged);
  }

  SECTION("fock(1) at the origin is exactly -2/pi") {
    Eigen::VectorXd q = Eigen::VectorXd::Zero(6);
    q[1] = 1.0;
    const WignerPoint w = wigner_point(q);
    REQUIRE(w.value == -kTwoOverPi);
  }

  SECTION("parity alternates exactly for higher fock states") {
    for (int n = 0; n < 5; ++n) {
      const WignerPoint w = wigner_at(make_fock(n, 8), 0.0);
      REQUIRE(w.value == Approx((n % 2 == 0 ? 1.0 : -1.0) * kTwoOverPi)
                             .margin(1e-14));
    }
  }

  SECTION("unconverged tails are flagged") {
    Eigen::VectorXd q(4);
    q << 0.3, 0.2, 0.1, 0.05;
    REQUIRE_FALSE(wigner_point(q).converged);
  }
}

TEST_CASE("wigner fields") {
  SECTION("vacuum is the Gaussian (2/pi) e^{-2|alpha|^2}") {
    const StateVector vac = make_fock(0, 8);
    for (int i = 0; i < 12; ++i) {
      const cxd a = test_helpers::random_complex(2.0, 51, i);
      const WignerPoint w = wigner_at(vac, a);
      REQUIRE(w.converged);
      REQUIRE(w.value ==
              Approx(kTwoOverPi * std::exp(-2.0 * std::norm(a))).margin(1e-9));
    }
  }

  SECTION("fock(1) closed form with zero crossing at |alpha| = 1/2") {
    const StateVector one = make_fock(1, 8);
    for (int i = 0; i < 12; ++i) {
      const cxd a = test_helpers::random_complex(1.8, 52, i);
      const double r2 = std::norm(a);
      const double expected = kTwoOverPi * (4.0 * r2 - 1.0) * std::exp(-2.0 * r2);
      REQUIRE(wigner_at(one, a).value == Approx(expected).margin(1e-9));
    }
    REQUIRE(wigner_at(one, cxd(0.5, 0.0)).value == Approx(0.0).margin(1e-10));
    REQUIRE(wigner_at(one, cxd(0.0, 0.0)).value < 0.0);
  }

  SECTION("coherent state is the translated vacuum Gaussian") {
    const double beta = 1.5;
    const StateVector s = make_coherent(beta, 32);
    REQUIRE(wigner_at(s, cxd(beta, 0.0)).value ==
            Approx(kTwoOverPi).margin(1e-9));
    for (int i = 0; i < 10; ++i) {
      const cxd a = test_helpers::random_complex(2.5, 53, i);
      const double expected = kTwoOverPi * std::exp(-2.0 * std::norm(a - beta));
      REQUIRE(wigner_at(s, a).value == Approx(expected).margin(1e-6));
    }
  }

  SECTION("field evaluation is threading-invariant and bounded by 2/pi") {
    const DensityMatrix rho = make_thermal(1.1, 24);
    WignerGridSpec spec;
    spec.re_points = 9;
    spec.im_points = 7;
    spec.re_min = -2.0;
    spec.re_max = 2.0;
    spec.im_min = -1.5;
    spec.im_max = 1.5;
    const WignerField f1 = wigner_field(rho, spec, 1);
    const WignerField f4 = wigner_field(rho, spec, 4);
    REQUIRE(f1.values == f4.values);
    for (double v : f1.values) REQUIRE(std::abs(v) <= kTwoOverPi + 1e-6);
  }
}

TEST_CASE("round-trip over the state families inside the block") {
  test_helpers::ScopedWarnCapture capture;
  const DisplacementGrid grid = DisplacementGrid::make(1.0, 4);
  std::vector<DensityMatrix> states;
  for (int n = 0; n <= 3; ++n) states.push_back(pure_density(make_fock(n, 4)));
  for (double b : {0.4, 0.9, 1.5})
    states.push_back(pure_density(make_coherent(b, 4)));
  states.push_back(pure_density(make_coherent(cxd(0.4, 0.3), 4)));
  states.push_back(pure_density(make_coherent(cxd(-0.2, 0.8), 4)));
  for (double beta : {2.0, 6.0, 10.0})
    states.push_back(pure_density(make_squeezed_vacuum(beta, 4)));
  states.push_back(make_thermal(0.7, 4));

  for (const DensityMatrix& truth : states) {
    const QTable q = simulate_qtable(truth, grid, 11);
    const ReconstructionResult r = reconstruct_density(q, grid, 3);
    REQUIRE(frobenius_error(r.density, truth) < 1e-6);
  }
}
