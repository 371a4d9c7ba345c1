#include <doctest.h>

#include <cmath>

#include "eos/loss_geometry.hpp"

using namespace eos;

namespace {
const double kHalfLog2Pi = 0.5 * std::log(2.0 * M_PI);
}

TEST_CASE("population log loss closed forms for the location family") {
  const auto model = make_gauss_loc();
  const auto wide = make_gauss_true(0.0, 2.0);
  // L(w) = 0.5 log 2pi + (sigma^2 + w^2)/2 for N(x|w,1) against N(0,sigma^2).
  CHECK(log_loss(*model, *wide, Vector::Zero(1)) ==
        doctest::Approx(kHalfLog2Pi + 1.0).epsilon(1e-10));
  CHECK(log_loss(*model, *wide, Vector::Constant(1, 0.5)) ==
        doctest::Approx(kHalfLog2Pi + 1.0 + 0.125).epsilon(1e-10));
  const auto narrow = make_gauss_true(0.0, 0.5);
  CHECK(log_loss(*model, *narrow, Vector::Constant(1, -1.0)) ==
        doctest::Approx(kHalfLog2Pi + 0.25 + 0.5).epsilon(1e-10));
}

TEST_CASE("optimal parameter is found from arbitrary inits") {
  const auto model = make_gauss_loc();
  const auto q = make_gauss_true(0.0, 2.0);
  const OptimalPoint a = find_optimal_parameter(*model, *q, Vector::Zero(1));
  const OptimalPoint b =
      find_optimal_parameter(*model, *q, Vector::Constant(1, 3.7));
  CHECK(std::abs(a.w0(0)) < 1e-8);
  CHECK(std::abs(b.w0(0)) < 1e-8);
  CHECK(a.L_at_w0 == doctest::Approx(kHalfLog2Pi + 1.0).epsilon(1e-10));
  CHECK(a.grad_norm < 1e-8);

  const auto sl = builtin_scenarios().get("gauss-scaleloc-laplace");
  const OptimalPoint c =
      find_optimal_parameter(*sl.model, *sl.true_dist, Vector::Constant(2, 1.0));
  // Variance matching: scale parameter log(sqrt(Var)) with Var = 2.
  CHECK(std::abs(c.w0(0)) < 1e-8);
  CHECK(c.w0(1) == doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-8));
  // S = (log(4 pi) + 1)/2 for the variance-matched gaussian vs Laplace(0,1).
  CHECK(c.L_at_w0 ==
        doctest::Approx(0.5 * (std::log(4.0 * M_PI) + 1.0)).epsilon(1e-9));
}

TEST_CASE("information matrices for the three location scenarios") {
  const auto model = make_gauss_loc();
  const Vector w0 = Vector::Zero(1);
  const InformationPair wide =
      information_matrices(*model, *make_gauss_true(0.0, 2.0), w0);
  CHECK(wide.I(0, 0) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(wide.J(0, 0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(wide.Q(0, 0) == doctest::Approx(1.0).epsilon(1e-9));

  const InformationPair match =
      information_matrices(*model, *make_gauss_true(0.0, 1.0), w0);
  CHECK(std::abs(match.I(0, 0) - match.J(0, 0)) < 1e-6);
  CHECK(std::abs(match.Q(0, 0)) < 1e-6);

  const InformationPair narrow =
      information_matrices(*model, *make_gauss_true(0.0, 0.5), w0);
  CHECK(narrow.I(0, 0) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(narrow.J(0, 0) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("scale-location model against Laplace: I and J") {
  const auto sl = builtin_scenarios().get("gauss-scaleloc-laplace");
  Vector w0(2);
  w0 << 0.0, 0.5 * std::log(2.0);
  const InformationPair pair =
      information_matrices(*sl.model, *sl.true_dist, w0);
  // Scores: a(x-w1) and a x^2 - 1 with a = 1/2; Laplace(0,1) moments
  // E[x^2] = 2, E[x^4] = 24 give I = diag(1/2, 5), J = diag(1/2, 2).
  CHECK(pair.I(0, 0) == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(pair.I(1, 1) == doctest::Approx(5.0).epsilon(1e-8));
  CHECK(std::abs(pair.I(0, 1)) < 1e-8);
  CHECK(pair.J(0, 0) == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(pair.J(1, 1) == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(std::abs(pair.J(0, 1)) < 1e-8);
}

TEST_CASE("asymptotic constants from the information matrices") {
  OptimalPoint opt;
  opt.w0 = Vector::Zero(1);
  opt.L_at_w0 = 1.25;
  InformationPair pair;
  pair.I = Matrix::Constant(1, 1, 2.0);
  pair.J = Matrix::Constant(1, 1, 1.0);
  pair.Q = pair.I - pair.J;
  const AsymptoticConstants c = asymptotic_constants(opt, pair);
  CHECK(c.S == 1.25);
  CHECK(c.lambda == 0.5);
  CHECK(c.nu == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(c.mu == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(c.tic == doctest::Approx(2.0 * c.nu).epsilon(1e-12));

  // 2-d anisotropic case: nu = tr(IJ^-1)/2, mu = tr((IJ^-1)^2)/2.
  OptimalPoint opt2;
  opt2.w0 = Vector::Zero(2);
  opt2.L_at_w0 = 0.0;
  InformationPair p2;
  p2.I = Matrix::Zero(2, 2);
  p2.J = Matrix::Zero(2, 2);
  p2.I.diagonal() << 0.5, 5.0;
  p2.J.diagonal() << 0.5, 2.0;
  p2.Q = p2.I - p2.J;
  const AsymptoticConstants c2 = asymptotic_constants(opt2, p2);
  CHECK(c2.lambda == 1.0);
  CHECK(c2.nu == doctest::Approx(1.75).epsilon(1e-12));
  CHECK(c2.mu == doctest::Approx(3.625).epsilon(1e-12));
  CHECK(c2.tic == doctest::Approx(3.5).epsilon(1e-12));
}

TEST_CASE("scenario constants pipeline and the beta-sweep sign rule") {
  const ScenarioCatalog catalog = builtin_scenarios();
  const ScenarioConstants wide =
      compute_scenario_constants(catalog.get("gauss-wide"));
  CHECK(wide.constants.S ==
        doctest::Approx(1.9189385332046727).epsilon(1e-9));
  CHECK(wide.constants.lambda == 0.5);
  CHECK(wide.constants.nu == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(wide.constants.mu == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(wide.constants.tic == doctest::Approx(2.0).epsilon(1e-8));

  const ScenarioConstants match =
      compute_scenario_constants(catalog.get("gauss-match"));
  CHECK(match.constants.S ==
        doctest::Approx(1.4189385332046727).epsilon(1e-9));
  CHECK(std::abs(match.constants.nu - match.constants.lambda) < 1e-6);
  CHECK(match.constants.tic == doctest::Approx(1.0).epsilon(1e-6));

  const ScenarioConstants narrow =
      compute_scenario_constants(catalog.get("gauss-narrow"));
  CHECK(narrow.constants.S ==
        doctest::Approx(1.1689385332046727).epsilon(1e-9));
  CHECK(narrow.constants.nu == doctest::Approx(0.25).epsilon(1e-8));
  CHECK(narrow.constants.mu == doctest::Approx(0.125).epsilon(1e-8));

  // tr(IJ^-1) - d decides whether tempering beats the plug-in: positive
  // when the truth is over-dispersed (Var 2), negative when under-dispersed
  // (Var 1/2), zero when the model contains the truth.
  const double d = 1.0;
  CHECK(wide.constants.tic - d > 0.5);
  CHECK(narrow.constants.tic - d < -0.25);
  CHECK(std::abs(match.constants.tic - d) < 1e-6);

  const ScenarioConstants laplace =
      compute_scenario_constants(catalog.get("gauss-scaleloc-laplace"));
  CHECK(laplace.constants.S ==
        doctest::Approx(1.7655121234846453).epsilon(1e-9));
  CHECK(laplace.constants.nu == doctest::Approx(1.75).epsilon(1e-8));
  CHECK(laplace.constants.mu == doctest::Approx(3.625).epsilon(1e-7));
  CHECK(laplace.constants.tic == doctest::Approx(3.5).epsilon(1e-8));
}

TEST_CASE("Monte Carlo cross-check of S for GaussLoc-wide") {
  const ScenarioCatalog catalog = builtin_scenarios();
  const Scenario& wide = catalog.get("gauss-wide");
  const Vector w0 = Vector::Zero(1);
  Rng rng(20240817);
  const int k = 10000000;
  const Array xs = wide.true_dist->sample(rng, k);
  // mean of -log p(X|w0); fluctuation SD = sqrt(Var[x^2/2]) = sqrt(2).
  const double mean_loss =
      (0.5 * std::log(2.0 * M_PI)) + 0.5 * xs.square().mean();
  const double se = std::sqrt(2.0 / k);
  CHECK(std::abs(mean_loss - 1.9189385332046727) < 4.0 * se);
}
