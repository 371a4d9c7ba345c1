#include <doctest.h>

#include <cmath>
#include <limits>

#include "eos/functionals.hpp"
#include "eos/quadrature.hpp"

using namespace eos;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

// The catalog is returned by value; a long-lived copy keeps Scenario
// references valid for the whole test run.
const Scenario& scenario(const std::string& id) {
  static const ScenarioCatalog catalog = builtin_scenarios();
  return catalog.get(id);
}

TrainingSet manual_set(std::initializer_list<double> values) {
  TrainingSet ts;
  ts.samples = Array(static_cast<int>(values.size()));
  int i = 0;
  for (double v : values) ts.samples(i++) = v;
  ts.n = static_cast<int>(values.size());
  ts.seed = 7;
  ts.scenario_id = "manual";
  ts.stats = SampleStats::of(ts.samples);
  return ts;
}

}  // namespace

TEST_CASE("per-replication identities hold on every posterior") {
  const Scenario& sc = scenario("gauss-wide");
  const Vector w0 = Vector::Zero(1);
  BackendConfig backend;

  for (uint64_t seed : {1u, 2u, 3u}) {
    const TrainingSet ts = make_training_set(sc, 30, seed);
    for (double beta : {0.5, 1.0, 2.0}) {
      const TemperedPosterior post = make_posterior(
          *sc.model, *sc.prior, ts, beta, backend, sc.w0_init);
      const FunctionalBundle f = evaluate_functionals(post, *sc.true_dist, w0);

      // waic = n b_t + beta v, exactly as computed.
      CHECK(std::abs(f.waic - (ts.n * f.b_t + beta * f.v)) < 1e-10);
      // v = 2n (d5 - d6).
      CHECK(std::abs(f.v - 2.0 * ts.n * (f.d.d5 - f.d.d6)) < 1e-10);
      // Jensen orderings.
      CHECK(f.b_g <= f.g_g + 1e-12);
      CHECK(f.b_t <= f.g_t + 1e-12);
      CHECK(f.v >= -1e-12);
      CHECK(f.d.d2 >= f.d.d3 - 1e-14);
      CHECK(f.d.d5 >= f.d.d6 - 1e-14);
      // Grid backend reports no chain scatter.
      CHECK(f.mh_se_b_t == 0.0);
      CHECK(f.mh_se_v == 0.0);
    }
  }
}

TEST_CASE("individual entry points agree with the shared bundle") {
  const Scenario& sc = scenario("gauss-match");
  const Vector w0 = Vector::Zero(1);
  const TrainingSet ts = make_training_set(sc, 40, 9);
  BackendConfig backend;
  const TemperedPosterior post =
      make_posterior(*sc.model, *sc.prior, ts, 1.0, backend, sc.w0_init);

  const FunctionalBundle f = evaluate_functionals(post, *sc.true_dist, w0);
  const auto [bg, bt] = bayes_losses(post, *sc.true_dist);
  const auto [gg, gt] = gibbs_losses(post, *sc.true_dist);
  CHECK(bg == doctest::Approx(f.b_g).epsilon(1e-12));
  CHECK(bt == doctest::Approx(f.b_t).epsilon(1e-12));
  CHECK(gg == doctest::Approx(f.g_g).epsilon(1e-12));
  CHECK(gt == doctest::Approx(f.g_t).epsilon(1e-12));
  CHECK(functional_variance(post) == doctest::Approx(f.v).epsilon(1e-12));
  CHECK(waic(post) == doctest::Approx(f.waic).epsilon(1e-12));
  CHECK(bayes_generalization_loss(post, *sc.true_dist) ==
        doctest::Approx(f.b_g).epsilon(1e-12));
  const DTerms d = d_terms(post, *sc.true_dist, w0);
  CHECK(d.d1 == doctest::Approx(f.d.d1).epsilon(1e-12));
  CHECK(d.d4 == doctest::Approx(f.d.d4).epsilon(1e-12));
}

TEST_CASE("plug-in limit collapses every spread quantity") {
  const Scenario& sc = scenario("gauss-wide");
  const Vector w0 = Vector::Zero(1);
  const TrainingSet ts = make_training_set(sc, 25, 4);
  BackendConfig backend;
  const TemperedPosterior post =
      make_posterior(*sc.model, *sc.prior, ts, kInf, backend, sc.w0_init);
  const FunctionalBundle f = evaluate_functionals(post, *sc.true_dist, w0);

  CHECK(f.v == 0.0);
  CHECK(f.b_g == f.g_g);
  CHECK(f.b_t == f.g_t);
  CHECK(f.d.d2 == f.d.d3);
  CHECK(f.d.d5 == f.d.d6);
  CHECK(f.waic == ts.n * f.b_t);
}

TEST_CASE("training set centred at w0 with plug-in gives zero divergences") {
  const auto model = make_gauss_loc();
  const Prior prior(10.0, Box::cube(1, 20.0));
  const auto q = make_gauss_true(0.0, 2.0);
  const TrainingSet ts = manual_set({-1.0, 0.0, 1.0});  // mean exactly w0
  BackendConfig backend;
  const TemperedPosterior post =
      make_posterior(*model, prior, ts, kInf, backend, Vector::Zero(1));
  CHECK(post.estimators.w_mle(0) == 0.0);

  const FunctionalBundle f = evaluate_functionals(post, *q, Vector::Zero(1));
  CHECK(f.d.d1 == 0.0);
  CHECK(f.d.d2 == 0.0);
  CHECK(f.d.d3 == 0.0);
  CHECK(f.d.d4 == 0.0);
  CHECK(f.d.d5 == 0.0);
  CHECK(f.d.d6 == 0.0);
}

TEST_CASE("divergence terms tie back to the loss functionals") {
  const Scenario& sc = scenario("gauss-wide");
  const Vector w0 = Vector::Zero(1);
  const TrainingSet ts = make_training_set(sc, 60, 21);
  BackendConfig backend;
  const TemperedPosterior post =
      make_posterior(*sc.model, *sc.prior, ts, 1.0, backend, sc.w0_init);
  const FunctionalBundle f = evaluate_functionals(post, *sc.true_dist, w0);

  // d1 = g_g - S with S the population loss at w0.
  const double S = 1.9189385332046727;
  CHECK(f.d.d1 == doctest::Approx(f.g_g - S).epsilon(1e-8));
  // d4 = g_t - L_n(w0) with the plain (beta=inf) empirical loss.
  const double ln0 = empirical_loss(*sc.model, *sc.prior, ts, kInf, w0);
  CHECK(std::abs(f.d.d4 - (f.g_t - ln0)) < 1e-12);
}

TEST_CASE("near-zero beta reduces the Bayes loss to the prior predictive") {
  const Scenario& sc = scenario("gauss-match");
  const TrainingSet ts = make_training_set(sc, 20, 2);
  BackendConfig backend;
  const TemperedPosterior post =
      make_posterior(*sc.model, *sc.prior, ts, 1e-6, backend, sc.w0_init);
  const double b_g = bayes_generalization_loss(post, *sc.true_dist);

  // Oracle: -E_X log r(X) with r the prior-mixture density, both integrals
  // by adaptive quadrature.
  const Prior& prior = *sc.prior;
  auto mixture = [&](double x) {
    Vector probe(1);
    auto f = [&](double w) {
      probe(0) = w;
      return std::exp(prior.log_density(probe)) *
             std::exp(-0.5 * (x - w) * (x - w)) / std::sqrt(2.0 * M_PI);
    };
    return integrate(f, -20.0, 20.0).value;
  };
  auto outer = [&](double x) {
    const double qx = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
    return -qx * std::log(mixture(x));
  };
  QuadratureOptions opts;
  opts.max_intervals = 400;
  opts.fail_threshold = 1e-4;
  const double oracle = integrate(outer, -12.0, 12.0, opts).value;
  CHECK(std::abs(b_g - oracle) < 2e-3);
}

TEST_CASE("empirical TIC for the location model is the biased variance") {
  const auto model = make_gauss_loc();
  const TrainingSet ts = manual_set({0.4, -1.1, 2.2, 0.0, -0.6});
  const double xbar = ts.samples.mean();
  const double biased_var = (ts.samples - xbar).square().mean();
  Vector w_mle = Vector::Constant(1, xbar);
  CHECK(tic_empirical(*model, ts, w_mle) ==
        doctest::Approx(biased_var).epsilon(1e-12));
}

TEST_CASE("metropolis backend reports chain-to-chain scatter") {
  const Scenario& sc = scenario("gauss-match");
  const TrainingSet ts = make_training_set(sc, 50, 13);
  BackendConfig cfg;
  cfg.kind = BackendKind::metropolis;
  const TemperedPosterior post =
      make_posterior(*sc.model, *sc.prior, ts, 1.0, cfg, sc.w0_init);
  const FunctionalBundle f = evaluate_functionals(post, *sc.true_dist,
                                                  Vector::Zero(1));
  CHECK(f.mh_se_b_t > 0.0);
  CHECK(f.mh_se_v > 0.0);
  // Identities hold for the sampled representation too.
  CHECK(std::abs(f.waic - (ts.n * f.b_t + 1.0 * f.v)) < 1e-10);
  CHECK(std::abs(f.v - 2.0 * ts.n * (f.d.d5 - f.d.d6)) < 1e-10);
}
