#ifndef EOS_POSTERIOR_ENGINE_HPP
#define EOS_POSTERIOR_ENGINE_HPP

#include <functional>
#include <string>

#include "eos/common.hpp"
#include "eos/model_zoo.hpp"

namespace eos {

struct TrainingSet {
  Array samples;
  int n = 0;
  uint64_t seed = 0;
  std::string scenario_id;
  SampleStats stats;
};

// Draws n samples from the scenario's true distribution; bit-for-bit
// reproducible from (seed, scenario_id, n).
TrainingSet make_training_set(const Scenario& scenario, int n, uint64_t seed);

enum class BackendKind { grid_quadrature, metropolis };

struct GridConfig {
  int nodes_per_dim = 201;
  double span_sds = 12.0;  // half-width in Laplace posterior standard deviations
};

struct MetropolisConfig {
  int chains = 8;
  int steps = 5000;    // post-burn-in steps per chain
  int burn_in = 2000;  // adaptation window
  int thin = 5;
  double proposal_scale = 2.4;  // initial multiplier on the Laplace scale
};

struct BackendConfig {
  BackendKind kind = BackendKind::grid_quadrature;
  GridConfig grid;
  MetropolisConfig metropolis;
};

struct EstimatorPair {
  Vector w_map;
  Vector w_mle;
  double L_n_at_map = 0.0;
};

struct EmpiricalMatrices {
  Matrix I_n;  // (1/n) Σ ∇log p ∇log pᵀ
  Matrix J_n;  // −(1/n) Σ ∇²log p
  Matrix K_n;  // ∇²L_n = J_n − (1/nβ) ∇²log φ
};

// Weighted point-cloud representation shared by all backends: grid nodes
// with trapezoid×posterior weights, Metropolis draws with uniform weights,
// or a single point for β=∞.
struct PosteriorRep {
  Matrix points;       // P×d
  Array weights;       // normalized to sum 1
  Array log_weights;   // log of weights
  bool point_mass = false;
  int chains = 0;          // metropolis only
  int draws_per_chain = 0; // metropolis only, after thinning
  double accept_rate = 0.0;
  double r_hat = 1.0;
};

struct TemperedPosterior {
  const ParametricModel* model = nullptr;
  const Prior* prior = nullptr;
  const TrainingSet* training = nullptr;
  double beta = 1.0;  // +inf means plug-in at the MLE
  BackendConfig backend;
  EstimatorPair estimators;
  Matrix k_n_at_map;
  PosteriorRep rep;

  int dim() const { return model->dim(); }
};

// L_n(w) = −(1/n) Σ log p(X_j|w) − (1/nβ) log φ(w); the prior term is
// dropped at β=∞.
double empirical_loss(const ParametricModel& model, const Prior& prior,
                      const TrainingSet& ts, double beta, const Vector& w);

// MAP (minimizer of L_n) and MLE (minimizer of the β=∞ loss) by Newton
// descent from `start`.  Throws ConvergenceError("no_convergence").
EstimatorPair fit_estimators(const ParametricModel& model, const Prior& prior,
                             const TrainingSet& ts, double beta,
                             const Vector& start);

EmpiricalMatrices empirical_matrices(const ParametricModel& model,
                                     const Prior& prior, const TrainingSet& ts,
                                     double beta, const Vector& w);

// Builds the posterior representation for the requested backend.  The
// Metropolis backend derives chain RNG streams from (ts.seed, chain index)
// and throws BackendError("backend_unconverged") when the post-adaptation
// acceptance rate leaves [0.15, 0.6] or split R-hat exceeds 1.05.
TemperedPosterior make_posterior(const ParametricModel& model,
                                 const Prior& prior, const TrainingSet& ts,
                                 double beta, const BackendConfig& backend,
                                 const Vector& newton_start);

// Weighted average of g over the representation; g(w_mle) for β=∞.
double posterior_expectation(const TemperedPosterior& post,
                             const std::function<double(const Vector&)>& g);

// Posterior spread moments used by the Lemma-1 checks.
struct PosteriorMoments {
  Vector m1;   // E_w[w] − ŵ
  Matrix m2;   // E_w[(w−ŵ)(w−ŵ)ᵀ]
  double m3 = 0.0;  // E_w[‖w−ŵ‖³]
  Matrix s2;   // E_w[(w−w0)(w−w0)ᵀ]
};

PosteriorMoments posterior_moments(const TemperedPosterior& post,
                                   const Vector& w0);

}  // namespace eos

#endif  // EOS_POSTERIOR_ENGINE_HPP
