#ifndef EOS_LOSS_GEOMETRY_HPP
#define EOS_LOSS_GEOMETRY_HPP

#include "eos/common.hpp"
#include "eos/model_zoo.hpp"

namespace eos {

struct OptimalPoint {
  Vector w0;
  double L_at_w0 = 0.0;
  double grad_norm = 0.0;
  int newton_iterations = 0;
};

struct InformationPair {
  Matrix I;  // score covariance under the true distribution
  Matrix J;  // negative expected log-density Hessian
  Matrix Q;  // I − J
};

struct AsymptoticConstants {
  double S = 0.0;       // L(w0), nats
  double lambda = 0.0;  // d/2
  double nu = 0.0;      // tr(I J^-1)/2
  double mu = 0.0;      // tr(I J^-1 I J^-1)/2
  double tic = 0.0;     // tr(I J^-1)
};

// Population log loss L(w) = −∫ q(x) log p(x|w) dx by adaptive quadrature on
// the true distribution's support.  Throws QuadratureError if the error
// bound exceeds 1e−6.
double log_loss(const ParametricModel& model, const TrueDistribution& q,
                const Vector& w);

// Newton minimization of L with quadrature-evaluated derivatives, multistart
// from 8 deterministic points plus `init`.  Throws ConvergenceError with
// message "no_convergence" or "multiple_minima".
OptimalPoint find_optimal_parameter(const ParametricModel& model,
                                    const TrueDistribution& q,
                                    const Vector& init);

// I = ∫ ∇log p ∇log pᵀ q dx and J = −∫ ∇²log p q dx at w0.
InformationPair information_matrices(const ParametricModel& model,
                                     const TrueDistribution& q,
                                     const Vector& w0);

// S, λ, ν, μ, TIC from the optimum and the information pair.  Throws
// SingularMatrixError("singular_J") when J is not positive definite.
AsymptoticConstants asymptotic_constants(const OptimalPoint& optimal,
                                         const InformationPair& pair);

// Convenience bundle used by the CLI and the run manifest.
struct ScenarioConstants {
  OptimalPoint optimal;
  InformationPair pair;
  AsymptoticConstants constants;
};

ScenarioConstants compute_scenario_constants(const Scenario& scenario);

}  // namespace eos

#endif  // EOS_LOSS_GEOMETRY_HPP
