#ifndef EOS_FUNCTIONALS_HPP
#define EOS_FUNCTIONALS_HPP

#include <utility>

#include "eos/common.hpp"
#include "eos/model_zoo.hpp"
#include "eos/posterior_engine.hpp"

namespace eos {

struct DTerms {
  double d1 = 0.0;  // E_X E_w[f]
  double d2 = 0.0;  // (1/2) E_X E_w[f^2]
  double d3 = 0.0;  // (1/2) E_X (E_w[f])^2
  double d4 = 0.0;  // training analogue of d1
  double d5 = 0.0;  // training analogue of d2
  double d6 = 0.0;  // training analogue of d3
};

// All per-replication functionals evaluated on one posterior with shared
// inner passes (one data×support pass, one x-quadrature pass).
struct FunctionalBundle {
  double b_g = 0.0;
  double b_t = 0.0;
  double g_g = 0.0;
  double g_t = 0.0;
  double v = 0.0;
  double waic = 0.0;
  DTerms d;
  // Chain-to-chain standard errors (metropolis backend only, else 0).
  double mh_se_b_t = 0.0;
  double mh_se_v = 0.0;
};

FunctionalBundle evaluate_functionals(const TemperedPosterior& post,
                                      const TrueDistribution& q,
                                      const Vector& w0);

// Individual functionals (each recomputes only the passes it needs).
std::pair<double, double> bayes_losses(const TemperedPosterior& post,
                                       const TrueDistribution& q);
std::pair<double, double> gibbs_losses(const TemperedPosterior& post,
                                       const TrueDistribution& q);
double functional_variance(const TemperedPosterior& post);
double waic(const TemperedPosterior& post);
DTerms d_terms(const TemperedPosterior& post, const TrueDistribution& q,
               const Vector& w0);

// Bayes generalization loss alone; the cheap path used by beta sweeps.
double bayes_generalization_loss(const TemperedPosterior& post,
                                 const TrueDistribution& q);

// TIC_n = tr(I_n(w_mle) J_n(w_mle)^-1).  Throws
// SingularMatrixError("singular_Jn") when J_n is not invertible.
double tic_empirical(const ParametricModel& model, const TrainingSet& ts,
                     const Vector& w_mle);

}  // namespace eos

#endif  // EOS_FUNCTIONALS_HPP
