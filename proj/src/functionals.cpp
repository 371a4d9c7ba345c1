#include "eos/functionals.hpp"

#include <cmath>

#include "eos/loss_geometry.hpp"
#include "eos/quadrature.hpp"

namespace eos {
namespace {

QuadratureOptions x_quad_options() {
  QuadratureOptions opts;
  opts.abs_tol = 1e-10;
  opts.rel_tol = 1e-10;
  opts.fail_threshold = 1e-6;
  return opts;
}

// Results of the single pass over (training point j, support point g).
struct TrainingPass {
  double b_t = 0.0;
  double g_t = 0.0;
  double v = 0.0;
  double d4 = 0.0, d5 = 0.0, d6 = 0.0;
  bool has_d = false;
  double mh_se_b_t = 0.0;
  double mh_se_v = 0.0;
};

// Results of the x-quadrature pass against the true density.
struct XPass {
  double b_g = 0.0;
  double g_g = 0.0;
  double d1 = 0.0, d2 = 0.0, d3 = 0.0;
  bool has_d = false;
};

// log p(X_j | support point g) for all j, g.  Columns follow the support
// points so metropolis chains stay in contiguous column blocks.
Matrix log_density_table(const TemperedPosterior& post) {
  const Array& xs = post.training->samples;
  const long p = post.rep.points.rows();
  Matrix table(xs.size(), p);
  for (long g = 0; g < p; ++g)
    table.col(g) =
        post.model->log_density_array(xs, post.rep.points.row(g).transpose());
  return table;
}

// b_t and v of one block of uniformly weighted columns (one MH chain).
void block_bt_v(const Matrix& table, long col0, long cols, double& b_t,
                double& v) {
  const auto block = table.middleCols(col0, cols);
  const Vector mean = block.rowwise().mean();
  const Vector rowmax = block.rowwise().maxCoeff();
  const Array sums =
      (block.colwise() - rowmax).array().exp().rowwise().sum();
  b_t = -(rowmax.array() + sums.log() - std::log(double(cols))).mean();
  v = (block.colwise() - mean).array().square().rowwise().sum().sum() /
      static_cast<double>(cols);
}

TrainingPass run_training_pass(const TemperedPosterior& post,
                               const Vector* w0) {
  TrainingPass out;
  const Array& xs = post.training->samples;

  if (post.rep.point_mass) {
    const Array l_mle =
        post.model->log_density_array(xs, post.estimators.w_mle);
    out.b_t = -l_mle.mean();
    out.g_t = out.b_t;
    out.v = 0.0;
    if (w0) {
      const Array f = post.model->log_density_array(xs, *w0) - l_mle;
      out.d4 = f.mean();
      out.d5 = 0.5 * f.square().mean();
      out.d6 = out.d5;
      out.has_d = true;
    }
    return out;
  }

  const Matrix table = log_density_table(post);
  const Vector weights = post.rep.weights.matrix();
  const Vector mean = table * weights;  // E_w[log p(X_j|w)] per j

  // log E_w[p(X_j|w)] via log-sum-exp with the log weights folded in.
  const auto shifted = table.rowwise() + post.rep.log_weights.matrix().transpose();
  const Vector rowmax = shifted.rowwise().maxCoeff();
  const Array lse = rowmax.array() +
                    (shifted.colwise() - rowmax).array().exp().rowwise().sum().log();
  out.b_t = -lse.mean();
  out.g_t = -mean.mean();

  // Two-pass posterior variance of log p(X_j|w) per training point.
  const Array var_j =
      ((table.colwise() - mean).array().square().matrix() * weights).array();
  out.v = var_j.sum();

  if (w0) {
    const Array l0 = post.model->log_density_array(xs, *w0);
    const Array gap = l0 - mean.array();  // E_w[f(X_j, w)]
    out.d4 = gap.mean();
    out.d6 = 0.5 * gap.square().mean();
    out.d5 = 0.5 * (var_j + gap.square()).mean();
    out.has_d = true;
  }

  if (post.rep.chains > 1) {
    const int c = post.rep.chains;
    const long t = post.rep.draws_per_chain;
    double sum_b = 0.0, sum_b2 = 0.0, sum_v = 0.0, sum_v2 = 0.0;
    for (int k = 0; k < c; ++k) {
      double b = 0.0, vv = 0.0;
      block_bt_v(table, k * t, t, b, vv);
      sum_b += b;
      sum_b2 += b * b;
      sum_v += vv;
      sum_v2 += vv * vv;
    }
    const double var_b = (sum_b2 - sum_b * sum_b / c) / (c - 1);
    const double var_v = (sum_v2 - sum_v * sum_v / c) / (c - 1);
    out.mh_se_b_t = std::sqrt(std::max(0.0, var_b) / c);
    out.mh_se_v = std::sqrt(std::max(0.0, var_v) / c);
  }
  return out;
}

XPass run_x_pass(const TemperedPosterior& post, const TrueDistribution& q,
                 const Vector* w0) {
  XPass out;
  const Interval sup = q.support();

  if (post.rep.point_mass) {
    const Vector& mle = post.estimators.w_mle;
    const int m = w0 ? 3 : 1;
    auto integrand = [&](double x, Vector& comp) {
      const double qx = q.density(x);
      const double lm = post.model->log_density(x, mle);
      comp[0] = -qx * lm;
      if (w0) {
        const double f = post.model->log_density(x, *w0) - lm;
        comp[1] = qx * f;
        comp[2] = qx * f * f;
      }
    };
    const VectorIntegralResult res =
        integrate_vector(integrand, m, sup.lo, sup.hi, x_quad_options());
    out.b_g = res.value[0];
    out.g_g = out.b_g;
    if (w0) {
      out.d1 = res.value[1];
      out.d2 = 0.5 * res.value[2];
      out.d3 = out.d2;
      out.has_d = true;
    }
    return out;
  }

  const Matrix& pts = post.rep.points;
  const Array& logw = post.rep.log_weights;
  const Array& wts = post.rep.weights;
  const int m = w0 ? 5 : 2;
  auto integrand = [&](double x, Vector& comp) {
    const double qx = q.density(x);
    const Array lg = post.model->log_density_over_params(x, pts);
    const Array shifted = logw + lg;
    const double mx = shifted.maxCoeff();
    const double logr = mx + std::log((shifted - mx).exp().sum());
    const double e_l = (wts * lg).sum();
    comp[0] = -qx * logr;
    comp[1] = -qx * e_l;
    if (w0) {
      const Array f = post.model->log_density(x, *w0) - lg;
      const double s1 = (wts * f).sum();
      comp[2] = qx * s1;
      comp[3] = 0.5 * qx * (wts * f.square()).sum();
      comp[4] = 0.5 * qx * s1 * s1;
    }
  };
  const VectorIntegralResult res =
      integrate_vector(integrand, m, sup.lo, sup.hi, x_quad_options());
  out.b_g = res.value[0];
  out.g_g = res.value[1];
  if (w0) {
    out.d1 = res.value[2];
    out.d2 = res.value[3];
    out.d3 = res.value[4];
    out.has_d = true;
  }
  return out;
}

}  // namespace

FunctionalBundle evaluate_functionals(const TemperedPosterior& post,
                                      const TrueDistribution& q,
                                      const Vector& w0) {
  FunctionalBundle out;
  const TrainingPass tp = run_training_pass(post, &w0);
  const XPass xp = run_x_pass(post, q, &w0);
  out.b_g = xp.b_g;
  out.g_g = xp.g_g;
  out.b_t = tp.b_t;
  out.g_t = tp.g_t;
  out.v = tp.v;
  out.waic = post.training->n * tp.b_t +
             (std::isinf(post.beta) ? 0.0 : post.beta * tp.v);
  out.d.d1 = xp.d1;
  out.d.d2 = xp.d2;
  out.d.d3 = xp.d3;
  out.d.d4 = tp.d4;
  out.d.d5 = tp.d5;
  out.d.d6 = tp.d6;
  out.mh_se_b_t = tp.mh_se_b_t;
  out.mh_se_v = tp.mh_se_v;
  return out;
}

std::pair<double, double> bayes_losses(const TemperedPosterior& post,
                                       const TrueDistribution& q) {
  const TrainingPass tp = run_training_pass(post, nullptr);
  const XPass xp = run_x_pass(post, q, nullptr);
  return {xp.b_g, tp.b_t};
}

std::pair<double, double> gibbs_losses(const TemperedPosterior& post,
                                       const TrueDistribution& q) {
  const TrainingPass tp = run_training_pass(post, nullptr);
  const XPass xp = run_x_pass(post, q, nullptr);
  return {xp.g_g, tp.g_t};
}

double functional_variance(const TemperedPosterior& post) {
  return run_training_pass(post, nullptr).v;
}

double waic(const TemperedPosterior& post) {
  const TrainingPass tp = run_training_pass(post, nullptr);
  return post.training->n * tp.b_t +
         (std::isinf(post.beta) ? 0.0 : post.beta * tp.v);
}

DTerms d_terms(const TemperedPosterior& post, const TrueDistribution& q,
               const Vector& w0) {
  DTerms d;
  const TrainingPass tp = run_training_pass(post, &w0);
  const XPass xp = run_x_pass(post, q, &w0);
  d.d1 = xp.d1;
  d.d2 = xp.d2;
  d.d3 = xp.d3;
  d.d4 = tp.d4;
  d.d5 = tp.d5;
  d.d6 = tp.d6;
  return d;
}

double bayes_generalization_loss(const TemperedPosterior& post,
                                 const TrueDistribution& q) {
  const Interval sup = q.support();
  if (post.rep.point_mass)
    return log_loss(*post.model, q, post.estimators.w_mle);
  const Matrix& pts = post.rep.points;
  const Array& logw = post.rep.log_weights;
  auto integrand = [&](double x) {
    const Array shifted = logw + post.model->log_density_over_params(x, pts);
    const double mx = shifted.maxCoeff();
    const double logr = mx + std::log((shifted - mx).exp().sum());
    return -q.density(x) * logr;
  };
  return integrate(integrand, sup.lo, sup.hi, x_quad_options()).value;
}

double tic_empirical(const ParametricModel& model, const TrainingSet& ts,
                     const Vector& w_mle) {
  const double n = ts.n;
  const Matrix i_n = model.sum_grad_outer(ts.samples, ts.stats, w_mle) / n;
  const Matrix j_n = -model.sum_hess(ts.samples, ts.stats, w_mle) / n;
  Eigen::FullPivLU<Matrix> lu(j_n);
  if (!lu.isInvertible())
    throw SingularMatrixError("singular_Jn: J_n not invertible at MLE");
  return (i_n * lu.inverse()).trace();
}

}  // namespace eos
