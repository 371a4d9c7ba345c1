#include "eos/posterior_engine.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "eos/newton.hpp"
#include "eos/rng.hpp"

namespace eos {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double logsumexp(const Array& a) {
  const double m = a.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((a - m).exp().sum());
}

// Value/gradient/Hessian of L_n at w, using the model's bulk fast paths.
double ln_value(const ParametricModel& model, const Prior& prior,
                const TrainingSet& ts, double beta, const Vector& w,
                Vector* grad, Matrix* hess) {
  const double n = ts.n;
  double value = -model.sum_log_density(ts.samples, ts.stats, w) / n;
  if (grad) *grad = -model.sum_grad(ts.samples, ts.stats, w) / n;
  if (hess) *hess = -model.sum_hess(ts.samples, ts.stats, w) / n;
  if (!std::isinf(beta)) {
    const double scale = 1.0 / (n * beta);
    value -= scale * prior.log_density(w);
    if (grad) *grad -= scale * prior.grad_log(w);
    if (hess) *hess -= scale * prior.hess_log(w);
  }
  return value;
}

Vector newton_fit(const ParametricModel& model, const Prior& prior,
                  const TrainingSet& ts, double beta, const Vector& start,
                  double* value_out) {
  Objective obj = [&](const Vector& w, Vector& g, Matrix& h) {
    return ln_value(model, prior, ts, beta, w, &g, &h);
  };
  NewtonOptions opts;
  opts.grad_tol = 1e-9;
  NewtonResult res =
      newton_minimize(obj, model.param_box().clamp(start), model.param_box(), opts);
  if (!res.converged)
    throw ConvergenceError("no_convergence: estimator Newton failed at n=" +
                           std::to_string(ts.n));
  if (value_out) *value_out = res.value;
  return res.w;
}

// Laplace posterior standard deviations sqrt(diag(K_n^-1)/(n beta)).
Vector laplace_sds(const Matrix& k_n, int n, double beta) {
  Eigen::LDLT<Matrix> ldlt(k_n);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
    throw SingularMatrixError(
        "singular_Kn: empirical curvature not positive definite at MAP");
  const Matrix cov = ldlt.solve(Matrix::Identity(k_n.rows(), k_n.cols())) /
                     (static_cast<double>(n) * beta);
  return cov.diagonal().cwiseMax(0.0).cwiseSqrt();
}

void build_grid(const ParametricModel& model, const Prior& prior,
                const TrainingSet& ts, double beta, const GridConfig& cfg,
                const EstimatorPair& est, const Matrix& k_n,
                PosteriorRep& rep) {
  const int d = model.dim();
  const Box& box = model.param_box();
  const Vector sds = laplace_sds(k_n, ts.n, beta);

  std::vector<Array> axes(static_cast<size_t>(d));
  const int nodes = cfg.nodes_per_dim;
  for (int i = 0; i < d; ++i) {
    const auto& iv = box.dims[static_cast<size_t>(i)];
    const double lo = std::max(iv.lo, est.w_map[i] - cfg.span_sds * sds[i]);
    const double hi = std::min(iv.hi, est.w_map[i] + cfg.span_sds * sds[i]);
    axes[static_cast<size_t>(i)] = Array::LinSpaced(nodes, lo, hi);
  }

  long total = 1;
  for (int i = 0; i < d; ++i) total *= nodes;
  rep.points.resize(total, d);
  Array logw(total);

  // Row-major walk over the product grid; trapezoid end weights per axis.
  std::vector<int> idx(static_cast<size_t>(d), 0);
  Vector w(d);
  for (long r = 0; r < total; ++r) {
    double log_trap = 0.0;
    long rem = r;
    for (int i = d - 1; i >= 0; --i) {
      idx[static_cast<size_t>(i)] = static_cast<int>(rem % nodes);
      rem /= nodes;
    }
    for (int i = 0; i < d; ++i) {
      const int k = idx[static_cast<size_t>(i)];
      w[i] = axes[static_cast<size_t>(i)][k];
      if (k == 0 || k == nodes - 1) log_trap += std::log(0.5);
    }
    rep.points.row(r) = w.transpose();
    logw[r] = beta * model.sum_log_density(ts.samples, ts.stats, w) +
              prior.log_density(w) + log_trap;
  }

  const double lse = logsumexp(logw);
  rep.log_weights = logw - lse;
  rep.weights = rep.log_weights.exp();
}

struct ChainDiag {
  double accept_rate = 0.0;
};

void build_metropolis(const ParametricModel& model, const Prior& prior,
                      const TrainingSet& ts, double beta,
                      const MetropolisConfig& cfg, const EstimatorPair& est,
                      const Matrix& k_n, PosteriorRep& rep) {
  const int d = model.dim();
  const Box& box = model.param_box();
  const Vector sds = laplace_sds(k_n, ts.n, beta);
  const double target = d == 1 ? 0.44 : 0.35;

  auto log_target = [&](const Vector& w) {
    if (!box.contains(w)) return -kInf;
    return beta * model.sum_log_density(ts.samples, ts.stats, w) +
           prior.log_density(w);
  };

  const int kept_per_chain = cfg.steps / cfg.thin;
  const long total = static_cast<long>(cfg.chains) * kept_per_chain;
  rep.points.resize(total, d);
  double accepted_post = 0.0;

  for (int c = 0; c < cfg.chains; ++c) {
    Rng rng(derive_seed(ts.seed, "mh-chain-" + std::to_string(c)));
    Vector w(d);
    for (int i = 0; i < d; ++i)
      w[i] = est.w_map[i] + 0.5 * sds[i] * rng.next_normal();
    w = box.clamp(w);
    double lw = log_target(w);

    double log_scale = std::log(cfg.proposal_scale / std::sqrt(double(d)));
    int window_accepts = 0;
    int window = 0;
    Vector prop(d);

    // Burn-in with Robbins-Monro adaptation of the proposal scale,
    // frozen afterwards so the kept draws form a proper Markov chain.
    for (int t = 0; t < cfg.burn_in + cfg.steps; ++t) {
      const double scale = std::exp(log_scale);
      for (int i = 0; i < d; ++i)
        prop[i] = w[i] + scale * sds[i] * rng.next_normal();
      const double lp = log_target(prop);
      bool accept = false;
      if (lp > -kInf) {
        const double delta = lp - lw;
        accept = delta >= 0.0 || std::log(rng.next_unit()) < delta;
      }
      if (accept) {
        w = prop;
        lw = lp;
      }
      if (t < cfg.burn_in) {
        window_accepts += accept ? 1 : 0;
        if (++window == 50) {
          const int k = t / 50 + 1;
          log_scale += (double(window_accepts) / 50.0 - target) /
                       std::sqrt(double(k));
          window_accepts = 0;
          window = 0;
        }
      } else {
        accepted_post += accept ? 1.0 : 0.0;
        const int s = t - cfg.burn_in;
        if ((s + 1) % cfg.thin == 0) {
          const long row =
              static_cast<long>(c) * kept_per_chain + s / cfg.thin;
          rep.points.row(row) = w.transpose();
        }
      }
    }
  }

  rep.chains = cfg.chains;
  rep.draws_per_chain = kept_per_chain;
  rep.accept_rate =
      accepted_post / (static_cast<double>(cfg.chains) * cfg.steps);
  rep.weights = Array::Constant(total, 1.0 / static_cast<double>(total));
  rep.log_weights = Array::Constant(total, -std::log(double(total)));

  // Split R-hat over each coordinate of the kept draws.
  const int half = kept_per_chain / 2;
  const int m = 2 * cfg.chains;
  double worst = 1.0;
  for (int i = 0; i < d; ++i) {
    std::vector<double> means, vars;
    means.reserve(m);
    vars.reserve(m);
    for (int c = 0; c < cfg.chains; ++c) {
      for (int h = 0; h < 2; ++h) {
        const long off = static_cast<long>(c) * kept_per_chain + h * half;
        const auto seg = rep.points.col(i).segment(off, half).array();
        const double mu = seg.mean();
        means.push_back(mu);
        vars.push_back((seg - mu).square().sum() / (half - 1));
      }
    }
    double mean_all = 0.0;
    for (double mu : means) mean_all += mu;
    mean_all /= m;
    double b = 0.0, wvar = 0.0;
    for (int k = 0; k < m; ++k) {
      b += (means[static_cast<size_t>(k)] - mean_all) *
           (means[static_cast<size_t>(k)] - mean_all);
      wvar += vars[static_cast<size_t>(k)];
    }
    b *= static_cast<double>(half) / (m - 1);
    wvar /= m;
    if (wvar <= 0.0) continue;
    const double var_plus = (half - 1.0) / half * wvar + b / half;
    worst = std::max(worst, std::sqrt(var_plus / wvar));
  }
  rep.r_hat = worst;

  if (rep.accept_rate < 0.15 || rep.accept_rate > 0.6)
    throw BackendError("backend_unconverged: acceptance rate " +
                       std::to_string(rep.accept_rate));
  if (rep.r_hat > 1.05)
    throw BackendError("backend_unconverged: split R-hat " +
                       std::to_string(rep.r_hat));
}

}  // namespace

TrainingSet make_training_set(const Scenario& scenario, int n, uint64_t seed) {
  TrainingSet ts;
  ts.n = n;
  ts.seed = seed;
  ts.scenario_id = scenario.id;
  Rng rng(seed);
  ts.samples = scenario.true_dist->sample(rng, n);
  ts.stats = SampleStats::of(ts.samples);
  return ts;
}

double empirical_loss(const ParametricModel& model, const Prior& prior,
                      const TrainingSet& ts, double beta, const Vector& w) {
  return ln_value(model, prior, ts, beta, w, nullptr, nullptr);
}

EstimatorPair fit_estimators(const ParametricModel& model, const Prior& prior,
                             const TrainingSet& ts, double beta,
                             const Vector& start) {
  if (ts.n < model.dim() + 1)
    throw Error("fit_estimators: need n >= d + 1");
  EstimatorPair est;
  est.w_mle = newton_fit(model, prior, ts, kInf, start, nullptr);
  if (std::isinf(beta)) {
    est.w_map = est.w_mle;
    est.L_n_at_map = empirical_loss(model, prior, ts, beta, est.w_map);
  } else {
    double value = 0.0;
    est.w_map = newton_fit(model, prior, ts, beta, start, &value);
    est.L_n_at_map = value;
  }
  return est;
}

EmpiricalMatrices empirical_matrices(const ParametricModel& model,
                                     const Prior& prior, const TrainingSet& ts,
                                     double beta, const Vector& w) {
  const double n = ts.n;
  EmpiricalMatrices mats;
  mats.I_n = model.sum_grad_outer(ts.samples, ts.stats, w) / n;
  mats.J_n = -model.sum_hess(ts.samples, ts.stats, w) / n;
  mats.K_n = mats.J_n;
  if (!std::isinf(beta)) mats.K_n -= prior.hess_log(w) / (n * beta);
  return mats;
}

TemperedPosterior make_posterior(const ParametricModel& model,
                                 const Prior& prior, const TrainingSet& ts,
                                 double beta, const BackendConfig& backend,
                                 const Vector& newton_start) {
  TemperedPosterior post;
  post.model = &model;
  post.prior = &prior;
  post.training = &ts;
  post.beta = beta;
  post.backend = backend;
  post.estimators = fit_estimators(model, prior, ts, beta, newton_start);
  post.k_n_at_map =
      empirical_matrices(model, prior, ts, beta, post.estimators.w_map).K_n;

  if (std::isinf(beta)) {
    post.rep.point_mass = true;
    post.rep.points = post.estimators.w_mle.transpose();
    post.rep.weights = Array::Constant(1, 1.0);
    post.rep.log_weights = Array::Constant(1, 0.0);
    return post;
  }

  if (backend.kind == BackendKind::grid_quadrature) {
    build_grid(model, prior, ts, beta, backend.grid, post.estimators,
               post.k_n_at_map, post.rep);
  } else {
    build_metropolis(model, prior, ts, beta, backend.metropolis,
                     post.estimators, post.k_n_at_map, post.rep);
  }
  return post;
}

double posterior_expectation(const TemperedPosterior& post,
                             const std::function<double(const Vector&)>& g) {
  if (post.rep.point_mass) return g(post.estimators.w_mle);
  double acc = 0.0;
  for (long r = 0; r < post.rep.points.rows(); ++r)
    acc += post.rep.weights[r] * g(post.rep.points.row(r).transpose());
  return acc;
}

PosteriorMoments posterior_moments(const TemperedPosterior& post,
                                   const Vector& w0) {
  const int d = post.dim();
  const Vector& map = post.estimators.w_map;
  PosteriorMoments mom;
  mom.m1 = Vector::Zero(d);
  mom.m2 = Matrix::Zero(d, d);
  mom.s2 = Matrix::Zero(d, d);

  if (post.rep.point_mass) {
    const Vector dv = post.estimators.w_mle - w0;
    mom.s2 = dv * dv.transpose();
    return mom;
  }

  const Matrix& pts = post.rep.points;
  const Array& wts = post.rep.weights;
  for (int i = 0; i < d; ++i) {
    const Array di = pts.col(i).array() - map[i];
    mom.m1[i] = (wts * di).sum();
    const Array ei = pts.col(i).array() - w0[i];
    for (int j = i; j < d; ++j) {
      const Array dj = pts.col(j).array() - map[j];
      mom.m2(i, j) = mom.m2(j, i) = (wts * di * dj).sum();
      const Array ej = pts.col(j).array() - w0[j];
      mom.s2(i, j) = mom.s2(j, i) = (wts * ei * ej).sum();
    }
  }
  Array norm2 = Array::Zero(pts.rows());
  for (int i = 0; i < d; ++i)
    norm2 += (pts.col(i).array() - map[i]).square();
  mom.m3 = (wts * norm2 * norm2.sqrt()).sum();
  return mom;
}

}  // namespace eos
