#include "eos/loss_geometry.hpp"

#include <algorithm>
#include <cmath>

#include "eos/newton.hpp"
#include "eos/quadrature.hpp"

namespace eos {
namespace {

QuadratureOptions loss_quad_options() {
  QuadratureOptions opts;
  opts.abs_tol = 1e-10;
  opts.rel_tol = 1e-10;
  opts.fail_threshold = 1e-6;
  return opts;
}

// Value, gradient, Hessian of L(w) in a single vector quadrature pass.
double loss_with_derivatives(const ParametricModel& model,
                             const TrueDistribution& q, const Vector& w,
                             Vector& grad, Matrix& hess) {
  const int d = model.dim();
  const int m = 1 + d + d * (d + 1) / 2;
  const Interval sup = q.support();
  auto integrand = [&](double x, Vector& out) {
    const double qx = q.density(x);
    out[0] = qx * model.log_density(x, w);
    const Vector g = model.grad_w(x, w);
    for (int i = 0; i < d; ++i) out[1 + i] = qx * g[i];
    const Matrix h = model.hess_w(x, w);
    int k = 1 + d;
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) out[k++] = qx * h(i, j);
  };
  const VectorIntegralResult res =
      integrate_vector(integrand, m, sup.lo, sup.hi, loss_quad_options());
  grad.resize(d);
  hess.resize(d, d);
  for (int i = 0; i < d; ++i) grad[i] = -res.value[1 + i];
  int k = 1 + d;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      hess(i, j) = hess(j, i) = -res.value[k++];
    }
  return -res.value[0];
}

// Deterministic multistart fractions of the parameter box (first two axes).
constexpr double kStartFractions[8][2] = {
    {0.05, 0.30}, {0.95, 0.70}, {0.25, 0.90}, {0.75, 0.10},
    {0.40, 0.55}, {0.60, 0.45}, {0.15, 0.80}, {0.85, 0.20}};

}  // namespace

double log_loss(const ParametricModel& model, const TrueDistribution& q,
                const Vector& w) {
  const Interval sup = q.support();
  auto integrand = [&](double x) {
    return q.density(x) * model.log_density(x, w);
  };
  return -integrate(integrand, sup.lo, sup.hi, loss_quad_options()).value;
}

OptimalPoint find_optimal_parameter(const ParametricModel& model,
                                    const TrueDistribution& q,
                                    const Vector& init) {
  const int d = model.dim();
  const Box& box = model.param_box();
  if (!box.contains(init))
    throw Error("find_optimal_parameter: init outside param_box");

  Objective objective = [&](const Vector& w, Vector& g, Matrix& h) {
    return loss_with_derivatives(model, q, w, g, h);
  };
  NewtonOptions nopts;
  nopts.grad_tol = 1e-9;
  nopts.max_iters = 100;

  std::vector<Vector> starts;
  starts.push_back(init);
  for (const auto& frac : kStartFractions) {
    Vector s(d);
    for (int i = 0; i < d; ++i) {
      const auto& iv = box.dims[static_cast<size_t>(i)];
      s[i] = iv.lo + iv.width() * frac[i % 2];
    }
    starts.push_back(s);
  }

  std::vector<NewtonResult> converged;
  for (const auto& s : starts) {
    NewtonResult r = newton_minimize(objective, s, box, nopts);
    if (r.converged) converged.push_back(std::move(r));
  }
  if (converged.empty())
    throw ConvergenceError("no_convergence: no start reached gradient tolerance");

  double spread = 0.0;
  for (size_t a = 0; a < converged.size(); ++a)
    for (size_t b = a + 1; b < converged.size(); ++b)
      spread = std::max(
          spread, (converged[a].w - converged[b].w).lpNorm<Eigen::Infinity>());
  if (spread > 1e-4)
    throw ConvergenceError("multiple_minima: multistart spread " +
                           std::to_string(spread));

  const NewtonResult* best = &converged[0];
  for (const auto& r : converged)
    if (r.value < best->value) best = &r;

  OptimalPoint opt;
  opt.w0 = best->w;
  opt.L_at_w0 = best->value;
  opt.grad_norm = best->grad.norm();
  opt.newton_iterations = best->iters;
  return opt;
}

InformationPair information_matrices(const ParametricModel& model,
                                     const TrueDistribution& q,
                                     const Vector& w0) {
  const int d = model.dim();
  const int tri = d * (d + 1) / 2;
  const Interval sup = q.support();
  auto integrand = [&](double x, Vector& out) {
    const double qx = q.density(x);
    const Vector g = model.grad_w(x, w0);
    const Matrix h = model.hess_w(x, w0);
    int k = 0;
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) out[k++] = qx * g[i] * g[j];
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) out[k++] = qx * h(i, j);
  };
  const VectorIntegralResult res =
      integrate_vector(integrand, 2 * tri, sup.lo, sup.hi, loss_quad_options());

  InformationPair pair;
  pair.I.resize(d, d);
  pair.J.resize(d, d);
  int k = 0;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      pair.I(i, j) = pair.I(j, i) = res.value[k++];
    }
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      pair.J(i, j) = pair.J(j, i) = -res.value[k++];
    }
  pair.Q = pair.I - pair.J;
  return pair;
}

AsymptoticConstants asymptotic_constants(const OptimalPoint& optimal,
                                         const InformationPair& pair) {
  const int d = static_cast<int>(pair.J.rows());
  Eigen::SelfAdjointEigenSolver<Matrix> es(pair.J);
  if (es.eigenvalues().minCoeff() <= 1e-8)
    throw SingularMatrixError("singular_J: smallest eigenvalue " +
                              std::to_string(es.eigenvalues().minCoeff()));
  const Matrix a = pair.I * pair.J.inverse();

  AsymptoticConstants c;
  c.S = optimal.L_at_w0;
  c.lambda = 0.5 * d;
  c.tic = a.trace();
  c.nu = 0.5 * c.tic;
  c.mu = 0.5 * (a * a).trace();
  return c;
}

ScenarioConstants compute_scenario_constants(const Scenario& scenario) {
  ScenarioConstants sc;
  sc.optimal =
      find_optimal_parameter(*scenario.model, *scenario.true_dist,
                             scenario.w0_init);
  sc.pair = information_matrices(*scenario.model, *scenario.true_dist,
                                 sc.optimal.w0);
  sc.constants = asymptotic_constants(sc.optimal, sc.pair);
  return sc;
}

}  // namespace eos
