#include "eos/newton.hpp"

#include <cmath>

namespace eos {
namespace {

// Gradient norm with box-boundary components masked out when they point
// outward (those directions are blocked by the projection).
double projected_grad_norm(const Vector& w, const Vector& g, const Box& box) {
  double norm = 0.0;
  for (int i = 0; i < w.size(); ++i) {
    const auto& iv = box.dims[static_cast<size_t>(i)];
    double gi = g[i];
    if (w[i] <= iv.lo && gi > 0.0) gi = 0.0;
    if (w[i] >= iv.hi && gi < 0.0) gi = 0.0;
    norm = std::max(norm, std::abs(gi));
  }
  return norm;
}

}  // namespace

NewtonResult newton_minimize(const Objective& f, const Vector& w0,
                             const Box& box, const NewtonOptions& opts) {
  const int d = static_cast<int>(w0.size());
  NewtonResult res;
  res.w = box.clamp(w0);
  res.grad.resize(d);
  res.hess.resize(d, d);
  res.value = f(res.w, res.grad, res.hess);

  double tau = 0.0;
  for (res.iters = 0; res.iters < opts.max_iters; ++res.iters) {
    if (projected_grad_norm(res.w, res.grad, box) < opts.grad_tol) {
      res.converged = true;
      return res;
    }
    // Solve (H + tau I) s = -g, raising tau until the factorization is
    // positive definite and the step actually decreases the objective.
    bool stepped = false;
    for (int attempt = 0; attempt < 60 && !stepped; ++attempt) {
      Matrix damped = res.hess + tau * Matrix::Identity(d, d);
      Eigen::LDLT<Matrix> ldlt(damped);
      if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
        Vector step = ldlt.solve(-res.grad);
        double t = 1.0;
        for (int bt = 0; bt < 40; ++bt, t *= 0.5) {
          Vector w_try = box.clamp(res.w + t * step);
          if ((w_try - res.w).lpNorm<Eigen::Infinity>() == 0.0) break;
          Vector g_try(d);
          Matrix h_try(d, d);
          const double v_try = f(w_try, g_try, h_try);
          if (std::isfinite(v_try) && v_try <= res.value) {
            res.w = w_try;
            res.value = v_try;
            res.grad = g_try;
            res.hess = h_try;
            stepped = true;
            break;
          }
        }
      }
      if (!stepped) tau = (tau == 0.0) ? 1e-6 : tau * 10.0;
    }
    if (!stepped) break;            // no usable descent direction
    tau = std::max(0.0, tau / 10.0);  // relax damping after a good step
  }

  // Value-based acceptance saturates once the per-step decrease drops below
  // one ulp of f, which can strand the iterate just above grad_tol with the
  // objective frozen. Near a nondegenerate minimum a pure Newton step still
  // contracts the gradient quadratically, so finish with a few unguarded
  // steps judged by gradient norm alone.
  for (int k = 0; k < 3; ++k) {
    const double pg = projected_grad_norm(res.w, res.grad, box);
    if (pg < opts.grad_tol) break;
    Eigen::LDLT<Matrix> ldlt(res.hess);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) break;
    const Vector w_try = box.clamp(res.w + ldlt.solve(-res.grad));
    Vector g_try(d);
    Matrix h_try(d, d);
    const double v_try = f(w_try, g_try, h_try);
    if (!std::isfinite(v_try) ||
        projected_grad_norm(w_try, g_try, box) >= pg)
      break;
    res.w = w_try;
    res.value = v_try;
    res.grad = g_try;
    res.hess = h_try;
  }

  res.converged = projected_grad_norm(res.w, res.grad, box) < opts.grad_tol;
  return res;
}

}  // namespace eos
