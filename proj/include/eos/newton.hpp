#ifndef EOS_NEWTON_HPP
#define EOS_NEWTON_HPP

#include <functional>

#include "eos/common.hpp"

namespace eos {

// Objective callback: returns the value at w and fills gradient and Hessian.
using Objective =
    std::function<double(const Vector& w, Vector& grad, Matrix& hess)>;

struct NewtonOptions {
  double grad_tol = 1e-8;
  int max_iters = 100;
};

struct NewtonResult {
  Vector w;
  double value = 0.0;
  Vector grad;
  Matrix hess;
  int iters = 0;
  bool converged = false;
};

// Damped Newton descent with Levenberg regularization and projection onto a
// box.  Interior stationary points are located to grad_tol; a point pinned to
// the box face with an inward-pointing gradient also counts as converged.
NewtonResult newton_minimize(const Objective& f, const Vector& w0,
                             const Box& box, const NewtonOptions& opts = {});

}  // namespace eos

#endif  // EOS_NEWTON_HPP
