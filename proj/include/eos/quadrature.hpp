#ifndef EOS_QUADRATURE_HPP
#define EOS_QUADRATURE_HPP

#include <functional>

#include "eos/common.hpp"

namespace eos {

struct QuadratureOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-9;
  int initial_intervals = 8;
  int max_intervals = 4000;
  // Estimated error bound above this throws QuadratureError.
  double fail_threshold = 1e-6;
};

struct IntegralResult {
  double value = 0.0;
  double error_bound = 0.0;
  int intervals = 0;
};

struct VectorIntegralResult {
  Vector value;
  double error_bound = 0.0;
  int intervals = 0;
};

// Adaptive Gauss-Kronrod (G7,K15) on a finite interval.  Bisects the segment
// with the largest error estimate until tolerances are met.
IntegralResult integrate(const std::function<double(double)>& f, double a,
                         double b, const QuadratureOptions& opts = {});

// Same scheme for an m-component integrand evaluated in one pass; the
// subdivision is driven by the worst component error.
VectorIntegralResult integrate_vector(
    const std::function<void(double, Vector&)>& f, int m, double a, double b,
    const QuadratureOptions& opts = {});

}  // namespace eos

#endif  // EOS_QUADRATURE_HPP
