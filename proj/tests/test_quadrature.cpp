#include <doctest.h>

#include <cmath>

#include "eos/newton.hpp"
#include "eos/quadrature.hpp"

using namespace eos;

TEST_CASE("polynomial and trigonometric integrals") {
  auto sq = [](double x) { return x * x; };
  const IntegralResult r1 = integrate(sq, 0.0, 1.0);
  CHECK(std::abs(r1.value - 1.0 / 3.0) < 1e-12);
  CHECK(r1.error_bound < 1e-9);

  const IntegralResult r2 =
      integrate([](double x) { return std::sin(x); }, 0.0, M_PI);
  CHECK(std::abs(r2.value - 2.0) < 1e-10);
}

TEST_CASE("standard normal mass over a wide interval") {
  auto phi = [](double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
  };
  const IntegralResult r = integrate(phi, -10.0, 10.0);
  CHECK(std::abs(r.value - 1.0) < 1e-10);
}

TEST_CASE("oscillatory integrand under a starved budget fails loudly") {
  QuadratureOptions opts;
  opts.max_intervals = 8;
  opts.abs_tol = 1e-14;
  opts.rel_tol = 1e-14;
  opts.fail_threshold = 1e-12;
  auto f = [](double x) { return std::sin(200.0 * x * x); };
  CHECK_THROWS_AS(integrate(f, 0.0, 6.0, opts), QuadratureError);
}

TEST_CASE("vector integrand agrees with per-component scalar runs") {
  auto fv = [](double x, Vector& out) {
    out(0) = std::exp(-x * x);
    out(1) = x * x * std::exp(-x * x);
    out(2) = std::cos(x);
  };
  const VectorIntegralResult rv = integrate_vector(fv, 3, -5.0, 5.0);
  const double g0 = integrate([](double x) { return std::exp(-x * x); },
                              -5.0, 5.0).value;
  const double g1 =
      integrate([](double x) { return x * x * std::exp(-x * x); }, -5.0, 5.0)
          .value;
  const double g2 =
      integrate([](double x) { return std::cos(x); }, -5.0, 5.0).value;
  CHECK(std::abs(rv.value(0) - g0) < 1e-10);
  CHECK(std::abs(rv.value(1) - g1) < 1e-10);
  CHECK(std::abs(rv.value(2) - g2) < 1e-10);
}

TEST_CASE("newton finds an interior quadratic minimum") {
  auto f = [](const Vector& w, Vector& g, Matrix& h) {
    g = Vector(1);
    h = Matrix(1, 1);
    g(0) = 2.0 * (w(0) - 3.0);
    h(0, 0) = 2.0;
    return (w(0) - 3.0) * (w(0) - 3.0);
  };
  const NewtonResult r =
      newton_minimize(f, Vector::Zero(1), Box::cube(1, 10.0));
  CHECK(r.converged);
  CHECK(std::abs(r.w(0) - 3.0) < 1e-8);
}

TEST_CASE("newton handles an anisotropic 2-d bowl") {
  auto f = [](const Vector& w, Vector& g, Matrix& h) {
    const double a = w(0) - 1.0, b = w(1) + 2.0;
    g = Vector(2);
    h = Matrix::Zero(2, 2);
    g(0) = 2.0 * a;
    g(1) = 20.0 * b;
    h(0, 0) = 2.0;
    h(1, 1) = 20.0;
    return a * a + 10.0 * b * b;
  };
  Vector start(2);
  start << 5.0, 5.0;
  const NewtonResult r = newton_minimize(f, start, Box::cube(2, 10.0));
  CHECK(r.converged);
  CHECK(std::abs(r.w(0) - 1.0) < 1e-8);
  CHECK(std::abs(r.w(1) + 2.0) < 1e-8);
}

TEST_CASE("newton pins to the box face when the minimum is outside") {
  auto f = [](const Vector& w, Vector& g, Matrix& h) {
    g = Vector(1);
    h = Matrix(1, 1);
    g(0) = 2.0 * (w(0) + 20.0);
    h(0, 0) = 2.0;
    return (w(0) + 20.0) * (w(0) + 20.0);
  };
  const NewtonResult r =
      newton_minimize(f, Vector::Zero(1), Box::cube(1, 15.0));
  CHECK(r.converged);
  CHECK(r.w(0) == doctest::Approx(-15.0).epsilon(1e-12));
}
