#include "eos/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace eos {
namespace {

// Gauss-Kronrod (G7,K15) abscissae and weights on [-1,1], positive half.
// Index 7 is the center node.
const double kKronrodNodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0};

const double kKronrodWeights[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

// Weights of the embedded 7-point Gauss rule (nodes 1, 3, 5, 7 above).
const double kGaussWeights[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct Segment {
  double a, b;
  double value;
  double error;
};

struct VectorSegment {
  double a, b;
  Vector value;
  double error;
};

// K15 estimate on [a,b] with the |K15 - G7| error proxy.
Segment gk15(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double fv[15];
  for (int i = 0; i < 7; ++i) {
    fv[i] = f(c - h * kKronrodNodes[i]);
    fv[14 - i] = f(c + h * kKronrodNodes[i]);
  }
  fv[7] = f(c);
  double kronrod = kKronrodWeights[7] * fv[7];
  double gauss = kGaussWeights[3] * fv[7];
  for (int i = 0; i < 7; ++i) {
    kronrod += kKronrodWeights[i] * (fv[i] + fv[14 - i]);
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * (fv[i] + fv[14 - i]);
  }
  Segment s;
  s.a = a;
  s.b = b;
  s.value = kronrod * h;
  s.error = std::abs((kronrod - gauss) * h);
  return s;
}

VectorSegment gk15_vector(const std::function<void(double, Vector&)>& f, int m,
                          double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  Vector fx(m);
  Vector kronrod = Vector::Zero(m);
  Vector gauss = Vector::Zero(m);
  for (int i = 0; i < 15; ++i) {
    const int k = i < 8 ? i : 14 - i;
    const double x = i < 8 ? c - h * kKronrodNodes[k] : c + h * kKronrodNodes[k];
    f(x, fx);
    kronrod += kKronrodWeights[k] * fx;
    if (k % 2 == 1) gauss += kGaussWeights[k / 2] * fx;
  }
  VectorSegment s;
  s.a = a;
  s.b = b;
  s.value = kronrod * h;
  s.error = (kronrod - gauss).cwiseAbs().maxCoeff() * h;
  return s;
}

template <typename Seg>
size_t worst_segment(const std::vector<Seg>& segs) {
  size_t worst = 0;
  for (size_t i = 1; i < segs.size(); ++i)
    if (segs[i].error > segs[worst].error) worst = i;
  return worst;
}

[[noreturn]] void fail(double err, double threshold) {
  throw QuadratureError("quadrature error bound " + std::to_string(err) +
                        " exceeds threshold " + std::to_string(threshold));
}

}  // namespace

IntegralResult integrate(const std::function<double(double)>& f, double a,
                         double b, const QuadratureOptions& opts) {
  std::vector<Segment> segs;
  const int n0 = std::max(1, opts.initial_intervals);
  segs.reserve(static_cast<size_t>(opts.max_intervals));
  for (int i = 0; i < n0; ++i) {
    const double sa = a + (b - a) * i / n0;
    const double sb = a + (b - a) * (i + 1) / n0;
    segs.push_back(gk15(f, sa, sb));
  }
  double total = 0.0, err = 0.0;
  auto refresh = [&] {
    total = 0.0;
    err = 0.0;
    for (const auto& s : segs) {
      total += s.value;
      err += s.error;
    }
  };
  refresh();
  while (static_cast<int>(segs.size()) < opts.max_intervals &&
         err > opts.abs_tol && err > opts.rel_tol * std::abs(total)) {
    const size_t w = worst_segment(segs);
    const Segment old = segs[w];
    const double mid = 0.5 * (old.a + old.b);
    segs[w] = gk15(f, old.a, mid);
    segs.push_back(gk15(f, mid, old.b));
    refresh();
  }
  if (err > opts.fail_threshold &&
      err > opts.rel_tol * std::abs(total) * 10.0) {
    fail(err, opts.fail_threshold);
  }
  return {total, err, static_cast<int>(segs.size())};
}

VectorIntegralResult integrate_vector(
    const std::function<void(double, Vector&)>& f, int m, double a, double b,
    const QuadratureOptions& opts) {
  std::vector<VectorSegment> segs;
  const int n0 = std::max(1, opts.initial_intervals);
  segs.reserve(static_cast<size_t>(opts.max_intervals));
  for (int i = 0; i < n0; ++i) {
    const double sa = a + (b - a) * i / n0;
    const double sb = a + (b - a) * (i + 1) / n0;
    segs.push_back(gk15_vector(f, m, sa, sb));
  }
  Vector total = Vector::Zero(m);
  double err = 0.0;
  auto refresh = [&] {
    total.setZero();
    err = 0.0;
    for (const auto& s : segs) {
      total += s.value;
      err += s.error;
    }
  };
  refresh();
  double scale = std::max(1.0, total.cwiseAbs().maxCoeff());
  while (static_cast<int>(segs.size()) < opts.max_intervals &&
         err > opts.abs_tol && err > opts.rel_tol * scale) {
    const size_t w = worst_segment(segs);
    const VectorSegment old = segs[w];
    const double mid = 0.5 * (old.a + old.b);
    segs[w] = gk15_vector(f, m, old.a, mid);
    segs.push_back(gk15_vector(f, m, mid, old.b));
    refresh();
    scale = std::max(1.0, total.cwiseAbs().maxCoeff());
  }
  if (err > opts.fail_threshold && err > opts.rel_tol * scale * 10.0) {
    fail(err, opts.fail_threshold);
  }
  return {total, err, static_cast<int>(segs.size())};
}

}  // namespace eos
