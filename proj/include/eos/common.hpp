#ifndef EOS_COMMON_HPP
#define EOS_COMMON_HPP

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace eos {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Array = Eigen::ArrayXd;

// Closed interval on the real line.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
  double mid() const { return 0.5 * (lo + hi); }
  bool contains(double x) const { return x >= lo && x <= hi; }
};

// Axis-aligned box of per-coordinate bounds for the parameter space.
struct Box {
  std::vector<Interval> dims;

  static Box cube(int d, double half_width) {
    Box b;
    b.dims.assign(static_cast<size_t>(d), Interval{-half_width, half_width});
    return b;
  }
  int dim() const { return static_cast<int>(dims.size()); }
  bool contains(const Vector& w) const {
    for (int i = 0; i < w.size(); ++i)
      if (!dims[static_cast<size_t>(i)].contains(w[i])) return false;
    return true;
  }
  Vector clamp(const Vector& w) const {
    Vector out = w;
    for (int i = 0; i < w.size(); ++i) {
      const auto& iv = dims[static_cast<size_t>(i)];
      out[i] = std::min(std::max(out[i], iv.lo), iv.hi);
    }
    return out;
  }
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Estimated quadrature error bound exceeded the acceptable threshold.
class QuadratureError : public Error {
 public:
  using Error::Error;
};

// Newton/multistart failure: no_convergence or multiple_minima.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// Matrix with eigenvalue at or below the regularity threshold where a
// positive definite one is required (singular_J, singular_Jn, singular_detected).
class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

// Posterior backend failed its own diagnostics (backend_unconverged).
class BackendError : public Error {
 public:
  using Error::Error;
};

// Config file problems; carries a line number when one applies.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& msg, int line = 0) : Error(msg), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace eos

#endif  // EOS_COMMON_HPP
