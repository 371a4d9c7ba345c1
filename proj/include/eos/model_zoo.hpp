#ifndef EOS_MODEL_ZOO_HPP
#define EOS_MODEL_ZOO_HPP

#include <memory>
#include <string>
#include <vector>

#include "eos/common.hpp"
#include "eos/rng.hpp"

namespace eos {

// Sufficient statistics of a 1-D sample, enough for the bulk fast paths of
// the gaussian families below.
struct SampleStats {
  int n = 0;
  double s1 = 0.0;  // sum of x
  double s2 = 0.0;  // sum of x^2
  double s3 = 0.0;  // sum of x^3
  double s4 = 0.0;  // sum of x^4

  static SampleStats of(const Array& xs) {
    SampleStats st;
    st.n = static_cast<int>(xs.size());
    st.s1 = xs.sum();
    st.s2 = xs.square().sum();
    st.s3 = xs.cube().sum();
    st.s4 = xs.square().square().sum();
    return st;
  }
};

// Parametric density p(x|w) for scalar data x and parameter w of dimension d.
class ParametricModel {
 public:
  virtual ~ParametricModel() = default;

  virtual const std::string& id() const = 0;
  virtual int dim() const = 0;
  virtual const Box& param_box() const = 0;

  virtual double log_density(double x, const Vector& w) const = 0;
  virtual Vector grad_w(double x, const Vector& w) const = 0;
  virtual Matrix hess_w(double x, const Vector& w) const = 0;

  // Bulk paths; the base versions loop, subclasses override with
  // sufficient-statistic or vectorized forms.
  virtual double sum_log_density(const Array& xs, const SampleStats& st,
                                 const Vector& w) const;
  virtual Vector sum_grad(const Array& xs, const SampleStats& st,
                          const Vector& w) const;
  virtual Matrix sum_hess(const Array& xs, const SampleStats& st,
                          const Vector& w) const;
  // Sum over samples of the score outer product at w.
  virtual Matrix sum_grad_outer(const Array& xs, const SampleStats& st,
                                const Vector& w) const;
  // log p(x_i|w) for all samples at a fixed parameter.
  virtual Array log_density_array(const Array& xs, const Vector& w) const;
  // log p(x|w_g) for one x over many parameter points (rows of `params`).
  virtual Array log_density_over_params(double x, const Matrix& params) const;
};

// True data-generating distribution with analytic density and sampler.
class TrueDistribution {
 public:
  virtual ~TrueDistribution() = default;

  virtual const std::string& id() const = 0;
  virtual double density(double x) const = 0;
  virtual double log_density(double x) const = 0;
  virtual Array sample(Rng& rng, int count) const = 0;
  virtual Interval support() const = 0;
  virtual double mean() const = 0;
  virtual double variance() const = 0;
  // Differential entropy −∫ q log q, available analytically for both
  // built-in families.
  virtual double entropy() const = 0;
};

// Gaussian prior with standard deviation sigma per coordinate, truncated to
// the box (and renormalized, so it stays proper).
class Prior {
 public:
  Prior(double sigma, const Box& box);

  double log_density(const Vector& w) const;
  Vector grad_log(const Vector& w) const;
  Matrix hess_log(const Vector& w) const;
  bool proper() const { return true; }
  const Box& box() const { return box_; }
  double sigma() const { return sigma_; }

 private:
  double sigma_;
  Box box_;
  double log_norm_;  // total log normalizer over the box
};

enum class ScenarioTag {
  parametrizable_regular,
  nonparametrizable_regular,
};

std::string to_string(ScenarioTag tag);

struct Scenario {
  std::string id;
  ScenarioTag tag;
  std::shared_ptr<const ParametricModel> model;
  std::shared_ptr<const TrueDistribution> true_dist;
  std::shared_ptr<const Prior> prior;
  Vector w0_init;  // deterministic starting point for the w0 search
};

class ScenarioCatalog {
 public:
  void add(Scenario s);
  const Scenario& get(const std::string& id) const;  // throws Error if absent
  bool contains(const std::string& id) const;
  const std::vector<Scenario>& all() const { return scenarios_; }

 private:
  std::vector<Scenario> scenarios_;
};

// The four standard scenarios: gauss-match, gauss-wide, gauss-narrow
// (location model against N(0,{1,2,1/2})) and gauss-scaleloc-laplace
// (2-parameter gaussian against Laplace(0,1)).
ScenarioCatalog builtin_scenarios();

// Model/true-distribution factories (also used to build ad-hoc scenarios in
// tests).
std::shared_ptr<const ParametricModel> make_gauss_loc();
std::shared_ptr<const ParametricModel> make_gauss_scale_loc();
std::shared_ptr<const TrueDistribution> make_gauss_true(double mean,
                                                        double variance);
std::shared_ptr<const TrueDistribution> make_laplace_true(double loc,
                                                          double scale);

// Decides the tag from the computed loss gap L(w0) − entropy(q) and the
// positive definiteness of J(w0).  Throws SingularMatrixError
// ("singular_detected") when the smallest eigenvalue of J(w0) is ≤ 1e−8.
ScenarioTag classify_scenario(const ParametricModel& model,
                              const TrueDistribution& true_dist, double tol);

}  // namespace eos

#endif  // EOS_MODEL_ZOO_HPP
