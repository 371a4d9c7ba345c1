#include "eos/model_zoo.hpp"

#include <cmath>
#include <limits>

#include "eos/loss_geometry.hpp"

namespace eos {

namespace {
constexpr double kHalfLog2Pi = 0.91893853320467274178;
}

// ---------------------------------------------------------------------------
// ParametricModel default bulk paths
// ---------------------------------------------------------------------------

double ParametricModel::sum_log_density(const Array& xs, const SampleStats&,
                                        const Vector& w) const {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < xs.size(); ++i) acc += log_density(xs[i], w);
  return acc;
}

Vector ParametricModel::sum_grad(const Array& xs, const SampleStats&,
                                 const Vector& w) const {
  Vector acc = Vector::Zero(dim());
  for (Eigen::Index i = 0; i < xs.size(); ++i) acc += grad_w(xs[i], w);
  return acc;
}

Matrix ParametricModel::sum_hess(const Array& xs, const SampleStats&,
                                 const Vector& w) const {
  Matrix acc = Matrix::Zero(dim(), dim());
  for (Eigen::Index i = 0; i < xs.size(); ++i) acc += hess_w(xs[i], w);
  return acc;
}

Matrix ParametricModel::sum_grad_outer(const Array& xs, const SampleStats&,
                                       const Vector& w) const {
  Matrix acc = Matrix::Zero(dim(), dim());
  for (Eigen::Index i = 0; i < xs.size(); ++i) {
    Vector g = grad_w(xs[i], w);
    acc.noalias() += g * g.transpose();
  }
  return acc;
}

Array ParametricModel::log_density_array(const Array& xs,
                                         const Vector& w) const {
  Array out(xs.size());
  for (Eigen::Index i = 0; i < xs.size(); ++i) out[i] = log_density(xs[i], w);
  return out;
}

Array ParametricModel::log_density_over_params(double x,
                                               const Matrix& params) const {
  Array out(params.rows());
  for (Eigen::Index g = 0; g < params.rows(); ++g)
    out[g] = log_density(x, params.row(g).transpose());
  return out;
}

// ---------------------------------------------------------------------------
// Gaussian location model: p(x|w) = N(x; w, 1), d = 1
// ---------------------------------------------------------------------------

class GaussLocModel final : public ParametricModel {
 public:
  GaussLocModel() : id_("gauss-loc"), box_(Box::cube(1, 20.0)) {}

  const std::string& id() const override { return id_; }
  int dim() const override { return 1; }
  const Box& param_box() const override { return box_; }

  double log_density(double x, const Vector& w) const override {
    const double r = x - w[0];
    return -kHalfLog2Pi - 0.5 * r * r;
  }
  Vector grad_w(double x, const Vector& w) const override {
    Vector g(1);
    g[0] = x - w[0];
    return g;
  }
  Matrix hess_w(double, const Vector&) const override {
    Matrix h(1, 1);
    h(0, 0) = -1.0;
    return h;
  }

  double sum_log_density(const Array&, const SampleStats& st,
                         const Vector& w) const override {
    const double q = st.s2 - 2.0 * w[0] * st.s1 + st.n * w[0] * w[0];
    return -st.n * kHalfLog2Pi - 0.5 * q;
  }
  Vector sum_grad(const Array&, const SampleStats& st,
                  const Vector& w) const override {
    Vector g(1);
    g[0] = st.s1 - st.n * w[0];
    return g;
  }
  Matrix sum_hess(const Array&, const SampleStats& st,
                  const Vector&) const override {
    Matrix h(1, 1);
    h(0, 0) = -static_cast<double>(st.n);
    return h;
  }
  Matrix sum_grad_outer(const Array&, const SampleStats& st,
                        const Vector& w) const override {
    Matrix m(1, 1);
    m(0, 0) = st.s2 - 2.0 * w[0] * st.s1 + st.n * w[0] * w[0];
    return m;
  }
  Array log_density_array(const Array& xs, const Vector& w) const override {
    return -kHalfLog2Pi - 0.5 * (xs - w[0]).square();
  }
  Array log_density_over_params(double x, const Matrix& params) const override {
    return -kHalfLog2Pi - 0.5 * (x - params.col(0).array()).square();
  }

 private:
  std::string id_;
  Box box_;
};

// ---------------------------------------------------------------------------
// Gaussian scale-location model: p(x|w) = N(x; w1, exp(w2)^2), d = 2
// ---------------------------------------------------------------------------

class GaussScaleLocModel final : public ParametricModel {
 public:
  GaussScaleLocModel() : id_("gauss-scale-loc"), box_(Box::cube(2, 20.0)) {}

  const std::string& id() const override { return id_; }
  int dim() const override { return 2; }
  const Box& param_box() const override { return box_; }

  double log_density(double x, const Vector& w) const override {
    const double r = x - w[0];
    return -w[1] - kHalfLog2Pi - 0.5 * std::exp(-2.0 * w[1]) * r * r;
  }
  Vector grad_w(double x, const Vector& w) const override {
    const double a = std::exp(-2.0 * w[1]);
    const double r = x - w[0];
    Vector g(2);
    g[0] = a * r;
    g[1] = -1.0 + a * r * r;
    return g;
  }
  Matrix hess_w(double x, const Vector& w) const override {
    const double a = std::exp(-2.0 * w[1]);
    const double r = x - w[0];
    Matrix h(2, 2);
    h(0, 0) = -a;
    h(0, 1) = h(1, 0) = -2.0 * a * r;
    h(1, 1) = -2.0 * a * r * r;
    return h;
  }

  double sum_log_density(const Array&, const SampleStats& st,
                         const Vector& w) const override {
    const double q = st.s2 - 2.0 * w[0] * st.s1 + st.n * w[0] * w[0];
    return -st.n * (w[1] + kHalfLog2Pi) - 0.5 * std::exp(-2.0 * w[1]) * q;
  }
  Vector sum_grad(const Array&, const SampleStats& st,
                  const Vector& w) const override {
    const double a = std::exp(-2.0 * w[1]);
    const double m1 = st.s1 - st.n * w[0];
    const double q = st.s2 - 2.0 * w[0] * st.s1 + st.n * w[0] * w[0];
    Vector g(2);
    g[0] = a * m1;
    g[1] = -st.n + a * q;
    return g;
  }
  Matrix sum_hess(const Array&, const SampleStats& st,
                  const Vector& w) const override {
    const double a = std::exp(-2.0 * w[1]);
    const double m1 = st.s1 - st.n * w[0];
    const double q = st.s2 - 2.0 * w[0] * st.s1 + st.n * w[0] * w[0];
    Matrix h(2, 2);
    h(0, 0) = -st.n * a;
    h(0, 1) = h(1, 0) = -2.0 * a * m1;
    h(1, 1) = -2.0 * a * q;
    return h;
  }
  Matrix sum_grad_outer(const Array&, const SampleStats& st,
                        const Vector& w) const override {
    const double a = std::exp(-2.0 * w[1]);
    const double c = w[0];
    const double m1 = st.s1 - st.n * c;
    const double m2 = st.s2 - 2.0 * c * st.s1 + st.n * c * c;
    const double m3 = st.s3 - 3.0 * c * st.s2 + 3.0 * c * c * st.s1 -
                      st.n * c * c * c;
    const double m4 = st.s4 - 4.0 * c * st.s3 + 6.0 * c * c * st.s2 -
                      4.0 * c * c * c * st.s1 + st.n * c * c * c * c;
    Matrix m(2, 2);
    m(0, 0) = a * a * m2;
    m(0, 1) = m(1, 0) = a * a * m3 - a * m1;
    m(1, 1) = a * a * m4 - 2.0 * a * m2 + st.n;
    return m;
  }
  Array log_density_array(const Array& xs, const Vector& w) const override {
    const double a = std::exp(-2.0 * w[1]);
    return -w[1] - kHalfLog2Pi - 0.5 * a * (xs - w[0]).square();
  }
  Array log_density_over_params(double x, const Matrix& params) const override {
    const auto w1 = params.col(0).array();
    const auto w2 = params.col(1).array();
    return -w2 - kHalfLog2Pi - 0.5 * (-2.0 * w2).exp() * (x - w1).square();
  }

 private:
  std::string id_;
  Box box_;
};

// ---------------------------------------------------------------------------
// True distributions
// ---------------------------------------------------------------------------

class GaussTrue final : public TrueDistribution {
 public:
  GaussTrue(double mean, double variance)
      : mean_(mean), var_(variance), sd_(std::sqrt(variance)) {
    id_ = "gauss(" + format_beta(mean) + "," + format_beta(variance) + ")";
  }

  const std::string& id() const override { return id_; }
  double density(double x) const override {
    return std::exp(log_density(x));
  }
  double log_density(double x) const override {
    const double r = x - mean_;
    return -kHalfLog2Pi - std::log(sd_) - 0.5 * r * r / var_;
  }
  Array sample(Rng& rng, int count) const override {
    Array out(count);
    for (int i = 0; i < count; ++i) out[i] = mean_ + sd_ * rng.next_normal();
    return out;
  }
  Interval support() const override {
    return {mean_ - 12.0 * sd_, mean_ + 12.0 * sd_};
  }
  double mean() const override { return mean_; }
  double variance() const override { return var_; }
  double entropy() const override {
    return kHalfLog2Pi + 0.5 + std::log(sd_);
  }

 private:
  std::string id_;
  double mean_, var_, sd_;
};

class LaplaceTrue final : public TrueDistribution {
 public:
  LaplaceTrue(double loc, double scale) : loc_(loc), scale_(scale) {
    id_ = "laplace(" + format_beta(loc) + "," + format_beta(scale) + ")";
  }

  const std::string& id() const override { return id_; }
  double density(double x) const override {
    return 0.5 / scale_ * std::exp(-std::abs(x - loc_) / scale_);
  }
  double log_density(double x) const override {
    return -std::log(2.0 * scale_) - std::abs(x - loc_) / scale_;
  }
  Array sample(Rng& rng, int count) const override {
    Array out(count);
    for (int i = 0; i < count; ++i) {
      const double u = rng.next_unit();
      out[i] = loc_ + (u < 0.5 ? scale_ * std::log(2.0 * u)
                               : -scale_ * std::log(2.0 * (1.0 - u)));
    }
    return out;
  }
  Interval support() const override {
    return {loc_ - 60.0 * scale_, loc_ + 60.0 * scale_};
  }
  double mean() const override { return loc_; }
  double variance() const override { return 2.0 * scale_ * scale_; }
  double entropy() const override { return 1.0 + std::log(2.0 * scale_); }

 private:
  std::string id_;
  double loc_, scale_;
};

// ---------------------------------------------------------------------------
// Prior
// ---------------------------------------------------------------------------

Prior::Prior(double sigma, const Box& box) : sigma_(sigma), box_(box) {
  // Per-coordinate normalizer of the truncated gaussian:
  // Z_i = sigma * sqrt(2*pi) * (Phi(hi/sigma) − Phi(lo/sigma)).
  log_norm_ = 0.0;
  const double sqrt2 = std::sqrt(2.0);
  for (const auto& iv : box_.dims) {
    const double mass = 0.5 * (std::erf(iv.hi / (sigma_ * sqrt2)) -
                               std::erf(iv.lo / (sigma_ * sqrt2)));
    log_norm_ += std::log(sigma_) + 0.5 * std::log(2.0 * M_PI) + std::log(mass);
  }
}

double Prior::log_density(const Vector& w) const {
  if (!box_.contains(w)) return -std::numeric_limits<double>::infinity();
  return -0.5 * w.squaredNorm() / (sigma_ * sigma_) - log_norm_;
}

Vector Prior::grad_log(const Vector& w) const {
  return -w / (sigma_ * sigma_);
}

Matrix Prior::hess_log(const Vector& w) const {
  return -Matrix::Identity(w.size(), w.size()) / (sigma_ * sigma_);
}

// ---------------------------------------------------------------------------
// Scenarios
// ---------------------------------------------------------------------------

std::string to_string(ScenarioTag tag) {
  switch (tag) {
    case ScenarioTag::parametrizable_regular:
      return "parametrizable_regular";
    case ScenarioTag::nonparametrizable_regular:
      return "nonparametrizable_regular";
  }
  return "unknown";
}

void ScenarioCatalog::add(Scenario s) { scenarios_.push_back(std::move(s)); }

const Scenario& ScenarioCatalog::get(const std::string& id) const {
  for (const auto& s : scenarios_)
    if (s.id == id) return s;
  throw Error("unknown scenario id: " + id);
}

bool ScenarioCatalog::contains(const std::string& id) const {
  for (const auto& s : scenarios_)
    if (s.id == id) return true;
  return false;
}

std::shared_ptr<const ParametricModel> make_gauss_loc() {
  static const auto model = std::make_shared<const GaussLocModel>();
  return model;
}

std::shared_ptr<const ParametricModel> make_gauss_scale_loc() {
  static const auto model = std::make_shared<const GaussScaleLocModel>();
  return model;
}

std::shared_ptr<const TrueDistribution> make_gauss_true(double mean,
                                                        double variance) {
  return std::make_shared<const GaussTrue>(mean, variance);
}

std::shared_ptr<const TrueDistribution> make_laplace_true(double loc,
                                                          double scale) {
  return std::make_shared<const LaplaceTrue>(loc, scale);
}

ScenarioCatalog builtin_scenarios() {
  ScenarioCatalog catalog;

  auto loc_scenario = [](const std::string& id, ScenarioTag tag,
                         double true_var) {
    Scenario s;
    s.id = id;
    s.tag = tag;
    s.model = make_gauss_loc();
    s.true_dist = make_gauss_true(0.0, true_var);
    s.prior = std::make_shared<const Prior>(10.0, s.model->param_box());
    s.w0_init = Vector::Constant(1, 1.0);
    return s;
  };

  catalog.add(loc_scenario("gauss-match",
                           ScenarioTag::parametrizable_regular, 1.0));
  catalog.add(loc_scenario("gauss-wide",
                           ScenarioTag::nonparametrizable_regular, 2.0));
  catalog.add(loc_scenario("gauss-narrow",
                           ScenarioTag::nonparametrizable_regular, 0.5));

  Scenario sl;
  sl.id = "gauss-scaleloc-laplace";
  sl.tag = ScenarioTag::nonparametrizable_regular;
  sl.model = make_gauss_scale_loc();
  sl.true_dist = make_laplace_true(0.0, 1.0);
  sl.prior = std::make_shared<const Prior>(10.0, sl.model->param_box());
  sl.w0_init = Vector::Constant(2, 1.0);
  catalog.add(std::move(sl));

  return catalog;
}

ScenarioTag classify_scenario(const ParametricModel& model,
                              const TrueDistribution& true_dist, double tol) {
  const OptimalPoint opt = find_optimal_parameter(
      model, true_dist, Vector::Zero(model.dim()));
  const InformationPair pair = information_matrices(model, true_dist, opt.w0);

  Eigen::SelfAdjointEigenSolver<Matrix> es(pair.J);
  if (es.eigenvalues().minCoeff() <= 1e-8) {
    throw SingularMatrixError(
        "singular_detected: smallest eigenvalue of J(w0) is " +
        std::to_string(es.eigenvalues().minCoeff()));
  }
  const double gap = opt.L_at_w0 - true_dist.entropy();
  return gap <= tol ? ScenarioTag::parametrizable_regular
                    : ScenarioTag::nonparametrizable_regular;
}

}  // namespace eos
