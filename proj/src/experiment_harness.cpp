#include "eos/experiment_harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <thread>

#include "eos/rng.hpp"

namespace eos {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

int worker_count(long total) {
  long w = 0;
  if (const char* env = std::getenv("EOS_WORKERS")) {
    if (*env) w = std::strtol(env, nullptr, 10);
  }
  if (w <= 0) w = static_cast<long>(std::thread::hardware_concurrency());
  if (w <= 0) w = 1;
  w = std::min<long>(w, 64);
  w = std::max<long>(1, std::min(w, total));
  return static_cast<int>(w);
}

// Runs body(t) for t in [0, total) over a worker pool.  Each task writes to
// its own output slot, so results are independent of the worker count.
void parallel_for(long total, const std::function<void(long)>& body,
                  const ProgressFn& progress) {
  if (total <= 0) return;
  const int workers = worker_count(total);
  if (workers == 1) {
    for (long t = 0; t < total; ++t) {
      body(t);
      if (progress) progress(t + 1, total);
    }
    return;
  }
  std::atomic<long> next{0};
  std::atomic<long> done{0};
  auto run = [&] {
    for (;;) {
      const long t = next.fetch_add(1);
      if (t >= total) return;
      body(t);
      done.fetch_add(1);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int i = 0; i < workers; ++i) pool.emplace_back(run);
  if (progress) {
    long last = -1;
    while (done.load() < total) {
      const long now = done.load();
      if (now != last) {
        progress(now, total);
        last = now;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(200));
    }
  }
  for (auto& th : pool) th.join();
  if (progress) progress(total, total);
}

std::string status_tag(const std::exception& e) {
  if (dynamic_cast<const QuadratureError*>(&e)) return "quadrature_failure";
  if (dynamic_cast<const BackendError*>(&e)) return "backend_unconverged";
  const std::string what = e.what();
  const auto colon = what.find(':');
  if (colon != std::string::npos && colon > 0) {
    const std::string tag = what.substr(0, colon);
    if (tag.find(' ') == std::string::npos) return tag;
  }
  return "error";
}

FieldStats make_stats(const std::vector<double>& xs) {
  FieldStats s;
  const size_t k = xs.size();
  if (k == 0) {
    s.mean = kNaN;
    s.se = kNaN;
    return s;
  }
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(k);
  if (k < 2) {
    s.se = 0.0;
    return s;
  }
  double ss = 0.0;
  for (double x : xs) {
    const double dlt = x - s.mean;
    ss += dlt * dlt;
  }
  const double var = ss / static_cast<double>(k - 1);
  s.se = std::sqrt(var / static_cast<double>(k));
  return s;
}

double sample_sd(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const FieldStats s = make_stats(xs);
  return s.se * std::sqrt(static_cast<double>(xs.size()));
}

double rms_of(const std::vector<double>& xs) {
  if (xs.empty()) return kNaN;
  double ss = 0.0;
  for (double x : xs) ss += x * x;
  return std::sqrt(ss / static_cast<double>(xs.size()));
}

std::string beta_label(double beta) { return format_beta(beta); }

std::string n_label(int n) { return std::to_string(n); }

// |observed − predicted| ≤ multiplier · se.
Verdict noise_check(const std::string& name, double observed, double predicted,
                    double se, double multiplier, const std::string& note = "") {
  Verdict v;
  v.name = name;
  v.observed = observed;
  v.predicted = predicted;
  v.se = se;
  v.multiplier = multiplier;
  const bool ok = std::isfinite(observed) && std::isfinite(se) &&
                  std::abs(observed - predicted) <= multiplier * se;
  v.status = ok ? "pass" : "fail";
  v.pass = ok;
  v.note = note;
  return v;
}

// Same, but first validates the Monte Carlo error budget: when the predicted
// deviation (leading 1/n term) is nonzero, the check only counts if
// se < |term|/3; otherwise it reports insufficient_precision.
Verdict guarded_check(const std::string& name, double observed,
                      double predicted, double se, double multiplier,
                      double leading_term, const std::string& note = "") {
  if (leading_term != 0.0 && std::isfinite(se) &&
      !(se < std::abs(leading_term) / 3.0)) {
    Verdict v;
    v.name = name;
    v.observed = observed;
    v.predicted = predicted;
    v.se = se;
    v.multiplier = multiplier;
    v.status = "insufficient_precision";
    v.pass = true;
    v.note = "SE exceeds a third of the predicted deviation " +
             std::to_string(leading_term) + "; larger R required" +
             (note.empty() ? "" : "; " + note);
    return v;
  }
  return noise_check(name, observed, predicted, se, multiplier, note);
}

// Residual-decay check across the n grid.  If every residual is within the
// noise floor (multiplier·SE) the decay is confirmed as statistically zero.
// Otherwise the terminal residual must have shrunk below
// max(multiplier·SE_last, R1 · (n_last/n_first)^-min_exponent), where R1 is
// the first residual's upper bound (its value or its own noise floor,
// whichever is larger).  An endpoint bound is used instead of a fitted
// log-log slope because points inside their noise floor would otherwise
// feed pure sampling noise into the fit.
Verdict decay_check(const std::string& name, const std::vector<double>& ns,
                    const std::vector<double>& resids,
                    const std::vector<double>& ses, double multiplier,
                    double min_exponent) {
  Verdict v;
  v.name = name;
  v.multiplier = multiplier;
  if (ns.size() < 3) {
    v.status = "insufficient_precision";
    v.pass = true;
    v.note = "decay check needs >= 3 n values, got " +
             std::to_string(ns.size());
    return v;
  }
  double max_z = 0.0;
  bool floored = true;
  for (size_t i = 0; i < ns.size(); ++i) {
    const double z = ses[i] > 0 ? std::abs(resids[i]) / ses[i]
                                : (resids[i] == 0.0 ? 0.0 : kNaN);
    if (!(z <= multiplier)) floored = false;
    if (std::isfinite(z)) max_z = std::max(max_z, z);
  }
  if (floored) {
    v.observed = max_z;
    v.predicted = 0.0;
    v.se = 1.0;
    v.status = "pass";
    v.pass = true;
    v.note = "all residuals within the multiplier*SE noise floor";
    return v;
  }
  const double first_bound =
      std::max(std::abs(resids.front()), multiplier * ses.front());
  const double shrink = std::pow(ns.back() / ns.front(), -min_exponent);
  const double bound = std::max(multiplier * ses.back(), first_bound * shrink);
  v.observed = std::abs(resids.back());
  v.predicted = bound;
  v.se = ses.back();
  v.pass = v.observed <= bound;
  v.status = v.pass ? "pass" : "fail";
  std::string slope_note;
  bool positive = true;
  for (double r : resids)
    if (std::abs(r) <= 0.0) positive = false;
  if (positive) {
    std::vector<double> ys(resids.size());
    for (size_t i = 0; i < resids.size(); ++i) ys[i] = std::abs(resids[i]);
    slope_note = "; log-log slope = " +
                 std::to_string(fit_loglog(name, ns, ys).slope);
  }
  v.note = "terminal |residual| vs decay bound, min exponent " +
           std::to_string(min_exponent) + slope_note;
  return v;
}

// pass iff |slope − target| ≤ window; encoded with se = window, mult = 1.
Verdict band_check(const std::string& name, const ScalingFit& fit,
                   double target, double window) {
  Verdict v = noise_check(name, fit.slope, target, window, 1.0);
  v.note = "slope window +-" + std::to_string(window) +
           "; OLS slope SE = " + std::to_string(fit.slope_se);
  return v;
}

std::vector<double> finite_betas(const std::vector<double>& betas) {
  std::vector<double> out;
  for (double b : betas)
    if (std::isfinite(b)) out.push_back(b);
  return out;
}

struct CellView {
  std::vector<const ReplicationRow*> ok;
  long errors = 0;
};

// Groups ok rows by (n, beta) preserving the first-seen order of cells.
struct RowIndex {
  std::vector<std::pair<int, double>> keys;
  std::vector<CellView> cells;
  std::vector<int> ns;       // distinct n, ascending
  std::vector<double> betas; // distinct beta, first-seen order

  const CellView* find(int n, double beta) const {
    for (size_t i = 0; i < keys.size(); ++i)
      if (keys[i].first == n &&
          format_beta(keys[i].second) == format_beta(beta))
        return &cells[i];
    return nullptr;
  }
};

RowIndex index_rows(const std::vector<ReplicationRow>& rows) {
  RowIndex idx;
  for (const auto& row : rows) {
    size_t slot = idx.keys.size();
    for (size_t i = 0; i < idx.keys.size(); ++i) {
      if (idx.keys[i].first == row.n &&
          format_beta(idx.keys[i].second) == format_beta(row.beta)) {
        slot = i;
        break;
      }
    }
    if (slot == idx.keys.size()) {
      idx.keys.emplace_back(row.n, row.beta);
      idx.cells.emplace_back();
    }
    if (row.ok())
      idx.cells[slot].ok.push_back(&row);
    else
      idx.cells[slot].errors++;
  }
  for (const auto& k : idx.keys) {
    if (std::find(idx.ns.begin(), idx.ns.end(), k.first) == idx.ns.end())
      idx.ns.push_back(k.first);
    bool seen = false;
    for (double b : idx.betas)
      if (format_beta(b) == format_beta(k.second)) seen = true;
    if (!seen) idx.betas.push_back(k.second);
  }
  std::sort(idx.ns.begin(), idx.ns.end());
  return idx;
}

std::vector<double> collect(const CellView& cell,
                            const std::function<double(const ReplicationRow&)>& f) {
  std::vector<double> out;
  out.reserve(cell.ok.size());
  for (const auto* r : cell.ok) out.push_back(f(*r));
  return out;
}

Matrix solve_spd_inverse(const Matrix& a) {
  const int d = static_cast<int>(a.rows());
  Eigen::LDLT<Matrix> ldlt(a);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
    throw SingularMatrixError("singular_Kn: Laplace curvature not positive definite");
  return ldlt.solve(Matrix::Identity(d, d));
}

}  // namespace

const AggregateCell* AggregateReport::find(int n, double beta) const {
  for (const auto& cell : cells)
    if (cell.n == n && format_beta(cell.beta) == format_beta(beta))
      return &cell;
  return nullptr;
}

ScalingFit fit_loglog(const std::string& quantity,
                      const std::vector<double>& n_values,
                      const std::vector<double>& rms) {
  if (n_values.size() != rms.size() || n_values.size() < 3)
    throw Error("insufficient_points: log-log fit needs >= 3 points, got " +
                std::to_string(n_values.size()));
  ScalingFit fit;
  fit.quantity = quantity;
  fit.n_values = n_values;
  fit.rms = rms;
  const size_t k = n_values.size();
  std::vector<double> xs(k), ys(k);
  for (size_t i = 0; i < k; ++i) {
    if (!(rms[i] > 0.0) || !std::isfinite(rms[i]))
      throw Error("insufficient_points: nonpositive RMS value in log-log fit");
    xs[i] = std::log(n_values[i]);
    ys[i] = std::log(rms[i]);
  }
  double xbar = 0, ybar = 0;
  for (size_t i = 0; i < k; ++i) {
    xbar += xs[i];
    ybar += ys[i];
  }
  xbar /= static_cast<double>(k);
  ybar /= static_cast<double>(k);
  double sxx = 0, sxy = 0;
  for (size_t i = 0; i < k; ++i) {
    sxx += (xs[i] - xbar) * (xs[i] - xbar);
    sxy += (xs[i] - xbar) * (ys[i] - ybar);
  }
  fit.slope = sxy / sxx;
  const double intercept = ybar - fit.slope * xbar;
  double rss = 0;
  for (size_t i = 0; i < k; ++i) {
    const double r = ys[i] - intercept - fit.slope * xs[i];
    rss += r * r;
  }
  fit.slope_se =
      k > 2 ? std::sqrt(rss / static_cast<double>(k - 2) / sxx) : 0.0;
  return fit;
}

std::vector<ReplicationRow> run_replications(const ExperimentConfig& config,
                                             const Scenario& scenario,
                                             const ScenarioConstants& sc,
                                             const ProgressFn& progress) {
  const int d = scenario.model->dim();
  const long n_cells = static_cast<long>(config.n_grid.size()) *
                       static_cast<long>(config.beta_grid.size());
  const long total = n_cells * config.replications;
  std::vector<ReplicationRow> rows(static_cast<size_t>(total));

  BackendConfig backend;
  backend.kind = config.backend;

  auto body = [&](long t) {
    const long r = t % config.replications;
    const long cell = t / config.replications;
    const int bi = static_cast<int>(cell % config.beta_grid.size());
    const int ni = static_cast<int>(cell / config.beta_grid.size());
    const int n = config.n_grid[ni];
    const double beta = config.beta_grid[bi];

    ReplicationRow& row = rows[static_cast<size_t>(t)];
    row.scenario_id = scenario.id;
    row.n = n;
    row.beta = beta;
    row.seed = replication_seed(config.master_seed, scenario.id, n, beta,
                                static_cast<int>(r));
    row.b_g = row.b_t = row.g_g = row.g_t = row.v = row.waic = row.tic_n = kNaN;
    row.w_map = Vector::Constant(d, kNaN);
    row.w_mle = Vector::Constant(d, kNaN);
    row.d = DTerms{kNaN, kNaN, kNaN, kNaN, kNaN, kNaN};
    row.m1 = Vector::Constant(d, kNaN);
    row.m2 = Matrix::Constant(d, d, kNaN);
    row.m3 = kNaN;
    row.s2 = Matrix::Constant(d, d, kNaN);
    row.m2k = Matrix::Constant(d, d, kNaN);
    row.mh_se_b_t = kNaN;
    row.mh_se_v = kNaN;
    try {
      const TrainingSet ts = make_training_set(scenario, n, row.seed);
      const TemperedPosterior post =
          make_posterior(*scenario.model, *scenario.prior, ts, beta, backend,
                         sc.optimal.w0);
      const FunctionalBundle fb =
          evaluate_functionals(post, *scenario.true_dist, sc.optimal.w0);
      row.b_g = fb.b_g;
      row.b_t = fb.b_t;
      row.g_g = fb.g_g;
      row.g_t = fb.g_t;
      row.v = fb.v;
      row.waic = fb.waic;
      row.d = fb.d;
      row.mh_se_b_t = fb.mh_se_b_t;
      row.mh_se_v = fb.mh_se_v;
      row.tic_n = tic_empirical(*scenario.model, ts, post.estimators.w_mle);
      row.w_map = post.estimators.w_map;
      row.w_mle = post.estimators.w_mle;
      const PosteriorMoments pm = posterior_moments(post, sc.optimal.w0);
      row.m1 = pm.m1;
      row.m2 = pm.m2;
      row.m3 = pm.m3;
      row.s2 = pm.s2;
      row.m2k = std::isinf(beta)
                    ? Matrix::Zero(d, d)
                    : Matrix(solve_spd_inverse(post.k_n_at_map) /
                             (static_cast<double>(n) * beta));
      row.status = "ok";
    } catch (const std::exception& e) {
      row.status = status_tag(e);
    }
  };
  parallel_for(total, body, progress);

  long failures = 0;
  for (const auto& row : rows)
    if (!row.ok()) failures++;
  if (failures * 100 > total)
    throw Error("replication_failure_rate: " + std::to_string(failures) +
                " of " + std::to_string(total) + " rows failed (> 1%)");
  return rows;
}

std::vector<MomentRow> run_moment_study(const ExperimentConfig& config,
                                        const Scenario& scenario,
                                        const ScenarioConstants& sc,
                                        const ProgressFn& progress) {
  const int d = scenario.model->dim();
  const long n_cells = static_cast<long>(config.n_grid.size()) *
                       static_cast<long>(config.beta_grid.size());
  const long total = n_cells * config.replications;
  std::vector<MomentRow> rows(static_cast<size_t>(total));

  BackendConfig backend;
  backend.kind = config.backend;

  auto body = [&](long t) {
    const long r = t % config.replications;
    const long cell = t / config.replications;
    const int bi = static_cast<int>(cell % config.beta_grid.size());
    const int ni = static_cast<int>(cell / config.beta_grid.size());
    const int n = config.n_grid[ni];
    const double beta = config.beta_grid[bi];

    MomentRow& row = rows[static_cast<size_t>(t)];
    row.scenario_id = scenario.id;
    row.n = n;
    row.beta = beta;
    row.seed = replication_seed(config.master_seed, scenario.id, n, beta,
                                static_cast<int>(r));
    row.m1 = Vector::Constant(d, kNaN);
    row.m2 = Matrix::Constant(d, d, kNaN);
    row.s2 = Matrix::Constant(d, d, kNaN);
    row.m2k = Matrix::Constant(d, d, kNaN);
    row.m3 = kNaN;
    row.map_mle_gap = kNaN;
    row.w_map = Vector::Constant(d, kNaN);
    try {
      const TrainingSet ts = make_training_set(scenario, n, row.seed);
      const TemperedPosterior post =
          make_posterior(*scenario.model, *scenario.prior, ts, beta, backend,
                         sc.optimal.w0);
      const PosteriorMoments pm = posterior_moments(post, sc.optimal.w0);
      row.m1 = pm.m1;
      row.m2 = pm.m2;
      row.m3 = pm.m3;
      row.s2 = pm.s2;
      row.m2k = std::isinf(beta)
                    ? Matrix::Zero(d, d)
                    : Matrix(solve_spd_inverse(post.k_n_at_map) /
                             (static_cast<double>(n) * beta));
      row.map_mle_gap =
          (post.estimators.w_map - post.estimators.w_mle).norm();
      row.w_map = post.estimators.w_map;
      row.status = "ok";
    } catch (const std::exception& e) {
      row.status = status_tag(e);
    }
  };
  parallel_for(total, body, progress);

  long failures = 0;
  for (const auto& row : rows)
    if (!row.ok()) failures++;
  if (failures * 100 > total)
    throw Error("replication_failure_rate: " + std::to_string(failures) +
                " of " + std::to_string(total) + " rows failed (> 1%)");
  return rows;
}

AggregateReport aggregate_rows(const std::vector<ReplicationRow>& rows,
                               double se_multiplier) {
  AggregateReport report;
  report.se_multiplier = se_multiplier;
  const RowIndex idx = index_rows(rows);
  for (size_t i = 0; i < idx.keys.size(); ++i) {
    const auto& [n, beta] = idx.keys[i];
    const CellView& cell = idx.cells[i];
    AggregateCell out;
    out.n = n;
    out.beta = beta;
    out.count_ok = static_cast<long>(cell.ok.size());
    out.count_error = cell.errors;
    auto field = [&](const std::function<double(const ReplicationRow&)>& f) {
      return make_stats(collect(cell, f));
    };
    out.b_g = field([](const ReplicationRow& r) { return r.b_g; });
    out.b_t = field([](const ReplicationRow& r) { return r.b_t; });
    out.g_g = field([](const ReplicationRow& r) { return r.g_g; });
    out.g_t = field([](const ReplicationRow& r) { return r.g_t; });
    out.v = field([](const ReplicationRow& r) { return r.v; });
    out.waic = field([](const ReplicationRow& r) { return r.waic; });
    out.tic_n = field([](const ReplicationRow& r) { return r.tic_n; });
    out.d1 = field([](const ReplicationRow& r) { return r.d.d1; });
    out.d2 = field([](const ReplicationRow& r) { return r.d.d2; });
    out.d3 = field([](const ReplicationRow& r) { return r.d.d3; });
    out.d4 = field([](const ReplicationRow& r) { return r.d.d4; });
    out.d5 = field([](const ReplicationRow& r) { return r.d.d5; });
    out.d6 = field([](const ReplicationRow& r) { return r.d.d6; });
    // Training-side losses recentred by the empirical loss of w0 (whose mean
    // is exactly S): b_t − L_n⁰(w0) and g_t − L_n⁰(w0) = d4.  These carry
    // far less Monte Carlo variance than the raw training losses.
    out.bt_centered = field(
        [](const ReplicationRow& r) { return r.b_t - r.g_t + r.d.d4; });
    out.gt_centered = field([](const ReplicationRow& r) { return r.d.d4; });

    out.bayes_gap = out.b_g.mean - out.b_t.mean;
    out.gibbs_gap = out.g_g.mean - out.g_t.mean;
    out.mean_tic_n = out.tic_n.mean;
    if (std::isinf(beta)) {
      out.bayes_rhs = kNaN;
      out.gibbs_rhs = kNaN;
      out.beta_v = kNaN;
      out.eqs_bayes = {kNaN, kNaN};
      out.eqs_gibbs = {kNaN, kNaN};
      out.sd_n_eqs_bayes = kNaN;
      out.eqs_bayes_pass = true;
      out.eqs_gibbs_pass = true;
    } else {
      const double bn = beta / static_cast<double>(n);
      out.bayes_rhs = bn * out.v.mean;
      out.gibbs_rhs = bn * out.v.mean;
      out.beta_v = beta * out.v.mean;
      const auto eqs_b = collect(cell, [bn](const ReplicationRow& r) {
        return r.b_g - r.b_t - bn * r.v;
      });
      const auto eqs_g = collect(cell, [bn](const ReplicationRow& r) {
        return r.g_g - r.g_t - bn * r.v;
      });
      out.eqs_bayes = make_stats(eqs_b);
      out.eqs_gibbs = make_stats(eqs_g);
      std::vector<double> n_eqs(eqs_b.size());
      for (size_t j = 0; j < eqs_b.size(); ++j)
        n_eqs[j] = static_cast<double>(n) * eqs_b[j];
      out.sd_n_eqs_bayes = sample_sd(n_eqs);
      out.eqs_bayes_pass =
          std::abs(out.eqs_bayes.mean) <= se_multiplier * out.eqs_bayes.se;
      out.eqs_gibbs_pass =
          std::abs(out.eqs_gibbs.mean) <= se_multiplier * out.eqs_gibbs.se;
    }
    report.cells.push_back(std::move(out));
  }
  return report;
}

std::vector<Verdict> verify_theorem1(const AggregateReport& agg,
                                     const AsymptoticConstants& c) {
  std::vector<Verdict> out;
  const double mult = agg.se_multiplier;
  std::vector<int> ns;
  std::vector<double> betas;
  for (const auto& cell : agg.cells) {
    if (std::find(ns.begin(), ns.end(), cell.n) == ns.end())
      ns.push_back(cell.n);
    bool seen = false;
    for (double b : betas)
      if (format_beta(b) == format_beta(cell.beta)) seen = true;
    if (!seen) betas.push_back(cell.beta);
  }
  std::sort(ns.begin(), ns.end());
  if (ns.empty()) return out;
  const int n_max = ns.back();
  const double dim = 2.0 * c.lambda;

  struct Check {
    const char* tag;
    std::function<double(double, double)> pred;  // (n, beta)
    std::function<FieldStats(const AggregateCell&, double)> obs;  // (cell, S)
  };
  const std::vector<Check> checks = {
      {"b_g",
       [&](double n, double b) { return c.S + (c.lambda - c.nu) / (n * b) + c.nu / n; },
       [](const AggregateCell& cell, double) { return cell.b_g; }},
      {"b_t",
       [&](double n, double b) { return c.S + (c.lambda - c.nu) / (n * b) - c.nu / n; },
       [](const AggregateCell& cell, double S) {
         return FieldStats{S + cell.bt_centered.mean, cell.bt_centered.se};
       }},
      {"g_g",
       [&](double n, double b) { return c.S + c.lambda / (n * b) + c.nu / n; },
       [](const AggregateCell& cell, double) { return cell.g_g; }},
      {"g_t",
       [&](double n, double b) { return c.S + c.lambda / (n * b) - c.nu / n; },
       [](const AggregateCell& cell, double S) {
         return FieldStats{S + cell.gt_centered.mean, cell.gt_centered.se};
       }},
      {"v", [&](double, double b) { return 2.0 * c.nu / b; },
       [](const AggregateCell& cell, double) { return cell.v; }},
  };

  for (double beta : finite_betas(betas)) {
    const std::string bl = beta_label(beta);
    for (const auto& chk : checks) {
      const AggregateCell* top = agg.find(n_max, beta);
      if (!top) continue;
      const double pred = chk.pred(n_max, beta);
      const FieldStats obs = chk.obs(*top, c.S);
      const double term =
          std::string(chk.tag) == "v" ? pred : pred - c.S;
      std::string note = "n=" + n_label(n_max);
      if (std::string(chk.tag) == "b_t" || std::string(chk.tag) == "g_t")
        note += "; mean estimated with L_n(w0) control variate";
      out.push_back(guarded_check("theorem1/beta=" + bl + "/E[" + chk.tag + "]",
                                  obs.mean, pred, obs.se, mult, term, note));

      std::vector<double> nv, resid, ses;
      for (int n : ns) {
        const AggregateCell* cell = agg.find(n, beta);
        if (!cell) continue;
        const FieldStats o = chk.obs(*cell, c.S);
        nv.push_back(n);
        resid.push_back(o.mean - chk.pred(n, beta));
        ses.push_back(o.se);
      }
      out.push_back(decay_check(
          "theorem1/beta=" + bl + "/residual_decay/" + chk.tag, nv, resid, ses,
          mult, 0.4));
    }
    // Ladder identities E[G]−E[B] = ν/(nβ) at every n, with SEs combined in
    // quadrature (the losses are estimated independently; a paired test would
    // resolve the o(1/n) remainder itself).
    for (int n : ns) {
      const AggregateCell* cell = agg.find(n, beta);
      if (!cell) continue;
      const double pred = c.nu / (static_cast<double>(n) * beta);
      out.push_back(guarded_check(
          "theorem1/beta=" + bl + "/n=" + n_label(n) + "/ladder_gg_minus_bg",
          cell->g_g.mean - cell->b_g.mean, pred,
          std::hypot(cell->g_g.se, cell->b_g.se), mult, pred));
      out.push_back(guarded_check(
          "theorem1/beta=" + bl + "/n=" + n_label(n) + "/ladder_gt_minus_bt",
          cell->gt_centered.mean - cell->bt_centered.mean, pred,
          std::hypot(cell->gt_centered.se, cell->bt_centered.se), mult, pred));
    }
  }

  // E[B_g] ordering across finite beta at n_max follows the sign of
  // d − tr(IJ⁻¹) through pred = (d − tic)/(2n)·(1/β_i − 1/β_j).
  const std::vector<double> fb = finite_betas(betas);
  for (size_t i = 0; i + 1 < fb.size(); ++i) {
    const AggregateCell* a = agg.find(n_max, fb[i]);
    const AggregateCell* b = agg.find(n_max, fb[i + 1]);
    if (!a || !b) continue;
    const double pred = (dim - c.tic) / (2.0 * n_max) *
                        (1.0 / fb[i] - 1.0 / fb[i + 1]);
    out.push_back(guarded_check(
        "theorem1/b_g_order/beta=" + beta_label(fb[i]) + "_vs_" +
            beta_label(fb[i + 1]),
        a->b_g.mean - b->b_g.mean, pred, std::hypot(a->b_g.se, b->b_g.se),
        mult, pred, "sign set by d - tr(IJ^-1)"));
  }
  return out;
}

std::vector<Verdict> verify_equations_of_state(const AggregateReport& agg) {
  std::vector<Verdict> out;
  const double mult = agg.se_multiplier;
  std::vector<int> ns;
  std::vector<double> betas;
  for (const auto& cell : agg.cells) {
    if (std::isinf(cell.beta)) continue;
    if (std::find(ns.begin(), ns.end(), cell.n) == ns.end())
      ns.push_back(cell.n);
    bool seen = false;
    for (double b : betas)
      if (format_beta(b) == format_beta(cell.beta)) seen = true;
    if (!seen) betas.push_back(cell.beta);
  }
  std::sort(ns.begin(), ns.end());

  for (double beta : betas) {
    const std::string bl = beta_label(beta);
    std::vector<double> nv, res_b, se_b, res_g, se_g, spread;
    for (int n : ns) {
      const AggregateCell* cell = agg.find(n, beta);
      if (!cell) continue;
      out.push_back(noise_check(
          "eqs_of_state/bayes/n=" + n_label(n) + "/beta=" + bl,
          cell->eqs_bayes.mean, 0.0, cell->eqs_bayes.se, mult,
          "E[B_g] - E[B_t] - (beta/n)E[V], paired per replication"));
      out.push_back(noise_check(
          "eqs_of_state/gibbs/n=" + n_label(n) + "/beta=" + bl,
          cell->eqs_gibbs.mean, 0.0, cell->eqs_gibbs.se, mult,
          "E[G_g] - E[G_t] - (beta/n)E[V], paired per replication"));
      nv.push_back(n);
      res_b.push_back(cell->eqs_bayes.mean);
      se_b.push_back(cell->eqs_bayes.se);
      res_g.push_back(cell->eqs_gibbs.mean);
      se_g.push_back(cell->eqs_gibbs.se);
      spread.push_back(cell->sd_n_eqs_bayes);
    }
    if (nv.size() >= 3) {
      out.push_back(decay_check("eqs_of_state/decay/bayes/beta=" + bl, nv,
                                res_b, se_b, mult, 0.4));
      out.push_back(decay_check("eqs_of_state/decay/gibbs/beta=" + bl, nv,
                                res_g, se_g, mult, 0.4));
      // The per-replication residual is a genuine random variable: the
      // spread of n·residual must not vanish with n.  (Empirically it grows
      // like sqrt(n); any slope above -0.2 counts as non-shrinking.)
      bool spread_ok = true;
      for (double s : spread)
        if (!(s > 0.0) || !std::isfinite(s)) spread_ok = false;
      Verdict v;
      v.name = "eqs_of_state/spread_nonshrinking/beta=" + bl;
      v.multiplier = mult;
      if (!spread_ok) {
        v.status = "fail";
        v.pass = false;
        v.note = "SD of n*(b_g - b_t - (beta/n)v) not positive";
      } else {
        const ScalingFit fit = fit_loglog(v.name, nv, spread);
        v.observed = fit.slope;
        v.predicted = -0.2;
        v.se = fit.slope_se;
        v.pass = fit.slope > -0.2;
        v.status = v.pass ? "pass" : "fail";
        v.note = "one-sided: slope of SD(n*residual) must stay above -0.2";
      }
      out.push_back(v);
    }
  }
  return out;
}

std::vector<Verdict> verify_theorem2_scaling(
    const std::vector<ReplicationRow>& rows, const AsymptoticConstants& c) {
  const RowIndex idx = index_rows(rows);
  std::vector<Verdict> out;
  for (double beta : finite_betas(idx.betas)) {
    const std::string bl = beta_label(beta);
    std::vector<double> nv, rms_bv_tic, rms_ticn_tic, rms_bv_ticn;
    for (int n : idx.ns) {
      const CellView* cell = idx.find(n, beta);
      if (!cell || cell->ok.empty()) continue;
      std::vector<double> a, b, g;
      a.reserve(cell->ok.size());
      for (const auto* r : cell->ok) {
        a.push_back(beta * r->v - c.tic);
        b.push_back(r->tic_n - c.tic);
        g.push_back(beta * r->v - r->tic_n);
      }
      nv.push_back(n);
      rms_bv_tic.push_back(rms_of(a));
      rms_ticn_tic.push_back(rms_of(b));
      rms_bv_ticn.push_back(rms_of(g));
    }
    if (nv.size() < 3)
      throw Error("insufficient_points: theorem-2 scaling needs >= 3 n values, got " +
                  std::to_string(nv.size()));
    out.push_back(band_check(
        "theorem2/rms_beta_v_vs_tic/beta=" + bl,
        fit_loglog("beta*v - tic", nv, rms_bv_tic), -0.5, 0.15));
    out.push_back(band_check(
        "theorem2/rms_tic_n_vs_tic/beta=" + bl,
        fit_loglog("tic_n - tic", nv, rms_ticn_tic), -0.5, 0.15));
    out.push_back(band_check(
        "theorem2/rms_beta_v_vs_tic_n/beta=" + bl,
        fit_loglog("beta*v - tic_n", nv, rms_bv_ticn), -1.0, 0.2));
  }
  return out;
}

namespace {

double rel_frobenius(const Matrix& got, const Matrix& want) {
  const double denom = want.norm();
  if (!(denom > 0)) return kNaN;
  return (got - want).norm() / denom;
}

Verdict tolerance_check(const std::string& name, double rel_err, double tol,
                        const std::string& note) {
  Verdict v = noise_check(name, rel_err, 0.0, tol, 1.0, note);
  return v;
}

Matrix mean_matrix(const std::vector<const ReplicationRow*>& rows,
                   const std::function<const Matrix&(const ReplicationRow&)>& f,
                   int d) {
  Matrix acc = Matrix::Zero(d, d);
  for (const auto* r : rows) acc += f(*r);
  return acc / static_cast<double>(rows.size());
}

}  // namespace

std::vector<Verdict> verify_lemmas(const std::vector<ReplicationRow>& rows,
                                   const std::vector<MomentRow>& moment_rows,
                                   const ScenarioConstants& sc,
                                   double se_multiplier) {
  std::vector<Verdict> out;
  const AsymptoticConstants& c = sc.constants;
  const double dim = 2.0 * c.lambda;
  const RowIndex idx = index_rows(rows);

  if (!idx.ns.empty()) {
    const int n_max = idx.ns.back();

    // Six Lemma-2 expansions at n_max, per finite beta.
    struct DCheck {
      const char* tag;
      std::function<double(double, double)> pred;
      std::function<double(const ReplicationRow&)> get;
    };
    const std::vector<DCheck> dchecks = {
        {"d1", [&](double n, double b) { return dim / (2 * n * b) + c.nu / n; },
         [](const ReplicationRow& r) { return r.d.d1; }},
        {"d2", [&](double n, double b) { return c.nu / (n * b) + c.mu / n; },
         [](const ReplicationRow& r) { return r.d.d2; }},
        {"d3", [&](double n, double) { return c.mu / n; },
         [](const ReplicationRow& r) { return r.d.d3; }},
        {"d4", [&](double n, double b) { return dim / (2 * n * b) - c.nu / n; },
         [](const ReplicationRow& r) { return r.d.d4; }},
        {"d5", [&](double n, double b) { return c.nu / (n * b) + c.mu / n; },
         [](const ReplicationRow& r) { return r.d.d5; }},
        {"d6", [&](double n, double) { return c.mu / n; },
         [](const ReplicationRow& r) { return r.d.d6; }},
    };
    for (double beta : finite_betas(idx.betas)) {
      const CellView* cell = idx.find(n_max, beta);
      if (!cell || cell->ok.empty()) continue;
      const std::string bl = beta_label(beta);
      for (const auto& chk : dchecks) {
        const FieldStats st = make_stats(collect(*cell, chk.get));
        const double pred = chk.pred(n_max, beta);
        out.push_back(guarded_check(
            "lemma2/beta=" + bl + "/E[" + chk.tag + "]", st.mean, pred, st.se,
            se_multiplier, pred, "n=" + n_label(n_max)));
      }
      // D5−D2 and D6−D3 vanish faster than 1/n (paired per replication).
      std::vector<double> nv, r52, s52, r63, s63;
      for (int n : idx.ns) {
        const CellView* cv = idx.find(n, beta);
        if (!cv || cv->ok.empty()) continue;
        const FieldStats a = make_stats(collect(
            *cv, [](const ReplicationRow& r) { return r.d.d5 - r.d.d2; }));
        const FieldStats b = make_stats(collect(
            *cv, [](const ReplicationRow& r) { return r.d.d6 - r.d.d3; }));
        nv.push_back(n);
        r52.push_back(a.mean);
        s52.push_back(a.se);
        r63.push_back(b.mean);
        s63.push_back(b.se);
      }
      if (nv.size() >= 3) {
        out.push_back(decay_check("lemma2/decay/d5_minus_d2/beta=" + bl, nv,
                                  r52, s52, se_multiplier, 1.0));
        out.push_back(decay_check("lemma2/decay/d6_minus_d3/beta=" + bl, nv,
                                  r63, s63, se_multiplier, 1.0));
      }
    }

    // Exact per-replication identities and orderings over all ok rows.
    double max_vid = 0.0, min_d2d3 = 0.0, min_d5d6 = 0.0;
    double max_jensen_t = -1e300, max_jensen_g = -1e300, min_v = 1e300;
    long n_ok = 0;
    for (const auto& row : rows) {
      if (!row.ok()) continue;
      n_ok++;
      if (std::isfinite(row.beta)) {
        max_vid = std::max(
            max_vid, std::abs(row.v - 2.0 * row.n * (row.d.d5 - row.d.d6)));
      }
      min_d2d3 = std::min(min_d2d3, row.d.d2 - row.d.d3);
      min_d5d6 = std::min(min_d5d6, row.d.d5 - row.d.d6);
      max_jensen_t = std::max(max_jensen_t, row.b_t - row.g_t);
      max_jensen_g = std::max(max_jensen_g, row.b_g - row.g_g);
      min_v = std::min(min_v, row.v);
    }
    if (n_ok > 0) {
      out.push_back(tolerance_check("lemma2/identity_v_2n_d5_d6", max_vid,
                                    1e-10,
                                    "max |v - 2n(d5-d6)| over replications"));
      out.push_back(tolerance_check("lemma2/jensen_d2_ge_d3",
                                    std::max(0.0, -min_d2d3), 1e-12,
                                    "min(d2-d3) must be >= 0"));
      out.push_back(tolerance_check("lemma2/jensen_d5_ge_d6",
                                    std::max(0.0, -min_d5d6), 1e-12,
                                    "min(d5-d6) must be >= 0"));
      out.push_back(tolerance_check("functionals/jensen_bt_le_gt",
                                    std::max(0.0, max_jensen_t), 1e-9,
                                    "max(b_t-g_t) must be <= 0"));
      out.push_back(tolerance_check("functionals/jensen_bg_le_gg",
                                    std::max(0.0, max_jensen_g), 1e-9,
                                    "max(b_g-g_g) must be <= 0"));
      out.push_back(tolerance_check("functionals/v_nonnegative",
                                    std::max(0.0, -min_v), 1e-12,
                                    "min(v) must be >= 0"));
    }

    // Plug-in rows carry exactly zero posterior spread.
    double max_plugin = -1.0;
    for (const auto& row : rows) {
      if (!row.ok() || !std::isinf(row.beta)) continue;
      max_plugin = std::max(
          {max_plugin, row.m1.cwiseAbs().maxCoeff(),
           row.m2.cwiseAbs().maxCoeff(), std::abs(row.m3), std::abs(row.v)});
    }
    if (max_plugin >= 0.0) {
      Verdict v;
      v.name = "lemma1/plugin_moments_zero";
      v.observed = max_plugin;
      v.predicted = 0.0;
      v.se = 0.0;
      v.multiplier = 0.0;
      v.pass = max_plugin == 0.0;
      v.status = v.pass ? "pass" : "fail";
      v.note = "beta=inf rows: m1, m2, m3, v all exactly zero";
      out.push_back(v);
    }

    // Sandwich covariance of the MAP at the canonical cell (beta = 1 when
    // present, else the first finite beta).
    const std::vector<double> fb = finite_betas(idx.betas);
    double beta_star = fb.empty() ? kNaN : fb.front();
    for (double b : fb)
      if (format_beta(b) == "1") beta_star = b;
    if (std::isfinite(beta_star)) {
      const CellView* cell = idx.find(n_max, beta_star);
      if (cell && cell->ok.size() >= 2) {
        const int d = static_cast<int>(sc.optimal.w0.size());
        Vector mean = Vector::Zero(d);
        for (const auto* r : cell->ok)
          mean += (r->w_map - sc.optimal.w0) * std::sqrt(double(n_max));
        mean /= static_cast<double>(cell->ok.size());
        Matrix cov = Matrix::Zero(d, d);
        for (const auto* r : cell->ok) {
          const Vector z =
              (r->w_map - sc.optimal.w0) * std::sqrt(double(n_max)) - mean;
          cov += z * z.transpose();
        }
        cov /= static_cast<double>(cell->ok.size() - 1);
        const Matrix jinv = sc.pair.J.inverse();
        const Matrix sandwich = jinv * sc.pair.I * jinv;
        out.push_back(tolerance_check(
            "map_asymptotics/sandwich_cov", rel_frobenius(cov, sandwich), 0.05,
            "cov of sqrt(n)(w_map - w0) vs J^-1 I J^-1 at n=" +
                n_label(n_max) + ", beta=" + beta_label(beta_star)));
      }
    }

    // Second-moment identities at n_max for each finite beta.
    for (double beta : fb) {
      const CellView* cell = idx.find(n_max, beta);
      if (!cell || cell->ok.empty()) continue;
      const int d = static_cast<int>(sc.optimal.w0.size());
      const std::string bl = beta_label(beta);
      const Matrix jinv = sc.pair.J.inverse();
      const Matrix pred = jinv * sc.pair.I * jinv / double(n_max) +
                          jinv / (double(n_max) * beta);
      const Matrix s2m = mean_matrix(
          cell->ok,
          [](const ReplicationRow& r) -> const Matrix& { return r.s2; }, d);
      out.push_back(tolerance_check(
          "map_asymptotics/s2_identity/beta=" + bl, rel_frobenius(s2m, pred),
          0.05,
          "E[E_w[(w-w0)(w-w0)^T]] vs J^-1 I J^-1/n + J^-1/(n beta) at n=" +
              n_label(n_max)));
      const Matrix m2m = mean_matrix(
          cell->ok,
          [](const ReplicationRow& r) -> const Matrix& { return r.m2; }, d);
      const Matrix m2k = mean_matrix(
          cell->ok,
          [](const ReplicationRow& r) -> const Matrix& { return r.m2k; }, d);
      out.push_back(tolerance_check(
          "map_asymptotics/m2_vs_kn_inv/beta=" + bl, rel_frobenius(m2m, m2k),
          0.05, "posterior spread vs K_n(w_map)^-1/(n beta) at n=" +
                    n_label(n_max)));
    }
  }

  // Posterior-moment scaling slopes from the moments-only study.
  if (!moment_rows.empty()) {
    std::vector<int> mns;
    std::vector<double> mbetas;
    for (const auto& row : moment_rows) {
      if (!row.ok() || std::isinf(row.beta)) continue;
      if (std::find(mns.begin(), mns.end(), row.n) == mns.end())
        mns.push_back(row.n);
      bool seen = false;
      for (double b : mbetas)
        if (format_beta(b) == format_beta(row.beta)) seen = true;
      if (!seen) mbetas.push_back(row.beta);
    }
    std::sort(mns.begin(), mns.end());
    for (double beta : mbetas) {
      const std::string bl = beta_label(beta);
      std::vector<double> nv, rms_m1, rms_m3, rms_gap;
      for (int n : mns) {
        std::vector<double> a, b, g;
        for (const auto& row : moment_rows) {
          if (!row.ok() || row.n != n ||
              format_beta(row.beta) != format_beta(beta))
            continue;
          a.push_back(row.m1.norm());
          b.push_back(row.m3);
          g.push_back(row.map_mle_gap);
        }
        if (a.empty()) continue;
        nv.push_back(n);
        rms_m1.push_back(rms_of(a));
        rms_m3.push_back(rms_of(b));
        rms_gap.push_back(rms_of(g));
      }
      if (nv.size() < 3) continue;
      const double floor = 1e-10;
      if (rms_m1.front() > floor)
        out.push_back(band_check("lemma1/rms_m1_slope/beta=" + bl,
                                 fit_loglog("rms |m1|", nv, rms_m1), -1.0,
                                 0.2));
      out.push_back(band_check("lemma1/rms_m3_slope/beta=" + bl,
                               fit_loglog("rms m3", nv, rms_m3), -1.5, 0.2));
      if (rms_gap.front() > floor) {
        // The gap (n beta)^-1 K_n^-1 grad log-prior is O(1/n), but prior
        // gradient components that vanish at w0 contribute n^-3/2 terms, so
        // on moderate n grids the composite slope sits below -1. Certify the
        // O(1/n) bound one-sidedly: decay at least as fast as n^-0.8.
        const ScalingFit fit =
            fit_loglog("rms |w_map - w_mle|", nv, rms_gap);
        Verdict v;
        v.name = "map_asymptotics/map_mle_gap_slope/beta=" + bl;
        v.observed = fit.slope;
        v.predicted = -1.0;
        v.se = 0.2;
        v.multiplier = 1.0;
        const bool ok = std::isfinite(fit.slope) && fit.slope <= -0.8;
        v.status = ok ? "pass" : "fail";
        v.pass = ok;
        v.note = "one-sided slope <= -0.8; OLS slope SE = " +
                 std::to_string(fit.slope_se);
        out.push_back(v);
      }
    }
  }
  return out;
}

std::vector<Verdict> verify_waic(const std::vector<ReplicationRow>& rows,
                                 const AggregateReport& agg) {
  std::vector<Verdict> out;
  const double mult = agg.se_multiplier;
  const RowIndex idx = index_rows(rows);
  double max_identity = -1.0;
  for (const auto& row : rows) {
    if (!row.ok()) continue;
    const double rhs = std::isinf(row.beta)
                           ? row.n * row.b_t
                           : row.n * row.b_t + row.beta * row.v;
    max_identity = std::max(max_identity, std::abs(row.waic - rhs));
  }
  if (max_identity >= 0.0)
    out.push_back(tolerance_check("waic/identity", max_identity, 1e-10,
                                  "max |waic - (n b_t + beta v)|"));
  for (int n : idx.ns) {
    for (double beta : finite_betas(idx.betas)) {
      const CellView* cell = idx.find(n, beta);
      if (!cell || cell->ok.empty()) continue;
      const FieldStats st = make_stats(collect(
          *cell, [](const ReplicationRow& r) { return r.waic - r.n * r.b_g; }));
      out.push_back(noise_check(
          "waic/unbiased/n=" + n_label(n) + "/beta=" + beta_label(beta),
          st.mean, 0.0, st.se, mult,
          "paired E[waic - n b_g]; unbiasedness of WAIC for n B_g"));
    }
  }
  return out;
}

std::vector<Verdict> verify_all(const std::vector<ReplicationRow>& rows,
                                const std::vector<MomentRow>& moment_rows,
                                const ScenarioConstants& sc,
                                double se_multiplier) {
  std::vector<Verdict> out;
  if (rows.empty() && moment_rows.empty()) return out;
  const AggregateReport agg = aggregate_rows(rows, se_multiplier);
  auto append = [&out](std::vector<Verdict> v) {
    for (auto& x : v) out.push_back(std::move(x));
  };
  if (!rows.empty()) {
    append(verify_theorem1(agg, sc.constants));
    append(verify_equations_of_state(agg));
    try {
      append(verify_theorem2_scaling(rows, sc.constants));
    } catch (const Error& e) {
      Verdict v;
      v.name = "theorem2/scaling";
      v.status = "insufficient_precision";
      v.pass = true;
      v.note = e.what();
      out.push_back(v);
    }
    append(verify_waic(rows, agg));
  }
  append(verify_lemmas(rows, moment_rows, sc, se_multiplier));
  return out;
}

SweepResult beta_sweep(const ExperimentConfig& config,
                       const Scenario& scenario, const ScenarioConstants& sc,
                       const ProgressFn& progress) {
  SweepResult result;
  result.scenario_id = scenario.id;
  int finite_count = 0;
  bool has_inf = false;
  for (double b : config.beta_grid) {
    if (std::isinf(b))
      has_inf = true;
    else
      finite_count++;
  }
  if (!has_inf || finite_count < 3)
    throw Error(
        "validation_error: beta sweep requires beta_grid with inf and >= 3 "
        "finite values");

  BackendConfig backend;
  backend.kind = config.backend;
  const long n_cells = static_cast<long>(config.n_grid.size()) *
                       static_cast<long>(config.beta_grid.size());
  const long total = n_cells * config.replications;
  std::vector<double> values(static_cast<size_t>(total), kNaN);

  auto body = [&](long t) {
    const long r = t % config.replications;
    const long cell = t / config.replications;
    const int bi = static_cast<int>(cell % config.beta_grid.size());
    const int ni = static_cast<int>(cell / config.beta_grid.size());
    const int n = config.n_grid[ni];
    const double beta = config.beta_grid[bi];
    const uint64_t seed = replication_seed(config.master_seed, scenario.id, n,
                                           beta, static_cast<int>(r));
    try {
      const TrainingSet ts = make_training_set(scenario, n, seed);
      const TemperedPosterior post =
          make_posterior(*scenario.model, *scenario.prior, ts, beta, backend,
                         sc.optimal.w0);
      values[static_cast<size_t>(t)] =
          bayes_generalization_loss(post, *scenario.true_dist);
    } catch (const std::exception&) {
      // NaN marks the failed replication.
    }
  };
  parallel_for(total, body, progress);

  long failures = 0;
  for (double v : values)
    if (!std::isfinite(v)) failures++;
  if (failures * 100 > total)
    throw Error("replication_failure_rate: " + std::to_string(failures) +
                " of " + std::to_string(total) + " sweep rows failed (> 1%)");

  for (size_t ni = 0; ni < config.n_grid.size(); ++ni) {
    for (size_t bi = 0; bi < config.beta_grid.size(); ++bi) {
      const long base = (static_cast<long>(ni) * config.beta_grid.size() + bi) *
                        config.replications;
      std::vector<double> xs;
      xs.reserve(config.replications);
      for (int r = 0; r < config.replications; ++r) {
        const double v = values[static_cast<size_t>(base + r)];
        if (std::isfinite(v)) xs.push_back(v);
      }
      const FieldStats st = make_stats(xs);
      SweepPoint p;
      p.n = config.n_grid[ni];
      p.beta = config.beta_grid[bi];
      p.inv_beta = std::isinf(p.beta) ? 0.0 : 1.0 / p.beta;
      p.mean_b_g = st.mean;
      p.se_b_g = st.se;
      p.replications = static_cast<int>(xs.size());
      result.points.push_back(p);
    }
  }

  // Verdicts at the largest n: the Bayes-vs-plug-in improvement
  // E[B_g](inf) − E[B_g](beta) equals (tic − d)/(2 n beta).
  const int n_max = *std::max_element(config.n_grid.begin(),
                                      config.n_grid.end());
  const double mult = config.tolerance_se_multiplier;
  const double dim = 2.0 * sc.constants.lambda;
  // tic comes from quadrature; below 1e-9 the difference to d is numerical
  // dust and the predicted improvement is exactly zero (plain noise check,
  // not a deviation the precision guard should try to resolve).
  double sign_term = sc.constants.tic - dim;
  if (std::abs(sign_term) <= 1e-9) sign_term = 0.0;
  const SweepPoint* inf_pt = nullptr;
  for (const auto& p : result.points)
    if (p.n == n_max && std::isinf(p.beta)) inf_pt = &p;
  if (!inf_pt) throw Error("validation_error: sweep missing beta=inf cell");

  bool all_sign_ok = true;
  bool any_significant = false;
  for (const auto& p : result.points) {
    if (p.n != n_max || std::isinf(p.beta)) continue;
    const double improvement = inf_pt->mean_b_g - p.mean_b_g;
    const double pred = sign_term / (2.0 * n_max * p.beta);
    const double se = std::hypot(inf_pt->se_b_g, p.se_b_g);
    result.verdicts.push_back(guarded_check(
        "sweep/improvement_vs_plugin/beta=" + beta_label(p.beta), improvement,
        pred, se, mult, pred,
        "E[B_g](inf) - E[B_g](beta) at n=" + n_label(n_max)));
    const bool within_noise = std::abs(improvement) <= mult * se;
    if (std::abs(sign_term) > 1e-9) {
      if (!within_noise && improvement * sign_term < 0) all_sign_ok = false;
      if (!within_noise && improvement * sign_term > 0) any_significant = true;
    } else if (!within_noise) {
      all_sign_ok = false;
    }
  }
  Verdict sign;
  sign.name = "sweep/sign_rule";
  sign.observed = sign_term;
  sign.predicted = sign_term;
  sign.se = 0.0;
  sign.multiplier = mult;
  if (std::abs(sign_term) > 1e-9) {
    sign.pass = all_sign_ok && any_significant;
    sign.note = "improvement sign must match sign(tr(IJ^-1) - d) with at "
                "least one significant beta";
  } else {
    sign.pass = all_sign_ok;
    sign.note = "tr(IJ^-1) = d: E[B_g] must be flat in beta within noise";
  }
  sign.status = sign.pass ? "pass" : "fail";
  result.verdicts.push_back(sign);
  return result;
}

std::vector<BackendComparisonRow> run_backend_comparison(
    const Scenario& scenario, const ScenarioConstants& sc, int n, double beta,
    int replications, uint64_t master_seed) {
  std::vector<BackendComparisonRow> rows(static_cast<size_t>(replications));
  BackendConfig grid_cfg;
  grid_cfg.kind = BackendKind::grid_quadrature;
  BackendConfig mh_cfg;
  mh_cfg.kind = BackendKind::metropolis;

  auto body = [&](long t) {
    BackendComparisonRow& row = rows[static_cast<size_t>(t)];
    row.seed = replication_seed(master_seed, scenario.id, n, beta,
                                static_cast<int>(t));
    try {
      const TrainingSet ts = make_training_set(scenario, n, row.seed);
      const TemperedPosterior pg =
          make_posterior(*scenario.model, *scenario.prior, ts, beta, grid_cfg,
                         sc.optimal.w0);
      const TemperedPosterior pm =
          make_posterior(*scenario.model, *scenario.prior, ts, beta, mh_cfg,
                         sc.optimal.w0);
      const FunctionalBundle fg =
          evaluate_functionals(pg, *scenario.true_dist, sc.optimal.w0);
      const FunctionalBundle fm =
          evaluate_functionals(pm, *scenario.true_dist, sc.optimal.w0);
      row.grid_b_t = fg.b_t;
      row.grid_v = fg.v;
      row.mh_b_t = fm.b_t;
      row.mh_v = fm.v;
      row.mh_se_b_t = fm.mh_se_b_t;
      row.mh_se_v = fm.mh_se_v;

      const PosteriorMoments mg = posterior_moments(pg, sc.optimal.w0);
      const PosteriorMoments mm = posterior_moments(pm, sc.optimal.w0);
      row.grid_mean = mg.m1(0);
      row.mh_mean = mm.m1(0);
      row.grid_m2 = mg.m2(0, 0);
      row.mh_m2 = mm.m2(0, 0);
      // Chain-to-chain SEs for the two moment comparisons.
      const PosteriorRep& rep = pm.rep;
      const int chains = rep.chains;
      const int per = rep.draws_per_chain;
      std::vector<double> cm(chains, 0.0), c2(chains, 0.0);
      const double center = pm.estimators.w_map(0);
      for (int ci = 0; ci < chains; ++ci) {
        double s1 = 0, s2 = 0;
        for (int j = 0; j < per; ++j) {
          const double w = rep.points(ci * per + j, 0);
          s1 += w - center;
          s2 += (w - center) * (w - center);
        }
        cm[ci] = s1 / per;
        c2[ci] = s2 / per;
      }
      row.mh_se_mean = make_stats(cm).se;
      row.mh_se_m2 = make_stats(c2).se;
      row.status = "ok";
    } catch (const std::exception& e) {
      row.status = status_tag(e);
    }
  };
  parallel_for(replications, body, {});
  return rows;
}

std::vector<Verdict> verify_backend_equivalence(
    const std::vector<BackendComparisonRow>& rows) {
  std::vector<Verdict> out;
  long errors = 0;
  for (const auto& r : rows)
    if (r.status != "ok") errors++;
  {
    Verdict v;
    v.name = "backend/error_free";
    v.observed = static_cast<double>(errors);
    v.predicted = 0.0;
    v.se = 0.0;
    v.multiplier = 0.0;
    v.pass = errors == 0;
    v.status = v.pass ? "pass" : "fail";
    v.note = std::to_string(rows.size()) + " paired replications";
    out.push_back(v);
  }
  struct Quantity {
    const char* tag;
    std::function<double(const BackendComparisonRow&)> diff;
    std::function<double(const BackendComparisonRow&)> se;
  };
  const std::vector<Quantity> qs = {
      {"b_t", [](const BackendComparisonRow& r) { return r.mh_b_t - r.grid_b_t; },
       [](const BackendComparisonRow& r) { return r.mh_se_b_t; }},
      {"v", [](const BackendComparisonRow& r) { return r.mh_v - r.grid_v; },
       [](const BackendComparisonRow& r) { return r.mh_se_v; }},
      {"mean", [](const BackendComparisonRow& r) { return r.mh_mean - r.grid_mean; },
       [](const BackendComparisonRow& r) { return r.mh_se_mean; }},
      {"m2", [](const BackendComparisonRow& r) { return r.mh_m2 - r.grid_m2; },
       [](const BackendComparisonRow& r) { return r.mh_se_m2; }},
  };
  for (const auto& q : qs) {
    std::vector<double> zs;
    for (const auto& r : rows) {
      if (r.status != "ok") continue;
      const double se = q.se(r);
      const double d = q.diff(r);
      zs.push_back(se > 0 ? d / se : (d == 0.0 ? 0.0 : kNaN));
    }
    if (zs.empty()) continue;
    const double k = static_cast<double>(zs.size());
    double zbar = 0;
    long within = 0;
    for (double z : zs) {
      zbar += z;
      if (std::abs(z) <= 3.0) within++;
    }
    zbar /= k;
    // The z-scores use chain-to-chain SEs with few degrees of freedom, so
    // their null spread exceeds 1; calibrate the pooled test against the
    // empirical spread rather than assuming unit variance.
    double zvar = 0;
    for (double z : zs) zvar += (z - zbar) * (z - zbar);
    const double zsd = k > 1 ? std::sqrt(zvar / (k - 1)) : 1.0;
    out.push_back(noise_check(std::string("backend/") + q.tag + "/pooled_z",
                              zbar, 0.0, std::max(zsd, 0.5) / std::sqrt(k),
                              3.0,
                              "mean of (mh - grid)/mh_se over replications"));
    const double frac = static_cast<double>(within) / k;
    Verdict v;
    v.name = std::string("backend/") + q.tag + "/frac_within_3se";
    v.observed = frac;
    v.predicted = 1.0;
    v.se = 0.2;
    v.multiplier = 1.0;
    v.pass = frac >= 0.8;
    v.status = v.pass ? "pass" : "fail";
    v.note = "share of replications with |mh - grid| <= 3 mh_se";
    out.push_back(v);
  }
  return out;
}

}  // namespace eos
