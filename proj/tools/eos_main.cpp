// eos: a numerical laboratory for Bayes/Gibbs generalization losses,
// functional variance, WAIC, and TIC under model misspecification.
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <string>

#include <CLI11.hpp>

#include "eos/cli_io.hpp"

namespace {

std::string g17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void print_matrix(const char* name, const eos::Matrix& m) {
  std::printf("%s =", name);
  for (int i = 0; i < m.rows(); ++i) {
    std::printf(" [");
    for (int j = 0; j < m.cols(); ++j)
      std::printf("%s%s", j ? ", " : "", g17(m(i, j)).c_str());
    std::printf("]");
  }
  std::printf("\n");
}

eos::ProgressFn make_progress(const std::string& label) {
  return [label](long done, long total) {
    if (done % 512 != 0 && done != total) return;
    std::fprintf(stderr, "\r%s: %ld/%ld", label.c_str(), done, total);
    if (done == total) std::fprintf(stderr, "\n");
    std::fflush(stderr);
  };
}

void print_verdict_summary(const std::vector<eos::Verdict>& verdicts) {
  long pass = 0, fail = 0, insufficient = 0;
  for (const auto& v : verdicts) {
    if (v.status == "pass")
      pass++;
    else if (v.status == "insufficient_precision")
      insufficient++;
    else
      fail++;
  }
  std::printf("checks: %ld pass, %ld fail, %ld insufficient_precision\n",
              pass, fail, insufficient);
  for (const auto& v : verdicts)
    if (!v.pass)
      std::printf("  FAIL %s: observed=%s predicted=%s se=%s (%s)\n",
                  v.name.c_str(), g17(v.observed).c_str(),
                  g17(v.predicted).c_str(), g17(v.se).c_str(),
                  v.note.c_str());
}

int cmd_constants(const std::string& scenario_id, bool as_json) {
  const eos::ScenarioCatalog catalog = eos::builtin_scenarios();
  const eos::Scenario& scenario = catalog.get(scenario_id);
  eos::ScenarioConstants sc;
  try {
    sc = eos::compute_scenario_constants(scenario);
  } catch (const eos::SingularMatrixError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  if (as_json) {
    auto mat = [](const eos::Matrix& m) {
      std::string s = "[";
      for (int i = 0; i < m.rows(); ++i) {
        if (i) s += ", ";
        s += "[";
        for (int j = 0; j < m.cols(); ++j)
          s += (j ? ", " : "") + g17(m(i, j));
        s += "]";
      }
      return s + "]";
    };
    std::string w0 = "[";
    for (int i = 0; i < sc.optimal.w0.size(); ++i)
      w0 += (i ? ", " : "") + g17(sc.optimal.w0(i));
    w0 += "]";
    std::printf(
        "{\"id\": \"%s\", \"tag\": \"%s\", \"w0\": %s, \"S\": %s, "
        "\"lambda\": %s, \"nu\": %s, \"mu\": %s, \"tic\": %s, "
        "\"I\": %s, \"J\": %s}\n",
        scenario.id.c_str(), eos::to_string(scenario.tag).c_str(), w0.c_str(),
        g17(sc.constants.S).c_str(), g17(sc.constants.lambda).c_str(),
        g17(sc.constants.nu).c_str(), g17(sc.constants.mu).c_str(),
        g17(sc.constants.tic).c_str(), mat(sc.pair.I).c_str(),
        mat(sc.pair.J).c_str());
    return 0;
  }
  std::printf("scenario: %s (%s)\n", scenario.id.c_str(),
              eos::to_string(scenario.tag).c_str());
  std::printf("w0 =");
  for (int i = 0; i < sc.optimal.w0.size(); ++i)
    std::printf(" %s", g17(sc.optimal.w0(i)).c_str());
  std::printf("\n");
  std::printf("S = %s\n", g17(sc.constants.S).c_str());
  std::printf("lambda = %s\n", g17(sc.constants.lambda).c_str());
  std::printf("nu = %s\n", g17(sc.constants.nu).c_str());
  std::printf("mu = %s\n", g17(sc.constants.mu).c_str());
  std::printf("tic = %s\n", g17(sc.constants.tic).c_str());
  print_matrix("I", sc.pair.I);
  print_matrix("J", sc.pair.J);
  return 0;
}

int cmd_replicate(const std::string& config_path, const std::string& out_dir,
                  bool seed_set, uint64_t seed) {
  eos::ExperimentConfig config = eos::load_config(config_path);
  if (seed_set) config.master_seed = seed;
  eos::validate_config(config);
  const eos::ScenarioCatalog catalog = eos::builtin_scenarios();
  const eos::Scenario& scenario = catalog.get(config.scenario_id);
  const eos::ScenarioConstants sc = eos::compute_scenario_constants(scenario);
  std::filesystem::create_directories(out_dir);
  eos::write_text_atomic(out_dir + "/config.txt",
                         eos::serialize_config(config));
  eos::write_manifest(out_dir, eos::make_manifest(config, scenario, sc));
  const auto rows = eos::run_replications(config, scenario, sc,
                                          make_progress(config.scenario_id));
  const auto agg =
      eos::aggregate_rows(rows, config.tolerance_se_multiplier);
  const auto verdicts =
      eos::verify_all(rows, {}, sc, config.tolerance_se_multiplier);
  eos::emit_results(rows, agg, verdicts, out_dir);
  print_verdict_summary(verdicts);
  std::printf("artifacts: %s\n", out_dir.c_str());
  return eos::all_verdicts_pass(verdicts) ? 0 : 1;
}

int cmd_verify(const std::string& in_dir) {
  const eos::RunManifest manifest = eos::read_manifest(in_dir);
  double mult = 3.0;
  if (std::filesystem::exists(in_dir + "/config.txt"))
    mult = eos::load_config(in_dir + "/config.txt").tolerance_se_multiplier;
  const auto rows = eos::read_rows_csv(in_dir + "/rows.csv");
  const eos::ScenarioCatalog catalog = eos::builtin_scenarios();
  const eos::Scenario& scenario = catalog.get(manifest.scenario_id);
  const eos::ScenarioConstants sc = eos::compute_scenario_constants(scenario);
  const auto agg = eos::aggregate_rows(rows, mult);
  const auto verdicts = eos::verify_all(rows, {}, sc, mult);
  eos::write_text_atomic(in_dir + "/aggregate.json",
                         eos::serialize_aggregate(agg));
  eos::write_text_atomic(in_dir + "/verdicts.json",
                         eos::serialize_verdicts(verdicts));
  print_verdict_summary(verdicts);
  return eos::all_verdicts_pass(verdicts) ? 0 : 1;
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir,
              bool seed_set, uint64_t seed) {
  eos::ExperimentConfig config = eos::load_config(config_path);
  if (seed_set) config.master_seed = seed;
  eos::validate_config(config);
  const eos::ScenarioCatalog catalog = eos::builtin_scenarios();
  const eos::Scenario& scenario = catalog.get(config.scenario_id);
  const eos::ScenarioConstants sc = eos::compute_scenario_constants(scenario);
  std::filesystem::create_directories(out_dir);
  eos::write_text_atomic(out_dir + "/config.txt",
                         eos::serialize_config(config));
  eos::write_manifest(out_dir, eos::make_manifest(config, scenario, sc));
  const eos::SweepResult result =
      eos::beta_sweep(config, scenario, sc, make_progress(config.scenario_id));
  eos::write_sweep_csv(out_dir + "/beta_sweep.csv", result);
  eos::write_text_atomic(out_dir + "/sweep_verdicts.json",
                         eos::serialize_verdicts(result.verdicts));
  for (const auto& p : result.points)
    std::printf("n=%d beta=%s mean_b_g=%s se=%s\n", p.n,
                eos::format_beta(p.beta).c_str(), g17(p.mean_b_g).c_str(),
                g17(p.se_b_g).c_str());
  print_verdict_summary(result.verdicts);
  return eos::all_verdicts_pass(result.verdicts) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "eos: Monte Carlo laboratory for Bayes/Gibbs losses, functional "
      "variance, WAIC and TIC under misspecification"};
  app.footer(
      "Environment:\n  EOS_WORKERS  worker count override (default: "
      "available parallelism)");
  app.require_subcommand(1);

  std::string scenario_id, config_path, out_dir, in_dir;
  bool as_json = false;
  uint64_t seed = 0;

  auto* constants =
      app.add_subcommand("constants",
                         "Optimal parameter and asymptotic constants "
                         "(S, lambda, nu, mu, TIC) of a scenario");
  constants->add_option("scenario", scenario_id, "scenario id")->required();
  constants->add_flag("--json", as_json, "emit JSON");

  auto* replicate = app.add_subcommand(
      "replicate", "Run the replication study and emit artifacts");
  replicate->add_option("--config", config_path, "config file")
      ->required()
      ->check(CLI::ExistingFile);
  replicate->add_option("--out", out_dir, "output directory")->required();
  auto* rep_seed =
      replicate->add_option("--seed", seed, "master seed override");

  auto* verify = app.add_subcommand(
      "verify", "Recompute aggregates and verdicts from an artifact dir");
  verify->add_option("--in", in_dir, "artifact directory")
      ->required()
      ->check(CLI::ExistingDirectory);

  auto* sweep = app.add_subcommand(
      "sweep-beta", "Mean Bayes generalization loss across the beta grid");
  sweep->add_option("--config", config_path, "config file")
      ->required()
      ->check(CLI::ExistingFile);
  sweep->add_option("--out", out_dir, "output directory")->required();
  auto* sweep_seed = sweep->add_option("--seed", seed, "master seed override");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(constants)) return cmd_constants(scenario_id, as_json);
    if (app.got_subcommand(replicate))
      return cmd_replicate(config_path, out_dir, rep_seed->count() > 0, seed);
    if (app.got_subcommand(verify)) return cmd_verify(in_dir);
    if (app.got_subcommand(sweep))
      return cmd_sweep(config_path, out_dir, sweep_seed->count() > 0, seed);
  } catch (const eos::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
