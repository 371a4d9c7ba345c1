#ifndef EOS_CLI_IO_HPP
#define EOS_CLI_IO_HPP

#include <string>
#include <vector>

#include "eos/experiment_harness.hpp"

namespace eos {

// Flat key = value config text: lists comma-separated, `inf` accepted for
// beta, `#` starts a comment.  Keys (defaults in parentheses): scenario,
// n_grid (100,400,1600), beta_grid (0.5,1,2,inf), replications/R (10000),
// master_seed (1), backend (grid), se_multiplier (3).
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Canonical text such that load_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& config);

// FNV-1a 64 digest of the canonical config text, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

// Throws ConfigError("validation_error: ...") naming the violated invariant.
void validate_config(const ExperimentConfig& config);

struct RunManifest {
  std::string config_digest;
  std::string tool_version = "0.1.0";
  std::string timestamp_utc;
  std::string rng_algorithm = "splitmix64";
  std::string scenario_id;
  std::string scenario_tag;
  int dim = 0;
  Vector w0;
  AsymptoticConstants constants;
  Matrix I, J;
};

RunManifest make_manifest(const ExperimentConfig& config,
                          const Scenario& scenario,
                          const ScenarioConstants& sc);

// manifest.json must exist before any row output lands in the directory.
void write_manifest(const std::string& dir, const RunManifest& manifest);
RunManifest read_manifest(const std::string& dir);

// Replication rows as CSV.  The column order is part of the artifact
// contract; floats use 17 significant digits and round-trip exactly.
void write_rows_csv(const std::string& path,
                    const std::vector<ReplicationRow>& rows, int dim = -1);
std::vector<ReplicationRow> read_rows_csv(const std::string& path);

std::string serialize_aggregate(const AggregateReport& agg);
std::string serialize_verdicts(const std::vector<Verdict>& verdicts);

// rows.csv + aggregate.json + verdicts.json, each written atomically
// (temp + rename).  Throws Error("io_error: ...") on filesystem failure.
void emit_results(const std::vector<ReplicationRow>& rows,
                  const AggregateReport& aggregate,
                  const std::vector<Verdict>& verdicts,
                  const std::string& out_dir);

void write_sweep_csv(const std::string& path, const SweepResult& sweep);

void write_text_atomic(const std::string& path, const std::string& content);

bool all_verdicts_pass(const std::vector<Verdict>& verdicts);

}  // namespace eos

#endif  // EOS_CLI_IO_HPP
