#include "eos/cli_io.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "eos/rng.hpp"

namespace eos {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& raw, int line) {
  const std::string s = trim(raw);
  if (s.empty())
    throw ConfigError("parse_error: empty number at line " +
                          std::to_string(line),
                      line);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size())
    throw ConfigError(
        "parse_error: bad number '" + s + "' at line " + std::to_string(line),
        line);
  return v;
}

long long parse_int(const std::string& raw, int line) {
  const std::string s = trim(raw);
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size())
    throw ConfigError("parse_error: bad integer '" + s + "' at line " +
                          std::to_string(line),
                      line);
  return v;
}

uint64_t parse_u64(const std::string& raw, int line) {
  const std::string s = trim(raw);
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size())
    throw ConfigError("parse_error: bad seed '" + s + "' at line " +
                          std::to_string(line),
                      line);
  return static_cast<uint64_t>(v);
}

std::string fmt_g17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string json_number(double x) {
  if (!std::isfinite(x)) return "null";
  return fmt_g17(x);
}

std::string json_string(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(ch) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", ch);
          out += buf;
        } else {
          out += ch;
        }
    }
  }
  out += "\"";
  return out;
}

std::string json_matrix(const Matrix& m) {
  std::string out = "[";
  for (int i = 0; i < m.rows(); ++i) {
    if (i) out += ", ";
    out += "[";
    for (int j = 0; j < m.cols(); ++j) {
      if (j) out += ", ";
      out += json_number(m(i, j));
    }
    out += "]";
  }
  out += "]";
  return out;
}

std::string json_vector(const Vector& v) {
  std::string out = "[";
  for (int i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += json_number(v(i));
  }
  out += "]";
  return out;
}

std::string backend_name(BackendKind kind) {
  return kind == BackendKind::grid_quadrature ? "grid" : "metropolis";
}

BackendKind backend_from_name(const std::string& name, int line) {
  if (name == "grid") return BackendKind::grid_quadrature;
  if (name == "metropolis") return BackendKind::metropolis;
  throw ConfigError("validation_error: backend must be 'grid' or "
                    "'metropolis', got '" +
                        name + "'",
                    line);
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig config;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  bool saw_n_grid = false, saw_beta_grid = false;
  while (std::getline(in, raw)) {
    line_no++;
    std::string line = raw;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("parse_error: expected 'key = value' at line " +
                            std::to_string(line_no),
                        line_no);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "scenario") {
      config.scenario_id = value;
    } else if (key == "n_grid") {
      config.n_grid.clear();
      for (const auto& tok : split(value, ','))
        config.n_grid.push_back(static_cast<int>(parse_int(tok, line_no)));
      saw_n_grid = true;
    } else if (key == "beta_grid") {
      config.beta_grid.clear();
      for (const auto& tok : split(value, ',')) {
        const std::string t = trim(tok);
        if (t == "inf")
          config.beta_grid.push_back(std::numeric_limits<double>::infinity());
        else
          config.beta_grid.push_back(parse_double(t, line_no));
      }
      saw_beta_grid = true;
    } else if (key == "replications" || key == "R") {
      config.replications = static_cast<int>(parse_int(value, line_no));
    } else if (key == "master_seed") {
      config.master_seed = parse_u64(value, line_no);
    } else if (key == "backend") {
      config.backend = backend_from_name(value, line_no);
    } else if (key == "se_multiplier") {
      config.tolerance_se_multiplier = parse_double(value, line_no);
    } else {
      throw ConfigError("parse_error: unknown key '" + key + "' at line " +
                            std::to_string(line_no),
                        line_no);
    }
  }
  (void)saw_n_grid;
  (void)saw_beta_grid;
  validate_config(config);
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("io_error: cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

void validate_config(const ExperimentConfig& config) {
  if (config.scenario_id.empty())
    throw ConfigError("validation_error: scenario is required");
  const ScenarioCatalog catalog = builtin_scenarios();
  if (!catalog.contains(config.scenario_id)) {
    std::string ids;
    for (const auto& s : catalog.all()) {
      if (!ids.empty()) ids += ", ";
      ids += s.id;
    }
    throw ConfigError("validation_error: unknown scenario '" +
                      config.scenario_id + "' (known: " + ids + ")");
  }
  const int d = catalog.get(config.scenario_id).model->dim();
  if (config.replications < 100)
    throw ConfigError("validation_error: R >= 100 required, got " +
                      std::to_string(config.replications));
  if (config.n_grid.empty())
    throw ConfigError("validation_error: n_grid must be non-empty");
  int prev = 0;
  for (int n : config.n_grid) {
    if (n < 10 * d)
      throw ConfigError("validation_error: n >= 10*dim required, got n=" +
                        std::to_string(n));
    if (n <= prev)
      throw ConfigError(
          "validation_error: n_grid must be strictly increasing");
    prev = n;
  }
  if (config.beta_grid.empty())
    throw ConfigError("validation_error: beta_grid must be non-empty");
  for (size_t i = 0; i < config.beta_grid.size(); ++i) {
    const double b = config.beta_grid[i];
    if (std::isnan(b) || b <= 0.0)
      throw ConfigError("validation_error: beta must be > 0 (inf allowed)");
    for (size_t j = 0; j < i; ++j)
      if (format_beta(config.beta_grid[j]) == format_beta(b))
        throw ConfigError("validation_error: duplicate beta " +
                          format_beta(b));
  }
  if (!(config.tolerance_se_multiplier > 0))
    throw ConfigError("validation_error: se_multiplier must be > 0");
}

std::string serialize_config(const ExperimentConfig& config) {
  std::string out;
  out += "scenario = " + config.scenario_id + "\n";
  out += "n_grid = ";
  for (size_t i = 0; i < config.n_grid.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(config.n_grid[i]);
  }
  out += "\n";
  out += "beta_grid = ";
  for (size_t i = 0; i < config.beta_grid.size(); ++i) {
    if (i) out += ",";
    out += format_beta(config.beta_grid[i]);
  }
  out += "\n";
  out += "replications = " + std::to_string(config.replications) + "\n";
  out += "master_seed = " + std::to_string(config.master_seed) + "\n";
  out += "backend = " + backend_name(config.backend) + "\n";
  out += "se_multiplier = " + format_beta(config.tolerance_se_multiplier) +
         "\n";
  return out;
}

std::string config_hash(const ExperimentConfig& config) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64,
                fnv1a64(serialize_config(config)));
  return buf;
}

RunManifest make_manifest(const ExperimentConfig& config,
                          const Scenario& scenario,
                          const ScenarioConstants& sc) {
  RunManifest m;
  m.config_digest = config_hash(config);
  const std::time_t now = std::time(nullptr);
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  m.timestamp_utc = stamp;
  m.scenario_id = scenario.id;
  m.scenario_tag = to_string(scenario.tag);
  m.dim = scenario.model->dim();
  m.w0 = sc.optimal.w0;
  m.constants = sc.constants;
  m.I = sc.pair.I;
  m.J = sc.pair.J;
  return m;
}

void write_text_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("io_error: cannot open " + tmp + " for writing");
    out << content;
    out.flush();
    if (!out) throw Error("io_error: short write to " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw Error("io_error: rename " + tmp + " -> " + path + " failed");
}

void write_manifest(const std::string& dir, const RunManifest& m) {
  std::string j = "{\n";
  j += "  \"config_hash\": " + json_string(m.config_digest) + ",\n";
  j += "  \"tool_version\": " + json_string(m.tool_version) + ",\n";
  j += "  \"timestamp_utc\": " + json_string(m.timestamp_utc) + ",\n";
  j += "  \"rng_algorithm\": " + json_string(m.rng_algorithm) + ",\n";
  j += "  \"scenario\": {\n";
  j += "    \"id\": " + json_string(m.scenario_id) + ",\n";
  j += "    \"tag\": " + json_string(m.scenario_tag) + ",\n";
  j += "    \"dim\": " + std::to_string(m.dim) + ",\n";
  j += "    \"w0\": " + json_vector(m.w0) + ",\n";
  j += "    \"S\": " + json_number(m.constants.S) + ",\n";
  j += "    \"lambda\": " + json_number(m.constants.lambda) + ",\n";
  j += "    \"nu\": " + json_number(m.constants.nu) + ",\n";
  j += "    \"mu\": " + json_number(m.constants.mu) + ",\n";
  j += "    \"tic\": " + json_number(m.constants.tic) + ",\n";
  j += "    \"I\": " + json_matrix(m.I) + ",\n";
  j += "    \"J\": " + json_matrix(m.J) + "\n";
  j += "  }\n";
  j += "}\n";
  write_text_atomic(dir + "/manifest.json", j);
}

RunManifest read_manifest(const std::string& dir) {
  const std::string path = dir + "/manifest.json";
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io_error: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw Error("parse_error: manifest.json: " + std::string(e.what()));
  }
  RunManifest m;
  m.config_digest = j.at("config_hash").get<std::string>();
  m.tool_version = j.at("tool_version").get<std::string>();
  m.timestamp_utc = j.at("timestamp_utc").get<std::string>();
  m.rng_algorithm = j.at("rng_algorithm").get<std::string>();
  const auto& s = j.at("scenario");
  m.scenario_id = s.at("id").get<std::string>();
  m.scenario_tag = s.at("tag").get<std::string>();
  m.dim = s.at("dim").get<int>();
  const auto& w0 = s.at("w0");
  m.w0 = Vector(w0.size());
  for (size_t i = 0; i < w0.size(); ++i) m.w0(static_cast<int>(i)) = w0[i];
  m.constants.S = s.at("S").get<double>();
  m.constants.lambda = s.at("lambda").get<double>();
  m.constants.nu = s.at("nu").get<double>();
  m.constants.mu = s.at("mu").get<double>();
  m.constants.tic = s.at("tic").get<double>();
  auto load_matrix = [](const nlohmann::json& rows) {
    const int r = static_cast<int>(rows.size());
    const int c = r ? static_cast<int>(rows[0].size()) : 0;
    Matrix m2(r, c);
    for (int i = 0; i < r; ++i)
      for (int k = 0; k < c; ++k)
        m2(i, k) = rows[static_cast<size_t>(i)][static_cast<size_t>(k)];
    return m2;
  };
  m.I = load_matrix(s.at("I"));
  m.J = load_matrix(s.at("J"));
  return m;
}

namespace {

std::vector<std::string> row_header(int d) {
  std::vector<std::string> cols = {"scenario_id", "n",   "beta", "seed",
                                   "b_g",         "b_t", "g_g",  "g_t",
                                   "v",           "waic", "tic_n"};
  for (int i = 0; i < d; ++i) cols.push_back("w_map_" + std::to_string(i));
  for (int i = 0; i < d; ++i) cols.push_back("w_mle_" + std::to_string(i));
  for (int i = 1; i <= 6; ++i) cols.push_back("d" + std::to_string(i));
  for (int i = 0; i < d; ++i) cols.push_back("m1_" + std::to_string(i));
  auto tri = [&](const std::string& base) {
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j)
        cols.push_back(base + "_" + std::to_string(i) + std::to_string(j));
  };
  tri("m2");
  cols.push_back("m3");
  tri("s2");
  tri("m2k");
  cols.push_back("mh_se_b_t");
  cols.push_back("mh_se_v");
  cols.push_back("status");
  return cols;
}

}  // namespace

void write_rows_csv(const std::string& path,
                    const std::vector<ReplicationRow>& rows, int dim) {
  int d = dim;
  if (d < 0) d = rows.empty() ? 1 : static_cast<int>(rows.front().w_map.size());
  std::string out;
  const auto header = row_header(d);
  for (size_t i = 0; i < header.size(); ++i) {
    if (i) out += ",";
    out += header[i];
  }
  out += "\n";
  char buf[64];
  for (const auto& r : rows) {
    out += r.scenario_id;
    out += "," + std::to_string(r.n);
    out += "," + format_beta(r.beta);
    std::snprintf(buf, sizeof(buf), "%" PRIu64, r.seed);
    out += ",";
    out += buf;
    auto num = [&](double x) {
      out += ",";
      out += fmt_g17(x);
    };
    num(r.b_g);
    num(r.b_t);
    num(r.g_g);
    num(r.g_t);
    num(r.v);
    num(r.waic);
    num(r.tic_n);
    for (int i = 0; i < d; ++i) num(r.w_map.size() > i ? r.w_map(i) : NAN);
    for (int i = 0; i < d; ++i) num(r.w_mle.size() > i ? r.w_mle(i) : NAN);
    num(r.d.d1);
    num(r.d.d2);
    num(r.d.d3);
    num(r.d.d4);
    num(r.d.d5);
    num(r.d.d6);
    for (int i = 0; i < d; ++i) num(r.m1.size() > i ? r.m1(i) : NAN);
    auto tri = [&](const Matrix& m) {
      for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j)
          num(m.rows() > i && m.cols() > j ? m(i, j) : NAN);
    };
    tri(r.m2);
    num(r.m3);
    tri(r.s2);
    tri(r.m2k);
    num(r.mh_se_b_t);
    num(r.mh_se_v);
    out += "," + r.status + "\n";
  }
  write_text_atomic(path, out);
}

std::vector<ReplicationRow> read_rows_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io_error: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw Error("parse_error: empty csv " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(line, ',');
  int d = 0;
  for (const auto& h : header)
    if (h.rfind("w_map_", 0) == 0) d++;
  const auto expected = row_header(d);
  if (header != expected)
    throw Error("parse_error: unexpected csv header in " + path);

  std::vector<ReplicationRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    line_no++;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != expected.size())
      throw Error("parse_error: wrong field count at line " +
                  std::to_string(line_no) + " in " + path);
    size_t k = 0;
    auto next = [&]() -> const std::string& { return f[k++]; };
    auto next_d = [&]() {
      const std::string& s = f[k++];
      char* end = nullptr;
      const double v = std::strtod(s.c_str(), &end);
      if (end != s.c_str() + s.size())
        throw Error("parse_error: bad number '" + s + "' at line " +
                    std::to_string(line_no) + " in " + path);
      return v;
    };
    ReplicationRow r;
    r.scenario_id = next();
    r.n = static_cast<int>(std::strtol(next().c_str(), nullptr, 10));
    r.beta = next_d();
    r.seed = static_cast<uint64_t>(std::strtoull(next().c_str(), nullptr, 10));
    r.b_g = next_d();
    r.b_t = next_d();
    r.g_g = next_d();
    r.g_t = next_d();
    r.v = next_d();
    r.waic = next_d();
    r.tic_n = next_d();
    r.w_map = Vector(d);
    for (int i = 0; i < d; ++i) r.w_map(i) = next_d();
    r.w_mle = Vector(d);
    for (int i = 0; i < d; ++i) r.w_mle(i) = next_d();
    r.d.d1 = next_d();
    r.d.d2 = next_d();
    r.d.d3 = next_d();
    r.d.d4 = next_d();
    r.d.d5 = next_d();
    r.d.d6 = next_d();
    r.m1 = Vector(d);
    for (int i = 0; i < d; ++i) r.m1(i) = next_d();
    auto tri = [&]() {
      Matrix m = Matrix::Zero(d, d);
      for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) {
          m(i, j) = next_d();
          m(j, i) = m(i, j);
        }
      return m;
    };
    r.m2 = tri();
    r.m3 = next_d();
    r.s2 = tri();
    r.m2k = tri();
    r.mh_se_b_t = next_d();
    r.mh_se_v = next_d();
    r.status = next();
    rows.push_back(std::move(r));
  }
  return rows;
}

namespace {

std::string json_field_stats(const char* name, const FieldStats& s) {
  return std::string("\"") + name + "\": {\"mean\": " + json_number(s.mean) +
         ", \"se\": " + json_number(s.se) + "}";
}

}  // namespace

std::string serialize_aggregate(const AggregateReport& agg) {
  std::string j = "{\n";
  j += "  \"se_multiplier\": " + json_number(agg.se_multiplier) + ",\n";
  j += "  \"cells\": {\n";
  for (size_t c = 0; c < agg.cells.size(); ++c) {
    const AggregateCell& cell = agg.cells[c];
    const std::string key =
        "n=" + std::to_string(cell.n) + "/beta=" + format_beta(cell.beta);
    j += "    " + json_string(key) + ": {\n";
    j += "      \"n\": " + std::to_string(cell.n) + ",\n";
    j += "      \"beta\": " + json_string(format_beta(cell.beta)) + ",\n";
    j += "      \"count_ok\": " + std::to_string(cell.count_ok) + ",\n";
    j += "      \"count_error\": " + std::to_string(cell.count_error) + ",\n";
    const std::pair<const char*, const FieldStats*> fields[] = {
        {"b_g", &cell.b_g},   {"b_t", &cell.b_t},
        {"g_g", &cell.g_g},   {"g_t", &cell.g_t},
        {"v", &cell.v},       {"waic", &cell.waic},
        {"tic_n", &cell.tic_n}, {"d1", &cell.d1},
        {"d2", &cell.d2},     {"d3", &cell.d3},
        {"d4", &cell.d4},     {"d5", &cell.d5},
        {"d6", &cell.d6},     {"bt_centered", &cell.bt_centered},
        {"gt_centered", &cell.gt_centered}, {"eqs_bayes", &cell.eqs_bayes},
        {"eqs_gibbs", &cell.eqs_gibbs},
    };
    j += "      \"stats\": {\n";
    for (size_t i = 0; i < std::size(fields); ++i) {
      j += "        " + json_field_stats(fields[i].first, *fields[i].second);
      j += i + 1 < std::size(fields) ? ",\n" : "\n";
    }
    j += "      },\n";
    j += "      \"derived\": {\n";
    j += "        \"bayes_gap\": " + json_number(cell.bayes_gap) + ",\n";
    j += "        \"bayes_rhs\": " + json_number(cell.bayes_rhs) + ",\n";
    j += "        \"gibbs_gap\": " + json_number(cell.gibbs_gap) + ",\n";
    j += "        \"gibbs_rhs\": " + json_number(cell.gibbs_rhs) + ",\n";
    j += "        \"beta_v\": " + json_number(cell.beta_v) + ",\n";
    j += "        \"mean_tic_n\": " + json_number(cell.mean_tic_n) + ",\n";
    j += "        \"sd_n_eqs_bayes\": " + json_number(cell.sd_n_eqs_bayes) +
         "\n";
    j += "      },\n";
    const bool fin = std::isfinite(cell.beta);
    j += std::string("      \"eqs_bayes_pass\": ") +
         (fin ? (cell.eqs_bayes_pass ? "true" : "false") : "null") + ",\n";
    j += std::string("      \"eqs_gibbs_pass\": ") +
         (fin ? (cell.eqs_gibbs_pass ? "true" : "false") : "null") + "\n";
    j += "    }";
    j += c + 1 < agg.cells.size() ? ",\n" : "\n";
  }
  j += "  }\n";
  j += "}\n";
  return j;
}

std::string serialize_verdicts(const std::vector<Verdict>& verdicts) {
  std::string j = "{\n";
  j += std::string("  \"all_pass\": ") +
       (all_verdicts_pass(verdicts) ? "true" : "false") + ",\n";
  j += "  \"checks\": [\n";
  for (size_t i = 0; i < verdicts.size(); ++i) {
    const Verdict& v = verdicts[i];
    j += "    {";
    j += "\"name\": " + json_string(v.name) + ", ";
    j += "\"observed\": " + json_number(v.observed) + ", ";
    j += "\"predicted\": " + json_number(v.predicted) + ", ";
    j += "\"se\": " + json_number(v.se) + ", ";
    j += "\"multiplier\": " + json_number(v.multiplier) + ", ";
    j += "\"status\": " + json_string(v.status) + ", ";
    j += std::string("\"pass\": ") + (v.pass ? "true" : "false") + ", ";
    j += "\"note\": " + json_string(v.note);
    j += "}";
    j += i + 1 < verdicts.size() ? ",\n" : "\n";
  }
  j += "  ]\n";
  j += "}\n";
  return j;
}

void emit_results(const std::vector<ReplicationRow>& rows,
                  const AggregateReport& aggregate,
                  const std::vector<Verdict>& verdicts,
                  const std::string& out_dir) {
  write_rows_csv(out_dir + "/rows.csv", rows);
  write_text_atomic(out_dir + "/aggregate.json", serialize_aggregate(aggregate));
  write_text_atomic(out_dir + "/verdicts.json", serialize_verdicts(verdicts));
}

void write_sweep_csv(const std::string& path, const SweepResult& sweep) {
  std::string out =
      "scenario_id,n,beta,inv_beta,mean_b_g,se_b_g,replications\n";
  for (const auto& p : sweep.points) {
    out += sweep.scenario_id;
    out += "," + std::to_string(p.n);
    out += "," + format_beta(p.beta);
    out += "," + fmt_g17(p.inv_beta);
    out += "," + fmt_g17(p.mean_b_g);
    out += "," + fmt_g17(p.se_b_g);
    out += "," + std::to_string(p.replications) + "\n";
  }
  write_text_atomic(path, out);
}

bool all_verdicts_pass(const std::vector<Verdict>& verdicts) {
  for (const auto& v : verdicts)
    if (!v.pass) return false;
  return true;
}

}  // namespace eos
