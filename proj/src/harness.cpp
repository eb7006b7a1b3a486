#include "rzf/harness.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "text_io.hpp"

#ifndef RZF_GIT_REV
#define RZF_GIT_REV "unknown"
#endif

namespace rzf {

namespace {

using textio::fmt17;

constexpr std::pair<ExperimentKind, const char*> kNames[] = {
    {ExperimentKind::sopc_gap, "sopc_gap"},
    {ExperimentKind::complexity, "complexity"},
    {ExperimentKind::control_convergence, "control_convergence"},
    {ExperimentKind::pareto_region, "pareto_region"},
    {ExperimentKind::leakage_table, "leakage_table"},
    {ExperimentKind::mimo_sumrate, "mimo_sumrate"},
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string tok;
  for (char c : s) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!tok.empty()) out.push_back(tok);
      tok.clear();
    } else {
      tok += c;
    }
  }
  if (!tok.empty()) out.push_back(tok);
  return out;
}

double to_double(const std::string& key, const std::string& tok) {
  try {
    return textio::parse_double(tok, 0, key);
  } catch (const ParseError&) {
    throw ConfigError("key '" + key + "': not a number: '" + tok + "'");
  }
}

long to_long(const std::string& key, const std::string& tok) {
  try {
    return textio::parse_int(tok, 0, key);
  } catch (const ParseError&) {
    throw ConfigError("key '" + key + "': not an integer: '" + tok + "'");
  }
}

// "a:step:b" expands to an inclusive range, anything else is a list.
std::vector<double> to_doubles(const std::string& key, const std::string& value) {
  std::vector<double> out;
  if (std::count(value.begin(), value.end(), ':') == 2) {
    const auto c1 = value.find(':');
    const auto c2 = value.find(':', c1 + 1);
    const double a = to_double(key, trim(value.substr(0, c1)));
    const double step = to_double(key, trim(value.substr(c1 + 1, c2 - c1 - 1)));
    const double b = to_double(key, trim(value.substr(c2 + 1)));
    if (!(step > 0) || b < a) throw ConfigError("key '" + key + "': bad range '" + value + "'");
    for (long k = 0; a + static_cast<double>(k) * step <= b + 1e-9 * step; ++k) out.push_back(a + static_cast<double>(k) * step);
    return out;
  }
  for (const auto& tok : split_list(value)) out.push_back(to_double(key, tok));
  return out;
}

std::string join(const std::vector<double>& xs) {
  std::string s;
  for (std::size_t k = 0; k < xs.size(); ++k) s += (k ? "," : "") + fmt17(xs[k]);
  return s;
}

std::string join(const std::vector<int>& xs) {
  std::string s;
  for (std::size_t k = 0; k < xs.size(); ++k) s += (k ? "," : "") + std::to_string(xs[k]);
  return s;
}

}  // namespace

const char* to_string(ExperimentKind kind) {
  for (const auto& [k, name] : kNames)
    if (k == kind) return name;
  return "unknown";
}

ExperimentKind experiment_from_string(const std::string& name) {
  for (const auto& [k, n] : kNames)
    if (name == n) return k;
  throw ConfigError("unknown experiment '" + name + "'");
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string raw;
  int number = 0;
  bool have_experiment = false;
  std::map<std::string, int> seen;
  while (std::getline(in, raw)) {
    ++number;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.resize(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(number) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (seen[key]++) throw ConfigError("line " + std::to_string(number) + ": duplicate key '" + key + "'");

    if (key == "experiment") {
      cfg.experiment = experiment_from_string(value);
      have_experiment = true;
    } else if (key == "K") {
      cfg.K = to_long(key, value);
    } else if (key == "N") {
      cfg.N = to_long(key, value);
    } else if (key == "M") {
      cfg.M = to_long(key, value);
    } else if (key == "d") {
      cfg.d = static_cast<int>(to_long(key, value));
    } else if (key == "snr_db") {
      cfg.snr_db = to_doubles(key, value);
    } else if (key == "trials") {
      cfg.trials = static_cast<int>(to_long(key, value));
    } else if (key == "seed") {
      const long s = to_long(key, value);
      if (s < 0) throw ConfigError("key 'seed' must be >= 0");
      cfg.seed = static_cast<std::uint64_t>(s);
    } else if (key == "utility") {
      cfg.utility = value;
    } else if (key == "weights") {
      cfg.weights = to_doubles(key, value);
    } else if (key == "alpha") {
      cfg.alpha = to_doubles(key, value);
    } else if (key == "sizes") {
      cfg.sizes.clear();
      for (const auto& tok : split_list(value)) cfg.sizes.push_back(static_cast<int>(to_long(key, tok)));
    } else if (key == "reps") {
      cfg.reps = static_cast<int>(to_long(key, value));
    } else if (key == "samples") {
      cfg.samples = static_cast<int>(to_long(key, value));
    } else if (key == "cloud") {
      const long c = to_long(key, value);
      if (c != 0 && c != 1) throw ConfigError("key 'cloud' must be 0 or 1");
      cfg.cloud = c == 1;
    } else if (key == "threads") {
      const long t = to_long(key, value);
      if (t < 0) throw ConfigError("key 'threads' must be >= 0");
      cfg.threads = static_cast<unsigned>(t);
    } else if (key == "output") {
      cfg.output = value;
    } else if (key == "format") {
      cfg.format = value;
    } else {
      throw ConfigError("line " + std::to_string(number) + ": unknown key '" + key + "'");
    }
  }
  if (!have_experiment) throw ConfigError("missing key 'experiment'");
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void validate(const ExperimentConfig& cfg) {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (cfg.K < 1 || cfg.N < 1 || cfg.M < 1) fail("K, N and M must be >= 1");
  if (cfg.trials < 1) fail("trials must be >= 1");
  if (cfg.snr_db.empty()) fail("snr_db must not be empty");
  if (cfg.format != "csv" && cfg.format != "json") fail("format must be csv or json");
  if (cfg.utility != "weighted_sum" && cfg.utility != "egalitarian" && cfg.utility != "nash")
    fail("utility must be weighted_sum, egalitarian or nash");
  for (double a : cfg.alpha)
    if (!(a >= 0)) fail("alpha entries must be >= 0");
  for (double w : cfg.weights)
    if (!(w >= 0)) fail("weights must be >= 0");
  if (cfg.alpha.empty()) fail("alpha must not be empty");

  switch (cfg.experiment) {
    case ExperimentKind::sopc_gap:
      break;
    case ExperimentKind::complexity:
      if (cfg.sizes.empty()) fail("sizes must not be empty");
      for (int s : cfg.sizes)
        if (s < 2) fail("sizes must be >= 2");
      if (cfg.reps < 1) fail("reps must be >= 1");
      break;
    case ExperimentKind::control_convergence:
      if (cfg.utility == "weighted_sum" && !cfg.weights.empty() && static_cast<Index>(cfg.weights.size()) != cfg.K)
        fail("weights must have K entries");
      break;
    case ExperimentKind::pareto_region:
      if (cfg.K != 2) fail("pareto_region needs K = 2");
      if (cfg.samples < 1) fail("samples must be >= 1");
      break;
    case ExperimentKind::leakage_table:
      if (cfg.utility != "weighted_sum") fail("leakage_table sweeps weighted_sum weights");
      if (cfg.weights.size() % static_cast<std::size_t>(cfg.K) != 0) fail("weights must come in groups of K");
      break;
    case ExperimentKind::mimo_sumrate:
      if (cfg.d < 1 || cfg.d > std::min(cfg.M, cfg.N)) fail("d must be in [1, min(M, N)]");
      break;
  }
}

std::vector<std::pair<std::string, std::string>> config_echo(const ExperimentConfig& cfg) {
  return {
      {"K", std::to_string(cfg.K)},
      {"N", std::to_string(cfg.N)},
      {"M", std::to_string(cfg.M)},
      {"d", std::to_string(cfg.d)},
      {"snr_db", join(cfg.snr_db)},
      {"trials", std::to_string(cfg.trials)},
      {"seed", std::to_string(cfg.seed)},
      {"utility", cfg.utility},
      {"weights", join(cfg.weights)},
      {"alpha", join(cfg.alpha)},
      {"sizes", join(cfg.sizes)},
      {"reps", std::to_string(cfg.reps)},
      {"samples", std::to_string(cfg.samples)},
      {"cloud", cfg.cloud ? "1" : "0"},
  };
}

const std::string* ResultTable::find_meta(const std::string& key) const {
  for (const auto& [k, v] : meta)
    if (k == key) return &v;
  return nullptr;
}

Index ResultTable::column(const std::string& name) const {
  for (std::size_t k = 0; k < columns.size(); ++k)
    if (columns[k] == name) return static_cast<Index>(k);
  throw ValidationError("no column '" + name + "'");
}

std::vector<std::string> expected_columns(ExperimentKind kind, Index users) {
  switch (kind) {
    case ExperimentKind::sopc_gap:
      return {"snr_db", "sopc_sum_rate", "exact_sum_rate", "gap_pct", "max_trial_gap_pct"};
    case ExperimentKind::complexity:
      return {"N", "sopc_time_us", "oracle_time_us", "sopc_ops", "oracle_ops", "time_ratio"};
    case ExperimentKind::control_convergence:
      return {"trial", "outer_iteration", "utility", "converged"};
    case ExperimentKind::pareto_region:
      return {"trial", "point", "alpha_21", "alpha_12", "rate_1", "rate_2", "dominated_by"};
    case ExperimentKind::leakage_table: {
      std::vector<std::string> cols;
      for (Index k = 0; k < users; ++k) cols.push_back("w_" + std::to_string(k + 1));
      for (Index j = 0; j < users; ++j)
        for (Index i = 0; i < users; ++i)
          if (i != j) cols.push_back("alpha_" + std::to_string(j + 1) + std::to_string(i + 1));
      return cols;
    }
    case ExperimentKind::mimo_sumrate:
      return {"snr_db", "alpha", "zf_feasible", "zf_sum_rate", "rzf_sum_rate", "rzf_unconverged"};
  }
  return {};
}

void check_schema(const ResultTable& table) {
  const ExperimentKind kind = experiment_from_string(table.experiment);
  Index users = 2;
  if (const auto* k = table.find_meta("K")) users = to_long("K", *k);
  if (table.columns != expected_columns(kind, users))
    throw ValidationError("columns do not match the " + table.experiment + " schema");
  for (const auto& row : table.rows)
    if (row.size() != table.columns.size()) throw ValidationError("row width differs from the column count");
}

std::string version_string() { return std::string("rzfcb ") + RZF_GIT_REV; }

void write_csv(std::ostream& out, const ResultTable& table) {
  check_schema(table);
  out << "# experiment=" << table.experiment << '\n';
  for (const auto& [k, v] : table.meta) out << "# " << k << '=' << v << '\n';
  for (std::size_t c = 0; c < table.columns.size(); ++c) out << (c ? "," : "") << table.columns[c];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << fmt17(row[c]);
    out << '\n';
  }
}

ResultTable read_csv(std::istream& in) {
  ResultTable table;
  std::string line;
  int number = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string body = trim(line.substr(1));
      const auto eq = body.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = body.substr(0, eq);
      if (key == "experiment")
        table.experiment = body.substr(eq + 1);
      else
        table.meta.emplace_back(key, body.substr(eq + 1));
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (!header) {
      table.columns = cells;
      header = true;
      continue;
    }
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(textio::parse_double(c, number, "cell"));
    table.rows.push_back(std::move(row));
  }
  if (!header) throw ParseError("missing column header", number);
  check_schema(table);
  return table;
}

void write_json(std::ostream& out, const ResultTable& table) {
  check_schema(table);
  nlohmann::ordered_json j;
  j["experiment"] = table.experiment;
  nlohmann::ordered_json meta = nlohmann::ordered_json::object();
  for (const auto& [k, v] : table.meta) meta[k] = v;
  j["meta"] = meta;
  j["columns"] = table.columns;
  j["rows"] = table.rows;
  out << j.dump(2) << '\n';
}

ResultTable read_json(std::istream& in) {
  ResultTable table;
  try {
    const auto j = nlohmann::ordered_json::parse(in);
    table.experiment = j.at("experiment").get<std::string>();
    for (const auto& [k, v] : j.at("meta").items()) table.meta.emplace_back(k, v.get<std::string>());
    table.columns = j.at("columns").get<std::vector<std::string>>();
    table.rows = j.at("rows").get<std::vector<std::vector<double>>>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed result json: ") + e.what());
  }
  check_schema(table);
  return table;
}

void emit(const ResultTable& table, const std::string& path, const std::string& format) {
  if (format != "csv" && format != "json") throw ConfigError("format must be csv or json");
  auto write = [&](std::ostream& out) { format == "csv" ? write_csv(out, table) : write_json(out, table); };
  if (path.empty() || path == "-") {
    write(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  write(out);
}

}  // namespace rzf
