#ifndef RZF_HARNESS_HPP
#define RZF_HARNESS_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "rzf/core.hpp"

namespace rzf {

/// A solver gave up before meeting its tolerance where the experiment needs a certified result.
class SolverNonConvergence : public Error {
 public:
  using Error::Error;
};

enum class ExperimentKind { sopc_gap, complexity, control_convergence, pareto_region, leakage_table, mimo_sumrate };

const char* to_string(ExperimentKind kind);
ExperimentKind experiment_from_string(const std::string& name);

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::sopc_gap;
  Index K = 3;
  Index N = 3;
  Index M = 2;
  int d = 2;
  std::vector<double> snr_db{-5, 0, 5, 10, 15, 20, 25};
  int trials = 50;
  std::uint64_t seed = 1;
  // weighted_sum | egalitarian | nash
  std::string utility = "weighted_sum";
  // weighted_sum weights; for leakage_table, consecutive groups of K form the sweep
  std::vector<double> weights;
  std::vector<double> alpha{0.1};
  // complexity sizes (N = K) and timing repetitions
  std::vector<int> sizes{4, 8, 16, 32};
  int reps = 100;
  // pareto_region cloud size and whether the cloud rows are emitted
  int samples = 100000;
  bool cloud = false;
  unsigned threads = 0;
  std::string output;
  std::string format = "csv";
};

/// Flat key=value text, '#' comments. Unknown keys and bad values raise ConfigError.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
void validate(const ExperimentConfig& cfg);
std::vector<std::pair<std::string, std::string>> config_echo(const ExperimentConfig& cfg);

struct ResultTable {
  std::string experiment;
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  const std::string* find_meta(const std::string& key) const;
  Index column(const std::string& name) const;
};

std::vector<std::string> expected_columns(ExperimentKind kind, Index users);

/// Rejects unknown experiments, column lists that differ from the schema and ragged rows.
void check_schema(const ResultTable& table);

std::string version_string();

void write_csv(std::ostream& out, const ResultTable& table);
ResultTable read_csv(std::istream& in);
void write_json(std::ostream& out, const ResultTable& table);
ResultTable read_json(std::istream& in);

/// Writes to path, or stdout when path is empty. format is csv or json.
void emit(const ResultTable& table, const std::string& path, const std::string& format);

ResultTable run_experiment(const ExperimentConfig& cfg);

struct ComplexityOptions {
  std::vector<int> sizes{4, 8, 16, 32};
  int trials = 20;
  int reps = 100;
  double alpha = 0.1;
  std::uint64_t seed = 1;
};

/// Median wall time per design and counted complex multiply-accumulates for
/// SOPC and the exact solver at N = K.
ResultTable bench_complexity(const ComplexityOptions& opts);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace rzf

#endif  // RZF_HARNESS_HPP
