#include <doctest.h>

#include <sstream>

#include "rzf/harness.hpp"

using namespace rzf;

namespace {

ExperimentConfig small_gap() {
  return parse_config("experiment=sopc_gap\nK=3\nN=3\nsnr_db=0:10:20\ntrials=6\nalpha=0.2\nseed=4\n");
}

std::string csv_of(const ResultTable& t) {
  std::ostringstream out;
  write_csv(out, t);
  return out.str();
}

}  // namespace

TEST_CASE("config parsing") {
  const auto cfg = parse_config(
      "# comment\n"
      "experiment = mimo_sumrate\n"
      "K=4\nM=2\nN=6\nd=2\n"
      "snr_db=-5:5:25  # sweep\n"
      "alpha=0.01, 0.1,0.2\n"
      "trials=3\nseed=9\nformat=json\n");
  CHECK(cfg.experiment == ExperimentKind::mimo_sumrate);
  CHECK(cfg.K == 4);
  CHECK(cfg.snr_db == std::vector<double>{-5, 0, 5, 10, 15, 20, 25});
  CHECK(cfg.alpha == std::vector<double>{0.01, 0.1, 0.2});
  CHECK(cfg.seed == 9);
  CHECK(cfg.format == "json");

  CHECK_THROWS_AS(parse_config("K=3\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("experiment=nope\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("experiment=sopc_gap\nbogus=1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("experiment=sopc_gap\nK=3\nK=4\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("experiment=sopc_gap\nK=x\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("experiment=sopc_gap\nsnr_db=\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("experiment=sopc_gap\ntrials=0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("experiment=pareto_region\nK=3\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("experiment=mimo_sumrate\nM=2\nd=3\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("experiment=sopc_gap\nformat=xml\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("experiment=sopc_gap\nalpha=-1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("experiment=sopc_gap\nno equals sign\n"), ConfigError);
}

TEST_CASE("csv and json round trips") {
  const auto table = run_experiment(small_gap());
  CHECK(table.rows.size() == 3);

  std::istringstream csv(csv_of(table));
  const auto back = read_csv(csv);
  CHECK(back.experiment == table.experiment);
  CHECK(back.meta == table.meta);
  CHECK(back.columns == table.columns);
  CHECK(back.rows == table.rows);

  std::ostringstream js;
  write_json(js, table);
  std::istringstream jin(js.str());
  const auto jback = read_json(jin);
  CHECK(jback.meta == table.meta);
  CHECK(jback.rows == table.rows);
  CHECK(js.str().find("\"columns\"") != std::string::npos);
}

TEST_CASE("schema mismatches are rejected") {
  auto table = run_experiment(small_gap());
  auto renamed = table;
  renamed.columns[1] = "something_else";
  std::ostringstream out;
  CHECK_THROWS_AS(write_csv(out, renamed), ValidationError);

  auto ragged = table;
  ragged.rows[0].pop_back();
  CHECK_THROWS_AS(write_csv(out, ragged), ValidationError);

  std::istringstream bad("# experiment=sopc_gap\nsnr_db,gap_pct\n0,1\n");
  CHECK_THROWS_AS(read_csv(bad), ValidationError);
  std::istringstream unknown("# experiment=other\nx\n1\n");
  CHECK_THROWS_AS(read_csv(unknown), ConfigError);
  std::istringstream junk("{\"experiment\": 3}");
  CHECK_THROWS_AS(read_json(junk), ValidationError);
}

TEST_CASE("output is byte identical across reruns and thread counts") {
  auto cfg = small_gap();
  cfg.threads = 1;
  const std::string one = csv_of(run_experiment(cfg));
  cfg.threads = 4;
  CHECK(csv_of(run_experiment(cfg)) == one);
  CHECK(csv_of(run_experiment(cfg)) == one);

  auto mimo = parse_config("experiment=mimo_sumrate\nK=3\nM=2\nN=6\nsnr_db=0\ntrials=3\nalpha=0.1\n");
  mimo.threads = 1;
  const std::string m1 = csv_of(run_experiment(mimo));
  mimo.threads = 3;
  CHECK(csv_of(run_experiment(mimo)) == m1);
}

TEST_CASE("experiment tables") {
  const auto gap = run_experiment(small_gap());
  for (const auto& row : gap.rows) {
    CHECK(row[1] >= 0);
    CHECK(row[2] >= row[1] - 1e-9);
  }
  CHECK(gap.find_meta("version") != nullptr);
  CHECK(*gap.find_meta("seed") == "4");

  const auto conv = run_experiment(parse_config("experiment=control_convergence\nK=2\nN=2\nsnr_db=0\ntrials=3\nweights=2,1\n"));
  for (std::size_t k = 1; k < conv.rows.size(); ++k)
    if (conv.rows[k][0] == conv.rows[k - 1][0]) CHECK(conv.rows[k][2] >= conv.rows[k - 1][2] - 1e-12);

  const auto region = run_experiment(parse_config("experiment=pareto_region\nK=2\nN=2\nsnr_db=0\ntrials=1\nsamples=200\ncloud=1\n"));
  CHECK(region.rows.size() == 205);

  const auto tab = run_experiment(parse_config("experiment=leakage_table\nK=2\nN=2\nsnr_db=0\ntrials=3\nweights=0.2,0.8\n"));
  CHECK(tab.rows.size() == 1);
  CHECK(tab.columns == std::vector<std::string>{"w_1", "w_2", "alpha_12", "alpha_21"});

  const auto mimo = run_experiment(parse_config("experiment=mimo_sumrate\nK=4\nM=2\nN=6\nsnr_db=10\ntrials=1\nalpha=0.1\n"));
  CHECK(mimo.rows.size() == 1);
  CHECK(mimo.rows[0][2] == 0);
  CHECK(mimo.rows[0][4] > 0);
}

TEST_CASE("complexity bench") {
  ComplexityOptions opts;
  opts.sizes = {4};
  opts.trials = 2;
  opts.reps = 5;
  const auto one = bench_complexity(opts);
  CHECK(one.rows.size() == 1);
  CHECK(one.find_meta("sopc_time_slope") == nullptr);
  CHECK(one.rows[0][3] > 0);

  opts.sizes = {3, 6};
  const auto two = bench_complexity(opts);
  CHECK(two.find_meta("sopc_ops_slope") != nullptr);
  CHECK(two.rows[1][3] > two.rows[0][3]);

  CHECK(loglog_slope({1, 2, 4}, {3, 12, 48}) == doctest::Approx(2.0));
  CHECK_THROWS_AS(loglog_slope({1}, {1}), ValidationError);
}
