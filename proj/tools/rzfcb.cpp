#include <cmath>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rzf/harness.hpp"
#include "rzf/mimo.hpp"
#include "rzf/oracle.hpp"
#include "rzf/rate_control.hpp"
#include "rzf/sopc.hpp"

using namespace rzf;
using json = nlohmann::ordered_json;

namespace {

constexpr int kConfigError = 2;
constexpr int kNoConvergence = 3;

struct Global {
  std::uint64_t seed = 1;
  int trials = 0;
  std::string out;
  std::string format = "csv";
};

json complex_array(const Eigen::MatrixXcd& m) {
  json rows = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(row);
  }
  return rows;
}

json real_array(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

// Reports are JSON objects; csv output flattens the top level to key,value lines.
void print_report(const json& report, const Global& g) {
  std::ofstream file;
  std::ostream* out = &std::cout;
  if (!g.out.empty() && g.out != "-") {
    file.open(g.out);
    if (!file) throw Error("cannot open " + g.out + " for writing");
    out = &file;
  }
  if (g.format == "json") {
    *out << report.dump(2) << '\n';
    return;
  }
  *out << "key,value\n";
  for (const auto& [k, v] : report.items()) *out << k << ',' << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
}

MisoChannelSet load_miso(const std::string& path) {
  auto inst = load_instance(path);
  if (!std::holds_alternative<MisoChannelSet>(inst)) throw ConfigError(path + " is not a MISO instance");
  return std::get<MisoChannelSet>(std::move(inst));
}

MimoChannelSet load_mimo(const std::string& path) {
  auto inst = load_instance(path);
  if (!std::holds_alternative<MimoChannelSet>(inst)) throw ConfigError(path + " is not a MIMO instance");
  return std::get<MimoChannelSet>(std::move(inst));
}

LeakageBudget budget_from(Index K, double alpha, const std::string& table_path, int row) {
  if (table_path.empty()) return LeakageBudget::uniform(K, alpha);
  const auto table = load_table(table_path);
  if (table.users != K) throw ConfigError("table K differs from the instance");
  if (row < 1 || row > static_cast<int>(table.rows.size())) throw ConfigError("table row out of range");
  return table.rows[static_cast<std::size_t>(row - 1)];
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relaxed zero-forcing coordinated beamforming toolkit"};
  app.set_version_flag("--version", version_string());
  app.require_subcommand(1);
  app.fallthrough();

  Global g;
  app.add_option("--seed", g.seed, "RNG seed");
  auto* trials_opt = app.add_option("--trials", g.trials, "Monte Carlo trials")->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "output path (stdout when omitted)");
  app.add_option("--format", g.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  // gen
  auto* gen = app.add_subcommand("gen", "sample a random channel instance");
  std::string gen_kind = "miso";
  Index gK = 2, gN = 2, gM = 2;
  int gd = 0;
  double g_snr = 0;
  gen->add_option("--kind", gen_kind)->check(CLI::IsMember({"miso", "mimo"}));
  gen->add_option("-K", gK)->check(CLI::PositiveNumber);
  gen->add_option("-N", gN)->check(CLI::PositiveNumber);
  gen->add_option("-M", gM)->check(CLI::PositiveNumber);
  gen->add_option("-d", gd, "streams per transmitter (default M)");
  gen->add_option("--snr-db", g_snr, "P / sigma^2 with sigma^2 = 1");

  // sopc / oracle
  std::string instance, table_path;
  double alpha = 0.1;
  int table_row = 1;
  auto* sopc = app.add_subcommand("sopc", "SOPC beams for every transmitter");
  auto* oracle = app.add_subcommand("oracle", "exact beams with KKT certificates");
  auto* mimo = app.add_subcommand("mimo", "projected-gradient precoders for a MIMO instance");
  for (auto* sub : {sopc, oracle, mimo}) {
    sub->add_option("instance", instance, "instance file")->required()->check(CLI::ExistingFile);
    sub->add_option("--alpha", alpha, "uniform leakage budget")->check(CLI::NonNegativeNumber);
  }
  for (auto* sub : {sopc, oracle}) {
    sub->add_option("--table", table_path, "leakage table file")->check(CLI::ExistingFile);
    sub->add_option("--row", table_row, "table row, 1-based");
  }

  // control
  auto* control = app.add_subcommand("control", "centralized leakage budget search");
  std::string utility = "weighted_sum";
  std::vector<double> weights;
  control->add_option("instance", instance)->required()->check(CLI::ExistingFile);
  control->add_option("--utility", utility)->check(CLI::IsMember({"weighted_sum", "egalitarian", "nash"}));
  control->add_option("--weights", weights);
  SearchOptions search;
  control->add_option("--max-outer", search.max_outer, "outer iteration cap")->check(CLI::PositiveNumber);
  PgmOptions pgm;
  mimo->add_option("--max-iter", pgm.max_iter, "projected-gradient iteration cap")->check(CLI::PositiveNumber);

  // table
  auto* table = app.add_subcommand("table", "build a leakage table from random channels");
  Index tK = 2, tN = 2;
  double t_snr = 0;
  std::vector<double> w1s{0.1, 0.3, 0.5, 0.7, 0.9};
  bool reference = false;
  table->add_option("-K", tK)->check(CLI::PositiveNumber);
  table->add_option("-N", tN)->check(CLI::PositiveNumber);
  table->add_option("--snr-db", t_snr);
  table->add_option("--w1", w1s, "first-user weights of the sweep; the rest is split evenly");
  table->add_flag("--reference", reference, "print the reference K = N = 2 table");

  // bench
  auto* bench = app.add_subcommand("bench", "SOPC and exact solver timing against N = K");
  ComplexityOptions bopts;
  bench->add_option("--sizes", bopts.sizes);
  bench->add_option("--reps", bopts.reps)->check(CLI::PositiveNumber);
  bench->add_option("--alpha", bopts.alpha)->check(CLI::NonNegativeNumber);

  // region
  auto* region = app.add_subcommand("region", "rate cloud and table operating points for K = N = 2");
  ExperimentConfig rcfg;
  rcfg.experiment = ExperimentKind::pareto_region;
  rcfg.K = 2;
  rcfg.N = 2;
  rcfg.trials = 1;
  rcfg.snr_db = {0};
  rcfg.cloud = true;
  region->add_option("--samples", rcfg.samples)->check(CLI::PositiveNumber);
  region->add_option("--snr-db", rcfg.snr_db.front());

  // experiment
  auto* experiment = app.add_subcommand("experiment", "run an experiment config file");
  std::string config_path;
  experiment->add_option("config", config_path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (gen->parsed()) {
      const double power = std::pow(10.0, g_snr / 10.0);
      const RngSpec rng{g.seed, 0};
      if (gen_kind == "miso") {
        const MisoChannelSet ch = sample_miso(gK, gN, 1.0, power, rng);
        if (g.out.empty())
          write_instance(std::cout, ch);
        else
          save_instance(g.out, Instance(ch));
      } else {
        const MimoChannelSet ch = sample_mimo(gK, gM, gN, 1.0, power, gd > 0 ? gd : static_cast<int>(gM), rng);
        if (g.out.empty())
          write_instance(std::cout, ch);
        else
          save_instance(g.out, Instance(ch));
      }
      return 0;
    }

    if (sopc->parsed() || oracle->parsed()) {
      const auto ch = load_miso(instance);
      const auto budget = budget_from(ch.users(), alpha, table_path, table_row);
      std::vector<BeamVector> beams;
      json report;
      report["design"] = sopc->parsed() ? "sopc" : "oracle";
      json users = json::array();
      bool converged = true;
      for (Index i = 0; i < ch.users(); ++i) {
        json u;
        if (sopc->parsed()) {
          const auto sol = sopc_design(ch, i, budget);
          beams.push_back(sol.beam);
          u["terminated_by"] = to_string(sol.terminated_by);
          u["gamma_tilde"] = sol.gamma_tilde;
          u["coeffs"] = sol.coeffs;
        } else {
          const auto sol = exact_rzfcb(ch, i, budget);
          beams.push_back(sol.beam);
          converged = converged && sol.converged;
          u["converged"] = sol.converged;
          u["iterations"] = sol.iterations;
          u["mu"] = sol.certificate.mu;
          u["lambda"] = sol.certificate.lambda;
          u["tight"] = sol.certificate.tight;
          u["stationarity_residual"] = sol.certificate.stationarity_residual;
          u["slackness_residual"] = sol.certificate.slackness_residual;
        }
        u["beam"] = complex_array(beams.back().v);
        users.push_back(u);
      }
      report["users"] = users;
      report["rates"] = real_array(achievable_rates(ch, beams));
      print_report(report, g);
      return converged ? 0 : kNoConvergence;
    }

    if (control->parsed()) {
      const auto ch = load_miso(instance);
      UtilitySpec spec;
      if (utility == "egalitarian") {
        spec = UtilitySpec::egalitarian();
      } else if (utility == "nash") {
        spec = UtilitySpec::nash(ch);
      } else {
        Eigen::VectorXd w = Eigen::VectorXd::Ones(ch.users());
        if (!weights.empty()) {
          if (static_cast<Index>(weights.size()) != ch.users()) throw ConfigError("--weights needs K entries");
          w = Eigen::Map<const Eigen::VectorXd>(weights.data(), ch.users());
        }
        spec = UtilitySpec::weighted_sum(w);
      }
      const auto res = centralized_alpha_search(ch, spec, search);
      json report;
      report["utility"] = res.utility;
      report["rates"] = real_array(res.rates);
      json alpha_rows = json::array();
      for (Index r = 0; r < ch.users(); ++r) alpha_rows.push_back(real_array(res.budget.matrix().row(r).transpose()));
      report["alpha"] = alpha_rows;
      report["outer_iterations"] = res.outer_iterations;
      report["converged"] = res.converged;
      report["outer_trace"] = res.outer_trace;
      print_report(report, g);
      return res.converged ? 0 : kNoConvergence;
    }

    if (table->parsed()) {
      LeakageTable t;
      if (reference) {
        t = reference_table();
      } else {
        std::vector<Eigen::VectorXd> ws;
        for (double w1 : w1s) {
          if (w1 < 0 || w1 > 1) throw ConfigError("--w1 entries must lie in [0, 1]");
          Eigen::VectorXd w = Eigen::VectorXd::Constant(tK, tK > 1 ? (1 - w1) / static_cast<double>(tK - 1) : 1.0);
          w(0) = tK > 1 ? w1 : 1.0;
          ws.push_back(w);
        }
        t = build_leakage_table(tK, tN, t_snr, g.trials > 0 ? g.trials : 20, ws, RngSpec{g.seed, 0});
      }
      if (g.out.empty())
        write_table(std::cout, t);
      else
        save_table(g.out, t);
      return 0;
    }

    if (mimo->parsed()) {
      const auto ch = load_mimo(instance);
      const auto budget = LeakageBudget::uniform(ch.users(), alpha);
      std::vector<PrecoderMatrix> pre;
      json report;
      json users = json::array();
      bool converged = true;
      for (Index i = 0; i < ch.users(); ++i) {
        auto res = pgm_design(ch, i, budget, pgm);
        converged = converged && res.converged;
        json u;
        u["converged"] = res.converged;
        u["iterations"] = res.iterations;
        u["lower_bound"] = res.trace.objective.back();
        u["precoder"] = complex_array(res.precoder.V);
        users.push_back(u);
        pre.push_back(std::move(res.precoder));
      }
      json rates = json::array();
      for (Index i = 0; i < ch.users(); ++i) rates.push_back(mimo_rate(ch, i, pre));
      report["users"] = users;
      report["rates"] = rates;
      print_report(report, g);
      return converged ? 0 : kNoConvergence;
    }

    if (bench->parsed()) {
      bopts.seed = g.seed;
      if (g.trials > 0) bopts.trials = g.trials;
      emit(bench_complexity(bopts), g.out, g.format);
      return 0;
    }

    if (region->parsed()) {
      rcfg.seed = g.seed;
      if (g.trials > 0) rcfg.trials = g.trials;
      emit(run_experiment(rcfg), g.out, g.format);
      return 0;
    }

    if (experiment->parsed()) {
      ExperimentConfig cfg = load_config(config_path);
      if (app.get_option("--seed")->count()) cfg.seed = g.seed;
      if (trials_opt->count()) cfg.trials = g.trials;
      if (app.get_option("--format")->count()) cfg.format = g.format;
      if (app.get_option("--out")->count()) cfg.output = g.out;
      emit(run_experiment(cfg), cfg.output, cfg.format);
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kConfigError;
  } catch (const SolverNonConvergence& e) {
    std::cerr << "no convergence: " << e.what() << '\n';
    return kNoConvergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
