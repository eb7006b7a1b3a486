#include <algorithm>
#include <chrono>
#include <cmath>

#include "rzf/harness.hpp"
#include "rzf/mimo.hpp"
#include "rzf/opcount.hpp"
#include "rzf/oracle.hpp"
#include "rzf/parallel.hpp"
#include "rzf/rate_control.hpp"
#include "rzf/sopc.hpp"
#include "text_io.hpp"

namespace rzf {

namespace {

using Clock = std::chrono::steady_clock;

double db_to_power(double db) { return std::pow(10.0, db / 10.0); }

double mean(const std::vector<double>& xs) {
  double s = 0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t mid = xs.size() / 2;
  return xs.size() % 2 ? xs[mid] : 0.5 * (xs[mid - 1] + xs[mid]);
}

std::uint64_t trial_stream(Index size, int trial) {
  return (static_cast<std::uint64_t>(size) << 32) | static_cast<std::uint64_t>(trial);
}

ResultTable start_table(const ExperimentConfig& cfg) {
  ResultTable table;
  table.experiment = to_string(cfg.experiment);
  table.meta = config_echo(cfg);
  table.meta.emplace_back("version", version_string());
  table.columns = expected_columns(cfg.experiment, cfg.K);
  return table;
}

UtilitySpec utility_for(const ExperimentConfig& cfg, const MisoChannelSet& ch) {
  if (cfg.utility == "egalitarian") return UtilitySpec::egalitarian();
  if (cfg.utility == "nash") return UtilitySpec::nash(ch);
  Eigen::VectorXd w = Eigen::VectorXd::Ones(cfg.K);
  if (!cfg.weights.empty()) w = Eigen::Map<const Eigen::VectorXd>(cfg.weights.data(), cfg.K);
  return UtilitySpec::weighted_sum(w);
}

ResultTable run_sopc_gap(const ExperimentConfig& cfg) {
  ResultTable table = start_table(cfg);
  const auto budget = LeakageBudget::uniform(cfg.K, cfg.alpha.front());
  for (double snr : cfg.snr_db) {
    const double power = db_to_power(snr);
    std::vector<double> sopc(static_cast<std::size_t>(cfg.trials)), exact(sopc.size());
    parallel_for(sopc.size(), cfg.threads, [&](std::size_t t) {
      const auto ch = sample_miso(cfg.K, cfg.N, 1.0, power, RngSpec{cfg.seed, t});
      std::vector<BeamVector> a, b;
      for (Index i = 0; i < cfg.K; ++i) {
        a.push_back(sopc_design(ch, i, budget).beam);
        const auto sol = exact_rzfcb(ch, i, budget);
        if (!sol.converged) throw SolverNonConvergence("exact solver did not converge on trial " + std::to_string(t));
        b.push_back(sol.beam);
      }
      sopc[t] = achievable_rates(ch, a).sum();
      exact[t] = achievable_rates(ch, b).sum();
    });
    double worst = 0;
    for (std::size_t t = 0; t < sopc.size(); ++t)
      if (exact[t] > 0) worst = std::max(worst, 100 * (exact[t] - sopc[t]) / exact[t]);
    const double ms = mean(sopc), me = mean(exact);
    table.rows.push_back({snr, ms, me, me > 0 ? 100 * (me - ms) / me : 0.0, worst});
  }
  return table;
}

ResultTable run_control_convergence(const ExperimentConfig& cfg) {
  ResultTable table = start_table(cfg);
  const double power = db_to_power(cfg.snr_db.front());
  std::vector<SearchResult> results(static_cast<std::size_t>(cfg.trials));
  parallel_for(results.size(), cfg.threads, [&](std::size_t t) {
    const auto ch = sample_miso(cfg.K, cfg.N, 1.0, power, RngSpec{cfg.seed, t});
    results[t] = centralized_alpha_search(ch, utility_for(cfg, ch));
  });
  for (std::size_t t = 0; t < results.size(); ++t) {
    const auto& r = results[t];
    for (std::size_t l = 0; l < r.outer_trace.size(); ++l)
      table.rows.push_back({static_cast<double>(t), static_cast<double>(l), r.outer_trace[l], r.converged ? 1.0 : 0.0});
  }
  return table;
}

ResultTable run_pareto_region(const ExperimentConfig& cfg) {
  ResultTable table = start_table(cfg);
  const double power = db_to_power(cfg.snr_db.front());
  const LeakageTable ref = reference_table();
  constexpr double slack = 1e-3;
  for (int t = 0; t < cfg.trials; ++t) {
    const auto ch = sample_miso(2, cfg.N, 1.0, power, RngSpec{cfg.seed, static_cast<std::uint64_t>(t)});
    RandomStream draw(RngSpec{cfg.seed, 1000 + static_cast<std::uint64_t>(t)});
    std::vector<RatePoint<double>> cloud;
    cloud.reserve(static_cast<std::size_t>(cfg.samples));
    const double scale = std::sqrt(power);
    for (int k = 0; k < cfg.samples; ++k) {
      const CVec<double> v0 = scale * draw.unit_sphere<double>(cfg.N);
      const CVec<double> v1 = scale * draw.unit_sphere<double>(cfg.N);
      const std::vector<BeamVector> beams{{v0, 0}, {v1, 1}};
      cloud.push_back(achievable_rates(ch, beams));
    }
    for (std::size_t row = 0; row < ref.rows.size(); ++row) {
      const auto rates = apply_table(ch, ref, row).rates;
      int dominated = 0;
      for (const auto& c : cloud)
        if (c(0) > rates(0) + slack && c(1) > rates(1) + slack) ++dominated;
      table.rows.push_back({static_cast<double>(t), static_cast<double>(row + 1), ref.rows[row](1, 0),
                            ref.rows[row](0, 1), rates(0), rates(1), static_cast<double>(dominated)});
    }
    if (cfg.cloud)
      for (const auto& c : cloud) table.rows.push_back({static_cast<double>(t), 0, 0, 0, c(0), c(1), 0});
  }
  return table;
}

ResultTable run_leakage_table(const ExperimentConfig& cfg) {
  ResultTable table = start_table(cfg);
  std::vector<Eigen::VectorXd> weights;
  if (cfg.weights.empty()) {
    for (double w1 : {0.1, 0.3, 0.5, 0.7, 0.9}) {
      Eigen::VectorXd w = Eigen::VectorXd::Constant(cfg.K, (1 - w1) / static_cast<double>(std::max<Index>(1, cfg.K - 1)));
      w(0) = w1;
      weights.push_back(w);
    }
  } else {
    for (std::size_t k = 0; k < cfg.weights.size(); k += static_cast<std::size_t>(cfg.K))
      weights.push_back(Eigen::Map<const Eigen::VectorXd>(cfg.weights.data() + k, cfg.K));
  }
  for (auto& w : weights) {
    if (!(w.sum() > 0)) throw ConfigError("every weight vector needs a positive entry");
    w /= w.sum();
  }
  std::stable_sort(weights.begin(), weights.end(), [](const auto& a, const auto& b) { return a(0) < b(0); });
  const auto built =
      build_leakage_table(cfg.K, cfg.N, cfg.snr_db.front(), cfg.trials, weights, RngSpec{cfg.seed, 0}, cfg.threads);
  for (std::size_t r = 0; r < built.rows.size(); ++r) {
    std::vector<double> row(weights[r].data(), weights[r].data() + weights[r].size());
    for (Index j = 0; j < cfg.K; ++j)
      for (Index i = 0; i < cfg.K; ++i)
        if (i != j) row.push_back(built.rows[r](j, i));
    table.rows.push_back(std::move(row));
  }
  return table;
}

ResultTable run_mimo_sumrate(const ExperimentConfig& cfg) {
  ResultTable table = start_table(cfg);
  for (double snr : cfg.snr_db) {
    const double power = db_to_power(snr);
    for (double a : cfg.alpha) {
      const auto budget = LeakageBudget::uniform(cfg.K, a);
      const auto n = static_cast<std::size_t>(cfg.trials);
      std::vector<double> zf(n, 0.0), rzf(n, 0.0), unconverged(n, 0.0);
      std::vector<char> zf_ok(n, 1);
      parallel_for(n, cfg.threads, [&](std::size_t t) {
        const auto ch = sample_mimo(cfg.K, cfg.M, cfg.N, 1.0, power, cfg.d, RngSpec{cfg.seed, t});
        std::vector<PrecoderMatrix> z, r;
        try {
          for (Index i = 0; i < cfg.K; ++i) z.push_back(zf_precoder(ch, i));
        } catch (const InfeasibleZF&) {
          zf_ok[t] = 0;
        }
        for (Index i = 0; i < cfg.K; ++i) {
          auto res = pgm_design(ch, i, budget);
          if (!res.converged) unconverged[t] += 1;
          r.push_back(std::move(res.precoder));
        }
        for (Index i = 0; i < cfg.K; ++i) {
          if (zf_ok[t]) zf[t] += mimo_rate(ch, i, z);
          rzf[t] += mimo_rate(ch, i, r);
        }
      });
      const bool zf_feasible = std::all_of(zf_ok.begin(), zf_ok.end(), [](char c) { return c != 0; });
      double total_unconverged = 0;
      for (double u : unconverged) total_unconverged += u;
      table.rows.push_back({snr, a, zf_feasible ? 1.0 : 0.0, zf_feasible ? mean(zf) : 0.0, mean(rzf), total_unconverged});
    }
  }
  return table;
}

// Median seconds per call over `reps` calls cycling through the instances,
// after a short warm-up.
template <typename F>
double median_seconds(int reps, int instances, F&& call) {
  for (int w = 0; w < std::min(5, reps); ++w) call(w % instances);
  std::vector<double> times(static_cast<std::size_t>(reps));
  for (int r = 0; r < reps; ++r) {
    const auto t0 = Clock::now();
    call(r % instances);
    times[static_cast<std::size_t>(r)] = std::chrono::duration<double>(Clock::now() - t0).count();
  }
  return median(std::move(times));
}

}  // namespace

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ValidationError("slope needs at least two points");
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < x.size(); ++k) {
    lx.push_back(std::log(x[k]));
    ly.push_back(std::log(y[k]));
  }
  const double mx = mean(lx), my = mean(ly);
  double sxy = 0, sxx = 0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    sxy += (lx[k] - mx) * (ly[k] - my);
    sxx += (lx[k] - mx) * (lx[k] - mx);
  }
  return sxy / sxx;
}

ResultTable bench_complexity(const ComplexityOptions& opts) {
  if (opts.sizes.empty() || opts.trials < 1 || opts.reps < 1) throw ConfigError("bench needs sizes, trials and reps");
  ResultTable table;
  table.experiment = to_string(ExperimentKind::complexity);
  std::string sizes;
  for (int s : opts.sizes) sizes += (sizes.empty() ? "" : ",") + std::to_string(s);
  table.meta = {{"sizes", sizes},
                {"trials", std::to_string(opts.trials)},
                {"reps", std::to_string(opts.reps)},
                {"alpha", textio::fmt17(opts.alpha)},
                {"seed", std::to_string(opts.seed)},
                {"version", version_string()}};
  table.columns = expected_columns(ExperimentKind::complexity, 0);

  std::vector<double> ns, sopc_times, sopc_ops;
  for (int n : opts.sizes) {
    std::vector<MisoChannelSet> chans;
    for (int t = 0; t < opts.trials; ++t) chans.push_back(sample_miso(n, n, 1.0, 1.0, RngSpec{opts.seed, trial_stream(n, t)}));
    const auto budget = LeakageBudget::uniform(n, opts.alpha);

    double ops_s = 0, ops_o = 0;
    for (const auto& ch : chans) {
      ops::reset();
      (void)sopc_design(ch, 0, budget);
      ops_s += static_cast<double>(ops::count());
      ops::reset();
      (void)exact_rzfcb(ch, 0, budget);
      ops_o += static_cast<double>(ops::count());
    }
    ops_s /= opts.trials;
    ops_o /= opts.trials;

    double sink = 0;
    const double ts = median_seconds(opts.reps, opts.trials, [&](int k) {
      sink += sopc_design(chans[static_cast<std::size_t>(k)], 0, budget).power_used;
    });
    const double to = median_seconds(opts.reps, opts.trials, [&](int k) {
      sink += exact_rzfcb(chans[static_cast<std::size_t>(k)], 0, budget).objective;
    });
    if (!std::isfinite(sink)) throw Error("benchmark produced a non-finite result");
    table.rows.push_back({static_cast<double>(n), ts * 1e6, to * 1e6, ops_s, ops_o, to / ts});
    ns.push_back(n);
    sopc_times.push_back(ts);
    sopc_ops.push_back(ops_s);
  }
  if (ns.size() >= 2) {
    table.meta.emplace_back("sopc_time_slope", textio::fmt17(loglog_slope(ns, sopc_times)));
    table.meta.emplace_back("sopc_ops_slope", textio::fmt17(loglog_slope(ns, sopc_ops)));
  }
  return table;
}

ResultTable run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  switch (cfg.experiment) {
    case ExperimentKind::sopc_gap:
      return run_sopc_gap(cfg);
    case ExperimentKind::complexity: {
      ComplexityOptions opts;
      opts.sizes = cfg.sizes;
      opts.trials = cfg.trials;
      opts.reps = cfg.reps;
      opts.alpha = cfg.alpha.front();
      opts.seed = cfg.seed;
      ResultTable table = bench_complexity(opts);
      auto meta = config_echo(cfg);
      for (const auto& kv : table.meta)
        if (kv.first == "version" || kv.first.ends_with("_slope")) meta.push_back(kv);
      table.meta = std::move(meta);
      return table;
    }
    case ExperimentKind::control_convergence:
      return run_control_convergence(cfg);
    case ExperimentKind::pareto_region:
      return run_pareto_region(cfg);
    case ExperimentKind::leakage_table:
      return run_leakage_table(cfg);
    case ExperimentKind::mimo_sumrate:
      return run_mimo_sumrate(cfg);
  }
  throw ConfigError("unknown experiment");
}

}  // namespace rzf
