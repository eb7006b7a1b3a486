#include "rzf/rate_control.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "rzf/parallel.hpp"
#include "rzf/sopc.hpp"
#include "text_io.hpp"

namespace rzf {

UtilitySpec UtilitySpec::weighted_sum(const Eigen::VectorXd& w) {
  if (w.size() == 0 || (w.array() < 0).any()) throw ValidationError("weights must be nonnegative");
  const double total = w.sum();
  if (!(total > 0)) throw ValidationError("weights must not all be zero");
  UtilitySpec spec;
  spec.kind = UtilityKind::weighted_sum;
  spec.weights = w / total;
  return spec;
}

UtilitySpec UtilitySpec::egalitarian() {
  UtilitySpec spec;
  spec.kind = UtilityKind::egalitarian;
  return spec;
}

UtilitySpec UtilitySpec::nash(const MisoChannelSet& ch) {
  UtilitySpec spec;
  spec.kind = UtilityKind::nash_bargaining;
  spec.disagreement = nash_disagreement(ch);
  return spec;
}

double evaluate_utility(const UtilitySpec& spec, const RatePoint<double>& rates) {
  switch (spec.kind) {
    case UtilityKind::weighted_sum:
      if (spec.weights.size() != rates.size()) throw DimensionMismatch("weights and rates differ in length");
      return spec.weights.dot(rates);
    case UtilityKind::egalitarian:
      return rates.minCoeff();
    case UtilityKind::nash_bargaining:
      if (spec.disagreement.size() != rates.size())
        throw DimensionMismatch("disagreement point and rates differ in length");
      return (rates - spec.disagreement).prod();
  }
  return 0;
}

double search_score(const UtilitySpec& spec, const RatePoint<double>& rates) {
  if (spec.kind != UtilityKind::nash_bargaining) return evaluate_utility(spec, rates);
  const Eigen::VectorXd gain = rates - spec.disagreement;
  if ((gain.array() >= 0).all()) return gain.prod();
  return gain.cwiseMin(0.0).sum();
}

RatePoint<double> nash_disagreement(const MisoChannelSet& ch) {
  std::vector<BeamVector> beams;
  for (Index i = 0; i < ch.users(); ++i) beams.push_back({std::sqrt(ch.power(i)) * mf_beam(ch, i).v, i});
  return achievable_rates(ch, beams);
}

double alpha_cap(const MisoChannelSet& ch, Index rx, Index tx) {
  return ch.power(tx) * std::norm(ch.h(rx, tx).dot(mf_beam(ch, tx).v)) / ch.noise(rx);
}

namespace {

// Score as a function of alpha(rx, tx), the other beams held fixed.
class CoordinateSlice {
 public:
  CoordinateSlice(const MisoChannelSet& ch, const UtilitySpec& spec, const LeakageBudget& budget,
                  std::vector<BeamVector> beams, Index rx, Index tx)
      : ch_(ch), spec_(spec), budget_(budget), beams_(std::move(beams)), rx_(rx), tx_(tx) {}

  double operator()(double alpha) {
    budget_.set(rx_, tx_, alpha);
    beams_[static_cast<std::size_t>(tx_)] = sopc_design(ch_, tx_, budget_).beam;
    return search_score(spec_, achievable_rates(ch_, beams_));
  }

 private:
  const MisoChannelSet& ch_;
  const UtilitySpec& spec_;
  LeakageBudget budget_;
  std::vector<BeamVector> beams_;
  Index rx_, tx_;
};

double maximize_slice(CoordinateSlice& f, double incumbent_alpha, double incumbent_score, double cap,
                      const SearchOptions& opts) {
  if (!(cap > 0)) return incumbent_alpha;
  const int n = std::max(2, opts.grid_points);
  double best_alpha = incumbent_alpha;
  double best = incumbent_score;
  auto consider = [&](double a, double value) {
    if (value > best) {
      best = value;
      best_alpha = a;
    }
  };

  std::vector<double> grid(static_cast<std::size_t>(n));
  std::vector<double> value(static_cast<std::size_t>(n));
  std::size_t top = 0;
  for (int k = 0; k < n; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    grid[ks] = cap * k / (n - 1);
    value[ks] = f(grid[ks]);
    consider(grid[ks], value[ks]);
    if (value[ks] > value[top]) top = ks;
  }

  // golden-section refinement around the best grid point
  const double invphi = (std::sqrt(5.0) - 1) / 2;
  double lo = grid[top == 0 ? 0 : top - 1];
  double hi = grid[std::min(top + 1, grid.size() - 1)];
  double x1 = hi - invphi * (hi - lo);
  double x2 = lo + invphi * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  consider(x1, f1);
  consider(x2, f2);
  while (hi - lo > opts.golden_rel_tol * cap) {
    if (f1 >= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - invphi * (hi - lo);
      f1 = f(x1);
      consider(x1, f1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + invphi * (hi - lo);
      f2 = f(x2);
      consider(x2, f2);
    }
  }
  return best_alpha;
}

}  // namespace

double line_maximize_alpha(const MisoChannelSet& ch, const UtilitySpec& spec, const LeakageBudget& budget,
                           Index rx, Index tx, const SearchOptions& opts) {
  if (rx == tx) throw ValidationError("alpha_ii is not a search coordinate");
  const auto beams = sopc_beams(ch, budget);
  const double incumbent = search_score(spec, achievable_rates(ch, beams));
  CoordinateSlice f(ch, spec, budget, beams, rx, tx);
  return maximize_slice(f, budget(rx, tx), incumbent, alpha_cap(ch, rx, tx), opts);
}

SearchResult centralized_alpha_search(const MisoChannelSet& ch, const UtilitySpec& spec,
                                      const SearchOptions& opts) {
  const Index K = ch.users();
  SearchResult res;
  res.budget = LeakageBudget(K);
  std::vector<BeamVector> beams = sopc_beams(ch, res.budget);
  double score = search_score(spec, achievable_rates(ch, beams));
  res.outer_trace.push_back(score);

  for (int l = 1; l <= opts.max_outer; ++l) {
    const double start = score;
    for (Index tx = 0; tx < K; ++tx) {
      for (Index rx = 0; rx < K; ++rx) {
        if (rx == tx) continue;
        CoordinateSlice f(ch, spec, res.budget, beams, rx, tx);
        const double alpha = maximize_slice(f, res.budget(rx, tx), score, alpha_cap(ch, rx, tx), opts);
        if (alpha != res.budget(rx, tx)) {
          res.budget.set(rx, tx, alpha);
          beams[static_cast<std::size_t>(tx)] = sopc_design(ch, tx, res.budget).beam;
          score = search_score(spec, achievable_rates(ch, beams));
        }
        res.trace.push_back(score);
      }
    }
    res.outer_trace.push_back(score);
    res.outer_iterations = l;
    if (std::abs(score - start) <= opts.epsilon) {
      res.converged = true;
      break;
    }
  }
  res.rates = achievable_rates(ch, beams);
  res.utility = evaluate_utility(spec, res.rates);
  return res;
}

LeakageTable build_leakage_table(Index users, Index antennas, double snr_db, int trials,
                                 std::vector<Eigen::VectorXd> weights, const RngSpec& rng, unsigned threads,
                                 const SearchOptions& opts) {
  if (trials < 1) throw ValidationError("table needs at least one trial");
  if (weights.empty()) throw ValidationError("table needs at least one weight vector");
  std::stable_sort(weights.begin(), weights.end(),
                   [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return a(0) / a.sum() < b(0) / b.sum(); });
  const double power = std::pow(10.0, snr_db / 10.0);

  LeakageTable table;
  table.users = users;
  table.antennas = antennas;
  table.snr_db = snr_db;
  table.trials = trials;
  for (const auto& w : weights) {
    const UtilitySpec spec = UtilitySpec::weighted_sum(w);
    std::vector<Eigen::MatrixXd> found(static_cast<std::size_t>(trials));
    parallel_for(found.size(), threads, [&](std::size_t t) {
      const auto ch = sample_miso(users, antennas, 1.0, power, rng.stream(t));
      found[t] = centralized_alpha_search(ch, spec, opts).budget.matrix();
    });
    Eigen::MatrixXd median = Eigen::MatrixXd::Zero(users, users);
    std::vector<double> column(found.size());
    for (Index r = 0; r < users; ++r)
      for (Index c = 0; c < users; ++c) {
        if (r == c) continue;
        for (std::size_t t = 0; t < found.size(); ++t) column[t] = found[t](r, c);
        std::sort(column.begin(), column.end());
        const std::size_t mid = column.size() / 2;
        median(r, c) = column.size() % 2 ? column[mid] : 0.5 * (column[mid - 1] + column[mid]);
      }
    table.rows.emplace_back(median);
  }
  return table;
}

LeakageTable reference_table() {
  LeakageTable table;
  table.users = 2;
  table.antennas = 2;
  table.snr_db = 0;
  const double rows[5][2] = {{0, 0.8511}, {0.0667, 0.5780}, {0.2444, 0.3268}, {1.0889, 0.2393}, {2.2, 0.0735}};
  for (const auto& r : rows) {
    LeakageBudget b(2);
    b.set(1, 0, r[0]);
    b.set(0, 1, r[1]);
    table.rows.push_back(b);
  }
  return table;
}

TableOutcome apply_table(const MisoChannelSet& ch, const LeakageTable& table, std::size_t row) {
  if (row >= table.rows.size()) throw ValidationError("table row out of range");
  const LeakageBudget& budget = table.rows[row];
  if (budget.users() != ch.users()) throw DimensionMismatch("table and channel user counts differ");
  TableOutcome out;
  out.beams = sopc_beams(ch, budget);
  out.rates = achievable_rates(ch, out.beams);
  return out;
}

void write_table(std::ostream& out, const LeakageTable& table) {
  using textio::fmt17;
  out << "table " << table.users << ' ' << table.antennas << ' ' << fmt17(table.snr_db) << ' ' << table.trials
      << '\n';
  for (const auto& row : table.rows) {
    bool first = true;
    for (Index j = 0; j < table.users; ++j)
      for (Index i = 0; i < table.users; ++i) {
        if (i == j) continue;
        out << (first ? "" : " ") << fmt17(row(j, i));
        first = false;
      }
    out << '\n';
  }
}

LeakageTable read_table(std::istream& in) {
  using namespace textio;
  LineReader reader(in);
  Line head = reader.expect("header");
  if (head.tokens.size() != 5 || head.tokens[0] != "table")
    throw ParseError("header must be 'table K N snr_db trials'", head.number);
  LeakageTable table;
  table.users = parse_int(head.tokens[1], head.number, "K");
  table.antennas = parse_int(head.tokens[2], head.number, "N");
  table.snr_db = parse_double(head.tokens[3], head.number, "snr_db");
  table.trials = static_cast<int>(parse_int(head.tokens[4], head.number, "trials"));
  if (table.users < 2 || table.antennas < 1) throw ParseError("table needs K >= 2 and N >= 1", head.number);
  const Index K = table.users;
  const std::size_t width = static_cast<std::size_t>(K * (K - 1));
  Line line;
  while (reader.next(line)) {
    if (line.tokens.size() != width)
      throw ParseError("row needs " + std::to_string(width) + " values", line.number);
    LeakageBudget b(K);
    std::size_t k = 0;
    for (Index j = 0; j < K; ++j)
      for (Index i = 0; i < K; ++i) {
        if (i == j) continue;
        const double a = parse_double(line.tokens[k++], line.number, "alpha");
        if (!(a >= 0)) throw ParseError("alpha must be >= 0", line.number);
        b.set(j, i, a);
      }
    table.rows.push_back(std::move(b));
  }
  if (table.rows.empty()) throw ParseError("table has no rows", head.number);
  return table;
}

void save_table(const std::filesystem::path& path, const LeakageTable& table) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_table(out, table);
}

LeakageTable load_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return read_table(in);
}

}  // namespace rzf
