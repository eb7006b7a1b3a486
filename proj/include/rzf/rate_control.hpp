#ifndef RZF_RATE_CONTROL_HPP
#define RZF_RATE_CONTROL_HPP

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "rzf/miso_beam.hpp"

namespace rzf {

enum class UtilityKind { weighted_sum, nash_bargaining, egalitarian };

struct UtilitySpec {
  UtilityKind kind = UtilityKind::weighted_sum;
  Eigen::VectorXd weights;       // weighted_sum, normalized to sum 1
  Eigen::VectorXd disagreement;  // nash_bargaining, from nash_disagreement()

  static UtilitySpec weighted_sum(const Eigen::VectorXd& w);
  static UtilitySpec egalitarian();
  static UtilitySpec nash(const MisoChannelSet& ch);
};

/// Raw utility: sum w_i R_i, prod (R_i - R_i^NE), or min R_i. The Nash
/// product is returned as is, even when negative.
double evaluate_utility(const UtilitySpec& spec, const RatePoint<double>& rates);

/// Value the alpha search maximizes. Equal to evaluate_utility except for the
/// Nash utility outside the bargaining set (some R_i < R_i^NE), which scores
/// -sum max(0, R_i^NE - R_i) so that every such point ranks below every
/// point inside the set.
double search_score(const UtilitySpec& spec, const RatePoint<double>& rates);

/// Rates when every transmitter uses sqrt(P) times its matched filter.
RatePoint<double> nash_disagreement(const MisoChannelSet& ch);

/// Upper end of the alpha_ji search interval: P_i |h_ji^H v_i^MF|^2 / sigma_j^2.
double alpha_cap(const MisoChannelSet& ch, Index rx, Index tx);

struct SearchOptions {
  double epsilon = 1e-6;
  int max_outer = 50;
  int grid_points = 32;
  double golden_rel_tol = 1e-4;
};

struct SearchResult {
  LeakageBudget budget{1};
  RatePoint<double> rates;
  double utility = 0;
  std::vector<double> trace;        // score after every coordinate update
  std::vector<double> outer_trace;  // score at the end of every outer pass, starting from alpha = 0
  int outer_iterations = 0;
  bool converged = false;
};

/// Best alpha(rx, tx) with every other entry held fixed. Returns the
/// incumbent unless a candidate scores strictly higher.
double line_maximize_alpha(const MisoChannelSet& ch, const UtilitySpec& spec, const LeakageBudget& budget,
                           Index rx, Index tx, const SearchOptions& opts = {});

/// Alternating coordinate search over the leakage budget, starting from zero
/// forcing, with SOPC beams and true rates.
SearchResult centralized_alpha_search(const MisoChannelSet& ch, const UtilitySpec& spec,
                                      const SearchOptions& opts = {});

struct LeakageTable {
  Index users = 2;
  Index antennas = 2;
  double snr_db = 0;
  int trials = 0;
  std::vector<LeakageBudget> rows;
};

/// One row per weight vector, ordered by w_1 ascending: each row is the
/// componentwise median of the searched budgets over `trials` random channels
/// at SNR = P / sigma^2 with sigma^2 = 1.
LeakageTable build_leakage_table(Index users, Index antennas, double snr_db, int trials,
                                 std::vector<Eigen::VectorXd> weights, const RngSpec& rng,
                                 unsigned threads = 0, const SearchOptions& opts = {});

/// The five reference (alpha_21, alpha_12) operating points for K = N = 2 at 0 dB.
LeakageTable reference_table();

struct TableOutcome {
  std::vector<BeamVector> beams;
  RatePoint<double> rates;
};

TableOutcome apply_table(const MisoChannelSet& ch, const LeakageTable& table, std::size_t row);

void write_table(std::ostream& out, const LeakageTable& table);
LeakageTable read_table(std::istream& in);
void save_table(const std::filesystem::path& path, const LeakageTable& table);
LeakageTable load_table(const std::filesystem::path& path);

}  // namespace rzf

#endif  // RZF_RATE_CONTROL_HPP
