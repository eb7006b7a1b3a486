#include <doctest.h>

#include <sstream>

#include "rzf/rate_control.hpp"
#include "rzf/sopc.hpp"
#include "support/fixtures.hpp"

using namespace rzf;
using test::cvec;

namespace {

// h11 = h22 and h21 = h12 up to a swap of antennas, so the two users see the same numbers.
MisoChannelSet symmetric_pair() {
  const auto a = cvec({{0.9, 0.2}, {-0.3, 0.5}});
  const auto b = cvec({{0.4, -0.6}, {0.7, 0.1}});
  const auto sa = cvec({a(1), a(0)});
  const auto sb = cvec({b(1), b(0)});
  return test::miso(2, {a, sb, b, sa});
}

}  // namespace

TEST_CASE("utility values") {
  Eigen::Vector2d r(2, 3);
  CHECK(evaluate_utility(UtilitySpec::weighted_sum(Eigen::Vector2d(1, 0)), r) == 2.0);
  CHECK(evaluate_utility(UtilitySpec::egalitarian(), r) == 2.0);
  const auto w = UtilitySpec::weighted_sum(Eigen::Vector2d(2, 1));
  CHECK(w.weights(0) == doctest::Approx(2.0 / 3));
  CHECK_THROWS_AS(UtilitySpec::weighted_sum(Eigen::Vector2d(-1, 2)), ValidationError);

  const auto ch = sample_miso(2, 2, 1.0, 1.0, RngSpec{1, 0});
  const auto nash = UtilitySpec::nash(ch);
  CHECK(evaluate_utility(nash, nash.disagreement) == 0.0);
  const Eigen::Vector2d below = nash.disagreement - Eigen::Vector2d(0.1, -0.5);
  CHECK(search_score(nash, below) == doctest::Approx(-0.1));
  CHECK(evaluate_utility(nash, below) == doctest::Approx(-0.1 * 0.5));
}

TEST_CASE("disagreement point") {
  const auto orth = test::miso(2, {cvec({2, 0}), cvec({1, 0}), cvec({0, 1}), cvec({0, 3})});
  const auto r = nash_disagreement(orth);
  CHECK(r(0) == doctest::Approx(std::log2(1 + 4.0)));
  CHECK(r(1) == doctest::Approx(std::log2(1 + 9.0)));

  const auto one = sample_miso(1, 3, 0.5, 2.0, RngSpec{2, 0});
  CHECK(nash_disagreement(one)(0) == doctest::Approx(std::log2(1 + 2.0 * one.h(0, 0).squaredNorm() / 0.5)));

  const auto sym = nash_disagreement(symmetric_pair());
  CHECK(sym(0) == doctest::Approx(sym(1)));
}

TEST_CASE("alpha cap makes the constraint slack for the matched filter") {
  const auto ch = sample_miso(3, 3, 0.7, 2.0, RngSpec{3, 0});
  LeakageBudget b(3);
  b.set(1, 0, alpha_cap(ch, 1, 0));
  b.set(2, 0, alpha_cap(ch, 2, 0));
  const CVec<double> v = std::sqrt(2.0) * mf_beam(ch, 0).v;
  CHECK(check_rzf_feasible(ch, 0, v, b));
  CHECK(sopc_design(ch, 0, b).gamma_tilde.empty());
}

TEST_CASE("line search") {
  const auto ch = sample_miso(2, 2, 1.0, 1.0, RngSpec{4, 0});

  const auto only1 = UtilitySpec::weighted_sum(Eigen::Vector2d(1, 0));
  LeakageBudget b(2);
  CHECK(line_maximize_alpha(ch, only1, b, 0, 1) == 0.0);
  const double a21 = line_maximize_alpha(ch, only1, b, 1, 0);
  CHECK(a21 == doctest::Approx(alpha_cap(ch, 1, 0)).epsilon(1e-3));

  // dense-grid check on a two-user slice
  const auto spec = UtilitySpec::weighted_sum(Eigen::Vector2d(0.5, 0.5));
  const double found = line_maximize_alpha(ch, spec, b, 1, 0);
  const double cap = alpha_cap(ch, 1, 0);
  double best = -1, arg = 0;
  for (int k = 0; k <= 200000; ++k) {
    LeakageBudget t = b;
    t.set(1, 0, cap * k / 200000.0);
    const double u = evaluate_utility(spec, achievable_rates(ch, sopc_beams(ch, t)));
    if (u > best) {
      best = u;
      arg = cap * k / 200000.0;
    }
  }
  LeakageBudget t = b;
  t.set(1, 0, found);
  CHECK(evaluate_utility(spec, achievable_rates(ch, sopc_beams(ch, t))) >= best - 1e-6);
  CHECK(std::abs(found - arg) <= 1e-4 * std::max(1.0, cap));
}

TEST_CASE("coordinate search") {
  const auto ch = sample_miso(2, 2, 1.0, 1.0, RngSpec{5, 0});
  const auto only1 = centralized_alpha_search(ch, UtilitySpec::weighted_sum(Eigen::Vector2d(1, 0)));
  CHECK(only1.budget(1, 0) == doctest::Approx(alpha_cap(ch, 1, 0)).epsilon(1e-3));
  CHECK(only1.budget(0, 1) == 0.0);
  CHECK(only1.converged);

  const auto spec = UtilitySpec::weighted_sum(Eigen::Vector2d(2, 1));
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto r = centralized_alpha_search(sample_miso(2, 2, 1.0, 1.0, RngSpec{s, 6}), spec);
    for (std::size_t k = 1; k < r.trace.size(); ++k) CHECK(r.trace[k] >= r.trace[k - 1]);
    CHECK(r.outer_iterations <= 50);
    CHECK(r.utility == doctest::Approx(r.trace.back()));
  }

  const auto sym = centralized_alpha_search(symmetric_pair(), UtilitySpec::egalitarian());
  CHECK(std::abs(sym.rates(0) - sym.rates(1)) < 1e-4);

  const auto ch3 = sample_miso(3, 3, 1.0, 3.0, RngSpec{7, 0});
  const auto nash = centralized_alpha_search(ch3, UtilitySpec::nash(ch3));
  CHECK(nash.utility >= 0.0);
}

TEST_CASE("tables") {
  const auto ref = reference_table();
  REQUIRE(ref.rows.size() == 5);
  CHECK(ref.rows[0](1, 0) == 0.0);
  CHECK(ref.rows[0](0, 1) == 0.8511);
  CHECK(ref.rows[2](1, 0) == 0.2444);

  std::stringstream ss;
  write_table(ss, ref);
  const auto back = read_table(ss);
  CHECK(back.rows.size() == 5);
  for (std::size_t k = 0; k < 5; ++k) CHECK(back.rows[k].matrix() == ref.rows[k].matrix());

  std::stringstream bad("table 2 2 0 10\n0.1\n");
  CHECK_THROWS_AS(read_table(bad), ParseError);

  const auto built = build_leakage_table(2, 2, 0.0, 4, {Eigen::Vector2d(0.9, 0.1), Eigen::Vector2d(0.1, 0.9)},
                                         RngSpec{8, 0}, 2);
  REQUIRE(built.rows.size() == 2);
  CHECK(built.rows[0](1, 0) <= built.rows[1](1, 0));
  const auto one = build_leakage_table(2, 2, 0.0, 2, {Eigen::Vector2d(0.5, 0.5)}, RngSpec{8, 0}, 1);
  CHECK(one.rows.size() == 1);
}

TEST_CASE("applying table rows") {
  const auto ch = sample_miso(2, 2, 1.0, 1.0, RngSpec{9, 0});
  LeakageTable t;
  LeakageBudget open(2);
  open.set(1, 0, alpha_cap(ch, 1, 0));
  open.set(0, 1, alpha_cap(ch, 0, 1));
  t.rows = {LeakageBudget(2), open};
  const auto zf = apply_table(ch, t, 0);
  std::vector<BeamVector> zfb{zf_beam(ch, 0), zf_beam(ch, 1)};
  CHECK((zf.rates - achievable_rates(ch, zfb)).norm() <= 1e-9);
  CHECK((apply_table(ch, t, 1).rates - nash_disagreement(ch)).norm() <= 1e-9);

  const auto ref = reference_table();
  for (std::size_t k = 0; k < ref.rows.size(); ++k) {
    const auto out = apply_table(ch, ref, k);
    for (Index i = 0; i < 2; ++i) CHECK(check_rzf_feasible(ch, i, out.beams[static_cast<std::size_t>(i)].v, ref.rows[k]));
  }
  CHECK_THROWS_AS(apply_table(ch, ref, 7), ValidationError);
}
