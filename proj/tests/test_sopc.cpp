#include <doctest.h>

#include "rzf/sopc.hpp"
#include "support/fixtures.hpp"

using namespace rzf;
using test::cvec;

namespace {

LeakageBudget random_budget(Index K, RandomStream& s, double scale) {
  LeakageBudget b(K);
  for (Index r = 0; r < K; ++r)
    for (Index t = 0; t < K; ++t)
      if (r != t) b.set(r, t, scale * s.uniform());
  return b;
}

// Distance from v to span{h_ii, h_ji : j in gamma}.
double representation_residual(const MisoChannelSet& ch, Index i, const SopcSolution& sol) {
  SpanAccumulator<double> acc(ch.antennas());
  acc.try_append(ch.h(i, i));
  for (Index j : sol.gamma_tilde) acc.try_append(ch.h(j, i));
  return acc.project_complement(sol.beam.v).norm();
}

}  // namespace

TEST_CASE("two-user worked example") {
  const double r = 1.0 / std::sqrt(2.0);
  const auto ch = test::miso(2, {cvec({1, 0}), cvec({0, 1}), cvec({r, r}), cvec({1, 0})});
  auto budget = LeakageBudget(2);
  budget.set(1, 0, 0.1);
  const auto sol = sopc_design(ch, 0, budget);
  CHECK(sol.beam.v(0).real() == doctest::Approx(0.894427191).epsilon(1e-9));
  CHECK(sol.beam.v(1).real() == doctest::Approx(-0.447213595).epsilon(1e-9));
  CHECK(std::abs(sol.beam.v(0).imag()) <= 1e-15);
  REQUIRE(sol.gamma_tilde.size() == 1);
  CHECK(sol.gamma_tilde[0] == 1);
  CHECK(sol.power_used == doctest::Approx(1.0));
  CHECK(leakage_power(sol.beam, ch.h(1, 0)) == doctest::Approx(0.1));
  CHECK((closed_form_two_user(ch, 0, budget).beam.v - sol.beam.v).norm() <= 1e-9);
}

TEST_CASE("matched filter when no constraint binds") {
  const auto ch = sample_miso(3, 4, 1.0, 2.0, RngSpec{3, 0});
  const auto mf = mf_beam(ch, 0).v;
  LeakageBudget budget(3);
  for (Index j = 1; j < 3; ++j) budget.set(j, 0, 2.0 * std::norm(ch.h(j, 0).dot(mf)) / ch.noise(j));
  const auto sol = sopc_design(ch, 0, budget);
  CHECK(sol.gamma_tilde.empty());
  CHECK((sol.beam.v - std::sqrt(2.0) * mf).norm() <= 1e-12);
  CHECK((closed_form_three_user(ch, 0, budget, true).beam.v - sol.beam.v).norm() <= 1e-12);

  auto huge = LeakageBudget::uniform(2, 1e9);
  const auto two = sample_miso(2, 3, 1.0, 1.0, RngSpec{4, 0});
  CHECK(closed_form_two_user(two, 1, huge).gamma_tilde.empty());
}

TEST_CASE("zero budget reproduces zero forcing") {
  for (std::uint64_t s = 0; s < 100; ++s) {
    const Index K = 2 + static_cast<Index>(s % 3);
    const auto ch = sample_miso(K, K + static_cast<Index>(s % 2), 1.0, 1.5, RngSpec{s, 1});
    for (Index i = 0; i < K; ++i) {
      const auto sol = sopc_design(ch, i, LeakageBudget(K));
      const auto zf = zf_beam(ch, i).v;
      CHECK((sol.beam.v - zf).norm() <= 1e-9);
      CHECK(sol.terminated_by == Termination::power_exhausted);
    }
    if (K == 2) {
      CHECK((closed_form_two_user(ch, 0, LeakageBudget(2)).beam.v - zf_beam(ch, 0).v).norm() <= 1e-9);
    }
  }
}

TEST_CASE("solution invariants on random instances") {
  RandomStream draw(RngSpec{77, 0});
  for (std::uint64_t s = 0; s < 300; ++s) {
    const Index K = 2 + static_cast<Index>(s % 4);
    const Index N = 1 + static_cast<Index>((s / 4) % 6);
    const auto ch = sample_miso(K, N, 1.0, 0.5 + 10 * draw.uniform(), RngSpec{s, 2});
    const auto budget = random_budget(K, draw, 0.5);
    for (Index i = 0; i < K; ++i) {
      const auto sol = sopc_design(ch, i, budget);
      CHECK(check_rzf_feasible(ch, i, sol.beam.v, budget));
      for (double c : sol.coeffs) CHECK(c >= 0.0);
      for (Index j : sol.gamma_tilde)
        CHECK(std::abs(leakage_power(sol.beam, ch.h(j, i)) - leakage_cap(ch, budget, j, i)) <= 1e-9);
      CHECK(representation_residual(ch, i, sol) <= 1e-9);
      std::vector<Index> g = sol.gamma_tilde;
      std::sort(g.begin(), g.end());
      CHECK(std::adjacent_find(g.begin(), g.end()) == g.end());
      CHECK(std::abs(sol.power_used - sol.beam.v.squaredNorm()) <= 1e-12);
      if (sol.terminated_by == Termination::power_exhausted)
        CHECK(sol.power_used == doctest::Approx(ch.power(i)).epsilon(1e-9));
      else
        CHECK(static_cast<Index>(sol.gamma_tilde.size()) == N);
      if (N >= K) CHECK(sol.terminated_by == Termination::power_exhausted);
      CHECK(std::abs(std::imag(ch.h(i, i).dot(sol.beam.v))) <= 1e-9);
    }
  }
}

TEST_CASE("two-user closed form agrees with the iteration") {
  RandomStream draw(RngSpec{5, 0});
  for (std::uint64_t s = 0; s < 300; ++s) {
    const auto ch = sample_miso(2, 2 + static_cast<Index>(s % 3), 1.0, 0.1 + 20 * draw.uniform(), RngSpec{s, 3});
    const auto budget = random_budget(2, draw, 1.0);
    for (Index i = 0; i < 2; ++i)
      CHECK((closed_form_two_user(ch, i, budget).beam.v - sopc_design(ch, i, budget).beam.v).norm() <= 1e-9);
  }
  CHECK_THROWS_AS(closed_form_two_user(sample_miso(3, 3, 1.0, 1.0, RngSpec{}), 0, LeakageBudget(3)),
                  DimensionMismatch);
}

TEST_CASE("three-user closed form agrees with the iteration") {
  RandomStream draw(RngSpec{6, 0});
  int checked = 0, three = 0;
  for (std::uint64_t s = 0; checked < 500; ++s) {
    const auto ch = sample_miso(3, 3, 1.0, 0.1 + 30 * draw.uniform(), RngSpec{s, 4});
    const auto budget = random_budget(3, draw, 0.5);
    if (!three_user_ordering_holds(ch, 0, budget, 2, 1)) {
      CHECK_THROWS_AS(closed_form_three_user(ch, 0, budget), OrderingMismatch);
      continue;
    }
    const auto cf = closed_form_three_user(ch, 0, budget);
    const auto it = sopc_design(ch, 0, budget);
    CHECK((cf.beam.v - it.beam.v).norm() <= 1e-7);
    three += three_user_coefficients(ch, 0, budget).branch == ThreeUserBranch::three_directions;
    ++checked;
  }
  CHECK(three > 50);

  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto ch = sample_miso(3, 3, 1.0, 5.0, RngSpec{s, 5});
    const auto budget = random_budget(3, draw, 0.3);
    for (Index i = 0; i < 3; ++i)
      CHECK((closed_form_three_user(ch, i, budget, true).beam.v - sopc_design(ch, i, budget).beam.v).norm() <= 1e-7);
  }
}

TEST_CASE("three-user branch boundaries") {
  const auto ch = sample_miso(3, 3, 1.0, 1.0, RngSpec{12, 0});
  auto budget = LeakageBudget::uniform(3, 0.2);
  const auto co = three_user_coefficients(ch, 0, budget, true);
  const auto small = ch.with_power(Eigen::Vector3d::Constant(0.99 * co.beta0 * co.beta0));
  CHECK(three_user_coefficients(small, 0, budget, true).branch == ThreeUserBranch::mf_only);
  const auto big = ch.with_power(Eigen::Vector3d::Constant(1e4));
  CHECK(three_user_coefficients(big, 0, budget, true).branch == ThreeUserBranch::three_directions);
}

TEST_CASE("single precision instantiation") {
  const auto ch = sample_miso<float>(3, 4, 1.0f, 2.0f, RngSpec{2, 0});
  const auto budget = BasicLeakageBudget<float>::uniform(3, 0.1f);
  const auto sol = sopc_design(ch, 1, budget);
  const auto ref = sopc_design(ch.cast<double>(), 1, LeakageBudget::uniform(3, 0.1));
  CHECK((sol.beam.v.cast<std::complex<double>>() - ref.beam.v).norm() <= 1e-4);
  CHECK(check_rzf_feasible(ch, 1, sol.beam.v, budget, 1e-5f));
}
