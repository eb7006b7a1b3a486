#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "rzf/projection.hpp"
#include "rzf/rng.hpp"
#include "support/fixtures.hpp"

using namespace rzf;
using test::cvec;

TEST_CASE("coordinate spans") {
  SpanAccumulator<double> acc(3);
  const auto x = cvec({1, 1, 1});
  CHECK(acc.project(x).norm() == 0.0);
  CHECK(acc.project_complement(x) == x);

  acc.append(cvec({0, 1, 0}));
  CHECK(acc.project(cvec({1, 0, 0})).norm() <= 1e-15);
  acc.append(cvec({0, 0, 1}));
  CHECK((acc.project(x) - cvec({0, 1, 1})).norm() <= 1e-15);
}

TEST_CASE("recursive projector matches a direct QR projector") {
  RandomStream s(RngSpec{42, 0});
  double worst = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const Index N = 8;
    const Index m = 1 + trial % 7;
    CMat<double> A(N, m);
    SpanAccumulator<double> acc(N);
    const auto x = s.complex_normal_vector<double>(N);
    const Index id = acc.track(x);
    for (Index c = 0; c < m; ++c) {
      A.col(c) = s.complex_normal_vector<double>(N);
      acc.append(A.col(c));
    }
    const CMat<double> P = test::direct_projector(A);
    for (int probe = 0; probe < 3; ++probe) {
      const auto y = s.complex_normal_vector<double>(N);
      worst = std::max(worst, (acc.project(y) - P * y).norm());
    }
    worst = std::max(worst, (acc.residual(id) - (x - P * x)).norm());
    const CMat<double>& Q = acc.basis();
    worst = std::max(worst, (Q.adjoint() * Q - CMat<double>::Identity(m, m)).norm() * 1e-2);
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("projector properties") {
  RandomStream s(RngSpec{5, 0});
  SpanAccumulator<double> acc(6);
  for (int k = 0; k < 3; ++k) acc.append(s.complex_normal_vector<double>(6));
  for (int k = 0; k < 20; ++k) {
    const auto x = s.complex_normal_vector<double>(6);
    const auto y = s.complex_normal_vector<double>(6);
    const auto px = acc.project(x);
    CHECK((acc.project(px) - px).norm() <= 1e-12);
    CHECK(std::abs(acc.project(x).dot(y) - x.dot(acc.project(y))) <= 1e-12);
    CHECK(px.norm() <= x.norm() + 1e-12);
    const auto r = acc.project_complement(x);
    CHECK((acc.basis().adjoint() * r).norm() <= 1e-12);
  }
  const CVec<double> inside = acc.basis() * s.complex_normal_vector<double>(3);
  CHECK(acc.project_complement(inside).norm() <= 1e-12);
}

TEST_CASE("append order does not change the span") {
  RandomStream s(RngSpec{8, 0});
  std::vector<CVec<double>> ys;
  for (int k = 0; k < 4; ++k) ys.push_back(s.complex_normal_vector<double>(7));
  std::vector<int> order{0, 1, 2, 3};
  SpanAccumulator<double> ref(7);
  for (int k : order) ref.append(ys[k]);
  const CMat<double> Pref = ref.basis() * ref.basis().adjoint();
  while (std::next_permutation(order.begin(), order.end())) {
    SpanAccumulator<double> acc(7);
    for (int k : order) acc = append(acc, ys[k]);
    CHECK((acc.basis() * acc.basis().adjoint() - Pref).norm() <= 1e-10);
  }
}

TEST_CASE("degenerate append") {
  RandomStream s(RngSpec{9, 0});
  SpanAccumulator<double> acc(4);
  const auto a = s.complex_normal_vector<double>(4);
  const auto b = s.complex_normal_vector<double>(4);
  acc.append(a);
  acc.append(b);
  const CMat<double> before = acc.basis();
  CHECK_THROWS_AS(acc.append(2.0 * a - std::complex<double>(0, 1) * b), DegenerateAppend);
  CHECK_FALSE(acc.try_append(a + b));
  CHECK(acc.rank() == 2);
  CHECK(acc.basis() == before);
  CHECK_THROWS_AS(acc.project(CVec<double>::Zero(3)), DimensionMismatch);
}
