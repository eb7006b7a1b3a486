#ifndef RZF_SOPC_HPP
#define RZF_SOPC_HPP

#include <cmath>
#include <limits>
#include <vector>

#include "rzf/miso_beam.hpp"
#include "rzf/opcount.hpp"
#include "rzf/projection.hpp"

namespace rzf {

enum class Termination { power_exhausted, directions_exhausted };

inline const char* to_string(Termination t) {
  return t == Termination::power_exhausted ? "power_exhausted" : "directions_exhausted";
}

/// Beam written as sum_k coeffs[k] * u_k where u_0 is the matched filter and
/// u_k is the normalized projection of h_ii off span{h_ji : j in gamma_tilde[0..k)}.
template <typename Real>
struct BasicSopcSolution {
  BasicBeamVector<Real> beam;
  std::vector<Index> gamma_tilde;
  std::vector<Real> coeffs;
  Real power_used = 0;
  Termination terminated_by = Termination::power_exhausted;
};

using SopcSolution = BasicSopcSolution<double>;

namespace detail {

// Nonnegative root of c mu^2 + 2 rho mu - slack = 0, evaluated without
// cancellation. slack <= 0 with rho >= 0 means the bound is already reached.
template <typename Real>
Real nonnegative_root(Real rho, Real c, Real slack) {
  Real disc = rho * rho + c * slack;
  if (disc < Real(0)) disc = Real(0);
  const Real s = std::sqrt(disc);
  if (rho >= Real(0)) {
    const Real den = rho + s;
    if (!(den > Real(0))) return Real(0);
    return std::max(Real(0), slack / den);
  }
  return (s - rho) / c;
}

}  // namespace detail

/// Sequential orthogonal projection combining with real coefficients.
///
/// Power is poured along u = P_A^perp h_ii / ||.|| until either the power
/// budget or the first untouched leakage constraint binds. A binding
/// constraint adds its channel to A and the process continues along the new
/// projection, for at most min(N, K) directions. Ties in the binding
/// constraint go to the lowest receiver index.
template <typename Real>
BasicSopcSolution<Real> sopc_design(const BasicMisoChannelSet<Real>& ch, Index i,
                                    const BasicLeakageBudget<Real>& budget) {
  const Index K = ch.users();
  const Index N = ch.antennas();
  if (budget.users() != K) throw DimensionMismatch("budget size differs from K");
  const CVec<Real>& own = ch.h(i, i);
  const Real own_norm = own.norm();
  if (!(own_norm > Real(0))) throw DegenerateChannel("own channel is zero");

  SpanAccumulator<Real> span(N);
  const Index own_id = span.track(own);

  std::vector<Index> remaining;
  for (Index j = 0; j < K; ++j)
    if (j != i) remaining.push_back(j);
  // h_ji^H v for every receiver, kept current as v grows
  std::vector<Complex<Real>> leak(static_cast<std::size_t>(K), Complex<Real>(0));
  std::vector<Complex<Real>> along(static_cast<std::size_t>(K), Complex<Real>(0));

  BasicSopcSolution<Real> sol;
  sol.beam = {CVec<Real>::Zero(N), i};
  CVec<Real>& v = sol.beam.v;
  const Real power = ch.power(i);
  const Real inf = std::numeric_limits<Real>::infinity();
  const Index max_dirs = std::min(N, K);
  sol.terminated_by = Termination::directions_exhausted;

  for (Index k = 1; k <= max_dirs; ++k) {
    const CVec<Real>& resid = span.residual(own_id);
    const Real rnorm = resid.norm();
    if (!(rnorm > Real(tol::kSpanMembership) * own_norm))
      throw DegenerateChannel("own channel lies in the span of the active interference channels");
    const CVec<Real> u = resid / rnorm;

    ops::add(2 * N);
    const Real rho_p = std::real(u.dot(v));
    const Real mu_p = detail::nonnegative_root(rho_p, Real(1), power - v.squaredNorm());

    Real mu_star = inf;
    Index j_star = -1;
    for (Index j : remaining) {
      const auto js = static_cast<std::size_t>(j);
      ops::add(N);
      along[js] = ch.h(j, i).dot(u);
      const Real c = std::norm(along[js]);
      const Real cap = leakage_cap(ch, budget, j, i);
      Real mu_j = inf;
      if (c >= Real(tol::kUnreachableLeakage)) {
        const Real rho_j = std::real(std::conj(leak[js]) * along[js]);
        mu_j = detail::nonnegative_root(rho_j, c, cap - std::norm(leak[js]));
      }
      if (mu_j < mu_star) {
        mu_star = mu_j;
        j_star = j;
      }
    }

    const bool constraint_binds = mu_p > mu_star;
    const Real step = constraint_binds ? mu_star : mu_p;
    v += step * u;
    for (Index j : remaining) leak[static_cast<std::size_t>(j)] += step * along[static_cast<std::size_t>(j)];
    sol.coeffs.push_back(step);

    if (!constraint_binds) {
      sol.terminated_by = Termination::power_exhausted;
      break;
    }
    sol.gamma_tilde.push_back(j_star);
    std::erase(remaining, j_star);
    if (k < max_dirs) span.append(ch.h(j_star, i));
  }
  sol.power_used = v.squaredNorm();
  return sol;
}

/// Two-pair closed form: sqrt(P) MF when the leakage constraint never binds,
/// otherwise xi0 * v_MF + xi1 * v_ZF.
template <typename Real>
BasicSopcSolution<Real> closed_form_two_user(const BasicMisoChannelSet<Real>& ch, Index i,
                                             const BasicLeakageBudget<Real>& budget) {
  if (ch.users() != 2) throw DimensionMismatch("two-user closed form needs K = 2");
  const Index j = 1 - i;
  const Real P = ch.power(i);
  const CVec<Real> mf = mf_beam(ch, i).v;
  const Real cross = std::norm(ch.h(j, i).dot(mf));
  const Real cap = leakage_cap(ch, budget, j, i);

  BasicSopcSolution<Real> sol;
  sol.beam.owner = i;
  if (!(cross > Real(0)) || P <= cap / cross) {
    sol.beam.v = std::sqrt(P) * mf;
    sol.coeffs = {std::sqrt(P)};
    sol.terminated_by = Termination::power_exhausted;
    sol.power_used = sol.beam.v.squaredNorm();
    return sol;
  }
  const Real xi0 = std::sqrt(cap / cross);
  sol.gamma_tilde = {j};
  SpanAccumulator<Real> span(ch.antennas());
  if (ch.antennas() < 2) {
    sol.beam.v = xi0 * mf;
    sol.coeffs = {xi0};
    sol.terminated_by = Termination::directions_exhausted;
  } else {
    span.append(ch.h(j, i));
    const CVec<Real> zf_dir = span.project_complement(ch.h(i, i));
    const CVec<Real> zf = zf_dir / zf_dir.norm();
    const Real rho = zf_dir.norm() / ch.h(i, i).norm();
    const Real xi1 = -rho * xi0 + std::sqrt(P - xi0 * xi0 * (Real(1) - rho * rho));
    sol.beam.v = xi0 * mf + xi1 * zf;
    sol.coeffs = {xi0, xi1};
    sol.terminated_by = Termination::power_exhausted;
  }
  sol.power_used = sol.beam.v.squaredNorm();
  return sol;
}

enum class ThreeUserBranch { mf_only, two_directions, three_directions };

/// Intermediate quantities of the three-user closed form. `first` is the
/// receiver whose constraint binds first along the matched filter, `second`
/// the other one.
template <typename Real>
struct BasicThreeUserCoefficients {
  Index first = -1;
  Index second = -1;
  Real beta0 = 0, beta1 = 0, beta1_prime = 0, beta2 = 0;
  Real a = 0, b = 0, c = 0, d = 0, e = 0, f = 0;
  ThreeUserBranch branch = ThreeUserBranch::mf_only;
};

using ThreeUserCoefficients = BasicThreeUserCoefficients<double>;

/// True when the constraint of `first` binds before that of `second` along the MF beam.
template <typename Real>
bool three_user_ordering_holds(const BasicMisoChannelSet<Real>& ch, Index i,
                               const BasicLeakageBudget<Real>& budget, Index first, Index second) {
  const CVec<Real> mf = mf_beam(ch, i).v;
  const Real g_first = std::norm(ch.h(first, i).dot(mf));
  const Real g_second = std::norm(ch.h(second, i).dot(mf));
  return g_first * leakage_cap(ch, budget, second, i) >= g_second * leakage_cap(ch, budget, first, i);
}

/// Closed-form coefficients for K = 3 at transmitter i. With swap_if_needed
/// the mirrored ordering is served by exchanging the two other receivers;
/// otherwise the lower-indexed other receiver must bind second.
template <typename Real>
BasicThreeUserCoefficients<Real> three_user_coefficients(const BasicMisoChannelSet<Real>& ch, Index i,
                                                         const BasicLeakageBudget<Real>& budget,
                                                         bool swap_if_needed = false) {
  if (ch.users() != 3) throw DimensionMismatch("three-user closed form needs K = 3");
  Index lo = -1, hi = -1;
  for (Index j = 0; j < 3; ++j) {
    if (j == i) continue;
    (lo < 0 ? lo : hi) = j;
  }
  BasicThreeUserCoefficients<Real> co;
  co.second = lo;
  co.first = hi;
  if (!three_user_ordering_holds(ch, i, budget, co.first, co.second)) {
    if (!swap_if_needed) throw OrderingMismatch("constraint of the lower-indexed receiver binds first");
    std::swap(co.first, co.second);
  }

  const Real P = ch.power(i);
  const CVec<Real>& own = ch.h(i, i);
  const CVec<Real> mf = own / own.norm();
  const CVec<Real>& g3 = ch.h(co.first, i);
  const CVec<Real>& g2 = ch.h(co.second, i);
  const Real cap3 = leakage_cap(ch, budget, co.first, i);
  const Real cap2 = leakage_cap(ch, budget, co.second, i);

  const Real g3m = std::abs(g3.dot(mf));
  co.beta0 = g3m > Real(0) ? std::sqrt(cap3) / g3m : std::numeric_limits<Real>::infinity();
  if (std::sqrt(P) <= co.beta0) {
    co.branch = ThreeUserBranch::mf_only;
    return co;
  }
  if (ch.antennas() < 2) {
    co.branch = ThreeUserBranch::two_directions;
    return co;
  }

  SpanAccumulator<Real> span(ch.antennas());
  span.append(g3);
  const CVec<Real> u1_dir = span.project_complement(own);
  const CVec<Real> u1 = u1_dir / u1_dir.norm();
  co.a = span.project_complement(mf).norm();
  co.beta1 = -co.a * co.beta0 + std::sqrt(P - (Real(1) - co.a * co.a) * co.beta0 * co.beta0);

  const Complex<Real> g2m = g2.dot(mf);
  const Complex<Real> g2u = g2.dot(u1);
  co.b = std::norm(g2m);
  co.c = std::norm(g2u);
  co.d = std::real(std::conj(g2m) * g2u);
  if (std::norm(g2.dot(co.beta0 * mf + co.beta1 * u1)) <= cap2) {
    co.branch = ThreeUserBranch::two_directions;
    return co;
  }
  co.branch = ThreeUserBranch::three_directions;
  co.beta1_prime =
      (-co.d * co.beta0 + std::sqrt(co.d * co.d * co.beta0 * co.beta0 - co.c * (co.b * co.beta0 * co.beta0 - cap2))) /
      co.c;
  if (ch.antennas() < 3) return co;

  span.append(g2);
  const CVec<Real> zf_dir = span.project_complement(own);
  const CVec<Real> zf = zf_dir / zf_dir.norm();
  co.e = std::real(u1.dot(zf));
  co.f = std::real(mf.dot(zf));
  const Real lin = co.f * co.beta0 + co.e * co.beta1_prime;
  const Real used = Real(2) * co.a * co.beta0 * co.beta1_prime + co.beta0 * co.beta0 +
                    co.beta1_prime * co.beta1_prime;
  co.beta2 = -lin + std::sqrt(lin * lin - (used - P));
  return co;
}

template <typename Real>
BasicSopcSolution<Real> closed_form_three_user(const BasicMisoChannelSet<Real>& ch, Index i,
                                               const BasicLeakageBudget<Real>& budget,
                                               bool swap_if_needed = false) {
  const auto co = three_user_coefficients(ch, i, budget, swap_if_needed);
  const Index N = ch.antennas();
  const CVec<Real>& own = ch.h(i, i);
  const CVec<Real> mf = own / own.norm();
  const Real P = ch.power(i);

  BasicSopcSolution<Real> sol;
  sol.beam.owner = i;
  sol.terminated_by = Termination::power_exhausted;
  if (co.branch == ThreeUserBranch::mf_only) {
    sol.beam.v = std::sqrt(P) * mf;
    sol.coeffs = {std::sqrt(P)};
  } else if (N < 2) {
    sol.beam.v = co.beta0 * mf;
    sol.coeffs = {co.beta0};
    sol.gamma_tilde = {co.first};
    sol.terminated_by = Termination::directions_exhausted;
  } else {
    SpanAccumulator<Real> span(N);
    span.append(ch.h(co.first, i));
    const CVec<Real> u1_dir = span.project_complement(own);
    const CVec<Real> u1 = u1_dir / u1_dir.norm();
    sol.gamma_tilde = {co.first};
    if (co.branch == ThreeUserBranch::two_directions) {
      sol.beam.v = co.beta0 * mf + co.beta1 * u1;
      sol.coeffs = {co.beta0, co.beta1};
    } else if (N < 3) {
      sol.beam.v = co.beta0 * mf + co.beta1_prime * u1;
      sol.coeffs = {co.beta0, co.beta1_prime};
      sol.gamma_tilde.push_back(co.second);
      sol.terminated_by = Termination::directions_exhausted;
    } else {
      span.append(ch.h(co.second, i));
      const CVec<Real> zf_dir = span.project_complement(own);
      sol.beam.v = co.beta0 * mf + co.beta1_prime * u1 + co.beta2 * zf_dir / zf_dir.norm();
      sol.coeffs = {co.beta0, co.beta1_prime, co.beta2};
      sol.gamma_tilde.push_back(co.second);
    }
  }
  sol.power_used = sol.beam.v.squaredNorm();
  return sol;
}

/// SOPC beams for every transmitter.
template <typename Real>
std::vector<BasicBeamVector<Real>> sopc_beams(const BasicMisoChannelSet<Real>& ch,
                                              const BasicLeakageBudget<Real>& budget) {
  std::vector<BasicBeamVector<Real>> beams;
  beams.reserve(static_cast<std::size_t>(ch.users()));
  for (Index i = 0; i < ch.users(); ++i) beams.push_back(sopc_design(ch, i, budget).beam);
  return beams;
}

}  // namespace rzf

#endif  // RZF_SOPC_HPP
