#ifndef RZF_MISO_BEAM_HPP
#define RZF_MISO_BEAM_HPP

#include <cmath>
#include <span>
#include <vector>

#include "rzf/channel.hpp"
#include "rzf/projection.hpp"

namespace rzf {

template <typename Real>
struct BasicBeamVector {
  CVec<Real> v;
  Index owner = 0;
};

using BeamVector = BasicBeamVector<double>;

/// Interference relaxation levels. alpha(j, i) bounds the leakage from
/// transmitter i into receiver j as |h_ji^H v_i|^2 <= alpha(j, i) sigma_j^2.
/// The diagonal is unused and kept at zero.
template <typename Real>
class BasicLeakageBudget {
 public:
  explicit BasicLeakageBudget(Index users) : alpha_(RMat<Real>::Zero(users, users)) {}

  explicit BasicLeakageBudget(RMat<Real> alpha) : alpha_(std::move(alpha)) {
    if (alpha_.rows() != alpha_.cols()) throw ValidationError("leakage budget must be K x K");
    alpha_.diagonal().setZero();
    if (!(alpha_.array() >= Real(0)).all()) throw ValidationError("leakage budget entries must be >= 0");
  }

  static BasicLeakageBudget uniform(Index users, Real value) {
    return BasicLeakageBudget(RMat<Real>::Constant(users, users, value));
  }

  Index users() const { return alpha_.rows(); }
  Real operator()(Index rx, Index tx) const { return alpha_(rx, tx); }
  const RMat<Real>& matrix() const { return alpha_; }

  void set(Index rx, Index tx, Real value) {
    if (rx == tx) return;
    if (!(value >= Real(0))) throw ValidationError("leakage budget entries must be >= 0");
    alpha_(rx, tx) = value;
  }

  /// Total relative interference budget at receiver i.
  Real epsilon(Index i) const { return alpha_.row(i).sum() - alpha_(i, i); }

 private:
  RMat<Real> alpha_;
};

using LeakageBudget = BasicLeakageBudget<double>;

/// Leakage power budget alpha_ji * sigma_j^2 of transmitter i toward receiver j.
template <typename Real>
Real leakage_cap(const BasicMisoChannelSet<Real>& ch, const BasicLeakageBudget<Real>& budget,
                 Index rx, Index tx) {
  return budget(rx, tx) * ch.noise(rx);
}

template <typename Real>
BasicBeamVector<Real> mf_beam(const BasicMisoChannelSet<Real>& ch, Index i) {
  const auto& h = ch.h(i, i);
  const Real norm = h.norm();
  if (!(norm > Real(0))) throw DegenerateChannel("own channel is zero");
  return {h / norm, i};
}

/// Best zero-forcing beam at full power.
template <typename Real>
BasicBeamVector<Real> zf_beam(const BasicMisoChannelSet<Real>& ch, Index i) {
  const Index K = ch.users();
  if (ch.antennas() < K) throw InfeasibleZF("zero forcing needs N >= K");
  SpanAccumulator<Real> span(ch.antennas());
  for (Index j = 0; j < K; ++j) {
    if (j == i) continue;
    if (!span.try_append(ch.h(j, i))) throw DegenerateChannel("interference channels are linearly dependent");
  }
  const CVec<Real> dir = span.project_complement(ch.h(i, i));
  const Real norm = dir.norm();
  if (!(norm > Real(tol::kSpanMembership) * ch.h(i, i).norm()))
    throw DegenerateChannel("own channel lies in the span of the interference channels");
  return {std::sqrt(ch.power(i)) * dir / norm, i};
}

template <typename Real>
Real leakage_power(const CVec<Real>& v, const CVec<Real>& h) {
  if (v.size() != h.size()) throw DimensionMismatch("beam and channel lengths differ");
  return std::norm(h.dot(v));
}

template <typename Real>
Real leakage_power(const BasicBeamVector<Real>& beam, const CVec<Real>& h) {
  return leakage_power(beam.v, h);
}

/// Rates with single-user decoding, interference treated as noise, log base 2.
template <typename Real>
RatePoint<Real> achievable_rates(const BasicMisoChannelSet<Real>& ch,
                                 std::span<const BasicBeamVector<Real>> beams) {
  const Index K = ch.users();
  if (static_cast<Index>(beams.size()) != K) throw DimensionMismatch("need one beam per transmitter");
  RatePoint<Real> rates(K);
  for (Index i = 0; i < K; ++i) {
    Real interference = ch.noise(i);
    for (Index j = 0; j < K; ++j)
      if (j != i) interference += leakage_power(beams[static_cast<std::size_t>(j)].v, ch.h(i, j));
    const Real signal = leakage_power(beams[static_cast<std::size_t>(i)].v, ch.h(i, i));
    rates(i) = std::log2(Real(1) + signal / interference);
  }
  return rates;
}

template <typename Real>
RatePoint<Real> achievable_rates(const BasicMisoChannelSet<Real>& ch,
                                 const std::vector<BasicBeamVector<Real>>& beams) {
  return achievable_rates(ch, std::span<const BasicBeamVector<Real>>(beams));
}

/// log2(1 + |h_ii^H v_i|^2 / ((1 + eps_i) sigma_i^2)); depends on the own beam only.
template <typename Real>
Real rate_lower_bound(const BasicMisoChannelSet<Real>& ch, Index i, const CVec<Real>& v,
                      const BasicLeakageBudget<Real>& budget) {
  const Real signal = leakage_power(v, ch.h(i, i));
  return std::log2(Real(1) + signal / ((Real(1) + budget.epsilon(i)) * ch.noise(i)));
}

template <typename Real>
bool check_rzf_feasible(const BasicMisoChannelSet<Real>& ch, Index i, const CVec<Real>& v,
                        const BasicLeakageBudget<Real>& budget,
                        Real tol = Real(tol::kFeasibility)) {
  if (v.squaredNorm() > ch.power(i) + tol) return false;
  for (Index j = 0; j < ch.users(); ++j) {
    if (j == i) continue;
    if (leakage_power(v, ch.h(j, i)) > leakage_cap(ch, budget, j, i) + tol) return false;
  }
  return true;
}

/// Signal-to-leakage-plus-noise maximizer at full power:
/// v ~ (sigma_i^2 / P_i I + sum_{j != i} h_ji h_ji^H)^{-1} h_ii.
template <typename Real>
BasicBeamVector<Real> virtual_sinr_beam(const BasicMisoChannelSet<Real>& ch, Index i) {
  const Index N = ch.antennas();
  CMat<Real> gram = CMat<Real>::Identity(N, N) * Complex<Real>(ch.noise(i) / ch.power(i));
  for (Index j = 0; j < ch.users(); ++j)
    if (j != i) gram.noalias() += ch.h(j, i) * ch.h(j, i).adjoint();
  const CVec<Real> dir = gram.llt().solve(ch.h(i, i));
  const Real norm = dir.norm();
  if (!(norm > Real(0))) throw DegenerateChannel("own channel is zero");
  return {std::sqrt(ch.power(i)) * dir / norm, i};
}

/// Signal-to-leakage-plus-noise ratio of beam v at transmitter i.
template <typename Real>
Real slnr(const BasicMisoChannelSet<Real>& ch, Index i, const CVec<Real>& v) {
  Real leak = ch.noise(i);
  for (Index j = 0; j < ch.users(); ++j)
    if (j != i) leak += leakage_power(v, ch.h(j, i));
  return leakage_power(v, ch.h(i, i)) / leak;
}

}  // namespace rzf

#endif  // RZF_MISO_BEAM_HPP
