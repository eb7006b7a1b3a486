#ifndef RZF_PROJECTION_HPP
#define RZF_PROJECTION_HPP

#include <vector>

#include "rzf/core.hpp"
#include "rzf/opcount.hpp"

namespace rzf {

/// Orthonormal basis of a growing span C([a_1, ..., a_k]) together with the
/// complement residuals of a set of tracked vectors.
///
/// Appending y updates every tracked residual x - P x with the sequential
/// orthogonal projection identity
///
///   P_[A,y] x = P_A x + <x - P_A x, w> / ||w||^2 * w,   w = y - P_A y,
///
/// so a tracked vector never needs to be re-projected from scratch.
template <typename Real>
class SpanAccumulator {
 public:
  explicit SpanAccumulator(Index dim) : dim_(dim), basis_(dim, 0) {}

  Index dim() const { return dim_; }
  Index rank() const { return basis_.cols(); }
  bool empty() const { return basis_.cols() == 0; }
  const CMat<Real>& basis() const { return basis_; }

  CVec<Real> project(const CVec<Real>& x) const {
    check_dim(x);
    if (empty()) return CVec<Real>::Zero(dim_);
    ops::add(2 * dim_ * rank());
    return basis_ * (basis_.adjoint() * x);
  }

  CVec<Real> project_complement(const CVec<Real>& x) const { return x - project(x); }

  /// Registers x; its complement residual is kept current across appends.
  Index track(const CVec<Real>& x) {
    tracked_.push_back(project_complement(x));
    return static_cast<Index>(tracked_.size()) - 1;
  }

  /// x - P_A x for a tracked vector.
  const CVec<Real>& residual(Index id) const { return tracked_[static_cast<std::size_t>(id)]; }

  /// Extends the span by y. Throws DegenerateAppend when the component of y
  /// outside the span is below tol relative to ||y||.
  void append(const CVec<Real>& y, Real tol = Real(tol::kSpanMembership)) {
    if (!try_append(y, tol)) throw DegenerateAppend("appended vector lies in the current span");
  }

  /// As append, but returns false and leaves the state unchanged on a
  /// degenerate vector.
  bool try_append(const CVec<Real>& y, Real tol = Real(tol::kSpanMembership)) {
    check_dim(y);
    const Real ynorm = y.norm();
    CVec<Real> w = project_complement(y);
    // second Gram-Schmidt pass keeps the basis orthonormal to ~eps
    if (!empty()) w -= project(w);
    const Real wnorm = w.norm();
    if (!(ynorm > Real(0)) || wnorm <= tol * ynorm) return false;
    const Real wnorm2 = wnorm * wnorm;
    for (auto& r : tracked_) {
      ops::add(2 * dim_);
      r -= (w.dot(r) / wnorm2) * w;
    }
    basis_.conservativeResize(Eigen::NoChange, basis_.cols() + 1);
    basis_.col(basis_.cols() - 1) = w / wnorm;
    return true;
  }

 private:
  void check_dim(const CVec<Real>& x) const {
    if (x.size() != dim_) throw DimensionMismatch("vector length differs from accumulator dimension");
  }

  Index dim_;
  CMat<Real> basis_;
  std::vector<CVec<Real>> tracked_;
};

template <typename Real>
CVec<Real> project(const SpanAccumulator<Real>& acc, const CVec<Real>& x) {
  return acc.project(x);
}

template <typename Real>
CVec<Real> project_complement(const SpanAccumulator<Real>& acc, const CVec<Real>& x) {
  return acc.project_complement(x);
}

/// Value-returning append.
template <typename Real>
SpanAccumulator<Real> append(SpanAccumulator<Real> acc, const CVec<Real>& y) {
  acc.append(y);
  return acc;
}

}  // namespace rzf

#endif  // RZF_PROJECTION_HPP
