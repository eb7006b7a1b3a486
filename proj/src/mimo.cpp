#include "rzf/mimo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace rzf {

namespace {

using Mat = Eigen::MatrixXcd;

double log2det_hpd(const Mat& X) {
  Eigen::LLT<Mat> llt(X);
  if (llt.info() != Eigen::Success) throw Error("matrix is not positive definite");
  double s = 0;
  for (Index k = 0; k < X.rows(); ++k) s += std::log(std::real(llt.matrixLLT()(k, k)));
  return 2 * s / std::numbers::ln2;
}

// H^H H = U diag(s) U^H, kept so that repeated projections cost two products.
struct Ellipsoid {
  Mat U;
  Eigen::VectorXd s;
  double cap = 0;

  Ellipsoid(const Mat& H, double c) : cap(c) {
    Eigen::SelfAdjointEigenSolver<Mat> eig(H.adjoint() * H);
    U = eig.eigenvectors();
    s = eig.eigenvalues().cwiseMax(0.0);
  }

  double value(const Mat& V) const {
    const Mat W = U.adjoint() * V;
    double g = 0;
    for (Index k = 0; k < s.size(); ++k) g += s(k) * W.row(k).squaredNorm();
    return g;
  }

  Mat project(const Mat& V0) const {
    const Mat W0 = U.adjoint() * V0;
    Eigen::VectorXd w2(s.size());
    for (Index k = 0; k < s.size(); ++k) w2(k) = W0.row(k).squaredNorm();
    auto g = [&](double lambda) {
      double out = 0;
      for (Index k = 0; k < s.size(); ++k) out += s(k) * w2(k) / ((1 + lambda * s(k)) * (1 + lambda * s(k)));
      return out;
    };
    if (g(0) <= cap) return V0;

    const double smax = s.maxCoeff();
    Eigen::VectorXd scale(s.size());
    if (cap <= 0) {
      for (Index k = 0; k < s.size(); ++k) scale(k) = s(k) > 1e-12 * smax ? 0.0 : 1.0;
    } else {
      double lo = 0, hi = 1 / smax;
      while (g(hi) > cap) {
        lo = hi;
        hi *= 2;
      }
      for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) > cap ? lo : hi) = mid;
      }
      for (Index k = 0; k < s.size(); ++k) scale(k) = 1 / (1 + hi * s(k));
    }
    return U * (scale.asDiagonal() * W0);
  }
};

struct ConstraintSet {
  double power = 0;
  std::vector<Ellipsoid> leak;
};

ConstraintSet constraints_for(const MimoChannelSet& ch, Index i, const MimoBudget& budget) {
  ConstraintSet cs;
  cs.power = ch.power(i);
  for (Index j = 0; j < ch.users(); ++j)
    if (j != i) cs.leak.emplace_back(ch.H(j, i), budget(j, i) * ch.noise(j));
  return cs;
}

double violation(const Mat& V, const ConstraintSet& cs) {
  double worst = std::max(0.0, V.squaredNorm() - cs.power);
  for (const auto& e : cs.leak) worst = std::max(worst, e.value(V) - e.cap);
  return worst;
}

Mat dykstra(const Mat& Y, const ConstraintSet& cs, int cycles, double tol) {
  const std::size_t sets = cs.leak.size() + 1;
  std::vector<Mat> corr(sets, Mat::Zero(Y.rows(), Y.cols()));
  Mat X = Y;
  const double rad = std::sqrt(cs.power);
  for (int c = 0; c < cycles; ++c) {
    const Mat start = X;
    for (std::size_t s = 0; s < sets; ++s) {
      const Mat Z = X + corr[s];
      if (s == 0) {
        const double n = Z.norm();
        X = n > rad ? Mat(Z * (rad / n)) : Z;
      } else {
        X = cs.leak[s - 1].project(Z);
      }
      corr[s] = Z - X;
    }
    if ((X - start).norm() <= tol * std::max(1.0, rad) && violation(X, cs) <= tol) break;
  }
  return X;
}

// Largest feasible multiple of V; the constraint set is star-shaped about 0.
Mat pull_inside(const Mat& V, const ConstraintSet& cs) {
  double s = 1;
  const double p = V.squaredNorm();
  if (p > cs.power) s = std::min(s, std::sqrt(cs.power / p));
  for (const auto& e : cs.leak) {
    const double g = e.value(V);
    if (g > e.cap) s = std::min(s, e.cap > 0 ? std::sqrt(e.cap / g) : 0.0);
  }
  return s * V;
}

Mat whitened_mf(const MimoChannelSet& ch, Index i) {
  const Index N = ch.tx_antennas();
  Mat gram = Mat::Identity(N, N) * (ch.noise(i) / ch.power(i));
  for (Index j = 0; j < ch.users(); ++j)
    if (j != i) gram.noalias() += ch.H(j, i).adjoint() * ch.H(j, i);
  const Mat W = gram.llt().solve(Mat(ch.H(i, i).adjoint()));
  Eigen::JacobiSVD<Mat> svd(W, Eigen::ComputeThinU);
  const int d = ch.streams(i);
  return svd.matrixU().leftCols(d) * std::sqrt(ch.power(i) / d);
}

}  // namespace

double mimo_rate(const MimoChannelSet& ch, Index i, std::span<const PrecoderMatrix> precoders) {
  const Index K = ch.users();
  if (static_cast<Index>(precoders.size()) != K) throw DimensionMismatch("need one precoder per transmitter");
  const Index M = ch.rx_antennas();
  Mat phi = Mat::Identity(M, M) * ch.noise(i);
  for (Index j = 0; j < K; ++j) {
    if (j == i) continue;
    const Mat HV = ch.H(i, j) * precoders[static_cast<std::size_t>(j)].V;
    phi.noalias() += HV * HV.adjoint();
  }
  const Mat S = ch.H(i, i) * precoders[static_cast<std::size_t>(i)].V;
  return log2det_hpd(phi + S * S.adjoint()) - log2det_hpd(phi);
}

double mimo_rate(const MimoChannelSet& ch, Index i, const std::vector<PrecoderMatrix>& precoders) {
  return mimo_rate(ch, i, std::span<const PrecoderMatrix>(precoders));
}

double mimo_rate_lower_bound(const MimoChannelSet& ch, Index i, const Eigen::MatrixXcd& V,
                             const MimoBudget& budget) {
  const double c0 = 1 / (ch.noise(i) * (1 + budget.epsilon(i)));
  const Mat S = ch.H(i, i) * V;
  const Index M = ch.rx_antennas();
  return log2det_hpd(Mat::Identity(M, M) + c0 * S * S.adjoint());
}

bool eigen_ratio_bound_check(const Eigen::MatrixXcd& Phi, const Eigen::MatrixXcd& A, double tol) {
  if (Phi.rows() != Phi.cols() || A.rows() != A.cols() || Phi.rows() != A.rows())
    throw DimensionMismatch("Phi and A must be square and of equal size");
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> gen(A, Phi, Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<Mat> ea(A, Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<Mat> ep(Phi, Eigen::EigenvaluesOnly);
  const double phi_max = ep.eigenvalues().maxCoeff();
  const Index n = A.rows();
  // eigenvalues come back ascending; compare k-th largest with k-th largest
  for (Index k = 0; k < n; ++k) {
    const double lhs = gen.eigenvalues()(n - 1 - k);
    const double rhs = ea.eigenvalues()(n - 1 - k) / phi_max;
    if (lhs < rhs - tol * std::max(1.0, std::abs(rhs))) return false;
  }
  return true;
}

Eigen::MatrixXcd grad_lower_bound(const MimoChannelSet& ch, Index i, const Eigen::MatrixXcd& V,
                                  const MimoBudget& budget) {
  const double c0 = 1 / (ch.noise(i) * (1 + budget.epsilon(i)));
  const Mat& H = ch.H(i, i);
  const Mat HV = H * V;
  const Index M = ch.rx_antennas();
  const Mat inner = Mat::Identity(M, M) + c0 * HV * HV.adjoint();
  return (c0 / std::numbers::ln2) * H.adjoint() * inner.llt().solve(HV);
}

Eigen::MatrixXcd project_frobenius_ellipsoid(const Eigen::MatrixXcd& V0, const Eigen::MatrixXcd& H, double c) {
  if (H.cols() != V0.rows()) throw DimensionMismatch("H and V0 are not conformable");
  if (c < 0) throw ValidationError("ellipsoid level must be >= 0");
  return Ellipsoid(H, c).project(V0);
}

PrecoderMatrix zf_precoder(const MimoChannelSet& ch, Index i) {
  const Index K = ch.users();
  const Index M = ch.rx_antennas();
  const Index N = ch.tx_antennas();
  const int d = ch.streams(i);
  if (N < (K - 1) * M + d) throw InfeasibleZF("zero forcing needs N >= (K - 1) M + d_i");

  Mat basis = Mat::Identity(N, N);
  if (K > 1) {
    Mat stacked((K - 1) * M, N);
    Index row = 0;
    for (Index j = 0; j < K; ++j)
      if (j != i) {
        stacked.middleRows(row, M) = ch.H(j, i);
        row += M;
      }
    Eigen::JacobiSVD<Mat> svd(stacked, Eigen::ComputeFullV);
    svd.setThreshold(1e-10);
    const Index rank = svd.rank();
    if (N - rank < d) throw InfeasibleZF("interference null space is smaller than d_i");
    basis = svd.matrixV().rightCols(N - rank);
  }
  Eigen::JacobiSVD<Mat> own(ch.H(i, i) * basis, Eigen::ComputeFullV);
  PrecoderMatrix out;
  out.owner = i;
  out.V = basis * own.matrixV().leftCols(d) * std::sqrt(ch.power(i) / d);
  return out;
}

PgmResult pgm_design(const MimoChannelSet& ch, Index i, const MimoBudget& budget, const PgmOptions& opts) {
  if (budget.users() != ch.users()) throw DimensionMismatch("budget and channel sizes differ");
  const ConstraintSet cs = constraints_for(ch, i, budget);
  auto project = [&](const Mat& Y) {
    return pull_inside(dykstra(Y, cs, opts.dykstra_cycles, opts.dykstra_tol), cs);
  };

  Mat V;
  try {
    V = zf_precoder(ch, i).V;
  } catch (const InfeasibleZF&) {
    V = project(whitened_mf(ch, i));
  }

  PgmResult res;
  res.precoder.owner = i;
  double phi = mimo_rate_lower_bound(ch, i, V, budget);
  double step = opts.step;
  res.trace.objective.push_back(phi);
  res.trace.feasibility.push_back(violation(V, cs));
  res.trace.step.push_back(0);

  int it = 0;
  for (; it < opts.max_iter; ++it) {
    const Mat G = grad_lower_bound(ch, i, V, budget);
    const Mat Vn = project(V + step * G);
    const double phin = mimo_rate_lower_bound(ch, i, Vn, budget);
    if (opts.halving && phin < phi) {
      step *= 0.5;
      if (step < 1e-14 * opts.step) {
        res.converged = true;
        break;
      }
      continue;
    }
    const double rel = std::abs(phin - phi) / std::max(std::abs(phi), 1e-300);
    V = Vn;
    phi = phin;
    res.trace.objective.push_back(phi);
    res.trace.feasibility.push_back(violation(V, cs));
    res.trace.step.push_back(step);
    if (rel < opts.rel_tol) {
      res.converged = true;
      break;
    }
  }
  res.iterations = it + (res.converged ? 1 : 0);
  res.precoder.V = V;
  return res;
}

}  // namespace rzf
