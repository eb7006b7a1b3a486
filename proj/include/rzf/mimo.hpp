#ifndef RZF_MIMO_HPP
#define RZF_MIMO_HPP

#include <span>
#include <vector>

#include "rzf/channel.hpp"
#include "rzf/miso_beam.hpp"

namespace rzf {

struct PrecoderMatrix {
  Eigen::MatrixXcd V;
  Index owner = 0;
};

/// alpha(j, i) bounds ||H_ji V_i||_F^2 <= alpha(j, i) sigma_j^2.
using MimoBudget = LeakageBudget;

struct PgmTrace {
  std::vector<double> objective;
  std::vector<double> feasibility;
  std::vector<double> step;
};

struct PgmOptions {
  double step = 0.01;
  // false keeps the step fixed for every iteration and accepts any move
  bool halving = true;
  int max_iter = 5000;
  double rel_tol = 1e-8;
  int dykstra_cycles = 100;
  double dykstra_tol = 1e-10;
};

struct PgmResult {
  PrecoderMatrix precoder;
  PgmTrace trace;
  int iterations = 0;
  bool converged = false;
};

/// log2 |I + (sigma_i^2 I + B_i)^{-1} H_ii V_i V_i^H H_ii^H| with B_i the
/// interference covariance of the other precoders.
double mimo_rate(const MimoChannelSet& ch, Index i, std::span<const PrecoderMatrix> precoders);
double mimo_rate(const MimoChannelSet& ch, Index i, const std::vector<PrecoderMatrix>& precoders);

/// log2 |I + H_ii V V^H H_ii^H / (sigma_i^2 (1 + eps_i))|.
double mimo_rate_lower_bound(const MimoChannelSet& ch, Index i, const Eigen::MatrixXcd& V,
                             const MimoBudget& budget);

/// lambda_k(Phi^{-1} A) >= lambda_k(A) / lambda_max(Phi) for every k, both
/// spectra sorted in decreasing order.
bool eigen_ratio_bound_check(const Eigen::MatrixXcd& Phi, const Eigen::MatrixXcd& A, double tol = 1e-10);

/// d phi / d conj(V) of the lower bound. The real gradient with respect to
/// (Re V, Im V) is twice this matrix.
Eigen::MatrixXcd grad_lower_bound(const MimoChannelSet& ch, Index i, const Eigen::MatrixXcd& V,
                                  const MimoBudget& budget);

/// Closest matrix to V0 in Frobenius norm with ||H V||_F^2 <= c.
Eigen::MatrixXcd project_frobenius_ellipsoid(const Eigen::MatrixXcd& V0, const Eigen::MatrixXcd& H, double c);

/// Zero-forcing precoder with equal power on the d_i strongest directions of
/// H_ii inside the null space of the other receivers' channels.
PrecoderMatrix zf_precoder(const MimoChannelSet& ch, Index i);

/// Projected gradient ascent on the lower bound under the leakage and power constraints.
PgmResult pgm_design(const MimoChannelSet& ch, Index i, const MimoBudget& budget, const PgmOptions& opts = {});

}  // namespace rzf

#endif  // RZF_MIMO_HPP
