#ifndef RZF_ORACLE_HPP
#define RZF_ORACLE_HPP

#include <vector>

#include "rzf/miso_beam.hpp"

namespace rzf {

struct OracleOptions {
  int max_iter = 20000;
  double objective_tol = 1e-10;
  double feasibility_tol = 1e-10;
  int dykstra_cycles = 500;
  double dykstra_tol = 1e-12;
  // Active-set Newton refinement of the projected-gradient iterate.
  bool polish = true;
};

/// Dual variables for the problem
///   maximize Re(h_ii^H v)  s.t. |h_ji^H v|^2 <= r_ji^2, ||v||^2 <= P,
/// in the convention  -h_ii/2 + mu v + sum_j lambda_j h_ji h_ji^H v + sum_z h_zi eta_z = 0.
/// Constraints with a zero budget are linear (h_zi^H v = 0) and carry the
/// free complex multipliers eta; their lambda entry stays 0.
struct KktCertificate {
  std::vector<double> lambda;
  double mu = 0;
  double nu = 0;
  std::vector<Complex<double>> eta;
  std::vector<Index> zero_budget;
  std::vector<Index> tight;
  double stationarity_residual = 0;
  double slackness_residual = 0;
};

struct OracleSolution {
  BeamVector beam;
  double objective = 0;
  KktCertificate certificate;
  int iterations = 0;
  bool converged = false;
};

/// Closest point to v with |h^H x| <= r.
CVec<double> project_leakage_cylinder(const CVec<double>& v, const CVec<double>& h, double r);

/// Metric projection onto {||x||^2 <= power} intersected with the cylinders
/// |g_k^H x| <= radius_k, by Dykstra's corrected cyclic projections.
CVec<double> project_intersection(const CVec<double>& y, double power, const std::vector<CVec<double>>& g,
                                  const std::vector<double>& radius, int max_cycles, double tol);

OracleSolution exact_rzfcb(const MisoChannelSet& ch, Index i, const LeakageBudget& budget,
                           const OracleOptions& opts = {});

KktCertificate recover_duals(const MisoChannelSet& ch, Index i, const CVec<double>& v,
                             const LeakageBudget& budget, double tight_tol = 1e-7);

}  // namespace rzf

#endif  // RZF_ORACLE_HPP
