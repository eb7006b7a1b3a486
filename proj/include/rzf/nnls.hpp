#ifndef RZF_NNLS_HPP
#define RZF_NNLS_HPP

#include <Eigen/Dense>

namespace rzf {

struct NnlsResult {
  Eigen::VectorXd x;
  double residual = 0;
  int iterations = 0;
  bool converged = false;
};

/// min ||A x - b|| subject to x >= 0 (Lawson-Hanson active set).
NnlsResult nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, int max_iter = 0,
                double tol = 0);

}  // namespace rzf

#endif  // RZF_NNLS_HPP
