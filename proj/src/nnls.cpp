#include "rzf/nnls.hpp"

#include <limits>
#include <vector>

namespace rzf {

namespace {

Eigen::VectorXd solve_on(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                         const std::vector<bool>& passive) {
  std::vector<Eigen::Index> cols;
  for (Eigen::Index j = 0; j < A.cols(); ++j)
    if (passive[static_cast<std::size_t>(j)]) cols.push_back(j);
  Eigen::MatrixXd sub(A.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = A.col(cols[k]);
  const Eigen::VectorXd zs = sub.colPivHouseholderQr().solve(b);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(A.cols());
  for (std::size_t k = 0; k < cols.size(); ++k) z(cols[k]) = zs(static_cast<Eigen::Index>(k));
  return z;
}

}  // namespace

NnlsResult nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, int max_iter, double tol) {
  const Eigen::Index n = A.cols();
  if (max_iter <= 0) max_iter = static_cast<int>(3 * n + 10);
  if (tol <= 0) tol = 10 * std::numeric_limits<double>::epsilon() * A.norm() * std::max(1.0, b.norm());

  NnlsResult out;
  out.x = Eigen::VectorXd::Zero(n);
  std::vector<bool> passive(static_cast<std::size_t>(n), false);
  Eigen::VectorXd w = A.transpose() * (b - A * out.x);

  while (out.iterations < max_iter) {
    Eigen::Index pick = -1;
    double best = tol;
    for (Eigen::Index j = 0; j < n; ++j)
      if (!passive[static_cast<std::size_t>(j)] && w(j) > best) {
        best = w(j);
        pick = j;
      }
    if (pick < 0) {
      out.converged = true;
      break;
    }
    passive[static_cast<std::size_t>(pick)] = true;

    while (out.iterations++ < max_iter) {
      Eigen::VectorXd z = solve_on(A, b, passive);
      bool all_positive = true;
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[static_cast<std::size_t>(j)] && z(j) <= 0) all_positive = false;
      if (all_positive) {
        out.x = z;
        break;
      }
      double step = 1.0;
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[static_cast<std::size_t>(j)] && z(j) <= 0)
          step = std::min(step, out.x(j) / (out.x(j) - z(j)));
      out.x += step * (z - out.x);
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[static_cast<std::size_t>(j)] && out.x(j) <= tol) {
          passive[static_cast<std::size_t>(j)] = false;
          out.x(j) = 0;
        }
    }
    w = A.transpose() * (b - A * out.x);
  }
  out.residual = (A * out.x - b).norm();
  return out;
}

}  // namespace rzf
