#ifndef RZF_TEST_FIXTURES_HPP
#define RZF_TEST_FIXTURES_HPP

#include <initializer_list>
#include <vector>

#include "rzf/channel.hpp"

namespace rzf::test {

inline CVec<double> cvec(std::initializer_list<std::complex<double>> xs) {
  CVec<double> v(static_cast<Index>(xs.size()));
  Index k = 0;
  for (auto x : xs) v(k++) = x;
  return v;
}

// Channels listed rx-major: h(0,0), h(0,1), ..., h(K-1,K-1).
inline MisoChannelSet miso(Index K, std::vector<CVec<double>> hs, double noise = 1.0, double power = 1.0) {
  const Index N = hs.front().size();
  return {K, N, std::move(hs), Eigen::VectorXd::Constant(K, noise), Eigen::VectorXd::Constant(K, power)};
}

// Projector onto the column space of A, from a fresh QR factorization.
inline CMat<double> direct_projector(const CMat<double>& A) {
  const Index n = A.rows();
  if (A.cols() == 0) return CMat<double>::Zero(n, n);
  Eigen::ColPivHouseholderQR<CMat<double>> qr(A);
  const CMat<double> Q = CMat<double>(qr.householderQ()).leftCols(qr.rank());
  return Q * Q.adjoint();
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace rzf::test

#endif
