#ifndef RZF_CORE_HPP
#define RZF_CORE_HPP

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace rzf {

using Index = Eigen::Index;

template <typename Real>
using Complex = std::complex<Real>;

template <typename Real>
using CVec = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;

template <typename Real>
using CMat = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Real>
using RVec = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

template <typename Real>
using RMat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;

/// Per-user rates in bits per channel use.
template <typename Real>
using RatePoint = RVec<Real>;

// Error hierarchy. Every solver failure in the library is one of these.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// A vector appended to a span accumulator already lies in the span.
class DegenerateAppend : public Error {
 public:
  using Error::Error;
};

/// Zero own-channel or a projection that vanished numerically.
class DegenerateChannel : public Error {
 public:
  using Error::Error;
};

/// Zero forcing has no nontrivial solution for the given dimensions.
class InfeasibleZF : public Error {
 public:
  using Error::Error;
};

/// The three-user closed form was asked for the wrong constraint ordering.
class OrderingMismatch : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

namespace tol {
inline constexpr double kSpanMembership = 1e-10;
inline constexpr double kFeasibility = 1e-9;
inline constexpr double kUnreachableLeakage = 1e-14;
inline constexpr double kGeneralPosition = 1e-9;
}  // namespace tol

}  // namespace rzf

#endif  // RZF_CORE_HPP
