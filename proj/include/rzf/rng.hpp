#ifndef RZF_RNG_HPP
#define RZF_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "rzf/core.hpp"

namespace rzf {

/// Seed plus per-trial stream offset. Equal specs give bit-identical draws.
struct RngSpec {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;

  RngSpec stream(std::uint64_t id) const { return {seed, id}; }
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Draws are built from raw mt19937_64 words rather than std distributions so
// that streams do not depend on the standard library implementation.
class RandomStream {
 public:
  explicit RandomStream(const RngSpec& spec)
      : engine_(splitmix64(splitmix64(spec.seed) ^ splitmix64(~spec.stream_id))) {}

  /// Uniform on (0, 1].
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
  }

  /// Circular-symmetric complex Gaussian with E|z|^2 = 1.
  std::complex<double> complex_normal() {
    const double radius = std::sqrt(-std::log(uniform()));
    const double angle = 2.0 * std::numbers::pi * uniform();
    return {radius * std::cos(angle), radius * std::sin(angle)};
  }

  template <typename Real>
  CVec<Real> complex_normal_vector(Index n) {
    CVec<Real> out(n);
    for (Index k = 0; k < n; ++k) out(k) = Complex<Real>(complex_normal());
    return out;
  }

  template <typename Real>
  CMat<Real> complex_normal_matrix(Index rows, Index cols) {
    CMat<Real> out(rows, cols);
    for (Index r = 0; r < rows; ++r)
      for (Index c = 0; c < cols; ++c) out(r, c) = Complex<Real>(complex_normal());
    return out;
  }

  /// Uniform on the unit sphere of C^n.
  template <typename Real>
  CVec<Real> unit_sphere(Index n) {
    CVec<Real> v = complex_normal_vector<Real>(n);
    return v / v.norm();
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace rzf

#endif  // RZF_RNG_HPP
