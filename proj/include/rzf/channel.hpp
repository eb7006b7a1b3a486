#ifndef RZF_CHANNEL_HPP
#define RZF_CHANNEL_HPP

#include <algorithm>
#include <filesystem>
#include <iosfwd>
#include <numeric>
#include <utility>
#include <variant>
#include <vector>

#include "rzf/core.hpp"
#include "rzf/rng.hpp"

namespace rzf {

/// K-pair MISO interference channel. h(rx, tx) is the (conjugated) N-vector
/// from transmitter tx to receiver rx, so the received amplitude is h^H v.
template <typename Real>
class BasicMisoChannelSet {
 public:
  using RealType = Real;

  BasicMisoChannelSet(Index users, Index antennas, std::vector<CVec<Real>> channels,
                      RVec<Real> noise, RVec<Real> power)
      : users_(users),
        antennas_(antennas),
        channels_(std::move(channels)),
        noise_(std::move(noise)),
        power_(std::move(power)) {
    if (users_ < 1 || antennas_ < 1)
      throw ValidationError("MISO channel needs K >= 1 and N >= 1");
    if (static_cast<Index>(channels_.size()) != users_ * users_)
      throw ValidationError("MISO channel needs K^2 channel vectors");
    for (const auto& h : channels_)
      if (h.size() != antennas_) throw ValidationError("channel vector length differs from N");
    if (noise_.size() != users_ || power_.size() != users_)
      throw ValidationError("sigma2 and P must have K entries");
    if ((noise_.array() <= Real(0)).any()) throw ValidationError("sigma2 must be positive");
    if ((power_.array() <= Real(0)).any()) throw ValidationError("P must be positive");
  }

  Index users() const { return users_; }
  Index antennas() const { return antennas_; }

  const CVec<Real>& h(Index rx, Index tx) const { return channels_[rx * users_ + tx]; }
  Real noise(Index i) const { return noise_(i); }
  Real power(Index i) const { return power_(i); }
  const RVec<Real>& noise_powers() const { return noise_; }
  const RVec<Real>& powers() const { return power_; }

  /// Channels leaving transmitter tx, one column per receiver.
  CMat<Real> outgoing(Index tx) const {
    CMat<Real> out(antennas_, users_);
    for (Index rx = 0; rx < users_; ++rx) out.col(rx) = h(rx, tx);
    return out;
  }

  template <typename Other>
  BasicMisoChannelSet<Other> cast() const {
    std::vector<CVec<Other>> hs;
    hs.reserve(channels_.size());
    for (const auto& h : channels_) hs.push_back(h.template cast<Complex<Other>>());
    return {users_, antennas_, std::move(hs), noise_.template cast<Other>(),
            power_.template cast<Other>()};
  }

  BasicMisoChannelSet with_power(const RVec<Real>& power) const {
    return {users_, antennas_, channels_, noise_, power};
  }

 private:
  Index users_;
  Index antennas_;
  std::vector<CVec<Real>> channels_;
  RVec<Real> noise_;
  RVec<Real> power_;
};

using MisoChannelSet = BasicMisoChannelSet<double>;

/// K-pair MIMO interference channel with M receive and N transmit antennas.
class MimoChannelSet {
 public:
  MimoChannelSet(Index users, Index rx_antennas, Index tx_antennas,
                 std::vector<Eigen::MatrixXcd> channels, Eigen::VectorXd noise,
                 Eigen::VectorXd power, Eigen::VectorXi streams);

  Index users() const { return users_; }
  Index rx_antennas() const { return rx_antennas_; }
  Index tx_antennas() const { return tx_antennas_; }

  const Eigen::MatrixXcd& H(Index rx, Index tx) const { return channels_[rx * users_ + tx]; }
  double noise(Index i) const { return noise_(i); }
  double power(Index i) const { return power_(i); }
  int streams(Index i) const { return streams_(i); }
  const Eigen::VectorXd& noise_powers() const { return noise_; }
  const Eigen::VectorXd& powers() const { return power_; }
  const Eigen::VectorXi& stream_counts() const { return streams_; }

  MimoChannelSet with_power(const Eigen::VectorXd& power) const {
    return {users_, rx_antennas_, tx_antennas_, channels_, noise_, power, streams_};
  }

 private:
  Index users_;
  Index rx_antennas_;
  Index tx_antennas_;
  std::vector<Eigen::MatrixXcd> channels_;
  Eigen::VectorXd noise_;
  Eigen::VectorXd power_;
  Eigen::VectorXi streams_;
};

/// i.i.d. CN(0, 1) entries; draw order is rx-major, then tx, then antenna.
template <typename Real = double>
BasicMisoChannelSet<Real> sample_miso(Index users, Index antennas, const RVec<Real>& noise,
                                      const RVec<Real>& power, const RngSpec& rng) {
  if (users < 1 || antennas < 1) throw ValidationError("sample_miso needs K, N >= 1");
  RandomStream stream(rng);
  std::vector<CVec<Real>> hs;
  hs.reserve(static_cast<std::size_t>(users * users));
  for (Index k = 0; k < users * users; ++k) hs.push_back(stream.complex_normal_vector<Real>(antennas));
  return {users, antennas, std::move(hs), noise, power};
}

template <typename Real = double>
BasicMisoChannelSet<Real> sample_miso(Index users, Index antennas, Real noise, Real power,
                                      const RngSpec& rng) {
  return sample_miso<Real>(users, antennas, RVec<Real>::Constant(users, noise),
                           RVec<Real>::Constant(users, power), rng);
}

/// Checks the general-position assumption: for every transmitter i, every
/// min(N, K)-subset of its outgoing channels {h_ji} is linearly independent,
/// judged by the smallest singular value.
template <typename Real>
bool validate_general_position(const BasicMisoChannelSet<Real>& ch,
                               Real tol = Real(tol::kGeneralPosition)) {
  const Index K = ch.users();
  const Index m = std::min(ch.antennas(), K);
  std::vector<int> pick(static_cast<std::size_t>(K), 0);
  std::fill(pick.begin(), pick.begin() + m, 1);
  for (Index tx = 0; tx < K; ++tx) {
    const CMat<Real> all = ch.outgoing(tx);
    std::vector<int> mask = pick;
    do {
      CMat<Real> sub(ch.antennas(), m);
      Index c = 0;
      for (Index rx = 0; rx < K; ++rx)
        if (mask[static_cast<std::size_t>(rx)]) sub.col(c++) = all.col(rx);
      Eigen::JacobiSVD<CMat<Real>> svd(sub);
      if (svd.singularValues()(m - 1) <= tol) return false;
    } while (std::prev_permutation(mask.begin(), mask.end()));
  }
  return true;
}

MimoChannelSet sample_mimo(Index users, Index rx_antennas, Index tx_antennas,
                           const Eigen::VectorXd& noise, const Eigen::VectorXd& power,
                           const Eigen::VectorXi& streams, const RngSpec& rng);

MimoChannelSet sample_mimo(Index users, Index rx_antennas, Index tx_antennas, double noise,
                           double power, int streams, const RngSpec& rng);

using Instance = std::variant<MisoChannelSet, MimoChannelSet>;

// Plain-text instance files, 1-based block indices, 17 significant digits.
void write_instance(std::ostream& out, const MisoChannelSet& ch);
void write_instance(std::ostream& out, const MimoChannelSet& ch);
Instance read_instance(std::istream& in);

void save_instance(const std::filesystem::path& path, const Instance& inst);
Instance load_instance(const std::filesystem::path& path);

}  // namespace rzf

#endif  // RZF_CHANNEL_HPP
