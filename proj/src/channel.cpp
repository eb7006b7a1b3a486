#include "rzf/channel.hpp"

#include "text_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>

namespace rzf {

MimoChannelSet::MimoChannelSet(Index users, Index rx_antennas, Index tx_antennas,
                               std::vector<Eigen::MatrixXcd> channels, Eigen::VectorXd noise,
                               Eigen::VectorXd power, Eigen::VectorXi streams)
    : users_(users),
      rx_antennas_(rx_antennas),
      tx_antennas_(tx_antennas),
      channels_(std::move(channels)),
      noise_(std::move(noise)),
      power_(std::move(power)),
      streams_(std::move(streams)) {
  if (users_ < 1 || rx_antennas_ < 1 || tx_antennas_ < 1)
    throw ValidationError("MIMO channel needs K, M, N >= 1");
  if (static_cast<Index>(channels_.size()) != users_ * users_)
    throw ValidationError("MIMO channel needs K^2 channel matrices");
  for (const auto& H : channels_)
    if (H.rows() != rx_antennas_ || H.cols() != tx_antennas_)
      throw ValidationError("channel matrix shape differs from M x N");
  if (noise_.size() != users_ || power_.size() != users_ || streams_.size() != users_)
    throw ValidationError("sigma2, P and d must have K entries");
  if ((noise_.array() <= 0.0).any()) throw ValidationError("sigma2 must be positive");
  if ((power_.array() <= 0.0).any()) throw ValidationError("P must be positive");
  const int max_streams = static_cast<int>(std::min(rx_antennas_, tx_antennas_));
  if ((streams_.array() < 1).any() || (streams_.array() > max_streams).any())
    throw ValidationError("stream counts must lie in [1, min(M, N)]");
}

MimoChannelSet sample_mimo(Index users, Index rx_antennas, Index tx_antennas,
                           const Eigen::VectorXd& noise, const Eigen::VectorXd& power,
                           const Eigen::VectorXi& streams, const RngSpec& rng) {
  if (users < 1 || rx_antennas < 1 || tx_antennas < 1)
    throw ValidationError("sample_mimo needs K, M, N >= 1");
  RandomStream stream(rng);
  std::vector<Eigen::MatrixXcd> hs;
  hs.reserve(static_cast<std::size_t>(users * users));
  for (Index k = 0; k < users * users; ++k)
    hs.push_back(stream.complex_normal_matrix<double>(rx_antennas, tx_antennas));
  return {users, rx_antennas, tx_antennas, std::move(hs), noise, power, streams};
}

MimoChannelSet sample_mimo(Index users, Index rx_antennas, Index tx_antennas, double noise,
                           double power, int streams, const RngSpec& rng) {
  return sample_mimo(users, rx_antennas, tx_antennas, Eigen::VectorXd::Constant(users, noise),
                     Eigen::VectorXd::Constant(users, power),
                     Eigen::VectorXi::Constant(users, streams), rng);
}

namespace {

using namespace textio;

Eigen::VectorXd parse_labeled(LineReader& reader, std::string_view label, Index count) {
  Line line = reader.expect(label);
  if (line.tokens[0] != label)
    throw ParseError("expected '" + std::string(label) + "' line, got '" + line.tokens[0] + "'",
                     line.number);
  if (static_cast<Index>(line.tokens.size()) != count + 1)
    throw ParseError("'" + std::string(label) + "' needs " + std::to_string(count) + " values",
                     line.number);
  Eigen::VectorXd out(count);
  for (Index k = 0; k < count; ++k)
    out(k) = parse_double(line.tokens[static_cast<std::size_t>(k + 1)], line.number, label);
  return out;
}

// Reads a `label i j` block with `rows` lines of `cols` re/im pairs.
Eigen::MatrixXcd parse_block(LineReader& reader, std::string_view label, Index users, Index rows,
                             Index cols, Index& rx, Index& tx) {
  Line head = reader.expect(std::string(label) + " block");
  if (head.tokens.size() != 3 || head.tokens[0] != label)
    throw ParseError("expected '" + std::string(label) + " i j' block header", head.number);
  rx = parse_int(head.tokens[1], head.number, "i") - 1;
  tx = parse_int(head.tokens[2], head.number, "j") - 1;
  if (rx < 0 || rx >= users || tx < 0 || tx >= users)
    throw ParseError("block index out of range", head.number);
  Eigen::MatrixXcd block(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    Line line = reader.expect("channel row");
    if (static_cast<Index>(line.tokens.size()) != 2 * cols)
      throw ParseError("channel row needs " + std::to_string(cols) + " re/im pairs, got " +
                           std::to_string(line.tokens.size()) + " values",
                       line.number);
    for (Index c = 0; c < cols; ++c) {
      const auto k = static_cast<std::size_t>(2 * c);
      block(r, c) = {parse_double(line.tokens[k], line.number, "re"),
                     parse_double(line.tokens[k + 1], line.number, "im")};
    }
  }
  return block;
}

}  // namespace

void write_instance(std::ostream& out, const MisoChannelSet& ch) {
  const Index K = ch.users();
  out << "miso " << K << ' ' << ch.antennas() << '\n';
  write_row(out, "sigma2", ch.noise_powers());
  write_row(out, "P", ch.powers());
  for (Index i = 0; i < K; ++i)
    for (Index j = 0; j < K; ++j) {
      out << "h " << i + 1 << ' ' << j + 1 << '\n';
      const auto& h = ch.h(i, j);
      for (Index n = 0; n < h.size(); ++n) {
        write_pair(out, h(n));
        out << '\n';
      }
    }
}

void write_instance(std::ostream& out, const MimoChannelSet& ch) {
  const Index K = ch.users();
  out << "mimo " << K << ' ' << ch.rx_antennas() << ' ' << ch.tx_antennas() << '\n';
  write_row(out, "sigma2", ch.noise_powers());
  write_row(out, "P", ch.powers());
  write_row(out, "d", ch.stream_counts());
  for (Index i = 0; i < K; ++i)
    for (Index j = 0; j < K; ++j) {
      out << "H " << i + 1 << ' ' << j + 1 << '\n';
      const auto& H = ch.H(i, j);
      for (Index r = 0; r < H.rows(); ++r) {
        for (Index c = 0; c < H.cols(); ++c) {
          if (c > 0) out << ' ';
          write_pair(out, H(r, c));
        }
        out << '\n';
      }
    }
}

Instance read_instance(std::istream& in) {
  LineReader reader(in);
  Line head = reader.expect("header");
  const std::string& kind = head.tokens[0];
  const bool mimo = kind == "mimo";
  if (!mimo && kind != "miso")
    throw ParseError("header must start with 'miso' or 'mimo', got '" + kind + "'", head.number);
  if (head.tokens.size() != (mimo ? 4u : 3u))
    throw ParseError(mimo ? "header must be 'mimo K M N'" : "header must be 'miso K N'",
                     head.number);
  const Index K = parse_int(head.tokens[1], head.number, "K");
  const Index M = mimo ? parse_int(head.tokens[2], head.number, "M") : 1;
  const Index N = parse_int(head.tokens.back(), head.number, "N");
  if (K < 1 || M < 1 || N < 1) throw ParseError("dimensions must be positive", head.number);

  Eigen::VectorXd noise = parse_labeled(reader, "sigma2", K);
  Eigen::VectorXd power = parse_labeled(reader, "P", K);
  Eigen::VectorXi streams = Eigen::VectorXi::Ones(K);
  if (mimo) {
    const Eigen::VectorXd d = parse_labeled(reader, "d", K);
    for (Index k = 0; k < K; ++k) {
      if (d(k) != std::floor(d(k))) throw ParseError("stream counts must be integers", head.number);
      streams(k) = static_cast<int>(d(k));
    }
  }

  std::vector<Eigen::MatrixXcd> blocks(static_cast<std::size_t>(K * K));
  std::vector<bool> seen(blocks.size(), false);
  for (Index b = 0; b < K * K; ++b) {
    Index rx = 0;
    Index tx = 0;
    Eigen::MatrixXcd block =
        mimo ? parse_block(reader, "H", K, M, N, rx, tx) : parse_block(reader, "h", K, N, 1, rx, tx);
    const auto slot = static_cast<std::size_t>(rx * K + tx);
    if (seen[slot])
      throw Error("duplicate channel block " + std::to_string(rx + 1) + " " + std::to_string(tx + 1));
    seen[slot] = true;
    blocks[slot] = std::move(block);
  }
  Line extra;
  if (reader.next(extra)) throw ParseError("trailing content after last channel block", extra.number);

  if (mimo) return MimoChannelSet(K, M, N, std::move(blocks), noise, power, streams);
  std::vector<Eigen::VectorXcd> hs;
  hs.reserve(blocks.size());
  for (auto& b : blocks) hs.emplace_back(b.col(0));
  return MisoChannelSet(K, N, std::move(hs), noise, power);
}

void save_instance(const std::filesystem::path& path, const Instance& inst) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  std::visit([&](const auto& ch) { write_instance(out, ch); }, inst);
  if (!out) throw Error("write failed: " + path.string());
}

Instance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return read_instance(in);
}

}  // namespace rzf
