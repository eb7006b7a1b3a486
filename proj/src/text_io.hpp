#ifndef RZF_SRC_TEXT_IO_HPP
#define RZF_SRC_TEXT_IO_HPP

#include <charconv>
#include <complex>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "rzf/core.hpp"

namespace rzf::textio {

inline std::string fmt17(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

template <typename Vec>
void write_row(std::ostream& out, std::string_view label, const Vec& values) {
  out << label;
  for (Index k = 0; k < values.size(); ++k) out << ' ' << fmt17(static_cast<double>(values(k)));
  out << '\n';
}

inline void write_pair(std::ostream& out, const std::complex<double>& z) {
  out << fmt17(z.real()) << ' ' << fmt17(z.imag());
}

struct Line {
  int number = 0;
  std::vector<std::string> tokens;
};

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  bool next(Line& line) {
    std::string raw;
    while (std::getline(in_, raw)) {
      ++number_;
      const auto hash = raw.find('#');
      if (hash != std::string::npos) raw.resize(hash);
      std::istringstream ss(raw);
      line.tokens.clear();
      std::string tok;
      while (ss >> tok) line.tokens.push_back(tok);
      if (!line.tokens.empty()) {
        line.number = number_;
        return true;
      }
    }
    return false;
  }

  Line expect(std::string_view what) {
    Line line;
    if (!next(line)) throw ParseError("unexpected end of file, expected " + std::string(what), number_);
    return line;
  }

 private:
  std::istream& in_;
  int number_ = 0;
};

inline double parse_double(const std::string& tok, int line, std::string_view field) {
  double value = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last)
    throw ParseError("field '" + std::string(field) + "': not a number: '" + tok + "'", line);
  return value;
}

inline long parse_int(const std::string& tok, int line, std::string_view field) {
  long value = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw ParseError("field '" + std::string(field) + "': not an integer: '" + tok + "'", line);
  return value;
}

}  // namespace rzf::textio

#endif  // RZF_SRC_TEXT_IO_HPP
