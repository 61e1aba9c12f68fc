#include "ka/config.hpp"

#include <sstream>
#include <stdexcept>

namespace ka {

std::string configuration_to_text(const Configuration& cfg, const Geometry& geom) {
  if (cfg.size() != geom.size())
    throw std::invalid_argument("configuration_to_text: size mismatch");
  std::string out;
  out += std::to_string(geom.dim());
  out += ' ';
  out += std::to_string(geom.side());
  out += '\n';
  const int L = geom.side();
  for (int64_t s = 0; s < geom.size(); ++s) {
    out += cfg.occupied(s) ? '1' : '0';
    if ((s + 1) % L == 0) out += '\n';
  }
  return out;
}

ParsedConfiguration configuration_from_text(const std::string& text) {
  std::istringstream in(text);
  ParsedConfiguration r;
  if (!(in >> r.d >> r.L)) throw std::invalid_argument("configuration text: bad header");
  if (r.d < 1 || r.d > kMaxDim || r.L < 1)
    throw std::invalid_argument("configuration text: header out of range");
  int64_t n = 1;
  for (int i = 0; i < r.d; ++i) n *= r.L;
  r.cfg = Configuration(n);
  std::string line;
  std::getline(in, line);  // rest of header line
  int64_t s = 0;
  while (s < n && std::getline(in, line)) {
    if (line.empty()) continue;
    if (static_cast<int>(line.size()) != r.L)
      throw std::invalid_argument("configuration text: bad line length");
    for (char c : line) {
      if (c == '1') {
        r.cfg.set(s, true);
      } else if (c != '0') {
        throw std::invalid_argument("configuration text: bad character");
      }
      ++s;
    }
  }
  if (s != n) throw std::invalid_argument("configuration text: truncated");
  return r;
}

}  // namespace ka
