#include "fkit/algebra.hpp"

namespace fkit {

QChain parse_chain(const std::string& text, int dim) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : text) {
    if (ch == '|') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  parts.push_back(cur);
  std::vector<QPoly> entries;
  int d = dim;
  for (const auto& p : parts) {
    if (p.find_first_not_of(" \t") == std::string::npos) throw ParseError("chain: empty entry");
    entries.push_back(parse_poly(p, dim));
    d = std::max(d, entries.back().dim());
  }
  for (auto& e : entries) e = e.template cast<Rational>() + QPoly(d);
  return QChain(entries);
}

}  // namespace fkit
