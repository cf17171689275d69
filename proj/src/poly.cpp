#include "fkit/poly.hpp"
#include "fkit/errors.hpp"

#include <cctype>

namespace fkit {

namespace {

class PolyParser {
 public:
  explicit PolyParser(const std::string& s) : s_(s) {}

  struct Term {
    Rational coeff = 1;
    Monomial mono;
  };

  std::vector<Term> parse() {
    std::vector<Term> out;
    skip();
    if (pos_ >= s_.size()) throw ParseError("parse_poly: empty input");
    bool first = true;
    while (pos_ < s_.size()) {
      int sign = 1;
      if (peek() == '+' || peek() == '-') {
        sign = peek() == '-' ? -1 : 1;
        ++pos_;
        skip();
      } else if (!first) {
        fail("expected '+' or '-'");
      }
      first = false;
      Term t = term();
      t.coeff *= sign;
      out.push_back(t);
      skip();
    }
    return out;
  }

  int max_var() const { return max_var_; }

 private:
  Term term() {
    Term t;
    factor(t);
    skip();
    while (peek() == '*') {
      ++pos_;
      skip();
      factor(t);
      skip();
    }
    return t;
  }

  void factor(Term& t) {
    char c = peek();
    if (c == 'x') {
      ++pos_;
      int idx = integer();
      if (idx < 1 || idx > kMaxVars) fail("variable index out of range");
      max_var_ = std::max(max_var_, idx);
      int power = 1;
      skip();
      if (peek() == '^') {
        ++pos_;
        skip();
        power = integer();
      }
      t.mono.e[idx - 1] = static_cast<std::uint8_t>(t.mono.e[idx - 1] + power);
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      std::string num = s_.substr(start, pos_ - start);
      if (peek() == '/') {
        ++pos_;
        std::size_t dstart = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (dstart == pos_) fail("missing denominator");
        num += "/" + s_.substr(dstart, pos_ - dstart);
      }
      Rational q(num);
      if (sgn(q.get_den()) == 0) fail("zero denominator");
      q.canonicalize();
      t.coeff *= q;
    } else {
      fail("unexpected character");
    }
  }

  int integer() {
    std::size_t start = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (start == pos_) fail("expected integer");
    return std::stoi(s_.substr(start, pos_ - start));
  }

  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("parse_poly: " + what + " at position " + std::to_string(pos_) +
                                " in '" + s_ + "'");
  }

  const std::string& s_;
  std::size_t pos_ = 0;
  int max_var_ = 0;
};

}  // namespace

QPoly parse_poly(const std::string& text, int dim) {
  PolyParser parser(text);
  auto terms = parser.parse();
  if (dim == 0) dim = std::max(1, parser.max_var());
  if (parser.max_var() > dim)
    throw ParseError("parse_poly: variable x" + std::to_string(parser.max_var()) +
                                " exceeds dimension " + std::to_string(dim));
  QPoly p(dim);
  for (const auto& t : terms) p.add_term(t.mono, t.coeff);
  return p;
}

}  // namespace fkit
