#include "probcirc/rational.hpp"

#include <cctype>

namespace probcirc {

Rat parse_rat(const std::string& text) {
  if (text.empty()) throw Error("empty rational literal");
  std::size_t i = 0;
  bool neg = false;
  if (text[i] == '-' || text[i] == '+') {
    neg = text[i] == '-';
    ++i;
  }
  auto digits = [&](std::string& out) {
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])))
      out.push_back(text[i++]);
  };
  std::string whole;
  digits(whole);
  if (whole.empty()) throw Error("malformed rational literal: " + text);
  Rat value;
  if (i < text.size() && text[i] == '/') {
    ++i;
    std::string den;
    digits(den);
    if (den.empty() || i != text.size())
      throw Error("malformed rational literal: " + text);
    mpz_class d(den, 10);
    if (d == 0) throw Error("rational with zero denominator: " + text);
    value = Rat(mpz_class(whole, 10), d);
  } else if (i < text.size() && text[i] == '.') {
    ++i;
    std::string frac;
    digits(frac);
    if (i != text.size()) throw Error("malformed rational literal: " + text);
    mpz_class scale = 1;
    for (std::size_t k = 0; k < frac.size(); ++k) scale *= 10;
    value = Rat(mpz_class(whole + frac, 10), scale);
  } else if (i == text.size()) {
    value = Rat(mpz_class(whole, 10));
  } else {
    throw Error("malformed rational literal: " + text);
  }
  value.canonicalize();
  if (neg) value = -value;
  return value;
}

std::string rat_str(const Rat& r) {
  if (r.get_den() == 1) return r.get_num().get_str();
  return r.get_num().get_str() + "/" + r.get_den().get_str();
}

}  // namespace probcirc
