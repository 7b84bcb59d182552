#include "extmle/rational.hpp"

#include <stdexcept>

namespace extmle {

Rat parse_rational(const std::string& text) {
  try {
    return Rat(text);
  } catch (const std::exception&) {
    throw std::runtime_error("malformed rational: '" + text + "'");
  }
}

std::vector<Int> primitive_integer(const std::vector<Rat>& v) {
  Int lcm_den = 1;
  for (const Rat& q : v) lcm_den = lcm(lcm_den, denominator(q));
  std::vector<Int> out(v.size());
  Int g = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = numerator(v[i]) * (lcm_den / denominator(v[i]));
    g = gcd(g, out[i]);
  }
  if (g > 1)
    for (Int& z : out) z /= g;
  return out;
}

void make_primitive(std::vector<Rat>& v) {
  std::vector<Int> z = primitive_integer(v);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = Rat(z[i]);
}

}  // namespace extmle
