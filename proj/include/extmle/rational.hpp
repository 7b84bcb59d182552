#pragma once

#include <string>
#include <vector>

#include <boost/multiprecision/gmp.hpp>

namespace extmle {

using Rat = boost::multiprecision::mpq_rational;
using Int = boost::multiprecision::mpz_int;

inline std::string to_string(const Rat& q) { return q.str(); }

// Parses "p", "-p" or "p/q". Throws std::runtime_error on malformed input.
Rat parse_rational(const std::string& text);

// Scales a rational vector to a primitive integer vector (coprime entries,
// same direction). The zero vector maps to itself.
std::vector<Int> primitive_integer(const std::vector<Rat>& v);

// In-place variant that keeps the vector rational but with integer entries.
void make_primitive(std::vector<Rat>& v);

}  // namespace extmle
