#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>
#include <vector>

namespace condwalk {

using Rational = mpq_class;

/// Parses "p/q", an integer, or a finite decimal ("-2.25", "1e-3") exactly.
/// Throws SchemaError on malformed input or a zero denominator.
Rational parse_rational(std::string_view text);

/// Canonical "p/q" form, or "p" when the denominator is 1.
std::string to_string(const Rational& q);

double to_double(const Rational& q);

/// Largest positive rational g such that every value is an integer multiple
/// of g. Returns 0 when all values are zero.
Rational lattice_gcd(const std::vector<Rational>& values);

/// Exact integer value of q / unit; q must be a multiple of unit.
long lattice_index(const Rational& q, const Rational& unit);

}  // namespace condwalk
