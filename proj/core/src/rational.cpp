#include <condwalk/errors.hpp>
#include <condwalk/rational.hpp>

#include <cctype>
#include <string>

namespace condwalk {
namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

mpz_class parse_integer(std::string_view s, std::string_view whole) {
  std::string_view digits = s;
  if (!digits.empty() && (digits.front() == '-' || digits.front() == '+')) digits.remove_prefix(1);
  if (!all_digits(digits)) throw SchemaError("not a rational: '" + std::string(whole) + "'");
  mpz_class z;
  z.set_str(std::string(digits), 10);
  return (!s.empty() && s.front() == '-') ? mpz_class(-z) : z;
}

Rational parse_decimal(std::string_view s) {
  std::string_view mantissa = s;
  long exponent = 0;
  if (auto e = s.find_first_of("eE"); e != std::string_view::npos) {
    mantissa = s.substr(0, e);
    exponent = parse_integer(s.substr(e + 1), s).get_si();
  }
  bool negative = false;
  if (!mantissa.empty() && (mantissa.front() == '-' || mantissa.front() == '+')) {
    negative = mantissa.front() == '-';
    mantissa.remove_prefix(1);
  }
  std::string digits;
  long frac_digits = 0;
  if (auto dot = mantissa.find('.'); dot != std::string_view::npos) {
    auto int_part = mantissa.substr(0, dot);
    auto frac_part = mantissa.substr(dot + 1);
    if ((!int_part.empty() && !all_digits(int_part)) || (!frac_part.empty() && !all_digits(frac_part)) ||
        (int_part.empty() && frac_part.empty())) {
      throw SchemaError("not a rational: '" + std::string(s) + "'");
    }
    digits = std::string(int_part) + std::string(frac_part);
    frac_digits = static_cast<long>(frac_part.size());
  } else {
    if (!all_digits(mantissa)) throw SchemaError("not a rational: '" + std::string(s) + "'");
    digits = std::string(mantissa);
  }
  mpz_class num(digits, 10);
  if (negative) num = -num;
  const long scale = exponent - frac_digits;
  mpz_class pow10;
  mpz_ui_pow_ui(pow10.get_mpz_t(), 10, static_cast<unsigned long>(scale < 0 ? -scale : scale));
  Rational q = scale >= 0 ? Rational(num * pow10) : Rational(num, pow10);
  q.canonicalize();
  return q;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  if (text.empty()) throw SchemaError("empty rational");
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    mpz_class num = parse_integer(text.substr(0, slash), text);
    mpz_class den = parse_integer(text.substr(slash + 1), text);
    if (den == 0) throw SchemaError("zero denominator in '" + std::string(text) + "'");
    Rational q(num, den);
    q.canonicalize();
    return q;
  }
  return parse_decimal(text);
}

std::string to_string(const Rational& q) {
  if (q.get_den() == 1) return q.get_num().get_str();
  return q.get_str();
}

double to_double(const Rational& q) { return q.get_d(); }

Rational lattice_gcd(const std::vector<Rational>& values) {
  mpz_class den_lcm = 1;
  for (const auto& v : values) mpz_lcm(den_lcm.get_mpz_t(), den_lcm.get_mpz_t(), v.get_den_mpz_t());
  mpz_class g = 0;
  for (const auto& v : values) {
    mpz_class scaled = v.get_num() * (den_lcm / v.get_den());
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), scaled.get_mpz_t());
  }
  Rational unit(g, den_lcm);
  unit.canonicalize();
  return unit;
}

long lattice_index(const Rational& q, const Rational& unit) {
  Rational k = q / unit;
  if (k.get_den() != 1) throw NonLatticeInput(to_string(q) + " is not a multiple of " + to_string(unit));
  if (!k.get_num().fits_slong_p()) throw NonLatticeInput("lattice index overflow for " + to_string(q));
  return k.get_num().get_si();
}

}  // namespace condwalk
