#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace bnblab {

// Exact arbitrary-precision rational. GMP keeps values canonical
// (lowest terms, positive denominator), so every arithmetic result is exact.
using Rational = boost::multiprecision::mpq_rational;
using BigInt = boost::multiprecision::mpz_int;

inline BigInt numerator(const Rational& q) {
  return BigInt(boost::multiprecision::numerator(q));
}

inline BigInt denominator(const Rational& q) {
  return BigInt(boost::multiprecision::denominator(q));
}

inline bool is_integer(const Rational& q) {
  return mpz_cmp_ui(mpq_denref(q.backend().data()), 1) == 0;
}

/// Largest integer <= q.
inline BigInt floor_int(const Rational& q) {
  BigInt r;
  mpz_fdiv_q(r.backend().data(), mpq_numref(q.backend().data()),
             mpq_denref(q.backend().data()));
  return r;
}

/// Smallest integer >= q.
inline BigInt ceil_int(const Rational& q) {
  BigInt r;
  mpz_cdiv_q(r.backend().data(), mpq_numref(q.backend().data()),
             mpq_denref(q.backend().data()));
  return r;
}

inline Rational floor_rational(const Rational& q) { return Rational(floor_int(q)); }
inline Rational ceil_rational(const Rational& q) { return Rational(ceil_int(q)); }

/// q - floor(q), in [0, 1).
inline Rational fractional_part(const Rational& q) { return q - floor_rational(q); }

inline double to_double(const Rational& q) {
  return mpq_get_d(q.backend().data());
}

/// Canonical text form: "p" for integers, "p/q" otherwise.
inline std::string to_string(const Rational& q) { return q.str(); }

/// Parses "p", "p/q", or a plain decimal such as "-0.35" or "16.7".
/// Returns nullopt on malformed input.
inline std::optional<Rational> try_parse_rational(std::string_view text) {
  if (text.empty()) return std::nullopt;
  const auto is_digit = [](char c) { return c >= '0' && c <= '9'; };

  std::string_view body = text;
  bool negative = false;
  if (body.front() == '+' || body.front() == '-') {
    negative = body.front() == '-';
    body.remove_prefix(1);
    if (body.empty()) return std::nullopt;
  }

  const auto slash = body.find('/');
  const auto dot = body.find('.');
  if (slash != std::string_view::npos && dot != std::string_view::npos) return std::nullopt;

  if (slash != std::string_view::npos) {
    std::string_view num = body.substr(0, slash);
    std::string_view den = body.substr(slash + 1);
    if (num.empty() || den.empty()) return std::nullopt;
    for (char c : num) if (!is_digit(c)) return std::nullopt;
    for (char c : den) if (!is_digit(c)) return std::nullopt;
    BigInt n{std::string(num)};
    BigInt d{std::string(den)};
    if (d == 0) return std::nullopt;
    Rational q(n, d);
    return negative ? Rational(-q) : q;
  }

  std::string_view intpart = body;
  std::string_view fracpart;
  if (dot != std::string_view::npos) {
    intpart = body.substr(0, dot);
    fracpart = body.substr(dot + 1);
    if (intpart.empty() && fracpart.empty()) return std::nullopt;
  }
  for (char c : intpart) if (!is_digit(c)) return std::nullopt;
  for (char c : fracpart) if (!is_digit(c)) return std::nullopt;

  BigInt n = intpart.empty() ? BigInt(0) : BigInt{std::string(intpart)};
  Rational q(n);
  if (!fracpart.empty()) {
    BigInt f{std::string(fracpart)};
    BigInt scale = 1;
    for (size_t i = 0; i < fracpart.size(); ++i) scale *= 10;
    q += Rational(f, scale);
  }
  return negative ? Rational(-q) : q;
}

inline Rational parse_rational(std::string_view text) {
  auto q = try_parse_rational(text);
  if (!q) throw std::invalid_argument("not a rational: '" + std::string(text) + "'");
  return *q;
}

}  // namespace bnblab
