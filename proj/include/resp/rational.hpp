#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cctype>
#include <optional>
#include <string>
#include <string_view>

namespace resp {

/// Exact rational number. All probabilities and weights use it.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

namespace detail {

inline bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
}

// Boost reads a leading 0 as an octal prefix.
inline BigInt parse_digits(std::string_view s) {
    auto first = s.find_first_not_of('0');
    if (first == std::string_view::npos) return 0;
    return BigInt{std::string(s.substr(first))};
}

inline BigInt pow10(std::size_t k) {
    BigInt r = 1;
    for (std::size_t i = 0; i < k; ++i) r *= 10;
    return r;
}

}  // namespace detail

/// Parses "3", "0.6", "-1.25", "3/5" exactly. Returns nullopt on malformed input.
inline std::optional<Rational> parse_rational(std::string_view text) {
    bool negative = false;
    if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
        negative = text.front() == '-';
        text.remove_prefix(1);
    }
    Rational value;
    if (auto slash = text.find('/'); slash != std::string_view::npos) {
        auto num = text.substr(0, slash);
        auto den = text.substr(slash + 1);
        if (!detail::all_digits(num) || !detail::all_digits(den)) return std::nullopt;
        BigInt d = detail::parse_digits(den);
        if (d == 0) return std::nullopt;
        value = Rational(detail::parse_digits(num), d);
    } else if (auto dot = text.find('.'); dot != std::string_view::npos) {
        auto whole = text.substr(0, dot);
        auto frac = text.substr(dot + 1);
        if (!detail::all_digits(whole) || !detail::all_digits(frac)) return std::nullopt;
        BigInt scaled = detail::parse_digits(std::string(whole) + std::string(frac));
        value = Rational(scaled, detail::pow10(frac.size()));
    } else {
        if (!detail::all_digits(text)) return std::nullopt;
        value = Rational(detail::parse_digits(text));
    }
    return negative ? Rational(-value) : value;
}

/// Exact decimal expansion when the denominator has no prime factors besides
/// 2 and 5, otherwise nullopt.
inline std::optional<std::string> exact_decimal(const Rational& r) {
    BigInt num = boost::multiprecision::numerator(r);
    BigInt den = boost::multiprecision::denominator(r);
    std::size_t twos = 0, fives = 0;
    BigInt rest = den;
    while (rest % 2 == 0) { rest /= 2; ++twos; }
    while (rest % 5 == 0) { rest /= 5; ++fives; }
    if (rest != 1) return std::nullopt;
    std::size_t places = std::max(twos, fives);
    bool negative = num < 0;
    if (negative) num = -num;
    BigInt scaled = num * detail::pow10(places) / den;
    std::string digits = scaled.str();
    std::string out;
    if (places == 0) {
        out = digits;
    } else {
        if (digits.size() <= places) digits.insert(0, places - digits.size() + 1, '0');
        out = digits.substr(0, digits.size() - places) + "." + digits.substr(digits.size() - places);
    }
    return negative ? "-" + out : out;
}

/// Canonical exact text: terminating decimals as decimals ("0.6"), everything
/// else as a reduced fraction ("1/3").
inline std::string to_string(const Rational& r) {
    if (auto dec = exact_decimal(r)) return *dec;
    return boost::multiprecision::numerator(r).str() + "/" + boost::multiprecision::denominator(r).str();
}

/// Reduced fraction text, always "n" or "n/d".
inline std::string to_fraction(const Rational& r) {
    const BigInt& den = boost::multiprecision::denominator(r);
    if (den == 1) return boost::multiprecision::numerator(r).str();
    return boost::multiprecision::numerator(r).str() + "/" + den.str();
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

}  // namespace resp
