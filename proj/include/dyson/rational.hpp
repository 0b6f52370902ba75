#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <string>
#include <type_traits>

namespace dyson {

/// Arbitrary-precision rational, always in canonical form (GMP mpq).
using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational,
                                               boost::multiprecision::et_off>;

/// True for fields where equality tests are exact.
template <class F>
inline constexpr bool is_exact_field_v = !std::is_floating_point_v<F>;

inline double to_double(const Rational& x) { return x.convert_to<double>(); }
inline double to_double(double x) { return x; }

/// "p/q" or "p"; zero serializes as "0".
inline std::string to_string(const Rational& x) { return x.str(); }

inline Rational make_rational(long num, long den = 1) { return Rational(num) / Rational(den); }

template <class F>
F ipow(const F& base, std::size_t exponent) {
    F result(1);
    F b = base;
    while (exponent > 0) {
        if (exponent & 1u) result *= b;
        exponent >>= 1u;
        if (exponent > 0) b *= b;
    }
    return result;
}

template <class F>
F abs_value(const F& x) {
    return x < F(0) ? F(-x) : x;
}

}  // namespace dyson
