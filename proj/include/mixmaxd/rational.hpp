#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mixmaxd {

// Exact rational with 64-bit numerator/denominator. Intermediate products go
// through __int128; anything that would not reduce back into 64 bits throws.
// Level sets and weights parsed from decimal text stay exact, so the strict
// inequalities in the level-selection algorithms never depend on float noise.
struct Rat {
    long long num = 0;
    long long den = 1;

    Rat() = default;
    Rat(long long n) : num(n), den(1) {}
    Rat(long long n, long long d) : num(n), den(d) { normalize(); }

    void normalize() {
        if (den == 0) throw std::invalid_argument("rational: zero denominator");
        if (den < 0) { num = -num; den = -den; }
        long long g = std::gcd(std::llabs(num), den);
        if (g > 1) { num /= g; den /= g; }
        if (num == 0) den = 1;
    }

    double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
};

namespace detail {
inline long long narrow128(__int128 v, const char* what) {
    if (v > static_cast<__int128>(INT64_MAX) || v < static_cast<__int128>(INT64_MIN))
        throw std::overflow_error(std::string("rational overflow in ") + what);
    return static_cast<long long>(v);
}

inline Rat make_reduced(__int128 n, __int128 d, const char* what) {
    if (d == 0) throw std::invalid_argument("rational: zero denominator");
    if (d < 0) { n = -n; d = -d; }
    __int128 a = n < 0 ? -n : n, b = d;
    while (b) { __int128 t = a % b; a = b; b = t; }
    if (a > 1) { n /= a; d /= a; }
    Rat r;
    r.num = narrow128(n, what);
    r.den = narrow128(d, what);
    if (r.num == 0) r.den = 1;
    return r;
}
} // namespace detail

inline Rat operator+(const Rat& a, const Rat& b) {
    return detail::make_reduced(static_cast<__int128>(a.num) * b.den + static_cast<__int128>(b.num) * a.den,
                                static_cast<__int128>(a.den) * b.den, "+");
}
inline Rat operator-(const Rat& a, const Rat& b) {
    return detail::make_reduced(static_cast<__int128>(a.num) * b.den - static_cast<__int128>(b.num) * a.den,
                                static_cast<__int128>(a.den) * b.den, "-");
}
inline Rat operator*(const Rat& a, const Rat& b) {
    return detail::make_reduced(static_cast<__int128>(a.num) * b.num,
                                static_cast<__int128>(a.den) * b.den, "*");
}
inline Rat operator/(const Rat& a, const Rat& b) {
    if (b.num == 0) throw std::invalid_argument("rational: division by zero");
    return detail::make_reduced(static_cast<__int128>(a.num) * b.den,
                                static_cast<__int128>(a.den) * b.num, "/");
}
inline Rat operator-(const Rat& a) { Rat r(a); r.num = -r.num; return r; }

inline bool operator==(const Rat& a, const Rat& b) { return a.num == b.num && a.den == b.den; }
inline bool operator!=(const Rat& a, const Rat& b) { return !(a == b); }
inline bool operator<(const Rat& a, const Rat& b) {
    return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
}
inline bool operator>(const Rat& a, const Rat& b) { return b < a; }
inline bool operator<=(const Rat& a, const Rat& b) { return !(b < a); }
inline bool operator>=(const Rat& a, const Rat& b) { return !(a < b); }

// Accepts "123", "-0.5", ".25", "12.", and exact fraction text "3/25".
inline Rat rat_parse(std::string_view text) {
    if (text.empty()) throw std::invalid_argument("rational: empty text");
    auto slash = text.find('/');
    if (slash != std::string_view::npos) {
        Rat n = rat_parse(text.substr(0, slash));
        Rat d = rat_parse(text.substr(slash + 1));
        return n / d;
    }
    size_t i = 0;
    bool neg = false;
    if (text[i] == '+' || text[i] == '-') { neg = text[i] == '-'; ++i; }
    __int128 mant = 0;
    int frac_digits = 0;
    bool seen_dot = false, seen_digit = false;
    for (; i < text.size(); ++i) {
        char c = text[i];
        if (c == '.') {
            if (seen_dot) throw std::invalid_argument("rational: malformed number");
            seen_dot = true;
        } else if (c >= '0' && c <= '9') {
            seen_digit = true;
            if (frac_digits >= 37 || mant > ((static_cast<__int128>(1) << 120) / 10))
                throw std::overflow_error("rational: too many digits");
            mant = mant * 10 + (c - '0');
            if (seen_dot) ++frac_digits;
        } else {
            throw std::invalid_argument("rational: malformed number '" + std::string(text) + "'");
        }
    }
    if (!seen_digit) throw std::invalid_argument("rational: malformed number '" + std::string(text) + "'");
    __int128 den = 1;
    for (int k = 0; k < frac_digits; ++k) den *= 10;
    return detail::make_reduced(neg ? -mant : mant, den, "parse");
}

// "0.15" when the denominator is 2^a*5^b (terminating decimal), else "3/7".
inline std::string rat_to_string(const Rat& r) {
    long long d = r.den;
    int twos = 0, fives = 0;
    while (d % 2 == 0) { d /= 2; ++twos; }
    while (d % 5 == 0) { d /= 5; ++fives; }
    if (d != 1) return std::to_string(r.num) + "/" + std::to_string(r.den);
    if (r.den == 1) return std::to_string(r.num);
    int digits = twos > fives ? twos : fives;
    __int128 scaled = static_cast<__int128>(r.num < 0 ? -r.num : r.num);
    for (int k = 0; k < digits; ++k) scaled *= 10;
    scaled /= r.den;
    std::string all;
    while (scaled) { all.push_back(char('0' + int(scaled % 10))); scaled /= 10; }
    while (static_cast<int>(all.size()) < digits + 1) all.push_back('0');
    std::reverse(all.begin(), all.end());
    std::string out = (r.num < 0 ? "-" : "") + all.substr(0, all.size() - digits) + "." + all.substr(all.size() - digits);
    return out;
}

} // namespace mixmaxd
