#pragma once

#include <cstdint>
#include <numeric>
#include <string>

#include "error.hpp"

namespace faircut {

// Exact rational in canonical form (den > 0, gcd-reduced). Fairness gates
// compare group shares against bounds with integer cross-multiplication, so
// thresholds like sigma must survive parsing without floating-point fuzz.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    Rational() = default;
    Rational(std::int64_t n, std::int64_t d) : num(n), den(d) {
        if (den == 0) fail(Errc::bad_input, "rational with zero denominator");
        if (den < 0) {
            num = -num;
            den = -den;
        }
        std::int64_t g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) {
            num /= g;
            den /= g;
        }
    }

    static Rational of(std::int64_t n) { return Rational(n, 1); }

    // Accepts "p/q", plain integers and decimal literals ("0.2" -> 1/5).
    static Rational parse(const std::string& text) {
        if (text.empty()) fail(Errc::bad_input, "empty rational literal");
        auto slash = text.find('/');
        try {
            if (slash != std::string::npos) {
                std::int64_t p = std::stoll(text.substr(0, slash));
                std::int64_t q = std::stoll(text.substr(slash + 1));
                return Rational(p, q);
            }
            auto dot = text.find('.');
            if (dot == std::string::npos) return Rational(std::stoll(text), 1);
            std::string whole = text.substr(0, dot);
            std::string frac = text.substr(dot + 1);
            if (frac.size() > 9) frac.resize(9);
            bool negative = !whole.empty() && whole[0] == '-';
            std::int64_t w = whole.empty() || whole == "-" ? 0 : std::stoll(whole);
            std::int64_t f = frac.empty() ? 0 : std::stoll(frac);
            std::int64_t scale = 1;
            for (size_t i = 0; i < frac.size(); ++i) scale *= 10;
            std::int64_t n = (negative ? -1 : 1) * ((w < 0 ? -w : w) * scale + f);
            return Rational(n, scale);
        } catch (const std::exception&) {
            fail(Errc::bad_input, "cannot parse rational literal '" + text + "'");
        }
    }

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num == b.num && a.den == b.den;
    }
    friend bool operator<(const Rational& a, const Rational& b) {
        return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
    }
    friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }

    friend Rational operator-(const Rational& a, const Rational& b) {
        return Rational(a.num * b.den - b.num * a.den, a.den * b.den);
    }
    friend Rational operator+(const Rational& a, const Rational& b) {
        return Rational(a.num * b.den + b.num * a.den, a.den * b.den);
    }
    friend Rational operator*(const Rational& a, const Rational& b) {
        Rational x(a.num, b.den);
        Rational y(b.num, a.den);
        return Rational(x.num * y.num, x.den * y.den);
    }

    std::string str() const {
        return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
    }
};

// a/b <= c/d with positive denominators, overflow-safe up to three factors
// per side.
inline bool ratio_le(__int128 a, __int128 b, __int128 c, __int128 d) { return a * d <= c * b; }

}  // namespace faircut
