#include "valence/rational.hpp"

#include <charconv>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace valence {

namespace {

__extension__ typedef __int128 wide;

Rational from_wide(wide num, wide den) {
    if (den == 0) throw std::domain_error("rational with zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    wide a = num < 0 ? -num : num;
    wide b = den;
    while (b != 0) {
        wide t = a % b;
        a = b;
        b = t;
    }
    if (a > 1) {
        num /= a;
        den /= a;
    }
    constexpr wide lim = std::numeric_limits<std::int64_t>::max();
    if (num > lim || num < -lim || den > lim) throw std::overflow_error("rational overflow");
    return Rational(static_cast<std::int64_t>(num), static_cast<std::int64_t>(den));
}

std::optional<std::int64_t> parse_int(std::string_view s) {
    if (s.empty()) return std::nullopt;
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
    return v;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

}  // namespace

Rational::Rational(std::int64_t num, std::int64_t den) {
    if (den == 0) throw std::domain_error("rational with zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    std::int64_t g = std::gcd(num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
    num_ = num;
    den_ = den;
}

std::optional<Rational> Rational::parse(std::string_view text) {
    text = trim(text);
    if (text.empty()) return std::nullopt;
    if (auto slash = text.find('/'); slash != std::string_view::npos) {
        auto n = parse_int(trim(text.substr(0, slash)));
        auto d = parse_int(trim(text.substr(slash + 1)));
        if (!n || !d || *d == 0) return std::nullopt;
        return Rational(*n, *d);
    }
    auto dot = text.find('.');
    if (dot == std::string_view::npos) {
        auto n = parse_int(text);
        if (!n) return std::nullopt;
        return Rational(*n);
    }
    // Exact decimal: "0.125" -> 125/1000.
    bool negative = text.front() == '-';
    std::string_view whole = text.substr(negative ? 1 : 0, dot - (negative ? 1 : 0));
    std::string_view frac = text.substr(dot + 1);
    if (frac.empty() || frac.size() > 17) return std::nullopt;
    for (char c : frac)
        if (c < '0' || c > '9') return std::nullopt;
    std::int64_t w = 0;
    if (!whole.empty()) {
        auto parsed = parse_int(whole);
        if (!parsed || *parsed < 0) return std::nullopt;
        w = *parsed;
    }
    auto f = parse_int(frac);
    if (!f) return std::nullopt;
    wide scale = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
    wide num = wide(w) * scale + *f;
    try {
        return from_wide(negative ? -num : num, scale);
    } catch (const std::overflow_error&) {
        return std::nullopt;
    }
}

std::string Rational::str() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
}

Rational operator+(const Rational& a, const Rational& b) {
    return from_wide(wide(a.num_) * b.den_ + wide(b.num_) * a.den_, wide(a.den_) * b.den_);
}

Rational operator-(const Rational& a, const Rational& b) {
    return from_wide(wide(a.num_) * b.den_ - wide(b.num_) * a.den_, wide(a.den_) * b.den_);
}

Rational operator*(const Rational& a, const Rational& b) {
    return from_wide(wide(a.num_) * b.num_, wide(a.den_) * b.den_);
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    wide l = wide(a.num_) * b.den_;
    wide r = wide(b.num_) * a.den_;
    return l <=> r;
}

}  // namespace valence
