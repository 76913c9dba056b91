#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>

namespace fkdisk {

/// Exact non-negative rational, used for wall fractions so that values like
/// 1/512 survive config round-trips without decimal drift.
class Fraction {
public:
    Fraction() : num_(0), den_(1) {}

    Fraction(std::int64_t num, std::int64_t den) : num_(num), den_(den) {
        if (den_ <= 0 || num_ < 0) {
            throw std::invalid_argument("Fraction requires num >= 0 and den > 0");
        }
        normalize();
    }

    static Fraction from_integer(std::int64_t v) { return Fraction(v, 1); }

    /// Accepts "a/b", an integer, or a decimal with up to 15 fractional digits
    /// (decimals are exact rationals of the form k/10^m).
    static Fraction parse(std::string_view text) {
        std::string s(text);
        const auto slash = s.find('/');
        if (slash != std::string::npos) {
            const std::int64_t a = parse_int(s.substr(0, slash));
            const std::int64_t b = parse_int(s.substr(slash + 1));
            return Fraction(a, b);
        }
        const auto dot = s.find('.');
        if (dot == std::string::npos) {
            return Fraction(parse_int(s), 1);
        }
        const std::string whole = s.substr(0, dot);
        const std::string frac = s.substr(dot + 1);
        if (frac.size() > 15) {
            throw std::invalid_argument("decimal fraction too long: " + s);
        }
        std::int64_t den = 1;
        for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
        const std::int64_t w = whole.empty() ? 0 : parse_int(whole);
        const std::int64_t f = frac.empty() ? 0 : parse_int(frac);
        return Fraction(w * den + f, den);
    }

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }
    double value() const { return static_cast<double>(num_) / static_cast<double>(den_); }

    std::string str() const {
        if (den_ == 1) return std::to_string(num_);
        return std::to_string(num_) + "/" + std::to_string(den_);
    }

    friend bool operator==(const Fraction& a, const Fraction& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend bool operator!=(const Fraction& a, const Fraction& b) { return !(a == b); }
    friend bool operator<(const Fraction& a, const Fraction& b) {
        return a.num_ * b.den_ < b.num_ * a.den_;
    }
    friend bool operator<=(const Fraction& a, const Fraction& b) {
        return a.num_ * b.den_ <= b.num_ * a.den_;
    }

private:
    void normalize() {
        const std::int64_t g = std::gcd(num_, den_);
        if (g > 1) {
            num_ /= g;
            den_ /= g;
        }
    }

    static std::int64_t parse_int(const std::string& s) {
        if (s.empty()) throw std::invalid_argument("empty number");
        std::size_t pos = 0;
        const std::int64_t v = std::stoll(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("malformed number: " + s);
        if (v < 0) throw std::invalid_argument("negative number: " + s);
        return v;
    }

    std::int64_t num_;
    std::int64_t den_;
};

}  // namespace fkdisk
