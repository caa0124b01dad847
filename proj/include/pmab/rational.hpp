#pragma once

#include <compare>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>

namespace pmab {

// Non-negative-denominator rational kept in lowest terms. Frequencies on the
// periodogram grid and candidate harmonics are stored this way so that grid
// merging, interval exclusion and nearest-candidate matching are exact.
class Rational {
public:
    constexpr Rational() = default;

    constexpr Rational(std::int64_t num, std::int64_t den) : num_(num), den_(den) {
        if (den_ == 0) {
            throw std::invalid_argument("Rational: zero denominator");
        }
        if (den_ < 0) {
            num_ = -num_;
            den_ = -den_;
        }
        const std::int64_t g = std::gcd(num_ < 0 ? -num_ : num_, den_);
        if (g > 1) {
            num_ /= g;
            den_ /= g;
        }
    }

    constexpr std::int64_t num() const { return num_; }
    constexpr std::int64_t den() const { return den_; }

    constexpr double value() const { return static_cast<double>(num_) / static_cast<double>(den_); }

    friend constexpr bool operator==(const Rational&, const Rational&) = default;

    friend constexpr std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
        const __int128 lhs = static_cast<__int128>(a.num_) * b.den_;
        const __int128 rhs = static_cast<__int128>(b.num_) * a.den_;
        if (lhs < rhs) return std::strong_ordering::less;
        if (lhs > rhs) return std::strong_ordering::greater;
        return std::strong_ordering::equal;
    }

    std::string str() const { return std::to_string(num_) + "/" + std::to_string(den_); }

    friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

private:
    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

// Compares |a - b| against |c - d| exactly. Negative when the first distance is smaller.
inline int compare_distance(const Rational& a, const Rational& b, const Rational& c, const Rational& d) {
    // |a-b| = |a.n*b.d - b.n*a.d| / (a.d*b.d); cross-multiply the two distances.
    const __int128 num1 = static_cast<__int128>(a.num()) * b.den() - static_cast<__int128>(b.num()) * a.den();
    const __int128 den1 = static_cast<__int128>(a.den()) * b.den();
    const __int128 num2 = static_cast<__int128>(c.num()) * d.den() - static_cast<__int128>(d.num()) * c.den();
    const __int128 den2 = static_cast<__int128>(c.den()) * d.den();
    const __int128 lhs = (num1 < 0 ? -num1 : num1) * den2;
    const __int128 rhs = (num2 < 0 ? -num2 : num2) * den1;
    return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
}

// True when |a - b| < width exactly.
inline bool within_open(const Rational& a, const Rational& b, const Rational& width) {
    const Rational zero{0, 1};
    return compare_distance(a, b, width, zero) < 0;
}

inline std::int64_t lcm_checked(std::int64_t a, std::int64_t b) {
    if (a <= 0 || b <= 0) {
        throw std::invalid_argument("lcm_checked: arguments must be positive");
    }
    const std::int64_t g = std::gcd(a, b);
    const __int128 r = static_cast<__int128>(a / g) * b;
    if (r > INT64_MAX) {
        throw std::overflow_error("lcm_checked: overflow");
    }
    return static_cast<std::int64_t>(r);
}

// Least common multiple of the reduced denominators; 1 for an empty input.
inline std::int64_t lcm_of_denominators(std::span<const Rational> values) {
    std::int64_t result = 1;
    for (const auto& v : values) {
        if (v.num() <= 0 || v > Rational{1, 1}) {
            throw std::invalid_argument("lcm_of_denominators: values must lie in (0, 1]");
        }
        result = lcm_checked(result, v.den());
    }
    return result;
}

}  // namespace pmab
