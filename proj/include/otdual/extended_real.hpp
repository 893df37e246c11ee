#pragma once

#include <cmath>
#include <compare>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace otdual {

/// Thrown for ∞ − ∞ and NaN inputs.
class UndefinedArithmetic : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/**
 * Real line extended with ±∞.
 *
 * Addition saturates (∞ + finite = ∞). Adding opposite infinities has no
 * meaning for convex integrands and throws UndefinedArithmetic.
 */
class ExtReal {
public:
    constexpr ExtReal() = default;

    // Implicit on purpose: closed forms return plain doubles most of the time.
    ExtReal(double v) : v_(v) {
        if (std::isnan(v)) {
            throw UndefinedArithmetic("ExtReal: NaN is not an extended real");
        }
    }

    static ExtReal infinity() { return ExtReal(std::numeric_limits<double>::infinity()); }
    static ExtReal neg_infinity() { return ExtReal(-std::numeric_limits<double>::infinity()); }

    [[nodiscard]] double value() const { return v_; }
    [[nodiscard]] bool is_finite() const { return std::isfinite(v_); }
    [[nodiscard]] bool is_pos_inf() const { return v_ == std::numeric_limits<double>::infinity(); }
    [[nodiscard]] bool is_neg_inf() const { return v_ == -std::numeric_limits<double>::infinity(); }

    /// w·this with the measure-theoretic convention 0·(±∞) = 0. Requires w ≥ 0.
    [[nodiscard]] ExtReal weighted(double w) const {
        if (w < 0.0 || std::isnan(w)) {
            throw UndefinedArithmetic("ExtReal::weighted: weight must be nonnegative");
        }
        if (w == 0.0) return ExtReal(0.0);
        return ExtReal(w * v_);
    }

    friend ExtReal operator+(ExtReal a, ExtReal b) {
        if ((a.is_pos_inf() && b.is_neg_inf()) || (a.is_neg_inf() && b.is_pos_inf())) {
            throw UndefinedArithmetic("ExtReal: inf - inf is undefined");
        }
        return ExtReal(a.v_ + b.v_);
    }
    friend ExtReal operator-(ExtReal a) { return ExtReal(-a.v_); }
    friend ExtReal operator-(ExtReal a, ExtReal b) { return a + (-b); }
    ExtReal& operator+=(ExtReal b) { return *this = *this + b; }

    friend bool operator==(ExtReal a, ExtReal b) { return a.v_ == b.v_; }
    friend std::partial_ordering operator<=>(ExtReal a, ExtReal b) { return a.v_ <=> b.v_; }

    friend std::ostream& operator<<(std::ostream& os, ExtReal a) {
        if (a.is_pos_inf()) return os << "+inf";
        if (a.is_neg_inf()) return os << "-inf";
        return os << a.v_;
    }

private:
    double v_ = 0.0;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace otdual
