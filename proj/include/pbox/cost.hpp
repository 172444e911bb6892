#pragma once

#include <compare>
#include <iosfwd>
#include <limits>
#include <stdexcept>
#include <string>

namespace pbox {

/// A nonnegative cost that may be the Infinite sentinel.
///
/// Infinite is a tag, not a big number: arithmetic propagates it, comparison
/// orders it above every finite value, and value() refuses to hand it out.
class Cost {
public:
    constexpr Cost() = default;
    constexpr Cost(double v) : value_(v) {}  // NOLINT(google-explicit-constructor)

    static constexpr Cost infinite() {
        Cost c;
        c.infinite_ = true;
        return c;
    }

    constexpr bool is_infinite() const { return infinite_; }
    constexpr bool is_finite() const { return !infinite_; }

    double value() const {
        if (infinite_) throw std::logic_error("value() called on Infinite cost");
        return value_;
    }

    /// Finite value, or +inf as an IEEE double for reporting only.
    double as_double() const {
        return infinite_ ? std::numeric_limits<double>::infinity() : value_;
    }

    friend constexpr Cost operator+(Cost a, Cost b) {
        if (a.infinite_ || b.infinite_) return infinite();
        return Cost(a.value_ + b.value_);
    }
    Cost& operator+=(Cost o) { return *this = *this + o; }

    friend constexpr bool operator==(Cost a, Cost b) {
        if (a.infinite_ || b.infinite_) return a.infinite_ == b.infinite_;
        return a.value_ == b.value_;
    }
    friend constexpr std::partial_ordering operator<=>(Cost a, Cost b) {
        if (a.infinite_ && b.infinite_) return std::partial_ordering::equivalent;
        if (a.infinite_) return std::partial_ordering::greater;
        if (b.infinite_) return std::partial_ordering::less;
        return a.value_ <=> b.value_;
    }

    std::string to_string() const;

private:
    double value_ = 0.0;
    bool infinite_ = false;
};

std::ostream& operator<<(std::ostream& os, Cost c);

}  // namespace pbox
