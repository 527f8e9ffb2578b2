#pragma once

#include <cmath>
#include <limits>
#include <ostream>

namespace lorentz {

// Real number or one of ±∞, with the infinite cases carried as a tag so
// callers can branch on them instead of on float infinities.
template <typename Scalar>
class Extended {
public:
    enum class Kind { Finite, PlusInfinity, MinusInfinity };

    Extended() = default;
    static Extended finite(Scalar v) { return Extended(Kind::Finite, v); }
    static Extended plus_infinity() { return Extended(Kind::PlusInfinity, Scalar(0)); }
    static Extended minus_infinity() { return Extended(Kind::MinusInfinity, Scalar(0)); }

    Kind kind() const { return kind_; }
    bool is_finite() const { return kind_ == Kind::Finite; }
    bool is_plus_infinity() const { return kind_ == Kind::PlusInfinity; }
    bool is_minus_infinity() const { return kind_ == Kind::MinusInfinity; }

    // Finite value; ±∞ map to the float infinities for display only.
    Scalar value() const
    {
        switch (kind_) {
        case Kind::PlusInfinity: return std::numeric_limits<Scalar>::infinity();
        case Kind::MinusInfinity: return -std::numeric_limits<Scalar>::infinity();
        default: return value_;
        }
    }

    friend bool operator==(const Extended& a, const Extended& b)
    {
        return a.kind_ == b.kind_ && (a.kind_ != Kind::Finite || a.value_ == b.value_);
    }

    friend bool operator<(const Extended& a, const Extended& b)
    {
        if (a.kind_ == b.kind_) return a.kind_ == Kind::Finite && a.value_ < b.value_;
        return a.kind_ == Kind::MinusInfinity || b.kind_ == Kind::PlusInfinity;
    }

    friend std::ostream& operator<<(std::ostream& os, const Extended& e)
    {
        if (e.is_plus_infinity()) return os << "+inf";
        if (e.is_minus_infinity()) return os << "-inf";
        return os << e.value_;
    }

private:
    Extended(Kind k, Scalar v) : kind_(k), value_(v) {}
    Kind kind_ = Kind::Finite;
    Scalar value_ = Scalar(0);
};

using ExtReal = Extended<double>;

}  // namespace lorentz
