#pragma once

#include <cmath>
#include <ostream>

namespace relu_forge {

// Unevaluated sum hi + lo with |lo| <= ulp(hi)/2, roughly 106 significant bits.
// Products use Dekker splitting so no hardware FMA is required.
class DoubleDouble {
public:
    constexpr DoubleDouble() = default;
    constexpr DoubleDouble(double x) : hi_(x) {}
    constexpr DoubleDouble(int x) : hi_(x) {}
    constexpr DoubleDouble(long x) : hi_(static_cast<double>(x)) {}
    constexpr DoubleDouble(unsigned x) : hi_(x) {}
    constexpr DoubleDouble(unsigned long x) : hi_(static_cast<double>(x)) {}

    static constexpr DoubleDouble from_parts(double hi, double lo) {
        DoubleDouble r;
        r.hi_ = hi;
        r.lo_ = lo;
        return r;
    }

    constexpr double hi() const { return hi_; }
    constexpr double lo() const { return lo_; }
    explicit constexpr operator double() const { return hi_ + lo_; }

    friend DoubleDouble operator-(DoubleDouble a) { return from_parts(-a.hi_, -a.lo_); }

    friend DoubleDouble operator+(DoubleDouble a, DoubleDouble b) {
        double s, e, t, f;
        two_sum(a.hi_, b.hi_, s, e);
        two_sum(a.lo_, b.lo_, t, f);
        e += t;
        quick_two_sum(s, e, s, e);
        e += f;
        quick_two_sum(s, e, s, e);
        return from_parts(s, e);
    }
    friend DoubleDouble operator-(DoubleDouble a, DoubleDouble b) { return a + (-b); }

    friend DoubleDouble operator*(DoubleDouble a, DoubleDouble b) {
        double p, e;
        two_prod(a.hi_, b.hi_, p, e);
        e += a.hi_ * b.lo_ + a.lo_ * b.hi_;
        quick_two_sum(p, e, p, e);
        return from_parts(p, e);
    }

    friend DoubleDouble operator/(DoubleDouble a, DoubleDouble b) {
        double q1 = a.hi_ / b.hi_;
        DoubleDouble r = a - b * DoubleDouble(q1);
        double q2 = r.hi_ / b.hi_;
        r = r - b * DoubleDouble(q2);
        double q3 = r.hi_ / b.hi_;
        double s, e;
        quick_two_sum(q1, q2, s, e);
        return DoubleDouble::from_parts(s, e) + DoubleDouble(q3);
    }

    DoubleDouble& operator+=(DoubleDouble o) { return *this = *this + o; }
    DoubleDouble& operator-=(DoubleDouble o) { return *this = *this - o; }
    DoubleDouble& operator*=(DoubleDouble o) { return *this = *this * o; }
    DoubleDouble& operator/=(DoubleDouble o) { return *this = *this / o; }

    friend bool operator==(DoubleDouble a, DoubleDouble b) { return a.hi_ == b.hi_ && a.lo_ == b.lo_; }
    friend bool operator<(DoubleDouble a, DoubleDouble b) {
        return a.hi_ < b.hi_ || (a.hi_ == b.hi_ && a.lo_ < b.lo_);
    }
    friend bool operator>(DoubleDouble a, DoubleDouble b) { return b < a; }
    friend bool operator<=(DoubleDouble a, DoubleDouble b) { return !(b < a); }
    friend bool operator>=(DoubleDouble a, DoubleDouble b) { return !(a < b); }

    friend std::ostream& operator<<(std::ostream& os, DoubleDouble a) {
        return os << a.hi_ << (a.lo_ < 0 ? " - " : " + ") << std::abs(a.lo_);
    }

private:
    static void two_sum(double a, double b, double& s, double& e) {
        s = a + b;
        double bb = s - a;
        e = (a - (s - bb)) + (b - bb);
    }
    static void quick_two_sum(double a, double b, double& s, double& e) {
        s = a + b;
        e = b - (s - a);
    }
    static void split(double a, double& hi, double& lo) {
        constexpr double splitter = 134217729.0; // 2^27 + 1
        double t = splitter * a;
        hi = t - (t - a);
        lo = a - hi;
    }
    static void two_prod(double a, double b, double& p, double& e) {
        p = a * b;
        double ah, al, bh, bl;
        split(a, ah, al);
        split(b, bh, bl);
        e = ((ah * bh - p) + ah * bl + al * bh) + al * bl;
    }

    double hi_ = 0.0;
    double lo_ = 0.0;
};

inline DoubleDouble abs(DoubleDouble a) { return a < DoubleDouble(0.0) ? -a : a; }

// Scalar helpers shared by the templated builders.
template <class Real>
Real abs_value(Real x) {
    return x < Real(0) ? -x : x;
}

template <class Real>
double to_double(Real x) {
    return static_cast<double>(x);
}

} // namespace relu_forge
