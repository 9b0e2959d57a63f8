#include <doctest.h>

#include <cmath>
#include <random>

#include "relu_forge/double_double.hpp"

using relu_forge::DoubleDouble;

namespace {

double residual(DoubleDouble a) { return std::abs(a.hi()) + std::abs(a.lo()); }

} // namespace

TEST_CASE("two-term sums keep the rounding error") {
    DoubleDouble one(1.0);
    DoubleDouble tiny(std::ldexp(1.0, -80));
    DoubleDouble s = one + tiny;
    CHECK(s.hi() == 1.0);
    CHECK(s.lo() == std::ldexp(1.0, -80));
    CHECK(((s - one) - tiny) == DoubleDouble(0.0));
}

TEST_CASE("exact products of doubles") {
    double a = 1.0 + std::ldexp(1.0, -30);
    double b = 1.0 - std::ldexp(1.0, -30);
    DoubleDouble p = DoubleDouble(a) * DoubleDouble(b);
    // a*b = 1 - 2^-60 exactly
    CHECK(p.hi() == 1.0);
    CHECK(p.lo() == -std::ldexp(1.0, -60));
}

TEST_CASE("division recovers tenths to double-double accuracy") {
    DoubleDouble tenth = DoubleDouble(1) / DoubleDouble(10);
    CHECK(residual(tenth * DoubleDouble(10) - DoubleDouble(1)) < 1e-31);
    DoubleDouble third = DoubleDouble(1) / DoubleDouble(3);
    CHECK(residual(third * DoubleDouble(3) - DoubleDouble(1)) < 1e-31);
}

TEST_CASE("random arithmetic identities") {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> u(-10, 10);
    for (int i = 0; i < 1000; ++i) {
        DoubleDouble a(u(rng)), b(u(rng)), c(u(rng));
        a = a / DoubleDouble(7.0);
        CHECK(residual((a + b) - a - b) < 1e-29);
        CHECK(residual((a * b) / b - a) < 1e-29 * (1 + std::abs(a.hi())));
        CHECK(residual(a * (b + c) - (a * b + a * c)) < 1e-28);
    }
}

TEST_CASE("ordering and sign helpers") {
    DoubleDouble a = DoubleDouble::from_parts(1.0, 1e-20);
    DoubleDouble b(1.0);
    CHECK(b < a);
    CHECK(a > b);
    CHECK(relu_forge::abs(-a) == a);
    CHECK(static_cast<double>(a) == 1.0);
}
