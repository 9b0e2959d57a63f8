#include <doctest.h>

#include <cmath>
#include <random>

#include "relu_forge/primitives.hpp"
#include "test_util.hpp"

using namespace relu_forge;

namespace {

double sup_1d(const Network& net, int n, double (*f)(double)) {
    double m = 0;
    for (int i = 0; i <= n; ++i) {
        double x = double(i) / n;
        m = std::max(m, std::abs(evaluate1(net, {x}) - f(x)));
    }
    return m;
}

double product_grid_error(const Network& net, double a, double b, int n) {
    double m = 0;
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j) {
            double x = a + (b - a) * i / n, y = a + (b - a) * j / n;
            m = std::max(m, std::abs(evaluate1(net, {x, y}) - x * y));
        }
    return m;
}

double sq(double x) { return x * x; }

} // namespace

TEST_CASE("sawtooth values") {
    auto t1 = sawtooth<double>(1);
    CHECK(evaluate1(t1, {0.5}) == 1.0);
    CHECK(evaluate1(t1, {0.0}) == 0.0);
    CHECK(evaluate1(t1, {1.0}) == 0.0);
    auto t2 = sawtooth<double>(2);
    CHECK(evaluate1(t2, {0.25}) == 1.0);
    CHECK(evaluate1(t2, {0.75}) == 1.0);
    CHECK(evaluate1(t2, {0.5}) == 0.0);
    CHECK(size_report(sawtooth<double>(3)).width == 8);
}

TEST_CASE("sawtooth semigroup T_{m+n} = T_m o T_n") {
    for (unsigned m = 1; m <= 3; ++m)
        for (unsigned n = 1; n <= 3; ++n) {
            auto lhs = sawtooth<double>(m + n);
            auto rhs = compose(sawtooth<double>(m), sawtooth<double>(n));
            for (int i = 0; i <= 1000; ++i) {
                double x = i / 1000.0;
                CHECK(std::abs(evaluate1(lhs, {x}) - evaluate1(rhs, {x})) <= 1e-10);
            }
        }
}

TEST_CASE("k from N is unique") {
    for (int N = 1; N <= 2000; ++N) {
        int hits = 0;
        for (int k = 1; k <= 12; ++k) {
            long lo = (k - 1L) * (1L << (k - 1)) + 1, hi = k * (1L << k);
            if (lo <= N && N <= hi) ++hits;
        }
        CHECK(hits == 1);
        CHECK(square_k(N) * (1 << square_k(N)) + 1 <= 3 * N);
    }
    CHECK(square_k(1) == 1);
    CHECK(square_k(2) == 1);
    CHECK(square_k(3) == 2);
    CHECK(square_k(9) == 3);
}

TEST_CASE("square_approx interpolates x^2 at dyadic points") {
    for (int N = 1; N <= 3; ++N)
        for (int L = 1; L <= 3; ++L) {
            auto net = square_approx<double>({N, L});
            int s = L * square_k(N);
            int n = 1 << s;
            for (int j = 0; j <= n; ++j) {
                double x = double(j) / n;
                CHECK(std::abs(evaluate1(net, {x}) - x * x) <= 1e-12);
            }
            CHECK(evaluate1(net, {0.0}) == 0.0);
            CHECK(evaluate1(net, {1.0}) == doctest::Approx(1.0).epsilon(1e-15));
        }
}

TEST_CASE("square_approx one-sided error and sizes") {
    for (int N = 1; N <= 3; ++N)
        for (int L = 1; L <= 3; ++L) {
            auto net = square_approx<double>({N, L});
            auto rep = size_report(net);
            CHECK(rep.width <= static_cast<std::size_t>(3 * N));
            CHECK(rep.depth <= static_cast<std::size_t>(L));
            double cap = std::pow(4.0, -(L * square_k(N) + 1));
            double worst = 0;
            for (int i = 0; i <= 20000; ++i) {
                double x = i / 20000.0;
                double e = evaluate1(net, {x}) - x * x;
                CHECK(e >= -1e-15);
                worst = std::max(worst, e);
            }
            CHECK(worst <= cap + 1e-15);
            CHECK(worst <= std::pow(N, -L));
        }
}

TEST_CASE("square_approx N=2 L=1 has maximal error 1/16 at quarter points") {
    auto net = square_approx<double>({2, 1});
    CHECK(evaluate1(net, {0.25}) - 0.0625 == doctest::Approx(1.0 / 16));
    CHECK(evaluate1(net, {0.75}) - 0.5625 == doctest::Approx(1.0 / 16));
    CHECK(std::abs(sup_1d(net, 100000, sq) - 1.0 / 16) <= 1e-9);
}

TEST_CASE("square_approx in double-double is dyadic exact") {
    auto net = square_approx<DoubleDouble>({3, 4});
    for (int j = 0; j <= 256; ++j) {
        DoubleDouble x = DoubleDouble(j) / DoubleDouble(256);
        DoubleDouble e = evaluate1(net, {x}) - x * x;
        CHECK(std::abs(static_cast<double>(e)) <= 1e-30);
    }
}

TEST_CASE("product_unit corner values and error") {
    auto p = product_unit<double>({2, 2});
    CHECK(evaluate1(p, {0.0, 0.0}) == 0.0);
    CHECK(evaluate1(p, {1.0, 1.0}) == doctest::Approx(1.0).epsilon(1e-15));
    double e = product_grid_error(p, 0, 1, 400);
    CHECK(e <= 1.5);
    CHECK(e <= 6 * std::pow(4.0, -(2 * 1 + 1)));
    for (int N = 1; N <= 3; ++N)
        for (int L = 1; L <= 3; ++L) {
            auto rep = size_report(product_unit<double>({N, L}));
            CHECK(rep.width <= static_cast<std::size_t>(9 * N));
            CHECK(rep.depth <= static_cast<std::size_t>(L));
        }
}

TEST_CASE("product_interval on [0,1] reduces to product_unit") {
    auto pi = product_interval<double>(0.0, 1.0, {2, 2});
    auto pu = product_unit<double>({2, 2});
    std::mt19937 rng(3);
    for (int i = 0; i < 1000; ++i) {
        auto x = testutil::random_point(rng, 2, 0, 1);
        CHECK(std::abs(evaluate<double>(pi, x)[0] - evaluate<double>(pu, x)[0]) <= 1e-14);
    }
}

TEST_CASE("product_interval error bound and sizes") {
    for (int N = 1; N <= 2; ++N)
        for (int L = 1; L <= 2; ++L) {
            auto p = product_interval<double>(-3.0, 3.0, {N, L});
            double bound = 6 * 36 * std::pow(N, -L);
            CHECK(product_grid_error(p, -3, 3, 200) <= bound);
            CHECK(std::abs(evaluate1(p, {-3.0, -3.0}) - 9.0) <= bound);
            auto rep = size_report(p);
            CHECK(rep.width <= static_cast<std::size_t>(9 * N + 1));
            CHECK(rep.depth <= static_cast<std::size_t>(L));
        }
    CHECK_THROWS_AS(product_interval<double>(1.0, 1.0, {1, 1}), std::invalid_argument);
}

TEST_CASE("product_multi base case, corners and sizes") {
    auto m2 = product_multi<double>(2, {1, 1});
    auto base = product_interval<double>(-0.1, 1.1, {2, 14});
    std::mt19937 rng(5);
    for (int i = 0; i < 200; ++i) {
        auto x = testutil::random_point(rng, 2, 0, 1);
        CHECK(std::abs(evaluate<double>(m2, x)[0] - evaluate<double>(base, x)[0]) <= 1e-14);
    }
    for (unsigned k = 2; k <= 4; ++k) {
        SizeBudget b{1, 1};
        auto net = product_multi<double>(k, b);
        double bound = 9.0 * (k - 1) * std::pow(2.0, -7.0 * k);
        std::vector<double> ones(k, 1.0), zeros(k, 0.0);
        CHECK(std::abs(evaluate<double>(net, ones)[0] - 1.0) <= bound);
        CHECK(std::abs(evaluate<double>(net, zeros)[0]) <= bound);
        auto rep = size_report(net);
        CHECK(rep.width <= 9 * 2 + k - 1);
        CHECK(rep.depth <= 7 * k * (k - 1));
    }
    CHECK_THROWS_AS(product_multi<double>(1, {1, 1}), std::invalid_argument);
}

TEST_CASE("monomial special cases and bound") {
    auto lin = monomial<double>(MultiIndex{1, 0, 0}, 3, {1, 1});
    CHECK(lin.depth() == 0);
    CHECK(evaluate1(lin, {0.3, 0.2, 0.9}) == 0.3);
    auto one = monomial<double>(MultiIndex{0, 0}, 2, {1, 1});
    CHECK(evaluate1(one, {0.3, 0.2}) == 1.0);

    auto m = monomial<double>(MultiIndex{2}, 2, {1, 1});
    double bound = 9 * 2 * std::pow(2.0, -14);
    CHECK(sup_1d(m, 10000, sq) <= bound);
    auto rep = size_report(m);
    CHECK(rep.width <= 9 * 2 + 1);
    CHECK(rep.depth <= 7 * 4);

    CHECK_THROWS_AS(monomial<double>(MultiIndex{2, 1}, 2, {1, 1}), std::invalid_argument);
}

TEST_CASE("polynomial combinations") {
    auto c = polynomial<double>({{2.5, MultiIndex{0, 0}}}, 2, {1, 1});
    CHECK(c.depth() == 0);
    CHECK(evaluate1(c, {0.1, 0.9}) == 2.5);

    SizeBudget b{1, 1};
    auto p = polynomial<double>({{1.0, MultiIndex{2}}, {-1.0, MultiIndex{1}}}, 2, b);
    double per_term = 9 * 2 * std::pow(2.0, -14);
    CHECK(std::abs(evaluate1(p, {0.0})) <= 2 * per_term);
    CHECK(std::abs(evaluate1(p, {1.0})) <= 2 * per_term);

    auto ma = monomial<double>(MultiIndex{2, 0}, 2, b);
    auto mb = monomial<double>(MultiIndex{1, 1}, 2, b);
    auto sum = polynomial<double>({{1.0, MultiIndex{2, 0}}, {1.0, MultiIndex{1, 1}}}, 2, b);
    double ea = 0, eb = 0, es = 0;
    for (int i = 0; i <= 100; ++i)
        for (int j = 0; j <= 100; ++j) {
            double x = i / 100.0, y = j / 100.0;
            ea = std::max(ea, std::abs(evaluate1(ma, {x, y}) - x * x));
            eb = std::max(eb, std::abs(evaluate1(mb, {x, y}) - x * y));
            es = std::max(es, std::abs(evaluate1(sum, {x, y}) - x * x - x * y));
        }
    CHECK(es <= ea + eb + 1e-15);

    CHECK_THROWS_AS(polynomial<double>({}, 2, b), std::invalid_argument);
}

TEST_CASE("multi-index enumeration is lexicographic") {
    auto all = MultiIndex::up_to_order(2, 1);
    REQUIRE(all.size() == 3);
    CHECK(all[0] == MultiIndex{0, 0});
    CHECK(all[1] == MultiIndex{0, 1});
    CHECK(all[2] == MultiIndex{1, 0});
    CHECK(MultiIndex::up_to_order(3, 3).size() == 20);
    CHECK(MultiIndex{2, 1, 3}.factorial() == 12);
    CHECK(MultiIndex{2, 1, 3}.order() == 6);
}
