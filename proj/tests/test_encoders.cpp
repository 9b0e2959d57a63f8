#include <doctest.h>

#include <cmath>
#include <random>

#include "relu_forge/encoders.hpp"
#include "test_util.hpp"

using namespace relu_forge;

namespace {

double at(const Network& net, double x) { return evaluate1(net, {x}); }

SampleSet random_samples(std::mt19937& rng, int N1, int N2) {
    std::uniform_real_distribution<double> gap(0.05, 1.0), val(0.0, 5.0);
    SampleSet s;
    double x = -1.0;
    for (int i = 0; i <= N1 * (N2 + 1); ++i) {
        x += gap(rng);
        s.points.push_back({x, val(rng)});
    }
    return s;
}

BitTable random_table(std::mt19937& rng, std::size_t rows, std::size_t cols) {
    BitTable t(rows, cols);
    for (auto& b : t.bits) b = static_cast<std::uint8_t>(rng() & 1u);
    return t;
}

} // namespace

TEST_CASE("fit_samples three-point example") {
    SampleSet s{{{0, 0}, {1, 2}, {2, 1}}};
    auto net = fit_samples(s, 1, 1);
    CHECK(at(net, 0) == doctest::Approx(0).epsilon(1e-12));
    CHECK(at(net, 1) == doctest::Approx(2).epsilon(1e-12));
    CHECK(at(net, 2) == doctest::Approx(1).epsilon(1e-12));
    CHECK(at(net, 0.5) == doctest::Approx(1).epsilon(1e-12));
    CHECK(size_report(net).widthvec == std::vector<std::size_t>{2, 3});
}

TEST_CASE("fit_samples constant data gives constant pieces") {
    SampleSet s;
    for (int i = 0; i <= 2 * 3; ++i) s.points.push_back({double(i), 0.7});
    auto net = fit_samples(s, 2, 2);
    for (double x : {0.0, 0.5, 1.0, 1.7, 2.0, 3.0, 3.2, 5.0, 6.0}) CHECK(at(net, x) == doctest::Approx(0.7));
}

TEST_CASE("fit_samples interpolates and is linear on mandated intervals") {
    std::mt19937 rng(17);
    for (int trial = 0; trial < 40; ++trial) {
        int N1 = 1 + int(rng() % 4), N2 = int(rng() % 5);
        auto s = random_samples(rng, N1, N2);
        auto net = fit_samples(s, N1, N2);
        CHECK(size_report(net).widthvec ==
              std::vector<std::size_t>{std::size_t(2 * N1), std::size_t(2 * N2 + 1)});
        const auto& p = s.points;
        for (const auto& pt : p) CHECK(std::abs(at(net, pt.x) - pt.y) <= 1e-10 * (1 + std::abs(pt.y)));
        for (std::size_t i = 1; i < p.size(); ++i) {
            if (i % std::size_t(N2 + 1) == 0) continue;
            double mid = (p[i - 1].x + p[i].x) / 2;
            CHECK(std::abs(at(net, mid) - (at(net, p[i - 1].x) + at(net, p[i].x)) / 2) <= 1e-9);
        }
    }
}

TEST_CASE("fit_samples rejects bad sample sets") {
    CHECK_THROWS_AS(fit_samples(SampleSet{{{0, 0}, {0, 1}, {2, 1}}}, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(fit_samples(SampleSet{{{0, 0}, {1, -1}, {2, 1}}}, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(fit_samples(SampleSet{{{0, 0}, {1, 1}}}, 1, 1), std::invalid_argument);
}

TEST_CASE("width_to_depth preserves the function") {
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> u(0.0, 1.0), g(-1.0, 1.0);
    for (bool nonneg : {true, false}) {
        // widthvec [2, 6]: N = 2, L = 3
        std::vector<Entry<double>> w1, w2, w3;
        std::vector<double> b1, b2;
        for (std::size_t r = 0; r < 2; ++r) {
            w1.push_back({r, 0, g(rng)});
            b1.push_back(g(rng));
        }
        for (std::size_t r = 0; r < 6; ++r) {
            for (std::size_t c = 0; c < 2; ++c) w2.push_back({r, c, nonneg ? u(rng) : g(rng)});
            b2.push_back(g(rng));
            w3.push_back({0, r, nonneg ? u(rng) : g(rng)});
        }
        std::vector<AffineLayer<double>> layers;
        layers.push_back(AffineLayer<double>::from_entries(1, 2, w1, b1, Activation::relu));
        layers.push_back(AffineLayer<double>::from_entries(2, 6, w2, b2, Activation::relu));
        layers.push_back(AffineLayer<double>::from_entries(6, 1, w3, {0.3}, Activation::identity));
        Network wide(1, std::move(layers));
        auto deep = width_to_depth(wide);
        auto rep = size_report(deep);
        CHECK(rep.width <= 6);
        CHECK(rep.depth <= 4);
        for (int i = 0; i < 1000; ++i) {
            double x = 10 * g(rng);
            CHECK(std::abs(at(deep, x) - at(wide, x)) <= 1e-9 * (1 + std::abs(at(wide, x))));
        }
    }

    SampleSet s{{{0, 0}, {1, 2}, {2, 1}}};
    auto narrow = fit_samples(s, 1, 1);
    auto same = width_to_depth(fit_samples(SampleSet{{{0, 0}, {1, 2}, {2, 1}, {3, 0}, {4, 5}}}, 2, 1));
    CHECK(same.depth() == 2);
    CHECK(width_to_depth(narrow).depth() == 3);
    CHECK_THROWS_AS(width_to_depth(identity<double>(1)), std::invalid_argument);
}

TEST_CASE("step_cells and integer roots") {
    CHECK(step_cells(1, {2, 1}) == 4);
    CHECK(step_cells(1, {2, 2}) == 16);
    CHECK(step_cells(2, {10, 4}) == 36);
    CHECK(step_cells(2, {2, 2}) == 2);
    CHECK(step_cells(3, {8, 1}) == 4);
    CHECK(int_root(27, 3) == 3);
    CHECK(int_root(26, 3) == 2);
}

TEST_CASE("step_function example values") {
    auto net = step_function(1, {2, 1}, 1.0 / 12);
    CHECK(at(net, 0.0) == doctest::Approx(0).epsilon(1e-12));
    CHECK(at(net, 0.5) == doctest::Approx(2).epsilon(1e-12));
    CHECK(at(net, 1.0) == doctest::Approx(3).epsilon(1e-12));
    for (int k = 0; k + 1 < 4; ++k) CHECK(std::abs(at(net, (k + 1) / 4.0 - 1.0 / 12) - k) <= 1e-9);

    auto one = step_function(2, {1, 1}, 0.2);
    for (double x : {0.0, 0.3, 0.9, 1.0}) CHECK(std::abs(at(one, x)) <= 1e-12);

    CHECK_THROWS_AS(step_function(1, {2, 1}, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(step_function(1, {2, 1}, 0.0), std::invalid_argument);
}

TEST_CASE("step_function plateaus and sizes") {
    std::mt19937 rng(29);
    for (int d = 1; d <= 3; ++d)
        for (int N = 1; N <= 3; ++N)
            for (int L = 1; L <= 3; ++L) {
                int K = step_cells(d, {N, L});
                double delta = 1.0 / (3 * K);
                auto net = step_function(d, {N, L}, delta);
                for (int k = 0; k < K; ++k) {
                    double lo = double(k) / K, hi = k + 1 < K ? double(k + 1) / K - delta : 1.0;
                    std::uniform_real_distribution<double> u(lo, hi);
                    for (int i = 0; i < 10; ++i) CHECK(std::abs(at(net, u(rng)) - k) <= 1e-9);
                    CHECK(std::abs(at(net, lo) - k) <= 1e-9);
                    CHECK(std::abs(at(net, hi) - k) <= 1e-9);
                }
                auto rep = size_report(net);
                CHECK(rep.width <= std::size_t(4 * int_root(N, d) + 3));
                CHECK(rep.depth <= std::size_t(4 * L + 5));
            }
}

TEST_CASE("bit_extract_cumsum hand cases") {
    BitTable zeros(8, 2);
    auto z = bit_extract_cumsum(zeros, 2, 2);
    for (int m = 0; m < 8; ++m)
        for (int l = 0; l < 2; ++l) CHECK(std::abs(evaluate1(z, {double(m), double(l)})) <= 1e-9);

    BitTable t(12, 3);
    for (int l = 0; l < 3; ++l) t.at(0, l) = 1;
    auto net = bit_extract_cumsum(t, 2, 3);
    for (int l = 0; l < 3; ++l) CHECK(std::abs(evaluate1(net, {0.0, double(l)}) - (l + 1)) <= 1e-9);
    CHECK_THROWS_AS(bit_extract_cumsum(BitTable(3, 2), 2, 2), std::invalid_argument);
}

TEST_CASE("bit_extract_cumsum exhaustive recovery and sizes") {
    std::mt19937 rng(31);
    for (int N = 1; N <= 3; ++N)
        for (int L = 1; L <= 3; ++L) {
            std::size_t M = std::size_t(N * N * L);
            auto t = random_table(rng, M, L);
            auto net = bit_extract_cumsum(t, N, L);
            for (std::size_t m = 0; m < M; ++m) {
                int sum = 0;
                for (int l = 0; l < L; ++l) {
                    sum += t.at(m, l);
                    CHECK(std::abs(evaluate1(net, {double(m), double(l)}) - sum) <= 1e-9);
                }
            }
            auto rep = size_report(net);
            CHECK(rep.width <= std::size_t(4 * N + 3));
            CHECK(rep.depth <= std::size_t(3 * L + 3));
        }
}

TEST_CASE("bit_extract_single hand cases") {
    auto net = bit_extract_single({1, 0, 1, 1}, 1, 2);
    std::vector<double> expect{1, 0, 1, 1};
    for (int i = 0; i < 4; ++i) CHECK(std::abs(at(net, i) - expect[i]) <= 1e-9);

    auto ones = bit_extract_single(std::vector<std::uint8_t>(16, 1), 2, 2);
    for (int i = 0; i < 16; ++i) CHECK(std::abs(at(ones, i) - 1) <= 1e-9);

    auto shortcut = bit_extract_single({0, 1, 1, 0}, 2, 1);
    CHECK(shortcut.depth() == 2);
    CHECK(std::abs(at(shortcut, 1) - 1) <= 1e-12);
    CHECK(std::abs(at(shortcut, 3)) <= 1e-12);
    CHECK_THROWS_AS(bit_extract_single({1, 0}, 1, 2), std::invalid_argument);
}

TEST_CASE("bit_extract_single exhaustive recovery and sizes") {
    std::mt19937 rng(37);
    for (int N = 1; N <= 3; ++N)
        for (int L = 1; L <= 3; ++L) {
            std::size_t n = std::size_t(N * N * L * L);
            std::vector<std::uint8_t> bits(n);
            for (auto& b : bits) b = static_cast<std::uint8_t>(rng() & 1u);
            auto net = bit_extract_single(bits, N, L);
            for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(at(net, double(i)) - bits[i]) <= 1e-9);
            auto rep = size_report(net);
            CHECK(rep.width <= std::size_t(8 * N + 6));
            CHECK(rep.depth <= std::size_t(5 * L + 7));
        }
}

TEST_CASE("point_match example and dyadic values") {
    CHECK(point_match_bits(2, 1, 1) == 4);
    CHECK(point_match_bits(1, 1, 1) == 2);
    CHECK(point_match_bits(2, 2, 2) == 10);
    auto net = point_match({{0.3}, 1}, 2, 1);
    CHECK(at(net, 0) == doctest::Approx(0.3125).epsilon(1e-12));

    auto exact = point_match({{0.0, 1.0, 1.0, 0.0, 0.5}, 1}, 2, 2);
    std::vector<double> xi{0.0, 1.0, 1.0, 0.0, 0.5};
    for (int i = 0; i < 5; ++i) CHECK(std::abs(at(exact, i) - xi[i]) <= 1e-12);
    for (double x : {-1000.0, 1000.0, -3.7, 2.5, 17.25}) {
        double v = at(exact, x);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    CHECK_THROWS_AS(point_match({{1.5}, 1}, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(point_match({{0.1, 0.2}, 1}, 1, 1), std::invalid_argument);
}

TEST_CASE("point_match exhaustive error and sizes") {
    std::mt19937 rng(41);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int s = 1; s <= 2; ++s)
        for (int N = 1; N <= 2; ++N)
            for (int L = 1; L <= 2; ++L) {
                CoefficientVector c{{}, s};
                for (int i = 0; i < N * N * L * L; ++i) c.xi.push_back(u(rng));
                auto net = point_match(c, N, L);
                double tol = std::pow(double(N), -2 * s) * std::pow(double(L), -2 * s);
                for (std::size_t i = 0; i < c.xi.size(); ++i)
                    CHECK(std::abs(at(net, double(i)) - c.xi[i]) <= tol);
                for (double x : {-1000.0, 1000.0}) {
                    CHECK(at(net, x) >= 0.0);
                    CHECK(at(net, x) <= 1.0);
                }
                auto rep = size_report(net);
                CHECK(double(rep.width) <= 16.0 * s * (N + 1) * std::log2(8.0 * N));
                CHECK(double(rep.depth) <= 5.0 * (L + 2) * std::log2(4.0 * L));
            }
}
