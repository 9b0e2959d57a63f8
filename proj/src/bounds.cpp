#include "relu_forge/bounds.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace relu_forge {

namespace {

constexpr std::array<std::pair<BoundKind, std::string_view>, 14> kNames{{
    {BoundKind::Main, "main"},
    {BoundKind::Corollary, "corollary"},
    {BoundKind::Gap, "gap"},
    {BoundKind::MainGap, "main-gap"},
    {BoundKind::Square, "square"},
    {BoundKind::ProductUnit, "product"},
    {BoundKind::ProductInterval, "product-interval"},
    {BoundKind::ProductMulti, "product-multi"},
    {BoundKind::Monomial, "monomial"},
    {BoundKind::Step, "step"},
    {BoundKind::BitCumsum, "bit-cumsum"},
    {BoundKind::BitSingle, "bit-single"},
    {BoundKind::PointMatch, "point-match"},
    {BoundKind::Mid, "mid"},
}};

void require(bool ok, const char* name, const std::string& rule) {
    if (!ok) throw std::invalid_argument(std::string("bounds: parameter ") + name + " must satisfy " + rule);
}

double ipow(double base, int e) { return std::pow(base, e); }

long floor_root(int N, int d) {
    long r = 1;
    while (std::pow(double(r + 1), d) <= N) ++r;
    return r;
}

} // namespace

Bound bounds(BoundKind kind, const BoundParams& p) {
    require(p.N >= 1, "N", ">= 1");
    require(p.L >= 1, "L", ">= 1");
    const double N = p.N, L = p.L, s = p.s, d = p.d;
    auto need_sd = [&] {
        require(p.s >= 1, "s", ">= 1");
        require(p.d >= 1, "d", ">= 1");
    };
    auto rate = [&] { return std::pow(N, -2 * s / d) * std::pow(L, -2 * s / d); };
    switch (kind) {
    case BoundKind::Main:
        need_sd();
        return {17 * ipow(s, p.d + 1) * ipow(3, p.d) * d * (N + 2) * std::log2(8 * N),
                18 * s * s * (L + 2) * std::log2(4 * L) + 2 * d,
                85 * ipow(s + 1, p.d) * ipow(8, p.s) * p.csnorm * rate()};
    case BoundKind::Corollary: {
        need_sd();
        require(N >= 17 * ipow(s, p.d + 1) * ipow(3, p.d + 2) * d, "N", ">= 17 s^(d+1) 3^(d+2) d");
        require(L >= 108 * s * s + 2 * d, "L", ">= 108 s^2 + 2d");
        double c1 = 85 * ipow(s + 1, p.d) * ipow(8, p.s);
        double c2 = 68 * ipow(s, p.d + 1) * ipow(3, p.d) * d;
        double c3 = 72 * s * s;
        double e = -2 * s / d;
        return {N, L,
                c1 * p.csnorm * std::pow(N / (c2 * std::log2(8 * N + 8)), e) *
                    std::pow((L - 2 * d) / (c3 * std::log2(4 * L + 4)), e)};
    }
    case BoundKind::Gap:
        require(p.d >= 1, "d", ">= 1");
        return {ipow(3, p.d) * (N + 4), L + 2 * d, p.eps + d * p.omega};
    case BoundKind::MainGap:
        need_sd();
        return {16 * ipow(s, p.d + 1) * d * (N + 2) * std::log2(8 * N),
                18 * s * s * (L + 2) * std::log2(4 * L),
                84 * ipow(s + 1, p.d) * ipow(8, p.s) * rate()};
    case BoundKind::Square:
        return {3 * N, L, std::pow(N, -L)};
    case BoundKind::ProductUnit:
        return {9 * N, L, 6 * std::pow(N, -L)};
    case BoundKind::ProductInterval:
        require(p.a < p.b, "a", "< b");
        return {9 * N + 1, L, 6 * (p.b - p.a) * (p.b - p.a) * std::pow(N, -L)};
    case BoundKind::ProductMulti:
        require(p.k >= 2, "k", ">= 2");
        return {9 * (N + 1) + p.k - 1, 7.0 * p.k * L * (p.k - 1), 9.0 * (p.k - 1) * std::pow(N + 1, -7.0 * p.k * L)};
    case BoundKind::Monomial:
        require(p.k >= 1, "k", ">= 1");
        return {9 * (N + 1) + p.k - 1, 7.0 * p.k * p.k * L, 9.0 * p.k * std::pow(N + 1, -7.0 * p.k * L)};
    case BoundKind::Step:
        require(p.d >= 1, "d", ">= 1");
        return {4.0 * floor_root(p.N, p.d) + 3, 4 * L + 5, 0.0};
    case BoundKind::BitCumsum:
        return {4 * N + 3, 3 * L + 3, 0.0};
    case BoundKind::BitSingle:
        return {8 * N + 6, 5 * L + 7, 0.0};
    case BoundKind::PointMatch:
        require(p.s >= 1, "s", ">= 1");
        return {16 * s * (N + 1) * std::log2(8 * N), 5 * (L + 2) * std::log2(4 * L),
                std::pow(N, -2 * s) * std::pow(L, -2 * s)};
    case BoundKind::Mid:
        return {14, 2, 0.0};
    }
    throw std::invalid_argument("bounds: unknown kind");
}

std::string to_string(BoundKind kind) {
    for (const auto& [k, name] : kNames)
        if (k == kind) return std::string(name);
    return "unknown";
}

std::optional<BoundKind> parse_bound_kind(std::string_view name) {
    for (const auto& [k, n] : kNames)
        if (n == name) return k;
    return std::nullopt;
}

} // namespace relu_forge
