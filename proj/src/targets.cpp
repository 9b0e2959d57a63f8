#include "relu_forge/targets.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace relu_forge {

namespace {

constexpr double kPi = std::numbers::pi;

void check_dims(int d, int s) {
    if (d < 1) throw std::invalid_argument("target: d must be >= 1");
    if (s < 1) throw std::invalid_argument("target: s must be >= 1");
}

bool only_first_axis(const MultiIndex& a) {
    for (std::size_t j = 1; j < a.dim(); ++j)
        if (a[j] != 0) return false;
    return true;
}

// Probabilists' Hermite polynomial He_n(u).
double hermite(unsigned n, double u) {
    double prev = 1, cur = u;
    if (n == 0) return prev;
    for (unsigned k = 1; k < n; ++k) {
        double next = u * cur - k * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

TargetFunction constant(int d, int s) {
    const double c = 0.7;
    TargetFunction f;
    f.name = "constant";
    f.d = d;
    f.s = s;
    f.eval = [c](std::span<const double>) { return c; };
    f.deriv = [c](const MultiIndex& a, std::span<const double>) { return a.order() == 0 ? c : 0.0; };
    f.csnorm = c;
    f.modulus = [](double) { return 0.0; };
    return f;
}

TargetFunction linear(int d, int s) {
    TargetFunction f;
    f.name = "linear";
    f.d = d;
    f.s = s;
    f.eval = [](std::span<const double> x) { return x[0]; };
    f.deriv = [](const MultiIndex& a, std::span<const double> x) {
        if (!only_first_axis(a)) return 0.0;
        return a[0] == 0 ? x[0] : a[0] == 1 ? 1.0 : 0.0;
    };
    f.csnorm = 1.0;
    f.modulus = [](double r) { return std::min(r, 1.0); };
    return f;
}

TargetFunction monomial_target(int d, int s) {
    TargetFunction f;
    f.name = "monomial";
    f.d = d;
    f.s = s;
    f.eval = [](std::span<const double> x) { return x[0] * x[0]; };
    f.deriv = [](const MultiIndex& a, std::span<const double> x) {
        if (!only_first_axis(a)) return 0.0;
        switch (a[0]) {
        case 0: return x[0] * x[0];
        case 1: return 2 * x[0];
        case 2: return 2.0;
        default: return 0.0;
        }
    };
    f.csnorm = 2.0;
    f.modulus = [](double r) { return r >= 1 ? 1.0 : 2 * r - r * r; };
    return f;
}

TargetFunction sinpi(int d, int s) {
    TargetFunction f;
    f.name = "sinpi";
    f.d = d;
    f.s = s;
    f.eval = [](std::span<const double> x) { return std::sin(kPi * x[0]) / kPi; };
    f.deriv = [](const MultiIndex& a, std::span<const double> x) {
        if (!only_first_axis(a)) return 0.0;
        double n = a[0];
        return std::pow(kPi, n - 1) * std::sin(kPi * x[0] + n * kPi / 2);
    };
    f.csnorm = std::max(1.0, std::pow(kPi, s - 1));
    f.modulus = [](double r) { return std::sin(kPi * std::min(r, 0.5)) / kPi; };
    return f;
}

TargetFunction gauss_bump(int d, int s) {
    const double c = 0.5, sigma = 0.25;
    auto g = [=](unsigned n, double t) {
        double u = (t - c) / sigma;
        double sign = n % 2 ? -1.0 : 1.0;
        return sign * hermite(n, u) / std::pow(sigma, n) * std::exp(-u * u / 2);
    };
    // sup_{[0,1]} |g^(n)| by dense scan, with a small relative margin.
    std::vector<double> peak(static_cast<std::size_t>(s) + 1, 0.0);
    for (unsigned n = 0; n <= static_cast<unsigned>(s); ++n) {
        for (int i = 0; i <= 100000; ++i) peak[n] = std::max(peak[n], std::abs(g(n, i / 100000.0)));
        peak[n] *= 1 + 1e-9;
    }
    double norm = 0;
    for (const auto& a : MultiIndex::up_to_order(static_cast<std::size_t>(d), static_cast<unsigned>(s))) {
        double p = 1;
        for (unsigned e : a.entries) p *= peak[e];
        norm = std::max(norm, p);
    }
    TargetFunction f;
    f.name = "gauss-bump";
    f.d = d;
    f.s = s;
    f.eval = [g](std::span<const double> x) {
        double p = 1;
        for (double t : x) p *= g(0, t);
        return p;
    };
    f.deriv = [g](const MultiIndex& a, std::span<const double> x) {
        double p = 1;
        for (std::size_t j = 0; j < x.size(); ++j) p *= g(a[j], x[j]);
        return p;
    };
    f.csnorm = norm;
    double lip = std::sqrt(double(d)) * std::exp(-0.5) / sigma;
    f.modulus = [lip](double r) { return std::min(lip * r, 1.0); };
    return f;
}

} // namespace

std::vector<std::string> target_names() { return {"constant", "linear", "monomial", "polynomial", "sinpi", "gauss-bump"}; }

TargetFunction make_target(std::string_view name, int d, int s) {
    check_dims(d, s);
    if (name == "constant") return constant(d, s);
    if (name == "linear") return linear(d, s);
    if (name == "monomial" || name == "polynomial") return monomial_target(d, s);
    if (name == "sinpi") return sinpi(d, s);
    if (name == "gauss-bump") return gauss_bump(d, s);
    throw std::invalid_argument("unknown target preset '" + std::string(name) + "'");
}

TargetFunction finite_difference_target(std::string name, int d, int s,
                                        std::function<double(std::span<const double>)> eval, double h,
                                        int samples) {
    check_dims(d, s);
    if (!eval) throw std::invalid_argument("target: missing evaluation oracle");
    if (!(h > 0)) throw std::invalid_argument("target: step h must be positive");
    TargetFunction f;
    f.name = std::move(name);
    f.d = d;
    f.s = s;
    f.eval = eval;
    f.deriv = [eval, h](const MultiIndex& a, std::span<const double> x) {
        // Tensor product of 1D central stencils Σ_k (−1)^k C(n,k) f(x + (n/2 − k)h).
        std::vector<double> pt(x.begin(), x.end());
        double total = 0;
        std::vector<unsigned> k(a.dim(), 0);
        while (true) {
            double w = 1;
            for (std::size_t j = 0; j < a.dim(); ++j) {
                unsigned n = a[j];
                double binom = 1;
                for (unsigned i = 0; i < k[j]; ++i) binom = binom * (n - i) / (i + 1);
                w *= (k[j] % 2 ? -binom : binom) / std::pow(h, n);
                pt[j] = x[j] + (0.5 * n - k[j]) * h;
            }
            total += w * eval(pt);
            std::size_t j = 0;
            while (j < a.dim() && ++k[j] > a[j]) k[j++] = 0;
            if (j == a.dim()) break;
        }
        return total;
    };
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> x(static_cast<std::size_t>(d));
    double norm = 0;
    for (const auto& a : MultiIndex::up_to_order(static_cast<std::size_t>(d), static_cast<unsigned>(s)))
        for (int i = 0; i < samples; ++i) {
            for (auto& v : x) v = u(rng);
            norm = std::max(norm, std::abs(f.deriv(a, x)));
        }
    f.csnorm = norm;
    return f;
}

} // namespace relu_forge
