#pragma once

#include <compare>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "relu_forge/double_double.hpp"
#include "relu_forge/net_ir.hpp"

namespace relu_forge {

struct SizeBudget {
    int N = 1;
    int L = 1;

    void validate() const {
        if (N < 1) throw std::invalid_argument("N must be >= 1, got " + std::to_string(N));
        if (L < 1) throw std::invalid_argument("L must be >= 1, got " + std::to_string(L));
    }
};

struct MultiIndex {
    std::vector<unsigned> entries;

    MultiIndex() = default;
    explicit MultiIndex(std::vector<unsigned> e) : entries(std::move(e)) {
        if (entries.empty()) throw std::invalid_argument("multi-index needs at least one entry");
    }
    MultiIndex(std::initializer_list<unsigned> e) : MultiIndex(std::vector<unsigned>(e)) {}

    std::size_t dim() const { return entries.size(); }
    unsigned order() const { return std::accumulate(entries.begin(), entries.end(), 0u); }
    double factorial() const {
        double f = 1;
        for (unsigned a : entries)
            for (unsigned i = 2; i <= a; ++i) f *= i;
        return f;
    }
    unsigned operator[](std::size_t i) const { return entries[i]; }

    auto operator<=>(const MultiIndex&) const = default;

    std::string to_string() const {
        std::string s = "(";
        for (std::size_t i = 0; i < entries.size(); ++i) s += (i ? "," : "") + std::to_string(entries[i]);
        return s + ")";
    }

    /// All multi-indices of dimension d with order <= max_order, in
    /// lexicographic order.
    static std::vector<MultiIndex> up_to_order(std::size_t d, unsigned max_order) {
        std::vector<MultiIndex> out;
        std::vector<unsigned> cur(d, 0);
        auto rec = [&](auto&& self, std::size_t pos, unsigned left) -> void {
            if (pos == d) {
                out.emplace_back(cur);
                return;
            }
            for (unsigned a = 0; a <= left; ++a) {
                cur[pos] = a;
                self(self, pos + 1, left - a);
            }
            cur[pos] = 0;
        };
        rec(rec, 0, max_order);
        return out;
    }
};

/// Smallest k with (k-1)2^(k-1)+1 <= N <= k 2^k.
inline int square_k(int N) {
    if (N < 1) throw std::invalid_argument("N must be >= 1");
    for (int k = 1;; ++k) {
        std::int64_t lo = static_cast<std::int64_t>(k - 1) * (std::int64_t{1} << (k - 1)) + 1;
        std::int64_t hi = static_cast<std::int64_t>(k) * (std::int64_t{1} << k);
        if (lo <= N && N <= hi) return k;
    }
}

namespace detail {

template <class Real>
Real pow2(int e) {
    return Real(std::ldexp(1.0, e));
}

// Neurons σ(t − m/2^j) for m = 0..2^j−1 reading column `col`, appended from row `row`.
template <class Real>
void sawtooth_neurons(unsigned j, std::size_t col, std::size_t row, std::vector<Entry<Real>>& w,
                      std::vector<Real>& bias) {
    std::size_t n = std::size_t{1} << j;
    for (std::size_t m = 0; m < n; ++m) {
        w.push_back({row + m, col, Real(1)});
        bias.push_back(-Real(static_cast<double>(m)) * pow2<Real>(-static_cast<int>(j)));
    }
}

// Output coefficient of neuron m in the one-layer T_j realization.
template <class Real>
Real sawtooth_coeff(unsigned j, std::size_t m) {
    if (m == 0) return pow2<Real>(static_cast<int>(j));
    Real c = pow2<Real>(static_cast<int>(j) + 1);
    return m % 2 ? -c : c;
}

} // namespace detail

/// T_i on [0,1] as one hidden layer of width 2^i.
template <class Real = double>
BasicNetwork<Real> sawtooth(unsigned i) {
    if (i < 1 || i > 24) throw std::invalid_argument("sawtooth index must be in [1, 24]");
    std::vector<Entry<Real>> w;
    std::vector<Real> b;
    detail::sawtooth_neurons<Real>(i, 0, 0, w, b);
    std::size_t n = b.size();
    std::vector<Entry<Real>> out;
    for (std::size_t m = 0; m < n; ++m) out.push_back({0, m, detail::sawtooth_coeff<Real>(i, m)});
    std::vector<AffineLayer<Real>> layers;
    layers.push_back(AffineLayer<Real>::from_entries(1, n, std::move(w), std::move(b), Activation::relu));
    layers.push_back(AffineLayer<Real>::from_entries(n, 1, std::move(out), {Real(0)}, Activation::identity));
    return {1, std::move(layers)};
}

/// Uncollapsed x² approximation: L ReLU blocks alternating with identity
/// layers. Block l receives (t, acc) with t = T_{(l−1)k}(x) and updates
/// acc −= Σ_j T_j(t)/4^{(l−1)k+j}.
template <class Real = double>
BasicNetwork<Real> square_approx_raw(SizeBudget budget) {
    budget.validate();
    const unsigned k = static_cast<unsigned>(square_k(budget.N));
    const int L = budget.L;
    if (static_cast<long>(k) * L > 500) throw std::invalid_argument("square_approx: L*k too large");
    std::vector<AffineLayer<Real>> layers;
    for (int l = 1; l <= L; ++l) {
        std::size_t in = l == 1 ? 1 : 2;
        std::size_t t_col = 0, acc_col = l == 1 ? 0 : 1;
        std::vector<Entry<Real>> w;
        std::vector<Real> b;
        std::vector<std::size_t> start(k + 1);
        for (unsigned j = 1; j <= k; ++j) {
            start[j] = b.size();
            detail::sawtooth_neurons<Real>(j, t_col, b.size(), w, b);
        }
        std::size_t acc_row = b.size();
        w.push_back({acc_row, acc_col, Real(1)});
        b.push_back(Real(0));
        std::size_t width = b.size();
        layers.push_back(AffineLayer<Real>::from_entries(in, width, std::move(w), std::move(b), Activation::relu));

        bool last = l == L;
        std::vector<Entry<Real>> o;
        std::size_t acc_out = last ? 0 : 1;
        if (!last)
            for (std::size_t m = 0; m < (std::size_t{1} << k); ++m)
                o.push_back({0, start[k] + m, detail::sawtooth_coeff<Real>(k, m)});
        o.push_back({acc_out, acc_row, Real(1)});
        for (unsigned j = 1; j <= k; ++j) {
            int e = 2 * ((l - 1) * static_cast<int>(k) + static_cast<int>(j));
            Real scale = detail::pow2<Real>(-e);
            for (std::size_t m = 0; m < (std::size_t{1} << j); ++m)
                o.push_back({acc_out, start[j] + m, -scale * detail::sawtooth_coeff<Real>(j, m)});
        }
        std::size_t outs = last ? 1 : 2;
        layers.push_back(AffineLayer<Real>::from_entries(width, outs, std::move(o), std::vector<Real>(outs, Real(0)),
                                                         Activation::identity));
    }
    return {1, std::move(layers)};
}

/// φ ≈ x² on [0,1]: width ≤ 3N, depth L, 0 ≤ φ − x² ≤ 4^{−(Lk+1)}.
template <class Real = double>
BasicNetwork<Real> square_approx(SizeBudget budget) {
    return collapse_identity_layers(square_approx_raw<Real>(budget));
}

/// φ ≈ xy on [0,1]² as 2(ψ((x+y)/2) − ψ(x/2) − ψ(y/2)).
template <class Real = double>
BasicNetwork<Real> product_unit(SizeBudget budget) {
    auto sq = square_approx<Real>(budget);
    Real h(0.5);
    auto in = affine<Real>(2, 3, {{0, 0, h}, {0, 1, h}, {1, 0, h}, {2, 1, h}}, std::vector<Real>(3, Real(0)));
    std::vector<BasicNetwork<Real>> branches{sq, sq, sq};
    auto mid = parallel<Real>(std::span<const BasicNetwork<Real>>(branches), false);
    auto out = affine<Real>(3, 1, {{0, 0, Real(2)}, {0, 1, Real(-2)}, {0, 2, Real(-2)}}, {Real(0)});
    return compose(out, compose(mid, in));
}

/// φ ≈ xy on [a,b]², rescaled from the unit square plus one σ channel.
template <class Real = double>
BasicNetwork<Real> product_interval(Real a, Real b, SizeBudget budget) {
    if (!(a < b)) throw std::invalid_argument("product_interval requires a < b");
    Real span_ = b - a;
    Real inv = Real(1) / span_;
    Real abs_a = abs_value(a);
    auto in = affine<Real>(2, 3, {{0, 0, inv}, {1, 1, inv}, {2, 0, Real(1)}, {2, 1, Real(1)}},
                           {-a * inv, -a * inv, Real(2) * abs_a});
    std::vector<BasicNetwork<Real>> branches{product_unit<Real>(budget), identity<Real>(1)};
    std::vector<Sign> signs{Sign::any, Sign::nonnegative};
    auto mid = parallel<Real>(std::span<const BasicNetwork<Real>>(branches), false, std::span<const Sign>(signs));
    auto out = affine<Real>(2, 1, {{0, 0, span_ * span_}, {0, 1, a}}, {-a * a - Real(2) * a * abs_a});
    return compose(out, compose(mid, in));
}

/// φ ≈ x₁⋯x_k on [0,1]^k by nesting a product on [−0.1, 1.1].
template <class Real = double>
BasicNetwork<Real> product_multi(unsigned k, SizeBudget budget) {
    budget.validate();
    if (k < 2) throw std::invalid_argument("product_multi requires k >= 2");
    SizeBudget inner{budget.N + 1, static_cast<int>(7 * k) * budget.L};
    auto phi1 = product_interval<Real>(Real(-1) / Real(10), Real(11) / Real(10), inner);
    BasicNetwork<Real> net = phi1;
    std::vector<Sign> signs{Sign::any, Sign::nonnegative};
    for (unsigned i = 1; i + 1 < k; ++i) {
        std::vector<BasicNetwork<Real>> branches{net, identity<Real>(1)};
        auto both = parallel<Real>(std::span<const BasicNetwork<Real>>(branches), false, std::span<const Sign>(signs));
        net = compose(phi1, both);
    }
    return net;
}

/// φ ≈ x^α on [0,1]^d via the duplication map and a k-fold product.
template <class Real = double>
BasicNetwork<Real> monomial(const MultiIndex& alpha, unsigned k, SizeBudget budget) {
    budget.validate();
    const std::size_t d = alpha.dim();
    const unsigned order = alpha.order();
    if (d == 0) throw std::invalid_argument("monomial: empty multi-index");
    if (k < 1 || order > k)
        throw std::invalid_argument("monomial: order " + std::to_string(order) + " exceeds degree cap " +
                                    std::to_string(k));
    if (order == 0) return affine<Real>(d, 1, {}, {Real(1)});
    if (order == 1) {
        std::size_t j = 0;
        while (alpha[j] == 0) ++j;
        return affine<Real>(d, 1, {{0, j, Real(1)}}, {Real(0)});
    }
    std::vector<Entry<Real>> dup;
    std::vector<Real> bias(k, Real(0));
    std::size_t row = 0;
    for (std::size_t j = 0; j < d; ++j)
        for (unsigned r = 0; r < alpha[j]; ++r) dup.push_back({row++, j, Real(1)});
    for (; row < k; ++row) bias[row] = Real(1);
    return compose(product_multi<Real>(k, budget), affine<Real>(d, k, std::move(dup), std::move(bias)));
}

template <class Real = double>
struct Term {
    Real coefficient;
    MultiIndex alpha;
};

/// Σ cᵢ x^{αᵢ}: parallel monomials combined by an exact affine output.
template <class Real = double>
BasicNetwork<Real> polynomial(const std::vector<Term<Real>>& terms, unsigned k, SizeBudget budget) {
    if (terms.empty()) throw std::invalid_argument("polynomial: empty term list");
    const std::size_t d = terms.front().alpha.dim();
    Real constant(0);
    std::vector<BasicNetwork<Real>> branches;
    std::vector<Real> coeffs;
    for (const auto& t : terms) {
        if (t.alpha.dim() != d) throw std::invalid_argument("polynomial: mixed dimensions");
        if (t.alpha.order() == 0) {
            constant += t.coefficient;
            continue;
        }
        branches.push_back(monomial<Real>(t.alpha, k, budget));
        coeffs.push_back(t.coefficient);
    }
    if (branches.empty()) return affine<Real>(d, 1, {}, {constant});
    auto par = parallel<Real>(std::span<const BasicNetwork<Real>>(branches), true);
    std::vector<Entry<Real>> out;
    for (std::size_t i = 0; i < coeffs.size(); ++i) out.push_back({0, i, coeffs[i]});
    return compose(affine<Real>(coeffs.size(), 1, std::move(out), {constant}), par);
}

} // namespace relu_forge
