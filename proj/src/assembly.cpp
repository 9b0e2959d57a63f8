#include "relu_forge/assembly.hpp"

#include <cmath>
#include <stdexcept>

#include "relu_forge/encoders.hpp"

namespace relu_forge {

namespace {

using E = Entry<double>;

double budget_rate(int s, int d, SizeBudget b) {
    double e = -2.0 * s / d;
    return std::pow(double(b.N), e) * std::pow(double(b.L), e);
}

} // namespace

void TriflingRegion::validate() const {
    if (d < 1) throw std::invalid_argument("trifling region: d must be >= 1");
    if (K < 1) throw std::invalid_argument("trifling region: K must be >= 1");
    if (!(delta > 0) || delta > 1.0 / (3.0 * K))
        throw std::invalid_argument("trifling region: delta must lie in (0, 1/(3K)]");
}

bool TriflingRegion::contains_coordinate(double t) const {
    if (K == 1) return false;
    double f = std::floor(t * K);
    for (double k : {f, f + 1}) {
        if (k < 1 || k > K - 1) continue;
        double right = k / K;
        if (t > right - delta && t < right) return true;
    }
    return false;
}

bool TriflingRegion::contains(std::span<const double> x) const {
    for (double t : x)
        if (contains_coordinate(t)) return true;
    return false;
}

std::vector<double> CellIndex::anchor() const {
    std::vector<double> a;
    for (int b : beta) a.push_back(double(b) / K);
    return a;
}

std::vector<std::pair<double, double>> CellIndex::bounds(double delta) const {
    std::vector<std::pair<double, double>> out;
    for (int b : beta) out.emplace_back(double(b) / K, b + 1 < K ? double(b + 1) / K - delta : 1.0);
    return out;
}

std::size_t flatten_cell(const std::vector<int>& beta, int K) {
    std::size_t i = 0, w = 1;
    for (int b : beta) {
        if (b < 0 || b >= K) throw std::invalid_argument("cell index out of range");
        i += w * static_cast<std::size_t>(b);
        w *= static_cast<std::size_t>(K);
    }
    return i;
}

std::vector<int> eta(std::size_t i, int K, int d) {
    std::vector<int> beta(static_cast<std::size_t>(d));
    for (auto& b : beta) {
        b = static_cast<int>(i % static_cast<std::size_t>(K));
        i /= static_cast<std::size_t>(K);
    }
    if (i != 0) throw std::invalid_argument("eta: index exceeds K^d");
    return beta;
}

void TargetFunction::validate() const {
    if (d < 1) throw std::invalid_argument("target: d must be >= 1");
    if (s < 1) throw std::invalid_argument("target: s must be >= 1");
    if (!eval) throw std::invalid_argument("target: missing evaluation oracle");
    if (!deriv) throw std::invalid_argument("target: missing derivative oracle");
    if (!(csnorm >= 0) || !std::isfinite(csnorm)) throw std::invalid_argument("target: csnorm must be finite and >= 0");
}

TargetFunction scaled_target(const TargetFunction& f, double c) {
    TargetFunction g = f;
    g.eval = [e = f.eval, c](std::span<const double> x) { return e(x) / c; };
    g.deriv = [dv = f.deriv, c](const MultiIndex& a, std::span<const double> x) { return dv(a, x) / c; };
    g.csnorm = f.csnorm / c;
    if (f.modulus) g.modulus = [m = f.modulus, c](double r) { return m(r) / c; };
    return g;
}

TaylorPlan make_taylor_plan(const TargetFunction& f, SizeBudget budget, double delta) {
    f.validate();
    TaylorPlan plan;
    plan.d = f.d;
    plan.s = f.s;
    plan.K = step_cells(f.d, budget);
    plan.delta = delta;
    plan.alphas = MultiIndex::up_to_order(static_cast<std::size_t>(f.d), static_cast<unsigned>(f.s - 1));
    std::size_t cells = 1;
    for (int j = 0; j < f.d; ++j) cells *= static_cast<std::size_t>(plan.K);
    for (const auto& alpha : plan.alphas) {
        std::vector<double> xi(cells);
        for (std::size_t i = 0; i < cells; ++i) {
            auto x = CellIndex{eta(i, plan.K, f.d), plan.K}.anchor();
            double v = f.deriv(alpha, x);
            if (!std::isfinite(v) || std::abs(v) > 1 + 1e-9)
                throw std::invalid_argument("taylor plan: derivative " + alpha.to_string() +
                                            " exceeds the unit bound at cell " + std::to_string(i));
            xi[i] = std::clamp((v + 1) / 2, 0.0, 1.0);
        }
        plan.xi.push_back(std::move(xi));
    }
    return plan;
}

Network mid_network() {
    // Layer 1: max block (6), min block (6), sum passthrough (2).
    std::vector<E> w1;
    std::vector<double> b1(14, 0.0);
    for (std::size_t base : {std::size_t{0}, std::size_t{6}}) {
        w1.insert(w1.end(), {{base + 0, 0, 1}, {base + 0, 1, 1}, {base + 1, 0, -1}, {base + 1, 1, -1},
                             {base + 2, 0, 1}, {base + 2, 1, -1}, {base + 3, 0, -1}, {base + 3, 1, 1},
                             {base + 4, 2, 1}, {base + 5, 2, -1}});
    }
    for (std::size_t c = 0; c < 3; ++c) {
        w1.push_back({12, c, 1});
        w1.push_back({13, c, -1});
    }
    // Layer 2: a = max(x1,x2) or min(x1,x2) and t = x3 feed σ(±(a+t)), σ(±(a−t)).
    std::vector<E> w2;
    auto pair = [&](std::size_t row, std::size_t base, double sgn) {
        // a = ½(u0 − u1) + sgn·½(u2 + u3), t = u4 − u5
        double a[6] = {0.5, -0.5, 0.5 * sgn, 0.5 * sgn, 0, 0};
        double t[6] = {0, 0, 0, 0, 1, -1};
        double mult[4][2] = {{1, 1}, {-1, -1}, {1, -1}, {-1, 1}};
        for (std::size_t r = 0; r < 4; ++r)
            for (std::size_t c = 0; c < 6; ++c) {
                double v = mult[r][0] * a[c] + mult[r][1] * t[c];
                if (v != 0) w2.push_back({row + r, base + c, v});
            }
    };
    pair(0, 0, 1.0);
    pair(4, 6, -1.0);
    w2.push_back({8, 12, 1});
    w2.push_back({9, 13, 1});
    // Output: Σ − max − min.
    std::vector<E> w3{{0, 8, 1}, {0, 9, -1}};
    for (std::size_t r = 0; r < 4; ++r) {
        double max_c = r == 0 || r == 2 || r == 3 ? 0.5 : -0.5;
        double min_c = r == 0 ? 0.5 : -0.5;
        w3.push_back({0, r, -max_c});
        w3.push_back({0, 4 + r, -min_c});
    }
    std::vector<AffineLayer<double>> layers;
    layers.push_back(AffineLayer<double>::from_entries(3, 14, std::move(w1), std::move(b1), Activation::relu));
    layers.push_back(AffineLayer<double>::from_entries(14, 10, std::move(w2), std::vector<double>(10, 0.0),
                                                       Activation::relu));
    layers.push_back(AffineLayer<double>::from_entries(10, 1, std::move(w3), {0.0}, Activation::identity));
    return Network(3, std::move(layers));
}

Network remove_trifling(const Network& net, const TriflingRegion& region) {
    region.validate();
    if (net.input_dim() != static_cast<std::size_t>(region.d))
        throw std::invalid_argument("remove_trifling: network input dim differs from region dimension");
    if (net.output_dim() != 1) throw std::invalid_argument("remove_trifling: expected a scalar network");
    const std::size_t d = net.input_dim();
    const auto mid = mid_network();
    Network phi = net;
    for (std::size_t axis = 0; axis < d; ++axis) {
        std::vector<E> w;
        std::vector<double> b(3 * d, 0.0);
        for (std::size_t copy = 0; copy < 3; ++copy)
            for (std::size_t j = 0; j < d; ++j) w.push_back({copy * d + j, j, 1.0});
        b[axis] = -region.delta;
        b[2 * d + axis] = region.delta;
        auto shift = affine<double>(d, 3 * d, std::move(w), std::move(b));
        auto trio = parallel<double>({phi, phi, phi}, false);
        phi = compose(mid, compose(trio, shift));
    }
    return phi;
}

TaylorCore build_taylor_core(const TargetFunction& f, SizeBudget budget, double delta) {
    budget.validate();
    if (f.csnorm > 1 + 1e-12) throw std::invalid_argument("build_taylor_core: target must lie in the unit C^s ball");
    TaylorPlan plan = make_taylor_plan(f, budget, delta);
    TriflingRegion region{f.d, plan.K, delta};
    region.validate();
    const std::size_t d = static_cast<std::size_t>(f.d);
    const int K = plan.K;

    // Ψ: per-axis cell index ψ(x_j) alongside x_j, then (i, h).
    auto psi = step_function(f.d, budget, delta);
    auto coord = parallel<double>({psi, identity<double>(1)}, true, {Sign::nonnegative, Sign::nonnegative});
    std::vector<Network> coords(d, coord);
    auto grid = parallel<double>(std::span<const Network>(coords), false);
    std::vector<E> wi;
    double place = 1;
    for (std::size_t j = 0; j < d; ++j) {
        wi.push_back({0, 2 * j, place});
        wi.push_back({1 + j, 2 * j + 1, 1.0});
        wi.push_back({1 + j, 2 * j, -1.0 / K});
        place *= K;
    }
    auto to_ih = affine<double>(2 * d, 1 + d, std::move(wi), std::vector<double>(1 + d, 0.0));
    auto stage_a = compose(to_ih, grid);

    std::vector<E> pick_i{{0, 0, 1.0}}, pick_h;
    for (std::size_t j = 0; j < d; ++j) pick_h.push_back({j, 1 + j, 1.0});
    auto sel_i = affine<double>(1 + d, 1, pick_i, {0.0});
    auto sel_h = affine<double>(1 + d, d, pick_h, std::vector<double>(d, 0.0));
    auto mult = product_interval<double>(-3.0, 3.0, {budget.N + 1, 2 * f.s * (budget.L + 1)});

    std::vector<Network> branches;
    for (std::size_t a = 0; a < plan.alphas.size(); ++a) {
        const auto& alpha = plan.alphas[a];
        auto pm = compose(point_match({plan.xi[a], f.s}, budget.N, budget.L), sel_i);
        auto poly = compose(monomial<double>(alpha, static_cast<unsigned>(f.s), budget), sel_h);
        auto pair = parallel<double>({pm, poly}, true, {Sign::nonnegative, Sign::any});
        double inv_fact = 1.0 / alpha.factorial();
        auto coeff = affine<double>(2, 2, {{0, 0, 2.0 * inv_fact}, {1, 1, 1.0}}, {-inv_fact, 0.0});
        branches.push_back(compose(mult, compose(coeff, pair)));
    }
    auto all = parallel<double>(std::span<const Network>(branches), true);
    std::vector<E> sum;
    for (std::size_t a = 0; a < branches.size(); ++a) sum.push_back({0, a, 1.0});
    auto total = affine<double>(branches.size(), 1, std::move(sum), {0.0});
    return {compose(total, compose(all, stage_a)), region, std::move(plan)};
}

double choose_delta(const TargetFunction& f, SizeBudget budget) {
    f.validate();
    const int K = step_cells(f.d, budget);
    const double cap = 1.0 / (3.0 * K);
    const double tol = budget_rate(f.s, f.d, budget);
    if (!f.modulus || f.csnorm == 0) return std::min(cap, tol / std::pow(double(f.d), 1.5));
    auto ok = [&](double delta) { return f.d * f.modulus(delta) / f.csnorm <= tol; };
    if (ok(cap)) return cap;
    double lo = 0, hi = cap;
    for (int it = 0; it < 200; ++it) {
        double mid = (lo + hi) / 2;
        (ok(mid) ? lo : hi) = mid;
    }
    if (!(lo > 0)) throw std::runtime_error("choose_delta: failed to bracket delta");
    return lo;
}

SmoothApproximation approx_smooth(const TargetFunction& f, SizeBudget budget) {
    f.validate();
    budget.validate();
    SmoothApproximation out;
    const int K = step_cells(f.d, budget);
    const std::size_t d = static_cast<std::size_t>(f.d);
    if (f.csnorm == 0) {
        out.net = affine<double>(d, 1, {}, {0.0});
        out.region = {f.d, K, 1.0 / (3.0 * K)};
        out.delta = out.region.delta;
        return out;
    }
    out.csnorm = f.csnorm;
    out.delta = choose_delta(f, budget);
    auto unit = scaled_target(f, f.csnorm);
    auto core = build_taylor_core(unit, budget, out.delta);
    out.region = core.region;
    out.net = scale_output(remove_trifling(core.net, core.region), f.csnorm);
    out.core = std::move(core.net);
    return out;
}

} // namespace relu_forge
