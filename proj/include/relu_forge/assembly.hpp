#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "relu_forge/net_ir.hpp"
#include "relu_forge/primitives.hpp"

namespace relu_forge {

/// Ω([0,1]^d, K, δ): points with some coordinate in ∪_{k=1}^{K−1} (k/K − δ, k/K).
struct TriflingRegion {
    int d = 1;
    int K = 1;
    double delta = 0.0;

    void validate() const;
    bool contains_coordinate(double t) const;
    bool contains(std::span<const double> x) const;
};

struct CellIndex {
    std::vector<int> beta;
    int K = 1;

    std::vector<double> anchor() const;
    // Q_β as per-axis [lo, hi] bounds; the last cell on an axis closes at 1.
    std::vector<std::pair<double, double>> bounds(double delta) const;
};

/// i = Σ_j β_j K^{j−1} (β₁ least significant) and its inverse η.
std::size_t flatten_cell(const std::vector<int>& beta, int K);
std::vector<int> eta(std::size_t i, int K, int d);

struct TargetFunction {
    std::string name;
    int d = 1;
    int s = 1;
    std::function<double(std::span<const double>)> eval;
    std::function<double(const MultiIndex&, std::span<const double>)> deriv;
    double csnorm = 0.0;
    // Optional upper bound r ↦ ω_f(r); empty when unknown.
    std::function<double(double)> modulus;

    void validate() const;
};

/// f / c with derivatives and modulus scaled accordingly.
TargetFunction scaled_target(const TargetFunction& f, double c);

struct TaylorPlan {
    int d = 1;
    int s = 1;
    int K = 1;
    double delta = 0.0;
    std::vector<MultiIndex> alphas;
    // xi[a][i] = (∂^α f(η(i)/K) + 1)/2 for alphas[a].
    std::vector<std::vector<double>> xi;
};

TaylorPlan make_taylor_plan(const TargetFunction& f, SizeBudget budget, double delta);

/// mid(x₁, x₂, x₃) exactly, widthvec [14, 10].
Network mid_network();

/// Applies φ ← mid(φ(x − δe_i), φ(x), φ(x + δe_i)) along every axis.
Network remove_trifling(const Network& net, const TriflingRegion& region);

struct TaylorCore {
    Network net;
    TriflingRegion region;
    TaylorPlan plan;
};

/// Local Taylor approximant, accurate off the trifling region. Requires
/// ‖∂^α f‖_∞ ≤ 1 for ‖α‖₁ ≤ s.
TaylorCore build_taylor_core(const TargetFunction& f, SizeBudget budget, double delta);

/// δ ≤ 1/(3K) with d·ω_f̃(δ) ≤ N^{−2s/d}L^{−2s/d}, where f̃ = f/csnorm.
double choose_delta(const TargetFunction& f, SizeBudget budget);

struct SmoothApproximation {
    Network net;
    TriflingRegion region;
    double delta = 0.0;
    double csnorm = 0.0;
    // Core network for f / csnorm, before trifling removal (empty for f ≡ 0).
    std::optional<Network> core;
};

SmoothApproximation approx_smooth(const TargetFunction& f, SizeBudget budget);

} // namespace relu_forge
