#pragma once

#include <cstdint>
#include <vector>

#include "relu_forge/net_ir.hpp"
#include "relu_forge/primitives.hpp"

namespace relu_forge {

struct Sample {
    double x;
    double y;
};

/// Samples x₀ < x₁ < … < x_n with y ≥ 0, n = N₁(N₂+1).
struct SampleSet {
    std::vector<Sample> points;

    void validate(int N1, int N2) const;
};

/// Two hidden layers of widths (2N₁, 2N₂+1) interpolating every sample and
/// linear on each [x_{i−1}, x_i] except those with i a multiple of N₂+1.
Network fit_samples(const SampleSet& samples, int N1, int N2);

/// Rewrites a two-hidden-layer network of widths (n, M) as a deep one of
/// width 2n+2 and depth ⌈M/n⌉+1, computing the same function everywhere.
Network width_to_depth(const Network& net);

/// Largest n with n^d <= value.
int int_root(long value, int d);

/// K = ⌊N^{1/d}⌋² ⌊L^{2/d}⌋.
int step_cells(int d, SizeBudget budget);

/// φ(x) = k on [k/K, (k+1)/K − δ] for k < K−1 and on [(K−1)/K, 1].
Network step_function(int d, SizeBudget budget, double delta);

struct BitTable {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint8_t> bits;

    BitTable() = default;
    BitTable(std::size_t r, std::size_t c) : rows(r), cols(c), bits(r * c, 0) {}
    std::uint8_t& at(std::size_t m, std::size_t l) { return bits[m * cols + l]; }
    std::uint8_t at(std::size_t m, std::size_t l) const { return bits[m * cols + l]; }
};

/// φ(m, l) = Σ_{j≤l} θ_{m,j} at integer (m, l), M = N²L rows and L columns.
Network bit_extract_cumsum(const BitTable& bits, int N, int L);

/// φ(i) = θ_i at integers i < N²L².
Network bit_extract_single(const std::vector<std::uint8_t>& bits, int N, int L);

struct CoefficientVector {
    std::vector<double> xi;
    int s = 1;
};

/// J = ⌈2s log₂(NL+1)⌉, computed exactly.
int point_match_bits(int N, int L, int s);

/// |φ(i) − ξ_i| ≤ 2^{−J−1} at integers i < N²L², and 0 ≤ φ ≤ 1 everywhere.
Network point_match(const CoefficientVector& coeffs, int N, int L);

} // namespace relu_forge
