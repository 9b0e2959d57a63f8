#include "relu_forge/encoders.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

namespace relu_forge {

namespace {

using E = Entry<double>;

Network single_affine(std::size_t in, std::size_t out, std::vector<E> w, std::vector<double> b) {
    return affine<double>(in, out, std::move(w), std::move(b));
}

// Piece of a prescribed function on one block: u(x) = value + slope·(x − start).
struct Piece {
    double value;
    double slope;
};

} // namespace

void SampleSet::validate(int N1, int N2) const {
    if (N1 < 1 || N2 < 0) throw std::invalid_argument("fit_samples: need N1 >= 1 and N2 >= 0");
    std::size_t want = static_cast<std::size_t>(N1) * static_cast<std::size_t>(N2 + 1) + 1;
    if (points.size() != want)
        throw std::invalid_argument("fit_samples: expected " + std::to_string(want) + " samples, got " +
                                    std::to_string(points.size()));
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!std::isfinite(points[i].x) || !std::isfinite(points[i].y))
            throw std::invalid_argument("fit_samples: non-finite sample " + std::to_string(i));
        if (points[i].y < 0) throw std::invalid_argument("fit_samples: negative y at sample " + std::to_string(i));
        if (i > 0 && !(points[i].x > points[i - 1].x))
            throw std::invalid_argument("fit_samples: x not strictly increasing at sample " + std::to_string(i));
    }
}

Network fit_samples(const SampleSet& samples, int N1, int N2) {
    samples.validate(N1, N2);
    const auto& p = samples.points;
    const std::size_t B = static_cast<std::size_t>(N2) + 1;
    const std::size_t blocks = static_cast<std::size_t>(N1);
    const std::size_t n = blocks * B;
    auto px = [&](std::size_t j, std::size_t t) { return p[j * B + t].x; };
    auto py = [&](std::size_t j, std::size_t t) { return p[j * B + t].y; };

    // First layer: σ(x − x₀), two breakpoints inside each interior gap, one in the last gap.
    std::vector<double> br{p[0].x};
    for (std::size_t j = 1; j < blocks; ++j) {
        double a = px(j - 1, B - 1), b = px(j, 0);
        br.push_back(a + (b - a) / 3);
        br.push_back(a + 2 * (b - a) / 3);
    }
    br.push_back((px(blocks - 1, B - 1) + p[n].x) / 2);

    // Second-layer neuron r realizes pieces[r][j] on block j and end[r] at x_n,
    // expressed as const + Σ_q coef[q] σ(x − br[q]).
    std::vector<std::vector<Piece>> pieces;
    std::vector<double> end, out_w;
    pieces.push_back({});
    for (std::size_t j = 0; j < blocks; ++j) pieces.back().push_back({py(j, 0), 0.0});
    end.push_back(p[n].y);
    out_w.push_back(1.0);
    for (std::size_t t = 0; t + 1 < B; ++t) {
        std::vector<Piece> pos, neg;
        for (std::size_t j = 0; j < blocks; ++j) {
            auto slope = [&](std::size_t u) { return (py(j, u + 1) - py(j, u)) / (px(j, u + 1) - px(j, u)); };
            double delta = t == 0 ? slope(0) : slope(t) - slope(t - 1);
            double lp = std::max(delta, 0.0), ln = std::max(-delta, 0.0);
            double off = px(j, 0) - px(j, t);
            pos.push_back({lp * off, lp});
            neg.push_back({ln * off, ln});
        }
        pieces.push_back(std::move(pos));
        end.push_back(0.0);
        out_w.push_back(1.0);
        pieces.push_back(std::move(neg));
        end.push_back(0.0);
        out_w.push_back(-1.0);
    }

    const std::size_t w1 = br.size(), w2 = pieces.size();
    std::vector<E> l1, l2, l3;
    std::vector<double> b1, b2;
    for (std::size_t q = 0; q < w1; ++q) {
        l1.push_back({q, 0, 1.0});
        b1.push_back(-br[q]);
    }
    for (std::size_t r = 0; r < w2; ++r) {
        const auto& pc = pieces[r];
        b2.push_back(pc[0].value);
        l2.push_back({r, 0, pc[0].slope});
        for (std::size_t j = 1; j < blocks; ++j) {
            double g = br[2 * j - 1], g2 = br[2 * j];
            double P = px(j, 0);
            double F = pc[j - 1].value + pc[j - 1].slope * (P - px(j - 1, 0));
            double dS = pc[j].slope - pc[j - 1].slope;
            double dV = pc[j].value - F;
            double c = (dV - dS * (P - g2)) / (g2 - g);
            l2.push_back({r, 2 * j - 1, c});
            l2.push_back({r, 2 * j, dS - c});
        }
        double xn = p[n].x;
        double F = pc[blocks - 1].value + pc[blocks - 1].slope * (xn - px(blocks - 1, 0));
        l2.push_back({r, w1 - 1, (end[r] - F) / (xn - br[w1 - 1])});
        l3.push_back({0, r, out_w[r]});
    }
    std::vector<AffineLayer<double>> layers;
    layers.push_back(AffineLayer<double>::from_entries(1, w1, std::move(l1), std::move(b1), Activation::relu));
    layers.push_back(AffineLayer<double>::from_entries(w1, w2, std::move(l2), std::move(b2), Activation::relu));
    layers.push_back(AffineLayer<double>::from_entries(w2, 1, std::move(l3), {0.0}, Activation::identity));
    return Network(1, std::move(layers));
}

Network width_to_depth(const Network& net) {
    const auto& src = net.layers();
    if (src.size() != 3 || src[0].activation() != Activation::relu || src[1].activation() != Activation::relu)
        throw std::invalid_argument("width_to_depth: expected exactly two ReLU hidden layers");
    if (net.output_dim() != 1) throw std::invalid_argument("width_to_depth: expected one output");
    const auto& first = src[0];
    const auto& second = src[1];
    const auto& out = src[2];
    const std::size_t n = first.out_dim(), M = second.out_dim();
    const std::size_t L = (M + n - 1) / n;
    if (L <= 1) return net;

    auto group_begin = [&](std::size_t l) { return (l - 1) * n; };
    auto group_end = [&](std::size_t l) { return std::min(l * n, M); };

    std::vector<AffineLayer<double>> layers{first};
    // Column layout of the layer holding group l: [h (l<L)] [z_l] [acc+, acc- (l>=2)].
    std::size_t prev_z = 0, prev_acc = 0;
    for (std::size_t l = 1; l <= L; ++l) {
        std::vector<E> w;
        std::vector<double> b;
        std::size_t row = 0;
        std::size_t in_dim = l == 1 ? n : layers.back().out_dim();
        if (l < L) {
            for (std::size_t q = 0; q < n; ++q) {
                w.push_back({row++, q, 1.0});
                b.push_back(0.0);
            }
        }
        std::size_t z_start = row;
        for (std::size_t g = group_begin(l); g < group_end(l); ++g) {
            for (std::size_t k = second.row_begin(g); k < second.row_end(g); ++k)
                w.push_back({row, second.col(k), second.value(k)});
            b.push_back(second.bias()[g]);
            ++row;
        }
        std::size_t acc_start = row;
        if (l >= 2) {
            for (int sgn : {1, -1}) {
                for (std::size_t g = group_begin(l - 1); g < group_end(l - 1); ++g) {
                    double c = out.weight(0, g);
                    if (c * sgn > 0) w.push_back({row, prev_z + g - group_begin(l - 1), c * sgn});
                }
                if (l >= 3) w.push_back({row, prev_acc + (sgn > 0 ? 0 : 1), 1.0});
                b.push_back(0.0);
                ++row;
            }
        }
        layers.push_back(AffineLayer<double>::from_entries(in_dim, row, std::move(w), std::move(b), Activation::relu));
        prev_z = z_start;
        prev_acc = acc_start;
    }
    std::vector<E> w;
    for (std::size_t g = group_begin(L); g < group_end(L); ++g)
        w.push_back({0, prev_z + g - group_begin(L), out.weight(0, g)});
    w.push_back({0, prev_acc, 1.0});
    w.push_back({0, prev_acc + 1, -1.0});
    layers.push_back(
        AffineLayer<double>::from_entries(layers.back().out_dim(), 1, std::move(w), {out.bias()[0]}, Activation::identity));
    return Network(net.input_dim(), std::move(layers));
}

int int_root(long value, int d) {
    if (value < 1 || d < 1) throw std::invalid_argument("int_root: need value >= 1 and d >= 1");
    long r = 1;
    auto pow_le = [&](long base) {
        long double acc = 1;
        for (int i = 0; i < d; ++i) acc *= base;
        return acc <= static_cast<long double>(value);
    };
    while (pow_le(r + 1)) ++r;
    return static_cast<int>(r);
}

int step_cells(int d, SizeBudget budget) {
    budget.validate();
    if (d < 1) throw std::invalid_argument("d must be >= 1");
    long n = int_root(budget.N, d);
    long l = int_root(static_cast<long>(budget.L) * budget.L, d);
    return static_cast<int>(n * n * l);
}

namespace {

// Plateau samples {(k/K, k)}, {((k+1)/K − δ, k)}, (1, K−1) and a free end point.
SampleSet plateau_samples(int K, double delta, double scale) {
    SampleSet s;
    for (int k = 0; k < K; ++k) {
        s.points.push_back({scale * k / K, double(k)});
        if (k + 1 < K) s.points.push_back({scale * (k + 1) / K - delta, double(k)});
    }
    s.points.push_back({scale, double(K - 1)});
    s.points.push_back({2.0 * scale + 1.0, 0.0});
    return s;
}

} // namespace

Network step_function(int d, SizeBudget budget, double delta) {
    const int K = step_cells(d, budget);
    if (!(delta > 0) || delta > 1.0 / (3.0 * K))
        throw std::invalid_argument("step_function: delta must lie in (0, 1/(3K)] with K=" + std::to_string(K));
    if (d >= 2) {
        int n = int_root(budget.N, d);
        int l = int_root(static_cast<long>(budget.L) * budget.L, d);
        return width_to_depth(fit_samples(plateau_samples(K, delta, 1.0), n, 2 * n * l - 1));
    }
    const int N = budget.N, L = budget.L;
    const int M = N * N * L;
    // m = φ₁(x) ∈ {0..M−1} picks the coarse cell, φ₂ the fine one inside it.
    auto phi1 = width_to_depth(fit_samples(plateau_samples(M, delta, 1.0), N, 2 * N * L - 1));
    auto phi2 = width_to_depth(fit_samples(plateau_samples(L, delta, 1.0 / M), 1, 2 * L - 1));
    auto stage1 = parallel<double>({phi1, identity<double>(1)}, true, {Sign::nonnegative, Sign::nonnegative});
    auto shift = single_affine(2, 2, {{0, 0, 1.0}, {1, 1, 1.0}, {1, 0, -1.0 / M}}, {0.0, 0.0});
    auto stage2 = parallel<double>({identity<double>(1), phi2}, false, {Sign::nonnegative, Sign::any});
    auto combine = single_affine(2, 1, {{0, 0, double(L)}, {0, 1, 1.0}}, {0.0});
    return compose(combine, compose(stage2, compose(shift, stage1)));
}

namespace {

// Exact-at-integers reader of Σ_{j≤l} θ_j from r₀ = bin 0.θ₀θ₁…θ_{L−1}:
// inputs (r₀, l), one layer per bit.
Network cumulative_bits(int L) {
    struct Cols {
        std::size_t a, b, g, r, l, t, acc;
        bool has_r, has_t, has_acc;
    };
    auto ramp = [&](int j, double& scale, double& centre) {
        double w = std::ldexp(1.0, -(L - j) - 1);
        centre = 0.5 - w;
        scale = 1.0 / w;
    };
    std::vector<AffineLayer<double>> layers;
    Cols prev{};
    for (int j = 0; j <= L; ++j) {
        std::vector<E> w;
        std::vector<double> b;
        Cols cur{};
        std::size_t row = 0;
        auto add = [&](std::vector<E> terms, double bias) {
            for (auto& e : terms) w.push_back({row, e.col, e.value});
            b.push_back(bias);
            return row++;
        };
        // r_j as a combination of previous columns.
        std::vector<E> r_terms;
        double r_bias = 0;
        if (j == 0) {
            r_terms = {{0, 0, 1.0}};
        } else if (j < L) {
            r_terms = {{0, prev.r, 2.0}, {0, prev.a, -1.0}, {0, prev.b, 1.0}};
        }
        if (j < L) {
            double scale, centre;
            ramp(j, scale, centre);
            std::vector<E> ta, tb;
            for (auto e : r_terms) {
                ta.push_back({0, e.col, e.value * scale});
                tb.push_back({0, e.col, e.value * scale});
            }
            cur.a = add(ta, (r_bias - centre) * scale + 0.5);
            cur.b = add(tb, (r_bias - centre) * scale - 0.5);
            std::size_t l_col = j == 0 ? 1 : prev.l;
            cur.g = add({{0, l_col, -1.0}}, double(j));
            if (j + 1 < L) {
                cur.r = add(r_terms, r_bias);
                cur.has_r = true;
            }
            cur.l = add({{0, l_col, 1.0}}, 0.0);
        }
        if (j >= 1) {
            cur.t = add({{0, prev.a, 1.0}, {0, prev.b, -1.0}, {0, prev.g, -1.0}}, 0.0);
            cur.has_t = true;
        }
        if (prev.has_t) {
            std::vector<E> terms{{0, prev.t, 1.0}};
            if (prev.has_acc) terms.push_back({0, prev.acc, 1.0});
            cur.acc = add(terms, 0.0);
            cur.has_acc = true;
        }
        std::size_t in_dim = j == 0 ? 2 : layers.back().out_dim();
        layers.push_back(AffineLayer<double>::from_entries(in_dim, row, std::move(w), std::move(b), Activation::relu));
        prev = cur;
    }
    std::vector<E> o{{0, prev.t, 1.0}};
    if (prev.has_acc) o.push_back({0, prev.acc, 1.0});
    layers.push_back(AffineLayer<double>::from_entries(layers.back().out_dim(), 1, std::move(o), {0.0},
                                                       Activation::identity));
    return Network(2, std::move(layers));
}

} // namespace

Network bit_extract_cumsum(const BitTable& bits, int N, int L) {
    SizeBudget{N, L}.validate();
    const std::size_t M = static_cast<std::size_t>(N) * N * L;
    if (bits.rows != M || bits.cols != static_cast<std::size_t>(L) || bits.bits.size() != M * L)
        throw std::invalid_argument("bit_extract_cumsum: table must be " + std::to_string(M) + " x " +
                                    std::to_string(L));
    if (L > 40) throw std::invalid_argument("bit_extract_cumsum: L too large for double encoding");
    SampleSet s;
    for (std::size_t m = 0; m <= M; ++m) {
        double y = 0;
        if (m < M)
            for (int j = 0; j < L; ++j) {
                if (bits.at(m, j) > 1) throw std::invalid_argument("bit_extract_cumsum: entries must be 0 or 1");
                y += bits.at(m, j) * std::ldexp(1.0, -(j + 1));
            }
        s.points.push_back({double(m), y});
    }
    auto encode = width_to_depth(fit_samples(s, N, N * L - 1));
    auto stage = parallel<double>({encode, identity<double>(1)}, false, {Sign::nonnegative, Sign::nonnegative});
    return compose(cumulative_bits(L), stage);
}

Network bit_extract_single(const std::vector<std::uint8_t>& bits, int N, int L) {
    SizeBudget{N, L}.validate();
    const std::size_t count = static_cast<std::size_t>(N) * N * L * L;
    if (bits.size() != count)
        throw std::invalid_argument("bit_extract_single: expected " + std::to_string(count) + " bits");
    for (auto v : bits)
        if (v > 1) throw std::invalid_argument("bit_extract_single: entries must be 0 or 1");
    if (L == 1) {
        SampleSet s;
        for (std::size_t i = 0; i < count; ++i) s.points.push_back({double(i), double(bits[i])});
        s.points.push_back({double(count), 0.0});
        return fit_samples(s, N, N - 1);
    }
    const std::size_t M = static_cast<std::size_t>(N) * N * L;
    SampleSet s;
    for (std::size_t m = 0; m < M; ++m) {
        s.points.push_back({double(m * L), double(m)});
        s.points.push_back({double((m + 1) * L - 1), double(m)});
    }
    s.points.push_back({double(M * L), 0.0});
    auto psi = width_to_depth(fit_samples(s, N, 2 * N * L - 1));
    auto stage = parallel<double>({psi, identity<double>(1)}, true, {Sign::nonnegative, Sign::nonnegative});
    auto split = single_affine(2, 2, {{0, 0, 1.0}, {1, 1, 1.0}, {1, 0, -double(L)}}, {0.0, 0.0});

    BitTable a(M, L), b(M, L);
    for (std::size_t m = 0; m < M; ++m)
        for (int l = 0; l < L; ++l) {
            a.at(m, l) = bits[m * L + l];
            b.at(m, l) = l == 0 ? 0 : bits[m * L + l - 1];
        }
    auto both = parallel<double>({bit_extract_cumsum(a, N, L), bit_extract_cumsum(b, N, L)}, true,
                                 {Sign::nonnegative, Sign::nonnegative});
    auto diff = single_affine(2, 1, {{0, 0, 1.0}, {0, 1, -1.0}}, {0.0});
    return compose(diff, compose(both, compose(split, stage)));
}

int point_match_bits(int N, int L, int s) {
    SizeBudget{N, L}.validate();
    if (s < 1) throw std::invalid_argument("s must be >= 1");
    // smallest J with 2^J >= (NL+1)^{2s}
    long double target = std::pow(static_cast<long double>(N) * L + 1, 2.0L * s);
    int J = 0;
    while (std::ldexp(1.0L, J) < target) ++J;
    return J;
}

Network point_match(const CoefficientVector& coeffs, int N, int L) {
    const int s = coeffs.s;
    const int J = point_match_bits(N, L, s);
    const std::size_t count = static_cast<std::size_t>(N) * N * L * L;
    if (coeffs.xi.size() > count)
        throw std::invalid_argument("point_match: at most " + std::to_string(count) + " coefficients");
    if (J > 52) throw std::invalid_argument("point_match: too many bits for double encoding");
    std::vector<std::uint64_t> q(count, 0);
    bool unit = false;
    const double scale = std::ldexp(1.0, J);
    for (std::size_t i = 0; i < coeffs.xi.size(); ++i) {
        double v = coeffs.xi[i];
        if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("point_match: xi[" + std::to_string(i) + "] not in [0,1]");
        q[i] = static_cast<std::uint64_t>(std::floor(v * scale + 0.5));
        unit = unit || q[i] >> J;
    }
    // Bit j has weight 2^{−j}; j = 0 only appears when some ξ rounds up to 1.
    std::vector<std::pair<int, Network>> ext;
    for (int j = unit ? 0 : 1; j <= J; ++j) {
        std::vector<std::uint8_t> col(count);
        for (std::size_t i = 0; i < count; ++i) col[i] = static_cast<std::uint8_t>((q[i] >> (J - j)) & 1u);
        ext.emplace_back(j, bit_extract_single(col, N, L));
    }
    const std::size_t cap = static_cast<std::size_t>(2 * s * static_cast<int>(std::ceil(std::log2(4.0 * N) - 1e-12)));
    const std::size_t cols = std::min(ext.size(), cap);

    std::optional<Network> net;
    for (std::size_t start = 0; start < ext.size(); start += cols) {
        std::size_t stop = std::min(ext.size(), start + cols);
        bool first = start == 0, last = stop == ext.size();
        std::vector<Network> branches;
        std::vector<Sign> signs;
        for (std::size_t e = start; e < stop; ++e) {
            branches.push_back(ext[e].second);
            signs.push_back(Sign::nonnegative);
        }
        if (!last) {
            branches.push_back(identity<double>(1));
            signs.push_back(Sign::nonnegative);
        }
        auto row = parallel<double>(std::span<const Network>(branches), true, std::span<const Sign>(signs));
        std::size_t nb = stop - start;
        std::size_t outs = row.output_dim();
        if (!first) {
            std::vector<Network> two{row, identity<double>(1)};
            std::vector<Sign> sg{Sign::any, Sign::nonnegative};
            row = parallel<double>(std::span<const Network>(two), false, std::span<const Sign>(sg));
        }
        // Output (x, acc) or just acc on the last row.
        std::vector<E> w;
        std::size_t acc_row = last ? 0 : 1;
        if (!last) w.push_back({0, nb, 1.0});
        for (std::size_t e = 0; e < nb; ++e) w.push_back({acc_row, e, std::ldexp(1.0, -ext[start + e].first)});
        if (!first) w.push_back({acc_row, outs, 1.0});
        std::size_t out_dim = last ? 1 : 2;
        auto fold = single_affine(row.output_dim(), out_dim, std::move(w), std::vector<double>(out_dim, 0.0));
        row = compose(fold, row);
        net = net ? compose(row, *net) : row;
    }
    std::vector<AffineLayer<double>> clamp;
    clamp.push_back(AffineLayer<double>::from_entries(1, 2, {{0, 0, 1.0}, {1, 0, 1.0}}, {0.0, -1.0}, Activation::relu));
    clamp.push_back(AffineLayer<double>::from_entries(2, 1, {{0, 0, 1.0}, {0, 1, -1.0}}, {0.0}, Activation::identity));
    return compose(Network(1, std::move(clamp)), *net);
}

} // namespace relu_forge
