#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace relu_forge {

enum class Activation { relu, identity };

// How a scalar is carried through padding layers: one ReLU channel when the
// value is known to be nonnegative, two channels (σ(x) − σ(−x)) otherwise.
enum class Sign { nonnegative, any };

class NetError : public std::runtime_error {
public:
    explicit NetError(const std::string& what, std::ptrdiff_t layer = -1)
        : std::runtime_error(layer < 0 ? what : "layer " + std::to_string(layer) + ": " + what),
          layer_(layer) {}
    // Index of the offending layer, or -1 when the error is not tied to one.
    std::ptrdiff_t layer() const { return layer_; }

private:
    std::ptrdiff_t layer_;
};

template <class Real>
struct Entry {
    std::size_t row;
    std::size_t col;
    Real value;
};

/// Affine map y = W x + b followed by an activation. W is stored in
/// compressed sparse rows; exact zeros are dropped on construction.
template <class Real>
class AffineLayer {
public:
    AffineLayer() = default;

    static AffineLayer from_entries(std::size_t in_dim, std::size_t out_dim,
                                    std::vector<Entry<Real>> entries, std::vector<Real> bias,
                                    Activation act) {
        if (bias.size() != out_dim) throw NetError("bias length differs from row count");
        for (const auto& e : entries)
            if (e.row >= out_dim || e.col >= in_dim) throw NetError("weight entry out of range");
        std::sort(entries.begin(), entries.end(), [](const Entry<Real>& a, const Entry<Real>& b) {
            return a.row != b.row ? a.row < b.row : a.col < b.col;
        });
        AffineLayer layer;
        layer.in_ = in_dim;
        layer.out_ = out_dim;
        layer.act_ = act;
        layer.bias_ = std::move(bias);
        layer.row_ptr_.assign(out_dim + 1, 0);
        for (std::size_t k = 0; k < entries.size();) {
            std::size_t r = entries[k].row, c = entries[k].col;
            Real v = entries[k].value;
            for (++k; k < entries.size() && entries[k].row == r && entries[k].col == c; ++k)
                v += entries[k].value;
            if (v == Real(0)) continue;
            layer.cols_.push_back(static_cast<std::uint32_t>(c));
            layer.vals_.push_back(v);
            ++layer.row_ptr_[r + 1];
        }
        std::partial_sum(layer.row_ptr_.begin(), layer.row_ptr_.end(), layer.row_ptr_.begin());
        return layer;
    }

    static AffineLayer from_dense(const std::vector<std::vector<Real>>& weights,
                                  std::vector<Real> bias, Activation act) {
        std::size_t in_dim = weights.empty() ? 0 : weights.front().size();
        std::vector<Entry<Real>> entries;
        for (std::size_t r = 0; r < weights.size(); ++r) {
            if (weights[r].size() != in_dim) throw NetError("ragged weight matrix");
            for (std::size_t c = 0; c < in_dim; ++c)
                if (weights[r][c] != Real(0)) entries.push_back({r, c, weights[r][c]});
        }
        return from_entries(in_dim, weights.size(), std::move(entries), std::move(bias), act);
    }

    std::size_t in_dim() const { return in_; }
    std::size_t out_dim() const { return out_; }
    Activation activation() const { return act_; }
    const std::vector<Real>& bias() const { return bias_; }
    std::size_t nonzeros() const { return vals_.size(); }

    std::size_t row_begin(std::size_t r) const { return row_ptr_[r]; }
    std::size_t row_end(std::size_t r) const { return row_ptr_[r + 1]; }
    std::size_t col(std::size_t k) const { return cols_[k]; }
    const Real& value(std::size_t k) const { return vals_[k]; }

    Real weight(std::size_t r, std::size_t c) const {
        auto first = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r]);
        auto last = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r + 1]);
        auto it = std::lower_bound(first, last, static_cast<std::uint32_t>(c));
        return it != last && *it == c ? vals_[static_cast<std::size_t>(it - cols_.begin())] : Real(0);
    }

    std::vector<std::vector<Real>> dense_weights() const {
        std::vector<std::vector<Real>> w(out_, std::vector<Real>(in_, Real(0)));
        for (std::size_t r = 0; r < out_; ++r)
            for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) w[r][cols_[k]] = vals_[k];
        return w;
    }

    std::vector<Entry<Real>> entries() const {
        std::vector<Entry<Real>> out;
        out.reserve(vals_.size());
        for (std::size_t r = 0; r < out_; ++r)
            for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) out.push_back({r, cols_[k], vals_[k]});
        return out;
    }

    void apply(const Real* x, Real* y) const {
        for (std::size_t r = 0; r < out_; ++r) {
            Real acc = bias_[r];
            for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) acc += vals_[k] * x[cols_[k]];
            if (act_ == Activation::relu && !(acc > Real(0))) acc = Real(0);
            y[r] = acc;
        }
    }

private:
    std::size_t in_ = 0;
    std::size_t out_ = 0;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<std::uint32_t> cols_;
    std::vector<Real> vals_;
    std::vector<Real> bias_;
    Activation act_ = Activation::identity;
};

struct SizeReport {
    std::size_t width = 0;
    std::size_t depth = 0;
    std::uint64_t params = 0;
    std::vector<std::size_t> widthvec;
};

template <class Real>
class BasicNetwork {
public:
    BasicNetwork() = default;
    BasicNetwork(std::size_t input_dim, std::vector<AffineLayer<Real>> layers)
        : input_dim_(input_dim), layers_(std::move(layers)) {
        if (input_dim_ == 0) throw NetError("input_dim must be positive");
        if (layers_.empty()) throw NetError("network has no layers");
        std::size_t expect = input_dim_;
        for (std::size_t i = 0; i < layers_.size(); ++i) {
            if (layers_[i].in_dim() != expect)
                throw NetError("expected input width " + std::to_string(expect) + ", got " +
                                   std::to_string(layers_[i].in_dim()),
                               static_cast<std::ptrdiff_t>(i));
            expect = layers_[i].out_dim();
        }
        if (layers_.back().activation() != Activation::identity)
            throw NetError("output layer must be affine", static_cast<std::ptrdiff_t>(layers_.size() - 1));
    }

    std::size_t input_dim() const { return input_dim_; }
    std::size_t output_dim() const { return layers_.back().out_dim(); }
    const std::vector<AffineLayer<Real>>& layers() const { return layers_; }
    std::size_t depth() const { return layers_.size() - 1; }

    std::size_t max_dim() const {
        std::size_t m = input_dim_;
        for (const auto& l : layers_) m = std::max(m, l.out_dim());
        return m;
    }

private:
    std::size_t input_dim_ = 0;
    std::vector<AffineLayer<Real>> layers_;
};

using Network = BasicNetwork<double>;

template <class Real>
SizeReport size_report(const BasicNetwork<Real>& net) {
    SizeReport rep;
    const auto& layers = net.layers();
    rep.depth = layers.size() - 1;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const auto& l = layers[i];
        rep.params += static_cast<std::uint64_t>(l.out_dim()) * l.in_dim() + l.out_dim();
        if (i + 1 < layers.size()) {
            rep.widthvec.push_back(l.out_dim());
            rep.width = std::max(rep.width, l.out_dim());
        }
    }
    return rep;
}

/// Scratch buffers reused across evaluations of the same network.
template <class Real>
struct Workspace {
    std::vector<Real> a, b;
};

template <class Real>
void evaluate_into(const BasicNetwork<Real>& net, std::span<const Real> x, std::vector<Real>& out,
                   Workspace<Real>& ws) {
    if (x.size() != net.input_dim())
        throw NetError("input has length " + std::to_string(x.size()) + ", expected " +
                           std::to_string(net.input_dim()),
                       0);
    std::size_t m = net.max_dim();
    ws.a.resize(m);
    ws.b.resize(m);
    std::copy(x.begin(), x.end(), ws.a.begin());
    for (const auto& layer : net.layers()) {
        layer.apply(ws.a.data(), ws.b.data());
        std::swap(ws.a, ws.b);
    }
    out.assign(ws.a.begin(), ws.a.begin() + static_cast<std::ptrdiff_t>(net.output_dim()));
}

template <class Real>
std::vector<Real> evaluate(const BasicNetwork<Real>& net, std::span<const Real> x) {
    Workspace<Real> ws;
    std::vector<Real> out;
    evaluate_into(net, x, out, ws);
    return out;
}

template <class Real>
std::vector<Real> evaluate(const BasicNetwork<Real>& net, std::initializer_list<Real> x) {
    return evaluate(net, std::span<const Real>(x.begin(), x.size()));
}

// Scalar convenience for single-output networks.
template <class Real>
Real evaluate1(const BasicNetwork<Real>& net, std::initializer_list<Real> x) {
    return evaluate(net, x).front();
}

template <class Real>
Real evaluate1(const BasicNetwork<Real>& net, std::span<const Real> x) {
    return evaluate(net, x).front();
}

template <class Real>
Real evaluate1(const BasicNetwork<Real>& net, const std::vector<Real>& x) {
    return evaluate(net, std::span<const Real>(x)).front();
}

namespace detail {

// Layer computing outer(inner(x)) where inner's activation is ignored
// (it must be the identity); the result carries outer's activation.
template <class Real>
AffineLayer<Real> merge_layers(const AffineLayer<Real>& outer, const AffineLayer<Real>& inner) {
    std::size_t n = inner.in_dim();
    std::vector<Real> acc(n, Real(0));
    std::vector<char> touched(n, 0);
    std::vector<std::size_t> cols;
    std::vector<Entry<Real>> entries;
    std::vector<Real> bias(outer.out_dim(), Real(0));
    for (std::size_t r = 0; r < outer.out_dim(); ++r) {
        Real b = outer.bias()[r];
        for (std::size_t k = outer.row_begin(r); k < outer.row_end(r); ++k) {
            std::size_t mid = outer.col(k);
            const Real& w = outer.value(k);
            b += w * inner.bias()[mid];
            for (std::size_t q = inner.row_begin(mid); q < inner.row_end(mid); ++q) {
                std::size_t c = inner.col(q);
                if (!touched[c]) {
                    touched[c] = 1;
                    cols.push_back(c);
                }
                acc[c] += w * inner.value(q);
            }
        }
        bias[r] = b;
        for (std::size_t c : cols) {
            entries.push_back({r, c, acc[c]});
            acc[c] = Real(0);
            touched[c] = 0;
        }
        cols.clear();
    }
    return AffineLayer<Real>::from_entries(n, outer.out_dim(), std::move(entries), std::move(bias),
                                           outer.activation());
}

} // namespace detail

template <class Real>
BasicNetwork<Real> identity(std::size_t dim) {
    std::vector<Entry<Real>> e;
    for (std::size_t i = 0; i < dim; ++i) e.push_back({i, i, Real(1)});
    return {dim, {AffineLayer<Real>::from_entries(dim, dim, std::move(e), std::vector<Real>(dim, Real(0)),
                                                  Activation::identity)}};
}

template <class Real>
BasicNetwork<Real> affine(std::size_t in_dim, std::size_t out_dim, std::vector<Entry<Real>> entries,
                          std::vector<Real> bias) {
    return {in_dim, {AffineLayer<Real>::from_entries(in_dim, out_dim, std::move(entries), std::move(bias),
                                                     Activation::identity)}};
}

template <class Real>
BasicNetwork<Real> affine(const std::vector<std::vector<Real>>& weights, std::vector<Real> bias) {
    auto layer = AffineLayer<Real>::from_dense(weights, std::move(bias), Activation::identity);
    std::size_t in = layer.in_dim();
    return {in, {std::move(layer)}};
}

/// Network of the given depth returning its input, carrying each scalar in
/// one channel (nonnegative) or two channels (any sign).
template <class Real>
BasicNetwork<Real> passthrough(std::size_t dim, std::size_t depth, Sign sign) {
    if (depth == 0) return identity<Real>(dim);
    std::size_t ch = sign == Sign::nonnegative ? 1 : 2;
    std::size_t w = ch * dim;
    std::vector<AffineLayer<Real>> layers;
    std::vector<Entry<Real>> first;
    for (std::size_t i = 0; i < dim; ++i) {
        first.push_back({ch * i, i, Real(1)});
        if (ch == 2) first.push_back({ch * i + 1, i, Real(-1)});
    }
    layers.push_back(AffineLayer<Real>::from_entries(dim, w, std::move(first), std::vector<Real>(w, Real(0)),
                                                     Activation::relu));
    for (std::size_t t = 1; t < depth; ++t) {
        std::vector<Entry<Real>> e;
        for (std::size_t i = 0; i < w; ++i) e.push_back({i, i, Real(1)});
        layers.push_back(AffineLayer<Real>::from_entries(w, w, std::move(e), std::vector<Real>(w, Real(0)),
                                                         Activation::relu));
    }
    std::vector<Entry<Real>> last;
    for (std::size_t i = 0; i < dim; ++i) {
        last.push_back({i, ch * i, Real(1)});
        if (ch == 2) last.push_back({i, ch * i + 1, Real(-1)});
    }
    layers.push_back(AffineLayer<Real>::from_entries(w, dim, std::move(last), std::vector<Real>(dim, Real(0)),
                                                     Activation::identity));
    return {dim, std::move(layers)};
}

template <class Real>
BasicNetwork<Real> compose(const BasicNetwork<Real>& outer, const BasicNetwork<Real>& inner) {
    if (inner.output_dim() != outer.input_dim())
        throw NetError("compose: inner output " + std::to_string(inner.output_dim()) +
                       " does not match outer input " + std::to_string(outer.input_dim()));
    std::vector<AffineLayer<Real>> layers(inner.layers().begin(), inner.layers().end() - 1);
    layers.push_back(detail::merge_layers(outer.layers().front(), inner.layers().back()));
    layers.insert(layers.end(), outer.layers().begin() + 1, outer.layers().end());
    return {inner.input_dim(), std::move(layers)};
}

template <class Real>
BasicNetwork<Real> collapse_identity_layers(const BasicNetwork<Real>& net) {
    const auto& src = net.layers();
    std::vector<AffineLayer<Real>> layers;
    AffineLayer<Real> pending = src.front();
    for (std::size_t i = 1; i < src.size(); ++i) {
        if (pending.activation() == Activation::identity) {
            pending = detail::merge_layers(src[i], pending);
        } else {
            layers.push_back(std::move(pending));
            pending = src[i];
        }
    }
    layers.push_back(std::move(pending));
    return {net.input_dim(), std::move(layers)};
}

/// Extends `net` to exactly `depth` hidden layers with passthrough channels.
template <class Real>
BasicNetwork<Real> pad_depth(const BasicNetwork<Real>& net, std::size_t depth, Sign sign) {
    if (net.depth() > depth) throw NetError("pad_depth: network already deeper than target");
    if (net.depth() == depth) return net;
    return compose(passthrough<Real>(net.output_dim(), depth - net.depth(), sign), net);
}

/// Side-by-side stacking; outputs are concatenated in order. `signs` gives
/// the padding encoding per branch (default: any sign).
template <class Real>
BasicNetwork<Real> parallel(std::span<const BasicNetwork<Real>> nets, bool shared_input,
                            std::span<const Sign> signs = {}) {
    if (nets.empty()) throw NetError("parallel: empty network list");
    if (!signs.empty() && signs.size() != nets.size()) throw NetError("parallel: one sign per branch expected");
    std::size_t depth = 0, in_total = 0;
    for (const auto& n : nets) {
        depth = std::max(depth, n.depth());
        if (shared_input && n.input_dim() != nets.front().input_dim())
            throw NetError("parallel: shared input requires equal input dims");
        in_total += n.input_dim();
    }
    std::vector<BasicNetwork<Real>> padded;
    padded.reserve(nets.size());
    for (std::size_t i = 0; i < nets.size(); ++i) {
        Sign sg = signs.empty() ? Sign::any : signs[i];
        auto flat = collapse_identity_layers(nets[i]);
        padded.push_back(pad_depth(flat, depth, sg));
    }
    std::size_t input_dim = shared_input ? nets.front().input_dim() : in_total;
    std::vector<AffineLayer<Real>> layers;
    for (std::size_t t = 0; t <= depth; ++t) {
        std::vector<Entry<Real>> entries;
        std::vector<Real> bias;
        std::size_t row_off = 0, col_off = 0, in_dim = 0;
        for (const auto& n : padded) {
            const auto& l = n.layers()[t];
            for (auto e : l.entries()) {
                std::size_t c = (t == 0 && shared_input) ? e.col : e.col + col_off;
                entries.push_back({e.row + row_off, c, e.value});
            }
            bias.insert(bias.end(), l.bias().begin(), l.bias().end());
            row_off += l.out_dim();
            col_off += l.in_dim();
        }
        in_dim = (t == 0) ? input_dim : layers.back().out_dim();
        Activation act = t == depth ? Activation::identity : Activation::relu;
        layers.push_back(AffineLayer<Real>::from_entries(in_dim, row_off, std::move(entries), std::move(bias), act));
    }
    return {input_dim, std::move(layers)};
}

template <class Real>
BasicNetwork<Real> parallel(std::initializer_list<BasicNetwork<Real>> nets, bool shared_input,
                            std::initializer_list<Sign> signs = {}) {
    std::vector<BasicNetwork<Real>> v(nets);
    std::vector<Sign> s(signs);
    return parallel<Real>(std::span<const BasicNetwork<Real>>(v), shared_input, std::span<const Sign>(s));
}

/// Multiplies every output by `c` (folded into the output layer).
template <class Real>
BasicNetwork<Real> scale_output(const BasicNetwork<Real>& net, Real c) {
    std::size_t m = net.output_dim();
    std::vector<Entry<Real>> e;
    for (std::size_t i = 0; i < m; ++i) e.push_back({i, i, c});
    return compose(affine<Real>(m, m, std::move(e), std::vector<Real>(m, Real(0))), net);
}

/// Copy of `net` with W[row, col] of layer `layer` shifted by `delta`.
template <class Real>
BasicNetwork<Real> perturb_weight(const BasicNetwork<Real>& net, std::size_t layer, std::size_t row, std::size_t col,
                                  Real delta) {
    if (layer >= net.layers().size()) throw NetError("layer index out of range", layer);
    auto layers = net.layers();
    const auto& old = layers[layer];
    if (row >= old.out_dim() || col >= old.in_dim()) throw NetError("weight index out of range", layer);
    auto e = old.entries();
    e.push_back({row, col, delta});
    layers[layer] = AffineLayer<Real>::from_entries(old.in_dim(), old.out_dim(), std::move(e), old.bias(),
                                                    old.activation());
    return BasicNetwork<Real>(net.input_dim(), std::move(layers));
}

} // namespace relu_forge
