#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "relu_forge/assembly.hpp"
#include "relu_forge/bounds.hpp"
#include "relu_forge/double_double.hpp"
#include "relu_forge/net_ir.hpp"

namespace relu_forge {

enum class RegionFilter { full_cube, exclude_trifling };

/// Lattice j/(n−1) per axis (mapped to [lo, hi]) plus one seeded uniform
/// sample per lattice cell.
struct GridSpec {
    int d = 1;
    int points_per_axis = 2;
    RegionFilter filter = RegionFilter::full_cube;
    TriflingRegion region{};
    std::uint64_t seed = 1;
    bool jitter = true;
    double lo = 0.0;
    double hi = 1.0;

    void validate() const;
    std::size_t lattice_size() const;
    std::size_t candidate_count() const;
    // Candidate point idx, false when it falls in the excluded region.
    bool point(std::size_t idx, std::span<double> x) const;
    double pitch() const { return (hi - lo) / (points_per_axis - 1); }
};

struct ScanResult {
    double measured = 0.0;
    std::vector<double> argmax;
    std::size_t samples = 0;
};

/// Worker count: hardware concurrency capped by RELU_FORGE_THREADS.
unsigned thread_count();

namespace detail {

inline bool better(double e, std::span<const double> x, const ScanResult& cur) {
    if (cur.argmax.empty() || e > cur.measured) return true;
    if (e < cur.measured) return false;
    return std::lexicographical_compare(x.begin(), x.end(), cur.argmax.begin(), cur.argmax.end());
}

inline void merge(ScanResult& into, const ScanResult& part) {
    into.samples += part.samples;
    if (part.argmax.empty()) return;
    if (better(part.measured, part.argmax, into)) {
        into.measured = part.measured;
        into.argmax = part.argmax;
    }
}

} // namespace detail

/// Runs fn(x) -> error over every point in [0, count) produced by point(i, x),
/// in parallel chunks; ties resolve to the lexicographically smallest point.
template <class PointFn, class ErrorFn>
ScanResult parallel_scan(std::size_t count, std::size_t dim, PointFn point, ErrorFn error_fn) {
    unsigned threads = std::max(1u, std::min<unsigned>(thread_count(), static_cast<unsigned>(count / 256 + 1)));
    std::vector<ScanResult> parts(threads);
    std::atomic<std::size_t> next{0};
    const std::size_t chunk = 1024;
    auto work = [&](unsigned t) {
        auto err = error_fn();
        std::vector<double> x(dim);
        ScanResult& r = parts[t];
        for (std::size_t start; (start = next.fetch_add(chunk)) < count;) {
            std::size_t end = std::min(count, start + chunk);
            for (std::size_t i = start; i < end; ++i) {
                if (!point(i, std::span<double>(x))) continue;
                double e = err(std::span<const double>(x));
                if (std::isnan(e)) e = INFINITY;
                ++r.samples;
                if (detail::better(e, x, r)) {
                    r.measured = e;
                    r.argmax = x;
                }
            }
        }
    };
    if (threads == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
        for (auto& th : pool) th.join();
    }
    ScanResult out;
    for (const auto& p : parts) detail::merge(out, p);
    return out;
}

/// max |net(x) − target(x)| over the grid, computed in Real arithmetic.
template <class Real, class Target>
ScanResult scan_error(const BasicNetwork<Real>& net, const GridSpec& grid, Target target) {
    grid.validate();
    if (net.input_dim() != static_cast<std::size_t>(grid.d) || net.output_dim() != 1)
        throw std::invalid_argument("scan_error: network must map R^" + std::to_string(grid.d) + " to R");
    return parallel_scan(
        grid.candidate_count(), static_cast<std::size_t>(grid.d),
        [&](std::size_t i, std::span<double> x) { return grid.point(i, x); },
        [&] {
            return [&, ws = Workspace<Real>(), in = std::vector<Real>(grid.d),
                    out = std::vector<Real>()](std::span<const double> x) mutable {
                for (std::size_t j = 0; j < x.size(); ++j) in[j] = Real(x[j]);
                evaluate_into(net, std::span<const Real>(in), out, ws);
                return to_double(abs_value(Real(out[0] - target(x))));
            };
        });
}

/// Sup error of a network against a target's evaluation oracle.
ScanResult sup_error(const Network& net, const TargetFunction& target, const GridSpec& grid);

struct CertifyRequest {
    std::string kind = "square";
    int N = 1;
    int L = 1;
    int s = 1;
    int d = 1;
    int k = 2;
    double a = -3.0;
    double b = 3.0;
    std::optional<double> delta;
    std::string target;
    std::vector<unsigned> alpha;
    int grid = 0; // points per axis, 0 for the kind's default
    std::uint64_t seed = 1;

    void validate() const;
};

/// Kinds accepted by certify and build.
std::vector<std::string> certify_kinds();

struct Certificate {
    CertifyRequest request;
    BoundKind bound_kind{};
    SizeReport size;
    Bound bound{};
    double tolerance = 0.0;
    double measured = 0.0;
    std::vector<double> argmax;
    std::size_t samples = 0;
    double pitch = 0.0;
    double wall_seconds = 0.0;
    bool size_ok = false;
    bool pass = false;

    std::string to_json(bool with_time = true) const;
    std::string csv_row() const;
    static std::string csv_header();
};

/// Builds the network for a request.
Network build_network(const CertifyRequest& req);

/// Builds (or takes `net`), measures and compares against the closed-form bound.
Certificate certify(const CertifyRequest& req, const Network* net = nullptr);

} // namespace relu_forge
