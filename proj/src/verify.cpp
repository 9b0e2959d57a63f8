#include "relu_forge/verify.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "relu_forge/encoders.hpp"
#include "relu_forge/primitives.hpp"
#include "relu_forge/targets.hpp"

namespace relu_forge {

namespace {

std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::size_t checked_pow(std::size_t base, int e) {
    std::size_t r = 1;
    for (int i = 0; i < e; ++i) {
        if (base != 0 && r > std::numeric_limits<std::size_t>::max() / base)
            throw std::invalid_argument("grid: point count overflows");
        r *= base;
    }
    return r;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

void GridSpec::validate() const {
    if (d < 1) throw std::invalid_argument("grid: d must be >= 1");
    if (points_per_axis < 2) throw std::invalid_argument("grid: points_per_axis must be >= 2");
    if (!(lo < hi)) throw std::invalid_argument("grid: lo must be < hi");
    if (filter == RegionFilter::exclude_trifling) region.validate();
    (void)candidate_count();
}

std::size_t GridSpec::lattice_size() const { return checked_pow(static_cast<std::size_t>(points_per_axis), d); }

std::size_t GridSpec::candidate_count() const {
    std::size_t n = lattice_size();
    return jitter ? n + checked_pow(static_cast<std::size_t>(points_per_axis - 1), d) : n;
}

bool GridSpec::point(std::size_t idx, std::span<double> x) const {
    const std::size_t n = static_cast<std::size_t>(points_per_axis);
    const double step = pitch();
    std::size_t lattice = lattice_size();
    if (idx < lattice) {
        for (int j = 0; j < d; ++j) {
            std::size_t q = idx % n;
            idx /= n;
            x[j] = q + 1 == n ? hi : lo + q * step;
        }
    } else {
        std::size_t cell = idx - lattice;
        std::uint64_t h = mix(seed ^ mix(cell));
        for (int j = 0; j < d; ++j) {
            std::size_t q = cell % (n - 1);
            cell /= (n - 1);
            h = mix(h);
            double u = double(h >> 11) * 0x1.0p-53;
            x[j] = std::min(hi, lo + (q + u) * step);
        }
    }
    if (filter == RegionFilter::exclude_trifling && region.contains(std::span<const double>(x.data(), x.size())))
        return false;
    return true;
}

unsigned thread_count() {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("RELU_FORGE_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && v >= 1) hw = std::min<unsigned>(hw, static_cast<unsigned>(v));
    }
    return hw;
}

ScanResult sup_error(const Network& net, const TargetFunction& target, const GridSpec& grid) {
    if (target.d != grid.d) throw std::invalid_argument("sup_error: target dimension differs from grid");
    return scan_error(net, grid, [&](std::span<const double> x) { return target.eval(x); });
}

void CertifyRequest::validate() const {
    if (N < 1) throw std::invalid_argument("N must be >= 1");
    if (L < 1) throw std::invalid_argument("L must be >= 1");
    if (s < 1) throw std::invalid_argument("s must be >= 1");
    if (d < 1) throw std::invalid_argument("d must be >= 1");
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (grid != 0 && grid < 2) throw std::invalid_argument("grid must be >= 2");
    if (delta && !(*delta > 0)) throw std::invalid_argument("delta must be positive");
    auto kinds = certify_kinds();
    if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end())
        throw std::invalid_argument("unknown kind '" + kind + "'");
    if ((kind == "smooth" || kind == "core") && target.empty())
        throw std::invalid_argument("kind '" + kind + "' needs a target");
    if (kind == "product-interval" && !(a < b)) throw std::invalid_argument("product-interval needs a < b");
    if (kind == "product-multi" && k < 2) throw std::invalid_argument("product-multi needs k >= 2");
}

std::vector<std::string> certify_kinds() {
    return {"square",     "product",   "product-interval", "product-multi", "monomial", "step", "bit-cumsum",
            "bit-single", "point-match", "mid",             "core",          "smooth"};
}

namespace {

struct Plan {
    BoundKind bound_kind{};
    BoundParams params;
    GridSpec grid;
    std::function<Network()> build;
    std::function<ScanResult(const Network&)> measure;
};

int default_points(int d) { return d == 1 ? 10001 : d == 2 ? 101 : d == 3 ? 32 : 8; }

MultiIndex request_alpha(const CertifyRequest& req) {
    if (!req.alpha.empty()) return MultiIndex(req.alpha);
    std::vector<unsigned> a(static_cast<std::size_t>(req.d), 0);
    a[0] = static_cast<unsigned>(req.k);
    return MultiIndex(a);
}

// Integer-input kinds: exhaustive scan over a rectangular index set.
ScanResult scan_integers(const Network& net, std::vector<std::size_t> extent,
                         std::function<double(std::span<const double>)> target) {
    std::size_t total = 1;
    for (auto e : extent) total *= e;
    if (net.input_dim() != extent.size() || net.output_dim() != 1)
        throw std::invalid_argument("network shape does not match the integer grid");
    return parallel_scan(
        total, extent.size(),
        [&](std::size_t i, std::span<double> x) {
            for (std::size_t j = extent.size(); j-- > 0;) {
                x[j] = double(i % extent[j]);
                i /= extent[j];
            }
            return true;
        },
        [&] {
            return [&, ws = Workspace<double>(), out = std::vector<double>()](std::span<const double> x) mutable {
                evaluate_into(net, x, out, ws);
                return std::abs(out[0] - target(x));
            };
        });
}

Plan make_plan(const CertifyRequest& req) {
    req.validate();
    Plan p;
    const SizeBudget budget{req.N, req.L};
    p.params.N = req.N;
    p.params.L = req.L;
    p.params.s = req.s;
    p.params.d = req.d;
    p.params.k = req.k;
    p.grid.seed = req.seed;
    auto grid_scan = [&p](auto target) {
        return [grid = p.grid, target](const Network& net) { return scan_error(net, grid, target); };
    };
    const std::string& kind = req.kind;
    std::mt19937_64 rng(req.seed);

    if (kind == "square") {
        p.bound_kind = BoundKind::Square;
        p.params.d = 1;
        p.grid.d = 1;
        p.grid.points_per_axis = req.grid ? req.grid : 100001;
        p.build = [budget] { return square_approx<double>(budget); };
        p.measure = grid_scan([](std::span<const double> x) { return x[0] * x[0]; });
    } else if (kind == "product" || kind == "product-interval") {
        bool unit = kind == "product";
        p.bound_kind = unit ? BoundKind::ProductUnit : BoundKind::ProductInterval;
        p.params.d = 2;
        p.params.a = unit ? 0.0 : req.a;
        p.params.b = unit ? 1.0 : req.b;
        p.grid.d = 2;
        p.grid.lo = p.params.a;
        p.grid.hi = p.params.b;
        p.grid.points_per_axis = req.grid ? req.grid : 401;
        double a = req.a, b = req.b;
        if (unit)
            p.build = [budget] { return product_unit<double>(budget); };
        else
            p.build = [budget, a, b] { return product_interval<double>(a, b, budget); };
        p.measure = grid_scan([](std::span<const double> x) { return x[0] * x[1]; });
    } else if (kind == "product-multi") {
        p.bound_kind = BoundKind::ProductMulti;
        p.params.d = req.k;
        p.grid.d = req.k;
        p.grid.points_per_axis = req.grid ? req.grid : (req.k == 2 ? 401 : default_points(req.k));
        unsigned k = static_cast<unsigned>(req.k);
        p.build = [budget, k] { return product_multi<double>(k, budget); };
        p.measure = grid_scan([](std::span<const double> x) {
            double v = 1;
            for (double t : x) v *= t;
            return v;
        });
    } else if (kind == "monomial") {
        auto alpha = request_alpha(req);
        int d = static_cast<int>(alpha.dim());
        unsigned k = std::max(alpha.order(), 1u);
        p.bound_kind = BoundKind::Monomial;
        p.params.d = d;
        p.params.k = static_cast<int>(k);
        p.grid.d = d;
        p.grid.points_per_axis = req.grid ? req.grid : default_points(d);
        p.build = [budget, alpha, k] { return monomial<double>(alpha, k, budget); };
        p.measure = grid_scan([alpha](std::span<const double> x) {
            double v = 1;
            for (std::size_t j = 0; j < x.size(); ++j) v *= std::pow(x[j], alpha[j]);
            return v;
        });
    } else if (kind == "step") {
        const int K = step_cells(req.d, budget);
        const double delta = req.delta.value_or(1.0 / (3.0 * K));
        p.bound_kind = BoundKind::Step;
        p.grid.d = 1;
        p.grid.points_per_axis = req.grid ? req.grid : std::max(10001, 40 * K + 1);
        p.grid.filter = RegionFilter::exclude_trifling;
        p.grid.region = {1, K, delta};
        int d = req.d;
        p.build = [d, budget, delta] { return step_function(d, budget, delta); };
        p.measure = grid_scan([K](std::span<const double> x) {
            return std::min(std::floor(x[0] * K + 1e-9), double(K - 1));
        });
    } else if (kind == "bit-cumsum") {
        p.bound_kind = BoundKind::BitCumsum;
        std::size_t rows = static_cast<std::size_t>(req.N) * req.N * req.L;
        BitTable table(rows, static_cast<std::size_t>(req.L));
        for (auto& b : table.bits) b = static_cast<std::uint8_t>(rng() & 1u);
        p.build = [table, budget] { return bit_extract_cumsum(table, budget.N, budget.L); };
        p.measure = [table](const Network& net) {
            return scan_integers(net, {table.rows, table.cols}, [&table](std::span<const double> x) {
                double sum = 0;
                for (std::size_t l = 0; l <= std::size_t(x[1]); ++l) sum += table.at(std::size_t(x[0]), l);
                return sum;
            });
        };
    } else if (kind == "bit-single" || kind == "point-match") {
        std::size_t n = static_cast<std::size_t>(req.N) * req.N * req.L * req.L;
        std::vector<double> values(n);
        if (kind == "bit-single") {
            p.bound_kind = BoundKind::BitSingle;
            std::vector<std::uint8_t> bits(n);
            for (std::size_t i = 0; i < n; ++i) values[i] = bits[i] = static_cast<std::uint8_t>(rng() & 1u);
            p.build = [bits, budget] { return bit_extract_single(bits, budget.N, budget.L); };
        } else {
            p.bound_kind = BoundKind::PointMatch;
            std::uniform_real_distribution<double> u(0.0, 1.0);
            for (auto& v : values) v = u(rng);
            int s = req.s;
            p.build = [values, s, budget] { return point_match({values, s}, budget.N, budget.L); };
        }
        p.measure = [values](const Network& net) {
            return scan_integers(net, {values.size()},
                                 [&values](std::span<const double> x) { return values[std::size_t(x[0])]; });
        };
    } else if (kind == "mid") {
        p.bound_kind = BoundKind::Mid;
        p.grid.d = 3;
        p.grid.lo = -1.0;
        p.grid.hi = 1.0;
        p.grid.points_per_axis = req.grid ? req.grid : 41;
        p.build = [] { return mid_network(); };
        p.measure = grid_scan([](std::span<const double> x) {
            return std::max(std::min(x[0], x[1]), std::min(std::max(x[0], x[1]), x[2]));
        });
    } else {
        auto f = make_target(req.target, req.d, req.s);
        p.grid.d = req.d;
        p.grid.points_per_axis =
            req.grid ? req.grid : (req.d == 1 && req.target == "sinpi" ? 100001 : default_points(req.d));
        if (kind == "core") {
            if (f.csnorm == 0) throw std::invalid_argument("kind 'core' needs a nonzero target");
            auto unit = scaled_target(f, f.csnorm);
            double delta = req.delta.value_or(choose_delta(f, budget));
            p.bound_kind = BoundKind::MainGap;
            p.grid.filter = RegionFilter::exclude_trifling;
            p.grid.region = {req.d, step_cells(req.d, budget), delta};
            p.build = [unit, budget, delta] { return build_taylor_core(unit, budget, delta).net; };
            p.measure = grid_scan([unit](std::span<const double> x) { return unit.eval(x); });
        } else {
            if (req.delta) throw std::invalid_argument("kind 'smooth' chooses delta itself");
            p.bound_kind = BoundKind::Main;
            p.params.csnorm = f.csnorm;
            p.build = [f, budget] { return approx_smooth(f, budget).net; };
            p.measure = grid_scan([f](std::span<const double> x) { return f.eval(x); });
        }
    }
    if (p.measure && p.grid.d >= 1 && (kind != "bit-cumsum" && kind != "bit-single" && kind != "point-match"))
        p.grid.validate();
    return p;
}

} // namespace

Network build_network(const CertifyRequest& req) { return make_plan(req).build(); }

Certificate certify(const CertifyRequest& req, const Network* net) {
    auto t0 = std::chrono::steady_clock::now();
    Plan plan = make_plan(req);
    Network built = net ? *net : plan.build();
    Certificate c;
    c.request = req;
    c.bound_kind = plan.bound_kind;
    c.bound = bounds(plan.bound_kind, plan.params);
    c.size = size_report(built);
    auto scan = plan.measure(built);
    c.measured = scan.measured;
    c.argmax = scan.argmax;
    c.samples = scan.samples;
    bool integer_kind = req.kind == "bit-cumsum" || req.kind == "bit-single" || req.kind == "point-match";
    c.pitch = integer_kind ? 1.0 : plan.grid.pitch();
    c.tolerance = c.bound.error == 0 ? 1e-9 : 0.0;
    c.size_ok = double(c.size.width) <= std::floor(c.bound.width + 1e-9) &&
                double(c.size.depth) <= std::floor(c.bound.depth + 1e-9);
    c.pass = c.size_ok && c.measured <= c.bound.error + c.tolerance;
    c.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return c;
}

std::string Certificate::to_json(bool with_time) const {
    nlohmann::ordered_json j;
    j["kind"] = request.kind;
    j["bound_kind"] = to_string(bound_kind);
    nlohmann::ordered_json params;
    params["N"] = request.N;
    params["L"] = request.L;
    params["s"] = request.s;
    params["d"] = request.d;
    params["k"] = request.k;
    if (request.kind == "product-interval") {
        params["a"] = request.a;
        params["b"] = request.b;
    }
    if (request.delta) params["delta"] = *request.delta;
    if (!request.target.empty()) params["target"] = request.target;
    if (!request.alpha.empty()) params["alpha"] = request.alpha;
    params["seed"] = request.seed;
    j["params"] = params;
    j["size"] = {{"width", size.width}, {"depth", size.depth}, {"params", size.params}, {"widthvec", size.widthvec}};
    j["bound"] = {{"width", bound.width}, {"depth", bound.depth}, {"error", bound.error}};
    j["tolerance"] = tolerance;
    j["measured"] = measured;
    j["argmax"] = argmax;
    j["samples"] = samples;
    j["pitch"] = pitch;
    if (with_time) j["wall_seconds"] = wall_seconds;
    j["size_ok"] = size_ok;
    j["result"] = pass ? "PASS" : "FAIL";
    return j.dump(2);
}

std::string Certificate::csv_header() { return "kind,s,d,N,L,width,depth,bound,measured,pass"; }

std::string Certificate::csv_row() const {
    std::string kind = request.kind;
    if (!request.target.empty()) kind += ":" + request.target;
    return kind + "," + std::to_string(request.s) + "," + std::to_string(request.d) + "," + std::to_string(request.N) +
           "," + std::to_string(request.L) + "," + std::to_string(size.width) + "," + std::to_string(size.depth) +
           "," + fmt(bound.error) + "," + fmt(measured) + "," + (pass ? "PASS" : "FAIL");
}

} // namespace relu_forge
