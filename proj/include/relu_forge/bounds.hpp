#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace relu_forge {

enum class BoundKind {
    Main,
    Corollary,
    Gap,
    MainGap,
    Square,
    ProductUnit,
    ProductInterval,
    ProductMulti,
    Monomial,
    Step,
    BitCumsum,
    BitSingle,
    PointMatch,
    Mid,
};

struct BoundParams {
    int N = 1;
    int L = 1;
    int s = 1;
    int d = 1;
    int k = 2;
    double a = 0.0;
    double b = 1.0;
    double csnorm = 1.0;
    double eps = 0.0;
    double omega = 0.0;
};

struct Bound {
    double width;
    double depth;
    double error;
};

/// Closed-form width, depth and sup-error budgets.
Bound bounds(BoundKind kind, const BoundParams& p);

std::string to_string(BoundKind kind);
std::optional<BoundKind> parse_bound_kind(std::string_view name);

} // namespace relu_forge
