#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "relu_forge/assembly.hpp"

namespace relu_forge {

/// Registered preset names: constant, linear, monomial (alias polynomial),
/// sinpi, gauss-bump.
std::vector<std::string> target_names();

/// Preset on [0,1]^d with exact derivatives of every order and a modulus of
/// continuity. Throws std::invalid_argument on an unknown name.
TargetFunction make_target(std::string_view name, int d, int s);

/// Target whose derivatives come from central differences with step h.
/// csnorm is estimated by scanning `samples` random points per derivative.
TargetFunction finite_difference_target(std::string name, int d, int s,
                                        std::function<double(std::span<const double>)> eval, double h = 1e-4,
                                        int samples = 4096);

} // namespace relu_forge
