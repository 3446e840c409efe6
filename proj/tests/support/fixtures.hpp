#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "weylscat/profile.hpp"

namespace testsupport {

inline constexpr double kPi = std::numbers::pi;

// Free system on (0, pi): m = 1/2, v = 0, so the equation is -u'' = lambda u
// with Dirichlet spectrum {1, 4, 9, ...} and Neumann spectrum {0, 1, 4, ...}.
inline weylscat::coefficient_profile f0_profile() {
    return weylscat::coefficient_profile(
        0.0, kPi, {{kPi, weylscat::constant_coeff{0.5, 0.0}}});
}

// Rectangular barrier: v = 2 on (0, pi), m = 1/2.
inline weylscat::coefficient_profile b1_profile() {
    return weylscat::coefficient_profile(
        0.0, kPi, {{kPi, weylscat::constant_coeff{0.5, 2.0}}});
}

// Two-segment internal region with a mass jump at pi/2.
inline weylscat::coefficient_profile two_segment_profile() {
    return weylscat::coefficient_profile(
        0.0, kPi,
        {{kPi / 2.0, weylscat::constant_coeff{0.5, 0.0}},
         {kPi / 2.0, weylscat::constant_coeff{1.0 / 3.0, 1.5}}});
}

// Linear ramp v(x) = x on (0, 1), m = 1/2, as a sampled segment.
inline weylscat::coefficient_profile ramp_profile(std::size_t n_samples = 2) {
    std::vector<double> m(n_samples, 0.5), v(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i)
        v[i] = static_cast<double>(i) / static_cast<double>(n_samples - 1);
    return weylscat::coefficient_profile(
        0.0, 1.0, {{1.0, weylscat::sampled_coeff{std::move(m), std::move(v)}}});
}

}  // namespace testsupport
