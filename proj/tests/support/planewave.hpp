#pragma once

#include <cmath>

namespace testsupport {

// Plane-wave transfer-matrix transmission through a rectangular barrier of
// height v0 and width length between identical free leads, in units with
// hbar^2/(2m) = 1 (m = 1/2). Textbook closed form, independent of any
// Weyl-function machinery; the tunnelling and over-barrier branches join
// continuously at energy = v0.
inline double barrier_transmission(double v0, double length, double energy) {
    if (energy <= 0.0) return 0.0;
    const double gap = v0 - energy;
    if (gap == 0.0) {
        const double q = v0 * length * length / (4.0 * energy);
        return 1.0 / (1.0 + v0 * q);
    }
    if (gap > 0.0) {
        const double s = std::sinh(std::sqrt(gap) * length);
        return 1.0 / (1.0 + v0 * v0 * s * s / (4.0 * energy * gap));
    }
    const double s = std::sin(std::sqrt(-gap) * length);
    return 1.0 / (1.0 + v0 * v0 * s * s / (4.0 * energy * (-gap)));
}

}  // namespace testsupport
