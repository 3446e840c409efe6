#pragma once

#include <stdexcept>
#include <string>

namespace weylscat {

// Base for everything that can go wrong while evaluating the model at a
// spectral point. Callers that sweep a grid catch these per point; anything
// escaping a sweep is a genuine failure, not an excluded energy.
struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Profile or configuration data violates a structural invariant.
struct invalid_profile : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Propagation overflowed (lambda far outside the usable range).
struct nonfinite_state : numerical_error {
    using numerical_error::numerical_error;
};

// |psi_lambda(x_r)| ~ 0: lambda is numerically a Dirichlet eigenvalue of the
// internal operator, where M(lambda) has a pole.
struct dirichlet_pole : numerical_error {
    using numerical_error::numerical_error;
};

// lambda sits at a lead threshold (tail potential); the channel rank changes
// there and the boundary value of the lead coefficient is not taken.
struct threshold_energy : numerical_error {
    using numerical_error::numerical_error;
};

// Lead transport produced |u| ~ 0 at the interface (pole of the lead
// coefficient below the threshold).
struct degenerate_interface : numerical_error {
    using numerical_error::numerical_error;
};

// Eigenvalue search could not reconcile the oscillation count with the
// residual sign changes on some interval.
struct bracket_failure : numerical_error {
    using numerical_error::numerical_error;
};

// M + tau numerically singular at a real energy. The dissipative comparison
// operator has no real eigenvalues, so this indicates a numerical pathology.
struct singular_coupling : numerical_error {
    using numerical_error::numerical_error;
};

// det(M + Re tau) ~ 0: a frozen-family eigenvalue collides with the sweep
// energy; the grid point is excluded, not interpolated.
struct frozen_resonance : numerical_error {
    using numerical_error::numerical_error;
};

// No open channel at this energy: S and R are empty.
struct channel_void : numerical_error {
    using numerical_error::numerical_error;
};

// I + S numerically singular (-1 in the spectrum of S).
struct cayley_pole : numerical_error {
    using numerical_error::numerical_error;
};

// Two trajectories were combined that do not live on the same mesh.
struct mesh_mismatch : std::logic_error {
    using std::logic_error::logic_error;
};

}  // namespace weylscat
