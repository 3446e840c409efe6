#pragma once

#include <optional>

#include "weylscat/mat2.hpp"
#include "weylscat/profile.hpp"
#include "weylscat/propagator.hpp"

namespace weylscat {

// Internal Weyl matrix at one spectral point, with the fundamental-solution
// traces it was assembled from. M is complex symmetric; real for real lambda
// away from the Dirichlet spectrum; Im M >= 0 in the upper half plane.
struct weyl_sample {
    cplx lambda;
    mat2 M;
    cplx phi_r, p_phi_r, psi_r, p_psi_r;
};

enum class lead_side { left, right };

// Semi-infinite lead: a constant tail (m, v), optionally preceded by a
// compact transition region next to the interface. The transition profile's
// outer end must carry the tail coefficients (continuity into the tail).
struct lead_spec {
    lead_side side = lead_side::left;
    double tail_m = 0.5;
    double tail_v = 0.0;
    std::optional<coefficient_profile> transition;
};

// Throws invalid_profile when the transition does not join the tail values
// at its outer end (left lead: first segment start; right lead: last end).
void validate_lead(const lead_spec& lead);

// Diagonal lead Weyl function tau(lambda) = diag(m_l, m_r) at real energy,
// split into Re/Im with the open-channel structure. A channel is open when
// Im of its entry exceeds threshold_eps; sqrt_im entries are 0 for closed
// channels so that rank(D) = number of open channels.
struct tau_sample {
    double lambda;
    cplx m_l, m_r;
    double re_l, re_r;
    double im_l, im_r;
    double sqrt_im_l, sqrt_im_r;
    bool open_left, open_right;

    int n_open() const { return (open_left ? 1 : 0) + (open_right ? 1 : 0); }
};

// M(lambda) = (1/psi_r) [[-phi_r, 1], [1, -p_psi_r]] from endpoint traces.
// Throws dirichlet_pole when |psi_r| <= pole_eps * max(1, |phi_r|).
weyl_sample internal_weyl(const coefficient_profile& profile, cplx lambda,
                          double pole_eps = 1e-9);

// gamma(lambda) applied to boundary data xi: the solution of the equation
// with Gamma_0 f = xi, as a mesh trajectory (u and p components filled).
mesh_traj gamma_field_apply(const coefficient_profile& profile, cplx lambda,
                            const cvec2& xi, mesh_ptr mesh = nullptr,
                            double pole_eps = 1e-9);

// Closed-form coefficient of a constant half-line lead. Principal branch:
// positive imaginary part off the real axis, i*sqrt(lambda - v)-type boundary
// values on the cut, -sqrt((v - lambda)/2m) below the threshold.
cplx constant_lead_m(double tail_m, double tail_v, cplx lambda);

// Titchmarsh-Weyl coefficient of one lead at real energy (boundary value from
// above). Constant tails are evaluated in closed form; a transition region is
// crossed by propagating the decaying tail solution to the interface.
// Throws threshold_energy at the tail potential and degenerate_interface if
// the transported solution vanishes at the interface.
cplx lead_weyl(const lead_spec& lead, double lambda,
               double threshold_eps = 1e-9);

tau_sample sample_tau(const lead_spec& left, const lead_spec& right,
                      double lambda, double threshold_eps = 1e-9);

}  // namespace weylscat
