#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "weylscat/mat2.hpp"
#include "weylscat/profile.hpp"

namespace weylscat {

// Solution state in quasi-derivative form: p = (1/(2m)) u'. p is the
// variable that stays continuous across mass discontinuities.
struct quasi_state {
    cplx u{0.0};
    cplx p{0.0};
};

// Solution operator of the first-order system u' = 2m p, p' = (v - lambda) u
// between two positions. det = 1 (Wronskian conservation).
struct transfer_matrix {
    mat2 t;
    cplx lambda;
    double from;
    double to;

    quasi_state apply(const quasi_state& s) const {
        return {t.a * s.u + t.b * s.p, t.c * s.u + t.d * s.p};
    }
};

// Default RK4 cap for sampled segments: profile length / 2000.
double default_h_max(const coefficient_profile& profile);

// Exact propagator across a constant-coefficient stretch of width s:
//   u(s) = cos(ks) u0 + 2m (sin(ks)/k) p0
//   p(s) = -(k/2m) sin(ks) u0 + cos(ks) p0,   k = sqrt(2m(lambda - v)).
// All entries are even in k, so no branch choice enters; k -> 0 falls back
// to the linear solution u = u0 + 2m s p0.
mat2 constant_step(double m, double v, cplx lambda, double s);

// Transfer matrix of one segment (exact for constant coefficients, fixed-step
// RK4 with step <= h_max for sampled ones).
mat2 segment_transfer(const segment& seg, cplx lambda, double h_max);

// Visit the RK4 substep states inside a sampled segment, including the
// endpoints: visit(s_local, state). Used for sign counting and quadrature at
// the solver's own resolution.
void walk_sampled(const sampled_coeff& coeff, double width, cplx lambda,
                  quasi_state start, double h_max,
                  const std::function<void(double, const quasi_state&)>& visit);

// Propagate a state across the whole profile. h_max <= 0 selects the default.
// Throws nonfinite_state if any segment output overflows.
std::pair<quasi_state, transfer_matrix> propagate(
    const coefficient_profile& profile, cplx lambda, const quasi_state& state,
    double h_max = 0.0);

// A trajectory sampled on a shared mesh. Node i holds the state at mesh->x[i].
struct mesh_traj {
    mesh_ptr mesh;
    std::vector<quasi_state> s;
};

// Propagate and record the state at every mesh node.
quasi_state propagate_on_mesh(const coefficient_profile& profile, cplx lambda,
                              const quasi_state& state, const mesh_ptr& mesh,
                              mesh_traj& out, double h_max = 0.0);

// Fundamental solutions with the triplet's initial data at x_l:
// phi: (u,p) = (1,0), psi: (u,p) = (0,1). Trajectories retained for
// quadrature; endpoint traces exposed directly.
struct fundamental_pair {
    cplx lambda;
    mesh_traj phi;
    mesh_traj psi;

    cplx phi_r() const { return phi.s.back().u; }
    cplx p_phi_r() const { return phi.s.back().p; }
    cplx psi_r() const { return psi.s.back().u; }
    cplx p_psi_r() const { return psi.s.back().p; }
};

fundamental_pair make_fundamental_pair(const coefficient_profile& profile,
                                       cplx lambda, mesh_ptr mesh = nullptr,
                                       double h_max = 0.0);

// Composite Simpson of sum_i f(x_i) weights over the per-segment submeshes;
// O(h^4) for integrands smooth within each segment.
cplx simpson(const profile_mesh& mesh, const std::vector<cplx>& f);

// integral of a(x) * conj(b(x)); trajectories must share the mesh object.
cplx l2_inner(const mesh_traj& a, const mesh_traj& b);
double l2_norm(const mesh_traj& a);

}  // namespace weylscat
