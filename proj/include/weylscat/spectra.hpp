#pragma once

#include <utility>
#include <vector>

#include "weylscat/profile.hpp"
#include "weylscat/propagator.hpp"
#include "weylscat/weyl.hpp"

namespace weylscat {

// Separated boundary condition at one endpoint. Robin means
// p(x_l) = +kappa u(x_l) on the left and p(x_r) = -kappa u(x_r) on the
// right; kappa = 0 is Neumann.
struct endpoint_condition {
    enum class bc { dirichlet, robin };
    bc kind = bc::dirichlet;
    double kappa = 0.0;

    static endpoint_condition dirichlet() { return {bc::dirichlet, 0.0}; }
    static endpoint_condition robin(double kappa) { return {bc::robin, kappa}; }
    static endpoint_condition neumann() { return robin(0.0); }
};

// Normalized eigenpair of the internal operator. trace0 = (psi(x_l),
// psi(x_r)), trace1 = (p(x_l), -p(x_r)). The trajectory is recorded on the
// given mesh unless the caller asked to skip it (psi.s empty then).
struct eigen_pair {
    int index = 0;  // 1-based; the eigenfunction has index-1 interior zeros
    double lambda = 0.0;
    double trace0[2] = {0.0, 0.0};
    double trace1[2] = {0.0, 0.0};
    mesh_traj psi;
};

// Shooting residual whose zeros are exactly the eigenvalues: propagate the
// left-condition state (Dirichlet (0,1), Robin (1,kappa)) across the profile
// and evaluate the right condition (Dirichlet: u(x_r); Robin: p + kappa u).
double eigencondition(const coefficient_profile& profile,
                      const endpoint_condition& left,
                      const endpoint_condition& right, double lambda,
                      double h_max = 0.0);

// Number of eigenvalues strictly below lambda, from the interior zero count
// of the shooting solution plus the boundary phase at x_r (Sturm oscillation
// theory). Exact for constant segments; substep sign counting on sampled
// ones.
int eigenvalue_count_below(const coefficient_profile& profile,
                           const endpoint_condition& left,
                           const endpoint_condition& right, double lambda,
                           double h_max = 0.0);

struct eigen_scan_options {
    int k_max = 6;
    mesh_ptr mesh;              // built on demand when trajectories wanted
    bool want_trajectory = true;
    double h_max = 0.0;
};

// First k_max eigenpairs in increasing order. Brackets are certified by the
// counting function (so no root is skipped), refined by bisection + secant to
// |residual| <= 1e-11 relative, normalized to unit L2 norm with the sign
// convention psi(x_l) > 0 (or p(x_l) > 0 for a Dirichlet left end).
std::vector<eigen_pair> eigen_scan(const coefficient_profile& profile,
                                   const endpoint_condition& left,
                                   const endpoint_condition& right,
                                   const eigen_scan_options& opts);

// Energy-frozen Robin family: kappa = -Re of the lead coefficient at the
// sweep energy. Equals the Neumann operator wherever Re tau vanishes.
struct frozen_robin_family {
    double lambda = 0.0;
    endpoint_condition left;
    endpoint_condition right;
};

frozen_robin_family frozen_conditions(const lead_spec& left_lead,
                                      const lead_spec& right_lead,
                                      double lambda);

frozen_robin_family frozen_conditions(const tau_sample& tau);

std::pair<frozen_robin_family, std::vector<eigen_pair>> frozen_family(
    const coefficient_profile& profile, const lead_spec& left_lead,
    const lead_spec& right_lead, double lambda,
    const eigen_scan_options& opts);

}  // namespace weylscat
