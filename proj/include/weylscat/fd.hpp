#pragma once

#include <vector>

#include "weylscat/profile.hpp"
#include "weylscat/propagator.hpp"
#include "weylscat/spectra.hpp"

namespace weylscat {

// Symmetric tridiagonal reduction of the flux-form discretization of
// -(d/dx)(1/(2m))(d/dx) + v on a uniform grid of n nodes. Dirichlet ends
// drop their boundary node; Robin ends keep it, with kappa folded into the
// diagonal (ghost-point elimination, equal to lumped P1). diag/off hold
// W^{-1/2}(K + V)W^{-1/2}; weight holds the lumped L2 weight per retained
// node. Second order requires coefficient interfaces to land on grid nodes.
struct tridiagonal_operator {
    int n = 0;
    std::vector<double> diag;
    std::vector<double> off;     // n-1 entries
    std::vector<double> weight;
    std::vector<double> x;       // retained node positions
    double h = 0.0;
};

// Throws invalid_profile for n < 16.
tridiagonal_operator fd_assemble(const coefficient_profile& profile,
                                 const endpoint_condition& left,
                                 const endpoint_condition& right, int n);

// Number of eigenvalues strictly below lambda (Sturm sequence count).
int fd_count_below(const tridiagonal_operator& op, double lambda);

// First k_max eigenvalues by bisection, increasing order, O(h^2) accurate.
std::vector<double> fd_spectrum(const coefficient_profile& profile,
                                const endpoint_condition& left,
                                const endpoint_condition& right, int n,
                                int k_max);

// Eigenpair with nodal values normalized to sum w_i u_i^2 = 1 and the same
// endpoint sign convention as eigen_scan. trace0 entries are 0 at Dirichlet
// ends (the boundary node is not an unknown there).
struct fd_mode {
    double lambda = 0.0;
    std::vector<double> values;
    double trace0[2] = {0.0, 0.0};
};

std::vector<fd_mode> fd_modes(const coefficient_profile& profile,
                              const endpoint_condition& left,
                              const endpoint_condition& right, int n,
                              int k_max);

// (A_0 - lambda)^{-1} f through the explicit Green kernel built from the
// fundamental pair, with per-segment cumulative Simpson quadrature. f holds
// one value per mesh node (mesh_mismatch otherwise); the result vanishes at
// both interval ends. Throws dirichlet_pole on the Dirichlet spectrum.
std::vector<double> resolvent_a0_apply(const coefficient_profile& profile,
                                       double lambda,
                                       const std::vector<double>& f,
                                       const mesh_ptr& mesh);

// Relative L2 residual between the direct FD solve of (A_Theta - lambda)g = f
// and the decoupled resolvent plus its rank-two boundary correction
// gamma (Theta - M)^{-1} gamma^*, for the fixed smooth test function
// f(x) = (x - x_l)(x_r - x). Both endpoint conditions must be Dirichlet
// (correction vanishes) or both Robin; mixed pairs are rejected.
double krein_check(const coefficient_profile& profile, double lambda,
                   const endpoint_condition& left,
                   const endpoint_condition& right, int n);

// Truncated eigenvector series sum_{k<=N} (lambda_k - lambda)^{-1}
// (Gamma_0 psi_k)(Gamma_0 psi_k)^T from FD modes, next to its limit
// (Theta - M(lambda))^{-1} from the fundamental-solution path.
struct series_oracle_result {
    double series[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
    double direct[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
    double deviation = 0.0;  // max-entry difference
};

// Requires Robin conditions with kappa >= 0 at both ends (the Gamma_0 traces
// of Dirichlet modes vanish identically, so that series carries nothing).
series_oracle_result series_oracle(const coefficient_profile& profile,
                                   double lambda,
                                   const endpoint_condition& left,
                                   const endpoint_condition& right,
                                   int n_modes, int grid_nodes = 2000);

}  // namespace weylscat
