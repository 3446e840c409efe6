#pragma once

#include <limits>
#include <string>
#include <vector>

#include "weylscat/mat2.hpp"
#include "weylscat/profile.hpp"
#include "weylscat/spectra.hpp"
#include "weylscat/weyl.hpp"

namespace weylscat {

// Scattering matrix restricted to the open channels, in (left, right) order.
// dim is the open-channel count; e holds the dim x dim block, remaining
// slots zero. Unitary and symmetric within tolerance at every regular energy.
struct smatrix {
    double lambda = 0.0;
    int dim = 0;
    bool open_l = false, open_r = false;
    cplx e[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
};

// R-matrix on the open channels: real symmetric, the Cayley partner of S.
struct rmatrix {
    double lambda = 0.0;
    int dim = 0;
    bool open_l = false, open_r = false;
    double e[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
};

// S = I - 2i D (M + tau)^{-1} D with D = sqrt(Im tau); closed channels drop
// out through the vanishing D entries. Throws channel_void without an open
// channel and singular_coupling if M + tau is numerically singular (it has
// no real spectrum, so this is a pathology, not physics).
smatrix s_direct(const weyl_sample& m, const tau_sample& tau,
                 double det_eps = 1e-10);

// R = -D (M + Re tau)^{-1} D. det(M + Re tau) ~ 0 means a frozen-family
// eigenvalue collides with lambda: frozen_resonance, the point is excluded.
rmatrix r_direct(const weyl_sample& m, const tau_sample& tau,
                 double det_eps = 1e-10);

// R = i (I - S)(I + S)^{-1}; throws cayley_pole when -1 sits in the spectrum
// of S. The exact transform of a unitary symmetric S is real symmetric; the
// Hermitian deviation of the input shows up in the imaginary parts, which
// callers may bound before they are dropped here.
rmatrix cayley_r_from_s(const smatrix& s, double cayley_eps = 1e-10);

// S = (iI - R)(iI + R)^{-1}: defined for every real symmetric R, unitary by
// construction.
smatrix cayley_s_from_r(const rmatrix& r);

struct series_options {
    int n_terms = 200;
    double series_tol = 1e-3;
    double resonance_eps = 1e-9;
};

// Truncated eigenfunction series for R(lambda) over the frozen-Robin family:
//   sum_k (lambda_k - lambda)^{-1} (D Gamma_0 psi_k) (D Gamma_0 psi_k)^T.
// tail_estimate extrapolates the O(1/N) remainder from the last five trace
// magnitudes; converged <=> tail_estimate < series_tol (no exception for a
// short series, the flag reports it).
struct r_series_result {
    rmatrix value;
    int n_terms = 0;
    double tail_estimate = 0.0;
    bool converged = false;
};

r_series_result r_series(double lambda, const std::vector<eigen_pair>& pairs,
                         const tau_sample& tau,
                         const series_options& opts = {});

struct s_series_result {
    smatrix value;
    int n_terms = 0;
    double tail_estimate = 0.0;
    bool converged = false;
};

// Cayley transform of the R series; sign convention fixed against s_direct.
s_series_result s_series(double lambda, const std::vector<eigen_pair>& pairs,
                         const tau_sample& tau,
                         const series_options& opts = {});

// Trace norms of the partial sums of the Dirichlet Gamma_1 series
//   sum_{k<=N} (mu_k - lambda)^{-1} (Gamma_1 phi_k)(Gamma_1 phi_k)^T
// for each N in n_list. The series diverges linearly in N; this makes the
// growth observable. Requires lambda below the Dirichlet spectrum.
std::vector<double> divergence_diagnostic(const coefficient_profile& profile,
                                          double lambda,
                                          const std::vector<int>& n_list,
                                          double h_max = 0.0);

struct scatter_system {
    coefficient_profile profile;
    lead_spec left;
    lead_spec right;
};

struct sweep_options {
    bool compare_series = true;
    series_options series;
    int threads = 1;
    double pole_eps = 1e-9;
    double threshold_eps = 1e-9;
    double det_eps = 1e-10;
    double h_max = 0.0;
};

// One energy-grid row. exclusion == "none" iff the matrices were computed;
// otherwise one of threshold | dirichlet_pole | frozen_resonance | no_channel
// and the entries stay zero.
struct scatter_point {
    double lambda = 0.0;
    int channels = 0;
    std::string exclusion = "none";
    smatrix s;
    rmatrix r;
    double transmission = 0.0;
    double series_error = std::numeric_limits<double>::quiet_NaN();
    int series_terms = 0;
    double series_tail = 0.0;
    bool series_converged = false;
    std::vector<double> frozen_lambdas;
};

// Evaluate the grid pointwise: classify channels, direct S and R, Cayley
// cross-check, optional series comparison. Classified numerical errors
// become exclusions; anything else aborts the sweep. Points are independent;
// results come back in grid order whatever the thread count.
std::vector<scatter_point> sweep(const scatter_system& sys,
                                 const std::vector<double>& grid,
                                 const sweep_options& opts = {});

}  // namespace weylscat
