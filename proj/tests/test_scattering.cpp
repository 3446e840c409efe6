#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "support/fixtures.hpp"
#include "support/planewave.hpp"
#include "weylscat/errors.hpp"
#include "weylscat/scattering.hpp"
#include "weylscat/spectra.hpp"
#include "weylscat/weyl.hpp"

using namespace weylscat;
using testsupport::b1_profile;
using testsupport::barrier_transmission;
using testsupport::f0_profile;
using testsupport::kPi;
using testsupport::two_segment_profile;

namespace {

lead_spec make_lead(lead_side side, double v) {
    lead_spec lead;
    lead.side = side;
    lead.tail_v = v;
    return lead;
}

lead_spec free_left() { return make_lead(lead_side::left, 0.0); }
lead_spec free_right() { return make_lead(lead_side::right, 0.0); }

double unitarity_defect(const smatrix& s) {
    double worst = 0.0;
    for (int i = 0; i < s.dim; ++i)
        for (int j = 0; j < s.dim; ++j) {
            cplx acc = 0.0;
            for (int k = 0; k < s.dim; ++k)
                acc += s.e[i][k] * std::conj(s.e[j][k]);
            if (i == j) acc -= 1.0;
            worst = std::max(worst, std::abs(acc));
        }
    return worst;
}

double s_asymmetry(const smatrix& s) {
    if (s.dim < 2) return 0.0;
    return std::abs(s.e[0][1] - s.e[1][0]);
}

double max_dev_s(const smatrix& x, const smatrix& y) {
    double worst = 0.0;
    for (int i = 0; i < x.dim; ++i)
        for (int j = 0; j < x.dim; ++j)
            worst = std::max(worst, std::abs(x.e[i][j] - y.e[i][j]));
    return worst;
}

double max_dev_r(const rmatrix& x, const rmatrix& y) {
    double worst = 0.0;
    for (int i = 0; i < x.dim; ++i)
        for (int j = 0; j < x.dim; ++j)
            worst = std::max(worst, std::abs(x.e[i][j] - y.e[i][j]));
    return worst;
}

}  // namespace

TEST_CASE("free system closed form at the quarter energy") {
    const auto profile = f0_profile();
    const auto tau = sample_tau(free_left(), free_right(), 0.25);
    const auto mw = internal_weyl(profile, cplx(0.25, 0.0));

    const smatrix s = s_direct(mw, tau);
    CHECK(s.dim == 2);
    CHECK(s.open_l);
    CHECK(s.open_r);
    CHECK(std::abs(s.e[0][0]) <= 1e-10);
    CHECK(std::abs(s.e[1][1]) <= 1e-10);
    CHECK(std::abs(s.e[0][1] - cplx(0.0, -1.0)) <= 1e-10);
    CHECK(std::abs(s.e[1][0] - cplx(0.0, -1.0)) <= 1e-10);
    CHECK(unitarity_defect(s) <= 1e-12);
    CHECK(std::norm(s.e[0][1]) == doctest::Approx(1.0).epsilon(1e-10));

    const rmatrix r = r_direct(mw, tau);
    CHECK(r.dim == 2);
    CHECK(std::abs(r.e[0][0]) <= 1e-10);
    CHECK(std::abs(r.e[1][1]) <= 1e-10);
    CHECK(r.e[0][1] == doctest::Approx(-1.0).epsilon(1e-10));
    CHECK(r.e[1][0] == doctest::Approx(r.e[0][1]).epsilon(1e-14));

    const rmatrix rc = cayley_r_from_s(s);
    CHECK(max_dev_r(rc, r) <= 1e-9);
    const smatrix sc = cayley_s_from_r(r);
    CHECK(max_dev_s(sc, s) <= 1e-9);
}

TEST_CASE("one open channel collapses to a unimodular scalar") {
    const auto profile = f0_profile();
    const auto left = make_lead(lead_side::left, 1.0);
    const auto tau = sample_tau(left, free_right(), 0.5);
    CHECK_FALSE(tau.open_left);
    CHECK(tau.open_right);
    CHECK(tau.re_l == doctest::Approx(-std::sqrt(0.5)).epsilon(1e-12));
    CHECK(tau.sqrt_im_l == 0.0);
    CHECK(tau.sqrt_im_r == doctest::Approx(std::pow(0.5, 0.25)).epsilon(1e-12));

    const auto mw = internal_weyl(profile, cplx(0.5, 0.0));
    const smatrix s = s_direct(mw, tau);
    CHECK(s.dim == 1);
    CHECK_FALSE(s.open_l);
    CHECK(s.open_r);
    CHECK(std::abs(s.e[0][0]) == doctest::Approx(1.0).epsilon(1e-10));

    // Scalar pinned by an independent 30-digit evaluation of
    // -sqrt(Im tau_r) * ((M + Re tau)^{-1})_{rr} * sqrt(Im tau_r).
    const rmatrix r = r_direct(mw, tau);
    CHECK(r.dim == 1);
    CHECK(r.e[0][0] == doctest::Approx(-0.135574621238990).epsilon(1e-9));

    const rmatrix rc = cayley_r_from_s(s);
    CHECK(std::abs(rc.e[0][0] - r.e[0][0]) <= 1e-9);
    const smatrix sc = cayley_s_from_r(r);
    CHECK(std::abs(sc.e[0][0] - s.e[0][0]) <= 1e-9);
}

TEST_CASE("direct formulas reject void, singular, and resonant inputs") {
    const auto profile = f0_profile();

    const auto tau_closed = sample_tau(free_left(), free_right(), -0.5);
    CHECK(tau_closed.n_open() == 0);
    const auto mw_closed = internal_weyl(profile, cplx(-0.5, 0.0));
    CHECK_THROWS_AS((void)s_direct(mw_closed, tau_closed), channel_void);
    CHECK_THROWS_AS((void)r_direct(mw_closed, tau_closed), channel_void);

    // M = -tau makes the coupling matrix exactly singular; no real system
    // produces it, so it must surface as a pathology, not a value.
    const auto tau = sample_tau(free_left(), free_right(), 0.25);
    weyl_sample fake;
    fake.lambda = cplx(0.25, 0.0);
    fake.M = mat2::diag(cplx(0.0, -0.5), cplx(0.0, -0.5));
    CHECK_THROWS_AS((void)s_direct(fake, tau), singular_coupling);

    // Singular M + Re tau is the frozen-family eigenvalue collision.
    weyl_sample degen;
    degen.lambda = cplx(0.25, 0.0);
    degen.M = mat2{1.0, 1.0, 1.0, 1.0};
    CHECK_THROWS_AS((void)r_direct(degen, tau), frozen_resonance);
}

TEST_CASE("cayley transform closed forms, poles, and roundtrips") {
    smatrix ident;
    ident.lambda = 0.3;
    ident.dim = 2;
    ident.open_l = ident.open_r = true;
    ident.e[0][0] = 1.0;
    ident.e[1][1] = 1.0;
    const rmatrix r0 = cayley_r_from_s(ident);
    CHECK(std::abs(r0.e[0][0]) <= 1e-12);
    CHECK(std::abs(r0.e[0][1]) <= 1e-12);
    CHECK(std::abs(r0.e[1][1]) <= 1e-12);

    rmatrix zero;
    zero.lambda = 0.3;
    zero.dim = 2;
    zero.open_l = zero.open_r = true;
    const smatrix s0 = cayley_s_from_r(zero);
    CHECK(std::abs(s0.e[0][0] - 1.0) <= 1e-12);
    CHECK(std::abs(s0.e[0][1]) <= 1e-12);
    CHECK(std::abs(s0.e[1][1] - 1.0) <= 1e-12);

    smatrix minus = ident;
    minus.e[0][0] = -1.0;
    minus.e[1][1] = -1.0;
    CHECK_THROWS_AS((void)cayley_r_from_s(minus), cayley_pole);

    smatrix scalar;
    scalar.lambda = 0.3;
    scalar.dim = 1;
    scalar.open_r = true;
    scalar.e[0][0] = std::exp(cplx(0.0, 2.0));
    const rmatrix rs = cayley_r_from_s(scalar);
    CHECK(rs.e[0][0] == doctest::Approx(std::tan(1.0)).epsilon(1e-12));
    const smatrix sb = cayley_s_from_r(rs);
    CHECK(std::abs(sb.e[0][0] - scalar.e[0][0]) <= 1e-12);

    scalar.e[0][0] = -1.0;
    CHECK_THROWS_AS((void)cayley_r_from_s(scalar), cayley_pole);

    // Random symmetric unitary matrices: S = U^T diag(phases) U with U a
    // real rotation stays symmetric and unitary, phases kept away from -1.
    std::mt19937 gen(20240817u);
    std::uniform_real_distribution<double> ang(0.0, kPi);
    std::uniform_real_distribution<double> ph(-2.4, 2.4);
    for (int trial = 0; trial < 10; ++trial) {
        const double a = ang(gen);
        const double ca = std::cos(a), sa = std::sin(a);
        const cplx e1 = std::exp(cplx(0.0, ph(gen)));
        const cplx e2 = std::exp(cplx(0.0, ph(gen)));
        smatrix s;
        s.lambda = 1.0;
        s.dim = 2;
        s.open_l = s.open_r = true;
        s.e[0][0] = ca * ca * e1 + sa * sa * e2;
        s.e[0][1] = ca * sa * (e1 - e2);
        s.e[1][0] = s.e[0][1];
        s.e[1][1] = sa * sa * e1 + ca * ca * e2;
        const rmatrix r = cayley_r_from_s(s);
        CHECK(r.e[0][1] == doctest::Approx(r.e[1][0]).epsilon(1e-14));
        const smatrix back = cayley_s_from_r(r);
        CHECK(max_dev_s(back, s) <= 1e-9);
        CHECK(unitarity_defect(back) <= 1e-12);
    }
}

TEST_CASE("series partial sums telescope exactly at the quarter energy") {
    const auto profile = f0_profile();
    const auto tau = sample_tau(free_left(), free_right(), 0.25);
    const auto mw = internal_weyl(profile, cplx(0.25, 0.0));
    const rmatrix r = r_direct(mw, tau);

    eigen_scan_options eso;
    eso.k_max = 500;
    eso.want_trajectory = false;
    const auto [fam, pairs] = frozen_family(profile, free_left(),
                                            free_right(), 0.25, eso);
    CHECK(fam.left.kind == endpoint_condition::bc::robin);
    CHECK(fam.left.kappa == doctest::Approx(0.0));
    REQUIRE(pairs.size() == 500);

    // Closed form of the truncated (1,1) entry: the cosine-mode sums
    // telescope to R11(N) = -2 / (pi (2N - 1)).
    for (const int n : {5, 50, 200}) {
        series_options so;
        so.n_terms = n;
        const auto part = r_series(0.25, pairs, tau, so);
        CHECK(part.n_terms == n);
        const double want = -2.0 / (kPi * (2.0 * n - 1.0));
        CHECK(part.value.e[0][0] == doctest::Approx(want).epsilon(1e-9));
        CHECK(part.value.e[0][0] ==
              doctest::Approx(part.value.e[1][1]).epsilon(1e-12));
        CHECK(part.value.e[0][1] ==
              doctest::Approx(part.value.e[1][0]).epsilon(1e-14));
    }

    series_options so;
    so.n_terms = 500;
    const auto full = r_series(0.25, pairs, tau, so);
    CHECK(std::abs(full.value.e[0][1] - (-1.0)) <= 2e-3);
    CHECK(full.tail_estimate > 0.0);
    CHECK(full.tail_estimate < 1e-3);
    CHECK(full.converged);

    so.n_terms = 50;
    const auto short_run = r_series(0.25, pairs, tau, so);
    CHECK(short_run.tail_estimate > 1e-3);
    CHECK_FALSE(short_run.converged);

    double prev = std::numeric_limits<double>::infinity();
    for (const int n : {20, 50, 100, 200, 500}) {
        series_options opt;
        opt.n_terms = n;
        const auto part = r_series(0.25, pairs, tau, opt);
        const double err = max_dev_r(part.value, r);
        CHECK(err <= prev + 1e-12);
        prev = err;
        if (n == 50) CHECK(err <= 2e-2);
        if (n == 100) CHECK(err <= 1e-2);
        if (n == 500) CHECK(err <= 2e-3);
    }

    so.n_terms = 500;
    const auto ss = s_series(0.25, pairs, tau, so);
    const smatrix sd = s_direct(mw, tau);
    CHECK(max_dev_s(ss.value, sd) <= 5e-3);
    const rmatrix ss_r = cayley_r_from_s(ss.value);
    const auto rs_again = r_series(0.25, pairs, tau, so);
    CHECK(max_dev_r(ss_r, rs_again.value) <= 1e-9);
}

TEST_CASE("scalar series approaches the direct value at the known rate") {
    const auto profile = f0_profile();
    const auto left = make_lead(lead_side::left, 1.0);
    const auto tau = sample_tau(left, free_right(), 0.5);
    const auto mw = internal_weyl(profile, cplx(0.5, 0.0));
    const rmatrix r = r_direct(mw, tau);

    eigen_scan_options eso;
    eso.k_max = 500;
    eso.want_trajectory = false;
    const auto [fam, pairs] = frozen_family(profile, left, free_right(),
                                            0.5, eso);
    CHECK(fam.left.kappa == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
    CHECK(fam.right.kappa == doctest::Approx(0.0));
    REQUIRE(pairs.size() == 500);

    // Truncation errors pinned by a 30-digit independent summation of the
    // frozen-family series; the tail behaves like sqrt(1/2)*(2/pi)/N.
    const struct { int n; double err; } marks[] = {
        {100, 4.524138e-3}, {200, 2.256424e-3}, {400, 1.126803e-3},
        {500, 9.012170e-4}};
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& mk : marks) {
        series_options so;
        so.n_terms = mk.n;
        const auto part = r_series(0.5, pairs, tau, so);
        CHECK(part.value.dim == 1);
        const double err = std::abs(part.value.e[0][0] - r.e[0][0]);
        CHECK(err == doctest::Approx(mk.err).epsilon(1e-4));
        CHECK(err <= prev + 1e-12);
        prev = err;
    }

    series_options so;
    so.n_terms = 500;
    const auto best = r_series(0.5, pairs, tau, so);
    CHECK(std::abs(best.value.e[0][0] - r.e[0][0]) <= 1e-3);
    CHECK(best.converged);
}

TEST_CASE("series reports a frozen eigenvalue collision") {
    const auto profile = f0_profile();
    const double lam = 4.0 + 1e-10;
    const auto tau = sample_tau(free_left(), free_right(), lam);
    eigen_scan_options eso;
    eso.k_max = 6;
    eso.want_trajectory = false;
    const auto [fam, pairs] =
        frozen_family(profile, free_left(), free_right(), lam, eso);
    CHECK(pairs[2].lambda == doctest::Approx(4.0).epsilon(1e-10));
    CHECK_THROWS_AS((void)r_series(lam, pairs, tau, {}), frozen_resonance);
}

TEST_CASE("dirichlet trace series grows linearly in the cutoff") {
    const auto profile = f0_profile();
    const auto norms = divergence_diagnostic(profile, -1.0, {1, 100, 200});
    REQUIRE(norms.size() == 3);
    // Single term: (mu_1 - lambda)^{-1} |Gamma_1 phi_1|^2 = 2/pi.
    CHECK(norms[0] == doctest::Approx(2.0 / kPi).epsilon(1e-8));
    CHECK(norms[1] == doctest::Approx(400.0 / kPi).epsilon(0.15));
    const double ratio = norms[2] / norms[1];
    CHECK(ratio >= 1.8);
    CHECK(ratio <= 2.2);

    CHECK_THROWS_AS((void)divergence_diagnostic(profile, 2.0, {10}),
                    invalid_profile);
}

TEST_CASE("sweep classifies the grid and conserves flux") {
    sweep_options opts;
    opts.series.n_terms = 150;
    opts.threads = 1;

    scatter_system barrier{b1_profile(), free_left(), free_right()};
    const std::vector<double> grid = {0.5, 1.0, 1.5};
    const auto rows = sweep(barrier, grid, opts);
    REQUIRE(rows.size() == 3);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& pt = rows[i];
        CHECK(pt.exclusion == "none");
        CHECK(pt.channels == 2);
        CHECK(unitarity_defect(pt.s) <= 1e-10);
        CHECK(s_asymmetry(pt.s) <= 1e-10);
        const double flux =
            std::norm(pt.s.e[0][0]) + std::norm(pt.s.e[1][0]);
        CHECK(flux == doctest::Approx(1.0).epsilon(1e-10));
        const double want = barrier_transmission(2.0, kPi, grid[i]);
        CHECK(pt.transmission == doctest::Approx(want).epsilon(1e-8));
        CHECK(pt.series_terms == 150);
        CHECK(pt.series_error >= 0.0);
        CHECK(pt.series_error <= 2e-2);
        CHECK(pt.frozen_lambdas.size() == 150);
        CHECK(std::is_sorted(pt.frozen_lambdas.begin(),
                             pt.frozen_lambdas.end()));
    }
    CHECK(rows[1].transmission ==
          doctest::Approx(barrier_transmission(2.0, kPi, 1.0))
              .epsilon(1e-6));

    scatter_system free_sys{f0_profile(), free_left(), free_right()};
    const std::vector<double> fgrid = {0.25, 1.0, 2.25, 4.0, -0.5};
    const auto frows = sweep(free_sys, fgrid, opts);
    REQUIRE(frows.size() == 5);
    CHECK(frows[0].exclusion == "none");
    CHECK(frows[0].transmission == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(frows[1].exclusion == "dirichlet_pole");
    CHECK(frows[1].channels == 2);
    CHECK(frows[2].exclusion == "none");
    CHECK(frows[2].transmission == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(frows[3].exclusion == "dirichlet_pole");
    CHECK(frows[4].exclusion == "no_channel");
    CHECK(frows[4].channels == 0);
    CHECK(frows[1].s.dim == 0);
    CHECK(frows[1].frozen_lambdas.empty());

    scatter_system asym{f0_profile(), make_lead(lead_side::left, 1.0),
                        free_right()};
    const std::vector<double> agrid = {0.5, 1.0, 1.5};
    const auto arows = sweep(asym, agrid, opts);
    CHECK(arows[0].exclusion == "none");
    CHECK(arows[0].channels == 1);
    CHECK(std::abs(arows[0].s.e[0][0]) ==
          doctest::Approx(1.0).epsilon(1e-10));
    CHECK(arows[1].exclusion == "threshold");
    CHECK(arows[2].exclusion == "none");
    CHECK(arows[2].channels == 2);
    CHECK(unitarity_defect(arows[2].s) <= 1e-10);
    CHECK(s_asymmetry(arows[2].s) <= 1e-10);

    scatter_system mixed{two_segment_profile(), free_left(), free_right()};
    const auto mrows = sweep(mixed, {0.8, 2.3}, opts);
    for (const auto& pt : mrows) {
        CHECK(pt.exclusion == "none");
        CHECK(unitarity_defect(pt.s) <= 1e-10);
        CHECK(s_asymmetry(pt.s) <= 1e-10);
    }

    sweep_options two = opts;
    two.threads = 2;
    const auto rows2 = sweep(barrier, grid, two);
    REQUIRE(rows2.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows2[i].exclusion == rows[i].exclusion);
        CHECK(max_dev_s(rows2[i].s, rows[i].s) == 0.0);
        CHECK(rows2[i].transmission == rows[i].transmission);
        CHECK(rows2[i].series_error == rows[i].series_error);
    }
}
