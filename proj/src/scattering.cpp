#include "weylscat/scattering.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <numeric>
#include <thread>

#include "weylscat/errors.hpp"

namespace weylscat {

namespace {

// Open-channel slots of the full boundary space, left before right.
struct restriction {
    int dim;
    int idx[2];
};

restriction make_restriction(const tau_sample& tau) {
    restriction r{0, {0, 0}};
    if (tau.open_left) r.idx[r.dim++] = 0;
    if (tau.open_right) r.idx[r.dim++] = 1;
    return r;
}

std::string point_text(const char* what, double lambda) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%s at lambda=%.17g", what, lambda);
    return buf;
}

double trace_norm_sym(const double m[2][2]) {
    const double half_tr = 0.5 * (m[0][0] + m[1][1]);
    const double disc =
        std::hypot(0.5 * (m[0][0] - m[1][1]), 0.5 * (m[0][1] + m[1][0]));
    return std::abs(half_tr + disc) + std::abs(half_tr - disc);
}

}  // namespace

smatrix s_direct(const weyl_sample& m, const tau_sample& tau,
                 double det_eps) {
    const restriction re = make_restriction(tau);
    if (re.dim == 0)
        throw channel_void(point_text("no open channel", tau.lambda));
    const mat2 a = m.M + mat2::diag(tau.m_l, tau.m_r);
    const double scale = std::max(1.0, max_norm(a) * max_norm(a));
    if (std::abs(a.det()) <= det_eps * scale)
        throw singular_coupling(
            point_text("M + tau numerically singular", tau.lambda));
    const mat2 inv = inverse(a);
    const double d[2] = {tau.sqrt_im_l, tau.sqrt_im_r};
    const cplx twoi(0.0, 2.0);
    const cplx full[2][2] = {
        {1.0 - twoi * d[0] * inv.a * d[0], -twoi * d[0] * inv.b * d[1]},
        {-twoi * d[1] * inv.c * d[0], 1.0 - twoi * d[1] * inv.d * d[1]}};
    smatrix s;
    s.lambda = tau.lambda;
    s.dim = re.dim;
    s.open_l = tau.open_left;
    s.open_r = tau.open_right;
    for (int i = 0; i < re.dim; ++i)
        for (int j = 0; j < re.dim; ++j) s.e[i][j] = full[re.idx[i]][re.idx[j]];
    return s;
}

rmatrix r_direct(const weyl_sample& m, const tau_sample& tau,
                 double det_eps) {
    const restriction re = make_restriction(tau);
    if (re.dim == 0)
        throw channel_void(point_text("no open channel", tau.lambda));
    const double b11 = m.M.a.real() + tau.re_l;
    const double b12 = m.M.b.real();
    const double b21 = m.M.c.real();
    const double b22 = m.M.d.real() + tau.re_r;
    const double det = b11 * b22 - b12 * b21;
    const double mx =
        std::max({std::abs(b11), std::abs(b12), std::abs(b21), std::abs(b22)});
    if (std::abs(det) <= det_eps * std::max(1.0, mx * mx))
        throw frozen_resonance(
            point_text("frozen eigenvalue meets the energy", tau.lambda));
    const double i11 = b22 / det, i12 = -b12 / det;
    const double i21 = -b21 / det, i22 = b11 / det;
    const double d[2] = {tau.sqrt_im_l, tau.sqrt_im_r};
    const double full[2][2] = {
        {-d[0] * i11 * d[0], -d[0] * i12 * d[1]},
        {-d[1] * i21 * d[0], -d[1] * i22 * d[1]}};
    rmatrix r;
    r.lambda = tau.lambda;
    r.dim = re.dim;
    r.open_l = tau.open_left;
    r.open_r = tau.open_right;
    for (int i = 0; i < re.dim; ++i)
        for (int j = 0; j < re.dim; ++j) r.e[i][j] = full[re.idx[i]][re.idx[j]];
    return r;
}

rmatrix cayley_r_from_s(const smatrix& s, double cayley_eps) {
    rmatrix r;
    r.lambda = s.lambda;
    r.dim = s.dim;
    r.open_l = s.open_l;
    r.open_r = s.open_r;
    if (s.dim == 0) return r;
    cplx c[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
    if (s.dim == 1) {
        const cplx den = 1.0 + s.e[0][0];
        if (std::abs(den) <= cayley_eps * (1.0 + std::abs(s.e[0][0])))
            throw cayley_pole(point_text("-1 in the spectrum of S", s.lambda));
        c[0][0] = cplx(0.0, 1.0) * (1.0 - s.e[0][0]) / den;
    } else {
        const mat2 ips{1.0 + s.e[0][0], s.e[0][1], s.e[1][0],
                       1.0 + s.e[1][1]};
        const double scale = std::max(1.0, max_norm(ips) * max_norm(ips));
        if (std::abs(ips.det()) <= cayley_eps * scale)
            throw cayley_pole(point_text("-1 in the spectrum of S", s.lambda));
        const mat2 ims{1.0 - s.e[0][0], -s.e[0][1], -s.e[1][0],
                       1.0 - s.e[1][1]};
        const mat2 prod = cplx(0.0, 1.0) * (ims * inverse(ips));
        c[0][0] = prod.a;
        c[0][1] = prod.b;
        c[1][0] = prod.c;
        c[1][1] = prod.d;
    }
    // The exact image of a unitary symmetric S is real symmetric; keep the
    // Hermitian part and reject gross deviations.
    double amp = 0.0, dev = 0.0;
    for (int i = 0; i < s.dim; ++i)
        for (int j = 0; j < s.dim; ++j) {
            amp = std::max(amp, std::abs(c[i][j]));
            dev = std::max(dev, std::abs(c[i][j] - std::conj(c[j][i])));
        }
    if (dev > 1e-6 * std::max(1.0, amp))
        throw numerical_error(
            point_text("cayley image far from Hermitian", s.lambda));
    for (int i = 0; i < s.dim; ++i)
        for (int j = 0; j < s.dim; ++j)
            r.e[i][j] = 0.5 * (c[i][j] + std::conj(c[j][i])).real();
    return r;
}

smatrix cayley_s_from_r(const rmatrix& r) {
    smatrix s;
    s.lambda = r.lambda;
    s.dim = r.dim;
    s.open_l = r.open_l;
    s.open_r = r.open_r;
    if (r.dim == 0) return s;
    const cplx i1(0.0, 1.0);
    if (r.dim == 1) {
        s.e[0][0] = (i1 - r.e[0][0]) / (i1 + r.e[0][0]);
        return s;
    }
    const mat2 num{i1 - r.e[0][0], -r.e[0][1], -r.e[1][0], i1 - r.e[1][1]};
    const mat2 den{i1 + r.e[0][0], r.e[0][1], r.e[1][0], i1 + r.e[1][1]};
    // det(iI + R) = -1 + i tr R + det R never vanishes for real symmetric R.
    const mat2 prod = num * inverse(den);
    s.e[0][0] = prod.a;
    s.e[0][1] = prod.b;
    s.e[1][0] = prod.c;
    s.e[1][1] = prod.d;
    return s;
}

r_series_result r_series(double lambda, const std::vector<eigen_pair>& pairs,
                         const tau_sample& tau, const series_options& opts) {
    const restriction re = make_restriction(tau);
    if (re.dim == 0)
        throw channel_void(point_text("no open channel", lambda));
    r_series_result out;
    out.value.lambda = lambda;
    out.value.dim = re.dim;
    out.value.open_l = tau.open_left;
    out.value.open_r = tau.open_right;

    int n = static_cast<int>(pairs.size());
    if (opts.n_terms > 0) n = std::min(n, opts.n_terms);
    const double d[2] = {tau.sqrt_im_l, tau.sqrt_im_r};
    double full[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
    const int window = std::max(0, n - 5);
    double b_max = 0.0;
    double lam_last = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < n; ++k) {
        const eigen_pair& p = pairs[k];
        const double gap = p.lambda - lambda;
        if (std::abs(gap) <=
            opts.resonance_eps * std::max(1.0, std::abs(lambda)))
            throw frozen_resonance(
                point_text("frozen eigenvalue meets the energy", lambda));
        const double w0 = d[0] * p.trace0[0];
        const double w1 = d[1] * p.trace0[1];
        full[0][0] += w0 * w0 / gap;
        full[0][1] += w0 * w1 / gap;
        full[1][0] += w1 * w0 / gap;
        full[1][1] += w1 * w1 / gap;
        if (k >= window) {
            const double wsup = std::max(std::abs(w0), std::abs(w1));
            b_max = std::max(b_max, wsup * wsup);
        }
        lam_last = p.lambda;
    }
    out.n_terms = n;
    // O(1/N) envelope: sum_{k>N} b/(lambda_k - lambda) ~ b N / (lambda_N -
    // lambda) for lambda_k ~ c k^2.
    if (n > 0 && lam_last > lambda)
        out.tail_estimate = b_max * n / (lam_last - lambda);
    else
        out.tail_estimate = std::numeric_limits<double>::infinity();
    out.converged = out.tail_estimate < opts.series_tol;
    for (int i = 0; i < re.dim; ++i)
        for (int j = 0; j < re.dim; ++j)
            out.value.e[i][j] = full[re.idx[i]][re.idx[j]];
    return out;
}

s_series_result s_series(double lambda, const std::vector<eigen_pair>& pairs,
                         const tau_sample& tau, const series_options& opts) {
    const r_series_result rs = r_series(lambda, pairs, tau, opts);
    s_series_result out;
    out.value = cayley_s_from_r(rs.value);
    out.n_terms = rs.n_terms;
    out.tail_estimate = rs.tail_estimate;
    out.converged = rs.converged;
    return out;
}

std::vector<double> divergence_diagnostic(const coefficient_profile& profile,
                                          double lambda,
                                          const std::vector<int>& n_list,
                                          double h_max) {
    std::vector<double> out(n_list.size(), 0.0);
    if (n_list.empty()) return out;
    const int n_max =
        std::max(1, *std::max_element(n_list.begin(), n_list.end()));
    eigen_scan_options so;
    so.k_max = n_max;
    so.want_trajectory = false;
    so.h_max = h_max;
    const auto d = endpoint_condition::dirichlet();
    const auto pairs = eigen_scan(profile, d, d, so);
    if (pairs.empty() || pairs.front().lambda <= lambda)
        throw invalid_profile(
            "divergence diagnostic needs lambda below the Dirichlet "
            "spectrum");

    std::vector<std::size_t> order(n_list.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return n_list[a] < n_list[b];
    });
    double full[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
    int k = 0;
    for (const std::size_t idx : order) {
        const int want = std::min(n_list[idx], n_max);
        while (k < want) {
            const eigen_pair& p = pairs[k];
            const double gap = p.lambda - lambda;
            const double g0 = p.trace1[0];
            const double g1 = p.trace1[1];
            full[0][0] += g0 * g0 / gap;
            full[0][1] += g0 * g1 / gap;
            full[1][0] += g1 * g0 / gap;
            full[1][1] += g1 * g1 / gap;
            ++k;
        }
        out[idx] = trace_norm_sym(full);
    }
    return out;
}

std::vector<scatter_point> sweep(const scatter_system& sys,
                                 const std::vector<double>& grid,
                                 const sweep_options& opts) {
    validate_lead(sys.left);
    validate_lead(sys.right);
    std::vector<scatter_point> out(grid.size());

    auto work = [&](std::size_t i) {
        scatter_point pt;
        pt.lambda = grid[i];
        int channels = 0;
        try {
            const tau_sample tau =
                sample_tau(sys.left, sys.right, grid[i], opts.threshold_eps);
            channels = tau.n_open();
            pt.channels = channels;
            if (channels == 0) throw channel_void("no open channel");
            const weyl_sample mw = internal_weyl(
                sys.profile, cplx(grid[i], 0.0), opts.pole_eps);
            const smatrix s = s_direct(mw, tau, opts.det_eps);
            const rmatrix r = r_direct(mw, tau, opts.det_eps);
            const rmatrix rc = cayley_r_from_s(s);
            double amp = 1.0, dev = 0.0;
            for (int a = 0; a < r.dim; ++a)
                for (int b = 0; b < r.dim; ++b) {
                    amp = std::max(amp, std::abs(r.e[a][b]));
                    dev = std::max(dev, std::abs(rc.e[a][b] - r.e[a][b]));
                }
            if (dev > 1e-6 * amp)
                throw numerical_error(point_text(
                    "direct and Cayley R disagree", grid[i]));
            pt.s = s;
            pt.r = r;
            pt.transmission =
                s.dim == 2 ? std::norm(s.e[0][1]) : std::norm(s.e[0][0]);
            if (opts.compare_series) {
                const frozen_robin_family fam = frozen_conditions(tau);
                eigen_scan_options eso;
                eso.k_max = opts.series.n_terms;
                eso.want_trajectory = false;
                eso.h_max = opts.h_max;
                const auto pairs =
                    eigen_scan(sys.profile, fam.left, fam.right, eso);
                const r_series_result rs =
                    r_series(grid[i], pairs, tau, opts.series);
                double err = 0.0;
                for (int a = 0; a < r.dim; ++a)
                    for (int b = 0; b < r.dim; ++b)
                        err = std::max(err,
                                       std::abs(rs.value.e[a][b] - r.e[a][b]));
                pt.series_error = err;
                pt.series_terms = rs.n_terms;
                pt.series_tail = rs.tail_estimate;
                pt.series_converged = rs.converged;
                pt.frozen_lambdas.reserve(pairs.size());
                for (const eigen_pair& p : pairs)
                    pt.frozen_lambdas.push_back(p.lambda);
            }
            pt.exclusion = "none";
            out[i] = std::move(pt);
            return;
        } catch (const threshold_energy&) {
            pt = scatter_point{};
            pt.exclusion = "threshold";
        } catch (const channel_void&) {
            pt = scatter_point{};
            pt.exclusion = "no_channel";
        } catch (const dirichlet_pole&) {
            pt = scatter_point{};
            pt.exclusion = "dirichlet_pole";
        } catch (const frozen_resonance&) {
            pt = scatter_point{};
            pt.exclusion = "frozen_resonance";
        }
        pt.lambda = grid[i];
        pt.channels = channels;
        out[i] = std::move(pt);
    };

    const std::size_t n = grid.size();
    unsigned nt = opts.threads > 0
                      ? static_cast<unsigned>(opts.threads)
                      : std::max(1u, std::thread::hardware_concurrency());
    nt = static_cast<unsigned>(std::min<std::size_t>(nt, n));
    if (nt <= 1) {
        for (std::size_t i = 0; i < n; ++i) work(i);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::mutex err_mx;
    std::exception_ptr first_error;
    auto loop = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                work(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mx);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> threads;
    for (unsigned t = 1; t < nt; ++t) threads.emplace_back(loop);
    loop();
    for (std::thread& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
    return out;
}

}  // namespace weylscat
