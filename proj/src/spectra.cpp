#include "weylscat/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <variant>

#include "weylscat/errors.hpp"

namespace weylscat {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Shooting states stay real for real lambda; the complex propagator entries
// carry exact zero imaginary parts there.
struct rstate {
    double u, p;
};

rstate left_state(const endpoint_condition& left) {
    if (left.kind == endpoint_condition::bc::dirichlet) return {0.0, 1.0};
    return {1.0, left.kappa};
}

double right_residual(const endpoint_condition& right, const rstate& s) {
    if (right.kind == endpoint_condition::bc::dirichlet) return s.u;
    return s.p + right.kappa * s.u;
}

rstate apply_real(const mat2& t, const rstate& s) {
    return {t.a.real() * s.u + t.b.real() * s.p,
            t.c.real() * s.u + t.d.real() * s.p};
}

// Interior zeros of the shooting solution across one constant segment.
// Oscillatory: u = R cos(ks - delta), zeros on an arithmetic grid. Evanescent:
// at most one zero, flagged by an endpoint sign change. A node inside the
// guard band of the right endpoint is reported, not counted: the caller owns
// segment boundaries. Nodes inside the left guard band belong to the previous
// segment and are dropped here.
struct segment_zeros {
    int count = 0;
    bool right_edge = false;
};

segment_zeros zeros_constant(double u0, double p0, double u_end, double m,
                             double v, double lam, double w) {
    const double z = 2.0 * m * (lam - v);
    if (z > 0.0) {
        const double k = std::sqrt(z);
        const double a = u0;
        const double b = 2.0 * m * p0 / k;
        if (a == 0.0 && b == 0.0) return {};
        const double delta = std::atan2(b, a);
        // u vanishes where k s = delta + pi/2 + j pi
        const double lo = (-delta - kPi / 2.0) / kPi;
        const double hi = (k * w - delta - kPi / 2.0) / kPi;
        const double edge =
            1e-12 * std::max({1.0, std::abs(lo), std::abs(hi)});
        const double jmin = std::ceil(lo + edge);
        const double jmax = std::floor(hi - edge);
        segment_zeros r;
        r.right_edge = std::abs(hi - std::round(hi)) <= edge;
        if (jmax >= jmin) r.count = static_cast<int>(jmax - jmin) + 1;
        return r;
    }
    if (z == 0.0) {
        if (p0 == 0.0) return {};
        const double s0 = -u0 / (2.0 * m * p0);
        const double g = 1e-12 * std::max(1.0, w);
        segment_zeros r;
        r.right_edge = std::abs(s0 - w) <= g;
        if (s0 > g && s0 < w - g) r.count = 1;
        return r;
    }
    const double kap = std::sqrt(-z);
    const double b = 2.0 * m * p0 / kap;
    if (std::abs(u0) <= 1e-12 * std::hypot(u0, b)) return {};
    const double p_end = p0 * std::cosh(kap * w) +
                         kap * u0 / (2.0 * m) * std::sinh(kap * w);
    segment_zeros r;
    r.right_edge =
        std::abs(u_end) <= 1e-12 * std::hypot(u_end, 2.0 * m * p_end / kap);
    if (!r.right_edge && u0 * u_end < 0.0) r.count = 1;
    return r;
}

struct shot_result {
    double u, p;  // state at x_r
    int zeros;    // interior zeros on (x_l, x_r)
};

shot_result shoot(const coefficient_profile& profile,
                  const endpoint_condition& left, double lambda,
                  double h_max) {
    rstate s = left_state(left);
    int zeros = 0;
    const auto& segs = profile.segments();
    for (std::size_t j = 0; j < segs.size(); ++j) {
        const segment& seg = segs[j];
        rstate next{};
        bool edge_hit = false;
        if (const auto* cc = std::get_if<constant_coeff>(&seg.coeff)) {
            const mat2 t =
                constant_step(cc->m, cc->v, cplx(lambda, 0.0), seg.width);
            next = apply_real(t, s);
            const segment_zeros sz = zeros_constant(
                s.u, s.p, next.u, cc->m, cc->v, lambda, seg.width);
            zeros += sz.count;
            edge_hit = sz.right_edge;
        } else {
            const auto& sc = std::get<sampled_coeff>(seg.coeff);
            std::vector<double> vals;
            quasi_state last{};
            walk_sampled(sc, seg.width, cplx(lambda, 0.0),
                         quasi_state{s.u, s.p}, h_max,
                         [&](double, const quasi_state& q) {
                             vals.push_back(q.u.real());
                             last = q;
                         });
            const std::size_t n = vals.size() - 1;
            edge_hit = vals[n] == 0.0 ||
                       std::abs(vals[n]) <=
                           1e-12 * std::abs(vals[n] - vals[n - 1]);
            for (std::size_t i = 1; i < n; ++i)
                if (vals[i] == 0.0) ++zeros;
            for (std::size_t i = 0; i < n; ++i) {
                if (!(vals[i] * vals[i + 1] < 0.0)) continue;
                if (i == 0 && std::abs(vals[0]) <=
                                  1e-12 * std::abs(vals[1] - vals[0]))
                    continue;
                if (i + 1 == n && edge_hit) continue;
                ++zeros;
            }
            next = {last.u.real(), last.p.real()};
        }
        if (!std::isfinite(next.u) || !std::isfinite(next.p))
            throw nonfinite_state("shooting solution overflowed");
        if (j + 1 < segs.size() && edge_hit) ++zeros;
        s = next;
    }
    return {s.u, s.p, zeros};
}

// Eigenvalues strictly below lambda. The Pruefer angle theta (u = r sin,
// p = r cos) starts in [0, pi) at x_l, increases through every multiple of pi
// at an interior zero, and meets the right condition at phi_t mod pi; the
// count follows from the final fractional angle.
int count_from_shot(const shot_result& r, const endpoint_condition& right) {
    if (right.kind == endpoint_condition::bc::dirichlet) return r.zeros;
    double phi = std::atan2(r.u, r.p);
    if (phi <= 0.0) phi += kPi;  // (0, pi]
    const double target = std::atan2(1.0, -right.kappa);  // in (0, pi)
    return r.zeros + (phi > target ? 1 : 0);
}

// Composite quadrature on a uniform grid of f.size()-1 intervals: Simpson on
// the even part, Simpson 3/8 closing an odd remainder; O(h^4) either way.
double uniform_integral(double h, const std::vector<double>& f) {
    const std::size_t n = f.size() - 1;
    if (n == 0) return 0.0;
    if (n == 1) return 0.5 * h * (f[0] + f[1]);
    std::size_t m = n;
    double total = 0.0;
    if (n % 2 != 0) {
        m = n - 3;
        total += 3.0 * h / 8.0 *
                 (f[m] + 3.0 * f[m + 1] + 3.0 * f[m + 2] + f[n]);
    }
    if (m >= 2) {
        double acc = f[0] + f[m];
        for (std::size_t i = 1; i < m; i += 2) acc += 4.0 * f[i];
        for (std::size_t i = 2; i < m; i += 2) acc += 2.0 * f[i];
        total += h / 3.0 * acc;
    }
    return total;
}

// Closed-form integral of u^2 across a constant segment, u real with
// u(s) = u0 cos(ks) + 2 m p0 sin(ks)/k. Evaluated through complex k so the
// evanescent branch reuses the same expressions; the small-|z| series avoids
// the cancellation in (w/2 - sin(2kw)/(4k))/k^2.
double segment_normsq_constant(double u0, double p0, double m, double v,
                               double lam, double w) {
    const double z = 2.0 * m * (lam - v);
    const double b = 2.0 * m * p0;
    if (z == 0.0)
        return u0 * u0 * w + u0 * b * w * w + b * b * w * w * w / 3.0;
    const cplx k = std::sqrt(cplx(z, 0.0));
    const cplx s1 = std::sin(k * w) / k;
    const cplx icc = 0.5 * (w + std::cos(k * w) * s1);
    cplx iss;
    if (std::abs(z) * w * w < 1e-3) {
        const double w2 = w * w;
        iss = w * w2 / 3.0 - z * w2 * w2 * w / 15.0 +
              2.0 * z * z * w2 * w2 * w2 * w / 315.0;
    } else {
        iss = (0.5 * w - 0.5 * std::cos(k * w) * s1) / z;
    }
    const cplx total = u0 * u0 * icc + u0 * b * (s1 * s1) + b * b * iss;
    return total.real();
}

double normsq_of_shot(const coefficient_profile& profile,
                      const endpoint_condition& left, double lambda,
                      double h_max) {
    rstate s = left_state(left);
    double total = 0.0;
    for (const segment& seg : profile.segments()) {
        if (const auto* cc = std::get_if<constant_coeff>(&seg.coeff)) {
            total += segment_normsq_constant(s.u, s.p, cc->m, cc->v, lambda,
                                             seg.width);
            s = apply_real(constant_step(cc->m, cc->v, cplx(lambda, 0.0),
                                         seg.width),
                           s);
        } else {
            const auto& sc = std::get<sampled_coeff>(seg.coeff);
            std::vector<double> sq;
            quasi_state last{};
            walk_sampled(sc, seg.width, cplx(lambda, 0.0),
                         quasi_state{s.u, s.p}, h_max,
                         [&](double, const quasi_state& q) {
                             const double uu = q.u.real();
                             sq.push_back(uu * uu);
                             last = q;
                         });
            const double h =
                seg.width / static_cast<double>(sq.size() - 1);
            total += uniform_integral(h, sq);
            s = {last.u.real(), last.p.real()};
        }
    }
    return total;
}

std::string interval_text(const char* what, double a, double b) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%s in [%.17g, %.17g]", what, a, b);
    return buf;
}

// Brent root finder on a sign-changing bracket. stop_scale supplies the
// residual magnitude that counts as converged at the current abscissa.
template <typename F, typename Stop>
double brent_root(F f, double a, double b, double fa, double fb, double xtol,
                  Stop stop_scale) {
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    double c = a, fc = fa;
    double d = b - a, e = d;
    for (int it = 0; it < 200; ++it) {
        if ((fb > 0.0) == (fc > 0.0)) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if (std::abs(fc) < std::abs(fb)) {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        const double tol =
            2.0 * std::numeric_limits<double>::epsilon() * std::abs(b) +
            0.5 * xtol;
        const double xm = 0.5 * (c - b);
        if (std::abs(xm) <= tol || fb == 0.0) return b;
        if (std::abs(fb) <= stop_scale()) return b;
        if (std::abs(e) >= tol && std::abs(fa) > std::abs(fb)) {
            double p, q, r;
            const double s = fb / fa;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                q = fa / fc;
                r = fb / fc;
                p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0));
                q = (q - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            p = std::abs(p);
            if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol * q),
                                   std::abs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += std::abs(d) > tol ? d : (xm > 0.0 ? tol : -tol);
        fb = f(b);
    }
    return b;
}

}  // namespace

double eigencondition(const coefficient_profile& profile,
                      const endpoint_condition& left,
                      const endpoint_condition& right, double lambda,
                      double h_max) {
    if (h_max <= 0.0) h_max = default_h_max(profile);
    const shot_result r = shoot(profile, left, lambda, h_max);
    return right_residual(right, {r.u, r.p});
}

int eigenvalue_count_below(const coefficient_profile& profile,
                           const endpoint_condition& left,
                           const endpoint_condition& right, double lambda,
                           double h_max) {
    if (h_max <= 0.0) h_max = default_h_max(profile);
    return count_from_shot(shoot(profile, left, lambda, h_max), right);
}

std::vector<eigen_pair> eigen_scan(const coefficient_profile& profile,
                                   const endpoint_condition& left,
                                   const endpoint_condition& right,
                                   const eigen_scan_options& opts) {
    std::vector<eigen_pair> out;
    if (opts.k_max <= 0) return out;
    const double h =
        opts.h_max > 0.0 ? opts.h_max : default_h_max(profile);

    double kap_sq = 0.0;
    for (const endpoint_condition* ec : {&left, &right})
        if (ec->kind == endpoint_condition::bc::robin)
            kap_sq = std::max(kap_sq, ec->kappa * ec->kappa);
    const double kap_abs =
        right.kind == endpoint_condition::bc::robin ? std::abs(right.kappa)
                                                    : 0.0;

    auto count = [&](double lam) {
        return count_from_shot(shoot(profile, left, lam, h), right);
    };
    double last_scale = 1.0;  // solution magnitude at the latest residual shot
    auto residual = [&](double lam) {
        const shot_result r = shoot(profile, left, lam, h);
        last_scale = std::hypot(r.u, r.p) * (1.0 + kap_abs);
        return right_residual(right, {r.u, r.p});
    };

    // Window floor: Robin ends can pull at most 2 kappa^2 / (2m) below the
    // potential minimum.
    double lo = profile.min_potential() -
                2.0 * kap_sq * profile.max_inv_two_mass() - 1.0;
    for (int guard = 0; count(lo) > 0; ++guard) {
        if (guard >= 60)
            throw bracket_failure(
                interval_text("window floor keeps counting eigenvalues",
                              lo, lo));
        lo -= std::max(1.0, std::abs(lo));
    }

    const double len = profile.length();
    auto upper_estimate = [&](int k) {
        const double kk = static_cast<double>(k) * kPi / len;
        return kk * kk * profile.max_inv_two_mass() +
               profile.max_potential() + 1.0;
    };

    mesh_ptr mesh = opts.mesh;
    double a = lo;  // invariant: exactly k-1 eigenvalues below a
    for (int k = 1; k <= opts.k_max; ++k) {
        double b = std::max(upper_estimate(k), a + 1.0);
        int nb = count(b);
        double step = std::max(1.0, b - a);
        while (nb < k) {
            if (!std::isfinite(b))
                throw bracket_failure(
                    interval_text("eigenvalue bracket ran away", a, b));
            b += step;
            step *= 2.0;
            nb = count(b);
        }
        double aa = a, bb = b;
        int iter = 0;
        while (nb > k) {
            if (++iter > 200)
                throw bracket_failure(
                    interval_text("cannot isolate eigenvalue", aa, bb));
            const double mid = 0.5 * (aa + bb);
            if (mid <= aa || mid >= bb)
                throw bracket_failure(
                    interval_text("eigenvalues unresolvable at machine "
                                  "precision",
                                  aa, bb));
            const int nm = count(mid);
            if (nm >= k) {
                bb = mid;
                nb = nm;
            } else if (nm == k - 1) {
                aa = mid;
            } else {
                throw bracket_failure(
                    interval_text("eigenvalue count not monotone", aa, bb));
            }
        }
        const double fa = residual(aa);
        const double fb = residual(bb);
        double lam;
        if (fa == 0.0) {
            lam = aa;
        } else if (fb == 0.0) {
            lam = bb;
        } else if ((fa > 0.0) == (fb > 0.0)) {
            throw bracket_failure(
                interval_text("no residual sign change", aa, bb));
        } else {
            const double xtol =
                1e-14 * std::max({1.0, std::abs(aa), std::abs(bb)});
            auto stop = [&]() { return 1e-12 * last_scale; };
            lam = brent_root(residual, aa, bb, fa, fb, xtol, stop);
        }

        eigen_pair ep;
        ep.index = k;
        ep.lambda = lam;
        const shot_result sr = shoot(profile, left, lam, h);
        const double nsq = normsq_of_shot(profile, left, lam, h);
        if (!(nsq > 0.0) || !std::isfinite(nsq))
            throw bracket_failure(
                interval_text("eigenfunction norm degenerate", lam, lam));
        const double scale = 1.0 / std::sqrt(nsq);
        const rstate s0 = left_state(left);
        ep.trace0[0] = s0.u * scale;
        ep.trace0[1] = sr.u * scale;
        ep.trace1[0] = s0.p * scale;
        ep.trace1[1] = -sr.p * scale;
        if (opts.want_trajectory) {
            if (!mesh) mesh = build_mesh(profile);
            propagate_on_mesh(profile, cplx(lam, 0.0),
                              quasi_state{s0.u, s0.p}, mesh, ep.psi, h);
            for (quasi_state& q : ep.psi.s) {
                q.u *= scale;
                q.p *= scale;
            }
        }
        out.push_back(std::move(ep));
        a = bb;  // count(bb) == k
    }
    return out;
}

frozen_robin_family frozen_conditions(const lead_spec& left_lead,
                                      const lead_spec& right_lead,
                                      double lambda) {
    const cplx ml = lead_weyl(left_lead, lambda);
    const cplx mr = lead_weyl(right_lead, lambda);
    return {lambda, endpoint_condition::robin(-ml.real()),
            endpoint_condition::robin(-mr.real())};
}

frozen_robin_family frozen_conditions(const tau_sample& tau) {
    return {tau.lambda, endpoint_condition::robin(-tau.re_l),
            endpoint_condition::robin(-tau.re_r)};
}

std::pair<frozen_robin_family, std::vector<eigen_pair>> frozen_family(
    const coefficient_profile& profile, const lead_spec& left_lead,
    const lead_spec& right_lead, double lambda,
    const eigen_scan_options& opts) {
    const frozen_robin_family fam =
        frozen_conditions(left_lead, right_lead, lambda);
    return {fam, eigen_scan(profile, fam.left, fam.right, opts)};
}

}  // namespace weylscat
