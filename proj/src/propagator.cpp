#include "weylscat/propagator.hpp"

#include <cmath>

#include "weylscat/errors.hpp"

namespace weylscat {

namespace {

bool finite(const cplx& z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}

bool finite(const quasi_state& s) { return finite(s.u) && finite(s.p); }

// Linear interpolation of (m, v) inside a sampled segment at local offset s.
struct sampled_lookup {
    const sampled_coeff* c;
    double width;

    void at(double s, double& m, double& v) const {
        const std::size_t n = c->m.size();
        double t = s / width * static_cast<double>(n - 1);
        t = std::clamp(t, 0.0, static_cast<double>(n - 1));
        const std::size_t i = std::min(static_cast<std::size_t>(t), n - 2);
        const double w = t - static_cast<double>(i);
        m = (1.0 - w) * c->m[i] + w * c->m[i + 1];
        v = (1.0 - w) * c->v[i] + w * c->v[i + 1];
    }
};

struct deriv {
    cplx du, dp;
};

deriv rhs(double m, double v, cplx lambda, const quasi_state& s) {
    return {2.0 * m * s.p, (v - lambda) * s.u};
}

// One classical RK4 step of length h starting at local offset s.
quasi_state rk4_step(const sampled_lookup& lk, cplx lambda,
                     const quasi_state& y, double s, double h) {
    double m0, v0, mh, vh, m1, v1;
    lk.at(s, m0, v0);
    lk.at(s + 0.5 * h, mh, vh);
    lk.at(s + h, m1, v1);
    const deriv k1 = rhs(m0, v0, lambda, y);
    const deriv k2 =
        rhs(mh, vh, lambda, {y.u + 0.5 * h * k1.du, y.p + 0.5 * h * k1.dp});
    const deriv k3 =
        rhs(mh, vh, lambda, {y.u + 0.5 * h * k2.du, y.p + 0.5 * h * k2.dp});
    const deriv k4 = rhs(m1, v1, lambda, {y.u + h * k3.du, y.p + h * k3.dp});
    return {y.u + h / 6.0 * (k1.du + 2.0 * k2.du + 2.0 * k3.du + k4.du),
            y.p + h / 6.0 * (k1.dp + 2.0 * k2.dp + 2.0 * k3.dp + k4.dp)};
}

// RK4 across [s_from, s_to] inside a sampled segment, step count chosen from
// h_max. Returns the final state.
quasi_state rk4_span(const sampled_lookup& lk, cplx lambda, quasi_state y,
                     double s_from, double s_to, double h_max) {
    const double span = s_to - s_from;
    if (span <= 0.0) return y;
    const int n = std::max(1, static_cast<int>(std::ceil(span / h_max)));
    const double h = span / n;
    for (int i = 0; i < n; ++i) y = rk4_step(lk, lambda, y, s_from + i * h, h);
    return y;
}

}  // namespace

double default_h_max(const coefficient_profile& profile) {
    return profile.length() / 2000.0;
}

mat2 constant_step(double m, double v, cplx lambda, double s) {
    const cplx z = 2.0 * m * (lambda - v);  // k^2; every entry is even in k
    if (z == cplx(0.0)) return {1.0, 2.0 * m * s, 0.0, 1.0};
    const cplx k = std::sqrt(z);
    const cplx c = std::cos(k * s);
    const cplx s1 = std::sin(k * s) / k;
    return {c, 2.0 * m * s1, -z / (2.0 * m) * s1, c};
}

void walk_sampled(const sampled_coeff& coeff, double width, cplx lambda,
                  quasi_state start, double h_max,
                  const std::function<void(double, const quasi_state&)>& visit) {
    const sampled_lookup lk{&coeff, width};
    const int n = std::max(1, static_cast<int>(std::ceil(width / h_max)));
    const double h = width / n;
    quasi_state y = start;
    visit(0.0, y);
    for (int i = 0; i < n; ++i) {
        y = rk4_step(lk, lambda, y, i * h, h);
        visit((i + 1) * h, y);
    }
}

mat2 segment_transfer(const segment& seg, cplx lambda, double h_max) {
    if (const auto* c = std::get_if<constant_coeff>(&seg.coeff))
        return constant_step(c->m, c->v, lambda, seg.width);
    const auto& sc = std::get<sampled_coeff>(seg.coeff);
    const sampled_lookup lk{&sc, seg.width};
    // Propagate the two basis columns through the same steps.
    quasi_state e0 = rk4_span(lk, lambda, {1.0, 0.0}, 0.0, seg.width, h_max);
    quasi_state e1 = rk4_span(lk, lambda, {0.0, 1.0}, 0.0, seg.width, h_max);
    return {e0.u, e1.u, e0.p, e1.p};
}

std::pair<quasi_state, transfer_matrix> propagate(
    const coefficient_profile& profile, cplx lambda, const quasi_state& state,
    double h_max) {
    if (h_max <= 0.0) h_max = default_h_max(profile);
    mat2 total = mat2::identity();
    quasi_state cur = state;
    for (const segment& seg : profile.segments()) {
        const mat2 step = segment_transfer(seg, lambda, h_max);
        total = step * total;
        cur = quasi_state{step.a * cur.u + step.b * cur.p,
                          step.c * cur.u + step.d * cur.p};
        if (!finite(cur) || !std::isfinite(max_norm(total)))
            throw nonfinite_state("propagation overflow; |lambda| too large");
    }
    return {cur, transfer_matrix{total, lambda, profile.x_a(), profile.x_b()}};
}

quasi_state propagate_on_mesh(const coefficient_profile& profile, cplx lambda,
                              const quasi_state& state, const mesh_ptr& mesh,
                              mesh_traj& out, double h_max) {
    if (h_max <= 0.0) h_max = default_h_max(profile);
    out.mesh = mesh;
    out.s.assign(mesh->x.size(), quasi_state{});
    out.s[0] = state;
    quasi_state cur = state;
    const auto& segs = profile.segments();
    for (std::size_t j = 0; j < segs.size(); ++j) {
        const std::size_t first = mesh->seg_node[j];
        const std::size_t last = mesh->seg_node[j + 1];
        if (const auto* c = std::get_if<constant_coeff>(&segs[j].coeff)) {
            // Uniform submesh: one step matrix serves every interval.
            const double dx = (mesh->x[last] - mesh->x[first]) /
                              static_cast<double>(last - first);
            const mat2 step = constant_step(c->m, c->v, lambda, dx);
            for (std::size_t i = first; i < last; ++i) {
                cur = quasi_state{step.a * cur.u + step.b * cur.p,
                                  step.c * cur.u + step.d * cur.p};
                out.s[i + 1] = cur;
            }
        } else {
            const auto& sc = std::get<sampled_coeff>(segs[j].coeff);
            const sampled_lookup lk{&sc, segs[j].width};
            const double base = mesh->x[first];
            for (std::size_t i = first; i < last; ++i) {
                cur = rk4_span(lk, lambda, cur, mesh->x[i] - base,
                               mesh->x[i + 1] - base, h_max);
                out.s[i + 1] = cur;
            }
        }
        if (!finite(cur))
            throw nonfinite_state("propagation overflow; |lambda| too large");
    }
    return cur;
}

fundamental_pair make_fundamental_pair(const coefficient_profile& profile,
                                       cplx lambda, mesh_ptr mesh,
                                       double h_max) {
    if (!mesh) mesh = build_mesh(profile);
    fundamental_pair fp;
    fp.lambda = lambda;
    propagate_on_mesh(profile, lambda, {1.0, 0.0}, mesh, fp.phi, h_max);
    propagate_on_mesh(profile, lambda, {0.0, 1.0}, mesh, fp.psi, h_max);
    return fp;
}

cplx simpson(const profile_mesh& mesh, const std::vector<cplx>& f) {
    if (f.size() != mesh.x.size())
        throw mesh_mismatch("integrand length does not match the mesh");
    cplx total = 0.0;
    for (std::size_t j = 0; j + 1 < mesh.seg_node.size(); ++j) {
        const std::size_t a = mesh.seg_node[j];
        const std::size_t b = mesh.seg_node[j + 1];
        const double h =
            (mesh.x[b] - mesh.x[a]) / static_cast<double>(b - a);
        cplx acc = f[a] + f[b];
        for (std::size_t i = a + 1; i < b; i += 2) acc += 4.0 * f[i];
        for (std::size_t i = a + 2; i < b; i += 2) acc += 2.0 * f[i];
        total += h / 3.0 * acc;
    }
    return total;
}

cplx l2_inner(const mesh_traj& a, const mesh_traj& b) {
    if (!a.mesh || a.mesh != b.mesh || a.s.size() != b.s.size() ||
        a.s.size() != a.mesh->x.size())
        throw mesh_mismatch("trajectories do not share a mesh");
    std::vector<cplx> f(a.s.size());
    for (std::size_t i = 0; i < f.size(); ++i)
        f[i] = a.s[i].u * std::conj(b.s[i].u);
    return simpson(*a.mesh, f);
}

double l2_norm(const mesh_traj& a) {
    return std::sqrt(std::abs(l2_inner(a, a).real()));
}

}  // namespace weylscat
