#include "weylscat/weyl.hpp"

#include <cmath>
#include <string>

#include "weylscat/errors.hpp"

namespace weylscat {

namespace {

// Coefficient values at one end of a profile (start of the first segment or
// end of the last one).
void end_values(const coefficient_profile& p, bool at_start, double& m,
                double& v) {
    const segment& seg =
        at_start ? p.segments().front() : p.segments().back();
    if (const auto* c = std::get_if<constant_coeff>(&seg.coeff)) {
        m = c->m;
        v = c->v;
    } else {
        const auto& s = std::get<sampled_coeff>(seg.coeff);
        m = at_start ? s.m.front() : s.m.back();
        v = at_start ? s.v.front() : s.v.back();
    }
}

}  // namespace

void validate_lead(const lead_spec& lead) {
    if (!(std::isfinite(lead.tail_m)) || lead.tail_m <= 0.0)
        throw invalid_profile("lead tail mass must be finite and > 0");
    if (!std::isfinite(lead.tail_v) || std::abs(lead.tail_v) >= 1e6)
        throw invalid_profile("lead tail potential must be finite, |v| < 1e6");
    if (!lead.transition) return;
    double m = 0.0, v = 0.0;
    end_values(*lead.transition, lead.side == lead_side::left, m, v);
    const double tol = 1e-12;
    if (std::abs(m - lead.tail_m) > tol * std::max(1.0, std::abs(lead.tail_m)) ||
        std::abs(v - lead.tail_v) > tol * std::max(1.0, std::abs(lead.tail_v)))
        throw invalid_profile(
            "lead transition must carry the tail coefficients at its outer end");
}

weyl_sample internal_weyl(const coefficient_profile& profile, cplx lambda,
                          double pole_eps) {
    auto [state, tm] = propagate(profile, lambda, {1.0, 0.0});
    (void)state;
    weyl_sample w;
    w.lambda = lambda;
    w.phi_r = tm.t.a;
    w.p_phi_r = tm.t.c;
    w.psi_r = tm.t.b;
    w.p_psi_r = tm.t.d;
    if (std::abs(w.psi_r) <= pole_eps * std::max(1.0, std::abs(w.phi_r)))
        throw dirichlet_pole("lambda is numerically a Dirichlet eigenvalue");
    const cplx s = 1.0 / w.psi_r;
    w.M = mat2{-s * w.phi_r, s, s, -s * w.p_psi_r};
    return w;
}

mesh_traj gamma_field_apply(const coefficient_profile& profile, cplx lambda,
                            const cvec2& xi, mesh_ptr mesh, double pole_eps) {
    if (!mesh) mesh = build_mesh(profile);
    const fundamental_pair fp = make_fundamental_pair(profile, lambda, mesh);
    const cplx phi_r = fp.phi_r();
    const cplx psi_r = fp.psi_r();
    if (std::abs(psi_r) <= pole_eps * std::max(1.0, std::abs(phi_r)))
        throw dirichlet_pole("lambda is numerically a Dirichlet eigenvalue");
    const cplx s = 1.0 / psi_r;
    mesh_traj out;
    out.mesh = mesh;
    out.s.resize(mesh->x.size());
    // f = (1/psi_r) [ (phi psi_r - psi phi_r) xi0 + psi xi1 ]; the same
    // combination of p-components is the quasi-derivative of a solution.
    for (std::size_t i = 0; i < out.s.size(); ++i) {
        const quasi_state& ph = fp.phi.s[i];
        const quasi_state& ps = fp.psi.s[i];
        out.s[i].u =
            s * ((ph.u * psi_r - ps.u * phi_r) * xi.e0 + ps.u * xi.e1);
        out.s[i].p =
            s * ((ph.p * psi_r - ps.p * phi_r) * xi.e0 + ps.p * xi.e1);
    }
    return out;
}

cplx constant_lead_m(double tail_m, double tail_v, cplx lambda) {
    // m = i k / (2m) with k = sqrt(2m(lambda - v)), principal branch. On the
    // negative real axis of the argument the +0i side is taken, giving the
    // -sqrt((v-lambda)/2m) boundary value below the threshold.
    cplx z = 2.0 * tail_m * (lambda - tail_v);
    if (z.imag() == 0.0) z = cplx(z.real(), +0.0);
    const cplx k = std::sqrt(z);
    return cplx(0.0, 1.0) * k / (2.0 * tail_m);
}

cplx lead_weyl(const lead_spec& lead, double lambda, double threshold_eps) {
    if (std::abs(lambda - lead.tail_v) <
        threshold_eps * std::max(1.0, std::abs(lead.tail_v)))
        throw threshold_energy("energy at the lead threshold v = " +
                               std::to_string(lead.tail_v));
    if (!lead.transition) return constant_lead_m(lead.tail_m, lead.tail_v, lambda);

    validate_lead(lead);
    // Decaying tail solution, as quasi-derivative data at the tail junction.
    // For the right lead the transition is mirrored, which flips the sign of
    // p and turns the physical +p/u convention into the same -p/u formula.
    cplx z = 2.0 * lead.tail_m * (cplx(lambda, 0.0) - lead.tail_v);
    if (z.imag() == 0.0) z = cplx(z.real(), +0.0);
    const cplx k = std::sqrt(z);
    const quasi_state tail_state{1.0, -cplx(0.0, 1.0) * k / (2.0 * lead.tail_m)};
    const coefficient_profile prof = lead.side == lead_side::left
                                         ? *lead.transition
                                         : lead.transition->mirrored();
    auto [iface, tm] = propagate(prof, cplx(lambda, 0.0), tail_state);
    (void)tm;
    if (std::abs(iface.u) < 1e-12)
        throw degenerate_interface(
            "lead solution vanishes at the interface (lead coefficient pole)");
    return -iface.p / iface.u;
}

tau_sample sample_tau(const lead_spec& left, const lead_spec& right,
                      double lambda, double threshold_eps) {
    tau_sample t;
    t.lambda = lambda;
    t.m_l = lead_weyl(left, lambda, threshold_eps);
    t.m_r = lead_weyl(right, lambda, threshold_eps);
    t.re_l = t.m_l.real();
    t.re_r = t.m_r.real();
    t.im_l = t.m_l.imag();
    t.im_r = t.m_r.imag();
    for (double* im : {&t.im_l, &t.im_r}) {
        if (*im < 0.0) {
            if (*im < -1e-12) // Herglotz boundary values cannot dip below 0
                throw numerical_error("negative Im of a lead coefficient");
            *im = 0.0;
        }
    }
    t.open_left = t.im_l > threshold_eps;
    t.open_right = t.im_r > threshold_eps;
    t.sqrt_im_l = t.open_left ? std::sqrt(t.im_l) : 0.0;
    t.sqrt_im_r = t.open_right ? std::sqrt(t.im_r) : 0.0;
    return t;
}

}  // namespace weylscat
