#include "weylscat/fd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "weylscat/errors.hpp"
#include "weylscat/weyl.hpp"

namespace weylscat {

namespace {

constexpr double kEigTol = 1e-12;

bool is_dirichlet(const endpoint_condition& c) {
    return c.kind == endpoint_condition::bc::dirichlet;
}

// Sturm pivot floor; forcing tiny pivots negative counts an eigenvalue
// exactly at lambda as below, which bisection tolerates.
double sturm_floor(const tridiagonal_operator& op) {
    double m = 0.0;
    for (const double o : op.off) m = std::max(m, o * o);
    return 1e-30 * (1.0 + m);
}

std::pair<double, double> gershgorin(const tridiagonal_operator& op) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (int i = 0; i < op.n; ++i) {
        double r = 0.0;
        if (i > 0) r += std::abs(op.off[i - 1]);
        if (i + 1 < op.n) r += std::abs(op.off[i]);
        lo = std::min(lo, op.diag[i] - r);
        hi = std::max(hi, op.diag[i] + r);
    }
    return {lo, hi};
}

int count_below(const tridiagonal_operator& op, double lambda, double floor_q) {
    int cnt = 0;
    double q = 1.0;
    for (int i = 0; i < op.n; ++i) {
        const double couple = i > 0 ? op.off[i - 1] * op.off[i - 1] / q : 0.0;
        q = op.diag[i] - lambda - couple;
        if (std::abs(q) < floor_q) q = -floor_q;
        if (q < 0.0) ++cnt;
    }
    return cnt;
}

std::vector<double> eigenvalues_of(const tridiagonal_operator& op,
                                   int k_max) {
    if (k_max < 1 || k_max > op.n)
        throw invalid_profile("eigenvalue count exceeds the fd grid");
    const double floor_q = sturm_floor(op);
    const auto [glo, ghi] = gershgorin(op);
    std::vector<double> out(k_max);
    for (int k = 1; k <= k_max; ++k) {
        double a = glo, b = ghi;
        for (int it = 0; it < 200 &&
                         b - a > kEigTol * std::max({1.0, std::abs(a),
                                                     std::abs(b)});
             ++it) {
            const double mid = 0.5 * (a + b);
            if (count_below(op, mid, floor_q) >= k)
                b = mid;
            else
                a = mid;
        }
        out[k - 1] = 0.5 * (a + b);
    }
    return out;
}

// (T - shift) y = y in place; the pivot floor keeps the factorization
// usable when shift is an eigenvalue, which inverse iteration exploits.
void shifted_solve(const tridiagonal_operator& op, double shift,
                   std::vector<double>& y) {
    const int n = op.n;
    double scale = std::abs(shift);
    for (int i = 0; i < n; ++i) scale = std::max(scale, std::abs(op.diag[i]));
    for (int i = 0; i + 1 < n; ++i) scale = std::max(scale, std::abs(op.off[i]));
    const double pivmin = 1e-20 * scale + 1e-300;

    std::vector<double> d(n), l(std::max(0, n - 1));
    d[0] = op.diag[0] - shift;
    for (int i = 0; i + 1 < n; ++i) {
        if (std::abs(d[i]) < pivmin) d[i] = d[i] < 0.0 ? -pivmin : pivmin;
        l[i] = op.off[i] / d[i];
        d[i + 1] = op.diag[i + 1] - shift - l[i] * op.off[i];
        y[i + 1] -= l[i] * y[i];
    }
    if (std::abs(d[n - 1]) < pivmin)
        d[n - 1] = d[n - 1] < 0.0 ? -pivmin : pivmin;
    y[n - 1] /= d[n - 1];
    for (int i = n - 2; i >= 0; --i) y[i] = y[i] / d[i] - l[i] * y[i + 1];
}

void normalize(std::vector<double>& y) {
    double s = 0.0;
    for (const double v : y) s += v * v;
    s = std::sqrt(s);
    if (s > 0.0)
        for (double& v : y) v /= s;
}

// Cumulative integral along the mesh. Every segment carries an even interval
// count, so pairs use Simpson and odd prefixes the 5-8-(-1) half rule; the
// final value matches composite Simpson.
std::vector<double> cumulative(const profile_mesh& mesh,
                               const std::vector<double>& f) {
    const auto& x = mesh.x;
    std::vector<double> out(x.size(), 0.0);
    for (std::size_t s = 0; s + 1 < mesh.seg_node.size(); ++s) {
        const std::size_t a = mesh.seg_node[s];
        const std::size_t b = mesh.seg_node[s + 1];
        const double h = (x[b] - x[a]) / static_cast<double>(b - a);
        for (std::size_t i = a; i + 2 <= b; i += 2) {
            out[i + 1] =
                out[i] + h * (5.0 * f[i] + 8.0 * f[i + 1] - f[i + 2]) / 12.0;
            out[i + 2] =
                out[i] + h * (f[i] + 4.0 * f[i + 1] + f[i + 2]) / 3.0;
        }
    }
    return out;
}

double interp(const std::vector<double>& xs, const std::vector<double>& ys,
              double x) {
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t j = static_cast<std::size_t>(it - xs.begin());
    const double t = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
    return ys[j - 1] + t * (ys[j] - ys[j - 1]);
}

// (Theta - M(lambda))^{-1} with Theta = diag(kappa_l, kappa_r); singular
// means lambda is an eigenvalue of the Robin operator.
void boundary_inverse(const coefficient_profile& profile, double lambda,
                      double kap_l, double kap_r, double out[2][2]) {
    const weyl_sample mw = internal_weyl(profile, cplx(lambda, 0.0));
    const double t11 = kap_l - mw.M.a.real();
    const double t12 = -mw.M.b.real();
    const double t22 = kap_r - mw.M.d.real();
    const double det = t11 * t22 - t12 * t12;
    const double scale =
        std::max({1.0, std::abs(t11), std::abs(t12), std::abs(t22)});
    if (std::abs(det) <= 1e-12 * scale * scale)
        throw frozen_resonance("lambda is an eigenvalue of the Robin operator");
    out[0][0] = t22 / det;
    out[0][1] = -t12 / det;
    out[1][0] = -t12 / det;
    out[1][1] = t11 / det;
}

}  // namespace

tridiagonal_operator fd_assemble(const coefficient_profile& profile,
                                 const endpoint_condition& left,
                                 const endpoint_condition& right, int n) {
    if (n < 16) throw invalid_profile("fd grid needs at least 16 nodes");
    const double xa = profile.x_a();
    const double h = profile.length() / (n - 1);
    std::vector<double> c(n - 1), vm(n - 1);
    for (int j = 0; j + 1 < n; ++j) {
        double m = 0.0, v = 0.0;
        profile.coeff_at(xa + (j + 0.5) * h, m, v);
        c[j] = 1.0 / (2.0 * m);
        vm[j] = v;
    }

    const int lo = is_dirichlet(left) ? 1 : 0;
    const int hi = is_dirichlet(right) ? n - 2 : n - 1;
    const int nn = hi - lo + 1;
    tridiagonal_operator op;
    op.n = nn;
    op.h = h;
    op.diag.resize(nn);
    op.off.resize(nn - 1);
    op.weight.resize(nn);
    op.x.resize(nn);
    for (int i = 0; i < nn; ++i) {
        const int g = lo + i;
        double w = 0.0, stiff = 0.0, pot = 0.0;
        if (g > 0) {
            w += 0.5 * h;
            stiff += c[g - 1] / h;
            pot += 0.5 * h * vm[g - 1];
        }
        if (g + 1 < n) {
            w += 0.5 * h;
            stiff += c[g] / h;
            pot += 0.5 * h * vm[g];
        }
        if (g == 0) stiff += left.kappa;
        if (g == n - 1) stiff += right.kappa;
        op.weight[i] = w;
        op.x[i] = xa + g * h;
        op.diag[i] = (stiff + pot) / w;
    }
    for (int i = 0; i + 1 < nn; ++i)
        op.off[i] =
            -c[lo + i] / h / std::sqrt(op.weight[i] * op.weight[i + 1]);
    return op;
}

int fd_count_below(const tridiagonal_operator& op, double lambda) {
    return count_below(op, lambda, sturm_floor(op));
}

std::vector<double> fd_spectrum(const coefficient_profile& profile,
                                const endpoint_condition& left,
                                const endpoint_condition& right, int n,
                                int k_max) {
    return eigenvalues_of(fd_assemble(profile, left, right, n), k_max);
}

std::vector<fd_mode> fd_modes(const coefficient_profile& profile,
                              const endpoint_condition& left,
                              const endpoint_condition& right, int n,
                              int k_max) {
    const auto op = fd_assemble(profile, left, right, n);
    const auto lams = eigenvalues_of(op, k_max);
    std::vector<fd_mode> out(lams.size());
    for (std::size_t k = 0; k < lams.size(); ++k) {
        std::vector<double> y(op.n);
        std::mt19937 gen(424200u + static_cast<unsigned>(k));
        std::uniform_real_distribution<double> coin(-1.0, 1.0);
        for (double& v : y) v = coin(gen);
        normalize(y);
        for (int pass = 0; pass < 2; ++pass) {
            shifted_solve(op, lams[k], y);
            normalize(y);
        }
        fd_mode& mode = out[k];
        mode.lambda = lams[k];
        mode.values.resize(op.n);
        for (int i = 0; i < op.n; ++i)
            mode.values[i] = y[i] / std::sqrt(op.weight[i]);
        if (mode.values.front() < 0.0)
            for (double& v : mode.values) v = -v;
        mode.trace0[0] = is_dirichlet(left) ? 0.0 : mode.values.front();
        mode.trace0[1] = is_dirichlet(right) ? 0.0 : mode.values.back();
    }
    return out;
}

std::vector<double> resolvent_a0_apply(const coefficient_profile& profile,
                                       double lambda,
                                       const std::vector<double>& f,
                                       const mesh_ptr& mesh) {
    if (!mesh || f.size() != mesh->x.size())
        throw mesh_mismatch("resolvent input does not match the mesh");
    const auto fp = make_fundamental_pair(profile, cplx(lambda, 0.0), mesh);
    const double phir = fp.phi_r().real();
    const double psir = fp.psi_r().real();
    if (std::abs(psir) <= 1e-9 * std::max(1.0, std::abs(phir)))
        throw dirichlet_pole("lambda sits on the Dirichlet spectrum");

    const std::size_t nn = f.size();
    std::vector<double> phif(nn), psif(nn);
    for (std::size_t i = 0; i < nn; ++i) {
        phif[i] = fp.phi.s[i].u.real() * f[i];
        psif[i] = fp.psi.s[i].u.real() * f[i];
    }
    const auto cpsi = cumulative(*mesh, psif);
    const auto cphi = cumulative(*mesh, phif);
    const double all_phif = cphi.back();
    const double all_psif = cpsi.back();
    const double ratio = phir / psir;

    std::vector<double> g(nn);
    for (std::size_t i = 0; i < nn; ++i) {
        const double phi = fp.phi.s[i].u.real();
        const double psi = fp.psi.s[i].u.real();
        g[i] = phi * cpsi[i] + psi * (all_phif - cphi[i]) -
               ratio * psi * all_psif;
    }
    return g;
}

double krein_check(const coefficient_profile& profile, double lambda,
                   const endpoint_condition& left,
                   const endpoint_condition& right, int n) {
    const bool dl = is_dirichlet(left);
    if (dl != is_dirichlet(right))
        throw invalid_profile("endpoint conditions must match in kind");

    const auto op = fd_assemble(profile, left, right, n);
    const double xa = profile.x_a(), xb = profile.x_b();
    std::vector<double> z(op.n);
    for (int i = 0; i < op.n; ++i)
        z[i] = std::sqrt(op.weight[i]) * (op.x[i] - xa) * (xb - op.x[i]);
    shifted_solve(op, lambda, z);
    std::vector<double> lhs(op.n);
    for (int i = 0; i < op.n; ++i) lhs[i] = z[i] / std::sqrt(op.weight[i]);

    const mesh_ptr mesh = build_mesh(profile, static_cast<std::size_t>(n));
    const std::size_t nn = mesh->x.size();
    std::vector<double> fmesh(nn);
    for (std::size_t i = 0; i < nn; ++i)
        fmesh[i] = (mesh->x[i] - xa) * (xb - mesh->x[i]);
    std::vector<double> rhs = resolvent_a0_apply(profile, lambda, fmesh, mesh);

    if (!dl) {
        const auto g1 =
            gamma_field_apply(profile, cplx(lambda, 0.0), cvec2{1.0, 0.0},
                              mesh);
        const auto g2 =
            gamma_field_apply(profile, cplx(lambda, 0.0), cvec2{0.0, 1.0},
                              mesh);
        std::vector<cplx> p1(nn), p2(nn);
        for (std::size_t i = 0; i < nn; ++i) {
            p1[i] = g1.s[i].u.real() * fmesh[i];
            p2[i] = g2.s[i].u.real() * fmesh[i];
        }
        const double b1 = simpson(*mesh, p1).real();
        const double b2 = simpson(*mesh, p2).real();
        double binv[2][2];
        boundary_inverse(profile, lambda, left.kappa, right.kappa, binv);
        const double c1 = binv[0][0] * b1 + binv[0][1] * b2;
        const double c2 = binv[1][0] * b1 + binv[1][1] * b2;
        for (std::size_t i = 0; i < nn; ++i)
            rhs[i] += c1 * g1.s[i].u.real() + c2 * g2.s[i].u.real();
    }

    double num = 0.0, den = 0.0;
    for (int i = 0; i < op.n; ++i) {
        const double diff = interp(mesh->x, rhs, op.x[i]) - lhs[i];
        num += op.weight[i] * diff * diff;
        den += op.weight[i] * lhs[i] * lhs[i];
    }
    return std::sqrt(num / den);
}

series_oracle_result series_oracle(const coefficient_profile& profile,
                                   double lambda,
                                   const endpoint_condition& left,
                                   const endpoint_condition& right,
                                   int n_modes, int grid_nodes) {
    if (is_dirichlet(left) || is_dirichlet(right))
        throw invalid_profile(
            "series oracle needs Robin ends; Dirichlet traces vanish");
    if (left.kappa < 0.0 || right.kappa < 0.0)
        throw invalid_profile("series oracle needs kappa >= 0");

    const auto modes = fd_modes(profile, left, right, grid_nodes, n_modes);
    series_oracle_result out;
    for (const fd_mode& mode : modes) {
        const double gap = mode.lambda - lambda;
        if (std::abs(gap) <= 1e-9 * std::max(1.0, std::abs(lambda)))
            throw frozen_resonance("eigenvalue meets lambda in the series");
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                out.series[i][j] += mode.trace0[i] * mode.trace0[j] / gap;
    }
    boundary_inverse(profile, lambda, left.kappa, right.kappa, out.direct);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            out.deviation = std::max(
                out.deviation, std::abs(out.series[i][j] - out.direct[i][j]));
    return out;
}

}  // namespace weylscat
