#include "weylscat/profile.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "weylscat/errors.hpp"

namespace weylscat {

namespace {

constexpr double kPotentialBound = 1e6;

void check_coeff_values(double m, double v, std::size_t seg_idx) {
    if (!(std::isfinite(m)) || m <= 0.0)
        throw invalid_profile("segment " + std::to_string(seg_idx) +
                              ": mass must be finite and > 0");
    if (!(std::isfinite(v)) || std::abs(v) >= kPotentialBound)
        throw invalid_profile("segment " + std::to_string(seg_idx) +
                              ": potential must be finite with |v| < 1e6");
}

}  // namespace

coefficient_profile::coefficient_profile(double x_a, double x_b,
                                         std::vector<segment> segments)
    : x_a_(x_a), x_b_(x_b), segments_(std::move(segments)) {
    if (!std::isfinite(x_a_) || !std::isfinite(x_b_) || !(x_a_ < x_b_))
        throw invalid_profile("interval: x_a must be < x_b and finite");
    if (segments_.empty())
        throw invalid_profile("profile needs at least one segment");

    v_min_ = kPotentialBound;
    v_max_ = -kPotentialBound;
    inv2m_max_ = 0.0;
    double width_sum = 0.0;
    breaks_.reserve(segments_.size() + 1);
    breaks_.push_back(x_a_);
    for (std::size_t j = 0; j < segments_.size(); ++j) {
        const segment& seg = segments_[j];
        if (!std::isfinite(seg.width) || seg.width <= 0.0)
            throw invalid_profile("segment " + std::to_string(j) +
                                  ": width must be finite and > 0");
        width_sum += seg.width;
        breaks_.push_back(x_a_ + width_sum);
        if (const auto* c = std::get_if<constant_coeff>(&seg.coeff)) {
            check_coeff_values(c->m, c->v, j);
            v_min_ = std::min(v_min_, c->v);
            v_max_ = std::max(v_max_, c->v);
            inv2m_max_ = std::max(inv2m_max_, 1.0 / (2.0 * c->m));
        } else {
            const auto& s = std::get<sampled_coeff>(seg.coeff);
            if (s.m.size() < 2 || s.m.size() != s.v.size())
                throw invalid_profile(
                    "segment " + std::to_string(j) +
                    ": sampled coefficients need >= 2 samples, equal lengths");
            for (std::size_t i = 0; i < s.m.size(); ++i) {
                check_coeff_values(s.m[i], s.v[i], j);
                v_min_ = std::min(v_min_, s.v[i]);
                v_max_ = std::max(v_max_, s.v[i]);
                inv2m_max_ = std::max(inv2m_max_, 1.0 / (2.0 * s.m[i]));
            }
        }
    }
    const double len = x_b_ - x_a_;
    if (std::abs(width_sum - len) > 1e-12 * std::max(1.0, std::abs(len)))
        throw invalid_profile("segment widths must sum to x_b - x_a");
    breaks_.back() = x_b_;  // absorb the accumulated rounding
}

void coefficient_profile::coeff_at(double x, double& m, double& v) const {
    // Right-continuous choice at breakpoints; clamp outside the interval.
    auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x);
    std::size_t j =
        it == breaks_.begin() ? 0 : static_cast<std::size_t>(it - breaks_.begin()) - 1;
    if (j >= segments_.size()) j = segments_.size() - 1;
    const segment& seg = segments_[j];
    if (const auto* c = std::get_if<constant_coeff>(&seg.coeff)) {
        m = c->m;
        v = c->v;
        return;
    }
    const auto& s = std::get<sampled_coeff>(seg.coeff);
    const std::size_t n = s.m.size();
    double t = (x - breaks_[j]) / seg.width * static_cast<double>(n - 1);
    t = std::clamp(t, 0.0, static_cast<double>(n - 1));
    const std::size_t i = std::min(static_cast<std::size_t>(t), n - 2);
    const double w = t - static_cast<double>(i);
    m = (1.0 - w) * s.m[i] + w * s.m[i + 1];
    v = (1.0 - w) * s.v[i] + w * s.v[i + 1];
}

coefficient_profile coefficient_profile::mirrored() const {
    std::vector<segment> rev(segments_.rbegin(), segments_.rend());
    for (segment& seg : rev) {
        if (auto* s = std::get_if<sampled_coeff>(&seg.coeff)) {
            std::reverse(s->m.begin(), s->m.end());
            std::reverse(s->v.begin(), s->v.end());
        }
    }
    return coefficient_profile(-x_b_, -x_a_, std::move(rev));
}

mesh_ptr build_mesh(const coefficient_profile& profile,
                    std::size_t target_nodes) {
    const auto& segs = profile.segments();
    const double len = profile.length();
    const double target_intervals =
        static_cast<double>(std::max<std::size_t>(target_nodes, 2) - 1);

    auto mesh = std::make_shared<profile_mesh>();
    mesh->seg_node.reserve(segs.size() + 1);
    mesh->x.push_back(profile.x_a());
    for (std::size_t j = 0; j < segs.size(); ++j) {
        mesh->seg_node.push_back(mesh->x.size() - 1);
        const double raw = target_intervals * segs[j].width / len;
        const std::size_t half =
            std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(raw / 2.0)));
        const std::size_t n = 2 * half;
        const double a = profile.breakpoints()[j];
        const double b = profile.breakpoints()[j + 1];
        for (std::size_t i = 1; i < n; ++i)
            mesh->x.push_back(a + (b - a) * static_cast<double>(i) /
                                      static_cast<double>(n));
        mesh->x.push_back(b);  // land exactly on the breakpoint
    }
    mesh->seg_node.push_back(mesh->x.size() - 1);
    return mesh;
}

}  // namespace weylscat
