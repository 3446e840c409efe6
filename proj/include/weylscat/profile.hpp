#pragma once

#include <cstddef>
#include <memory>
#include <variant>
#include <vector>

namespace weylscat {

// Coefficients of -(1/2)(d/dx)(1/m)(d/dx)u + v*u on one segment.
struct constant_coeff {
    double m;  // effective mass, > 0
    double v;  // potential
};

// Uniform samples across the segment, endpoints included, >= 2 each;
// values between samples are linear interpolants.
struct sampled_coeff {
    std::vector<double> m;
    std::vector<double> v;
};

struct segment {
    double width;  // > 0
    std::variant<constant_coeff, sampled_coeff> coeff;
};

// Piecewise description of (m, v) on [x_a, x_b]. Segment widths must sum to
// the interval length (1e-12 relative), m > 0 everywhere, |v| < 1e6.
class coefficient_profile {
  public:
    coefficient_profile(double x_a, double x_b, std::vector<segment> segments);

    double x_a() const { return x_a_; }
    double x_b() const { return x_b_; }
    double length() const { return x_b_ - x_a_; }
    const std::vector<segment>& segments() const { return segments_; }

    // Breakpoint positions, size segments()+1, first = x_a, last = x_b.
    const std::vector<double>& breakpoints() const { return breaks_; }

    // Pointwise lookup (linear interpolation inside sampled segments).
    // At interior breakpoints the segment on the right wins.
    void coeff_at(double x, double& m, double& v) const;

    double min_potential() const { return v_min_; }
    double max_potential() const { return v_max_; }
    double max_inv_two_mass() const { return inv2m_max_; }  // sup of 1/(2m)

    // Reflected profile on [-x_b, -x_a]: segment order reversed, sample
    // arrays reversed. Propagating it forward walks the original backward.
    coefficient_profile mirrored() const;

  private:
    double x_a_, x_b_;
    std::vector<segment> segments_;
    std::vector<double> breaks_;
    double v_min_, v_max_, inv2m_max_;
};

// Quadrature/trajectory mesh: per-segment uniform submeshes with an even
// interval count each, so composite Simpson never straddles a coefficient
// interface. seg_node[j] indexes the first node of segment j and
// seg_node[segments] is the last node overall.
struct profile_mesh {
    std::vector<double> x;
    std::vector<std::size_t> seg_node;
};

using mesh_ptr = std::shared_ptr<const profile_mesh>;

// target_nodes is a budget, not an exact count: every segment receives at
// least two intervals and interval counts are rounded to even.
mesh_ptr build_mesh(const coefficient_profile& profile,
                    std::size_t target_nodes = 2048);

}  // namespace weylscat
