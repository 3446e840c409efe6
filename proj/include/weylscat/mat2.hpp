#pragma once

#include <cmath>
#include <complex>

namespace weylscat {

using cplx = std::complex<double>;

// Dense 2x2 complex matrix, row major. Everything the scattering formulas
// need is at most 2x2, and the explicit inverses are part of the contract,
// so this stays a plain aggregate with value semantics.
struct mat2 {
    cplx a{0.0}, b{0.0}, c{0.0}, d{0.0};  // [[a, b], [c, d]]

    static mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static mat2 diag(cplx x, cplx y) { return {x, 0.0, 0.0, y}; }

    cplx det() const { return a * d - b * c; }
    mat2 transpose() const { return {a, c, b, d}; }
    mat2 conj() const {
        return {std::conj(a), std::conj(b), std::conj(c), std::conj(d)};
    }
    mat2 adjoint() const { return transpose().conj(); }
};

inline mat2 operator+(const mat2& x, const mat2& y) {
    return {x.a + y.a, x.b + y.b, x.c + y.c, x.d + y.d};
}
inline mat2 operator-(const mat2& x, const mat2& y) {
    return {x.a - y.a, x.b - y.b, x.c - y.c, x.d - y.d};
}
inline mat2 operator*(cplx s, const mat2& x) {
    return {s * x.a, s * x.b, s * x.c, s * x.d};
}
inline mat2 operator*(const mat2& x, const mat2& y) {
    return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d,
            x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
}

struct cvec2 {
    cplx e0{0.0}, e1{0.0};
};

inline cvec2 operator*(const mat2& x, const cvec2& v) {
    return {x.a * v.e0 + x.b * v.e1, x.c * v.e0 + x.d * v.e1};
}

// Largest entry magnitude; the scale used by all relative singularity tests.
inline double max_norm(const mat2& x) {
    return std::max(std::max(std::abs(x.a), std::abs(x.b)),
                    std::max(std::abs(x.c), std::abs(x.d)));
}

// Plain cofactor inverse. Callers decide beforehand whether det is usable;
// the helper itself does not throw.
inline mat2 inverse(const mat2& x) {
    const cplx idet = 1.0 / x.det();
    return {idet * x.d, -idet * x.b, -idet * x.c, idet * x.a};
}

}  // namespace weylscat
