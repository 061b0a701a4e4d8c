#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>

namespace spinphoton {

using Complex = std::complex<double>;

/// The six tomography analysis directions.
enum class Basis { H, V, D, A, R, L };

inline constexpr std::array<Basis, 6> kAllBases = {Basis::H, Basis::V, Basis::D,
                                                   Basis::A, Basis::R, Basis::L};

/// Pure polarisation state as complex amplitudes in the fixed (H, V) basis.
struct JonesVector {
    Complex h{0.0, 0.0};
    Complex v{0.0, 0.0};

    [[nodiscard]] double norm() const { return std::sqrt(std::norm(h) + std::norm(v)); }

    [[nodiscard]] JonesVector normalized() const {
        const double n = norm();
        return {h / n, v / n};
    }

    [[nodiscard]] Complex dot(const JonesVector& other) const {
        // <this|other>
        return std::conj(h) * other.h + std::conj(v) * other.v;
    }

    friend JonesVector operator*(Complex s, const JonesVector& j) { return {s * j.h, s * j.v}; }
    friend JonesVector operator+(const JonesVector& a, const JonesVector& b) {
        return {a.h + b.h, a.v + b.v};
    }
    friend JonesVector operator-(const JonesVector& a, const JonesVector& b) {
        return {a.h - b.h, a.v - b.v};
    }
};

// Circular handedness: R = (1, i)/sqrt2, L = (1, -i)/sqrt2. With this choice
// V is proportional to R - L and s_RL = +1 means R.
inline JonesVector analysis_state(Basis b) {
    const double s = 1.0 / std::numbers::sqrt2;
    switch (b) {
    case Basis::H: return {{1.0, 0.0}, {0.0, 0.0}};
    case Basis::V: return {{0.0, 0.0}, {1.0, 0.0}};
    case Basis::D: return {{s, 0.0}, {s, 0.0}};
    case Basis::A: return {{s, 0.0}, {-s, 0.0}};
    case Basis::R: return {{s, 0.0}, {0.0, s}};
    case Basis::L: return {{s, 0.0}, {0.0, -s}};
    }
    return {};
}

/// Small dense 2x2 complex matrix, row-major.
struct Matrix2 {
    std::array<std::array<Complex, 2>, 2> m{};

    Complex& operator()(int r, int c) { return m[r][c]; }
    const Complex& operator()(int r, int c) const { return m[r][c]; }

    static Matrix2 identity() {
        Matrix2 out;
        out(0, 0) = 1.0;
        out(1, 1) = 1.0;
        return out;
    }

    static Matrix2 diagonal(Complex a, Complex d) {
        Matrix2 out;
        out(0, 0) = a;
        out(1, 1) = d;
        return out;
    }

    [[nodiscard]] Matrix2 adjoint() const {
        Matrix2 out;
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) out(r, c) = std::conj(m[c][r]);
        return out;
    }

    [[nodiscard]] Complex trace() const { return m[0][0] + m[1][1]; }
    [[nodiscard]] Complex determinant() const { return m[0][0] * m[1][1] - m[0][1] * m[1][0]; }

    friend Matrix2 operator*(const Matrix2& a, const Matrix2& b) {
        Matrix2 out;
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) out(r, c) = a(r, 0) * b(0, c) + a(r, 1) * b(1, c);
        return out;
    }
    friend JonesVector operator*(const Matrix2& a, const JonesVector& j) {
        return {a(0, 0) * j.h + a(0, 1) * j.v, a(1, 0) * j.h + a(1, 1) * j.v};
    }
    friend Matrix2 operator+(const Matrix2& a, const Matrix2& b) {
        Matrix2 out;
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) out(r, c) = a(r, c) + b(r, c);
        return out;
    }
    friend Matrix2 operator*(double s, const Matrix2& a) {
        Matrix2 out;
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) out(r, c) = s * a(r, c);
        return out;
    }
};

/// Change-of-basis matrix whose columns are the R and L Jones vectors.
inline Matrix2 circular_basis() {
    const JonesVector r = analysis_state(Basis::R);
    const JonesVector l = analysis_state(Basis::L);
    Matrix2 u;
    u(0, 0) = r.h;
    u(1, 0) = r.v;
    u(0, 1) = l.h;
    u(1, 1) = l.v;
    return u;
}

/// Unnormalised second-moment matrix G_XY = <E_X E_Y^*> in the (H, V) basis.
/// trace() is the reflected intensity relative to a unit input.
struct CoherenceMatrix {
    Matrix2 g;

    static CoherenceMatrix outer(const JonesVector& j) {
        CoherenceMatrix out;
        out.g(0, 0) = j.h * std::conj(j.h);
        out.g(0, 1) = j.h * std::conj(j.v);
        out.g(1, 0) = j.v * std::conj(j.h);
        out.g(1, 1) = j.v * std::conj(j.v);
        return out;
    }

    [[nodiscard]] double trace() const { return g.trace().real(); }

    /// <e|G|e>: intensity transmitted by an ideal analyser set to `e`.
    [[nodiscard]] double project(const JonesVector& e) const {
        const Complex gh = g(0, 0) * e.h + g(0, 1) * e.v;
        const Complex gv = g(1, 0) * e.h + g(1, 1) * e.v;
        return (std::conj(e.h) * gh + std::conj(e.v) * gv).real();
    }

    [[nodiscard]] double hermiticity_defect() const { return std::abs(g(0, 1) - std::conj(g(1, 0))); }

    /// Eigenvalues of the Hermitian part, ascending.
    [[nodiscard]] std::array<double, 2> eigenvalues() const {
        const double a = g(0, 0).real();
        const double d = g(1, 1).real();
        const Complex b = 0.5 * (g(0, 1) + std::conj(g(1, 0)));
        const double mean = 0.5 * (a + d);
        const double rad = std::sqrt(0.25 * (a - d) * (a - d) + std::norm(b));
        return {mean - rad, mean + rad};
    }

    CoherenceMatrix& operator+=(const CoherenceMatrix& o) {
        g = g + o.g;
        return *this;
    }
    friend CoherenceMatrix operator*(double s, const CoherenceMatrix& c) { return {s * c.g}; }
    friend CoherenceMatrix operator+(const CoherenceMatrix& a, const CoherenceMatrix& b) {
        return {a.g + b.g};
    }
};

} // namespace spinphoton
