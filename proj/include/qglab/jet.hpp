#pragma once
#include <array>
#include <cmath>
#include <complex>

#include "qglab/errors.hpp"
#include "qglab/linalg.hpp"

namespace qglab {

// Truncated Taylor expansion in (t, x, y) through total degree 3: 20 monomials.
// c[idx(i,j,k)] stores the Taylor coefficient, i.e. the partial derivative
// divided by i! j! k!. Products are truncated at total degree 3, which keeps
// every derivative needed by the vorticity residual (third order) exact.
struct Jet3 {
    static constexpr int N = 20;
    std::array<double, N> c{};

    // monomial exponent table, ordered by total degree
    static constexpr int EX[N][3] = {
        {0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {2, 0, 0}, {1, 1, 0}, {1, 0, 1},
        {0, 2, 0}, {0, 1, 1}, {0, 0, 2}, {3, 0, 0}, {2, 1, 0}, {2, 0, 1}, {1, 2, 0},
        {1, 1, 1}, {1, 0, 2}, {0, 3, 0}, {0, 2, 1}, {0, 1, 2}, {0, 0, 3}};

    static constexpr int index(int i, int j, int k) {
        for (int p = 0; p < N; ++p)
            if (EX[p][0] == i && EX[p][1] == j && EX[p][2] == k) return p;
        return -1;
    }

    static Jet3 constant(double v) {
        Jet3 r;
        r.c[0] = v;
        return r;
    }
    // which: 0 = t, 1 = x, 2 = y
    static Jet3 var(int which, double value) {
        Jet3 r;
        r.c[0] = value;
        r.c[1 + which] = 1.0;
        return r;
    }

    double value() const { return c[0]; }

    // partial derivative d^{i+j+k} / dt^i dx^j dy^k
    double deriv(int i, int j, int k) const {
        int p = index(i, j, k);
        if (p < 0) throw ConfigError("Jet3: derivative order exceeds 3");
        static constexpr double F[4] = {1, 1, 2, 6};
        return c[p] * F[i] * F[j] * F[k];
    }

    Jet3& operator+=(const Jet3& o) {
        for (int i = 0; i < N; ++i) c[i] += o.c[i];
        return *this;
    }
    Jet3& operator-=(const Jet3& o) {
        for (int i = 0; i < N; ++i) c[i] -= o.c[i];
        return *this;
    }
    Jet3& operator*=(double s) {
        for (double& v : c) v *= s;
        return *this;
    }
    friend Jet3 operator+(Jet3 a, const Jet3& b) { return a += b; }
    friend Jet3 operator-(Jet3 a, const Jet3& b) { return a -= b; }
    friend Jet3 operator-(Jet3 a) {
        for (double& v : a.c) v = -v;
        return a;
    }
    friend Jet3 operator*(double s, Jet3 a) { return a *= s; }
    friend Jet3 operator*(Jet3 a, double s) { return a *= s; }
    friend Jet3 operator+(Jet3 a, double s) {
        a.c[0] += s;
        return a;
    }
    friend Jet3 operator+(double s, Jet3 a) {
        a.c[0] += s;
        return a;
    }
    friend Jet3 operator-(Jet3 a, double s) {
        a.c[0] -= s;
        return a;
    }

    friend Jet3 operator*(const Jet3& a, const Jet3& b);
};

namespace jetdetail {
struct MulTable {
    // list of (p, q, r): c_r += a_p * b_q
    int np = 0;
    std::array<int, 3 * 420> t{};
    MulTable() {
        for (int p = 0; p < Jet3::N; ++p)
            for (int q = 0; q < Jet3::N; ++q) {
                int i = Jet3::EX[p][0] + Jet3::EX[q][0];
                int j = Jet3::EX[p][1] + Jet3::EX[q][1];
                int k = Jet3::EX[p][2] + Jet3::EX[q][2];
                if (i + j + k > 3) continue;
                int r = Jet3::index(i, j, k);
                t[3 * np] = p;
                t[3 * np + 1] = q;
                t[3 * np + 2] = r;
                ++np;
            }
    }
};
inline const MulTable& mul_table() {
    static const MulTable tab;
    return tab;
}
}  // namespace jetdetail

inline Jet3 operator*(const Jet3& a, const Jet3& b) {
    const auto& tab = jetdetail::mul_table();
    Jet3 r;
    for (int n = 0; n < tab.np; ++n) {
        const int* e = &tab.t[3 * n];
        r.c[e[2]] += a.c[e[0]] * b.c[e[1]];
    }
    return r;
}

// f(u) for scalar f with derivatives f0..f3 at u.value(); exact through degree 3.
inline Jet3 jet_compose(const Jet3& u, double f0, double f1, double f2, double f3) {
    Jet3 n = u;
    n.c[0] = 0.0;  // nilpotent part
    Jet3 r = Jet3::constant(f3 / 6.0);
    r = r * n + Jet3::constant(f2 / 2.0);
    r = r * n + Jet3::constant(f1);
    r = r * n + Jet3::constant(f0);
    return r;
}

inline Jet3 jet_exp(const Jet3& u) {
    double e = std::exp(u.value());
    return jet_compose(u, e, e, e, e);
}
inline Jet3 jet_sin(const Jet3& u) {
    double s = std::sin(u.value()), c = std::cos(u.value());
    return jet_compose(u, s, c, -s, -c);
}
inline Jet3 jet_cos(const Jet3& u) {
    double s = std::sin(u.value()), c = std::cos(u.value());
    return jet_compose(u, c, -s, -c, s);
}
inline Jet3 jet_sqrt(const Jet3& u) {
    double v = u.value();
    if (v <= 0) throw NumericError("jet_sqrt: argument must be positive");
    double r = std::sqrt(v);
    return jet_compose(u, r, 0.5 / r, -0.25 / (r * v), 0.375 / (r * v * v));
}
// u^p for real p (u > 0)
inline Jet3 jet_pow(const Jet3& u, double p) {
    double v = u.value();
    if (v <= 0) throw NumericError("jet_pow: base must be positive");
    double f0 = std::pow(v, p);
    double f1 = p * f0 / v;
    double f2 = (p - 1) * f1 / v;
    double f3 = (p - 2) * f2 / v;
    return jet_compose(u, f0, f1, f2, f3);
}
inline Jet3 jet_inv(const Jet3& u) {
    double v = u.value();
    if (v == 0) throw NumericError("jet_inv: division by zero");
    double f0 = 1.0 / v;
    return jet_compose(u, f0, -f0 * f0, 2.0 * f0 * f0 * f0, -6.0 * f0 * f0 * f0 * f0);
}

// univariate polynomial of t as a jet about t0 (any degree; higher derivatives
// beyond 3 are simply not represented)
inline Jet3 jet_poly_t(const Vec& coef, double t0) {
    double p0 = 0, p1 = 0, p2 = 0, p3 = 0;
    for (size_t k = coef.size(); k-- > 0;) {
        p3 = p3 * t0 + 3.0 * p2;
        p2 = p2 * t0 + 2.0 * p1;
        p1 = p1 * t0 + p0;
        p0 = p0 * t0 + coef[k];
    }
    Jet3 r;
    r.c[Jet3::index(0, 0, 0)] = p0;
    r.c[Jet3::index(1, 0, 0)] = p1;
    r.c[Jet3::index(2, 0, 0)] = p2 / 2.0;
    r.c[Jet3::index(3, 0, 0)] = p3 / 6.0;
    return r;
}

// substitute trivariate jets into a trivariate Taylor polynomial:
// result = sum inner[p] * ot^i ox^j oy^k. The offset jets ot, ox, oy must
// have zero constant term (they represent coordinate differences).
inline Jet3 jet_compose3(const std::array<double, Jet3::N>& inner, const Jet3& ot,
                         const Jet3& ox, const Jet3& oy) {
    Jet3 pt[4], px[4], py[4];
    pt[0] = px[0] = py[0] = Jet3::constant(1.0);
    for (int p = 1; p <= 3; ++p) {
        pt[p] = pt[p - 1] * ot;
        px[p] = px[p - 1] * ox;
        py[p] = py[p - 1] * oy;
    }
    Jet3 r;
    for (int p = 0; p < Jet3::N; ++p) {
        if (inner[p] == 0.0) continue;
        Jet3 term = pt[Jet3::EX[p][0]] * px[Jet3::EX[p][1]] * py[Jet3::EX[p][2]];
        r += inner[p] * term;
    }
    return r;
}

// complex-valued jet as a (re, im) pair
struct CJet3 {
    Jet3 re, im;

    static CJet3 constant(std::complex<double> z) {
        return {Jet3::constant(z.real()), Jet3::constant(z.imag())};
    }
    CJet3& operator+=(const CJet3& o) {
        re += o.re;
        im += o.im;
        return *this;
    }
    friend CJet3 operator+(CJet3 a, const CJet3& b) { return a += b; }
    friend CJet3 operator*(const CJet3& a, const CJet3& b) {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    friend CJet3 operator*(const CJet3& a, const Jet3& s) { return {a.re * s, a.im * s}; }
    friend CJet3 operator*(std::complex<double> z, const CJet3& a) {
        return {z.real() * a.re - z.imag() * a.im, z.imag() * a.re + z.real() * a.im};
    }
};

// e^{mu * s} for complex mu and a real jet s
inline CJet3 jet_cexp(std::complex<double> mu, const Jet3& s) {
    Jet3 mag = jet_exp(mu.real() * s);
    Jet3 ph = mu.imag() * s;
    return {mag * jet_cos(ph), mag * jet_sin(ph)};
}

// w^n for w = wre + i*wim (integer n >= 0)
inline CJet3 jet_cpow(const CJet3& w, int n) {
    CJet3 r = CJet3::constant({1.0, 0.0});
    for (int k = 0; k < n; ++k) r = r * w;
    return r;
}

}
