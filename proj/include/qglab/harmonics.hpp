#pragma once
#include <cmath>
#include <complex>

#include "qglab/errors.hpp"
#include "qglab/jet.hpp"
#include "qglab/specfun.hpp"

// Cylinder-wave building blocks C_n(s r) e^{i n theta} and their jets.
// Near the center the oscillatory J branch switches to an entire series in
// r^2 so grids that hit an atom center exactly stay finite.

namespace qglab {

// Jet of C_n(z) through third order, z a jet with positive value.
// Second and third derivatives come from the defining equation
//   f'' = -f'/z -+ (1 -+ n^2/z^2) f   (upper sign: J,Y; lower: I,K).
inline Jet3 jet_bessel(BesselKind kind, int n, const Jet3& z) {
    double z0 = z.value();
    auto vd = bessel(kind, n, z0);
    double f0 = vd.value, f1 = vd.deriv;
    double n2 = double(n) * n;
    double iz = 1.0 / z0, iz2 = iz * iz;
    bool osc = (kind == BesselKind::J || kind == BesselKind::Y);
    double c = osc ? (1.0 - n2 * iz2) : -(1.0 + n2 * iz2);
    // c'(z) = 2 n^2 / z^3 for both the oscillatory and modified equations
    double f2 = -f1 * iz - c * f0;
    double f3 = -f2 * iz + f1 * iz2 - c * f1 - f0 * (2.0 * n2 * iz2 * iz);
    return jet_compose(z, f0, f1, f2, f3);
}

// Value of C_n(s r) e^{i n theta} at offsets (dx, dy) from the atom center.
inline std::complex<double> cylinder_wave(BesselKind kind, double s, int n,
                                          double dx, double dy) {
    double r = std::hypot(dx, dy);
    if (r == 0.0) {
        if (kind == BesselKind::J || kind == BesselKind::I)
            return n == 0 ? 1.0 : 0.0;
        throw NumericError("cylinder_wave: singular kind evaluated at its center");
    }
    double f = bessel(kind, n, s * r).value;
    double th = std::atan2(dy, dx);
    return f * std::exp(std::complex<double>(0.0, n * th));
}

// Jet of C_n(s r) e^{i n theta}; dx, dy are jets of the centered coordinates.
inline CJet3 cylinder_wave_jet(BesselKind kind, double s, int n,
                               const Jet3& dx, const Jet3& dy) {
    Jet3 r2 = dx * dx + dy * dy;
    double r20 = r2.value();
    double z2 = s * s * r20;

    bool entire = (kind == BesselKind::J || kind == BesselKind::I);
    if (entire && z2 <= 25.0) {
        // C_n(s r) e^{i n theta} = (s/2)^n w^n H(r^2), w = dx + i dy,
        // H(u) = sum_k (-+1)^k (s^2/4)^k u^k / (k! (k+n)!), entire in u.
        double q = 0.25 * s * s;
        if (kind == BesselKind::J) q = -q;
        double coef[48];
        double a = 1.0;
        for (int k = 1; k <= n; ++k) a /= double(k);  // 1/n!
        int K = 0;
        double term = 1.0, mag = 0.0;  // |coef[k] r20^k|, recurrence keeps it overflow-free
        for (int k = 0; k < 48; ++k) {
            coef[k] = a;
            K = k;
            mag = std::max(mag, term);
            if (k >= 4 && term < 1e-20 * (mag + 1e-300)) break;
            a *= q / (double(k + 1) * double(k + 1 + n));
            term *= 0.25 * z2 / (double(k + 1) * double(k + 1 + n));
        }
        double h0 = 0, h1 = 0, h2 = 0, h3 = 0;
        for (int k = K; k >= 0; --k) {
            h3 = h3 * r20 + h2;
            h2 = h2 * r20 + h1;
            h1 = h1 * r20 + h0;
            h0 = h0 * r20 + coef[k];
        }
        Jet3 H = jet_compose(r2, h0, h1, 2.0 * h2, 6.0 * h3);
        CJet3 w{dx, dy};
        CJet3 out = jet_cpow(w, n);
        out.re = out.re * H;
        out.im = out.im * H;
        double pref = std::pow(0.5 * s, n);
        out.re = out.re * pref;
        out.im = out.im * pref;
        return out;
    }

    double r0 = std::sqrt(r20);
    if (!(r0 > 0.0))
        throw NumericError("cylinder_wave_jet: singular kind evaluated at its center");
    Jet3 r = jet_sqrt(r2);
    Jet3 f = jet_bessel(kind, n, r * s);
    if (n == 0) return CJet3{f, Jet3::constant(0.0)};
    // e^{i n theta} = w^n / r^n
    CJet3 w{dx, dy};
    CJet3 wn = jet_cpow(w, n);
    Jet3 invrn = jet_pow(r2, -0.5 * n);
    Jet3 fr = f * invrn;
    return CJet3{wn.re * fr, wn.im * fr};
}

}
