#include "qglab/families.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <memory>
#include <tuple>

#include "qglab/errors.hpp"
#include "qglab/harmonics.hpp"

namespace qglab {

namespace {

using Cplx = std::complex<double>;

double polyval(const Vec& p, double t) {
    double v = 0;
    for (size_t k = p.size(); k-- > 0;) v = v * t + p[k];
    return v;
}

Vec polyder(const Vec& p) {
    if (p.size() <= 1) return {};
    Vec d(p.size() - 1);
    for (size_t k = 1; k < p.size(); ++k) d[k - 1] = double(k) * p[k];
    return d;
}

void axpy(Vec& out, double v, const Vec& e) {
    for (size_t i = 0; i < out.size(); ++i) out[i] += v * e[i];
}

// ---------------------------------------------------------------- atom fields

struct PW {  // Re(A e^{i(k1 x + k2 y)}) e
    double k1, k2, Ar, Ai;
    Vec e;
};
struct RW {  // Re(A J_n(s r) e^{i n theta}) e about (cx, cy); prefactors folded into A
    double s;
    int n;
    double Ar, Ai, cx, cy;
    Vec e;
};
struct EW {  // A e^{k1 x + k2 y} e
    double k1, k2, A;
    Vec e;
};
struct HW {  // Re(A (x + i y)^deg) e
    int deg;
    double Ar, Ai;
    Vec e;
};

struct AtomImpl {
    int m = 0;
    std::vector<PW> pw;
    std::vector<RW> rw;
    std::vector<EW> ew;
    std::vector<HW> hw;
    Vec e0;  // kernel direction, W-normalized; empty when the shift is invertible
    double gamma = 0, cubic = 0;
    Vec ubg;  // background velocity; empty when the background is off
};

Vec atom_eval(const AtomImpl& s, double x, double y) {
    Vec psi(s.m, 0.0);
    for (const auto& a : s.pw) {
        double ph = a.k1 * x + a.k2 * y;
        axpy(psi, a.Ar * std::cos(ph) - a.Ai * std::sin(ph), a.e);
    }
    for (const auto& a : s.rw) {
        Cplx z = cylinder_wave(BesselKind::J, a.s, a.n, x - a.cx, y - a.cy);
        axpy(psi, a.Ar * z.real() - a.Ai * z.imag(), a.e);
    }
    for (const auto& a : s.ew) axpy(psi, a.A * std::exp(a.k1 * x + a.k2 * y), a.e);
    for (const auto& a : s.hw) {
        Cplx w = 1.0;
        for (int k = 0; k < a.deg; ++k) w *= Cplx(x, y);
        axpy(psi, a.Ar * w.real() - a.Ai * w.imag(), a.e);
    }
    if (!s.e0.empty()) axpy(psi, (s.gamma + s.cubic * y) * y * y, s.e0);
    if (!s.ubg.empty())
        for (int i = 0; i < s.m; ++i) psi[i] -= y * s.ubg[i];
    return psi;
}

std::vector<Jet3> atom_jet(const AtomImpl& s, double x, double y) {
    std::vector<Jet3> out(s.m);
    Jet3 X = Jet3::var(1, x), Y = Jet3::var(2, y);
    auto add = [&](const Jet3& v, const Vec& e) {
        for (int i = 0; i < s.m; ++i) out[i] += v * e[i];
    };
    for (const auto& a : s.pw) {
        Jet3 ph = a.k1 * X + a.k2 * Y;
        add(a.Ar * jet_cos(ph) - a.Ai * jet_sin(ph), a.e);
    }
    for (const auto& a : s.rw) {
        CJet3 z = cylinder_wave_jet(BesselKind::J, a.s, a.n, X - a.cx, Y - a.cy);
        add(a.Ar * z.re - a.Ai * z.im, a.e);
    }
    for (const auto& a : s.ew) add(a.A * jet_exp(a.k1 * X + a.k2 * Y), a.e);
    for (const auto& a : s.hw) {
        CJet3 wn = jet_cpow(CJet3{X, Y}, a.deg);
        add(a.Ar * wn.re - a.Ai * wn.im, a.e);
    }
    if (!s.e0.empty()) add((s.gamma * (Y * Y)) + (s.cubic * (Y * Y * Y)), s.e0);
    if (!s.ubg.empty())
        for (int i = 0; i < s.m; ++i) out[i] -= Y * s.ubg[i];
    return out;
}

SolutionField build_atom_field(const CouplingMatrix& F, double beta, const AffineSpec& spec,
                               const char* family) {
    int m = F.m;
    Vec B = spec.B;
    if (B.empty()) B.assign(m, 0.0);
    if (static_cast<int>(B.size()) != m)
        throw ConfigError("atom field: diagonal shift length must match the layer count");

    CouplingMatrix Fs = F.shifted(B);
    SpectralData sd = spectral(Fs);
    double lamScale = 0;
    for (double l : sd.lambdas) lamScale = std::max(lamScale, std::abs(l));

    int kernel = sd.zero_index;
    if (kernel < 0)
        for (int i = 0; i < m; ++i)
            if (std::abs(sd.lambdas[i]) <= 1e-8 * lamScale) {
                kernel = i;
                break;
            }
    // pseudo-inverse must drop a near-zero mode of an inexactly singular shift
    if (kernel >= 0 && sd.lambdas[kernel] != 0.0) {
        SpectralData tmp = sd;
        tmp.lambdas[kernel] = 0.0;
        sd.pinv = pseudo_inverse(tmp);
    }

    auto impl = std::make_shared<AtomImpl>();
    impl->m = m;

    auto mode_lambda = [&](int mode) {
        if (mode < 1 || mode > m) throw ConfigError("atom field: mode index out of range");
        return sd.lambdas[mode - 1];
    };

    for (const auto& a : spec.planeAtoms) {
        double nu = mode_lambda(a.mode);
        if (!(nu > 0) || a.mode - 1 == kernel)
            throw ConfigError("plane atom requires a mode with positive eigenvalue");
        double k = std::sqrt(nu);
        impl->pw.push_back({k * std::cos(a.angle), k * std::sin(a.angle), a.amplitude.real(),
                            a.amplitude.imag(), sd.eigvec(a.mode - 1)});
    }
    for (const auto& a : spec.radialAtoms) {
        double nu = mode_lambda(a.mode);
        if (!(nu > 0) || a.mode - 1 == kernel)
            throw ConfigError("radial atom requires a mode with positive eigenvalue");
        if (a.order < 0 || a.order > 20)
            throw ConfigError("radial atom order must lie in [0, 20]");
        // fold 2 pi i^n into the amplitude
        Cplx in = 1.0;
        for (int k = 0; k < a.order % 4; ++k) in *= Cplx(0.0, 1.0);
        Cplx A = 2.0 * 3.14159265358979323846 * in * a.amplitude;
        impl->rw.push_back(
            {std::sqrt(nu), a.order, A.real(), A.imag(), a.cx, a.cy, sd.eigvec(a.mode - 1)});
    }
    for (const auto& a : spec.expAtoms) {
        double nu = mode_lambda(a.mode);
        if (!(nu < 0) || a.mode - 1 == kernel)
            throw ConfigError("exponential atom requires a mode with negative eigenvalue");
        double k = std::sqrt(-nu);
        impl->ew.push_back(
            {k * std::cos(a.angle), k * std::sin(a.angle), a.amplitude, sd.eigvec(a.mode - 1)});
    }
    bool wantsKernel = !spec.harmonicAtoms.empty() || spec.gamma != 0;
    if (wantsKernel && kernel < 0)
        throw ConfigError("kernel-mode terms require a singular shifted matrix");
    if (kernel >= 0) {
        impl->e0 = sd.eigvec(kernel);
        double n0 = weighted_norm(impl->e0, sd.weights);
        for (double& v : impl->e0) v /= n0;
    }
    for (const auto& a : spec.harmonicAtoms) {
        if (a.degree < 0) throw ConfigError("harmonic atom degree must be nonnegative");
        impl->hw.push_back({a.degree, a.amplitude.real(), a.amplitude.imag(), impl->e0});
    }
    impl->gamma = spec.gamma;

    Mat bgCoef(m, 3);
    Vec ubg;
    if (spec.includeBackground) {
        Vec ones(m, 1.0);
        ubg = matvec(sd.pinv, ones);
        for (double& v : ubg) v *= beta;
        impl->ubg = ubg;
        for (int i = 0; i < m; ++i) bgCoef(i, 0) = -ubg[i];
        if (kernel >= 0) {
            Vec w = sd.weights;
            double dot = 0;
            for (int i = 0; i < m; ++i) dot += w[i] * impl->e0[i];
            impl->cubic = -beta * dot / 6.0;
            for (int i = 0; i < m; ++i) bgCoef(i, 2) = impl->cubic * impl->e0[i];
        }
    }

    SolutionField f;
    f.m = m;
    f.eval = [impl](double, double x, double y) { return atom_eval(*impl, x, y); };
    f.jet = [impl](double, double x, double y) { return atom_jet(*impl, x, y); };
    f.tags.family = family;
    f.tags.Fsub = F.sub;
    f.tags.Fsup = F.sup;
    f.tags.Bdiag = B;
    f.tags.hasBackground = spec.includeBackground;
    f.tags.bgCoef = bgCoef;
    f.tags.ubg = ubg;
    return f;
}

}  // namespace

SolutionField herglotz_solution(const CouplingMatrix& F, double beta, const HerglotzSpec& spec) {
    AffineSpec a;
    a.B = spec.B;
    a.planeAtoms = spec.planeAtoms;
    a.radialAtoms = spec.radialAtoms;
    if (spec.sigma1 != 0 || spec.sigma2 != 0)
        a.harmonicAtoms.push_back({1, Cplx(spec.sigma1, -spec.sigma2)});
    a.includeBackground = spec.includeBackground;
    return build_atom_field(F, beta, a, "herglotz");
}

SolutionField affine_stationary(const CouplingMatrix& F, double beta, const AffineSpec& spec) {
    return build_atom_field(F, beta, spec, "affine-stationary");
}

// ---------------------------------------------------------------- superpose

namespace {

bool same_vec(const Vec& a, const Vec& b) {
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin());
}

int family_class(const std::string& fam) {
    if (fam == "herglotz" || fam == "affine-stationary" || fam == "superposition") return 0;
    if (fam == "bbm-wave" || fam == "kg-barotropic") return 1;
    return 2;
}

}  // namespace

SolutionField superpose(const std::vector<SolutionField>& fields) {
    if (fields.empty()) throw ConfigError("superpose: no fields given");
    if (fields.size() == 1) return fields[0];

    int m = fields[0].m;
    int cls = family_class(fields[0].tags.family);
    if (cls == 2) throw ConfigError("superpose: family does not admit linear superposition");

    const Vec zeros(m, 0.0);
    auto bdiag = [&](const SolutionField& f) { return f.tags.Bdiag.empty() ? zeros : f.tags.Bdiag; };

    Vec fsub, fsup;
    for (const auto& f : fields) {
        if (f.m != m) throw ConfigError("superpose: layer counts differ");
        if (f.tags.boosted)
            throw ConfigError("superpose: boost the superposition, not its parts");
        if (family_class(f.tags.family) != cls)
            throw ConfigError("superpose: families are not compatible");
        if (!f.tags.Fsub.empty()) {
            if (fsub.empty()) {
                fsub = f.tags.Fsub;
                fsup = f.tags.Fsup;
            } else if (!same_vec(fsub, f.tags.Fsub) || !same_vec(fsup, f.tags.Fsup))
                throw ConfigError("superpose: coupling matrices differ");
        }
        if (cls == 0 && !same_vec(bdiag(f), bdiag(fields[0])))
            throw ConfigError("superpose: diagonal shifts differ");
        if (cls == 1 && f.tags.chi != fields[0].tags.chi)
            throw ConfigError("superpose: tilt parameters differ");
    }

    // the forced background enters once, not once per field
    int nbg = 0;
    Mat bg;
    Vec ubg;
    for (const auto& f : fields)
        if (f.tags.hasBackground) {
            if (nbg == 0) {
                bg = f.tags.bgCoef;
                ubg = f.tags.ubg;
            } else if (bg.a != f.tags.bgCoef.a)
                throw ConfigError("superpose: background terms differ");
            ++nbg;
        }
    Mat corr(m, 3);
    if (nbg > 1)
        for (size_t i = 0; i < corr.a.size(); ++i) corr.a[i] = (nbg - 1) * bg.a[i];

    bool allJets = true;
    for (const auto& f : fields) allJets = allJets && f.has_jet();

    auto parts = std::make_shared<std::vector<SolutionField>>(fields);
    auto corrp = std::make_shared<Mat>(corr);

    SolutionField out;
    out.m = m;
    out.eval = [parts, corrp, m](double t, double x, double y) {
        Vec psi(m, 0.0);
        for (const auto& f : *parts) {
            Vec p = f.eval(t, x, y);
            for (int i = 0; i < m; ++i) psi[i] += p[i];
        }
        const Mat& C = *corrp;
        for (int i = 0; i < m; ++i) psi[i] -= ((C(i, 2) * y + C(i, 1)) * y + C(i, 0)) * y;
        return psi;
    };
    if (allJets)
        out.jet = [parts, corrp, m](double t, double x, double y) {
            std::vector<Jet3> js(m);
            for (const auto& f : *parts) {
                auto p = f.jet(t, x, y);
                for (int i = 0; i < m; ++i) js[i] += p[i];
            }
            const Mat& C = *corrp;
            Jet3 Y = Jet3::var(2, y);
            for (int i = 0; i < m; ++i)
                js[i] -= ((Y * C(i, 2) + C(i, 1)) * Y + C(i, 0)) * Y;
            return js;
        };

    for (const auto& f : fields)
        if (f.domain.kind != Domain::Kind::AllPlane) {
            out.domain = f.domain;
            break;
        }
    out.tags.family = "superposition";
    out.tags.Fsub = fsub;
    out.tags.Fsup = fsup;
    out.tags.Bdiag = cls == 0 ? bdiag(fields[0]) : zeros;
    out.tags.chi = fields[0].tags.chi;
    out.tags.hasBackground = nbg > 0;
    out.tags.bgCoef = nbg > 0 ? bg : Mat(m, 3);
    out.tags.ubg = ubg;
    return out;
}

// ---------------------------------------------------------------- boost

SolutionField boost(const SolutionField& field, const BoostSpec& bs) {
    Vec h = bs.h;
    while (!h.empty() && h.back() == 0.0) h.pop_back();
    if (h.size() > 7) throw ConfigError("boost: shift polynomial degree exceeds 6");
    if (h.empty()) return field;
    Vec hd = polyder(h);

    SolutionField out;
    out.m = field.m;
    int m = field.m;
    auto innerEval = field.eval;
    out.eval = [innerEval, h, hd, m](double t, double x, double y) {
        Vec psi = innerEval(t, x - polyval(h, t), y);
        double hp = polyval(hd, t);
        for (int i = 0; i < m; ++i) psi[i] -= hp * y;
        return psi;
    };
    if (field.has_jet()) {
        auto innerJet = field.jet;
        out.jet = [innerJet, h, hd, m](double t, double x, double y) {
            double ht = polyval(h, t);
            auto inner = innerJet(t, x - ht, y);
            Jet3 ot, ox, oy;
            ot.c[1] = 1.0;
            ox.c[2] = 1.0;
            oy.c[3] = 1.0;
            Jet3 hj = jet_poly_t(h, t);
            hj.c[0] = 0.0;
            ox -= hj;
            Jet3 hp = jet_poly_t(hd, t);
            Jet3 Y = Jet3::var(2, y);
            std::vector<Jet3> js(m);
            for (int i = 0; i < m; ++i) js[i] = jet_compose3(inner[i].c, ot, ox, oy) - hp * Y;
            return js;
        };
    }
    out.domain = field.domain;
    if (out.domain.kind != Domain::Kind::AllPlane) {
        Vec& s = out.domain.shift;
        if (s.size() < h.size()) s.resize(h.size(), 0.0);
        for (size_t k = 0; k < h.size(); ++k) s[k] += h[k];
    }
    out.tags = field.tags;
    out.tags.boosted = true;
    out.tags.note = out.tags.note.empty() ? "boosted" : out.tags.note + "; boosted";
    return out;
}

// ---------------------------------------------------------------- tilted waves

SolutionField kg_barotropic_mode(int m, double beta, double chi, double k, double amplitude,
                                 double phase) {
    if (m < 1) throw ConfigError("kg_barotropic_mode: need at least one layer");
    if (k == 0.0) throw ConfigError("kg_barotropic_mode: wavenumber must be nonzero");
    double a = beta / ((1.0 + chi * chi) * k);

    SolutionField f;
    f.m = m;
    f.eval = [m, k, chi, a, amplitude, phase](double t, double x, double y) {
        double v = amplitude * std::cos(k * x - k * chi * y + a * t + phase);
        return Vec(m, v);
    };
    f.jet = [m, k, chi, a, amplitude, phase](double t, double x, double y) {
        Jet3 ph = k * Jet3::var(1, x) - (k * chi) * Jet3::var(2, y) + a * Jet3::var(0, t);
        ph.c[0] += phase;
        Jet3 v = amplitude * jet_cos(ph);
        return std::vector<Jet3>(m, v);
    };
    f.tags.family = "kg-barotropic";
    f.tags.chi = chi;
    f.tags.Bdiag = Vec(m, 0.0);
    return f;
}

namespace {

// robust real roots of a quadratic a x^2 + b x + c (a != 0)
void quadratic_roots(double a, double b, double c, Vec& out) {
    double disc = b * b - 4.0 * a * c;
    if (disc < 0) return;
    double sq = std::sqrt(disc);
    double q = -0.5 * (b + (b >= 0 ? sq : -sq));
    if (q != 0) {
        out.push_back(q / a);
        out.push_back(c / q);
    } else {
        out.push_back(0.0);
        out.push_back(0.0);
    }
}

void polish_roots(long double a3, long double a2, long double a1, long double a0, Vec& roots) {
    for (double& r : roots) {
        long double x = r;
        for (int it = 0; it < 6; ++it) {
            long double p = ((a3 * x + a2) * x + a1) * x + a0;
            long double dp = (3.0L * a3 * x + 2.0L * a2) * x + a1;
            if (dp == 0.0L) break;
            long double step = p / dp;
            x -= step;
            if (std::abs(step) <= 1e-19L * std::abs(x)) break;
        }
        r = static_cast<double>(x);
    }
}

}  // namespace

CubicRoots bbm_dispersion_roots(double chi, double lambda, double alpha, double delta,
                                double beta) {
    if (alpha < 0) throw ConfigError("bbm_dispersion_roots: alpha must be nonnegative");
    double op = 1.0 + chi * chi;
    double a3 = alpha * op, a2 = -delta * op, a1 = beta - alpha * lambda, a0 = delta * lambda;

    CubicRoots out;
    out.discriminant = 18.0 * a3 * a2 * a1 * a0 - 4.0 * a2 * a2 * a2 * a0 +
                       a2 * a2 * a1 * a1 - 4.0 * a3 * a1 * a1 * a1 -
                       27.0 * a3 * a3 * a0 * a0;

    if (a3 == 0.0 && a2 == 0.0) {
        out.degenerate = true;
        if (a1 != 0.0) out.roots.push_back(-a0 / a1);
        return out;
    }
    if (a3 == 0.0) {
        quadratic_roots(a2, a1, a0, out.roots);
    } else if (a0 == 0.0) {
        out.roots.push_back(0.0);
        quadratic_roots(a3, a2, a1, out.roots);
    } else {
        // depressed cubic u^3 + p u + q, r = u - a2/(3 a3)
        long double b = (long double)a2 / a3, c = (long double)a1 / a3, d = (long double)a0 / a3;
        long double p = c - b * b / 3.0L;
        long double q = 2.0L * b * b * b / 27.0L - b * c / 3.0L + d;
        long double discDep = -4.0L * p * p * p - 27.0L * q * q;
        long double shift = -b / 3.0L;
        if (discDep > 0.0L) {
            long double rad = std::sqrt(-p / 3.0L);
            long double arg = 3.0L * q / (2.0L * p * rad);
            arg = std::min(1.0L, std::max(-1.0L, arg));
            long double phi = std::acos(arg) / 3.0L;
            const long double twopi3 = 2.0943951023931954923L;
            for (int k = 0; k < 3; ++k)
                out.roots.push_back(static_cast<double>(2.0L * rad * std::cos(phi - twopi3 * k) + shift));
        } else if (p == 0.0L && q == 0.0L) {
            out.roots.assign(3, static_cast<double>(shift));
        } else {
            long double rad = std::sqrt(q * q / 4.0L + p * p * p / 27.0L);
            long double u = std::cbrt(-q / 2.0L + rad) + std::cbrt(-q / 2.0L - rad);
            out.roots.push_back(static_cast<double>(u + shift));
        }
    }
    polish_roots(a3, a2, a1, a0, out.roots);
    std::sort(out.roots.begin(), out.roots.end());
    return out;
}

SolutionField bbm_wave(const CouplingMatrix& F, double beta, const BBMWaveSpec& spec) {
    if (spec.alpha < 0) throw ConfigError("bbm_wave: alpha must be nonnegative");
    if (spec.mode < 1 || spec.mode > F.m) throw ConfigError("bbm_wave: mode index out of range");
    SpectralData sd = spectral(F);
    double lam = sd.lambdas[spec.mode - 1];

    double op = 1.0 + spec.chi * spec.chi;
    long double a3 = (long double)spec.alpha * op, a2 = -(long double)spec.delta * op;
    long double a1 = (long double)beta - (long double)spec.alpha * lam;
    long double a0 = (long double)spec.delta * lam;
    long double r = spec.root;
    long double res = ((a3 * r + a2) * r + a1) * r + a0;
    long double amax = std::max(std::max(std::abs(a3), std::abs(a2)),
                                std::max(std::abs(a1), std::abs(a0)));
    if (std::abs(res) > 1e-10L * amax * std::abs(r * r * r))
        throw ConfigError("bbm_wave: root does not satisfy the dispersion cubic");

    Vec e = sd.eigvec(spec.mode - 1);
    int m = F.m;
    double ct = spec.delta - spec.root * spec.alpha;
    double cx = spec.root, cy = -spec.root * spec.chi, c0 = spec.phase;
    double C = spec.amplitude;

    SolutionField f;
    f.m = m;
    f.eval = [m, e, ct, cx, cy, c0, C](double t, double x, double y) {
        double v = C * std::cos(ct * t + cx * x + cy * y + c0);
        Vec psi(m);
        for (int i = 0; i < m; ++i) psi[i] = v * e[i];
        return psi;
    };
    f.jet = [m, e, ct, cx, cy, c0, C](double t, double x, double y) {
        Jet3 ph = ct * Jet3::var(0, t) + cx * Jet3::var(1, x) + cy * Jet3::var(2, y);
        ph.c[0] += c0;
        Jet3 v = C * jet_cos(ph);
        std::vector<Jet3> js(m);
        for (int i = 0; i < m; ++i) js[i] = v * e[i];
        return js;
    };
    f.tags.family = "bbm-wave";
    f.tags.chi = spec.chi;
    f.tags.Fsub = F.sub;
    f.tags.Fsup = F.sup;
    f.tags.Bdiag = Vec(m, 0.0);
    return f;
}

// ---------------------------------------------------------------- coupled shift

SolutionField coupled_shift_solution(const CouplingMatrix& F, double beta,
                                     const CoupledShiftSpec& spec) {
    int m = F.m;
    if (static_cast<int>(spec.c.size()) != m || static_cast<int>(spec.A.size()) != m)
        throw ConfigError("coupled_shift_solution: vector lengths must match the layer count");

    double cmean = 0, cmax = 0;
    for (double v : spec.c) {
        cmean += v / m;
        cmax = std::max(cmax, std::abs(v));
    }
    double dev = 0;
    for (double v : spec.c) dev = std::max(dev, std::abs(v - cmean));
    if (dev <= 1e-12 * std::max(cmax, 1e-300))
        throw ConfigError("coupled_shift_solution: c must not be a multiple of the all-ones vector");

    Cplx shift = spec.mu * spec.mu * (1.0 + spec.chi * spec.chi);
    SpectralData sd = spectral(F);
    double scale = std::abs(shift);
    for (double l : sd.lambdas) scale = std::max(scale, std::abs(l));
    for (double l : sd.lambdas)
        if (std::abs(Cplx(l) + shift) <= 1e-10 * scale)
            throw ConfigError(
                "coupled_shift_solution: shifted matrix is singular; the degenerate variant is "
                "not constructed here");

    Mat Fd = F.dense();
    CMat Ft(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) Ft(i, j) = Cplx(Fd(i, j)) + (i == j ? shift : Cplx(0.0));
    CMat Fti = inverse(Ft);

    Vec Fc = matvec(Fd, spec.c);
    CMat G(m, m);
    for (int i = 0; i < m; ++i) {
        Cplx bi = Fc[i] + beta;
        for (int j = 0; j < m; ++j) G(i, j) = (i == j ? Cplx(spec.c[i]) : Cplx(0.0)) - bi * Fti(i, j);
    }
    CMat muG = spec.mu * G;

    auto impl = std::make_shared<const std::tuple<CMat, CMat, CVec, Vec>>(Fti, muG, spec.A, spec.c);
    Cplx mu = spec.mu;
    double chi = spec.chi;

    SolutionField f;
    f.m = m;
    f.eval = [impl, mu, chi, m](double t, double x, double y) {
        const auto& [Fti, muG, A, c] = *impl;
        CMat E = matrix_exp(Cplx(t) * muG);
        CVec w = matvec(Fti, matvec(E, A));
        Cplx pref = std::exp(mu * (x - chi * y));
        Vec psi(m);
        for (int i = 0; i < m; ++i) psi[i] = (pref * w[i]).real() + y * c[i];
        return psi;
    };
    f.jet = [impl, mu, chi, m](double t, double x, double y) {
        const auto& [Fti, muG, A, c] = *impl;
        CMat E = matrix_exp(Cplx(t) * muG);
        CVec u = matvec(E, A);
        std::array<CVec, 4> w;
        w[0] = matvec(Fti, u);
        for (int p = 1; p < 4; ++p) {
            u = matvec(muG, u);
            w[p] = matvec(Fti, u);
        }
        Jet3 s = Jet3::var(1, x) - chi * Jet3::var(2, y);
        CJet3 pref = jet_cexp(mu, s);
        Jet3 Y = Jet3::var(2, y);
        std::vector<Jet3> js(m);
        for (int i = 0; i < m; ++i) {
            CJet3 wi;
            static constexpr double inv[4] = {1.0, 1.0, 0.5, 1.0 / 6.0};
            for (int p = 0; p < 4; ++p) {
                int idx = Jet3::index(p, 0, 0);
                wi.re.c[idx] = w[p][i].real() * inv[p];
                wi.im.c[idx] = w[p][i].imag() * inv[p];
            }
            CJet3 full = pref * wi;
            js[i] = full.re + Y * c[i];
        }
        return js;
    };
    f.tags.family = "coupled-shift";
    f.tags.chi = chi;
    f.tags.Fsub = F.sub;
    f.tags.Fsup = F.sup;
    return f;
}

// ---------------------------------------------------------------- time-linear shear

SolutionField s26_solution(const CouplingMatrix& F, double beta, const Vec& b, const Vec& c,
                           const Vec& chi, const Vec& g) {
    int m = F.m;
    if (static_cast<int>(b.size()) != m || static_cast<int>(c.size()) != m)
        throw ConfigError("s26_solution: vector lengths must match the layer count");
    if (beta == 0) throw ConfigError("s26_solution: beta must be nonzero");
    if (chi.size() > 5 || g.size() > 5)
        throw ConfigError("s26_solution: polynomial degree exceeds 4");
    if (!F.physical())
        throw ConfigError("s26_solution: requires an unshifted coupling matrix");

    SpectralData sd = spectral(F);
    Vec ones(m, 1.0);
    double onesN = weighted_norm(ones, sd.weights);
    for (const Vec* v : {&b, &c}) {
        double n = weighted_norm(*v, sd.weights);
        if (n == 0) continue;
        if (std::abs(weighted_inner(ones, *v, sd.weights)) > 1e-10 * onesN * n)
            throw ConfigError("s26_solution: vector lies outside the image of the coupling matrix");
    }

    Mat Fd = F.dense();
    Vec Fb = matvec(Fd, b), Fc = matvec(Fd, c);
    Vec dvec(m);
    for (int i = 0; i < m; ++i) dvec[i] = c[i] * Fb[i] - b[i] * Fc[i] + beta * c[i];
    Vec pvec = matvec(sd.pinv, dvec);

    Vec chid = polyder(chi), chidd = polyder(chid);
    double ibeta = 1.0 / beta;

    SolutionField f;
    f.m = m;
    f.eval = [m, b, c, pvec, chi, chid, chidd, g, ibeta](double t, double x, double y) {
        double ct = polyval(chi, t), c1 = polyval(chid, t), c2 = polyval(chidd, t);
        double X = x - ct * y;
        double bar = c2 * ibeta * X - 0.5 * c1 * y * y + polyval(g, t);
        Vec psi(m);
        for (int i = 0; i < m; ++i)
            psi[i] = X * c[i] + (y - c1 * ibeta) * b[i] - t * pvec[i] + bar;
        return psi;
    };
    f.jet = [m, b, c, pvec, chi, chid, chidd, g, ibeta](double t, double x, double y) {
        Jet3 T = Jet3::var(0, t), X = Jet3::var(1, x), Y = Jet3::var(2, y);
        Jet3 cj = jet_poly_t(chi, t), c1 = jet_poly_t(chid, t), c2 = jet_poly_t(chidd, t);
        Jet3 gj = jet_poly_t(g, t);
        Jet3 Z = X - cj * Y;
        Jet3 bar = (c2 * ibeta) * Z - 0.5 * (c1 * (Y * Y)) + gj;
        std::vector<Jet3> js(m);
        for (int i = 0; i < m; ++i)
            js[i] = Z * c[i] + (Y - c1 * ibeta) * b[i] - T * pvec[i] + bar;
        return js;
    };
    f.tags.family = "time-linear-shear";
    f.tags.Fsub = F.sub;
    f.tags.Fsup = F.sup;
    f.tags.Bdiag = Vec(m, 0.0);
    return f;
}

}
