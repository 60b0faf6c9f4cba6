#include "qglab/symmetry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qglab/errors.hpp"

namespace qglab {

namespace {

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

bool poly_zero(const Vec& p) {
    for (double v : p)
        if (v != 0.0) return false;
    return true;
}

Vec poly_scale(Vec p, double s) {
    for (double& v : p) v *= s;
    return p;
}

Vec poly_add(const Vec& a, const Vec& b) {
    Vec r(std::max(a.size(), b.size()), 0.0);
    for (size_t k = 0; k < a.size(); ++k) r[k] += a[k];
    for (size_t k = 0; k < b.size(); ++k) r[k] += b[k];
    return r;
}

// coefficients of p(a t + b)
Vec poly_affine(const Vec& p, double a, double b) {
    Vec r;
    for (size_t k = p.size(); k-- > 0;) {
        Vec nr(r.size() + 1, 0.0);
        for (size_t i = 0; i < r.size(); ++i) {
            nr[i] += b * r[i];
            nr[i + 1] += a * r[i];
        }
        nr[0] += p[k];
        r = std::move(nr);
    }
    return r;
}

// Horner in the jet algebra; exact through the retained order
Jet3 jet_polyval(const Vec& p, const Jet3& u) {
    Jet3 r;
    for (size_t k = p.size(); k-- > 0;) r = r * u + p[k];
    return r;
}

void check_poly(const Vec& p, const char* what) {
    if (p.size() > 7) throw ConfigError(std::string(what) + ": polynomial degree exceeds 6");
}

void check_point(const PointSymmetry& s) {
    if (s.eps1 * s.eps1 != 1 || s.eps2 * s.eps2 != 1)
        throw ConfigError("point symmetry: reflections must be +1 or -1");
    check_poly(s.h, "point symmetry h");
    check_poly(s.g, "point symmetry g");
}

void check_equiv(const EquivalenceTransform& e) {
    if (e.eps * e.eps != 1) throw ConfigError("equivalence: reflection must be +1 or -1");
    if (e.T1 * e.X1 <= 0)
        throw ConfigError("equivalence: time and space scalings must carry the same sign");
    check_poly(e.h, "equivalence h");
    check_poly(e.g, "equivalence g");
}

Vec combine_shifts(const Vec& a, const Vec& b, double sa) {
    if (a.empty() && b.empty()) return {};
    Vec r(std::max(a.size(), b.size()), 0.0);
    for (size_t i = 0; i < a.size(); ++i) r[i] += sa * a[i];
    for (size_t i = 0; i < b.size(); ++i) r[i] += b[i];
    return r;
}

// Pullback form shared by both transformation kinds:
//   t_old = at t + bt,  x_old = ax (x - h(t_old)),  y_old = ay y + by,
//   psi_new_i = A psi_old_i + B(t_old) y_old + G(t_old) + Psi_i.
struct Pullback {
    double at = 1, bt = 0;
    double ax = 1;
    double ay = 1, by = 0;
    Vec h;
    double A = 1;
    Vec B, G, Psi;
};

SolutionField apply_pullback(const SolutionField& f, const Pullback& pm, bool keepBackground,
                             const char* note) {
    int m = f.m;
    Vec Psi = pm.Psi;
    if (Psi.empty()) Psi.assign(m, 0.0);
    if (int(Psi.size()) != m) throw ConfigError("transform: layer shift length mismatch");

    SolutionField out;
    out.m = m;
    double at = pm.at, bt = pm.bt, ax = pm.ax, ay = pm.ay, by = pm.by, A = pm.A;
    Vec h = pm.h, B = pm.B, G = pm.G;
    auto baseEval = f.eval;
    out.eval = [=](double t, double x, double y) {
        double told = at * t + bt;
        double yold = ay * y + by;
        Vec v = baseEval(told, ax * (x - polyval(h, told)), yold);
        double b = polyval(B, told), g = polyval(G, told);
        for (int i = 0; i < m; ++i) v[i] = A * v[i] + b * yold + g + Psi[i];
        return v;
    };
    if (f.has_jet()) {
        auto baseJet = f.jet;
        out.jet = [=](double t, double x, double y) {
            double told = at * t + bt;
            Jet3 Told = Jet3::constant(told);
            Told.c[1] = at;
            Jet3 Xold = ax * (Jet3::var(1, x) - jet_polyval(h, Told));
            Jet3 Yold = ay * Jet3::var(2, y) + by;
            double xold = Xold.value(), yold = Yold.value();
            auto inner = baseJet(told, xold, yold);
            Jet3 ot = Told - told, ox = Xold - xold, oy = Yold - yold;
            Jet3 Bj = jet_polyval(B, Told), Gj = jet_polyval(G, Told);
            std::vector<Jet3> js(m);
            for (int i = 0; i < m; ++i)
                js[i] = A * jet_compose3(inner[i].c, ot, ox, oy) + Bj * Yold + Gj + Psi[i];
            return js;
        };
    }

    out.domain = f.domain;
    if (f.domain.kind != Domain::Kind::AllPlane) {
        out.domain.cx = f.domain.cx / ax;
        out.domain.cy = (f.domain.cy - by) / ay;
        out.domain.r0 = f.domain.r0 / std::abs(ax);
        out.domain.r1 = f.domain.r1 / std::abs(ax);
        out.domain.shift = combine_shifts(poly_affine(f.domain.shift, at, bt),
                                          poly_affine(h, at, bt), 1.0 / ax);
    }

    out.tags = f.tags;
    for (size_t k = 1; k < h.size(); ++k)
        if (h[k] != 0.0) out.tags.boosted = true;
    if (!keepBackground) {
        out.tags.hasBackground = false;
        out.tags.ubg.clear();
        out.tags.bgCoef = Mat(m, 3);
    }
    out.tags.note = out.tags.note.empty() ? note : out.tags.note + "; " + note;
    return out;
}

}  // namespace

PointSymmetry compose(const PointSymmetry& b, const PointSymmetry& a) {
    check_point(a);
    check_point(b);
    PointSymmetry c;
    c.eps1 = a.eps1 * b.eps1;
    c.eps2 = a.eps2 * b.eps2;
    c.T0 = b.eps1 * a.T0 + b.T0;
    c.Y0 = b.eps2 * a.Y0 + b.Y0;
    // t1 = a.eps1 t + a.T0 feeds the outer polynomials
    Vec bh1 = poly_affine(b.h, a.eps1, a.T0);
    c.h = poly_add(poly_scale(a.h, b.eps1), bh1);
    Vec hd1 = poly_affine(polyder(b.h), a.eps1, a.T0);
    c.g = poly_add(poly_add(poly_scale(a.g, b.eps2), poly_affine(b.g, a.eps1, a.T0)),
                   poly_scale(hd1, -double(b.eps1 * b.eps2) * a.Y0));
    if (!a.Psi.empty() || !b.Psi.empty()) {
        size_t n = std::max(a.Psi.size(), b.Psi.size());
        if (!a.Psi.empty() && !b.Psi.empty() && a.Psi.size() != b.Psi.size())
            throw ConfigError("compose: layer shift length mismatch");
        c.Psi.assign(n, 0.0);
        for (size_t i = 0; i < a.Psi.size(); ++i) c.Psi[i] += b.eps2 * a.Psi[i];
        for (size_t i = 0; i < b.Psi.size(); ++i) c.Psi[i] += b.Psi[i];
    }
    return c;
}

SolutionField apply_point_symmetry(const SolutionField& f, const PointSymmetry& s) {
    check_point(s);
    if (s.eps1 == 1 && s.eps2 == 1 && s.T0 == 0 && s.Y0 == 0 && poly_zero(s.h) &&
        poly_zero(s.g) && poly_zero(s.Psi))
        return f;

    Pullback pm;
    pm.at = s.eps1;
    pm.bt = -double(s.eps1) * s.T0;
    pm.ax = s.eps1;
    pm.ay = s.eps2;
    pm.by = -double(s.eps2) * s.Y0;
    pm.h = s.h;
    pm.A = s.eps2;
    pm.B = poly_scale(polyder(s.h), -double(s.eps1 * s.eps2));
    pm.G = s.g;
    pm.Psi = s.Psi;
    bool keepBG = s.eps2 == 1 && s.Y0 == 0 && poly_zero(s.g) && poly_zero(s.Psi);
    return apply_pullback(f, pm, keepBG, "point-transformed");
}

PointSymmetry as_point_symmetry(const EquivalenceTransform& e) {
    check_equiv(e);
    if (e.T1 != 1.0 || e.X1 != 1.0)
        throw ConfigError("as_point_symmetry: transformation rescales the system");
    PointSymmetry s;
    s.eps1 = 1;
    s.eps2 = e.eps;
    s.T0 = e.T0;
    s.Y0 = e.Y0;
    s.h = e.h;
    s.g = e.g;
    s.Psi = e.Psi;
    return s;
}

EquivalenceTransform compose(const EquivalenceTransform& b, const EquivalenceTransform& a) {
    check_equiv(a);
    check_equiv(b);
    EquivalenceTransform c;
    c.T1 = b.T1 * a.T1;
    c.X1 = b.X1 * a.X1;
    c.eps = a.eps * b.eps;
    c.T0 = b.T1 * a.T0 + b.T0;
    c.Y0 = b.eps * b.X1 * a.Y0 + b.Y0;
    c.h = poly_add(poly_scale(a.h, b.X1), poly_affine(b.h, a.T1, a.T0));
    double Ab = b.eps * b.X1 * b.X1 / b.T1;
    Vec hd1 = poly_affine(polyder(b.h), a.T1, a.T0);
    c.g = poly_add(poly_add(poly_scale(a.g, Ab), poly_affine(b.g, a.T1, a.T0)),
                   poly_scale(hd1, -b.eps * b.X1 / b.T1 * a.Y0));
    if (!a.Psi.empty() || !b.Psi.empty()) {
        size_t n = std::max(a.Psi.size(), b.Psi.size());
        if (!a.Psi.empty() && !b.Psi.empty() && a.Psi.size() != b.Psi.size())
            throw ConfigError("compose: layer shift length mismatch");
        c.Psi.assign(n, 0.0);
        for (size_t i = 0; i < a.Psi.size(); ++i) c.Psi[i] += Ab * a.Psi[i];
        for (size_t i = 0; i < b.Psi.size(); ++i) c.Psi[i] += b.Psi[i];
    }
    return c;
}

EquivalenceResult apply_equivalence(const CouplingMatrix& F, double beta, const SolutionField& f,
                                    const EquivalenceTransform& e) {
    check_equiv(e);
    if (F.m != f.m) throw ConfigError("apply_equivalence: coupling and field sizes differ");

    double s2 = e.X1 * e.X1;
    EquivalenceResult out;
    out.F.m = F.m;
    out.F.sub = poly_scale(F.sub, 1.0 / s2);
    out.F.sup = poly_scale(F.sup, 1.0 / s2);
    out.F.diag = poly_scale(F.diag, 1.0 / s2);
    out.beta = beta / (e.T1 * e.X1);

    Pullback pm;
    pm.at = 1.0 / e.T1;
    pm.bt = -e.T0 / e.T1;
    pm.ax = 1.0 / e.X1;
    pm.ay = 1.0 / (e.eps * e.X1);
    pm.by = -e.Y0 / (e.eps * e.X1);
    pm.h = e.h;
    pm.A = e.eps * s2 / e.T1;
    pm.B = poly_scale(polyder(e.h), -e.eps * e.X1 / e.T1);
    pm.G = e.g;
    pm.Psi = e.Psi;
    bool keepBG = e.T1 == 1.0 && e.X1 == 1.0 && e.eps == 1 && e.Y0 == 0 && poly_zero(e.g) &&
                  poly_zero(e.Psi);
    out.field = apply_pullback(f, pm, keepBG, "equivalence-transformed");
    out.field.tags.Fsub = out.F.sub;
    out.field.tags.Fsup = out.F.sup;
    out.field.tags.Bdiag = poly_scale(out.field.tags.Bdiag, 1.0 / s2);
    return out;
}

Vec characteristic(const SymmetryGenerator& gen, const SolutionField& f, double t, double x,
                   double y) {
    check_poly(gen.poly, "characteristic");
    int m = f.m;
    Vec out(m, 0.0);
    using K = SymmetryGenerator::Kind;
    if (gen.kind == K::Ji) {
        if (gen.layer < 0 || gen.layer >= m)
            throw ConfigError("characteristic: layer index out of range");
        out[gen.layer] = 1.0;
        return out;
    }
    if (gen.kind == K::Z) {
        out.assign(m, polyval(gen.poly, t));
        return out;
    }
    if (!f.has_jet()) throw ConfigError("characteristic: field carries no jets");
    auto js = f.jet(t, x, y);
    switch (gen.kind) {
        case K::Pt:
            for (int i = 0; i < m; ++i) out[i] = -js[i].deriv(1, 0, 0);
            break;
        case K::Py:
            for (int i = 0; i < m; ++i) out[i] = -js[i].deriv(0, 0, 1);
            break;
        case K::Px: {
            double c = polyval(gen.poly, t);
            double cd = polyval(polyder(gen.poly), t);
            for (int i = 0; i < m; ++i) out[i] = -c * js[i].deriv(0, 1, 0) - cd * y;
            break;
        }
        default:
            break;
    }
    return out;
}

namespace {

// 6th-order centered stencils; the first-derivative one skips the center
constexpr double W1[7] = {-1, 9, -45, 0, 45, -9, 1};        // / (60 h)
constexpr double W2[7] = {2, -27, 270, -490, 270, -27, 2};  // / (180 h^2)

using EvalFn = std::function<Vec(double, double, double)>;

Vec fd_q(const EvalFn& fn, const Mat& Fd, double beta, int m, double t, double x, double y,
         double h) {
    Vec acc(m, 0.0), center;
    for (int k = -3; k <= 3; ++k) {
        Vec vx = fn(t, x + k * h, y);
        Vec vy = k == 0 ? vx : fn(t, x, y + k * h);
        if (k == 0) center = vx;
        for (int i = 0; i < m; ++i) acc[i] += W2[k + 3] * (vx[i] + vy[i]);
    }
    Vec q(m, 0.0);
    for (int i = 0; i < m; ++i) {
        double c = 0;
        for (int j = 0; j < m; ++j) c += Fd(i, j) * center[j];
        q[i] = acc[i] / (180.0 * h * h) + c + beta * y;
    }
    return q;
}

double fd_residual(const EvalFn& fn, const Mat& Fd, double beta, int m, double t, double x,
                   double y, double hx, double ht) {
    Vec px(m, 0.0), py(m, 0.0), qt(m, 0.0), qx(m, 0.0), qy(m, 0.0);
    for (int k = -3; k <= 3; ++k) {
        if (k == 0) continue;
        double w = W1[k + 3];
        Vec vx = fn(t, x + k * hx, y);
        Vec vy = fn(t, x, y + k * hx);
        Vec at = fd_q(fn, Fd, beta, m, t + k * ht, x, y, hx);
        Vec ax = fd_q(fn, Fd, beta, m, t, x + k * hx, y, hx);
        Vec ay = fd_q(fn, Fd, beta, m, t, x, y + k * hx, hx);
        for (int i = 0; i < m; ++i) {
            px[i] += w * vx[i];
            py[i] += w * vy[i];
            qt[i] += w * at[i];
            qx[i] += w * ax[i];
            qy[i] += w * ay[i];
        }
    }
    double worst = 0;
    for (int i = 0; i < m; ++i) {
        px[i] /= 60.0 * hx;
        py[i] /= 60.0 * hx;
        qt[i] /= 60.0 * ht;
        qx[i] /= 60.0 * hx;
        qy[i] /= 60.0 * hx;
        double r = qt[i] + px[i] * qy[i] - py[i] * qx[i];
        double s = std::abs(qt[i]) + std::abs(px[i] * qy[i]) + std::abs(py[i] * qx[i]) + 1e-300;
        worst = std::max(worst, std::abs(r) / s);
    }
    return worst;
}

}  // namespace

InfinitesimalReport infinitesimal_check(const SolutionField& f, const CouplingMatrix& F,
                                        double beta,
                                        const std::function<Vec(double, double, double)>& dir,
                                        const Vec& eps,
                                        const std::vector<std::array<double, 3>>& points,
                                        double hx, double ht) {
    if (F.m != f.m) throw ConfigError("infinitesimal_check: coupling and field sizes differ");
    if (eps.empty() || points.empty())
        throw ConfigError("infinitesimal_check: need probe points and step sizes");
    if (hx <= 0 || ht <= 0) throw ConfigError("infinitesimal_check: steps must be positive");
    for (double e : eps)
        if (e <= 0) throw ConfigError("infinitesimal_check: perturbation sizes must be positive");

    int m = f.m;
    Mat Fd = F.dense();
    auto baseFn = f.eval;

    InfinitesimalReport rep;
    for (const auto& p : points)
        rep.base = std::max(rep.base, fd_residual(baseFn, Fd, beta, m, p[0], p[1], p[2], hx, ht));
    if (rep.base > 1e-5)
        throw ConfigError("infinitesimal_check: base field is not an exact solution");

    rep.residuals.assign(eps.size(), 0.0);
    for (size_t k = 0; k < eps.size(); ++k) {
        double e = eps[k];
        EvalFn fn = [baseFn, dir, e, m](double t, double x, double y) {
            Vec v = baseFn(t, x, y);
            Vec d = dir(t, x, y);
            for (int i = 0; i < m; ++i) v[i] += e * d[i];
            return v;
        };
        for (const auto& p : points)
            rep.residuals[k] =
                std::max(rep.residuals[k], fd_residual(fn, Fd, beta, m, p[0], p[1], p[2], hx, ht));
    }

    if (eps.size() >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        double n = double(eps.size());
        for (size_t k = 0; k < eps.size(); ++k) {
            double lx = std::log(eps[k]);
            double ly = std::log(std::max(rep.residuals[k], 1e-300));
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
        }
        rep.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    }
    return rep;
}

InfinitesimalReport infinitesimal_check(const SolutionField& f, const CouplingMatrix& F,
                                        double beta, const SymmetryGenerator& gen, const Vec& eps,
                                        const std::vector<std::array<double, 3>>& points,
                                        double hx, double ht) {
    auto dir = [f, gen](double t, double x, double y) { return characteristic(gen, f, t, x, y); };
    return infinitesimal_check(f, F, beta, dir, eps, points, hx, ht);
}

}
