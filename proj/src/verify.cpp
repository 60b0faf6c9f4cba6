#include "qglab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "qglab/errors.hpp"

namespace qglab {

namespace {

// 4th-order rows, denominators 12h and 12h^2.  E*/O* act on the first six
// (five) nodes of a line, evaluating at node 0 and 1; mirrored rows handle
// the far end (first derivative flips sign under reversal).
constexpr double C1[5] = {1, -8, 0, 8, -1};
constexpr double C2[5] = {-1, 16, -30, 16, -1};
constexpr double E1[5] = {-25, 48, -36, 16, -3};
constexpr double O1[5] = {-3, -10, 18, -6, 1};
constexpr double E1r[5] = {3, -16, 36, -48, 25};
constexpr double O1r[5] = {-1, 6, -18, 10, 3};
constexpr double E2[6] = {45, -154, 214, -156, 61, -10};
constexpr double O2[6] = {10, -15, -4, 14, -6, 1};
constexpr double E2r[6] = {-10, 61, -156, 214, -154, 45};
constexpr double O2r[6] = {1, -6, 14, -4, -15, 10};

[[noreturn]] void bad_value(const char* where, double t, double x, double y) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s: field value is not finite at t=%g x=%g y=%g", where, t, x,
                  y);
    throw NumericError(buf);
}

Vec weights_of(const CouplingMatrix& F) {
    Vec w(F.m, 1.0);
    for (int i = 0; i + 1 < F.m; ++i) w[i + 1] = w[i] * F.sup[i] / F.sub[i];
    return w;
}

// One grid line of one layer: value stride vs over the running index, node
// validity stride os.
struct Line {
    const double* v;
    size_t vs;
    const unsigned char* ok;
    size_t os;
    int n;
    double h;
};

Line xline(const Vec& a, const std::vector<unsigned char>& ok, int NX, int m, int j, int k,
           double dx) {
    return {a.data() + (static_cast<size_t>(j) * NX) * m + k, static_cast<size_t>(m),
            ok.data() + static_cast<size_t>(j) * NX, 1, NX, dx};
}

Line yline(const Vec& a, const std::vector<unsigned char>& ok, int NX, int NY, int m, int i, int k,
           double dy) {
    return {a.data() + static_cast<size_t>(i) * m + k, static_cast<size_t>(NX) * m, ok.data() + i,
            static_cast<size_t>(NX), NY, dy};
}

bool window_ok(const Line& L, int i0, int len) {
    if (i0 < 0 || i0 + len > L.n) return false;
    for (int s = 0; s < len; ++s)
        if (!L.ok[static_cast<size_t>(i0 + s) * L.os]) return false;
    return true;
}

double comb(const Line& L, int i0, const double* c, int len, double denom) {
    double a = 0;
    for (int s = 0; s < len; ++s) a += c[s] * L.v[static_cast<size_t>(i0 + s) * L.vs];
    return a / denom;
}

// edges=true falls back to one-sided rows against the line ends; a stencil
// broken by the mask is not recovered.
bool deriv1(const Line& L, int p, bool edges, double& out, bool& onesided) {
    if (window_ok(L, p - 2, 5)) {
        out = comb(L, p - 2, C1, 5, 12 * L.h);
        return true;
    }
    if (!edges) return false;
    if (p <= 1 && window_ok(L, 0, 5)) {
        out = comb(L, 0, p == 0 ? E1 : O1, 5, 12 * L.h);
        onesided = true;
        return true;
    }
    if (p >= L.n - 2 && window_ok(L, L.n - 5, 5)) {
        out = comb(L, L.n - 5, p == L.n - 1 ? E1r : O1r, 5, 12 * L.h);
        onesided = true;
        return true;
    }
    return false;
}

bool deriv2(const Line& L, int p, bool edges, double& out, bool& onesided) {
    if (window_ok(L, p - 2, 5)) {
        out = comb(L, p - 2, C2, 5, 12 * L.h * L.h);
        return true;
    }
    if (!edges) return false;
    if (p <= 1 && window_ok(L, 0, 6)) {
        out = comb(L, 0, p == 0 ? E2 : O2, 6, 12 * L.h * L.h);
        onesided = true;
        return true;
    }
    if (p >= L.n - 2 && window_ok(L, L.n - 6, 6)) {
        out = comb(L, L.n - 6, p == L.n - 1 ? E2r : O2r, 6, 12 * L.h * L.h);
        onesided = true;
        return true;
    }
    return false;
}

struct LevelNorms {
    double h = 0, scale = 0, maxN = 0, l2 = 0;
    Vec perLayer;
};

LevelNorms level_residual(const SolutionField& f, const Mat& Fd, double beta, const GridSpec& base,
                          int lev) {
    const int NX = (base.Nx - 1) * (1 << lev) + 1;
    const int NY = (base.Ny - 1) * (1 << lev) + 1;
    const double dx = base.Lx / (NX - 1), dy = base.Ly / (NY - 1);
    const int m = f.m;
    const size_t nn = static_cast<size_t>(NX) * NY;
    auto gx = [&](int i) { return base.x0 + i * dx; };
    auto gy = [&](int j) { return base.y0 + j * dy; };

    std::vector<unsigned char> inc(nn);
    for (int j = 0; j < NY; ++j)
        for (int i = 0; i < NX; ++i)
            inc[static_cast<size_t>(j) * NX + i] = !base.mask || base.mask(gx(i), gy(j)) ? 1 : 0;

    auto xwin = [&](const std::vector<unsigned char>& ok, int i, int j) {
        if (i < 2 || i + 2 >= NX) return false;
        const unsigned char* r = ok.data() + static_cast<size_t>(j) * NX;
        return r[i - 2] && r[i - 1] && r[i] && r[i + 1] && r[i + 2];
    };
    auto ywin = [&](const std::vector<unsigned char>& ok, int i, int j) {
        if (j < 2 || j + 2 >= NY) return false;
        const unsigned char* c = ok.data() + i;
        size_t s = NX;
        return c[(j - 2) * s] && c[(j - 1) * s] && c[j * s] && c[(j + 1) * s] && c[(j + 2) * s];
    };

    Vec psix(nn * m, 0.0), psiy(nn * m, 0.0), q(nn * m, 0.0), qt(nn * m, 0.0);
    std::vector<unsigned char> qok(nn, 0);
    Vec pv(m), pt(m);

    if (f.has_jet()) {
        for (int j = 0; j < NY; ++j)
            for (int i = 0; i < NX; ++i) {
                size_t n0 = static_cast<size_t>(j) * NX + i;
                if (!inc[n0]) continue;
                auto js = f.jet(base.t, gx(i), gy(j));
                for (int k = 0; k < m; ++k) {
                    pv[k] = js[k].c[0];
                    pt[k] = js[k].deriv(1, 0, 0);
                }
                for (int k = 0; k < m; ++k) {
                    double fq = 0, ft = 0;
                    for (int l = 0; l < m; ++l) {
                        fq += Fd(k, l) * pv[l];
                        ft += Fd(k, l) * pt[l];
                    }
                    double vq = js[k].deriv(0, 2, 0) + js[k].deriv(0, 0, 2) + fq + beta * gy(j);
                    double vt = js[k].deriv(1, 2, 0) + js[k].deriv(1, 0, 2) + ft;
                    double vx = js[k].deriv(0, 1, 0), vy = js[k].deriv(0, 0, 1);
                    if (!std::isfinite(vq) || !std::isfinite(vt) || !std::isfinite(vx) ||
                        !std::isfinite(vy))
                        bad_value("residual", base.t, gx(i), gy(j));
                    q[n0 * m + k] = vq;
                    qt[n0 * m + k] = vt;
                    psix[n0 * m + k] = vx;
                    psiy[n0 * m + k] = vy;
                }
                qok[n0] = 1;
            }
    } else {
        auto sample_psi = [&](double tt) {
            Vec ps(nn * m, 0.0);
            for (int j = 0; j < NY; ++j)
                for (int i = 0; i < NX; ++i) {
                    size_t n0 = static_cast<size_t>(j) * NX + i;
                    if (!inc[n0]) continue;
                    Vec v = f.eval(tt, gx(i), gy(j));
                    for (int k = 0; k < m; ++k) {
                        if (!std::isfinite(v[k])) bad_value("residual", tt, gx(i), gy(j));
                        ps[n0 * m + k] = v[k];
                    }
                }
            return ps;
        };
        auto q_of = [&](const Vec& ps, Vec& out) {
            for (int j = 0; j < NY; ++j)
                for (int i = 0; i < NX; ++i) {
                    size_t n0 = static_cast<size_t>(j) * NX + i;
                    if (!qok[n0]) continue;
                    for (int k = 0; k < m; ++k) {
                        Line lx = xline(ps, inc, NX, m, j, k, dx);
                        Line ly = yline(ps, inc, NX, NY, m, i, k, dy);
                        double sxx = 0, syy = 0;
                        bool os = false;
                        deriv2(lx, i, false, sxx, os);
                        deriv2(ly, j, false, syy, os);
                        double fq = 0;
                        for (int l = 0; l < m; ++l) fq += Fd(k, l) * ps[n0 * m + l];
                        out[n0 * m + k] = sxx + syy + fq + beta * gy(j);
                    }
                }
        };

        Vec ps0 = sample_psi(base.t);
        for (int j = 0; j < NY; ++j)
            for (int i = 0; i < NX; ++i) {
                size_t n0 = static_cast<size_t>(j) * NX + i;
                qok[n0] = inc[n0] && xwin(inc, i, j) && ywin(inc, i, j) ? 1 : 0;
            }
        q_of(ps0, q);

        double umax = 0;
        for (int j = 0; j < NY; ++j)
            for (int i = 0; i < NX; ++i) {
                size_t n0 = static_cast<size_t>(j) * NX + i;
                if (!qok[n0]) continue;
                for (int k = 0; k < m; ++k) {
                    Line lx = xline(ps0, inc, NX, m, j, k, dx);
                    Line ly = yline(ps0, inc, NX, NY, m, i, k, dy);
                    double vx = 0, vy = 0;
                    bool os = false;
                    deriv1(lx, i, false, vx, os);
                    deriv1(ly, j, false, vy, os);
                    psix[n0 * m + k] = vx;
                    psiy[n0 * m + k] = vy;
                    umax = std::max({umax, std::abs(vx), std::abs(vy)});
                }
            }

        // time step tied to the advective rate so the t-differences track the
        // spatial refinement
        double dt = umax > 0 ? std::min(dx, dy) / (10 * umax) : std::min(dx, dy);
        Vec qm2(nn * m, 0.0), qm1(nn * m, 0.0), qp1(nn * m, 0.0), qp2(nn * m, 0.0);
        {
            Vec ps = sample_psi(base.t - 2 * dt);
            q_of(ps, qm2);
            ps = sample_psi(base.t - dt);
            q_of(ps, qm1);
            ps = sample_psi(base.t + dt);
            q_of(ps, qp1);
            ps = sample_psi(base.t + 2 * dt);
            q_of(ps, qp2);
        }
        for (size_t n = 0; n < nn * m; ++n)
            qt[n] = (qm2[n] - 8 * qm1[n] + 8 * qp1[n] - qp2[n]) / (12 * dt);
    }

    LevelNorms out;
    out.h = std::max(dx, dy);
    out.perLayer = Vec(m, 0.0);
    double s_t = 0, s_a = 0, s_b = 0, rmax = 0, r2 = 0;
    size_t cnt = 0;
    for (int j = 0; j < NY; ++j)
        for (int i = 0; i < NX; ++i) {
            size_t n0 = static_cast<size_t>(j) * NX + i;
            if (!qok[n0] || !xwin(qok, i, j) || !ywin(qok, i, j)) continue;
            for (int k = 0; k < m; ++k) {
                Line lqx = xline(q, qok, NX, m, j, k, dx);
                Line lqy = yline(q, qok, NX, NY, m, i, k, dy);
                double vqx = 0, vqy = 0;
                bool os = false;
                deriv1(lqx, i, false, vqx, os);
                deriv1(lqy, j, false, vqy, os);
                double a = psix[n0 * m + k] * vqy, b = psiy[n0 * m + k] * vqx;
                double R = qt[n0 * m + k] + a - b;
                s_t = std::max(s_t, std::abs(qt[n0 * m + k]));
                s_a = std::max(s_a, std::abs(a));
                s_b = std::max(s_b, std::abs(b));
                rmax = std::max(rmax, std::abs(R));
                out.perLayer[k] = std::max(out.perLayer[k], std::abs(R));
                r2 += R * R;
                ++cnt;
            }
        }
    if (cnt == 0) throw ConfigError("residual: no grid nodes with full stencil support");
    out.scale = s_t + s_a + s_b + 1e-300;
    out.maxN = rmax / out.scale;
    out.l2 = std::sqrt(r2 / static_cast<double>(cnt)) / out.scale;
    for (int k = 0; k < m; ++k) out.perLayer[k] /= out.scale;
    return out;
}

}  // namespace

void GridSpec::validate() const {
    if (Nx < 16 || Ny < 16) throw ConfigError("grid: need at least 16 nodes per direction");
    if (!(Lx > 0) || !(Ly > 0)) throw ConfigError("grid: extents must be positive");
    if (!std::isfinite(x0) || !std::isfinite(y0) || !std::isfinite(t))
        throw ConfigError("grid: origin and time must be finite");
}

Vec potential_vorticity(const SolutionField& f, const CouplingMatrix& F, double beta, double t,
                        double x, double y, double h) {
    if (f.m != F.m) throw ConfigError("potential_vorticity: layer count mismatch");
    const int m = f.m;
    Mat Fd = F.dense();
    Vec q(m, 0.0);
    if (f.has_jet()) {
        auto js = f.jet(t, x, y);
        Vec pv(m);
        for (int k = 0; k < m; ++k) pv[k] = js[k].c[0];
        for (int k = 0; k < m; ++k) {
            double fq = 0;
            for (int l = 0; l < m; ++l) fq += Fd(k, l) * pv[l];
            q[k] = js[k].deriv(0, 2, 0) + js[k].deriv(0, 0, 2) + fq + beta * y;
        }
    } else {
        if (h <= 0)
            throw ConfigError("potential_vorticity: field carries no jets, supply a positive step");
        Vec sxx(m, 0.0), syy(m, 0.0);
        Vec c0 = f.eval(t, x, y);
        for (int s = 0; s < 5; ++s) {
            Vec vx = s == 2 ? c0 : f.eval(t, x + (s - 2) * h, y);
            Vec vy = s == 2 ? c0 : f.eval(t, x, y + (s - 2) * h);
            for (int k = 0; k < m; ++k) {
                sxx[k] += C2[s] * vx[k];
                syy[k] += C2[s] * vy[k];
            }
        }
        for (int k = 0; k < m; ++k) {
            double fq = 0;
            for (int l = 0; l < m; ++l) fq += Fd(k, l) * c0[l];
            q[k] = (sxx[k] + syy[k]) / (12 * h * h) + fq + beta * y;
        }
    }
    for (int k = 0; k < m; ++k)
        if (!std::isfinite(q[k])) bad_value("potential_vorticity", t, x, y);
    return q;
}

GridField sample(const SolutionField& f, const GridSpec& spec) {
    spec.validate();
    if (!f.eval) throw ConfigError("sample: field has no evaluator");
    GridField g;
    g.spec = spec;
    g.m = f.m;
    const size_t nn = static_cast<size_t>(spec.Nx) * spec.Ny;
    g.data = Vec(nn * f.m, 0.0);
    g.flags.assign(nn, 0);
    for (int j = 0; j < spec.Ny; ++j)
        for (int i = 0; i < spec.Nx; ++i) {
            size_t n0 = static_cast<size_t>(j) * spec.Nx + i;
            double xx = spec.x(i), yy = spec.y(j);
            if (spec.mask && !spec.mask(xx, yy)) {
                g.flags[n0] = 2;
                continue;
            }
            Vec v = f.eval(spec.t, xx, yy);
            for (int k = 0; k < f.m; ++k) {
                if (!std::isfinite(v[k])) bad_value("sample", spec.t, xx, yy);
                g.data[n0 * f.m + k] = v[k];
            }
        }
    return g;
}

GridField potential_vorticity(const SolutionField& f, const CouplingMatrix& F, double beta,
                              const GridSpec& spec) {
    spec.validate();
    if (f.m != F.m) throw ConfigError("potential_vorticity: layer count mismatch");
    const int m = f.m;
    const int NX = spec.Nx, NY = spec.Ny;
    const size_t nn = static_cast<size_t>(NX) * NY;
    Mat Fd = F.dense();
    GridField g;
    g.spec = spec;
    g.m = m;
    g.data = Vec(nn * m, 0.0);
    g.flags.assign(nn, 2);

    if (f.has_jet()) {
        Vec pv(m);
        for (int j = 0; j < NY; ++j)
            for (int i = 0; i < NX; ++i) {
                size_t n0 = static_cast<size_t>(j) * NX + i;
                double xx = spec.x(i), yy = spec.y(j);
                if (spec.mask && !spec.mask(xx, yy)) continue;
                auto js = f.jet(spec.t, xx, yy);
                for (int k = 0; k < m; ++k) pv[k] = js[k].c[0];
                for (int k = 0; k < m; ++k) {
                    double fq = 0;
                    for (int l = 0; l < m; ++l) fq += Fd(k, l) * pv[l];
                    double vq = js[k].deriv(0, 2, 0) + js[k].deriv(0, 0, 2) + fq + beta * yy;
                    if (!std::isfinite(vq)) bad_value("potential_vorticity", spec.t, xx, yy);
                    g.data[n0 * m + k] = vq;
                }
                g.flags[n0] = 0;
            }
        return g;
    }

    GridField ps = sample(f, spec);
    std::vector<unsigned char> inc(nn);
    for (size_t n = 0; n < nn; ++n) inc[n] = ps.flags[n] != 2;
    Vec acc(m);
    for (int j = 0; j < NY; ++j)
        for (int i = 0; i < NX; ++i) {
            size_t n0 = static_cast<size_t>(j) * NX + i;
            if (!inc[n0]) continue;
            bool ok = true, os = false;
            for (int k = 0; k < m && ok; ++k) {
                Line lx = xline(ps.data, inc, NX, m, j, k, spec.dx());
                Line ly = yline(ps.data, inc, NX, NY, m, i, k, spec.dy());
                double sxx = 0, syy = 0;
                ok = deriv2(lx, i, true, sxx, os) && deriv2(ly, j, true, syy, os);
                acc[k] = sxx + syy;
            }
            if (!ok) continue;
            for (int k = 0; k < m; ++k) {
                double fq = 0;
                for (int l = 0; l < m; ++l) fq += Fd(k, l) * ps.data[n0 * m + l];
                g.data[n0 * m + k] = acc[k] + fq + beta * spec.y(j);
            }
            g.flags[n0] = os ? 1 : 0;
        }
    return g;
}

ResidualReport residual(const SolutionField& f, const CouplingMatrix& F, double beta,
                        const GridSpec& spec, int levels) {
    spec.validate();
    if (f.m != F.m) throw ConfigError("residual: layer count mismatch");
    if (levels < 1) throw ConfigError("residual: need at least one refinement level");
    if (!f.has_jet() && !f.eval) throw ConfigError("residual: field has no evaluator");
    Mat Fd = F.dense();
    ResidualReport rep;
    std::vector<LevelNorms> ls;
    ls.reserve(levels);
    for (int lev = 0; lev < levels; ++lev) ls.push_back(level_residual(f, Fd, beta, spec, lev));
    for (const LevelNorms& l : ls) {
        rep.grids.push_back(l.h);
        rep.levelMax.push_back(l.maxN);
    }
    const LevelNorms& fin = ls.back();
    rep.maxNorm = fin.maxN;
    rep.l2Norm = fin.l2;
    rep.perLayer = fin.perLayer;
    rep.scale = fin.scale;
    if (levels >= 3) {
        bool pos = true;
        for (double v : rep.levelMax) pos = pos && v > 0;
        if (pos) {
            double sx = 0, sy = 0, sxx = 0, sxy = 0;
            for (int l = 0; l < levels; ++l) {
                double X = std::log(rep.grids[l]), Y = std::log(rep.levelMax[l]);
                sx += X;
                sy += Y;
                sxx += X * X;
                sxy += X * Y;
            }
            rep.fittedOrder = (levels * sxy - sx * sy) / (levels * sxx - sx * sx);
        }
    }
    return rep;
}

namespace {

double quadrature(const GridSpec& spec, int m, const Vec& w, Quantity what,
                  const std::function<bool(int, int, Vec&, Vec&, Vec&, Vec&)>& node) {
    // node(i, j, psi, psix, psiy, q) fills what the density needs and returns
    // false to drop the node from the sum
    const double dx = spec.dx(), dy = spec.dy();
    Vec pv(m), px(m), py(m), q(m);
    double acc = 0;
    for (int j = 0; j < spec.Ny; ++j)
        for (int i = 0; i < spec.Nx; ++i) {
            if (!node(i, j, pv, px, py, q)) continue;
            double wt = dx * dy * (i == 0 || i == spec.Nx - 1 ? 0.5 : 1.0) *
                        (j == 0 || j == spec.Ny - 1 ? 0.5 : 1.0);
            double dens = 0;
            switch (what) {
                case Quantity::Energy:
                    for (int k = 0; k < m; ++k)
                        dens += 0.5 * w[k] * (px[k] * px[k] + py[k] * py[k] - pv[k] * q[k]);
                    break;
                case Quantity::ZonalMomentum:
                    for (int k = 0; k < m; ++k) dens += w[k] * py[k];
                    break;
                case Quantity::Circulation:
                    for (int k = 0; k < m; ++k) dens += w[k] * q[k];
                    break;
                case Quantity::Enstrophy:
                    for (int k = 0; k < m; ++k) dens += 0.5 * w[k] * q[k] * q[k];
                    break;
            }
            acc += wt * dens;
        }
    return acc;
}

}  // namespace

double conserved(const SolutionField& f, const CouplingMatrix& F, double beta,
                 const GridSpec& spec, Quantity what) {
    spec.validate();
    if (f.m != F.m) throw ConfigError("conserved: layer count mismatch");
    if (!f.has_jet()) return conserved(sample(f, spec), F, beta, what);
    const int m = f.m;
    Mat Fd = F.dense();
    Vec w = weights_of(F);
    auto node = [&](int i, int j, Vec& pv, Vec& px, Vec& py, Vec& q) {
        double xx = spec.x(i), yy = spec.y(j);
        if (spec.mask && !spec.mask(xx, yy)) return false;
        auto js = f.jet(spec.t, xx, yy);
        for (int k = 0; k < m; ++k) {
            pv[k] = js[k].c[0];
            px[k] = js[k].deriv(0, 1, 0);
            py[k] = js[k].deriv(0, 0, 1);
        }
        for (int k = 0; k < m; ++k) {
            double fq = 0;
            for (int l = 0; l < m; ++l) fq += Fd(k, l) * pv[l];
            // the energy density pairs psi with F psi only; q carries the
            // full vorticity for the q-based densities
            q[k] = what == Quantity::Energy
                       ? fq
                       : js[k].deriv(0, 2, 0) + js[k].deriv(0, 0, 2) + fq + beta * yy;
            if (!std::isfinite(q[k]) || !std::isfinite(px[k]) || !std::isfinite(py[k]))
                bad_value("conserved", spec.t, xx, yy);
        }
        return true;
    };
    return quadrature(spec, m, w, what, node);
}

double conserved(const GridField& ps, const CouplingMatrix& F, double beta, Quantity what) {
    ps.spec.validate();
    if (ps.m != F.m) throw ConfigError("conserved: layer count mismatch");
    const int m = ps.m;
    const int NX = ps.spec.Nx, NY = ps.spec.Ny;
    const size_t nn = static_cast<size_t>(NX) * NY;
    if (ps.data.size() != nn * m) throw ConfigError("conserved: grid data size mismatch");
    Mat Fd = F.dense();
    Vec w = weights_of(F);
    std::vector<unsigned char> inc(nn, 1);
    if (ps.flags.size() == nn)
        for (size_t n = 0; n < nn; ++n) inc[n] = ps.flags[n] != 2;
    auto node = [&](int i, int j, Vec& pv, Vec& px, Vec& py, Vec& q) {
        size_t n0 = static_cast<size_t>(j) * NX + i;
        if (!inc[n0]) return false;
        bool os = false;
        for (int k = 0; k < m; ++k) {
            pv[k] = ps.data[n0 * m + k];
            Line lx = xline(ps.data, inc, NX, m, j, k, ps.spec.dx());
            Line ly = yline(ps.data, inc, NX, NY, m, i, k, ps.spec.dy());
            if (what == Quantity::Energy || what == Quantity::ZonalMomentum) {
                if (!deriv1(lx, i, true, px[k], os) || !deriv1(ly, j, true, py[k], os))
                    return false;
            }
            if (what == Quantity::Circulation || what == Quantity::Enstrophy) {
                double sxx = 0, syy = 0;
                if (!deriv2(lx, i, true, sxx, os) || !deriv2(ly, j, true, syy, os)) return false;
                q[k] = sxx + syy;
            }
        }
        for (int k = 0; k < m; ++k) {
            double fq = 0;
            for (int l = 0; l < m; ++l) fq += Fd(k, l) * pv[l];
            if (what == Quantity::Energy)
                q[k] = fq;
            else if (what != Quantity::ZonalMomentum)
                q[k] += fq + beta * ps.spec.y(j);
        }
        return true;
    };
    return quadrature(ps.spec, m, w, what, node);
}

InterfaceReport interface_check(const PiecewiseSolution& p, double t) {
    if (p.m < 1 || p.pieces.size() != 2)
        throw ConfigError("interface_check: need a two-piece field");
    if (!p.pieces[0].has_jet() || !p.pieces[1].has_jet())
        throw ConfigError("interface_check: pieces carry no jets");
    const double PI = 3.14159265358979323846;
    InterfaceReport rep;
    rep.psiInner = rep.psiOuter = rep.slopeJump = rep.curvJump = Vec(p.m, 0.0);
    for (int a = 0; a < 16; ++a)
        for (double fr : {0.25, 0.5, 0.75, 0.95}) {
            double th = 2 * PI * a / 16;
            Vec v = p.pieces[0].eval(t, p.cx + fr * p.r0 * std::cos(th),
                                     p.cy + fr * p.r0 * std::sin(th));
            for (int k = 0; k < p.m; ++k) {
                if (!std::isfinite(v[k]))
                    bad_value("interface_check", t, p.cx + fr * p.r0 * std::cos(th),
                              p.cy + fr * p.r0 * std::sin(th));
                rep.peak = std::max(rep.peak, std::abs(v[k]));
            }
        }
    for (int a = 0; a < 64; ++a) {
        double th = 2 * PI * a / 64;
        double c = std::cos(th), s = std::sin(th);
        double x = p.cx + p.r0 * c, y = p.cy + p.r0 * s;
        auto jin = p.pieces[0].jet(t, x, y);
        auto jout = p.pieces[1].jet(t, x, y);
        for (int k = 0; k < p.m; ++k) {
            double vin = jin[k].c[0], vout = jout[k].c[0];
            double din = c * jin[k].deriv(0, 1, 0) + s * jin[k].deriv(0, 0, 1);
            double dout = c * jout[k].deriv(0, 1, 0) + s * jout[k].deriv(0, 0, 1);
            double cin = c * c * jin[k].deriv(0, 2, 0) + 2 * c * s * jin[k].deriv(0, 1, 1) +
                         s * s * jin[k].deriv(0, 0, 2);
            double cout = c * c * jout[k].deriv(0, 2, 0) + 2 * c * s * jout[k].deriv(0, 1, 1) +
                          s * s * jout[k].deriv(0, 0, 2);
            if (!std::isfinite(vin) || !std::isfinite(vout) || !std::isfinite(din) ||
                !std::isfinite(dout))
                bad_value("interface_check", t, x, y);
            rep.psiInner[k] = std::max(rep.psiInner[k], std::abs(vin));
            rep.psiOuter[k] = std::max(rep.psiOuter[k], std::abs(vout));
            rep.slopeJump[k] = std::max(rep.slopeJump[k], std::abs(din - dout));
            rep.curvJump[k] = std::max(rep.curvJump[k], std::abs(cin - cout));
            rep.peak = std::max({rep.peak, std::abs(vin), std::abs(vout)});
            rep.peakSlope = std::max({rep.peakSlope, std::abs(din), std::abs(dout)});
        }
    }
    return rep;
}

}
