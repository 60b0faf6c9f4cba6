#include "qglab/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace qglab {
namespace {

constexpr double PI = 3.141592653589793238462643383279502884;

using Cplx = std::complex<double>;

bool pow2(int n) { return n >= 2 && (n & (n - 1)) == 0; }

// Iterative radix-2 transform with tabulated twiddles; repeated calls on the
// same axis length are bit-identical. The inverse leaves the 1/N scaling to
// the caller.
struct Axis {
    int n = 0;
    CVec tw;
    std::vector<int> rev;

    void build(int len) {
        n = len;
        tw.resize(n / 2);
        for (int k = 0; k < n / 2; ++k) {
            double a = -2.0 * PI * k / n;
            tw[k] = Cplx(std::cos(a), std::sin(a));
        }
        rev.assign(n, 0);
        int lg = 0;
        while ((1 << lg) < n) ++lg;
        for (int i = 1; i < n; ++i) rev[i] = (rev[i >> 1] >> 1) | ((i & 1) << (lg - 1));
    }

    void fft(Cplx* a, bool inverse) const {
        for (int i = 0; i < n; ++i)
            if (i < rev[i]) std::swap(a[i], a[rev[i]]);
        for (int len = 2; len <= n; len <<= 1) {
            int half = len / 2, step = n / len;
            for (int base = 0; base < n; base += len)
                for (int k = 0; k < half; ++k) {
                    Cplx w = tw[k * step];
                    if (inverse) w = std::conj(w);
                    Cplx u = a[base + k];
                    Cplx v = a[base + k + half] * w;
                    a[base + k] = u + v;
                    a[base + k + half] = u - v;
                }
        }
    }
};

struct Plan {
    Axis ax, ay;
    CVec col;

    void build(int Nx, int Ny) {
        ax.build(Nx);
        ay.build(Ny);
        col.resize(Ny);
    }

    void fft2(Cplx* p, int Nx, int Ny, bool inverse) {
        for (int j = 0; j < Ny; ++j) ax.fft(p + static_cast<size_t>(j) * Nx, inverse);
        for (int i = 0; i < Nx; ++i) {
            for (int j = 0; j < Ny; ++j) col[j] = p[static_cast<size_t>(j) * Nx + i];
            ay.fft(col.data(), inverse);
            for (int j = 0; j < Ny; ++j) p[static_cast<size_t>(j) * Nx + i] = col[j];
        }
    }
};

// Restores q(k) = conj(q(-k)) by averaging conjugate pairs.
void hermitianize(Cplx* p, int Nx, int Ny) {
    for (int j = 0; j < Ny; ++j) {
        int jm = (Ny - j) % Ny;
        if (jm < j) continue;
        for (int i = 0; i < Nx; ++i) {
            int im = (Nx - i) % Nx;
            if (jm == j && im < i) continue;
            size_t at = static_cast<size_t>(j) * Nx + i;
            size_t mt = static_cast<size_t>(jm) * Nx + im;
            Cplx h = 0.5 * (p[at] + std::conj(p[mt]));
            p[at] = h;
            p[mt] = std::conj(h);
        }
    }
}

// (F - k2 E) x = b along the layer index. The matrix is strictly diagonally
// dominant for k2 > 0 (physical diagonals carry the negated coupling sums),
// so the sweep needs no pivoting.
void thomas(const CouplingMatrix& F, double k2, const Cplx* b, Cplx* x, double* cw, Cplx* dw) {
    int m = F.m;
    double piv = F.diag[0] - k2;
    if (m == 1) {
        x[0] = b[0] / piv;
        return;
    }
    cw[0] = F.sup[0] / piv;
    dw[0] = b[0] / piv;
    for (int i = 1; i < m; ++i) {
        piv = (F.diag[i] - k2) - F.sub[i - 1] * cw[i - 1];
        if (i < m - 1) cw[i] = F.sup[i] / piv;
        dw[i] = (b[i] - F.sub[i - 1] * dw[i - 1]) / piv;
    }
    x[m - 1] = dw[m - 1];
    for (int i = m - 2; i >= 0; --i) x[i] = dw[i] - cw[i] * x[i + 1];
}

double l2norm(const CVec& v) {
    double s = 0;
    for (const auto& z : v) s += std::norm(z);
    return std::sqrt(s);
}

struct Work {
    Plan plan;
    CVec psihat, px, py, qx, qy, jac;
    Vec FU;
    Mat Fd;

    void build(const SimState& s) {
        plan.build(s.Nx, s.Ny);
        size_t plane = static_cast<size_t>(s.Nx) * s.Ny;
        px.resize(plane);
        py.resize(plane);
        qx.resize(plane);
        qy.resize(plane);
        jac.resize(plane);
        Fd = s.F.dense();
        FU = matvec(Fd, s.U);
    }
};

// Tendency of the spectral anomaly; returns the largest advective speed met
// on the grid (background included).
double rhs_eval(const SimState& s, const CVec& qin, CVec& out, Work& wk) {
    const int m = s.m, Nx = s.Nx, Ny = s.Ny;
    const size_t plane = static_cast<size_t>(Nx) * Ny;
    out.resize(qin.size());
    wk.psihat = invert_pv(s, qin);
    const double invN = 1.0 / (static_cast<double>(Nx) * Ny);
    double umax = 0;
    for (int k = 0; k < m; ++k) {
        const Cplx* ph = wk.psihat.data() + k * plane;
        const Cplx* qh = qin.data() + k * plane;
        for (int j = 0; j < Ny; ++j) {
            Cplx iky(0.0, s.ky[j]);
            bool keepy = s.masky[j] != 0;
            for (int i = 0; i < Nx; ++i) {
                size_t at = static_cast<size_t>(j) * Nx + i;
                if (keepy && s.maskx[i]) {
                    Cplx ikx(0.0, s.kx[i]);
                    wk.px[at] = ikx * ph[at];
                    wk.py[at] = iky * ph[at];
                    wk.qx[at] = ikx * qh[at];
                    wk.qy[at] = iky * qh[at];
                } else {
                    wk.px[at] = wk.py[at] = wk.qx[at] = wk.qy[at] = Cplx(0, 0);
                }
            }
        }
        wk.plan.fft2(wk.px.data(), Nx, Ny, true);
        wk.plan.fft2(wk.py.data(), Nx, Ny, true);
        wk.plan.fft2(wk.qx.data(), Nx, Ny, true);
        wk.plan.fft2(wk.qy.data(), Nx, Ny, true);
        for (size_t at = 0; at < plane; ++at) {
            double pxv = wk.px[at].real() * invN;
            double pyv = wk.py[at].real() * invN;
            double qxv = wk.qx[at].real() * invN;
            double qyv = wk.qy[at].real() * invN;
            double u = s.U[k] - pyv;
            umax = std::max(umax, std::max(std::abs(u), std::abs(pxv)));
            wk.jac[at] = Cplx(pxv * qyv - pyv * qxv, 0.0);
        }
        wk.plan.fft2(wk.jac.data(), Nx, Ny, false);
        double betaEff = s.beta - wk.FU[k];
        Cplx* ok = out.data() + k * plane;
        for (int j = 0; j < Ny; ++j) {
            bool keepy = s.masky[j] != 0;
            for (int i = 0; i < Nx; ++i) {
                size_t at = static_cast<size_t>(j) * Nx + i;
                Cplx ikx(0.0, s.kx[i]);
                Cplx adv = (keepy && s.maskx[i]) ? wk.jac[at] : Cplx(0, 0);
                ok[at] = -adv - betaEff * (ikx * ph[at]) - s.U[k] * (ikx * qh[at]);
            }
        }
        hermitianize(ok, Nx, Ny);
    }
    return umax;
}

struct Stepper {
    Work wk;
    CVec k1, k2, k3, k4, tmp;

    void build(const SimState& s) { wk.build(s); }

    void step(SimState& s, double dt) {
        double umax = rhs_eval(s, s.qhat, k1, wk);
        double lim = 0.5 * std::min(s.dx(), s.dy()) / std::max(umax, 1e-300);
        if (dt > lim) {
            char buf[192];
            std::snprintf(buf, sizeof buf,
                          "step_rk4: dt=%.6g exceeds the advective limit %.6g (max speed %.6g)",
                          dt, lim, umax);
            throw ConfigError(buf);
        }
        size_t n = s.qhat.size();
        tmp.resize(n);
        auto shifted = [&](double a, const CVec& d) {
            for (size_t i = 0; i < n; ++i) tmp[i] = s.qhat[i] + a * d[i];
        };
        shifted(0.5 * dt, k1);
        rhs_eval(s, tmp, k2, wk);
        shifted(0.5 * dt, k2);
        rhs_eval(s, tmp, k3, wk);
        shifted(dt, k3);
        rhs_eval(s, tmp, k4, wk);
        for (size_t i = 0; i < n; ++i)
            s.qhat[i] += dt / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
        size_t plane = static_cast<size_t>(s.Nx) * s.Ny;
        for (int k = 0; k < s.m; ++k) hermitianize(s.qhat.data() + k * plane, s.Nx, s.Ny);
        s.t += dt;
    }
};

GridField grid_of(const SimState& s, const CVec& spectra) {
    GridField g;
    g.spec.x0 = s.x0;
    g.spec.y0 = s.y0;
    g.spec.Nx = s.Nx;
    g.spec.Ny = s.Ny;
    g.spec.Lx = s.Lx * (s.Nx - 1) / s.Nx;
    g.spec.Ly = s.Ly * (s.Ny - 1) / s.Ny;
    g.spec.t = s.t;
    g.m = s.m;
    size_t plane = static_cast<size_t>(s.Nx) * s.Ny;
    g.data.assign(plane * s.m, 0.0);
    g.flags.assign(plane, 0);
    Plan plan;
    plan.build(s.Nx, s.Ny);
    const double invN = 1.0 / (static_cast<double>(s.Nx) * s.Ny);
    CVec buf(plane);
    for (int k = 0; k < s.m; ++k) {
        std::copy(spectra.begin() + k * plane, spectra.begin() + (k + 1) * plane, buf.begin());
        plan.fft2(buf.data(), s.Nx, s.Ny, true);
        for (int j = 0; j < s.Ny; ++j)
            for (int i = 0; i < s.Nx; ++i)
                g.data[(static_cast<size_t>(j) * s.Nx + i) * s.m + k] =
                    buf[static_cast<size_t>(j) * s.Nx + i].real() * invN;
    }
    return g;
}

// Displacement of slice b relative to slice a from the circular
// cross-correlation, in nodes. Periodic signals repeat their correlation
// peak every wavelength, so of all local maxima the one nearest zero shift
// is taken: callers track displacement incrementally and keep each
// increment under half the dominant wavelength. Parabolic refinement gives
// sub-node resolution.
double correlation_shift(const Axis& ax, const Vec& a, const Vec& b) {
    int n = ax.n;
    CVec fa(n), fb(n);
    for (int i = 0; i < n; ++i) {
        fa[i] = Cplx(a[i], 0.0);
        fb[i] = Cplx(b[i], 0.0);
    }
    ax.fft(fa.data(), false);
    ax.fft(fb.data(), false);
    CVec c(n);
    for (int i = 0; i < n; ++i) c[i] = fb[i] * std::conj(fa[i]);
    ax.fft(c.data(), true);
    int p = -1;
    double best = 0;
    for (int i = 0; i < n; ++i) {
        double y0 = c[i].real();
        if (y0 < c[(i + n - 1) % n].real() || y0 < c[(i + 1) % n].real()) continue;
        double dist = i <= n / 2 ? i : n - i;
        if (p < 0 || dist < best) {
            p = i;
            best = dist;
        }
    }
    if (p < 0) return 0.0;
    double ym = c[(p + n - 1) % n].real();
    double y0 = c[p].real();
    double yp = c[(p + 1) % n].real();
    double den = ym - 2.0 * y0 + yp;
    double delta = den != 0.0 ? 0.5 * (ym - yp) / den : 0.0;
    if (!(std::abs(delta) <= 1.0)) delta = 0.0;
    double shift = p + delta;
    if (shift > n / 2.0) shift -= n;
    return shift;
}

}  // namespace

SimState make_state(const CouplingMatrix& F, double beta, const SimParams& p) {
    if (F.m < 1) throw ConfigError("make_state: coupling matrix is empty");
    if (!pow2(p.Nx) || !pow2(p.Ny) || p.Nx < 16 || p.Ny < 16)
        throw ConfigError("make_state: Nx and Ny must be powers of two, at least 16");
    if (!(p.Lx > 0) || !(p.Ly > 0)) throw ConfigError("make_state: box sides must be positive");
    if (!std::isfinite(p.x0) || !std::isfinite(p.y0) || !std::isfinite(p.t0))
        throw ConfigError("make_state: box origin and time must be finite");
    if (!p.U.empty() && static_cast<int>(p.U.size()) != F.m)
        throw ConfigError("make_state: background speed length differs from the layer count");
    SimState s;
    s.m = F.m;
    s.Nx = p.Nx;
    s.Ny = p.Ny;
    s.x0 = p.x0;
    s.y0 = p.y0;
    s.Lx = p.Lx;
    s.Ly = p.Ly;
    s.t = p.t0;
    s.beta = beta;
    s.dealias = p.dealias;
    s.F = F;
    SpectralData sd = spectral(F);
    s.pinv = sd.pinv;
    s.w = sd.weights;
    s.U = p.U.empty() ? Vec(F.m, 0.0) : p.U;
    for (double u : s.U)
        if (!std::isfinite(u)) throw ConfigError("make_state: background speed is not finite");
    s.kx.resize(p.Nx);
    s.ky.resize(p.Ny);
    s.maskx.assign(p.Nx, 1);
    s.masky.assign(p.Ny, 1);
    for (int i = 0; i < p.Nx; ++i) {
        int sx = i <= p.Nx / 2 ? i : i - p.Nx;
        s.kx[i] = 2.0 * PI * sx / p.Lx;
        if (p.dealias ? 3 * std::abs(sx) > p.Nx : i == p.Nx / 2) s.maskx[i] = 0;
    }
    for (int j = 0; j < p.Ny; ++j) {
        int sy = j <= p.Ny / 2 ? j : j - p.Ny;
        s.ky[j] = 2.0 * PI * sy / p.Ly;
        if (p.dealias ? 3 * std::abs(sy) > p.Ny : j == p.Ny / 2) s.masky[j] = 0;
    }
    s.qhat.assign(static_cast<size_t>(F.m) * p.Nx * p.Ny, Cplx(0, 0));
    return s;
}

SimState init_from_solution(const SolutionField& f, const CouplingMatrix& F, double beta,
                            const SimParams& p) {
    if (f.m != F.m) throw ConfigError("init_from_solution: field and coupling layer counts differ");
    if (!f.eval) throw ConfigError("init_from_solution: field has no evaluator");
    if (!(p.wrapTol > 0)) throw ConfigError("init_from_solution: wrap tolerance must be positive");
    SimState s = make_state(F, beta, p);
    const int m = s.m, Nx = s.Nx, Ny = s.Ny;
    const size_t plane = static_cast<size_t>(Nx) * Ny;
    const double dx = s.dx(), dy = s.dy(), t0 = p.t0;
    Mat Fd = F.dense();
    Vec FU = matvec(Fd, s.U);

    const bool jets = f.has_jet();
    CVec pn(static_cast<size_t>(m) * plane);         // periodic streamfunction part
    CVec qn(jets ? static_cast<size_t>(m) * plane : 0);  // exact anomaly samples
    double maxAbs = 0;
    for (int j = 0; j < Ny; ++j) {
        double y = s.y0 + j * dy;
        for (int i = 0; i < Nx; ++i) {
            double x = s.x0 + i * dx;
            size_t at = static_cast<size_t>(j) * Nx + i;
            if (jets) {
                std::vector<Jet3> js = f.jet(t0, x, y);
                for (int k = 0; k < m; ++k) {
                    double fsum = 0;
                    for (int l = 0; l < m; ++l) fsum += Fd(k, l) * js[l].c[0];
                    double qv = js[k].deriv(0, 2, 0) + js[k].deriv(0, 0, 2) + fsum + FU[k] * y;
                    double pv = js[k].c[0] + s.U[k] * y;
                    qn[k * plane + at] = Cplx(qv, 0.0);
                    pn[k * plane + at] = Cplx(pv, 0.0);
                    maxAbs = std::max(maxAbs, std::abs(pv));
                }
            } else {
                Vec v = f.eval(t0, x, y);
                for (int k = 0; k < m; ++k) {
                    double pv = v[k] + s.U[k] * y;
                    pn[k * plane + at] = Cplx(pv, 0.0);
                    maxAbs = std::max(maxAbs, std::abs(pv));
                }
            }
        }
    }
    if (!std::isfinite(maxAbs)) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "init_from_solution: field value is not finite at t=%g", t0);
        throw NumericError(buf);
    }

    // periodicity defect of the stripped field across opposite box edges
    double edge = 0;
    auto pval = [&](double X, double Y) {
        Vec v = f.eval(t0, X, Y);
        for (int k = 0; k < m; ++k) v[k] += s.U[k] * Y;
        return v;
    };
    for (int j = 0; j < Ny; ++j) {
        double y = s.y0 + j * dy;
        Vec a = pval(s.x0, y), b = pval(s.x0 + s.Lx, y);
        for (int k = 0; k < m; ++k) edge = std::max(edge, std::abs(a[k] - b[k]));
    }
    for (int i = 0; i < Nx; ++i) {
        double x = s.x0 + i * dx;
        Vec a = pval(x, s.y0), b = pval(x, s.y0 + s.Ly);
        for (int k = 0; k < m; ++k) edge = std::max(edge, std::abs(a[k] - b[k]));
    }
    s.wrapError = maxAbs > 0 ? edge / maxAbs : 0.0;
    if (s.wrapError > p.wrapTol) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "init_from_solution: periodicity defect %.3e exceeds tolerance %.3e",
                      s.wrapError, p.wrapTol);
        throw ConfigError(buf);
    }

    Plan plan;
    plan.build(Nx, Ny);
    if (jets) {
        for (int k = 0; k < m; ++k) plan.fft2(qn.data() + k * plane, Nx, Ny, false);
        s.qhat = std::move(qn);
    } else {
        for (int k = 0; k < m; ++k) {
            plan.fft2(pn.data() + k * plane, Nx, Ny, false);
            hermitianize(pn.data() + k * plane, Nx, Ny);
        }
        // q^ = (F - |k|^2 E) psi^ along the layer index
        for (int j = 0; j < Ny; ++j)
            for (int i = 0; i < Nx; ++i) {
                size_t at = static_cast<size_t>(j) * Nx + i;
                double k2 = s.kx[i] * s.kx[i] + s.ky[j] * s.ky[j];
                for (int k = 0; k < m; ++k) {
                    Cplx acc = (F.diag[k] - k2) * pn[k * plane + at];
                    if (k > 0) acc += F.sub[k - 1] * pn[(k - 1) * plane + at];
                    if (k < m - 1) acc += F.sup[k] * pn[(k + 1) * plane + at];
                    s.qhat[k * plane + at] = acc;
                }
            }
    }
    for (int k = 0; k < m; ++k) {
        hermitianize(s.qhat.data() + k * plane, Nx, Ny);
        for (int j = 0; j < Ny; ++j)
            for (int i = 0; i < Nx; ++i)
                if (!(s.masky[j] && s.maskx[i])) s.qhat[k * plane + static_cast<size_t>(j) * Nx + i] = Cplx(0, 0);
    }
    return s;
}

CVec invert_pv(const SimState& s, const CVec& qhat) {
    const size_t plane = static_cast<size_t>(s.Nx) * s.Ny;
    if (qhat.size() != plane * s.m)
        throw ConfigError("invert_pv: spectrum size does not match the state layout");
    CVec psi(qhat.size());
    std::vector<double> cw(s.m);
    CVec b(s.m), x(s.m), dw(s.m);
    for (int j = 0; j < s.Ny; ++j)
        for (int i = 0; i < s.Nx; ++i) {
            size_t at = static_cast<size_t>(j) * s.Nx + i;
            for (int k = 0; k < s.m; ++k) b[k] = qhat[k * plane + at];
            if (i == 0 && j == 0) {
                for (int k = 0; k < s.m; ++k) {
                    Cplx acc(0, 0);
                    for (int l = 0; l < s.m; ++l) acc += s.pinv(k, l) * b[l];
                    x[k] = acc;
                }
            } else {
                double k2 = s.kx[i] * s.kx[i] + s.ky[j] * s.ky[j];
                thomas(s.F, k2, b.data(), x.data(), cw.data(), dw.data());
            }
            for (int k = 0; k < s.m; ++k) psi[k * plane + at] = x[k];
        }
    return psi;
}

CVec invert_pv(const SimState& s) { return invert_pv(s, s.qhat); }

double max_speed(const SimState& s) {
    const size_t plane = static_cast<size_t>(s.Nx) * s.Ny;
    CVec ph = invert_pv(s, s.qhat);
    Plan plan;
    plan.build(s.Nx, s.Ny);
    CVec px(plane), py(plane);
    const double invN = 1.0 / (static_cast<double>(s.Nx) * s.Ny);
    double umax = 0;
    for (int k = 0; k < s.m; ++k) {
        const Cplx* base = ph.data() + k * plane;
        for (int j = 0; j < s.Ny; ++j)
            for (int i = 0; i < s.Nx; ++i) {
                size_t at = static_cast<size_t>(j) * s.Nx + i;
                if (s.masky[j] && s.maskx[i]) {
                    px[at] = Cplx(0.0, s.kx[i]) * base[at];
                    py[at] = Cplx(0.0, s.ky[j]) * base[at];
                } else {
                    px[at] = py[at] = Cplx(0, 0);
                }
            }
        plan.fft2(px.data(), s.Nx, s.Ny, true);
        plan.fft2(py.data(), s.Nx, s.Ny, true);
        for (size_t at = 0; at < plane; ++at) {
            double u = s.U[k] - py[at].real() * invN;
            double v = px[at].real() * invN;
            umax = std::max(umax, std::max(std::abs(u), std::abs(v)));
        }
    }
    return umax;
}

double cfl_limit(const SimState& s) {
    double umax = max_speed(s);
    if (umax <= 0) return std::numeric_limits<double>::infinity();
    return 0.5 * std::min(s.dx(), s.dy()) / umax;
}

void step_rk4(SimState& s, double dt) {
    if (!(dt > 0) || !std::isfinite(dt)) throw ConfigError("step_rk4: dt must be positive");
    Stepper st;
    st.build(s);
    st.step(s, dt);
}

Diagnostics run(SimState& s, const RunOptions& opt) {
    if (!(opt.dt > 0) || !std::isfinite(opt.dt))
        throw ConfigError("run: dt must be positive");
    if (opt.steps < 1) throw ConfigError("run: steps must be positive");
    if (opt.sampleEvery < 1) throw ConfigError("run: sampleEvery must be positive");
    const int m = s.m, Nx = s.Nx, Ny = s.Ny;
    const size_t plane = static_cast<size_t>(Nx) * Ny;
    const double invN = 1.0 / (static_cast<double>(Nx) * Ny);
    const double scale = s.Lx * s.Ly * invN * invN;
    const double t0 = s.t;

    Plan plan;
    plan.build(Nx, Ny);
    CVec q0 = s.qhat;
    double n0 = l2norm(q0);

    // initial streamfunction peak (drift normalization) and tracer slice
    CVec buf(plane);
    double peak0 = 0;
    {
        CVec ph0 = invert_pv(s, q0);
        for (int k = 0; k < m; ++k) {
            std::copy(ph0.begin() + k * plane, ph0.begin() + (k + 1) * plane, buf.begin());
            plan.fft2(buf.data(), Nx, Ny, true);
            for (size_t at = 0; at < plane; ++at)
                peak0 = std::max(peak0, std::abs(buf[at].real() * invN));
        }
    }
    // phase tracking: displacement of the layer-0 mid-row anomaly accumulated
    // between consecutive samples, so each increment stays well under half a
    // wavelength even for monochromatic states
    auto midSlice = [&](Vec& out) {
        std::copy(s.qhat.begin(), s.qhat.begin() + plane, buf.begin());
        plan.fft2(buf.data(), Nx, Ny, true);
        for (int i = 0; i < Nx; ++i)
            out[i] = buf[static_cast<size_t>(Ny / 2) * Nx + i].real() * invN;
    };
    Vec prevSlice(Nx), curSlice(Nx);
    midSlice(prevSlice);
    double aref = 0;
    for (double v : prevSlice) aref = std::max(aref, std::abs(v));
    double shiftTotal = 0;

    std::vector<Vec> enst;
    Diagnostics d;
    d.dt = opt.dt;
    d.steps = opt.steps;

    CVec ref(plane * m), diff(plane);
    auto sample = [&]() {
        CVec ph = invert_pv(s, s.qhat);
        double tau = s.t - t0;
        // energy and per-layer enstrophy by Parseval sums
        double E = 0;
        Vec Z(m, 0.0);
        for (int j = 0; j < Ny; ++j)
            for (int i = 0; i < Nx; ++i) {
                size_t at = static_cast<size_t>(j) * Nx + i;
                double k2 = s.kx[i] * s.kx[i] + s.ky[j] * s.ky[j];
                for (int k = 0; k < m; ++k) {
                    Cplx pv = ph[k * plane + at];
                    Cplx fp = s.F.diag[k] * pv;
                    if (k > 0) fp += s.F.sub[k - 1] * ph[(k - 1) * plane + at];
                    if (k < m - 1) fp += s.F.sup[k] * ph[(k + 1) * plane + at];
                    E += s.w[k] * (k2 * std::norm(pv) - (std::conj(pv) * fp).real());
                    Z[k] += std::norm(s.qhat[k * plane + at]);
                }
            }
        E *= 0.5 * scale;
        for (int k = 0; k < m; ++k) Z[k] *= 0.5 * scale;
        // drift against the advected initial state
        double drift = 0;
        if (peak0 > 0) {
            for (int k = 0; k < m; ++k)
                for (int j = 0; j < Ny; ++j)
                    for (int i = 0; i < Nx; ++i) {
                        size_t at = static_cast<size_t>(j) * Nx + i;
                        double a = -s.kx[i] * opt.refSpeed * tau;
                        ref[k * plane + at] = q0[k * plane + at] * Cplx(std::cos(a), std::sin(a));
                    }
            CVec phr = invert_pv(s, ref);
            for (int k = 0; k < m; ++k) {
                for (size_t at = 0; at < plane; ++at)
                    diff[at] = ph[k * plane + at] - phr[k * plane + at];
                plan.fft2(diff.data(), Nx, Ny, true);
                for (size_t at = 0; at < plane; ++at)
                    drift = std::max(drift, std::abs(diff[at].real() * invN));
            }
            drift /= peak0;
        }
        if (aref > 0 && s.t > t0) {
            midSlice(curSlice);
            shiftTotal += correlation_shift(plan.ax, prevSlice, curSlice);
            prevSlice.swap(curSlice);
        }
        d.times.push_back(s.t);
        d.energy.push_back(E);
        d.drift.push_back(drift);
        enst.push_back(Z);
    };

    sample();
    Stepper st;
    st.build(s);
    for (int n = 1; n <= opt.steps; ++n) {
        st.step(s, opt.dt);
        double nn = l2norm(s.qhat);
        if (!(nn <= 10.0 * std::max(n0, 1e-300))) {
            char buf2[128];
            std::snprintf(buf2, sizeof buf2,
                          "run: solution norm left the stability envelope at t=%.6g", s.t);
            throw NumericError(buf2);
        }
        if (n % opt.sampleEvery == 0 || n == opt.steps) sample();
    }

    double T = s.t - t0;
    if (aref > 0 && T > 0) d.phaseSpeed = shiftTotal * s.dx() / T;

    d.enstrophy = Mat(static_cast<int>(enst.size()), m);
    for (size_t r = 0; r < enst.size(); ++r)
        for (int k = 0; k < m; ++k) d.enstrophy(static_cast<int>(r), k) = enst[r][k];
    return d;
}

GridField psi_grid(const SimState& s) { return grid_of(s, invert_pv(s, s.qhat)); }

GridField q_grid(const SimState& s) { return grid_of(s, s.qhat); }

}
