#include "qglab/modon.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>

#include "qglab/errors.hpp"
#include "qglab/harmonics.hpp"
#include "qglab/linalg.hpp"
#include "qglab/rootfind.hpp"
#include "qglab/specfun.hpp"

namespace qglab {

namespace {

double j1_zero(int k) {
    if (k <= 5) return bessel_j1_zero(k);
    // McMahon estimate refined on J1; good to machine precision for k > 5
    double b = (k + 0.25) * 3.14159265358979323846;
    double g = b - 3.0 / (8.0 * b);
    return brent([](double x) { return bessel_j(1, x); }, g - 0.4, g + 0.4);
}

// left-hand side minus right-hand side of the interface condition shared by
// both solvers; poles sit at the zeros of J1(sqrt(nuLike)*r0)
double interface_gap(double nuLike, double kappaLike, double r0) {
    double a = std::sqrt(nuLike) * r0, b = std::sqrt(kappaLike) * r0;
    return (r0 / std::sqrt(nuLike)) * bessel_ratio_j0j1(a) -
           (r0 / std::sqrt(kappaLike)) * bessel_ratio_k0k1(b) - 2.0 / nuLike - 2.0 / kappaLike;
}

// scan one pole-free interval, polish every sign change
void scan_interval(const std::function<double(double)>& f, double lo, double hi, int cells,
                   std::vector<double>& out) {
    double a = lo + 1e-9 * (hi - lo), b = hi - 1e-9 * (hi - lo);
    if (!(a < b)) return;
    auto safe = [&](double x) {
        try {
            return f(x);
        } catch (const NumericError&) {
            return std::numeric_limits<double>::quiet_NaN();
        }
    };
    double xp = a, fp = safe(a);
    for (int i = 1; i <= cells; ++i) {
        double x = a + (b - a) * i / cells;
        double fx = safe(x);
        if (std::isfinite(fp) && std::isfinite(fx) && fp * fx < 0.0)
            out.push_back(brent(f, xp, x));
        xp = x;
        fp = fx;
    }
}

constexpr int kScanCells = 400;

Vec poly_from_roots(const Vec& roots) {
    Vec c{1.0};
    for (double r : roots) {
        c.insert(c.begin(), 0.0);
        for (size_t k = 0; k + 1 < c.size(); ++k) c[k] -= r * c[k + 1];
    }
    return c;  // ascending, monic
}

Vec weights_of(const CouplingMatrix& F) {
    Vec w(F.m, 1.0);
    for (int i = 0; i + 1 < F.m; ++i) w[i + 1] = w[i] * F.sup[i] / F.sub[i];
    return w;
}

// region payload: first radial harmonic per mode plus the linear background
struct HalfPayload {
    int m;
    BesselKind kind;
    Vec s;  // sqrt of |eigenvalue| per mode
    Vec alphas;
    Mat vectors;
    Vec ubg;
};

SolutionField half_field(std::shared_ptr<const HalfPayload> h, Domain dom, const Vec& Bdiag) {
    SolutionField f;
    f.m = h->m;
    f.domain = dom;
    f.tags.Bdiag = Bdiag;
    f.eval = [h](double, double x, double y) {
        Vec out(h->m, 0.0);
        for (int j = 0; j < h->m; ++j) {
            if (h->alphas[j] == 0.0) continue;
            double g = cylinder_wave(h->kind, h->s[j], 1, x, y).imag();
            for (int i = 0; i < h->m; ++i) out[i] += h->alphas[j] * g * h->vectors(i, j);
        }
        for (int i = 0; i < h->m; ++i) out[i] -= y * h->ubg[i];
        return out;
    };
    f.jet = [h](double, double x, double y) {
        Jet3 X = Jet3::var(1, x), Y = Jet3::var(2, y);
        std::vector<Jet3> js(h->m, Jet3::constant(0.0));
        for (int j = 0; j < h->m; ++j) {
            if (h->alphas[j] == 0.0) continue;
            CJet3 cw = cylinder_wave_jet(h->kind, h->s[j], 1, X, Y);
            for (int i = 0; i < h->m; ++i) js[i] += (h->alphas[j] * h->vectors(i, j)) * cw.im;
        }
        for (int i = 0; i < h->m; ++i) js[i] -= h->ubg[i] * Y;
        return js;
    };
    f.tags.family = "modon";
    f.tags.hasBackground = true;
    f.tags.ubg = h->ubg;
    f.tags.bgCoef = Mat(h->m, 3);
    for (int i = 0; i < h->m; ++i) f.tags.bgCoef(i, 0) = -h->ubg[i];
    return f;
}

// residual of the vector matching condition given region backgrounds
Vec residual_core(const ModonSpec& sp, const Vec& ut, const Vec& uh, const Vec& w) {
    int m = sp.m;
    Vec ones(m, 1.0), R(m);
    for (int i = 0; i < m; ++i) R[i] = uh[i] - ut[i];
    for (int j = 0; j < m; ++j) {
        double nu = sp.inner.lambdas[j];
        double sn = std::sqrt(nu), a = sn * sp.r0;
        double j1 = bessel_j(1, a);
        double ratioJ = (bessel_j(0, a) - j1 / a) / j1;
        double cin = 0;
        for (int i = 0; i < m; ++i) cin += w[i] * sp.inner.vectors(i, j);
        double cJ = sp.r0 * sp.beta / sn * ratioJ * cin;
        for (int i = 0; i < m; ++i) R[i] += cJ * sp.inner.vectors(i, j);

        double ss = std::sqrt(-sp.outer.lambdas[j]), b = ss * sp.r0;
        double k1 = bessel_k(1, b);
        double ratioK = (-bessel_k(0, b) - k1 / b) / k1;
        double cout = 0;
        for (int i = 0; i < m; ++i) cout += w[i] * sp.outer.vectors(i, j);
        double cK = sp.r0 * sp.beta / ss * ratioK * cout;
        for (int i = 0; i < m; ++i) R[i] += cK * sp.outer.vectors(i, j);
    }
    Vec out(m);
    for (int j = 0; j < m; ++j) {
        double p = 0;
        for (int i = 0; i < m; ++i) p += w[i] * R[i] * sp.inner.vectors(i, j);
        out[j] = p;
    }
    return out;
}

ModonSpec build_lr_spec(const CouplingMatrix& F, double beta, double rt, double rh, double r0) {
    auto sd = spectral(F);
    int m = F.m;
    if (sd.zero_index < 0) throw ConfigError("barotropic modon needs the uncoupled mode");
    double n1 = weighted_norm(Vec(m, 1.0), sd.weights);

    ModonSpec sp;
    sp.m = m;
    sp.beta = beta;
    sp.r0 = r0;
    sp.barotropic = true;
    sp.rhoTilde = rt;
    sp.rhoHat = rh;
    sp.rho = rt + rh;

    Mat vecs(m, m);
    for (int j = 0; j < m; ++j) {
        Vec e = sd.eigvec(j);
        if (j == sd.zero_index)
            for (int i = 0; i < m; ++i) e[i] /= n1;
        for (int i = 0; i < m; ++i) vecs(i, j) = e[i];
    }

    sp.inner.Bdiag = Vec(m, -rt);
    sp.inner.lambdas = Vec(m);
    sp.inner.vectors = vecs;
    sp.inner.alphas = Vec(m, 0.0);
    sp.inner.ubg = Vec(m, beta / rt);
    sp.outer.Bdiag = Vec(m, rh);
    sp.outer.lambdas = Vec(m);
    sp.outer.vectors = vecs;
    sp.outer.alphas = Vec(m, 0.0);
    sp.outer.ubg = Vec(m, -beta / rh);
    for (int i = 0; i < m; ++i) {
        sp.inner.lambdas[i] = sd.lambdas[i] + rt;
        sp.outer.lambdas[i] = sd.lambdas[i] - rh;
        if (sp.inner.lambdas[i] <= 0)
            throw ConfigError("inner shift leaves a nonpositive eigenvalue");
    }
    sp.inner.alphas[sd.zero_index] = r0 * beta * n1 / (rt * bessel_j(1, std::sqrt(rt) * r0));
    sp.outer.alphas[sd.zero_index] = -r0 * beta * n1 / (rh * bessel_k(1, std::sqrt(rh) * r0));
    return sp;
}

}  // namespace

ModonSpec lr_barotropic_solve(const CouplingMatrix& F, double beta, const LRParams& given) {
    int unknowns = (given.r0 == 0.0) + (given.rhoTilde == 0.0) + (given.rhoHat == 0.0);
    if (unknowns != 1)
        throw ConfigError("lr_barotropic_solve: exactly one of r0, rhoTilde, rhoHat must be unset");
    if (given.r0 < 0 || given.rhoTilde < 0 || given.rhoHat < 0)
        throw ConfigError("lr_barotropic_solve: parameters must be positive");
    if (given.branch < 1 || given.branch > 10)
        throw ConfigError("lr_barotropic_solve: branch out of range");

    auto sd = spectral(F);
    double rad = std::abs(sd.lambdas[0]);  // spectral radius, eigenvalues ascending from it
    if (given.rhoTilde != 0.0 && given.rhoTilde <= rad)
        throw ConfigError("lr_barotropic_solve: rhoTilde must exceed the spectral radius");

    double rt = given.rhoTilde, rh = given.rhoHat, r0 = given.r0;

    if (given.rhoHat == 0.0) {
        // monotone in rhoHat: geometric scan, then polish
        auto g = [&](double x) { return interface_gap(rt, x, r0); };
        std::vector<double> roots;
        double xp = 1e-14, fp = g(xp);
        for (int i = 1; i <= 600; ++i) {
            double x = 1e-14 * std::pow(1e10, i / 600.0);
            double fx = g(x);
            if (std::isfinite(fp) && std::isfinite(fx) && fp * fx < 0.0)
                roots.push_back(brent(g, xp, x));
            xp = x;
            fp = fx;
        }
        if (roots.empty()) throw NumericError("lr_barotropic_solve: no root for rhoHat in bracket");
        rh = roots.front();
    } else {
        // both remaining cases reduce to a scan of z = sqrt(rhoTilde)*r0 over
        // the pole-free intervals between J1 zeros, then a branch filter
        int branch = given.branch;
        std::vector<double> edges{0.0};
        for (int k = 1; k <= branch + 1; ++k) edges.push_back(j1_zero(k));
        std::function<double(double)> f;
        if (given.r0 == 0.0)
            f = [&](double z) { return interface_gap(rt, rh, z / std::sqrt(rt)); };
        else
            f = [&](double z) { return interface_gap((z / r0) * (z / r0), rh, r0); };
        std::vector<double> zroots;
        for (size_t k = 0; k + 1 < edges.size(); ++k)
            scan_interval(f, edges[k], edges[k + 1], kScanCells, zroots);
        double zlo = edges[branch], zhi = edges[branch + 1];
        double scale = 2.0 / rt + (rh > 0 ? 2.0 / rh : 0.0) + 2.0 * rad;
        std::erase_if(zroots, [&](double z) {
            return z <= zlo || z >= zhi || std::abs(f(z)) > 1e-6 * scale;
        });
        if (given.r0 == 0.0) {
            if (zroots.empty())
                throw NumericError("lr_barotropic_solve: no root for r0 in the selected branch");
            r0 = *std::min_element(zroots.begin(), zroots.end()) / std::sqrt(rt);
        } else {
            std::erase_if(zroots, [&](double z) { return (z / r0) * (z / r0) <= rad; });
            if (zroots.empty())
                throw NumericError(
                    "lr_barotropic_solve: no admissible root for rhoTilde in the selected branch");
            double z = *std::min_element(zroots.begin(), zroots.end());
            rt = (z / r0) * (z / r0);
        }
    }
    return build_lr_spec(F, beta, rt, rh, r0);
}

ModonSpec shared_basis_solve(const CouplingMatrix& F, double beta, double r0, double rho,
                             const std::vector<int>& assignment) {
    int m = F.m;
    if (r0 <= 0 || rho <= 0) throw ConfigError("shared_basis_solve: r0 and rho must be positive");
    std::vector<int> assign(m);
    for (int i = 0; i < m; ++i) assign[i] = i;
    if (!assignment.empty()) {
        if ((int)assignment.size() != m)
            throw ConfigError("shared_basis_solve: assignment size mismatch");
        std::vector<bool> seen(m, false);
        for (int v : assignment) {
            if (v < 0 || v >= m || seen[v])
                throw ConfigError("shared_basis_solve: assignment is not a permutation");
            seen[v] = true;
        }
        assign = assignment;
    }

    // roots of the scalar interface condition between its poles
    std::vector<double> edges{0.0};
    for (int k = 1; k <= 60; ++k) {
        double p = j1_zero(k) / r0;
        p *= p;
        if (p >= rho) break;
        edges.push_back(p);
    }
    edges.push_back(rho);
    auto f = [&](double nu) { return interface_gap(nu, rho - nu, r0); };
    std::vector<double> roots;
    for (size_t k = 0; k + 1 < edges.size(); ++k)
        scan_interval(f, edges[k], edges[k + 1], kScanCells, roots);
    std::erase_if(roots, [&](double nu) {
        double scale = 2.0 / nu + 2.0 / (rho - nu);
        return std::abs(f(nu)) > 1e-6 * scale;
    });
    std::sort(roots.begin(), roots.end());
    if ((int)roots.size() < m)
        throw NumericError("shared_basis_solve: fewer interface roots than layers");
    roots.resize(m);
    for (int i = 0; i + 1 < m; ++i)
        if (roots[i + 1] - roots[i] <= 1e-9 * roots[m - 1])
            throw NumericError("shared_basis_solve: coincident interface roots");

    // recover the diagonal shift whose spectrum is the root set: Newton on the
    // characteristic coefficients, seeded by the requested root-to-layer
    // assignment (each assignment is a distinct solution branch)
    Vec target = poly_from_roots(Vec(roots.begin(), roots.end()));
    Vec b(m);
    for (int i = 0; i < m; ++i) b[i] = F.diag[i] - roots[assign[i]];
    auto resid = [&](const Vec& bb) {
        Vec p = char_poly(F.shifted(bb));
        Vec r(m);
        for (int k = 0; k < m; ++k) r[k] = p[k] - target[k];
        return r;
    };
    auto relmax = [&](const Vec& r) {
        double worst = 0;
        for (int k = 0; k < m; ++k) worst = std::max(worst, std::abs(r[k]) / std::abs(target[k]));
        return worst;
    };
    Vec r = resid(b);
    double h = 1e-6 * roots[m - 1];
    bool converged = false;
    for (int it = 0; it < 100; ++it) {
        if (relmax(r) < 2e-14) {
            converged = true;
            break;
        }
        Mat J(m, m);
        for (int j = 0; j < m; ++j) {
            Vec bp = b, bm = b;
            bp[j] += h;
            bm[j] -= h;
            Vec rp = resid(bp), rm = resid(bm);
            for (int k = 0; k < m; ++k) J(k, j) = (rp[k] - rm[k]) / (2 * h);
        }
        Vec rhs(m);
        for (int k = 0; k < m; ++k) rhs[k] = -r[k];
        Vec db = solve(J, rhs);
        double step = 1.0;
        bool improved = false;
        for (int half = 0; half < 60; ++half) {
            Vec bn(m);
            for (int k = 0; k < m; ++k) bn[k] = b[k] + step * db[k];
            Vec rn = resid(bn);
            if (relmax(rn) < relmax(r)) {
                b = bn;
                r = rn;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if (!improved) break;  // stalled at the rounding floor
    }
    if (!converged && relmax(r) > 1e-12)
        throw NumericError("shared_basis_solve: shift recovery Newton did not converge");

    auto sd = spectral(F.shifted(b));
    for (int i = 0; i < m; ++i) {
        if (sd.lambdas[i] <= 0)
            throw NumericError("shared_basis_solve: recovered shift has a nonpositive eigenvalue");
        if (std::abs(sd.lambdas[i] - roots[i]) > 1e-6 * roots[i])
            throw NumericError("shared_basis_solve: recovered spectrum drifted off the roots");
    }

    ModonSpec sp;
    sp.m = m;
    sp.beta = beta;
    sp.r0 = r0;
    sp.rho = rho;
    sp.inner.Bdiag = b;
    sp.inner.lambdas = sd.lambdas;
    sp.inner.vectors = Mat(m, m);
    for (int j = 0; j < m; ++j) {
        Vec e = sd.eigvec(j);
        for (int i = 0; i < m; ++i) sp.inner.vectors(i, j) = e[i];
    }
    sp.inner.alphas = Vec(m);
    sp.inner.ubg = solve(F.shifted(b).dense(), Vec(m, 1.0));
    for (int i = 0; i < m; ++i) sp.inner.ubg[i] *= beta;

    sp.outer.Bdiag = b;
    for (int i = 0; i < m; ++i) sp.outer.Bdiag[i] += rho;
    sp.outer.lambdas = sd.lambdas;
    for (int i = 0; i < m; ++i) sp.outer.lambdas[i] -= rho;
    sp.outer.vectors = sp.inner.vectors;
    sp.outer.alphas = Vec(m);
    sp.outer.ubg = solve(F.shifted(sp.outer.Bdiag).dense(), Vec(m, 1.0));
    for (int i = 0; i < m; ++i) sp.outer.ubg[i] *= beta;

    Vec ones(m, 1.0);
    for (int j = 0; j < m; ++j) {
        double nu = sd.lambdas[j];
        double cin = weighted_inner(ones, sd.eigvec(j), sd.weights);
        sp.inner.alphas[j] = r0 * beta * cin / (nu * bessel_j(1, std::sqrt(nu) * r0));
        sp.outer.alphas[j] =
            -r0 * beta * cin / ((rho - nu) * bessel_k(1, std::sqrt(rho - nu) * r0));
    }
    return sp;
}

Vec matching_residual(const CouplingMatrix& F, const ModonSpec& sp) {
    if (F.m != sp.m) throw ConfigError("matching_residual: layer count mismatch");
    Vec ones(sp.m, 1.0);
    CouplingMatrix Fin = F.shifted(sp.inner.Bdiag), Fout = F.shifted(sp.outer.Bdiag);
    Vec ut = solve(Fin.dense(), ones), uh = solve(Fout.dense(), ones);
    for (int i = 0; i < sp.m; ++i) {
        ut[i] *= sp.beta;
        uh[i] *= sp.beta;
    }
    return residual_core(sp, ut, uh, weights_of(F));
}

const SolutionField& PiecewiseSolution::piece_at(double x, double y) const {
    double dx = x - cx, dy = y - cy;
    return dx * dx + dy * dy <= r0 * r0 ? pieces[0] : pieces[1];
}

Vec PiecewiseSolution::eval(double t, double x, double y) const {
    return piece_at(x, y).eval(t, x, y);
}

std::vector<Jet3> PiecewiseSolution::jet(double t, double x, double y) const {
    return piece_at(x, y).jet(t, x, y);
}

PiecewiseSolution assemble_modon(const ModonSpec& sp) {
    int m = sp.m;
    if (m < 1 || sp.r0 <= 0) throw ConfigError("assemble_modon: empty spec");
    for (int i = 0; i < m; ++i) {
        if (sp.inner.lambdas[i] <= 0)
            throw ConfigError("assemble_modon: inner eigenvalues must be positive");
        if (sp.outer.lambdas[i] >= 0)
            throw ConfigError("assemble_modon: outer eigenvalues must be negative");
    }
    // self-contained residual with the stored backgrounds; the layer weights
    // are recovered from the unit norms of the inner eigenbasis,
    // sum_i w_i V(i,j)^2 = 1 for each column j
    Vec w(m, 1.0);
    if (m > 1) {
        const Mat& V = sp.inner.vectors;
        Mat A(m, m);
        Vec rhs(m, 1.0);
        for (int j = 0; j < m; ++j)
            for (int i = 0; i < m; ++i) A(j, i) = V(i, j) * V(i, j);
        w = solve(A, rhs);
    }
    Vec R = residual_core(sp, sp.inner.ubg, sp.outer.ubg, w);
    double rtol = 1e-8 * std::abs(sp.beta) * sp.r0;
    for (int j = 0; j < m; ++j)
        if (std::abs(R[j]) > rtol)
            throw ConfigError("assemble_modon: matching residual exceeds tolerance");

    auto hin = std::make_shared<HalfPayload>();
    hin->m = m;
    hin->kind = BesselKind::J;
    hin->s = Vec(m);
    for (int i = 0; i < m; ++i) hin->s[i] = std::sqrt(sp.inner.lambdas[i]);
    hin->alphas = sp.inner.alphas;
    hin->vectors = sp.inner.vectors;
    hin->ubg = sp.inner.ubg;

    auto hout = std::make_shared<HalfPayload>();
    hout->m = m;
    hout->kind = BesselKind::K;
    hout->s = Vec(m);
    for (int i = 0; i < m; ++i) hout->s[i] = std::sqrt(-sp.outer.lambdas[i]);
    hout->alphas = sp.outer.alphas;
    hout->vectors = sp.outer.vectors;
    hout->ubg = sp.outer.ubg;

    Domain din;
    din.kind = Domain::Kind::Disk;
    din.r0 = sp.r0;
    Domain dout;
    dout.kind = Domain::Kind::ExteriorDisk;
    dout.r0 = sp.r0;

    PiecewiseSolution ps;
    ps.m = m;
    ps.r0 = sp.r0;
    ps.pieces = {half_field(hin, din, sp.inner.Bdiag), half_field(hout, dout, sp.outer.Bdiag)};

    // interface checks: vanishing stream function and continuous slope
    double peak = 0;
    for (int a = 0; a < 16; ++a)
        for (double fr : {0.3, 0.55, 0.8}) {
            double th = 2 * 3.14159265358979323846 * a / 16;
            Vec v = ps.pieces[0].eval(0.0, fr * sp.r0 * std::cos(th), fr * sp.r0 * std::sin(th));
            for (int i = 0; i < m; ++i) peak = std::max(peak, std::abs(v[i]));
        }
    std::vector<double> slipIn, slipOut;
    double maxSlope = 0;
    for (int a = 0; a < 64; ++a) {
        double th = 2 * 3.14159265358979323846 * a / 64;
        double x = sp.r0 * std::cos(th), y = sp.r0 * std::sin(th);
        Vec vin = ps.pieces[0].eval(0.0, x, y), vout = ps.pieces[1].eval(0.0, x, y);
        for (int i = 0; i < m; ++i) {
            if (std::abs(vin[i]) > 1e-8 * peak || std::abs(vout[i]) > 1e-8 * peak)
                throw ConfigError("assemble_modon: stream function does not vanish on interface");
        }
        auto jin = ps.pieces[0].jet(0.0, x, y), jout = ps.pieces[1].jet(0.0, x, y);
        for (int i = 0; i < m; ++i) {
            double ri = std::cos(th) * jin[i].deriv(0, 1, 0) + std::sin(th) * jin[i].deriv(0, 0, 1);
            double ro =
                std::cos(th) * jout[i].deriv(0, 1, 0) + std::sin(th) * jout[i].deriv(0, 0, 1);
            slipIn.push_back(ri);
            slipOut.push_back(ro);
            maxSlope = std::max({maxSlope, std::abs(ri), std::abs(ro)});
        }
    }
    for (size_t k = 0; k < slipIn.size(); ++k)
        if (std::abs(slipIn[k] - slipOut[k]) > 1e-7 * maxSlope)
            throw ConfigError("assemble_modon: radial slope jumps at interface");
    return ps;
}

}
