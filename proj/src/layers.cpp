#include "qglab/layers.hpp"

#include <algorithm>
#include <cmath>

namespace qglab {

void LayerStack::validate() const {
    if (m < 2) throw ConfigError("layer stack: m >= 2 required");
    if (static_cast<int>(H.size()) != m) throw ConfigError("layer stack: H must have m entries");
    if (static_cast<int>(gprime.size()) != m - 1)
        throw ConfigError("layer stack: gprime must have m-1 entries");
    for (double h : H)
        if (!(h > 0)) throw ConfigError("layer stack: thicknesses must be positive");
    for (double g : gprime)
        if (!(g > 0)) throw ConfigError("layer stack: reduced gravities must be positive");
    if (!(f0 > 0)) throw ConfigError("layer stack: f0 must be positive");
    if (!(beta > 0)) throw ConfigError("layer stack: beta must be positive");
}

Mat CouplingMatrix::dense() const {
    Mat F(m, m);
    for (int i = 0; i < m; ++i) F(i, i) = diag[i];
    for (int i = 0; i < m - 1; ++i) {
        F(i, i + 1) = sup[i];
        F(i + 1, i) = sub[i];
    }
    return F;
}

bool CouplingMatrix::physical() const {
    double scale = 0;
    for (double v : diag) scale = std::max(scale, std::abs(v));
    for (int i = 0; i < m; ++i) {
        double rs = diag[i] + (i > 0 ? sub[i - 1] : 0.0) + (i < m - 1 ? sup[i] : 0.0);
        if (std::abs(rs) > 1e-12 * scale) return false;
    }
    return true;
}

CouplingMatrix CouplingMatrix::shifted(const Vec& B) const {
    if (static_cast<int>(B.size()) != m) throw ConfigError("shift: B must have m entries");
    CouplingMatrix T = *this;
    for (int i = 0; i < m; ++i) T.diag[i] -= B[i];
    return T;
}

CouplingMatrix build_coupling(const LayerStack& stack) {
    stack.validate();
    int m = stack.m;
    CouplingMatrix F;
    F.m = m;
    F.sub.resize(m - 1);
    F.sup.resize(m - 1);
    F.diag.assign(m, 0.0);
    double f2 = stack.f0 * stack.f0;
    for (int i = 0; i < m - 1; ++i) {
        F.sup[i] = f2 / (stack.H[i] * stack.gprime[i]);
        F.sub[i] = f2 / (stack.H[i + 1] * stack.gprime[i]);
    }
    for (int i = 0; i < m; ++i)
        F.diag[i] = -((i > 0 ? F.sub[i - 1] : 0.0) + (i < m - 1 ? F.sup[i] : 0.0));
    return F;
}

void symmetrize(const CouplingMatrix& F, Vec& d, Vec& sdiag, Vec& soff) {
    int m = F.m;
    for (int i = 0; i < m - 1; ++i)
        if (F.sub[i] * F.sup[i] <= 0)
            throw ConfigError("symmetrize: off-diagonal products must be positive");
    d.assign(m, 1.0);
    for (int i = 1; i < m; ++i) d[i] = d[i - 1] * std::sqrt(F.sub[i - 1] / F.sup[i - 1]);
    sdiag = F.diag;
    soff.resize(m - 1);
    for (int i = 0; i < m - 1; ++i) soff[i] = std::sqrt(F.sub[i] * F.sup[i]);
}

SpectralData spectral(const CouplingMatrix& F) {
    int m = F.m;
    SpectralData sp;
    sp.m = m;
    symmetrize(F, sp.d, sp.lambdas, sp.weights);  // weights slot reused for soff scratch
    Vec soff = sp.weights;
    Mat Z = Mat::identity(m);
    tridiag_eigen(sp.lambdas, soff, Z);

    sp.weights.resize(m);
    for (int i = 0; i < m; ++i) sp.weights[i] = 1.0 / (sp.d[i] * sp.d[i]);

    double lamScale = 0;
    for (double l : sp.lambdas) lamScale = std::max(lamScale, std::abs(l));
    for (int i = 0; i + 1 < m; ++i)
        if (sp.lambdas[i + 1] - sp.lambdas[i] < 1e-13 * lamScale)
            throw NumericError("spectral: eigenvalues not pairwise distinct");

    // de-symmetrize and enforce the normalization conventions
    sp.vectors = Mat(m, m);
    for (int j = 0; j < m; ++j) {
        Vec e(m);
        for (int i = 0; i < m; ++i) e[i] = sp.d[i] * Z(i, j);
        double nrm = 0, mx = 0;
        for (int i = 0; i < m; ++i) {
            nrm += sp.weights[i] * e[i] * e[i];
            mx = std::max(mx, std::abs(e[i]));
        }
        nrm = std::sqrt(nrm);
        double lead = std::abs(e[0]) > 1e-12 * mx ? e[0] : e[m - 1];
        double s = (lead < 0 ? -1.0 : 1.0) / nrm;
        for (int i = 0; i < m; ++i) sp.vectors(i, j) = s * e[i];
    }

    if (F.physical()) {
        // structural kernel: snap the eigenvalue nearest zero, store exact ones vector
        int k = 0;
        for (int i = 1; i < m; ++i)
            if (std::abs(sp.lambdas[i]) < std::abs(sp.lambdas[k])) k = i;
        if (std::abs(sp.lambdas[k]) <= 1e-8 * lamScale) {
            sp.lambdas[k] = 0.0;
            for (int i = 0; i < m; ++i) sp.vectors(i, k) = 1.0;
            sp.zero_index = k;
        }
    }

    sp.pinv = pseudo_inverse(sp);
    return sp;
}

Vec SpectralData::eigvec(int i) const {
    Vec e(m);
    for (int r = 0; r < m; ++r) e[r] = vectors(r, i);
    return e;
}

void uniform_spectrum(int m, double f12, Vec& lambdas, Mat& vectors) {
    if (m < 2) throw ConfigError("uniform_spectrum: m >= 2");
    if (!(f12 > 0)) throw ConfigError("uniform_spectrum: f12 > 0");
    lambdas.resize(m);
    vectors = Mat(m, m);
    const double pi = 3.14159265358979323846;
    for (int i = 1; i <= m; ++i) {
        double s = std::sin(0.5 * (m - i) * pi / m);
        lambdas[i - 1] = -4.0 * f12 * s * s;
        for (int j = 1; j <= m; ++j)
            vectors(j - 1, i - 1) = std::cos((double(m - i) / m) * (j - 0.5) * pi);
    }
}

Mat pseudo_inverse(const SpectralData& spec) {
    int m = spec.m;
    Mat P(m, m);
    for (int k = 0; k < m; ++k) {
        if (spec.lambdas[k] == 0.0) continue;
        Vec e = spec.eigvec(k);
        double n2 = weighted_inner(e, e, spec.weights);
        double c = 1.0 / (spec.lambdas[k] * n2);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) P(i, j) += c * e[i] * e[j] * spec.weights[j];
    }
    return P;
}

double weighted_inner(const Vec& u, const Vec& v, const Vec& weights) {
    if (u.size() != v.size() || u.size() != weights.size())
        throw ConfigError("weighted_inner: dimension mismatch");
    double s = 0;
    for (size_t i = 0; i < u.size(); ++i) s += weights[i] * u[i] * v[i];
    return s;
}

double weighted_norm(const Vec& u, const Vec& weights) {
    return std::sqrt(weighted_inner(u, u, weights));
}

namespace {

Vec poly_add(const Vec& a, const Vec& b) {
    Vec c(std::max(a.size(), b.size()), 0.0);
    for (size_t i = 0; i < a.size(); ++i) c[i] += a[i];
    for (size_t i = 0; i < b.size(); ++i) c[i] += b[i];
    return c;
}

Vec poly_scale(Vec a, double s) {
    for (double& x : a) x *= s;
    return a;
}

// multiply by (lambda + c)
Vec poly_mul_linear(const Vec& a, double c) {
    Vec r(a.size() + 1, 0.0);
    for (size_t i = 0; i < a.size(); ++i) {
        r[i] += c * a[i];
        r[i + 1] += a[i];
    }
    return r;
}

// multiply by lambda
Vec poly_shift(const Vec& a) {
    Vec r(a.size() + 1, 0.0);
    for (size_t i = 0; i < a.size(); ++i) r[i + 1] = a[i];
    return r;
}

}  // namespace

Vec char_poly(const CouplingMatrix& T) {
    int m = T.m;
    if (T.physical()) {
        // two-sequence recurrence; every product of couplings enters with one
        // sign, so the zero constant term is exact and no cancellation occurs
        Vec P = {0.0, 1.0};   // P_1 = lambda
        Vec Hm = {1.0};       // Phat_0
        Vec Hc = {T.sup[0], 1.0};  // Phat_1
        if (m == 1) return P;
        for (int k = 2; k <= m; ++k) {
            double fkm = T.sub[k - 2];  // f_{k,k-1}
            double fmk = T.sup[k - 2];  // f_{k-1,k}
            Vec Pk = poly_add(poly_mul_linear(P, fkm), poly_scale(poly_shift(Hm), fmk));
            if (k < m) {
                Vec Hk = poly_add(Pk, poly_scale(Hc, T.sup[k - 1]));
                Hm = Hc;
                Hc = Hk;
            }
            P = Pk;
        }
        return P;
    }
    // leading principal minors of (lambda*E - T)
    Vec Dm = {1.0};
    Vec Dc = {-T.diag[0], 1.0};
    for (int k = 1; k < m; ++k) {
        Vec t1 = poly_mul_linear(Dc, -T.diag[k]);
        Vec t2 = poly_scale(Dm, -T.sub[k - 1] * T.sup[k - 1]);
        Vec Dk = poly_add(t1, t2);
        Dm = Dc;
        Dc = Dk;
    }
    return Dc;
}

double gershgorin_bound(const CouplingMatrix& F) {
    int m = F.m;
    double rowMax = 0, mixedMax = 0;
    for (int i = 0; i < m; ++i) {
        double own = (i > 0 ? F.sub[i - 1] : 0.0) + (i < m - 1 ? F.sup[i] : 0.0);
        double incoming = (i > 0 ? F.sup[i - 1] : 0.0) + (i < m - 1 ? F.sub[i] : 0.0);
        rowMax = std::max(rowMax, own);
        mixedMax = std::max(mixedMax, own + incoming);
    }
    return std::min(2.0 * rowMax, mixedMax);
}

}
