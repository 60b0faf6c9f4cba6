#include "qglab/linalg.hpp"

#include <algorithm>

namespace qglab {

namespace {

double hypot2(double a, double b) { return std::hypot(a, b); }

}  // namespace

void tridiag_eigen(std::vector<double>& d, std::vector<double>& e, Mat& Z) {
    int n = static_cast<int>(d.size());
    if (n == 0) return;
    if (static_cast<int>(e.size()) != n - 1 && static_cast<int>(e.size()) != n)
        throw ConfigError("tridiag_eigen: off-diagonal length must be n-1");
    e.resize(n, 0.0);  // e[i] couples d[i] and d[i+1]; e[n-1] is workspace

    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m;
        do {
            for (m = l; m < n - 1; ++m) {
                double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= 2.3e-16 * dd) break;
            }
            if (m != l) {
                if (iter++ == 50) throw NumericError("tridiag_eigen: too many QL iterations");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = hypot2(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                bool underflow = false;
                for (int i = m - 1; i >= l; --i) {
                    double f = s * e[i];
                    double b = c * e[i];
                    r = hypot2(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {  // rotation annihilated; restart this l
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        underflow = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    for (int k = 0; k < n; ++k) {
                        f = Z(k, i + 1);
                        Z(k, i + 1) = s * Z(k, i) + c * f;
                        Z(k, i) = c * Z(k, i) - s * f;
                    }
                }
                if (underflow) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }

    // sort ascending, carrying eigenvector columns
    for (int i = 0; i < n - 1; ++i) {
        int k = i;
        for (int j = i + 1; j < n; ++j)
            if (d[j] < d[k]) k = j;
        if (k != i) {
            std::swap(d[i], d[k]);
            for (int r = 0; r < n; ++r) std::swap(Z(r, i), Z(r, k));
        }
    }
}

namespace {

// Pade(13) scaling and squaring, Higham's coefficients.
template <class T>
MatT<T> expm_impl(const MatT<T>& M) {
    if (M.rows != M.cols) throw ConfigError("matrix_exp: square matrix required");
    int n = M.rows;
    static const double b[] = {
        64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
        1187353796428800.0,  129060195264000.0,   10559470521600.0,
        670442572800.0,      33522128640.0,       1323241920.0,
        40840800.0,          960960.0,            16380.0,
        182.0,               1.0};
    const double theta13 = 5.371920351148152;

    double nrm = norm1(M);
    int s = 0;
    if (nrm > theta13) s = static_cast<int>(std::ceil(std::log2(nrm / theta13)));
    MatT<T> A = M;
    if (s > 0) {
        double scale = std::ldexp(1.0, -s);
        for (auto& x : A.a) x *= scale;
    }

    MatT<T> I = MatT<T>::identity(n);
    MatT<T> A2 = A * A;
    MatT<T> A4 = A2 * A2;
    MatT<T> A6 = A2 * A4;

    auto axpyId = [&](MatT<T> X, double c2, const MatT<T>& Y2, double c1, const MatT<T>& Y1,
                      double c0) {
        for (size_t i = 0; i < X.a.size(); ++i) X.a[i] += c2 * Y2.a[i] + c1 * Y1.a[i];
        for (int i = 0; i < n; ++i) X(i, i) += c0;
        return X;
    };

    // U = A*(A6*(b13 A6 + b11 A4 + b9 A2) + b7 A6 + b5 A4 + b3 A2 + b1 I)
    MatT<T> W1(n, n);
    for (size_t i = 0; i < W1.a.size(); ++i)
        W1.a[i] = b[13] * A6.a[i] + b[11] * A4.a[i] + b[9] * A2.a[i];
    MatT<T> U = A6 * W1;
    U = axpyId(std::move(U), b[7], A6, b[5], A4, 0.0);
    for (size_t i = 0; i < U.a.size(); ++i) U.a[i] += b[3] * A2.a[i];
    for (int i = 0; i < n; ++i) U(i, i) += b[1];
    U = A * U;

    // V = A6*(b12 A6 + b10 A4 + b8 A2) + b6 A6 + b4 A4 + b2 A2 + b0 I
    MatT<T> W2(n, n);
    for (size_t i = 0; i < W2.a.size(); ++i)
        W2.a[i] = b[12] * A6.a[i] + b[10] * A4.a[i] + b[8] * A2.a[i];
    MatT<T> V = A6 * W2;
    V = axpyId(std::move(V), b[6], A6, b[4], A4, 0.0);
    for (size_t i = 0; i < V.a.size(); ++i) V.a[i] += b[2] * A2.a[i];
    for (int i = 0; i < n; ++i) V(i, i) += b[0];

    // solve (V - U) X = (V + U)
    MatT<T> P = V + U;
    MatT<T> Q = V - U;
    auto f = lu_factor(Q);
    if (f.singular) throw NumericError("matrix_exp: Pade denominator singular");
    MatT<T> R(n, n);
    std::vector<T> col(n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) col[i] = P(i, j);
        auto x = lu_solve(f, col);
        for (int i = 0; i < n; ++i) R(i, j) = x[i];
    }
    for (int k = 0; k < s; ++k) R = R * R;
    return R;
}

}  // namespace

Mat matrix_exp(const Mat& M) { return expm_impl(M); }
CMat matrix_exp(const CMat& M) { return expm_impl(M); }

}
