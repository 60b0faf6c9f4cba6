#pragma once
#include <cmath>
#include <complex>
#include <vector>

#include "qglab/errors.hpp"

namespace qglab {

using Vec  = std::vector<double>;
using CVec = std::vector<std::complex<double>>;

template <class T>
struct MatT {
    int rows = 0, cols = 0;
    std::vector<T> a;  // row-major

    MatT() = default;
    MatT(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, T{}) {}

    T& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
    const T& operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }

    static MatT identity(int n) {
        MatT I(n, n);
        for (int i = 0; i < n; ++i) I(i, i) = T(1);
        return I;
    }
};

using Mat  = MatT<double>;
using CMat = MatT<std::complex<double>>;

template <class T>
MatT<T> operator*(const MatT<T>& A, const MatT<T>& B) {
    if (A.cols != B.rows) throw ConfigError("matrix product: inner dimensions differ");
    MatT<T> C(A.rows, B.cols);
    for (int i = 0; i < A.rows; ++i)
        for (int k = 0; k < A.cols; ++k) {
            T aik = A(i, k);
            if (aik == T{}) continue;
            for (int j = 0; j < B.cols; ++j) C(i, j) += aik * B(k, j);
        }
    return C;
}

template <class T>
MatT<T> operator+(const MatT<T>& A, const MatT<T>& B) {
    if (A.rows != B.rows || A.cols != B.cols) throw ConfigError("matrix sum: shapes differ");
    MatT<T> C = A;
    for (size_t i = 0; i < C.a.size(); ++i) C.a[i] += B.a[i];
    return C;
}

template <class T>
MatT<T> operator-(const MatT<T>& A, const MatT<T>& B) {
    if (A.rows != B.rows || A.cols != B.cols) throw ConfigError("matrix diff: shapes differ");
    MatT<T> C = A;
    for (size_t i = 0; i < C.a.size(); ++i) C.a[i] -= B.a[i];
    return C;
}

template <class T>
MatT<T> operator*(T s, const MatT<T>& A) {
    MatT<T> C = A;
    for (auto& x : C.a) x *= s;
    return C;
}

inline Mat operator*(double s, const Mat& A) {
    Mat C = A;
    for (auto& x : C.a) x *= s;
    return C;
}

template <class T>
std::vector<T> matvec(const MatT<T>& A, const std::vector<T>& x) {
    if (A.cols != static_cast<int>(x.size())) throw ConfigError("matvec: dimension mismatch");
    std::vector<T> y(A.rows, T{});
    for (int i = 0; i < A.rows; ++i) {
        T s{};
        for (int j = 0; j < A.cols; ++j) s += A(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

template <class T>
MatT<T> transpose(const MatT<T>& A) {
    MatT<T> B(A.cols, A.rows);
    for (int i = 0; i < A.rows; ++i)
        for (int j = 0; j < A.cols; ++j) B(j, i) = A(i, j);
    return B;
}

template <class T>
double norm1(const MatT<T>& A) {
    double best = 0;
    for (int j = 0; j < A.cols; ++j) {
        double s = 0;
        for (int i = 0; i < A.rows; ++i) s += std::abs(A(i, j));
        best = std::max(best, s);
    }
    return best;
}

template <class T>
double norm_inf(const std::vector<T>& v) {
    double best = 0;
    for (const auto& x : v) best = std::max(best, std::abs(x));
    return best;
}

// LU with partial pivoting. Factorization is stored in place; piv records row swaps.
template <class T>
struct LUFact {
    MatT<T> lu;
    std::vector<int> piv;
    int sign = 1;
    bool singular = false;
};

template <class T>
LUFact<T> lu_factor(MatT<T> A) {
    if (A.rows != A.cols) throw ConfigError("lu_factor: square matrix required");
    int n = A.rows;
    LUFact<T> f;
    f.piv.resize(n);
    for (int i = 0; i < n; ++i) f.piv[i] = i;
    for (int k = 0; k < n; ++k) {
        int p = k;
        double best = std::abs(A(k, k));
        for (int i = k + 1; i < n; ++i)
            if (std::abs(A(i, k)) > best) { best = std::abs(A(i, k)); p = i; }
        if (best == 0.0) { f.singular = true; f.lu = std::move(A); return f; }
        if (p != k) {
            for (int j = 0; j < n; ++j) std::swap(A(k, j), A(p, j));
            std::swap(f.piv[k], f.piv[p]);
            f.sign = -f.sign;
        }
        for (int i = k + 1; i < n; ++i) {
            A(i, k) = A(i, k) / A(k, k);
            T lik = A(i, k);
            for (int j = k + 1; j < n; ++j) A(i, j) -= lik * A(k, j);
        }
    }
    f.lu = std::move(A);
    return f;
}

template <class T>
std::vector<T> lu_solve(const LUFact<T>& f, const std::vector<T>& b) {
    if (f.singular) throw NumericError("lu_solve: singular matrix");
    int n = f.lu.rows;
    std::vector<T> x(n);
    for (int i = 0; i < n; ++i) x[i] = b[f.piv[i]];
    for (int i = 1; i < n; ++i)
        for (int j = 0; j < i; ++j) x[i] -= f.lu(i, j) * x[j];
    for (int i = n - 1; i >= 0; --i) {
        for (int j = i + 1; j < n; ++j) x[i] -= f.lu(i, j) * x[j];
        x[i] = x[i] / f.lu(i, i);
    }
    return x;
}

template <class T>
std::vector<T> solve(const MatT<T>& A, const std::vector<T>& b) {
    return lu_solve(lu_factor(A), b);
}

template <class T>
MatT<T> inverse(const MatT<T>& A) {
    auto f = lu_factor(A);
    if (f.singular) throw NumericError("inverse: singular matrix");
    int n = A.rows;
    MatT<T> X(n, n);
    std::vector<T> e(n, T{}), c;
    for (int j = 0; j < n; ++j) {
        e.assign(n, T{});
        e[j] = T(1);
        c = lu_solve(f, e);
        for (int i = 0; i < n; ++i) X(i, j) = c[i];
    }
    return X;
}

template <class T>
T determinant(const MatT<T>& A) {
    auto f = lu_factor(A);
    if (f.singular) return T{};
    T d = T(f.sign);
    for (int i = 0; i < A.rows; ++i) d *= f.lu(i, i);
    return d;
}

// Eigendecomposition of a symmetric tridiagonal matrix by the QL algorithm with
// implicit shifts. d holds the diagonal (overwritten with ascending eigenvalues),
// e the subdiagonal (destroyed). Z accumulates the orthogonal transform: pass the
// identity to get eigenvectors as columns of Z.
void tridiag_eigen(std::vector<double>& d, std::vector<double>& e, Mat& Z);

// Matrix exponential by Pade approximation with scaling and squaring.
// Relative accuracy ~1e-13 for norm1(M) <= 50.
Mat  matrix_exp(const Mat& M);
CMat matrix_exp(const CMat& M);

}
