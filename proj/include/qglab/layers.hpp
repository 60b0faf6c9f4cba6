#pragma once
#include "qglab/linalg.hpp"

namespace qglab {

struct LayerStack {
    int m = 0;
    Vec H;        // mean layer thicknesses, top to bottom [m]
    Vec gprime;   // reduced gravities at the m-1 interfaces [m s^-2]
    double f0 = 0;    // Coriolis parameter [s^-1]
    double beta = 0;  // its meridional gradient [m^-1 s^-1]
    double rho0 = 1000.0;

    void validate() const;
};

// Tridiagonal vertical coupling operator. sub[i] couples layer i+2 to i+1
// (1-based), sup[i] the reverse; diag carries the negated coupling sums, so
// row sums vanish for a physically built matrix. Diagonal shifts (affine
// solution families) reuse the same storage with modified diag.
struct CouplingMatrix {
    int m = 0;
    Vec sub;   // length m-1, F(i+1,i)
    Vec sup;   // length m-1, F(i,i+1)
    Vec diag;  // length m

    Mat dense() const;
    bool physical() const;  // row sums vanish to rounding
    CouplingMatrix shifted(const Vec& B) const;  // this - diag(B)
};

struct SpectralData {
    int m = 0;
    Vec lambdas;   // ascending
    Mat vectors;   // eigenvectors as columns, W-normalized (kernel of a physical
                   // matrix is stored as the exact all-ones vector instead)
    Vec weights;   // w_i = H_i / H_1
    Vec d;         // d_i = sqrt(H_1 / H_i); W = diag(d)^-2
    Mat pinv;

    Vec eigvec(int i) const;
    int zero_index = -1;  // snapped eigenvalue position, -1 if none
};

CouplingMatrix build_coupling(const LayerStack& stack);

// d conjugates the matrix to symmetric form: diag(d)^-1 F diag(d) has
// off-diagonal sqrt(sub_i*sup_i) and the same diagonal.
void symmetrize(const CouplingMatrix& F, Vec& d, Vec& sdiag, Vec& soff);

// Full eigendecomposition with the fixed conventions: ascending eigenvalues,
// W-unit eigenvectors with positive first (fallback: last) component, the
// structural zero mode of a physical matrix snapped to (0, all-ones).
// Throws NumericError if two eigenvalues are closer than 1e-13 relative.
SpectralData spectral(const CouplingMatrix& F);

// Closed-form spectrum for identical layers: lambda_i = -4 f12 sin^2((m-i)pi/(2m)),
// eigenvector components cos(((m-i)/m)(j-1/2)pi).
void uniform_spectrum(int m, double f12, Vec& lambdas, Mat& vectors);

Mat pseudo_inverse(const SpectralData& spec);

double weighted_inner(const Vec& u, const Vec& v, const Vec& weights);
double weighted_norm(const Vec& u, const Vec& weights);

// Characteristic polynomial det(lambda*E - T), coefficients degree-ascending.
// Physical matrices use the subtraction-free two-sequence recurrence (constant
// term exactly zero, remaining coefficients positive); shifted ones fall back
// to the standard leading-minor recurrence.
Vec char_poly(const CouplingMatrix& T);

// Upper bound on the spectral radius from row/column disc estimates.
double gershgorin_bound(const CouplingMatrix& F);

}
