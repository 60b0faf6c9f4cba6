#pragma once
#include <complex>
#include <vector>

#include "qglab/field.hpp"
#include "qglab/layers.hpp"

namespace qglab {

// Helmholtz atoms. `mode` is a 1-based index into the ascending spectrum of
// the shifted coupling matrix; the admissible atom class depends on the sign
// of that mode's eigenvalue.
struct PlaneAtom {
    int mode = 0;
    std::complex<double> amplitude{0.0, 0.0};
    double angle = 0;
};

struct RadialAtom {
    int mode = 0;
    int order = 0;  // angular wavenumber n >= 0
    std::complex<double> amplitude{0.0, 0.0};
    double cx = 0, cy = 0;
};

struct ExpAtom {  // growing/decaying mode, eigenvalue < 0
    int mode = 0;
    double amplitude = 0;
    double angle = 0;
};

struct HarmonicAtom {  // Re(A (x+iy)^k) on the kernel mode of a singular shift
    int degree = 0;
    std::complex<double> amplitude{0.0, 0.0};
};

struct HerglotzSpec {
    Vec B;  // diagonal affine shift, length m; empty means zero
    std::vector<PlaneAtom> planeAtoms;
    std::vector<RadialAtom> radialAtoms;
    double sigma1 = 0, sigma2 = 0;  // linear terms on the kernel mode
    bool includeBackground = true;
};

// Stationary wave packets: plane atoms contribute Re(A e^{i sqrt(nu)(x cos + y sin)}) e,
// radial atoms 2 pi Re(i^n A J_n(sqrt(nu) r) e^{i n theta}) e about their centers,
// plus (sigma1 x + sigma2 y) on the kernel mode and the background shear
// -beta y (F - B)^+ 1.
SolutionField herglotz_solution(const CouplingMatrix& F, double beta, const HerglotzSpec& spec);

struct AffineSpec {
    Vec B;
    std::vector<PlaneAtom> planeAtoms;
    std::vector<RadialAtom> radialAtoms;
    std::vector<ExpAtom> expAtoms;
    std::vector<HarmonicAtom> harmonicAtoms;
    double gamma = 0;  // y^2 coefficient on the kernel mode
    bool includeBackground = true;
};

// General stationary affine family. Extends the Herglotz construction with
// exponential atoms on negative modes and harmonic polynomials plus the cubic
// background on the kernel mode of a singular shift.
SolutionField affine_stationary(const CouplingMatrix& F, double beta, const AffineSpec& spec);

// Pointwise sum. Requires identical coupling fingerprints and diagonal shift;
// the affine background is counted once. Boosted fields are rejected (boost
// the superposition instead).
SolutionField superpose(const std::vector<SolutionField>& fields);

struct BoostSpec {
    Vec h;  // shift polynomial in t, ascending, degree <= 6
    static BoostSpec constant_speed(double gamma) { return {{0.0, gamma}}; }
};

// Galilean boost in x: psi~(t,x,y) = psi(t, x - h(t), y) - h'(t) y 1.
SolutionField boost(const SolutionField& field, const BoostSpec& b);

// Barotropic travelling wave A cos(k z2 + z1/k + phase) with z1 = beta t/(1+chi^2),
// z2 = x - chi y. Exact for any layer count.
SolutionField kg_barotropic_mode(int m, double beta, double chi, double k, double amplitude,
                                 double phase);

struct CubicRoots {
    Vec roots;  // real roots, ascending, multiplicity kept
    double discriminant = 0;
    bool degenerate = false;  // leading coefficient chain collapsed
};

// Real roots of a3 r^3 + a2 r^2 + a1 r + a0 with a0 = delta*lambda,
// a1 = beta - alpha*lambda, a2 = -delta(1+chi^2), a3 = alpha(1+chi^2).
CubicRoots bbm_dispersion_roots(double chi, double lambda, double alpha, double delta,
                                double beta);

struct BBMWaveSpec {
    double chi = 0;
    int mode = 1;  // 1-based eigenvalue index
    double alpha = 0;
    double delta = 0;
    double root = 0;
    double amplitude = 0;
    double phase = 0;
};

// Simple-wave solution C cos(delta t + r((x - chi y) - alpha t) + phase) e_mode.
// The root must satisfy the dispersion cubic within 1e-10 max|a_k| |r|^3.
SolutionField bbm_wave(const CouplingMatrix& F, double beta, const BBMWaveSpec& spec);

struct CoupledShiftSpec {
    Vec c;  // shear direction, must not be a multiple of all-ones
    std::complex<double> mu{0.0, 0.0};
    double chi = 0;
    CVec A;
};

// psi = Re(e^{mu(x - chi y)} Ft^{-1} exp(mu t G) A) + y c with
// Ft = F + mu^2 (1+chi^2) E, G = diag(c) - (diag(Fc) + beta E) Ft^{-1}.
SolutionField coupled_shift_solution(const CouplingMatrix& F, double beta,
                                     const CoupledShiftSpec& spec);

// Time-linear shear family: psi = (x - chi(t) y) c + (y - chi'(t)/beta) b
//   - t F^+ (diag(c) F b - diag(b) F c + beta c)
//   + (chi''(t)/beta (x - chi(t) y) - chi'(t) y^2/2 + g(t)) 1.
// b and c must be W-orthogonal to all-ones; chi, g polynomials of degree <= 4.
SolutionField s26_solution(const CouplingMatrix& F, double beta, const Vec& b, const Vec& c,
                           const Vec& chi, const Vec& g);

}
