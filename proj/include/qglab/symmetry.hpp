#pragma once
#include <array>
#include <functional>
#include <vector>

#include "qglab/field.hpp"
#include "qglab/layers.hpp"

namespace qglab {

// Point transformation preserving any one system:
//   t -> eps1 t + T0,  x -> eps1 x + h(t),  y -> eps2 y + Y0,
//   psi_i -> eps2 psi_i - eps1 eps2 h'(t) y + g(t) + Psi_i.
// h and g are polynomials in t (ascending coefficients, degree <= 6).
struct PointSymmetry {
    int eps1 = 1, eps2 = 1;
    double T0 = 0, Y0 = 0;
    Vec h, g;
    Vec Psi;  // per-layer constants; empty means all zero
};

// compose(b, a): apply a first, then b. Closed form on parameters.
PointSymmetry compose(const PointSymmetry& b, const PointSymmetry& a);

SolutionField apply_point_symmetry(const SolutionField& f, const PointSymmetry& s);

// Transformation between systems with different couplings:
//   t -> T1 t + T0,  x -> X1 x + h(t),  y -> eps X1 y + Y0,
//   psi_i -> eps X1^2/T1 psi_i - eps X1/T1 h'(t) y + g(t) + Psi_i,
// and the parameters map as f -> f / X1^2, beta -> beta / (T1 X1).
struct EquivalenceTransform {
    double T1 = 1, X1 = 1;
    int eps = 1;
    double T0 = 0, Y0 = 0;
    Vec h, g;
    Vec Psi;
};

PointSymmetry as_point_symmetry(const EquivalenceTransform& e);  // only when T1 = X1 = 1

EquivalenceTransform compose(const EquivalenceTransform& b, const EquivalenceTransform& a);

struct EquivalenceResult {
    CouplingMatrix F;
    double beta = 0;
    SolutionField field;
};

EquivalenceResult apply_equivalence(const CouplingMatrix& F, double beta, const SolutionField& f,
                                    const EquivalenceTransform& e);

// Generators of the invariance algebra. Pt, Py translate t and y; Px carries a
// polynomial chi(t); Ji shifts one layer; Z carries kappa(t) on all layers.
struct SymmetryGenerator {
    enum class Kind { Pt, Py, Px, Ji, Z };
    Kind kind = Kind::Pt;
    Vec poly;       // chi for Px, kappa for Z
    int layer = 0;  // for Ji
};

// Evolutionary-form characteristic eta - tau psi_t - xi^x psi_x - xi^y psi_y
// evaluated on the field (needs order-1 jets).
Vec characteristic(const SymmetryGenerator& gen, const SolutionField& f, double t, double x,
                   double y);

// Numerical witness that a direction is a symmetry of an exact field: the
// finite-difference residual of psi + eps*direction scales as O(eps^2) along
// symmetry characteristics and O(eps) otherwise.
struct InfinitesimalReport {
    double base = 0;  // residual of the unperturbed field (the FD floor)
    Vec residuals;    // one entry per epsilon
    double slope = 0; // least-squares slope of log residual vs log epsilon
};

InfinitesimalReport infinitesimal_check(const SolutionField& f, const CouplingMatrix& F,
                                        double beta,
                                        const std::function<Vec(double, double, double)>& dir,
                                        const Vec& eps,
                                        const std::vector<std::array<double, 3>>& points,
                                        double hx, double ht);

InfinitesimalReport infinitesimal_check(const SolutionField& f, const CouplingMatrix& F,
                                        double beta, const SymmetryGenerator& gen, const Vec& eps,
                                        const std::vector<std::array<double, 3>>& points,
                                        double hx, double ht);

}
