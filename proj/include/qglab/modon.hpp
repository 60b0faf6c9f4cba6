#pragma once
#include <vector>

#include "qglab/field.hpp"
#include "qglab/layers.hpp"

// Dipolar vortices built by matching Helmholtz solutions on a disk against
// modified-Helmholtz solutions on its exterior.  The interface conditions
// (stream function vanishing on the circle, continuous radial derivative)
// make the merged field a weak solution: the value through second radial
// derivative are continuous, the third jumps by the shift offset times the
// interface slope.

namespace qglab {

struct ModonHalf {
    Vec Bdiag;    // diagonal entries of the shift matrix for this region
    Vec lambdas;  // eigenvalues of the shifted coupling: positive inside, negative outside
    Mat vectors;  // weight-normalized eigenvector columns, ascending eigenvalue order
    Vec alphas;   // radial-harmonic amplitudes per mode
    Vec ubg;      // constant background flow of the region
};

struct ModonSpec {
    int m = 0;
    double beta = 0;
    double r0 = 0;  // interface radius
    ModonHalf inner, outer;
    bool barotropic = false;
    double rhoTilde = 0, rhoHat = 0;  // scalar shifts of the barotropic case
    double rho = 0;                   // outer minus inner shift when the eigenbasis is shared
};

// Exactly one of the three parameters is zero and gets solved for.  branch
// selects the interval between consecutive J1 zeros that sqrt(rhoTilde)*r0
// must land in when r0 or rhoTilde is unknown (1 = first interval).
struct LRParams {
    double r0 = 0;
    double rhoTilde = 0;
    double rhoHat = 0;
    int branch = 1;
};

struct PiecewiseSolution {
    int m = 0;
    double r0 = 0;
    double cx = 0, cy = 0;
    std::vector<SolutionField> pieces;  // [0] disk interior, [1] exterior

    const SolutionField& piece_at(double x, double y) const;
    Vec eval(double t, double x, double y) const;
    std::vector<Jet3> jet(double t, double x, double y) const;
};

ModonSpec lr_barotropic_solve(const CouplingMatrix& F, double beta, const LRParams& given);

// Inner and outer shifts differing by rho*E share one eigenbasis; the match
// reduces to a scalar equation whose m smallest positive roots under rho fix
// the inner spectrum.  assignment permutes which root seeds which diagonal
// entry in the shift-recovery Newton (the recovery is m!-fold degenerate);
// empty means identity.
ModonSpec shared_basis_solve(const CouplingMatrix& F, double beta, double r0, double rho,
                             const std::vector<int>& assignment = {});

// Residual of the vector matching condition, projected on the inner
// eigenbasis (weighted inner product).  Background flows are recomputed from
// F so the diagnostic reflects the coupling actually passed in.
Vec matching_residual(const CouplingMatrix& F, const ModonSpec& spec);

PiecewiseSolution assemble_modon(const ModonSpec& spec);

}
