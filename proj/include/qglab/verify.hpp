#pragma once
#include <functional>
#include <vector>

#include "qglab/field.hpp"
#include "qglab/layers.hpp"
#include "qglab/modon.hpp"

// Numerical certification of solution fields on rectangular grids: potential
// vorticity assembly, pointwise PDE residuals with grid-refinement fits,
// conserved-quantity quadrature, and interface diagnostics for piecewise
// fields.  Stencils are 4th order throughout; residual norms are reported
// relative to the size of the terms entering the balance.

namespace qglab {

// Uniform node grid on [x0, x0+Lx] x [y0, y0+Ly], both endpoints included.
// mask, when set, selects the region to evaluate; nodes outside are skipped
// and the field is never called there.
struct GridSpec {
    double x0 = 0, y0 = 0;
    double Lx = 0, Ly = 0;
    int Nx = 0, Ny = 0;
    double t = 0;
    std::function<bool(double x, double y)> mask;

    void validate() const;  // Nx, Ny >= 16, positive extents
    double dx() const { return Lx / (Nx - 1); }
    double dy() const { return Ly / (Ny - 1); }
    double x(int i) const { return x0 + i * dx(); }
    double y(int j) const { return y0 + j * dy(); }
};

// Node-major sample block: data[(j*Nx + i)*m + k] is layer k at node (i,j).
// flags: 0 full interior stencil, 1 a one-sided stencil contributed,
// 2 skipped (masked or without stencil support); skipped nodes hold zeros.
struct GridField {
    GridSpec spec;
    int m = 0;
    Vec data;
    std::vector<unsigned char> flags;

    double& at(int i, int j, int k) {
        return data[(static_cast<size_t>(j) * spec.Nx + i) * m + k];
    }
    double at(int i, int j, int k) const {
        return data[(static_cast<size_t>(j) * spec.Nx + i) * m + k];
    }
};

struct ResidualReport {
    double maxNorm = 0;  // finest level, relative to scale
    double l2Norm = 0;
    Vec perLayer;  // per-layer relative max norms, finest level
    double scale = 0;  // max|q_t| + max|psi_x q_y| + max|psi_y q_x| on the finest level
    Vec grids;     // node spacing per refinement level, coarse to fine
    Vec levelMax;  // relative max norm per level
    double fittedOrder = 0;  // log-log slope of levelMax against spacing; set with >= 3 levels
};

enum class Quantity { Energy, ZonalMomentum, Circulation, Enstrophy };

// Interface diagnostics, per-layer maxima over 64 interface angles.  peak and
// peakSlope are the magnitudes of the field and its gradient over the disk,
// for scaling the jumps.
struct InterfaceReport {
    Vec psiInner, psiOuter;  // |psi| on the circle, approached from each side
    Vec slopeJump;           // |jump of the radial derivative|
    Vec curvJump;            // |jump of the second radial derivative| (informational)
    double peak = 0;
    double peakSlope = 0;
};

// q = psi_xx + psi_yy + F psi + beta y.  Uses jets when the field carries
// them, otherwise centered differences with step h (required positive then).
Vec potential_vorticity(const SolutionField& f, const CouplingMatrix& F, double beta, double t,
                        double x, double y, double h = 0);

// Stream function sampled on the grid (flags: 0 evaluated, 2 masked).
GridField sample(const SolutionField& f, const GridSpec& spec);

// q on the grid.  Jets when available; otherwise differences of the sampled
// psi, switching to one-sided stencils against the grid edge (flag 1).
GridField potential_vorticity(const SolutionField& f, const CouplingMatrix& F, double beta,
                              const GridSpec& spec);

// Pointwise residual q_t + psi_x q_y - psi_y q_x on `levels` grids, each
// halving the node spacing of `spec`.  Inner quantities (psi derivatives, q,
// q_t) come from jets when available and from differences otherwise; the
// outer q_x, q_y are always formed by differencing q across the grid, so the
// report measures how well the field balances the equation independently of
// how its derivatives were produced.  Exact solutions converge at 4th order
// until rounding; the log-log slope of the max norm against spacing is fitted
// when at least 3 levels are requested.  Piecewise fields should mask a band
// of a few coarse spacings around the interface.  Aborts on a non-finite
// field value, naming the point.
ResidualReport residual(const SolutionField& f, const CouplingMatrix& F, double beta,
                        const GridSpec& spec, int levels = 1);

// Trapezoid quadrature of a conserved density over the grid:
//   Energy          1/2 (|psi_x|_W^2 + |psi_y|_W^2 - (psi, F psi)_W)
//   ZonalMomentum   (1, psi_y)_W
//   Circulation     (1, q)_W
//   Enstrophy       1/2 sum_i w_i q_i^2
// with w_i the thickness weights recovered from F.  Masked nodes carry zero
// weight.  The grid overload differences the stored samples instead of
// calling the field.
double conserved(const SolutionField& f, const CouplingMatrix& F, double beta,
                 const GridSpec& spec, Quantity what);
double conserved(const GridField& psi, const CouplingMatrix& F, double beta, Quantity what);

// Samples both sides of the interface circle at 64 angles.  The pieces must
// carry jets.
InterfaceReport interface_check(const PiecewiseSolution& p, double t = 0);

}
