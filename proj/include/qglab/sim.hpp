#pragma once
#include "qglab/field.hpp"
#include "qglab/layers.hpp"
#include "qglab/verify.hpp"

namespace qglab {

// Doubly periodic pseudo-spectral integrator for the layer anomaly
//
//   q'_t = -J(psi, q') - (beta 1 - F U) . psi_x - U . q'_x,
//   q'   = lap(psi) + F psi,
//
// where U is the constant zonal background flow stripped from the
// initializing solution (its -U_k y streamfunction is not periodic, so the
// grid carries the periodic part only and U enters through the advection
// and the effective beta). Spectra are unnormalized forward-transform sums,
// stored plane-major per layer with row-major (j, i) node order inside a
// plane. Wavenumber i maps to kx = 2 pi sx / Lx with sx = i for i <= Nx/2
// and i - Nx beyond.

struct SimParams {
    double x0 = 0, y0 = 0;  // box corner
    double Lx = 0, Ly = 0;  // periods
    int Nx = 0, Ny = 0;     // powers of two, at least 16
    double t0 = 0;          // sampling time of the source field
    Vec U;                  // background folded into the advection; empty = zero
    double wrapTol = 1e-6;  // relative periodicity defect accepted at init
    bool dealias = true;    // 2/3-rule truncation of the quadratic terms
};

struct SimState {
    int m = 0, Nx = 0, Ny = 0;
    double x0 = 0, y0 = 0, Lx = 0, Ly = 0;
    double t = 0;
    double beta = 0;
    bool dealias = true;
    CouplingMatrix F;
    Mat pinv;   // zero-wavenumber inversion; gauges the barotropic mean to zero
    Vec w;      // layer weights H_i/H_1, for the energy diagnostic
    Vec U;      // per-layer background speed
    Vec kx, ky;
    std::vector<unsigned char> maskx, masky;  // spectral truncation tables
    CVec qhat;  // m planes of Nx*Ny
    double wrapError = 0;  // measured periodicity defect of the initializing field

    size_t idx(int k, int j, int i) const {
        return (static_cast<size_t>(k) * Ny + j) * Nx + i;
    }
    double dx() const { return Lx / Nx; }
    double dy() const { return Ly / Ny; }
};

struct Diagnostics {
    Vec times;
    Vec energy;      // total weighted energy per sample
    Mat enstrophy;   // samples x m, 0.5 int q'_k^2 per layer
    Vec drift;       // max|psi - advected reference| / initial peak, per sample
    // translation speed of the layer-0 mid-row anomaly, from cross-correlation
    // shifts accumulated between consecutive samples; sample often enough that
    // the displacement per interval stays under half the dominant wavelength
    double phaseSpeed = 0;
    double dt = 0;
    int steps = 0;
};

// Spectral frame without data; qhat is left zero.
SimState make_state(const CouplingMatrix& F, double beta, const SimParams& p);

// Samples q' = lap(psi) + F psi of the periodic part psi + U y on the box
// (exactly via jets when the field carries them, through the spectral
// Helmholtz operator otherwise) and transforms it. The field must wrap: the
// relative mismatch across opposite box edges is measured and the field is
// rejected with that value when it exceeds p.wrapTol.
SimState init_from_solution(const SolutionField& f, const CouplingMatrix& F, double beta,
                            const SimParams& p);

// Solves (-|k|^2 E + F) psihat = qhat per wavenumber (tridiagonal in the
// layer index). The k = 0 column goes through the Moore-Penrose inverse,
// which projects onto the range of F and gauges the barotropic mean to zero.
CVec invert_pv(const SimState& s, const CVec& qhat);
CVec invert_pv(const SimState& s);

// Largest advective speed max(|U - psi_y|, |psi_x|) of the current state.
double max_speed(const SimState& s);
// Admissible RK4 step 0.5 min(dx,dy)/max_speed; infinite for a still field.
double cfl_limit(const SimState& s);

// One classical RK4 step. The quadratic terms are formed on the grid with
// the state's truncation rule and conjugate symmetry is restored after the
// update. Steps beyond the advective limit are rejected before the state is
// touched.
void step_rk4(SimState& s, double dt);

struct RunOptions {
    double dt = 0;
    int steps = 0;
    int sampleEvery = 1;
    double refSpeed = 0;  // advection speed of the drift reference
};

// Integrates opt.steps steps, sampling energy, per-layer enstrophy and the
// streamfunction drift against the initial state advected at opt.refSpeed.
// A spectral norm growing past 10x its initial value aborts the run with
// the simulation time in the message.
Diagnostics run(SimState& s, const RunOptions& opt);

// Real-space snapshots on the periodic node set (spacing Lx/Nx, no wrapped
// duplicate column/row).
GridField psi_grid(const SimState& s);
GridField q_grid(const SimState& s);

}
