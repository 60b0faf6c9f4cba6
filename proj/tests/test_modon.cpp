#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qglab/families.hpp"
#include "qglab/layers.hpp"
#include "qglab/modon.hpp"
#include "qglab/specfun.hpp"

using namespace qglab;

namespace {

LayerStack three_layer_reference() {
    LayerStack s;
    s.m = 3;
    s.H = {600, 1400, 2000};
    s.gprime = {0.02, 0.03};
    s.f0 = 1e-4;
    s.beta = 1.6e-11;
    return s;
}

double pde_residual(const SolutionField& f, const Mat& Fd, double beta, double t, double x,
                    double y) {
    auto js = f.jet(t, x, y);
    int m = f.m;
    double worst = 0;
    for (int i = 0; i < m; ++i) {
        double qt = 0, qx = 0, qy = 0, st = 0, sx = 0, sy = 0;
        auto acc = [](double& sum, double& mag, double v) {
            sum += v;
            mag += std::abs(v);
        };
        acc(qt, st, js[i].deriv(1, 2, 0));
        acc(qt, st, js[i].deriv(1, 0, 2));
        acc(qx, sx, js[i].deriv(0, 3, 0));
        acc(qx, sx, js[i].deriv(0, 1, 2));
        acc(qy, sy, js[i].deriv(0, 2, 1));
        acc(qy, sy, js[i].deriv(0, 0, 3));
        for (int j = 0; j < m; ++j) {
            acc(qt, st, Fd(i, j) * js[j].deriv(1, 0, 0));
            acc(qx, sx, Fd(i, j) * js[j].deriv(0, 1, 0));
            acc(qy, sy, Fd(i, j) * js[j].deriv(0, 0, 1));
        }
        acc(qy, sy, beta);
        double px = js[i].deriv(0, 1, 0), py = js[i].deriv(0, 0, 1);
        double res = qt + px * qy - py * qx;
        double scale = st + std::abs(px) * sy + std::abs(py) * sx + 1e-300;
        worst = std::max(worst, std::abs(res) / scale);
    }
    return worst;
}

constexpr double PI = 3.14159265358979323846;

// frozen solver outputs for the reference stack
constexpr double R0_A = 104428.3148670801;        // rhoTilde 1.5e-9, rhoHat 3e-10, branch 1
constexpr double AT_A = -34727.475140263574;      // inner barotropic amplitude of that pair
constexpr double AH_A = -79682.05278838257;       // outer barotropic amplitude
constexpr double RH_B = 2.3876070998264584e-9;    // rhoHat for rhoTilde 1.3e-9, r0 125 km
constexpr double AT_B = -17054.190997853373;
constexpr double AH_B = -1810462.6615482213;
constexpr double RH_C = 2.64179037997655e-9;      // rhoHat for rhoTilde 1.8e-9, r0 105 km

// interface-condition roots, ascending, for the two shared-basis cases
const Vec NUS_A = {7.68154936818024328e-10, 2.04224967350941346e-09, 3.79362772537605032e-09};
const Vec NUS_B = {1.01254856239128793e-09, 2.70353833818534234e-09, 5.09010850178578642e-09};

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

double gap_scale(double rt, double rh) { return 2.0 / rt + 2.0 / rh; }

// scalar interface condition, for checking solver output independently
double gap_of(double rt, double rh, double r0) {
    double a = std::sqrt(rt) * r0, b = std::sqrt(rh) * r0;
    return (r0 / std::sqrt(rt)) * (bessel_j(0, a) / bessel_j(1, a)) -
           (r0 / std::sqrt(rh)) * (bessel_k(0, b) / bessel_k(1, b)) - 2.0 / rt - 2.0 / rh;
}

}  // namespace

TEST_CASE("barotropic pair: radius solve") {
    auto st = three_layer_reference();
    auto F = build_coupling(st);
    LRParams p;
    p.rhoTilde = 1.5e-9;
    p.rhoHat = 3e-10;
    auto sp = lr_barotropic_solve(F, st.beta, p);

    CHECK(rel(sp.r0, R0_A) < 1e-11);
    CHECK(std::abs(gap_of(sp.rhoTilde, sp.rhoHat, sp.r0)) <
          1e-10 * gap_scale(sp.rhoTilde, sp.rhoHat));
    CHECK(sp.barotropic);
    CHECK(sp.m == 3);
    CHECK(rel(sp.rho, 1.8e-9) < 1e-14);

    // only the uncoupled mode carries amplitude
    CHECK(sp.inner.alphas[0] == 0.0);
    CHECK(sp.inner.alphas[1] == 0.0);
    CHECK(rel(sp.inner.alphas[2], AT_A) < 1e-11);
    CHECK(rel(sp.outer.alphas[2], AH_A) < 1e-11);

    // uniform backgrounds of opposite sense
    for (int i = 0; i < 3; ++i) {
        CHECK(rel(sp.inner.ubg[i], st.beta / 1.5e-9) < 1e-14);
        CHECK(rel(sp.outer.ubg[i], -st.beta / 3e-10) < 1e-14);
    }

    // the amplitude-bearing column is the normalized all-ones vector
    double n1 = 1.0 / 2.5819888974716113;
    for (int i = 0; i < 3; ++i) CHECK(rel(sp.inner.vectors(i, 2), n1) < 1e-13);

    auto sd = spectral(F);
    for (int i = 0; i < 3; ++i) {
        CHECK(rel(sp.inner.lambdas[i], sd.lambdas[i] + 1.5e-9) < 1e-12);
        CHECK(rel(sp.outer.lambdas[i], sd.lambdas[i] - 3e-10) < 1e-12);
        CHECK(sp.inner.lambdas[i] > 0);
        CHECK(sp.outer.lambdas[i] < 0);
    }

    // matching residual projections vanish at the solution
    Vec R = matching_residual(F, sp);
    for (int j = 0; j < 3; ++j) CHECK(std::abs(R[j]) < 1e-8 * st.beta * sp.r0);
}

TEST_CASE("barotropic pair: outer decay solve and involution") {
    auto st = three_layer_reference();
    auto F = build_coupling(st);
    LRParams p;
    p.rhoTilde = 1.3e-9;
    p.r0 = 125e3;
    auto sp = lr_barotropic_solve(F, st.beta, p);
    CHECK(rel(sp.rhoHat, RH_B) < 1e-11);
    CHECK(rel(sp.inner.alphas[2], AT_B) < 1e-10);
    CHECK(rel(sp.outer.alphas[2], AH_B) < 1e-10);

    LRParams q;
    q.rhoTilde = 1.8e-9;
    q.r0 = 105e3;
    auto sq = lr_barotropic_solve(F, st.beta, q);
    CHECK(rel(sq.rhoHat, RH_C) < 1e-11);

    // solving for rhoHat at the radius found in the radius solve recovers the
    // original decay rate
    LRParams inv;
    inv.rhoTilde = 1.5e-9;
    inv.r0 = R0_A;
    auto si = lr_barotropic_solve(F, st.beta, inv);
    CHECK(rel(si.rhoHat, 3e-10) < 1e-8);
}

TEST_CASE("barotropic pair: interior shift solve") {
    auto st = three_layer_reference();
    auto F = build_coupling(st);
    LRParams p;
    p.rhoHat = 3e-10;
    p.r0 = R0_A;
    auto sp = lr_barotropic_solve(F, st.beta, p);
    CHECK(rel(sp.rhoTilde, 1.5e-9) < 1e-10);
}

TEST_CASE("barotropic pair: second branch sits between the next zero pair") {
    auto st = three_layer_reference();
    auto F = build_coupling(st);
    LRParams p;
    p.rhoTilde = 1.5e-9;
    p.rhoHat = 3e-10;
    p.branch = 2;
    auto sp = lr_barotropic_solve(F, st.beta, p);
    double z = std::sqrt(sp.rhoTilde) * sp.r0;
    CHECK(z > bessel_j1_zero(2));
    CHECK(z < bessel_j1_zero(3));
    CHECK(sp.r0 > R0_A);
    CHECK(std::abs(gap_of(sp.rhoTilde, sp.rhoHat, sp.r0)) <
          1e-10 * gap_scale(sp.rhoTilde, sp.rhoHat));
}

TEST_CASE("barotropic pair: parameter validation") {
    auto st = three_layer_reference();
    auto F = build_coupling(st);
    LRParams p;  // nothing set: two unknowns
    p.rhoTilde = 1.5e-9;
    CHECK_THROWS_AS(lr_barotropic_solve(F, st.beta, p), ConfigError);
    p.rhoHat = 3e-10;
    p.r0 = 1e5;  // all three set
    CHECK_THROWS_AS(lr_barotropic_solve(F, st.beta, p), ConfigError);

    LRParams shallow;  // inner shift below the coupling spectral radius
    shallow.rhoTilde = 1e-9;
    shallow.rhoHat = 3e-10;
    CHECK_THROWS_AS(lr_barotropic_solve(F, st.beta, shallow), ConfigError);

    LRParams bad;
    bad.rhoTilde = 1.5e-9;
    bad.rhoHat = 3e-10;
    bad.branch = 0;
    CHECK_THROWS_AS(lr_barotropic_solve(F, st.beta, bad), ConfigError);
}

TEST_CASE("shared basis: interface roots and shift recovery") {
    auto st = three_layer_reference();
    auto F = build_coupling(st);
    double r0 = 170e3, rho = 4.5e-9;
    auto sp = shared_basis_solve(F, st.beta, r0, rho);

    for (int i = 0; i < 3; ++i) {
        CHECK(rel(sp.inner.lambdas[i], NUS_A[i]) < 1e-12);
        CHECK(rel(sp.outer.lambdas[i], NUS_A[i] - rho) < 1e-12);
        CHECK(sp.inner.lambdas[i] > 0);
        CHECK(sp.inner.lambdas[i] < rho);
        CHECK(sp.outer.lambdas[i] < 0);
    }

    // recovered shift reproduces the root spectrum and the trace identity
    auto sd = spectral(F.shifted(sp.inner.Bdiag));
    double trB = 0, trF = F.diag[0] + F.diag[1] + F.diag[2], snu = 0;
    for (int i = 0; i < 3; ++i) {
        CHECK(rel(sd.lambdas[i], NUS_A[i]) < 1e-9);
        trB += sp.inner.Bdiag[i];
        snu += NUS_A[i];
    }
    CHECK(rel(trB, trF - snu) < 1e-10);
    for (int i = 0; i < 3; ++i) CHECK(rel(sp.outer.Bdiag[i], sp.inner.Bdiag[i] + rho) < 1e-12);

    Vec R = matching_residual(F, sp);
    for (int j = 0; j < 3; ++j) CHECK(std::abs(R[j]) < 1e-8 * st.beta * r0);

    // each root-to-layer assignment is its own shift branch
    auto sq = shared_basis_solve(F, st.beta, r0, rho, {0, 2, 1});
    const Vec printed = {-1.71e-9, -4.26e-9, -2.23e-9};
    for (int i = 0; i < 3; ++i) CHECK(rel(sq.inner.Bdiag[i], printed[i]) < 1e-2);
    for (int i = 0; i < 3; ++i) CHECK(rel(sq.inner.lambdas[i], NUS_A[i]) < 1e-12);
    Vec Rq = matching_residual(F, sq);
    for (int j = 0; j < 3; ++j) CHECK(std::abs(Rq[j]) < 1e-8 * st.beta * r0);
}

TEST_CASE("shared basis: wider window keeps the lowest roots") {
    auto st = three_layer_reference();
    auto F = build_coupling(st);
    double r0 = 150e3, rho = 8e-9;
    auto sp = shared_basis_solve(F, st.beta, r0, rho, {1, 0, 2});
    for (int i = 0; i < 3; ++i) CHECK(rel(sp.inner.lambdas[i], NUS_B[i]) < 1e-12);
    const Vec printed = {-3.34e-9, -1.82e-9, -5.25e-9};
    for (int i = 0; i < 3; ++i) CHECK(rel(sp.inner.Bdiag[i], printed[i]) < 1e-2);
    Vec R = matching_residual(F, sp);
    for (int j = 0; j < 3; ++j) CHECK(std::abs(R[j]) < 1e-8 * st.beta * r0);
}

TEST_CASE("shared basis: validation") {
    auto st = three_layer_reference();
    auto F = build_coupling(st);
    CHECK_THROWS_AS(shared_basis_solve(F, st.beta, -1e5, 4.5e-9), ConfigError);
    CHECK_THROWS_AS(shared_basis_solve(F, st.beta, 170e3, 0.0), ConfigError);
    CHECK_THROWS_AS(shared_basis_solve(F, st.beta, 170e3, 4.5e-9, {0, 0, 1}), ConfigError);
    CHECK_THROWS_AS(shared_basis_solve(F, st.beta, 170e3, 4.5e-9, {0, 1}), ConfigError);
    // window too narrow to hold three roots
    CHECK_THROWS_AS(shared_basis_solve(F, st.beta, 170e3, 5e-10), NumericError);
}

TEST_CASE("matching residual flags a detuned radius") {
    auto st = three_layer_reference();
    auto F = build_coupling(st);
    auto sp = shared_basis_solve(F, st.beta, 170e3, 4.5e-9);
    Vec R0v = matching_residual(F, sp);
    double base = 0;
    for (double v : R0v) base = std::max(base, std::abs(v));

    ModonSpec wrong = sp;
    wrong.r0 *= 1.01;
    Vec R1 = matching_residual(F, wrong);
    double off = 0;
    for (double v : R1) off = std::max(off, std::abs(v));
    CHECK(off > 100 * base);

    // for the barotropic pair only the uncoupled projection reacts
    LRParams p;
    p.rhoTilde = 1.5e-9;
    p.rhoHat = 3e-10;
    auto lr = lr_barotropic_solve(F, st.beta, p);
    lr.r0 *= 1.1;
    Vec Rlr = matching_residual(F, lr);
    CHECK(std::abs(Rlr[2]) > 1e3 * std::abs(Rlr[0]));
    CHECK(std::abs(Rlr[2]) > 1e3 * std::abs(Rlr[1]));
    CHECK(std::abs(Rlr[2]) > 1e-6 * st.beta * lr.r0);
}

TEST_CASE("assembled barotropic pair matches its closed form") {
    auto st = three_layer_reference();
    auto F = build_coupling(st);
    LRParams p;
    p.rhoTilde = 1.5e-9;
    p.rhoHat = 3e-10;
    auto sp = lr_barotropic_solve(F, st.beta, p);
    auto ps = assemble_modon(sp);
    CHECK(ps.pieces.size() == 2);
    CHECK(ps.r0 == sp.r0);

    double rt = sp.rhoTilde, rh = sp.rhoHat, r0 = sp.r0, beta = st.beta;
    double j1r0 = bessel_j(1, std::sqrt(rt) * r0);
    double k1r0 = bessel_k(1, std::sqrt(rh) * r0);
    for (double th : {0.3, 1.2, 2.9, 4.4}) {
        for (double fr : {0.2, 0.6, 0.95}) {
            double x = fr * r0 * std::cos(th), y = fr * r0 * std::sin(th);
            Vec v = ps.eval(0.0, x, y);
            double want =
                beta / rt * (r0 * bessel_j(1, std::sqrt(rt) * fr * r0) / j1r0 * std::sin(th) - y);
            for (int i = 0; i < 3; ++i) CHECK(rel(v[i], want) < 1e-10);
        }
        double x = 1.7 * r0 * std::cos(th), y = 1.7 * r0 * std::sin(th);
        Vec v = ps.eval(0.0, x, y);
        double want =
            -beta / rh * (r0 * bessel_k(1, std::sqrt(rh) * 1.7 * r0) / k1r0 * std::sin(th) - y);
        for (int i = 0; i < 3; ++i) CHECK(rel(v[i], want) < 1e-10);
    }

    // vorticity equation holds pointwise on both sides of the interface
    Mat Fd = F.dense();
    for (double th : {0.4, 2.0, 3.7, 5.6}) {
        double xi = 0.5 * r0 * std::cos(th), yi = 0.5 * r0 * std::sin(th);
        CHECK(pde_residual(ps.pieces[0], Fd, beta, 0.0, xi, yi) < 1e-9);
        double xo = 1.8 * r0 * std::cos(th), yo = 1.8 * r0 * std::sin(th);
        CHECK(pde_residual(ps.pieces[1], Fd, beta, 0.0, xo, yo) < 1e-9);
    }

    // swirl decays far from the vortex: compare against the background-free peak
    double peak = 0, far = 0;
    for (double th : {0.2, 1.3, 2.1, 3.3, 4.1, 5.2}) {
        Vec vin = ps.eval(0.0, 0.55 * r0 * std::cos(th), 0.55 * r0 * std::sin(th));
        double y = 0.55 * r0 * std::sin(th);
        peak = std::max(peak, std::abs(vin[0] + y * sp.inner.ubg[0]));
        Vec vf = ps.eval(0.0, 10 * r0 * std::cos(th), 10 * r0 * std::sin(th));
        double yf = 10 * r0 * std::sin(th);
        far = std::max(far, std::abs(vf[0] + yf * sp.outer.ubg[0]));
    }
    CHECK(far < 1e-3 * peak);

    CHECK(ps.piece_at(0.1 * r0, 0).domain.kind == Domain::Kind::Disk);
    CHECK(ps.piece_at(2 * r0, 0).domain.kind == Domain::Kind::ExteriorDisk);
}

TEST_CASE("assembled modon is twice continuous with a jump in the third radial derivative") {
    auto st = three_layer_reference();
    auto F = build_coupling(st);
    double r0 = 170e3, rho = 4.5e-9;
    auto sp = shared_basis_solve(F, st.beta, r0, rho);
    auto ps = assemble_modon(sp);

    Mat Fd = F.dense();
    for (double th : {0.7, 1.9, 3.1, 5.0}) {
        CHECK(pde_residual(ps.pieces[0], Fd, st.beta, 0.0, 0.4 * r0 * std::cos(th),
                           0.4 * r0 * std::sin(th)) < 1e-9);
        CHECK(pde_residual(ps.pieces[1], Fd, st.beta, 0.0, 1.5 * r0 * std::cos(th),
                           1.5 * r0 * std::sin(th)) < 1e-9);
    }

    // at (0, r0) the radial direction is y: compare pure-y derivatives
    auto jin = ps.pieces[0].jet(0.0, 0.0, r0);
    auto jout = ps.pieces[1].jet(0.0, 0.0, r0);
    for (int i = 0; i < 3; ++i) {
        double pr = jin[i].deriv(0, 0, 1);
        CHECK(rel(jout[i].deriv(0, 0, 1), pr) < 1e-7);
        double prr_i = jin[i].deriv(0, 0, 2), prr_o = jout[i].deriv(0, 0, 2);
        CHECK(std::abs(prr_i - prr_o) <= 1e-5 * (std::abs(prr_i) + std::abs(prr_o)));
        double jump = jout[i].deriv(0, 0, 3) - jin[i].deriv(0, 0, 3);
        CHECK(rel(jump, rho * pr) < 1e-5);
    }

    // stream function itself vanishes on the circle
    for (double th : {0.5, 2.2, 4.8}) {
        Vec v = ps.eval(0.0, r0 * std::cos(th), r0 * std::sin(th));
        Vec inner = ps.eval(0.0, 0.5 * r0 * std::cos(th), 0.5 * r0 * std::sin(th));
        double scale = 0;
        for (double u : inner) scale = std::max(scale, std::abs(u));
        for (double u : v) CHECK(std::abs(u) < 1e-8 * scale);
    }
}

TEST_CASE("assembly rejects inconsistent specs") {
    auto st = three_layer_reference();
    auto F = build_coupling(st);
    auto sp = shared_basis_solve(F, st.beta, 170e3, 4.5e-9);

    ModonSpec detuned = sp;
    detuned.r0 *= 1.001;
    CHECK_THROWS_AS(assemble_modon(detuned), ConfigError);

    ModonSpec flipped = sp;
    flipped.inner.lambdas[0] = -flipped.inner.lambdas[0];
    CHECK_THROWS_AS(assemble_modon(flipped), ConfigError);

    ModonSpec leaky = sp;
    leaky.outer.lambdas[2] = 1e-12;
    CHECK_THROWS_AS(assemble_modon(leaky), ConfigError);

    LRParams p;
    p.rhoTilde = 1.5e-9;
    p.rhoHat = 3e-10;
    auto lr = lr_barotropic_solve(F, st.beta, p);
    lr.inner.alphas[2] *= 1.0001;
    CHECK_THROWS_AS(assemble_modon(lr), ConfigError);
}

TEST_CASE("modon pieces do not superpose") {
    auto st = three_layer_reference();
    auto F = build_coupling(st);
    LRParams p;
    p.rhoTilde = 1.5e-9;
    p.rhoHat = 3e-10;
    auto ps = assemble_modon(lr_barotropic_solve(F, st.beta, p));
    CHECK_THROWS_AS(superpose({ps.pieces[0], ps.pieces[1]}), ConfigError);
}

TEST_CASE("single layer pair") {
    CouplingMatrix F;
    F.m = 1;
    F.diag = {0.0};
    double beta = 1.6e-11;
    LRParams p;
    p.rhoTilde = 1.5e-9;
    p.rhoHat = 3e-10;
    auto sp = lr_barotropic_solve(F, beta, p);
    CHECK(std::abs(gap_of(sp.rhoTilde, sp.rhoHat, sp.r0)) <
          1e-10 * gap_scale(sp.rhoTilde, sp.rhoHat));
    auto ps = assemble_modon(sp);
    Vec v = ps.eval(0.0, 0.3 * sp.r0, 0.4 * sp.r0);
    double j1r0 = bessel_j(1, std::sqrt(1.5e-9) * sp.r0);
    double r = 0.5 * sp.r0, y = 0.4 * sp.r0;
    double want = beta / 1.5e-9 *
                  (sp.r0 * bessel_j(1, std::sqrt(1.5e-9) * r) / j1r0 * (y / r) - y);
    CHECK(rel(v[0], want) < 1e-10);
}

TEST_CASE("piecewise jets agree with values") {
    auto st = three_layer_reference();
    auto F = build_coupling(st);
    auto sp = shared_basis_solve(F, st.beta, 150e3, 8e-9);
    auto ps = assemble_modon(sp);
    for (auto [x, y] : {std::pair{0.2 * 150e3, 0.3 * 150e3}, {2.1 * 150e3, -0.4 * 150e3}}) {
        auto js = ps.jet(0.0, x, y);
        Vec v = ps.eval(0.0, x, y);
        for (int i = 0; i < 3; ++i)
            CHECK(std::abs(js[i].value() - v[i]) <= 1e-12 * (std::abs(v[i]) + 1e-300));
    }
}
