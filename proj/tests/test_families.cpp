#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <functional>
#include <random>

#include "qglab/families.hpp"
#include "qglab/harmonics.hpp"
#include "qglab/layers.hpp"

using namespace qglab;
using Cplx = std::complex<double>;

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

// max over layers of the full vorticity-equation residual at one point,
// normalized by the magnitudes of its terms; exact jets make this a pointwise
// zero test rather than a discretization estimate
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

void check_jet_matches_eval(const SolutionField& f, double t, double x, double y) {
    auto js = f.jet(t, x, y);
    Vec v = f.eval(t, x, y);
    for (int i = 0; i < f.m; ++i) {
        double scale = std::abs(v[i]) + 1e-300;
        CHECK(std::abs(js[i].value() - v[i]) <= 1e-12 * scale);
    }
}

double fd_deriv(const std::function<double(double)>& g, double h, int order) {
    if (order == 1) return (-g(2 * h) + 8 * g(h) - 8 * g(-h) + g(-2 * h)) / (12 * h);
    return (-g(2 * h) + 16 * g(h) - 30 * g(0) + 16 * g(-h) - g(-2 * h)) / (12 * h * h);
}

// fitted convergence order from errors on grids h, h/2, h/4
double fitted_order(double e1, double e2, double e4) {
    return 0.5 * (std::log2(e1 / e2) + std::log2(e2 / e4));
}

const Vec B_ROSSBY = {-7e-10, 4e-10, -1e-10};
const Vec B_HETON = {-10e-10, -8e-10, -5e-10};
const Vec B_PAIR = {-8e-10, 3e-10, -2e-10};

// frozen spectra of the shifted matrices for the reference stack
const double NU3_ROSSBY = 1.6671170195427604e-10;
const Vec E3_ROSSBY = {0.81033976311671889, 0.29176610738317073, 0.20836414639114963};
const Vec UBG_ROSSBY = {0.27571150097465887, 0.063313840155945419, -0.081715399610136452};
const double NU2_HETON = 3.127632422332876e-10;
const Vec UBG_HETON = {0.0086050420168067227, 0.017478991596638655, 0.039260504201680672};
const Vec UBG_PAIR = {-0.21277661795407098, 0.010688935281837161, 0.4265553235908142};
const double NU2_PAIR = 2.4036608085252097e-11;
const double NU3_PAIR = 2.6671170195427604e-10;

}  // namespace

TEST_CASE("opposed plane atoms give the stationary cosine pattern") {
    auto st = three_layer_reference();
    auto F = build_coupling(st);

    double psi0 = 15000;
    HerglotzSpec spec;
    spec.B = B_ROSSBY;
    spec.planeAtoms = {{3, 0.5 * psi0, 3.14159265358979323846 / 4},
                       {3, 0.5 * psi0, 5 * 3.14159265358979323846 / 4}};
    auto f = herglotz_solution(F, st.beta, spec);

    REQUIRE(f.m == 3);
    for (int i = 0; i < 3; ++i)
        CHECK(f.tags.ubg[i] == doctest::Approx(UBG_ROSSBY[i]).epsilon(1e-11));

    double k = std::sqrt(NU3_ROSSBY / 2);
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> U(-4e5, 4e5);
    for (int n = 0; n < 24; ++n) {
        double x = U(rng), y = U(rng);
        Vec v = f.eval(0.0, x, y);
        for (int i = 0; i < 3; ++i) {
            double want = psi0 * std::cos(k * (x + y)) * E3_ROSSBY[i] - y * UBG_ROSSBY[i];
            CHECK(v[i] == doctest::Approx(want).epsilon(5e-10));
        }
    }
}

TEST_CASE("radial eddy matches the Bessel closed form, center included") {
    auto st = three_layer_reference();
    auto F = build_coupling(st);

    double psi0 = 15000;
    const double twopi = 2 * 3.14159265358979323846;
    HerglotzSpec spec;
    spec.B = B_ROSSBY;
    spec.radialAtoms = {{3, 0, psi0 / twopi, 0.0, 0.0}};
    auto f = herglotz_solution(F, st.beta, spec);

    double s = std::sqrt(NU3_ROSSBY);
    for (double r : {0.0, 1e4, 1.2e5, 3.5e5, 6e5, 1.1e6}) {
        double x = r * 0.6, y = r * 0.8;
        Vec v = f.eval(0.0, x, y);
        double J0 = bessel_j(0, s * r);
        for (int i = 0; i < 3; ++i) {
            double want = psi0 * J0 * E3_ROSSBY[i] - y * UBG_ROSSBY[i];
            CHECK(v[i] == doctest::Approx(want).epsilon(5e-10));
        }
    }
    check_jet_matches_eval(f, 0.0, 0.0, 0.0);  // atom center
    check_jet_matches_eval(f, 0.0, 2e5, -1e5);
}

TEST_CASE("heton shift reproduces the published mode and background") {
    auto st = three_layer_reference();
    auto F = build_coupling(st);

    auto sd = spectral(F.shifted(B_HETON));
    CHECK(sd.lambdas[1] == doctest::Approx(NU2_HETON).epsilon(1e-12));

    Vec e = sd.eigvec(1);
    CHECK(e[1] / e[0] == doctest::Approx(0.14 / 0.79).epsilon(2e-2));
    CHECK(e[2] / e[0] == doctest::Approx(-1.12 / 0.79).epsilon(2e-2));

    HerglotzSpec spec;
    spec.B = B_HETON;
    spec.radialAtoms = {{2, 0, 9000.0 / (2 * 3.14159265358979323846), 0.0, 0.0}};
    auto f = herglotz_solution(F, st.beta, spec);
    for (int i = 0; i < 3; ++i)
        CHECK(f.tags.ubg[i] == doctest::Approx(UBG_HETON[i]).epsilon(1e-11));

    auto Fd = F.dense();
    for (auto [x, y] : {std::pair{1.2e5, -0.8e5}, {-2e5, 3e5}, {0.0, 0.0}})
        CHECK(pde_residual(f, Fd, st.beta, 0.0, x, y) < 1e-9);
}

TEST_CASE("background shear enters a superposition once") {
    auto st = three_layer_reference();
    auto F = build_coupling(st);

    auto sd = spectral(F.shifted(B_PAIR));
    CHECK(sd.lambdas[1] == doctest::Approx(NU2_PAIR).epsilon(1e-12));
    CHECK(sd.lambdas[2] == doctest::Approx(NU3_PAIR).epsilon(1e-12));

    RadialAtom cyclone{2, 0, 8000.0, -1.5e5, 0.0};
    RadialAtom anticyclone{3, 0, -6000.0, 1.5e5, 0.0};

    HerglotzSpec one;
    one.B = B_PAIR;
    one.radialAtoms = {cyclone};
    HerglotzSpec two;
    two.B = B_PAIR;
    two.radialAtoms = {anticyclone};
    HerglotzSpec both;
    both.B = B_PAIR;
    both.radialAtoms = {cyclone, anticyclone};

    auto fa = herglotz_solution(F, st.beta, one);
    auto fb = herglotz_solution(F, st.beta, two);
    auto fsum = superpose({fa, fb});
    auto fref = herglotz_solution(F, st.beta, both);

    for (int i = 0; i < 3; ++i)
        CHECK(fsum.tags.ubg[i] == doctest::Approx(UBG_PAIR[i]).epsilon(1e-11));

    std::mt19937 rng(7);
    std::uniform_real_distribution<double> U(-5e5, 5e5);
    for (int n = 0; n < 30; ++n) {
        double x = U(rng), y = U(rng);
        Vec a = fsum.eval(0.0, x, y), b = fref.eval(0.0, x, y);
        for (int i = 0; i < 3; ++i)
            CHECK(std::abs(a[i] - b[i]) <= 1e-12 * (std::abs(b[i]) + 1.0));
    }

    // jets deduplicate identically
    auto ja = fsum.jet(0.0, 2e5, -1e5);
    auto jb = fref.jet(0.0, 2e5, -1e5);
    for (int i = 0; i < 3; ++i)
        for (int p = 0; p < Jet3::N; ++p)
            CHECK(std::abs(ja[i].c[p] - jb[i].c[p]) <= 1e-12 * (std::abs(jb[i].c[p]) + 1e-6));

    auto Fd = F.dense();
    CHECK(pde_residual(fsum, Fd, st.beta, 0.0, 0.7e5, -2.2e5) < 1e-9);

    // additive identity
    HerglotzSpec zero;
    zero.B = B_PAIR;
    zero.includeBackground = false;
    auto fz = herglotz_solution(F, st.beta, zero);
    auto fsame = superpose({fa, fz});
    Vec a = fsame.eval(0.0, 1e5, 2e5), b = fa.eval(0.0, 1e5, 2e5);
    for (int i = 0; i < 3; ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-13));
}

TEST_CASE("superposition rejects mismatched ingredients") {
    auto st = three_layer_reference();
    auto F = build_coupling(st);

    HerglotzSpec ha;
    ha.B = B_ROSSBY;
    ha.radialAtoms = {{3, 0, 100.0, 0.0, 0.0}};
    HerglotzSpec hb;
    hb.B = B_HETON;
    hb.radialAtoms = {{2, 0, 100.0, 0.0, 0.0}};
    auto fa = herglotz_solution(F, st.beta, ha);
    auto fb = herglotz_solution(F, st.beta, hb);
    CHECK_THROWS_AS((void)superpose({fa, fb}), ConfigError);

    auto boosted = boost(fa, BoostSpec::constant_speed(0.01));
    CHECK_THROWS_AS((void)superpose({boosted, fa}), ConfigError);

    BBMWaveSpec ws;
    ws.chi = 0.7;
    ws.mode = 3;
    ws.alpha = 1.4e-4;
    ws.delta = 3.5e-6;
    ws.root = 0.0;
    ws.amplitude = 100.0;
    auto wave = bbm_wave(F, st.beta, ws);
    CHECK_THROWS_AS((void)superpose({fa, wave}), ConfigError);

    CHECK_THROWS_AS((void)superpose({}), ConfigError);
}

TEST_CASE("kernel-mode terms require a singular shift") {
    auto st = three_layer_reference();
    auto F = build_coupling(st);

    HerglotzSpec bad;
    bad.B = B_ROSSBY;  // invertible shift
    bad.sigma1 = 1e-6;
    CHECK_THROWS_AS((void)herglotz_solution(F, st.beta, bad), ConfigError);

    HerglotzSpec ok;  // zero shift is singular, slopes ride on the kernel mode
    ok.sigma1 = 2e-6;
    ok.sigma2 = -1e-6;
    auto f = herglotz_solution(F, st.beta, ok);

    double n1 = 2.5819888974716113;  // W-norm of the all-ones vector
    Vec v = f.eval(0.0, 3e5, -2e5);
    for (int i = 0; i < 3; ++i) {
        double y = -2e5;
        double want = (2e-6 * 3e5 + -1e-6 * y) / n1 - st.beta / 6.0 * y * y * y;
        CHECK(v[i] == doctest::Approx(want).epsilon(1e-10));
    }
    auto Fd = F.dense();
    CHECK(pde_residual(f, Fd, st.beta, 0.0, 3e5, -2e5) < 1e-9);
}

TEST_CASE("atoms reject modes of the wrong sign") {
    auto st = three_layer_reference();
    auto F = build_coupling(st);

    // unshifted spectrum is nonpositive: no oscillatory atoms anywhere
    for (int mode : {1, 2, 3}) {
        HerglotzSpec s;
        s.planeAtoms = {{mode, 1.0, 0.0}};
        CHECK_THROWS_AS((void)herglotz_solution(F, st.beta, s), ConfigError);
    }

    AffineSpec a;
    a.B = Vec{-5e-10, -5e-10, -5e-10};
    a.expAtoms = {{2, 1.0, 0.3}};  // mode 2 has positive eigenvalue here
    CHECK_THROWS_AS((void)affine_stationary(F, st.beta, a), ConfigError);

    AffineSpec g;
    g.B = B_ROSSBY;
    g.gamma = 0.5;  // kernel payload without a kernel
    CHECK_THROWS_AS((void)affine_stationary(F, st.beta, g), ConfigError);

    HerglotzSpec r;
    r.B = B_ROSSBY;
    r.radialAtoms = {{3, 25, 1.0, 0.0, 0.0}};  // order cap
    CHECK_THROWS_AS((void)herglotz_solution(F, st.beta, r), ConfigError);
}

TEST_CASE("affine payloads: exponential, plane and radial modes together") {
    auto st = three_layer_reference();
    auto F = build_coupling(st);

    AffineSpec spec;
    spec.B = Vec{-5e-10, -5e-10, -5e-10};
    spec.expAtoms = {{1, 2500.0, 0.3}};
    spec.planeAtoms = {{2, Cplx(4000.0, 1500.0), 1.1}};
    spec.radialAtoms = {{3, 1, Cplx(0.0, 2000.0), 1e5, -0.5e5}};
    auto f = affine_stationary(F, st.beta, spec);

    auto sd = spectral(F.shifted(spec.B));
    double nu1 = sd.lambdas[0];
    REQUIRE(nu1 < 0);

    // modified Helmholtz identity for the pure exponential part
    AffineSpec eonly;
    eonly.B = spec.B;
    eonly.expAtoms = spec.expAtoms;
    eonly.includeBackground = false;
    auto fe = affine_stationary(F, st.beta, eonly);
    for (auto [x, y] : {std::pair{2e4, -3e4}, {-1e4, 1e4}}) {
        auto js = fe.jet(0.0, x, y);
        for (int i = 0; i < 3; ++i) {
            double lap = js[i].deriv(0, 2, 0) + js[i].deriv(0, 0, 2);
            double scale = std::abs(nu1) * std::abs(js[i].value()) + 1e-300;
            CHECK(std::abs(lap + nu1 * js[i].value()) <= 1e-10 * scale);
        }
    }

    auto Fd = F.dense();
    for (auto [x, y] : {std::pair{0.4e5, -0.2e5}, {-0.6e5, 0.3e5}})
        CHECK(pde_residual(f, Fd, st.beta, 0.0, x, y) < 1e-9);
    check_jet_matches_eval(f, 0.0, 1e5, -0.5e5);  // radial atom center
}

TEST_CASE("degenerate kernel payload carries the cubic background") {
    auto st = three_layer_reference();
    auto F = build_coupling(st);

    AffineSpec spec;  // zero shift
    spec.harmonicAtoms = {{2, Cplx(3e-12, -1e-12)}};
    spec.gamma = 4e-7;
    auto f = affine_stationary(F, st.beta, spec);

    double n1 = 2.5819888974716113;
    for (auto [x, y] : {std::pair{2e5, 1e5}, {-1e5, 3e5}}) {
        Vec v = f.eval(0.0, x, y);
        Cplx w = Cplx(x, y) * Cplx(x, y);
        double harm = 3e-12 * w.real() + 1e-12 * w.imag();
        for (int i = 0; i < 3; ++i) {
            double want = (harm + 4e-7 * y * y) / n1 - st.beta / 6.0 * y * y * y;
            CHECK(v[i] == doctest::Approx(want).epsilon(1e-10));
        }
    }
    auto Fd = F.dense();
    CHECK(pde_residual(f, Fd, st.beta, 0.0, -2e5, 1.5e5) < 1e-9);
}

TEST_CASE("dispersion cubic: frozen roots of the reference rows") {
    auto st = three_layer_reference();
    auto F = build_coupling(st);
    auto sd = spectral(F);

    auto r1 = bbm_dispersion_roots(0.7, sd.lambdas[0], 1.2e-4, 4e-6, st.beta);
    REQUIRE(r1.roots.size() == 1);
    CHECK(r1.roots[0] == doctest::Approx(0.033330648555421035).epsilon(1e-12));
    CHECK(r1.discriminant < 0);

    auto r2 = bbm_dispersion_roots(0.7, sd.lambdas[1], 1.5e-4, 3e-6, st.beta);
    REQUIRE(r2.roots.size() == 1);
    CHECK(r2.roots[0] == doctest::Approx(0.019996419942667569).epsilon(1e-12));

    auto r3 = bbm_dispersion_roots(0.7, sd.lambdas[2], 1.4e-4, 3.5e-6, st.beta);
    REQUIRE(r3.roots.size() == 3);
    CHECK(r3.roots[0] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(r3.roots[1] == doctest::Approx(3.0684494820195331e-6).epsilon(1e-12));
    CHECK(r3.roots[2] == doctest::Approx(0.02499693155051798).epsilon(1e-12));
    CHECK(r3.discriminant > 0);
    CHECK(!r3.degenerate);
}

TEST_CASE("dispersion cubic: collapsed coefficient chains") {
    // delta = 0 factors one root out
    auto rq = bbm_dispersion_roots(0.0, 3.0, 1.0, 0.0, 1.0);
    REQUIRE(rq.roots.size() == 3);
    CHECK(rq.roots[0] == doctest::Approx(-std::sqrt(2.0)).epsilon(1e-14));
    CHECK(rq.roots[1] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(rq.roots[2] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));

    // delta = 0 with alpha*lambda < beta: only the zero root survives
    auto rz = bbm_dispersion_roots(0.0, -3.0, 1.0, 0.0, 1.0);
    REQUIRE(rz.roots.size() == 1);
    CHECK(rz.roots[0] == 0.0);

    // alpha = delta = 0: the linear case
    auto rl = bbm_dispersion_roots(0.7, -2e-10, 0.0, 0.0, 1.6e-11);
    CHECK(rl.degenerate);
    REQUIRE(rl.roots.size() == 1);
    CHECK(rl.roots[0] == 0.0);

    CHECK_THROWS_AS((void)bbm_dispersion_roots(0.0, 1.0, -1.0, 0.0, 1.0), ConfigError);
}

TEST_CASE("simple waves accept only genuine dispersion roots") {
    auto st = three_layer_reference();
    auto F = build_coupling(st);
    auto sd = spectral(F);

    BBMWaveSpec spec;
    spec.chi = 0.7;
    spec.mode = 1;
    spec.alpha = 1.2e-4;
    spec.delta = 4e-6;
    spec.root = 0.033330648555421035;
    spec.amplitude = 12000;
    spec.phase = 3.14159265358979323846 / 4;
    auto f = bbm_wave(F, st.beta, spec);

    Vec e1 = sd.eigvec(0);
    for (auto [t, x, y] : {std::tuple{0.0, 1e5, -2e5}, {4e4, -3e5, 1e5}}) {
        Vec v = f.eval(t, x, y);
        double z2 = x - spec.chi * y;
        double theta = spec.delta * t + spec.root * (z2 - spec.alpha * t) + spec.phase;
        double want0 = spec.amplitude * std::cos(theta);
        // the phase is O(1e4) radians here, so value agreement is limited to
        // amplitude * phase * eps by association order alone
        double tol = spec.amplitude * std::abs(theta) * 1e-15;
        for (int i = 0; i < 3; ++i) CHECK(std::abs(v[i] - want0 * e1[i]) <= tol);
    }

    auto Fd = F.dense();
    for (auto [t, x, y] : {std::tuple{0.0, 2e5, 1e5}, {5e4, -1e5, -3e5}, {-2e4, 0.0, 4e5}})
        CHECK(pde_residual(f, Fd, st.beta, t, x, y) < 1e-9);

    // barotropic member rides the snapped mode
    BBMWaveSpec bt;
    bt.chi = 0.7;
    bt.mode = 3;
    bt.alpha = 1.4e-4;
    bt.delta = 3.5e-6;
    bt.root = 0.02499693155051798;
    bt.amplitude = 10000;
    bt.phase = 3.14159265358979323846 / 6;
    auto fb = bbm_wave(F, st.beta, bt);
    CHECK(pde_residual(fb, Fd, st.beta, 1e4, 2e5, -2e5) < 1e-9);

    BBMWaveSpec wrong = spec;
    wrong.root = 0.0333;  // close but not a root
    CHECK_THROWS_AS((void)bbm_wave(F, st.beta, wrong), ConfigError);

    BBMWaveSpec outside = spec;
    outside.mode = 4;
    CHECK_THROWS_AS((void)bbm_wave(F, st.beta, outside), ConfigError);
}

TEST_CASE("tilted waves superpose across modes when the tilt agrees") {
    auto st = three_layer_reference();
    auto F = build_coupling(st);

    BBMWaveSpec w1;
    w1.chi = 0.7;
    w1.mode = 1;
    w1.alpha = 1.2e-4;
    w1.delta = 4e-6;
    w1.root = 0.033330648555421035;
    w1.amplitude = 15000;
    BBMWaveSpec w2;
    w2.chi = 0.7;
    w2.mode = 2;
    w2.alpha = 1.5e-4;
    w2.delta = 3e-6;
    w2.root = 0.019996419942667569;
    w2.amplitude = 12000;

    auto f1 = bbm_wave(F, st.beta, w1);
    auto f2 = bbm_wave(F, st.beta, w2);
    auto kg = kg_barotropic_mode(3, st.beta, 0.7, 2 * 3.14159265358979323846 / 4e5, 10000,
                                 3.14159265358979323846 / 5);
    auto sum = superpose({f1, f2, kg});

    auto Fd = F.dense();
    for (auto [t, x, y] : {std::tuple{0.0, 1e5, 2e5}, {3e4, -2e5, -1e5}})
        CHECK(pde_residual(sum, Fd, st.beta, t, x, y) < 1e-9);

    auto kgTilted = kg_barotropic_mode(3, st.beta, 0.4, 1e-5, 10000, 0.0);
    CHECK_THROWS_AS((void)superpose({f1, kgTilted}), ConfigError);
}

TEST_CASE("barotropic light-cone wave is exact for any layer count") {
    for (int m : {1, 2, 5}) {
        auto kg = kg_barotropic_mode(m, 1.6e-11, -0.4, 1.3e-5, 8000, 0.9);
        LayerStack s;
        if (m == 1) continue;  // residual check needs a coupling matrix
        s.m = m;
        s.H = Vec(m, 800.0);
        s.gprime = Vec(m - 1, 0.02);
        s.f0 = 1e-4;
        s.beta = 1.6e-11;
        auto Fd = build_coupling(s).dense();
        for (auto [t, x, y] : {std::tuple{0.0, 2e5, -1e5}, {1e5, -2e5, 2e5}})
            CHECK(pde_residual(kg, Fd, s.beta, t, x, y) < 1e-9);
    }
    CHECK_THROWS_AS((void)kg_barotropic_mode(3, 1.6e-11, 0.1, 0.0, 1.0, 0.0), ConfigError);
}

TEST_CASE("coupled shift solves the full system for imaginary exponent") {
    auto st = three_layer_reference();
    auto F = build_coupling(st);

    CoupledShiftSpec spec;
    spec.c = {0.9, -0.3, 0.4};
    spec.mu = Cplx(0.0, 2 * 3.14159265358979323846 / 5e5);
    spec.chi = 0.7;
    spec.A = {Cplx(1.0, 0.3) * 8e3, Cplx(-0.2, 0.5) * 8e3, Cplx(0.7, -0.1) * 8e3};
    auto f = coupled_shift_solution(F, st.beta, spec);

    auto Fd = F.dense();
    for (auto [t, x, y] :
         {std::tuple{0.0, 1e5, -1e5}, {2e4, -2e5, 3e5}, {-1e4, 4e5, 2e5}, {5e4, 0.0, 0.0}})
        CHECK(pde_residual(f, Fd, st.beta, t, x, y) < 1e-9);
    check_jet_matches_eval(f, 2e4, -2e5, 3e5);

    // c within span(ones) is rejected
    CoupledShiftSpec bad = spec;
    bad.c = {0.5, 0.5, 0.5};
    CHECK_THROWS_AS((void)coupled_shift_solution(F, st.beta, bad), ConfigError);

    // mu = 0 hits the structural kernel of a physical matrix
    CoupledShiftSpec mzero = spec;
    mzero.mu = 0.0;
    CHECK_THROWS_AS((void)coupled_shift_solution(F, st.beta, mzero), ConfigError);
}

TEST_CASE("coupled shift: steady limit and closed-form two-layer exponential") {
    auto st = three_layer_reference();
    auto F = build_coupling(st);

    // invertible diagonal shift makes mu = 0 a steady shear
    auto Fs = F.shifted(Vec{5e-10, 5e-10, 5e-10});
    CoupledShiftSpec spec;
    spec.c = {1e-3, -2e-3, 5e-4};
    spec.mu = 0.0;
    spec.chi = 0.0;
    spec.A = {Cplx(2e3, 0.0), Cplx(-1e3, 0.0), Cplx(4e2, 0.0)};
    auto f = coupled_shift_solution(Fs, st.beta, spec);

    Vec Are = {2e3, -1e3, 4e2};
    Vec w = solve(Fs.dense(), Are);
    for (auto [x, y] : {std::pair{1e5, -2e5}, {-3e5, 2e5}}) {
        Vec v = f.eval(7e4, x, y);  // t drops out
        for (int i = 0; i < 3; ++i)
            CHECK(v[i] == doctest::Approx(w[i] + y * spec.c[i]).epsilon(1e-11));
    }

    // two-layer case against a hand-built eigen decomposition of exp(mu t G)
    LayerStack s2;
    s2.m = 2;
    s2.H = {600, 1400};
    s2.gprime = {0.02};
    s2.f0 = 1e-4;
    s2.beta = 1.6e-11;
    auto F2 = build_coupling(s2);

    CoupledShiftSpec c2;
    c2.c = {7e-4, -3e-4};
    c2.mu = Cplx(0.0, 1.2e-5);
    c2.chi = 0.3;
    c2.A = {Cplx(5e3, 1e3), Cplx(-2e3, 3e3)};
    auto f2 = coupled_shift_solution(F2, s2.beta, c2);

    Cplx shift = c2.mu * c2.mu * (1.0 + c2.chi * c2.chi);
    Mat F2d = F2.dense();
    CMat Ft(2, 2);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) Ft(i, j) = Cplx(F2d(i, j)) + (i == j ? shift : Cplx(0));
    CMat Fti = inverse(Ft);
    Vec Fc = matvec(F2d, c2.c);
    CMat G(2, 2);
    for (int i = 0; i < 2; ++i) {
        Cplx bi = Fc[i] + s2.beta;
        for (int j = 0; j < 2; ++j)
            G(i, j) = (i == j ? Cplx(c2.c[i]) : Cplx(0)) - bi * Fti(i, j);
    }
    double t = 3e4, x = 1.3e5, y = -0.6e5;
    Cplx tr = G(0, 0) + G(1, 1), det = G(0, 0) * G(1, 1) - G(0, 1) * G(1, 0);
    Cplx rt = std::sqrt(tr * tr - 4.0 * det);
    Cplx l1 = 0.5 * (tr + rt), l2 = 0.5 * (tr - rt);
    Cplx z = c2.mu * t;
    // exp(zG) = (e^{z l1}(G - l2 E) - e^{z l2}(G - l1 E)) / (l1 - l2)
    CMat E(2, 2);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            Cplx gij = G(i, j);
            Cplx d1 = gij - (i == j ? l2 : Cplx(0)), d2 = gij - (i == j ? l1 : Cplx(0));
            E(i, j) = (std::exp(z * l1) * d1 - std::exp(z * l2) * d2) / (l1 - l2);
        }
    CVec wv = matvec(Fti, matvec(E, c2.A));
    Cplx pref = std::exp(c2.mu * (x - c2.chi * y));
    Vec got = f2.eval(t, x, y);
    for (int i = 0; i < 2; ++i) {
        double want = (pref * wv[i]).real() + y * c2.c[i];
        CHECK(got[i] == doctest::Approx(want).epsilon(1e-10));
    }
}

TEST_CASE("time-linear shear family") {
    auto st = three_layer_reference();
    auto F = build_coupling(st);
    auto sd = spectral(F);
    auto Fd = F.dense();

    // pure barotropic shear: b = c = 0, linear chi
    auto f0 = s26_solution(F, st.beta, Vec(3, 0.0), Vec(3, 0.0), {0.3, 1e-6}, {0.0, 2e-3});
    CHECK(pde_residual(f0, Fd, st.beta, 2e4, 1e5, -1e5) < 1e-12);

    // baroclinic directions from the spectrum, quadratic chi
    Vec b = sd.eigvec(0), c = sd.eigvec(1);
    auto f = s26_solution(F, st.beta, b, c, {0.3, 1e-6, 5e-11}, {0.0, 2e-3});
    for (auto [t, x, y] :
         {std::tuple{0.0, 1e5, -2e5}, {4e4, -3e5, 1e5}, {-2e4, 2e5, 2e5}, {8e4, 0.0, -4e5}})
        CHECK(pde_residual(f, Fd, st.beta, t, x, y) < 1e-9);
    check_jet_matches_eval(f, 4e4, -3e5, 1e5);

    // constants stay exact when chi is constant (time-only velocity fields)
    auto fc = s26_solution(F, st.beta, b, c, {0.45}, {1e-3, 5e-4, 2e-9});
    CHECK(pde_residual(fc, Fd, st.beta, 6e4, -1e5, 2.5e5) < 1e-9);

    CHECK_THROWS_AS((void)s26_solution(F, st.beta, Vec(3, 1.0), c, {0.3}, {}), ConfigError);
    CHECK_THROWS_AS((void)s26_solution(F, st.beta, b, c, {0, 0, 0, 0, 0, 1e-30}, {}), ConfigError);
}

TEST_CASE("boost: identity, group law and covariance") {
    auto st = three_layer_reference();
    auto F = build_coupling(st);

    HerglotzSpec spec;
    spec.B = B_ROSSBY;
    spec.radialAtoms = {{3, 0, 15000.0 / (2 * 3.14159265358979323846), 0.0, 0.0}};
    auto f = herglotz_solution(F, st.beta, spec);

    auto same = boost(f, BoostSpec{});
    Vec a = same.eval(0.0, 1e5, 2e5), b = f.eval(0.0, 1e5, 2e5);
    for (int i = 0; i < 3; ++i) CHECK(a[i] == b[i]);

    BoostSpec h1{{0.0, 0.05}};             // constant speed
    BoostSpec h2{{100.0, -0.02, 3e-8}};    // offset + drift + acceleration
    BoostSpec h12{{100.0, 0.03, 3e-8}};
    auto g1 = boost(boost(f, h1), h2);
    auto g2 = boost(f, h12);
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> U(-3e5, 3e5), T(-1e5, 1e5);
    for (int n = 0; n < 20; ++n) {
        double t = T(rng), x = U(rng), y = U(rng);
        Vec va = g1.eval(t, x, y), vb = g2.eval(t, x, y);
        for (int i = 0; i < 3; ++i)
            CHECK(std::abs(va[i] - vb[i]) <= 1e-12 * (std::abs(vb[i]) + 1.0));
    }

    // travelling eddy still solves the equation; jets carry the time dependence
    auto Fd = F.dense();
    auto trav = boost(f, BoostSpec::constant_speed(0.03));
    for (auto [t, x, y] : {std::tuple{0.0, 1e5, -1e5}, {3e5, 2e5, 1e5}, {-2e5, -3e5, 2e5}})
        CHECK(pde_residual(trav, Fd, st.beta, t, x, y) < 1e-9);
    check_jet_matches_eval(trav, 3e5, 2e5, 1e5);

    // quadratic shift: generalized boost
    auto acc = boost(f, BoostSpec{{0.0, 0.01, 1e-9}});
    CHECK(pde_residual(acc, Fd, st.beta, 2e5, 1e5, 1e5) < 1e-9);

    CHECK_THROWS_AS((void)boost(f, BoostSpec{{0, 0, 0, 0, 0, 0, 0, 1.0}}), ConfigError);
}

TEST_CASE("jets match finite differences at fourth order") {
    auto st = three_layer_reference();
    auto F = build_coupling(st);

    HerglotzSpec spec;
    spec.B = B_ROSSBY;
    spec.radialAtoms = {{3, 2, Cplx(9000.0, -2000.0), 0.0, 0.0}};
    spec.planeAtoms = {{3, 7000.0, 0.6}};
    auto eddy = herglotz_solution(F, st.beta, spec);
    auto trav = boost(eddy, BoostSpec::constant_speed(0.04));

    struct Probe {
        const SolutionField* f;
        double t, x, y;
        int dir;    // 0 t, 1 x, 2 y
        int order;  // 1 or 2
        double h;
    };
    std::vector<Probe> probes = {
        {&eddy, 0.0, 1.7e5, -0.9e5, 1, 1, 2e4}, {&eddy, 0.0, 1.7e5, -0.9e5, 2, 1, 2e4},
        {&eddy, 0.0, 1.7e5, -0.9e5, 1, 2, 2e4}, {&eddy, 0.0, -2.6e5, 1.4e5, 2, 2, 2e4},
        {&trav, 2e5, 1.2e5, 0.8e5, 0, 1, 4e5},  {&trav, 2e5, 1.2e5, 0.8e5, 1, 1, 2e4},
    };
    for (const auto& p : probes) {
        auto js = p.f->jet(p.t, p.x, p.y);
        int io[3] = {0, 0, 0};
        io[p.dir] = p.order;
        double exact = js[0].deriv(io[0], io[1], io[2]);
        auto g = [&](double s) {
            double c[3] = {p.t, p.x, p.y};
            c[p.dir] += s;
            return p.f->eval(c[0], c[1], c[2])[0];
        };
        double e1 = std::abs(fd_deriv(g, p.h, p.order) - exact);
        double e2 = std::abs(fd_deriv(g, p.h / 2, p.order) - exact);
        double e4 = std::abs(fd_deriv(g, p.h / 4, p.order) - exact);
        REQUIRE(e4 > 0);
        CHECK(fitted_order(e1, e2, e4) >= 3.5);
    }
}

TEST_CASE("cylinder wave jets agree across the series seam") {
    // order 2, scale s: check both branches against finite differences
    double s = 1.3;
    for (double r : {3.0, 6.0}) {  // z = 3.9 (series) and 7.8 (ladder)
        double x = r * 0.8, y = r * 0.6;
        Jet3 X = Jet3::var(1, x), Y = Jet3::var(2, y);
        CJet3 z = cylinder_wave_jet(BesselKind::J, s, 2, X, Y);
        auto gre = [&](double dx) {
            return cylinder_wave(BesselKind::J, s, 2, x + dx, y).real();
        };
        double d1 = fd_deriv(gre, 1e-4, 1);
        double d2 = fd_deriv(gre, 1e-3, 2);
        CHECK(z.re.deriv(0, 1, 0) == doctest::Approx(d1).epsilon(1e-9));
        CHECK(z.re.deriv(0, 2, 0) == doctest::Approx(d2).epsilon(1e-7));
        CHECK(z.re.value() == doctest::Approx(gre(0.0)).epsilon(1e-13));
    }
    // center of a second-order atom: value and slope vanish, curvature does not
    CJet3 c0 = cylinder_wave_jet(BesselKind::J, 1.3, 2, Jet3::var(1, 0.0), Jet3::var(2, 0.0));
    CHECK(c0.re.value() == 0.0);
    CHECK(c0.re.deriv(0, 1, 0) == 0.0);
    CHECK(c0.re.deriv(0, 2, 0) != 0.0);

    CHECK_THROWS_AS((void)cylinder_wave_jet(BesselKind::K, 1.0, 0, Jet3::var(1, 0.0),
                                            Jet3::var(2, 0.0)),
                    NumericError);
}

TEST_CASE("every family reports order zero equal to eval") {
    auto st = three_layer_reference();
    auto F = build_coupling(st);

    std::vector<SolutionField> fields;
    HerglotzSpec h;
    h.B = B_ROSSBY;
    h.planeAtoms = {{3, Cplx(1000, 400), 2.1}};
    h.radialAtoms = {{3, 1, 800.0, 5e4, -5e4}};
    fields.push_back(herglotz_solution(F, st.beta, h));
    fields.push_back(boost(fields[0], BoostSpec{{0, 0.02, 5e-10}}));
    fields.push_back(kg_barotropic_mode(3, st.beta, 0.7, 1e-5, 5000, 0.4));
    BBMWaveSpec wv;
    wv.chi = 0.7;
    wv.mode = 2;
    wv.alpha = 1.5e-4;
    wv.delta = 3e-6;
    wv.root = 0.019996419942667569;
    wv.amplitude = 9000;
    fields.push_back(bbm_wave(F, st.beta, wv));
    auto sd = spectral(F);
    fields.push_back(
        s26_solution(F, st.beta, sd.eigvec(0), sd.eigvec(1), {0.2, 2e-6}, {0.0, 1e-3}));

    std::mt19937 rng(17);
    std::uniform_real_distribution<double> U(-4e5, 4e5);
    for (const auto& f : fields)
        for (int n = 0; n < 6; ++n) check_jet_matches_eval(f, U(rng) / 10, U(rng), U(rng));
}
