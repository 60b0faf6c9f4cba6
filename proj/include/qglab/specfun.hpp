#pragma once
#include "qglab/errors.hpp"

namespace qglab {

enum class BesselKind { J, Y, I, K };

struct BesselVD {
    double value;
    double deriv;
};

// Cylinder functions of integer order 0..20 on x in (0, 200] (J and I also at
// x = 0 and beyond 200 up to overflow). Relative accuracy 1e-10, absolute
// 1e-12 near zeros of the oscillatory kinds. The derivative comes from the
// standard two-term recurrences. Y and K reject x <= 0; I rejects x > 700
// where exp(x) leaves double range.
BesselVD bessel(BesselKind kind, int order, double x);

double bessel_j(int n, double x);
double bessel_y(int n, double x);
double bessel_i(int n, double x);
double bessel_k(int n, double x);

// Ratios appearing in the vortex matching conditions. ratio_j0j1 throws when
// x sits within ~1e-10 of a zero of J1 (pole of the ratio); K1 has no zeros.
double bessel_ratio_j0j1(double x);
double bessel_ratio_k0k1(double x);

// k-th positive zero of J1, k = 1..5. Used to partition matching-condition scans.
double bessel_j1_zero(int k);

}
