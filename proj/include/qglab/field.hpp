#pragma once
#include <functional>
#include <string>
#include <vector>

#include "qglab/jet.hpp"
#include "qglab/linalg.hpp"

namespace qglab {

// Validity region of a solution. Radial kinds may ride along a time-dependent
// x-shift (co-moving vortices), encoded as a polynomial h(t).
struct Domain {
    enum class Kind { AllPlane, Disk, ExteriorDisk, Annulus };
    Kind kind = Kind::AllPlane;
    double cx = 0, cy = 0;
    double r0 = 0, r1 = 0;  // Disk: r <= r0; Exterior: r >= r0; Annulus: r0 <= r <= r1
    Vec shift;              // x-center offset polynomial in t (empty = static)

    bool contains(double t, double x, double y) const {
        double dx = x - cx, dy = y - cy;
        if (!shift.empty()) {
            double h = 0;
            for (size_t k = shift.size(); k-- > 0;) h = h * t + shift[k];
            dx -= h;
        }
        double r2 = dx * dx + dy * dy;
        switch (kind) {
            case Kind::AllPlane: return true;
            case Kind::Disk: return r2 <= r0 * r0;
            case Kind::ExteriorDisk: return r2 >= r0 * r0;
            case Kind::Annulus: return r2 >= r0 * r0 && r2 <= r1 * r1;
        }
        return true;
    }

    std::string describe() const {
        switch (kind) {
            case Kind::AllPlane: return "all-plane";
            case Kind::Disk: return "disk";
            case Kind::ExteriorDisk: return "exterior-disk";
            case Kind::Annulus: return "annulus";
        }
        return "unknown";
    }
};

// Provenance and compatibility metadata. Superposition requires identical
// coupling fingerprints and diagonal shift; the affine background is counted
// once across the sum.
struct FieldTags {
    std::string family;
    Vec Fsub, Fsup;   // coupling fingerprint
    Vec Bdiag;        // diagonal shift; empty when not applicable
    double chi = 0;   // tilt of the travelling-wave coordinate, when meaningful
    bool hasBackground = false;
    Mat bgCoef;       // m x 3 background polynomial in y (columns: y, y^2, y^3)
    Vec ubg;          // background flow velocity (diagnostic)
    bool boosted = false;
    std::string note;
};

struct SolutionField {
    int m = 0;
    std::function<Vec(double t, double x, double y)> eval;
    std::function<std::vector<Jet3>(double t, double x, double y)> jet;  // may be empty
    Domain domain;
    FieldTags tags;

    bool has_jet() const { return static_cast<bool>(jet); }
};

}
