#pragma once

#include "twistorq/canonical.hpp"
#include "twistorq/core.hpp"
#include "twistorq/quatlin.hpp"

#include <vector>

namespace twistorq::twistor {

using quatlin::SpherePoint;

// Restriction of q to the fiber over p: A xi0^2 + 2B xi0 xi12 + C xi12^2.
struct FiberQuadratic {
    cd a{0.0, 0.0};
    cd b{0.0, 0.0};
    cd c{0.0, 0.0};
    SpherePoint basepoint;

    cd discriminant() const { return b * b - a * c; }
};

// Q must be in Twistor order; p must be finite.
FiberQuadratic fiber_coefficients(const Quadric& q, const SpherePoint& p);

// Congruence by the swap [xi0, xi12, W1, W2] -> [W1, W2, xi0, xi12].
Quadric invert_lift(const Quadric& q);

cd discriminant(const Quadric& q, const SpherePoint& p);

// Expanded closed form of the discriminant of Q_{lambda,mu,nu}.
cd diagonal_discriminant(double lambda, double mu, double nu, cd z1, cd z2);

bool contains_fiber(const Quadric& q, const SpherePoint& p, double tol = 1e-9);

enum class LineKind { CircleFamily, NoLines, Lines };

struct LineReport {
    LineKind kind = LineKind::NoLines;
    std::vector<SpherePoint> points;
};

const char* to_string(LineKind kind);

LineReport classify_lines(const canonical::CanonicalForm& c);

enum class LocusClass {
    Circle,
    CliffordTorus,
    SmoothUnknottedTorus,
    PinchedTorusTwoPoints,
    PinchedTorusOnePoint,
};

const char* to_string(LocusClass cls);

struct LocusReport {
    LocusClass cls = LocusClass::SmoothUnknottedTorus;
    std::vector<SpherePoint> pinch_points;
    // Clifford torus only: |y|^2 and |x|^2 on the unit sphere.
    double y_radius2 = 0.0;
    double x_radius2 = 0.0;
};

LocusReport classify_locus(const canonical::CanonicalForm& c);

// Same reports with points carried through the witness back to the
// coordinates of the form c was computed from.
LocusReport source_locus(const canonical::CanonicalForm& c);
LineReport source_lines(const canonical::CanonicalForm& c);

// Real equations for a singular point of D with z2 = 0, z1 = x + iy.
RVec3 pinch_system_residual(double lambda, double mu, double nu, double x, double y);

}  // namespace twistorq::twistor
