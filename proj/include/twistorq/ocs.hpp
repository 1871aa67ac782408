#pragma once

#include "twistorq/core.hpp"
#include "twistorq/quatlin.hpp"
#include "twistorq/twistor.hpp"

#include <array>
#include <vector>

namespace twistorq::ocs {

using quatlin::SpherePoint;
using twistor::FiberQuadratic;

// Unit-norm homogeneous pair [xi0 : xi12], first nonzero entry real positive.
struct FiberPoint {
    cd xi0{1.0, 0.0};
    cd xi12{0.0, 0.0};

    static FiberPoint make(cd xi0, cd xi12);
    // Affine coordinate a = xi12 / xi0 (infinite at [0:1]).
    cd ratio() const { return xi12 / xi0; }
};

// Fubini-Study distance on CP^1, range [0, pi].
double fs_distance(const FiberPoint& u, const FiberPoint& v);

enum class FiberSolutionKind { WholeFiber, DoubleRoot, TwoRoots };

struct FiberSolution {
    FiberSolutionKind kind = FiberSolutionKind::TwoRoots;
    std::vector<FiberPoint> roots;
};

FiberSolution solve_fiber(const FiberQuadratic& f, double tol = 1e-12);

// Orthogonal complex structure on R^4 (coordinates x1, y1, x2, y2).
RMat4 to_jmatrix(const FiberPoint& fp);

using HyperplaneCoeffs = std::array<cd, 4>;

FiberPoint hyperplane_ocs(const HyperplaneCoeffs& c, const SpherePoint& p);

// Closed-form roots for the quadric with form {0|K} (Block order); sign is +1 or -1.
FiberPoint real_quadric_ocs(int sign, const SpherePoint& p);

enum class FieldSource { Quadric, Hyperplane, RealQuadric };

struct OCSField {
    FieldSource source = FieldSource::Quadric;
    Quadric q;                  // Twistor order
    int branch = 1;             // 1 or 2
    SpherePoint base;
    FiberPoint base_root;       // root labelled `branch` at base
    HyperplaneCoeffs c{};
    int sign = 1;

    // Branch labels are fixed at the base point by lexicographic order of
    // (Re a, Im a), a = xi12 / xi0, with [0:1] last. Without an explicit base
    // the first candidate off the discriminant locus is used.
    static OCSField quadric(const Quadric& q, int branch);
    static OCSField quadric(const Quadric& q, int branch, const SpherePoint& base);
    static OCSField hyperplane(const HyperplaneCoeffs& c);
    static OCSField real_quadric(int sign);
};

// Both roots at p ordered by the base-point label convention.
std::array<FiberPoint, 2> ordered_roots(const Quadric& q, const SpherePoint& p);

// |Delta| relative to the natural scale ||Q||^2 (1 + |z|^2)^2.
double normalized_discriminant(const Quadric& q, const SpherePoint& p);

// Evaluates the field by continuation along the segment from the base point.
FiberPoint eval_field(const OCSField& field, const SpherePoint& p);

// Continuation from a known root at `from` to `to`.
FiberPoint continue_root(const Quadric& q, const SpherePoint& from, const FiberPoint& root,
                         const SpherePoint& to);

struct IntegrabilityResidual {
    double r1 = 0.0;
    double r2 = 0.0;
    bool inverse_chart = false;

    double norm() const { return std::hypot(r1, r2); }
};

IntegrabilityResidual integrability_residual(const OCSField& field, const SpherePoint& p, double h);

double default_step(const SpherePoint& p);

}  // namespace twistorq::ocs
