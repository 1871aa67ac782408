#include "twistorq/ocs.hpp"

#include <algorithm>
#include <cmath>

namespace twistorq::ocs {

namespace {

constexpr double kOnDiscriminant = 1e-12;
constexpr double kMinSeparation = 1e-8;
constexpr double kMinStep = 1e-12;
constexpr double kChartLimit = 1e3;

SpherePoint offset(const SpherePoint& p, int axis, double h)
{
    RVec4 x = p.real();
    x(axis) += h;
    return SpherePoint::from_real(x);
}

// Lexicographic order on (Re a, Im a) with [0:1] last.
bool label_less(const FiberPoint& u, const FiberPoint& v)
{
    const bool ui = std::abs(u.xi0) < 1e-14, vi = std::abs(v.xi0) < 1e-14;
    if (ui || vi)
        return !ui && vi;
    cd a = u.ratio(), b = v.ratio();
    if (a.real() != b.real())
        return a.real() < b.real();
    return a.imag() < b.imag();
}

const std::vector<SpherePoint>& base_candidates()
{
    static const std::vector<SpherePoint> pts = {
        SpherePoint::finite(0.0, 0.0),
        SpherePoint::finite({0.31, 0.17}, {-0.23, 0.41}),
        SpherePoint::finite({-0.57, 0.29}, {0.13, -0.37}),
        SpherePoint::finite({1.3, -0.7}, {0.9, 1.1}),
        SpherePoint::finite({0.05, 2.1}, {-1.7, 0.6}),
    };
    return pts;
}

}  // namespace

FiberPoint FiberPoint::make(cd xi0, cd xi12)
{
    double n = std::sqrt(std::norm(xi0) + std::norm(xi12));
    if (n == 0)
        throw Error(ErrorKind::Precondition, "fiber point with both coordinates zero");
    xi0 /= n;
    xi12 /= n;
    cd lead = std::abs(xi0) > 1e-15 ? xi0 : xi12;
    cd ph = std::conj(lead) / std::abs(lead);
    return {xi0 * ph, xi12 * ph};
}

double fs_distance(const FiberPoint& u, const FiberPoint& v)
{
    const double c = std::abs(std::conj(u.xi0) * v.xi0 + std::conj(u.xi12) * v.xi12);
    const double s = std::abs(u.xi0 * v.xi12 - u.xi12 * v.xi0);
    return 2.0 * std::atan2(s, c);
}

FiberSolution solve_fiber(const FiberQuadratic& f, double tol)
{
    const double s = std::max({std::abs(f.a), std::abs(f.b), std::abs(f.c)});
    if (s <= tol)
        return {FiberSolutionKind::WholeFiber, {}};
    const cd a = f.a / s, b = f.b / s, c = f.c / s;
    const cd disc = b * b - a * c;
    if (std::abs(disc) <= tol) {
        FiberPoint r = std::abs(c) >= std::abs(a) ? FiberPoint::make(c, -b) : FiberPoint::make(-b, a);
        return {FiberSolutionKind::DoubleRoot, {r}};
    }
    cd sq = std::sqrt(disc);
    if ((std::conj(b) * sq).real() < 0)
        sq = -sq;
    const cd q = -(b + sq);
    return {FiberSolutionKind::TwoRoots, {FiberPoint::make(c, q), FiberPoint::make(q, a)}};
}

RMat4 to_jmatrix(const FiberPoint& fp)
{
    const double n = std::norm(fp.xi0) + std::norm(fp.xi12);
    const double d = std::norm(fp.xi0) - std::norm(fp.xi12);
    const cd w = fp.xi12 * std::conj(fp.xi0);
    const double f = 2.0 * w.real(), g = 2.0 * w.imag();
    RMat4 j;
    j << 0, d, g, f,
         -d, 0, f, -g,
         -g, -f, 0, d,
         -f, g, -d, 0;
    return -j / n;
}

FiberPoint hyperplane_ocs(const HyperplaneCoeffs& c, const SpherePoint& p)
{
    if (p.infinite)
        throw Error(ErrorKind::InfinityBasepoint, "hyperplane field is evaluated on R^4");
    const cd num = c[0] + c[2] * p.z1 + c[3] * p.z2;
    const cd den = c[1] - c[2] * std::conj(p.z2) + c[3] * std::conj(p.z1);
    double scale = 0.0;
    for (cd ci : c)
        scale = std::max(scale, std::abs(ci));
    scale *= 1.0 + std::sqrt(p.norm2());
    if (std::abs(num) <= 1e-12 * scale && std::abs(den) <= 1e-12 * scale)
        throw Error(ErrorKind::SingularPoint, "the hyperplane contains the fiber over this point");
    return FiberPoint::make(den, -num);
}

FiberPoint real_quadric_ocs(int sign, const SpherePoint& p)
{
    if (p.infinite)
        throw Error(ErrorKind::InfinityBasepoint, "closed form is evaluated on R^4");
    const double y1 = p.z1.imag();
    const double rho = std::sqrt(y1 * y1 + std::norm(p.z2));
    if (rho <= kMinSeparation)
        throw Error(ErrorKind::OnDiscriminant, "point lies on the discriminant circle");
    // Roots a = i (y1 +- rho) / conj(z2), written without cancellation.
    if (sign > 0)
        return y1 >= 0 ? FiberPoint::make(std::conj(p.z2), I_ * (y1 + rho))
                       : FiberPoint::make(rho - y1, I_ * p.z2);
    return y1 <= 0 ? FiberPoint::make(std::conj(p.z2), I_ * (y1 - rho))
                   : FiberPoint::make(y1 + rho, -I_ * p.z2);
}

double normalized_discriminant(const Quadric& q, const SpherePoint& p)
{
    Quadric qt = to_order(q, Order::Twistor);
    double s = qt.m.norm() * (1.0 + p.norm2());
    return std::abs(twistor::discriminant(qt, p)) / (s * s);
}

std::array<FiberPoint, 2> ordered_roots(const Quadric& q, const SpherePoint& p)
{
    Quadric qt = to_order(q, Order::Twistor);
    FiberQuadratic f = twistor::fiber_coefficients(qt, p);
    double s = qt.m.norm() * (1.0 + p.norm2());
    f.a /= s;
    f.b /= s;
    f.c /= s;
    FiberSolution sol = solve_fiber(f, kOnDiscriminant);
    if (sol.kind != FiberSolutionKind::TwoRoots)
        throw Error(ErrorKind::OnDiscriminant, "fiber meets the quadric in fewer than two points");
    std::array<FiberPoint, 2> r{sol.roots[0], sol.roots[1]};
    if (label_less(r[1], r[0]))
        std::swap(r[0], r[1]);
    return r;
}

OCSField OCSField::quadric(const Quadric& q, int branch)
{
    Quadric qt = to_order(q, Order::Twistor);
    for (const auto& p : base_candidates())
        if (normalized_discriminant(qt, p) > 1e-6)
            return quadric(qt, branch, p);
    throw Error(ErrorKind::OnDiscriminant, "no base point off the discriminant locus");
}

OCSField OCSField::quadric(const Quadric& q, int branch, const SpherePoint& base)
{
    if (branch != 1 && branch != 2)
        throw Error(ErrorKind::Precondition, "branch must be 1 or 2");
    OCSField f;
    f.source = FieldSource::Quadric;
    f.q = to_order(q, Order::Twistor);
    f.branch = branch;
    f.base = base;
    f.base_root = ordered_roots(f.q, base)[branch - 1];
    return f;
}

OCSField OCSField::hyperplane(const HyperplaneCoeffs& c)
{
    OCSField f;
    f.source = FieldSource::Hyperplane;
    f.c = c;
    return f;
}

OCSField OCSField::real_quadric(int sign)
{
    OCSField f;
    f.source = FieldSource::RealQuadric;
    f.sign = sign >= 0 ? 1 : -1;
    return f;
}

FiberPoint continue_root(const Quadric& q, const SpherePoint& from, const FiberPoint& root,
                         const SpherePoint& to)
{
    const RVec4 x0 = from.real(), x1 = to.real();
    const double len = (x1 - x0).norm();
    if (len == 0)
        return root;
    FiberPoint cur = root;
    double t = 0.0;
    double dt = std::min(1.0, 0.1 / len);
    while (t < 1.0) {
        const double tn = std::min(1.0, t + dt);
        const SpherePoint pt = SpherePoint::from_real(x0 + tn * (x1 - x0));
        bool accepted = false;
        try {
            auto r = ordered_roots(q, pt);
            const double sep = fs_distance(r[0], r[1]);
            const double d0 = fs_distance(cur, r[0]), d1 = fs_distance(cur, r[1]);
            if (sep >= kMinSeparation && std::min(d0, d1) < sep / 3) {
                cur = d0 <= d1 ? r[0] : r[1];
                accepted = true;
            }
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::OnDiscriminant || tn == 1.0)
                throw;
        }
        if (accepted) {
            t = tn;
            dt = std::min(0.25, dt * 1.5);
        } else {
            dt *= 0.5;
            if (dt * len < kMinStep)
                throw Error(ErrorKind::PathBlocked, "continuation path passes too close to the discriminant locus");
        }
    }
    return cur;
}

FiberPoint eval_field(const OCSField& field, const SpherePoint& p)
{
    switch (field.source) {
    case FieldSource::Hyperplane: return hyperplane_ocs(field.c, p);
    case FieldSource::RealQuadric: return real_quadric_ocs(field.sign, p);
    case FieldSource::Quadric: break;
    }
    if (p.infinite)
        throw Error(ErrorKind::InfinityBasepoint, "field is evaluated on R^4");
    if (normalized_discriminant(field.q, p) <= kOnDiscriminant)
        throw Error(ErrorKind::OnDiscriminant, "point lies on the discriminant locus");
    return continue_root(field.q, field.base, field.base_root, p);
}

IntegrabilityResidual integrability_residual(const OCSField& field, const SpherePoint& p, double h)
{
    const FiberPoint center = eval_field(field, p);
    std::array<FiberPoint, 8> nb;
    for (int axis = 0; axis < 4; ++axis)
        for (int s = 0; s < 2; ++s) {
            SpherePoint x = offset(p, axis, s == 0 ? h : -h);
            nb[2 * axis + s] = field.source == FieldSource::Quadric ? continue_root(field.q, p, center, x)
                                                                    : eval_field(field, x);
        }

    IntegrabilityResidual res;
    res.inverse_chart = std::abs(center.xi12) > std::abs(center.xi0);
    auto chart = [&](const FiberPoint& f) {
        cd v = res.inverse_chart ? f.xi0 / f.xi12 : f.xi12 / f.xi0;
        if (!(std::abs(v) <= kChartLimit))
            throw Error(ErrorKind::ChartBreakdown, "stencil leaves both affine charts");
        return v;
    };
    const cd a = chart(center);
    std::array<cd, 4> d;  // d/dx1, d/dy1, d/dx2, d/dy2
    for (int axis = 0; axis < 4; ++axis)
        d[axis] = (chart(nb[2 * axis]) - chart(nb[2 * axis + 1])) / (2.0 * h);
    const cd a1 = 0.5 * (d[0] - I_ * d[1]), a1b = 0.5 * (d[0] + I_ * d[1]);
    const cd a2 = 0.5 * (d[2] - I_ * d[3]), a2b = 0.5 * (d[2] + I_ * d[3]);
    if (res.inverse_chart) {
        res.r1 = std::abs(a1 + a * a2b);
        res.r2 = std::abs(a2 - a * a1b);
    } else {
        res.r1 = std::abs(a * a1 + a2b);
        res.r2 = std::abs(a * a2 - a1b);
    }
    return res;
}

double default_step(const SpherePoint& p)
{
    return 1e-3 * (1.0 + std::sqrt(p.norm2()));
}

}  // namespace twistorq::ocs
