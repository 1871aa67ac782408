#include "twistorq/twistor.hpp"

#include <cmath>

namespace twistorq::twistor {

using canonical::CanonicalForm;
using canonical::Kind;
using canonical::kStratumTol;

namespace {

bool near_zero(double x)
{
    return std::abs(x) <= kStratumTol;
}

Eigen::Matrix<cd, 4, 2> fiber_embedding(cd z1, cd z2)
{
    Eigen::Matrix<cd, 4, 2> m;
    m << 1.0, 0.0, 0.0, 1.0, z1, -std::conj(z2), z2, std::conj(z1);
    return m;
}

std::vector<SpherePoint> push(const std::vector<SpherePoint>& pts, const CanonicalForm& c)
{
    std::vector<SpherePoint> out;
    for (const auto& p : pts)
        out.push_back(quatlin::act_on_sphere(c.witness, p));
    return out;
}

}  // namespace

FiberQuadratic fiber_coefficients(const Quadric& q, const SpherePoint& p)
{
    if (q.order != Order::Twistor)
        throw Error(ErrorKind::OrderMismatch, "fiber coefficients need Twistor order");
    if (p.infinite)
        throw Error(ErrorKind::InfinityBasepoint, "fiber over infinity; invert the form first");
    auto m = fiber_embedding(p.z1, p.z2);
    Mat2 s = m.transpose() * q.m * m;
    return {s(0, 0), 0.5 * (s(0, 1) + s(1, 0)), s(1, 1), p};
}

Quadric invert_lift(const Quadric& q)
{
    if (q.order != Order::Twistor)
        throw Error(ErrorKind::OrderMismatch, "inversion is defined in Twistor order");
    Mat4 s = Mat4::Zero();
    s(0, 2) = s(1, 3) = s(2, 0) = s(3, 1) = 1.0;
    return {s.transpose() * q.m * s, Order::Twistor};
}

cd discriminant(const Quadric& q, const SpherePoint& p)
{
    return fiber_coefficients(q, p).discriminant();
}

cd diagonal_discriminant(double lambda, double mu, double nu, cd z1, cd z2)
{
    const cd c1 = std::exp(cd(lambda, nu)), c2 = std::exp(cd(-lambda, nu));
    const cd c3 = std::exp(cd(mu, -nu)), c4 = std::exp(cd(-mu, -nu));
    const cd b = -c3 * z1 * std::conj(z2) + c4 * std::conj(z1) * z2;
    const cd a = c1 + c3 * z1 * z1 + c4 * z2 * z2;
    const cd c = c2 + c3 * std::conj(z2) * std::conj(z2) + c4 * std::conj(z1) * std::conj(z1);
    return b * b - a * c;
}

bool contains_fiber(const Quadric& q, const SpherePoint& p, double tol)
{
    Quadric qt = to_order(q, Order::Twistor);
    FiberQuadratic f = p.infinite ? fiber_coefficients(invert_lift(qt), SpherePoint::finite(0.0, 0.0))
                                  : fiber_coefficients(qt, p);
    double scale = qt.m.norm() * (1.0 + (p.infinite ? 0.0 : p.norm2()));
    double m = std::max({std::abs(f.a), std::abs(f.b), std::abs(f.c)});
    return m <= tol * scale;
}

const char* to_string(LineKind kind)
{
    switch (kind) {
    case LineKind::CircleFamily: return "CircleFamily";
    case LineKind::NoLines: return "NoLines";
    case LineKind::Lines: return "Lines";
    }
    return "?";
}

const char* to_string(LocusClass cls)
{
    switch (cls) {
    case LocusClass::Circle: return "Circle";
    case LocusClass::CliffordTorus: return "CliffordTorus";
    case LocusClass::SmoothUnknottedTorus: return "SmoothUnknottedTorus";
    case LocusClass::PinchedTorusTwoPoints: return "PinchedTorusTwoPoints";
    case LocusClass::PinchedTorusOnePoint: return "PinchedTorusOnePoint";
    }
    return "?";
}

LineReport classify_lines(const CanonicalForm& c)
{
    LineReport r;
    if (c.kind == Kind::NonDiagonalizable) {
        r.kind = LineKind::Lines;
        r.points = {SpherePoint::infinity()};
    } else if (near_zero(c.lambda) && near_zero(c.mu) && near_zero(c.nu)) {
        r.kind = LineKind::CircleFamily;
    } else if (near_zero(c.lambda - c.mu) && near_zero(c.nu)) {
        r.kind = LineKind::Lines;
        r.points = {SpherePoint::finite(I_, 0.0), SpherePoint::finite(-I_, 0.0)};
    }
    return r;
}

LocusReport classify_locus(const CanonicalForm& c)
{
    LocusReport r;
    if (c.kind == Kind::NonDiagonalizable) {
        r.cls = LocusClass::PinchedTorusOnePoint;
        r.pinch_points = {SpherePoint::infinity()};
    } else if (near_zero(c.lambda) && near_zero(c.mu)) {
        if (near_zero(c.nu)) {
            r.cls = LocusClass::Circle;
        } else {
            r.cls = LocusClass::CliffordTorus;
            r.y_radius2 = 0.5 * (1.0 + std::cos(2.0 * c.nu));
            r.x_radius2 = 0.5 * (1.0 - std::cos(2.0 * c.nu));
        }
    } else if (near_zero(c.lambda - c.mu) && near_zero(c.nu)) {
        r.cls = LocusClass::PinchedTorusTwoPoints;
        r.pinch_points = {SpherePoint::finite(I_, 0.0), SpherePoint::finite(-I_, 0.0)};
    } else {
        r.cls = LocusClass::SmoothUnknottedTorus;
    }
    return r;
}

LocusReport source_locus(const CanonicalForm& c)
{
    LocusReport r = classify_locus(c);
    r.pinch_points = push(r.pinch_points, c);
    return r;
}

LineReport source_lines(const CanonicalForm& c)
{
    LineReport r = classify_lines(c);
    r.points = push(r.points, c);
    return r;
}

RVec3 pinch_system_residual(double lambda, double mu, double nu, double x, double y)
{
    const double sh = std::sinh(lambda - mu), ch = std::cosh(lambda - mu);
    const double c2 = std::cos(2.0 * nu), s2 = std::sin(2.0 * nu);
    const double r2 = x * x + y * y;
    return {sh * c2 * (x * x - y * y) + 2.0 * ch * s2 * x * y + sh * ch,
            2.0 * ch * (x * x - y * y) + c2 * (1.0 + r2 * r2),
            -4.0 * sh * x * y + s2 * (1.0 - r2 * r2)};
}

}  // namespace twistorq::twistor
