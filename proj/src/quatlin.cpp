#include "twistorq/quatlin.hpp"

#include <cmath>

namespace twistorq::quatlin {

Mat2 kmat()
{
    Mat2 k;
    k << 0.0, -1.0, 1.0, 0.0;
    return k;
}

Mat4 block(const Mat2& a, const Mat2& b)
{
    Mat4 m;
    m.topLeftCorner<2, 2>() = a;
    m.topRightCorner<2, 2>() = b;
    m.bottomLeftCorner<2, 2>() = -b.conjugate();
    m.bottomRightCorner<2, 2>() = a.conjugate();
    return m;
}

Mat4 jmat(Order order)
{
    static const Mat4 jb = block(Mat2::Zero(), -Mat2::Identity());
    return order == Order::Block ? jb : convert(jb, Order::Block, Order::Twistor);
}

GL2HCheck is_gl2h(const Mat4& g, Order order, double tol)
{
    double n = g.norm();
    if (n == 0)
        return {false, 0.0};
    Mat4 gn = g / n;
    Mat4 j = jmat(order);
    double r = (gn * j - j * gn.conjugate()).norm();
    return {r <= tol, r};
}

RealityParts reality_decompose(const Quadric& q)
{
    Mat4 j = jmat(q.order);
    Mat4 t = j.transpose() * q.m.conjugate() * j;
    Quadric re{0.5 * (q.m + t), q.order};
    Quadric im{(q.m - t) / (2.0 * I_), q.order};
    return {re, im};
}

bool is_real(const Quadric& q, double tol)
{
    double n = q.m.norm();
    if (n == 0)
        return true;
    return reality_decompose(q).imag.m.norm() / n <= tol;
}

Quaternion Quaternion::operator*(const Quaternion& o) const
{
    return {z1 * o.z1 - std::conj(z2) * o.z2, std::conj(z1) * o.z2 + z2 * o.z1};
}

Quaternion Quaternion::inverse() const
{
    double n = norm2();
    Quaternion c = conj();
    return {c.z1 / n, c.z2 / n};
}

Quaternion from_block(const Mat2& b)
{
    return {b(0, 0), b(1, 0)};
}

Mat2 to_block(const Quaternion& q)
{
    Mat2 b;
    b << q.z1, -std::conj(q.z2), q.z2, std::conj(q.z1);
    return b;
}

SpherePoint SpherePoint::from_real(const RVec4& x)
{
    return finite({x(0), x(1)}, {x(2), x(3)});
}

RVec4 SpherePoint::real() const
{
    return {z1.real(), z1.imag(), z2.real(), z2.imag()};
}

ConformalElement identity(Order order)
{
    return {Mat4::Identity(), 1.0, order};
}

ConformalElement converted(const ConformalElement& t, Order to)
{
    return {convert(t.g, t.order, to), t.gamma, to};
}

ConformalElement compose(const ConformalElement& a, const ConformalElement& b)
{
    if (a.order != b.order)
        throw Error(ErrorKind::OrderMismatch, "compose: elements in different coordinate orders");
    return {a.g * b.g, a.gamma * b.gamma, a.order};
}

ConformalElement inverse(const ConformalElement& t)
{
    return {t.g.inverse(), 1.0 / t.gamma, t.order};
}

Quadric act_on_form(const Quadric& q, const ConformalElement& t)
{
    if (q.order != t.order)
        throw Error(ErrorKind::OrderMismatch, std::string("form is in ") + to_string(q.order) +
                                                  " order, element in " + to_string(t.order));
    return {t.gamma * t.g.transpose() * q.m * t.g, q.order};
}

namespace {

SpherePoint from_homogeneous(const Quaternion& q1, const Quaternion& q2)
{
    if (q1.norm2() <= 1e-28 * q2.norm2())
        return SpherePoint::infinity();
    Quaternion q = q2 * q1.inverse();
    return SpherePoint::finite(q.z1, q.z2);
}

}  // namespace

SpherePoint act_on_sphere(const ConformalElement& t, const SpherePoint& p)
{
    Mat4 g = convert(t.g, t.order, Order::Twistor);
    Quaternion a = from_block(g.topLeftCorner<2, 2>());
    Quaternion b = from_block(g.topRightCorner<2, 2>());
    Quaternion c = from_block(g.bottomLeftCorner<2, 2>());
    Quaternion d = from_block(g.bottomRightCorner<2, 2>());
    if (p.infinite)
        return from_homogeneous(b, d);
    Quaternion q{p.z1, p.z2};
    return from_homogeneous(a + b * q, c + d * q);
}

SpherePoint project(const Vec4& v)
{
    return from_homogeneous({v(0), v(1)}, {v(2), v(3)});
}

ConformalElement random_sl2h(std::mt19937_64& rng, Order order, double max_cond)
{
    std::normal_distribution<double> n01;
    for (;;) {
        Mat2 a, b;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                a(i, j) = {n01(rng), n01(rng)};
                b(i, j) = {n01(rng), n01(rng)};
            }
        Mat4 g = block(a, b);
        Eigen::JacobiSVD<Mat4> svd(g);
        auto s = svd.singularValues();
        if (s(3) <= 0 || s(0) / s(3) > max_cond)
            continue;
        double det = g.determinant().real();
        g /= std::pow(det, 0.25);
        return {convert(g, Order::Block, order), 1.0, order};
    }
}

double projective_distance(const Mat4& a, const Mat4& b)
{
    double na = a.norm(), nb = b.norm();
    if (na == 0 || nb == 0)
        return na == nb ? 0.0 : std::sqrt(2.0);
    cd inner = (b.adjoint() * a).trace() / (na * nb);
    return std::sqrt(std::max(0.0, 2.0 - 2.0 * std::abs(inner)));
}

}  // namespace twistorq::quatlin
