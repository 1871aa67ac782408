#include "oracles.hpp"

#include "twistorq/canonical.hpp"
#include "twistorq/quatlin.hpp"
#include "twistorq/twistor.hpp"

#include <doctest.h>

using namespace twistorq;
using namespace twistorq::twistor;
using canonical::CanonicalForm;

namespace {

Quadric twistor_form(const Mat4& block) { return to_order({block, Order::Block}, Order::Twistor); }

Mat4 random_symmetric(std::mt19937_64& rng)
{
    std::normal_distribution<double> n01;
    Mat4 m;
    for (int i = 0; i < 4; ++i)
        for (int j = i; j < 4; ++j)
            m(i, j) = m(j, i) = cd(n01(rng), n01(rng));
    return m;
}

}  // namespace

TEST_CASE("fiber coefficients reproduce the form on every fiber point")
{
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n01;
    for (int i = 0; i < 100; ++i) {
        Quadric q{random_symmetric(rng), Order::Twistor};
        cd z1(n01(rng), n01(rng)), z2(n01(rng), n01(rng));
        cd x0(n01(rng), n01(rng)), x1(n01(rng), n01(rng));
        FiberQuadratic f = fiber_coefficients(q, SpherePoint::finite(z1, z2));
        cd direct = oracle::form(q.m, oracle::fiber_point(z1, z2, x0, x1));
        cd poly = f.a * x0 * x0 + 2.0 * f.b * x0 * x1 + f.c * x1 * x1;
        CHECK(std::abs(direct - poly) < 1e-12 * (1.0 + std::abs(direct)));
        cd d = discriminant(q, SpherePoint::finite(z1, z2));
        cd ds = oracle::sampled_discriminant(q.m, z1, z2);
        CHECK(std::abs(d - ds) < 1e-12 * (1.0 + std::abs(ds)));
    }
}

TEST_CASE("fiber coefficients reject block order and infinity")
{
    Quadric qb{canonical::q0(), Order::Block};
    CHECK_THROWS_AS(fiber_coefficients(qb, SpherePoint::finite(0.0, 0.0)), Error);
    try {
        fiber_coefficients(to_order(qb, Order::Twistor), SpherePoint::infinity());
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InfinityBasepoint);
    }
}

TEST_CASE("real quadric coefficients and discriminant")
{
    Quadric q = twistor_form(canonical::q0());
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n01;
    for (int i = 0; i < 50; ++i) {
        cd z1(n01(rng), n01(rng)), z2(n01(rng), n01(rng));
        FiberQuadratic f = fiber_coefficients(q, SpherePoint::finite(z1, z2));
        CHECK(std::abs(f.a + 2.0 * z2) < 1e-14);
        CHECK(std::abs(2.0 * f.b - 2.0 * (z1 - std::conj(z1))) < 1e-14);
        CHECK(std::abs(f.c + 2.0 * std::conj(z2)) < 1e-14);
        double ref = -4.0 * (z1.imag() * z1.imag() + std::norm(z2));
        CHECK(std::abs(discriminant(q, SpherePoint::finite(z1, z2)) - ref) <= 1e-12 * std::abs(ref));
    }
}

TEST_CASE("non-diagonalizable coefficients")
{
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n01;
    for (double k : {0.0, 0.3, 0.9}) {
        Quadric q = twistor_form(canonical::nondiagonal_form(k));
        cd z1(n01(rng), n01(rng)), z2(n01(rng), n01(rng));
        FiberQuadratic f = fiber_coefficients(q, SpherePoint::finite(z1, z2));
        // The literal xi12^2 coefficient is twice i + k conj(z1) - conj(z2).
        CHECK(std::abs(f.c - 2.0 * (I_ + k * std::conj(z1) - std::conj(z2))) < 1e-13);
        CHECK(std::abs(f.a - 2.0 * (I_ - k * z1 - z2)) < 1e-13);
    }
}

TEST_CASE("diagonal closed form agrees with substitution")
{
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n01;
    std::uniform_real_distribution<double> u(0.0, 1.5);
    for (int i = 0; i < 100; ++i) {
        const double l = u(rng), m = u(rng), n = u(rng);
        cd z1(n01(rng), n01(rng)), z2(n01(rng), n01(rng));
        cd closed = diagonal_discriminant(l, m, n, z1, z2);
        cd sampled = oracle::sampled_discriminant(twistor_form(canonical::diagonal_form(l, m, n)).m, z1, z2);
        CHECK(std::abs(closed - sampled) < 1e-12 * (1.0 + std::abs(sampled)));
    }
}

TEST_CASE("Clifford torus lies in the discriminant locus")
{
    const double nu = 0.37;
    const double y2 = 0.5 * (1.0 + std::cos(2 * nu));
    for (int i = 0; i < 40; ++i) {
        const double a = 0.3 + i * 0.17, b = 1.1 - i * 0.23;
        cd z1(std::sqrt(1 - y2) * std::cos(a), std::sqrt(y2) * std::cos(b));
        cd z2(std::sqrt(1 - y2) * std::sin(a), std::sqrt(y2) * std::sin(b));
        CHECK(std::abs(diagonal_discriminant(0, 0, nu, z1, z2)) < 1e-12);
    }
    LocusReport r = classify_locus(CanonicalForm::diagonal(0, 0, kPi / 6));
    CHECK(r.cls == LocusClass::CliffordTorus);
    CHECK(std::abs(r.y_radius2 - 0.75) < 1e-15);
    CHECK(std::abs(r.x_radius2 - 0.25) < 1e-15);
}

TEST_CASE("inversion swaps the lift and is an involution")
{
    std::mt19937_64 rng(5);
    Quadric q{random_symmetric(rng), Order::Twistor};
    Quadric inv = invert_lift(q);
    CHECK((invert_lift(inv).m - q.m).norm() == 0.0);
    CHECK(inv.m(0, 0) == q.m(2, 2));
    CHECK(inv.m(1, 3) == q.m(3, 1));
    Quadric r = twistor_form(canonical::q0());
    CHECK(std::min((invert_lift(r).m - r.m).norm(), (invert_lift(r).m + r.m).norm()) < 1e-15);
}

TEST_CASE("twistor lines of the canonical forms")
{
    Quadric pinched = twistor_form(canonical::diagonal_form(0.5, 0.5, 0));
    CHECK(contains_fiber(pinched, SpherePoint::finite(I_, 0.0)));
    CHECK(contains_fiber(pinched, SpherePoint::finite(-I_, 0.0)));
    Quadric nd = twistor_form(canonical::nondiagonal_form(0.3));
    CHECK(contains_fiber(nd, SpherePoint::infinity()));
    CHECK_FALSE(contains_fiber(nd, SpherePoint::finite(0.0, 0.0)));

    Quadric generic = twistor_form(canonical::diagonal_form(0.3, 0.7, 0.4));
    std::mt19937_64 rng(6);
    std::normal_distribution<double> n01;
    for (int i = 0; i < 50; ++i)
        CHECK_FALSE(contains_fiber(generic, SpherePoint::finite({n01(rng), n01(rng)}, {n01(rng), n01(rng)})));

    CHECK(classify_lines(CanonicalForm::diagonal(0, 0, 0)).kind == LineKind::CircleFamily);
    auto two = classify_lines(CanonicalForm::diagonal(0.5, 0.5, 0));
    REQUIRE(two.kind == LineKind::Lines);
    REQUIRE(two.points.size() == 2);
    for (const auto& p : two.points) {
        CHECK(std::abs(std::abs(p.z1.imag()) - 1.0) < 1e-15);
        CHECK(contains_fiber(pinched, p));
    }
    auto one = classify_lines(CanonicalForm::nondiagonal(0.3));
    REQUIRE(one.points.size() == 1);
    CHECK(one.points[0].infinite);
    CHECK(classify_lines(CanonicalForm::diagonal(0.3, 0.7, 0.4)).kind == LineKind::NoLines);
    CHECK(classify_lines(CanonicalForm::diagonal(0, 0, kPi / 6)).kind == LineKind::NoLines);
}

TEST_CASE("locus classes")
{
    CHECK(classify_locus(CanonicalForm::diagonal(0, 0, 0)).cls == LocusClass::Circle);
    CHECK(classify_locus(CanonicalForm::diagonal(0.3, 0.7, 0.4)).cls == LocusClass::SmoothUnknottedTorus);
    CHECK(classify_locus(CanonicalForm::diagonal(0.0, 0.7, 0.0)).cls == LocusClass::SmoothUnknottedTorus);
    auto p = classify_locus(CanonicalForm::diagonal(0.5, 0.5, 0));
    CHECK(p.cls == LocusClass::PinchedTorusTwoPoints);
    REQUIRE(p.pinch_points.size() == 2);
    auto nd = classify_locus(CanonicalForm::nondiagonal(0.0));
    CHECK(nd.cls == LocusClass::PinchedTorusOnePoint);
    REQUIRE(nd.pinch_points.size() == 1);
    CHECK(nd.pinch_points[0].infinite);
}

TEST_CASE("gradient system vanishes only at the pinch points")
{
    for (double l : {0.2, 0.5, 1.1})
        for (double y : {1.0, -1.0})
            CHECK(pinch_system_residual(l, l, 0.0, 0.0, y).norm() < 1e-10);
    // No solution for lambda < mu: the residual stays away from zero on a grid.
    for (auto [l, m, n] : {std::array<double, 3>{0.1, 0.6, 0.0}, {0.3, 0.7, 0.4}, {0.0, 1.0, 1.2}}) {
        double best = 1e300;
        for (int i = 0; i < 100; ++i)
            for (int j = 0; j < 100; ++j) {
                const double x = -2.0 + 4.0 * i / 99.0, y = -2.0 + 4.0 * j / 99.0;
                best = std::min(best, pinch_system_residual(l, m, n, x, y).norm());
            }
        CHECK(best > 1e-2);
    }
}

TEST_CASE("source reports follow the witness")
{
    std::mt19937_64 rng(7);
    auto t = quatlin::random_sl2h(rng, Order::Block);
    Quadric q{t.g.transpose() * canonical::diagonal_form(0.5, 0.5, 0) * t.g, Order::Block};
    CanonicalForm c = canonical::canonicalize(q);
    auto lines = source_lines(c);
    REQUIRE(lines.points.size() == 2);
    for (const auto& p : lines.points)
        CHECK(contains_fiber(q, p, 1e-8));
    auto locus = source_locus(c);
    REQUIRE(locus.pinch_points.size() == 2);
    for (const auto& p : locus.pinch_points)
        CHECK(std::abs(discriminant(to_order(q, Order::Twistor), p)) < 1e-8);
}
