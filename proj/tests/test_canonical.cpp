#include "oracles.hpp"

#include "twistorq/canonical.hpp"
#include "twistorq/quatlin.hpp"

#include <doctest.h>

using namespace twistorq;
using namespace twistorq::canonical;

namespace {

Quadric random_conjugate(const Mat4& c, std::mt19937_64& rng)
{
    auto t = quatlin::random_sl2h(rng, Order::Block);
    std::uniform_real_distribution<double> ph(0.0, 2 * kPi);
    return {std::exp(I_ * ph(rng)) * t.g.transpose() * c * t.g, Order::Block};
}

double witness_residual(const Quadric& q, const CanonicalForm& c)
{
    Mat4 w = convert(c.witness.g, c.witness.order, Order::Block);
    Mat4 qb = convert(q.m, q.order, Order::Block);
    return (c.witness.gamma * w.transpose() * qb * w - c.matrix()).norm();
}

RMat2 random_sl2r(std::mt19937_64& rng)
{
    std::normal_distribution<double> n01;
    RMat2 r;
    do
        r << n01(rng), n01(rng), n01(rng), n01(rng);
    while (r.determinant() < 0.2);
    return r / std::sqrt(r.determinant());
}

Mat2 random_su2(std::mt19937_64& rng)
{
    std::normal_distribution<double> n01;
    Eigen::Vector4d a(n01(rng), n01(rng), n01(rng), n01(rng));
    a.normalize();
    Mat2 u;
    u << cd(a(0), a(1)), cd(a(2), a(3)), -cd(a(2), -a(3)), cd(a(0), -a(1));
    return u;
}

}  // namespace

TEST_CASE("standard matrices")
{
    Mat4 f = f_matrix();
    CHECK((f.transpose() * q0() * f - Mat4::Identity()).norm() < 1e-14);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-2, 2);
    for (int i = 0; i < 20; ++i) {
        Mat4 q = diagonal_form(u(rng), u(rng), u(rng));
        CHECK(std::abs(q.determinant() - 1.0) < 1e-12);
        CHECK(symmetry_residual(q) < 1e-15);
    }
    for (double v : {-1.0, 0.0, 0.7})
        for (double k : {0.0, 0.3, 1.5}) {
            cd s = k * k + (v + I_) * (v + I_);
            CHECK(std::abs(nondiagonal_form(k, v).determinant() - s * s) < 1e-12);
        }
}

TEST_CASE("double covers lift back to the group")
{
    std::mt19937_64 rng(2);
    const RMat3 e = lorentz_metric();
    for (int i = 0; i < 50; ++i) {
        RMat2 r = random_sl2r(rng);
        RMat3 p = pi1(r);
        CHECK((p.transpose() * e * p - e).norm() < 1e-9 * p.squaredNorm());
        CHECK(p(0, 0) > 0);
        RMat2 l = lift_so12(p);
        CHECK(std::min((l - r).norm(), (l + r).norm()) < 1e-8 * r.norm());

        Mat2 uu = random_su2(rng);
        RMat3 o = pi2(uu);
        CHECK((o.transpose() * o - RMat3::Identity()).norm() < 1e-12);
        CHECK(o.determinant() > 0);
        Mat2 lu = lift_so3(o);
        CHECK(std::min((lu - uu).norm(), (lu + uu).norm()) < 1e-10);
    }
    RMat3 reflect = RVec3(1.0, 1.0, -1.0).asDiagonal();
    CHECK_THROWS_AS(lift_so12(reflect), Error);
    CHECK_THROWS_AS(lift_so3(reflect), Error);
}

TEST_CASE("stabilizer elements move X by the double covers")
{
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n01;
    LMNData d;
    d.l << n01(rng), n01(rng), 0, n01(rng);
    d.m << n01(rng), n01(rng), 0, n01(rng);
    d.n << n01(rng), n01(rng), 0, n01(rng);
    d.l(1, 0) = d.l(0, 1);
    d.m(1, 0) = d.m(0, 1);
    d.n(1, 0) = d.n(0, 1);
    d.v = 0.3;
    Quadric q{q0() + I_ * imag_from_lmnv(d), Order::Block};
    RMat2 r = random_sl2r(rng);
    Mat2 uu = random_su2(rng);
    auto g = stabilizer_element(r, uu(0, 0), uu(0, 1));
    Quadric moved = quatlin::act_on_form(q, g);
    LMNData d2 = extract_lmnv(moved);
    CHECK(std::abs(d2.v - d.v) < 1e-12);
    CHECK((x_matrix(d2) - pi1(r) * x_matrix(d) * pi2(uu).transpose()).norm() < 1e-10);
}

TEST_CASE("Lorentz SVD reaches a normal form")
{
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n01;
    const RMat3 e = lorentz_metric();
    for (int i = 0; i < 50; ++i) {
        RMat3 x;
        for (int k = 0; k < 9; ++k)
            x(k) = n01(rng);
        auto s = lorentz_svd(x);
        if (s.kind == SvdKind::Diagonal)
            CHECK(s.residual < 1e-8 * x.norm());
        CHECK((s.p.transpose() * e * s.p - e).norm() < 1e-8 * s.p.squaredNorm());
        CHECK((s.o.transpose() * s.o - RMat3::Identity()).norm() < 1e-10);
        CHECK((s.p * x * s.o - s.form).norm() < 1e-8 * s.p.norm() * x.norm());
    }
    // A Lorentz-null column forces the non-diagonal normal form.
    const double k = 0.4;
    RMat3 x = pi1(random_sl2r(rng)) * mk_matrix(k) * pi2(random_su2(rng));
    auto s = lorentz_svd(x);
    CHECK(s.kind == SvdKind::NonDiagonal);
    CHECK(std::abs(s.k - k) < 1e-8);
}

TEST_CASE("symmetry generators are exact identities on the diagonal family")
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (int i = 0; i < 50; ++i) {
        const double l = u(rng), m = u(rng), n = u(rng);
        Quadric q{diagonal_form(l, m, n), Order::Block};
        auto act = [&](int g) { return quatlin::act_on_form(q, gamma_generator(g)).m; };
        CHECK((act(1) - diagonal_form(l, m, n + kPi / 2)).norm() < 1e-12);
        CHECK((act(2) - diagonal_form(-l, m, n)).norm() < 1e-12);
        CHECK((act(3) - diagonal_form(-l, -m, n)).norm() < 1e-12);
        CHECK((act(4) - diagonal_form(m, l, -n)).norm() < 1e-12);
        for (int g = 1; g <= 4; ++g)
            CHECK(quatlin::is_gl2h(gamma_generator(g).g, Order::Block).ok);
    }
}

TEST_CASE("reduction lands in the fundamental domain with a valid word")
{
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(-2.0, 2.0), w(-7.0, 7.0);
    for (int i = 0; i < 200; ++i) {
        const double l = u(rng), m = u(rng), n = w(rng);
        Reduction r = reduce_to_fundamental(l, m, n);
        CHECK(r.lambda >= 0);
        CHECK(r.lambda <= r.mu);
        CHECK(r.nu >= 0);
        CHECK(r.nu < kPi / 2);
        Quadric moved = quatlin::act_on_form({diagonal_form(l, m, n), Order::Block}, r.t);
        CHECK((moved.m - diagonal_form(r.lambda, r.mu, r.nu)).norm() < 1e-9);
    }
    Reduction tie = reduce_to_fundamental(0.4, 0.4, 1.2);
    CHECK(tie.nu <= kPi / 4 + 1e-12);
    CHECK(std::abs(tie.nu - (kPi / 2 - 1.2)) < 1e-12);
}

TEST_CASE("named canonical forms")
{
    CanonicalForm id = canonicalize({Mat4::Identity(), Order::Block});
    CHECK(id.kind == Kind::Diagonal);
    CHECK(std::abs(id.lambda) + std::abs(id.mu) + std::abs(id.nu) < 1e-8);

    CanonicalForm real = canonicalize({q0(), Order::Block});
    CHECK(real.kind == Kind::Diagonal);
    CHECK(std::abs(real.lambda) + std::abs(real.mu) + std::abs(real.nu) < 1e-8);

    CanonicalForm nd = canonicalize({nondiagonal_form(0.25), Order::Block});
    CHECK(nd.kind == Kind::NonDiagonalizable);
    CHECK(std::abs(nd.k - 0.25) < 1e-8);
}

TEST_CASE("canonicalization recovers conjugated forms")
{
    std::mt19937_64 rng(7);
    const std::vector<std::array<double, 3>> triples = {
        {0.3, 0.7, 0.4}, {0.0, 0.0, 0.0}, {0.5, 0.5, 0.0}, {0.0, 0.0, kPi / 6}, {0.0, 1.2, 0.0}, {0.9, 0.9, 0.6}};
    for (const auto& t : triples) {
        Quadric q = random_conjugate(diagonal_form(t[0], t[1], t[2]), rng);
        CanonicalForm c = canonicalize(q);
        CHECK(c.kind == Kind::Diagonal);
        CHECK(std::abs(c.lambda - t[0]) < 1e-6);
        CHECK(std::abs(c.mu - t[1]) < 1e-6);
        CHECK(std::abs(c.nu - t[2]) < 1e-6);
        CHECK(witness_residual(q, c) < 1e-6);
        CHECK(quatlin::is_gl2h(c.witness.g, c.witness.order, 1e-9).ok);
    }
    for (double k : {0.0, 0.3, 0.9}) {
        Quadric q = random_conjugate(nondiagonal_form(k), rng);
        Quadric qt = to_order(q, Order::Twistor);
        CanonicalForm c = canonicalize(qt);
        CHECK(c.kind == Kind::NonDiagonalizable);
        CHECK(std::abs(c.k - k) < 1e-6);
        CHECK(witness_residual(qt, c) < 1e-6);
    }
}

TEST_CASE("invariants")
{
    Invariants z = invariants(CanonicalForm::diagonal(0, 0, 0));
    CHECK(std::abs(z.p) + std::abs(z.q) + std::abs(z.d) + std::abs(z.v) < 1e-12);
    for (double l : {0.2, 0.8}) {
        Invariants inv = invariants(CanonicalForm::diagonal(l, l, 0));
        CHECK(std::abs(inv.p + std::tanh(l) * std::tanh(l)) < 1e-12);
        CHECK(std::abs(inv.q) < 1e-12);
        CHECK(std::abs(inv.d) < 1e-12);
    }
    Invariants nd = invariants(CanonicalForm::nondiagonal(0.6));
    CHECK(std::abs(nd.p + 0.36) < 1e-12);
    CHECK(std::abs(nd.q) < 1e-12);
    CHECK(std::abs(nd.d) < 1e-12);

    std::mt19937_64 rng(8);
    Quadric base = random_conjugate(diagonal_form(0.3, 0.7, 0.4), rng);
    Invariants a = invariants(base);
    Invariants b = invariants(random_conjugate(base.m, rng));
    CHECK(std::abs(a.p - b.p) < 1e-8);
    CHECK(std::abs(a.q - b.q) < 1e-8);
    CHECK(std::abs(a.d - b.d) < 1e-8);
    CHECK(std::abs(a.v - b.v) < 1e-8);
}

TEST_CASE("malformed and degenerate input")
{
    Mat4 asym = Mat4::Identity();
    asym(0, 1) = 1.0;
    CHECK_THROWS_AS(canonicalize({asym, Order::Block}), Error);
    Mat4 rank3 = Mat4::Identity();
    rank3(3, 3) = 0.0;
    try {
        canonicalize({rank3, Order::Block});
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::RankDeficient);
    }
}

TEST_CASE("named examples of the pipeline stages")
{
    ConformalElement f{f_matrix(), 1.0, Order::Block};
    CHECK(quatlin::is_gl2h(f.g, Order::Block).ok);
    CHECK((quatlin::act_on_form({q0(), Order::Block}, f).m - Mat4::Identity()).norm() < 1e-14);

    auto r0 = normalize_real_part({q0(), Order::Block});
    CHECK((r0.form.m - q0()).norm() < 1e-10);
    auto ri = normalize_real_part({Mat4::Identity(), Order::Block});
    CHECK((quatlin::act_on_form({Mat4::Identity(), Order::Block}, ri.h).m - q0()).norm() < 1e-10);
    std::mt19937_64 rng(9);
    auto t = quatlin::random_sl2h(rng, Order::Block);
    Quadric conj{t.g.transpose() * q0() * t.g, Order::Block};
    auto rc = normalize_real_part(conj);
    CHECK((rc.form.m - q0()).norm() < 1e-9);
    CHECK(quatlin::is_gl2h(rc.h.g, Order::Block).ok);

    LMNData d = extract_lmnv({nondiagonal_form(0.5, 0.3), Order::Block});
    CHECK(std::abs(d.v - 0.3) < 1e-14);
    auto s = lorentz_svd(x_matrix(d));
    CHECK(s.kind == SvdKind::NonDiagonal);
    CHECK(std::abs(s.k - 0.5) < 1e-12);
    LMNData zero = extract_lmnv({q0(), Order::Block});
    CHECK(zero.l.norm() + zero.m.norm() + zero.n.norm() + std::abs(zero.v) == 0.0);
    CHECK(lorentz_svd(RMat3::Zero()).diag.norm() == 0.0);
    auto mk = lorentz_svd(mk_matrix(0.5));
    CHECK(mk.kind == SvdKind::NonDiagonal);
    CHECK(std::abs(mk.k - 0.5) < 1e-12);

    RMat2 id = lift_so12(RMat3::Identity());
    CHECK(std::min((id - RMat2::Identity()).norm(), (id + RMat2::Identity()).norm()) < 1e-12);
    const double tt = 0.35;
    RMat3 boost = RMat3::Identity();
    boost(0, 0) = boost(1, 1) = std::cosh(2 * tt);
    boost(0, 1) = boost(1, 0) = std::sinh(2 * tt);
    RMat2 r = lift_so12(boost);
    CHECK((pi1(r) - boost).norm() < 1e-12);
    CHECK(std::abs(std::abs(r(0, 0)) - std::exp(std::abs(tt))) * std::abs(std::abs(r(0, 0)) - std::exp(-std::abs(tt))) < 1e-12);
    CHECK(std::abs(r(0, 1)) + std::abs(r(1, 0)) < 1e-12);
    RMat3 rot = Eigen::AngleAxisd(0.8, RVec3::UnitZ()).toRotationMatrix();
    CHECK((pi2(lift_so3(rot)) - rot).norm() < 1e-12);

    CHECK((stabilizer_element(RMat2::Identity(), 1.0, 0.0).g - Mat4::Identity()).norm() < 1e-15);
    RMat2 rr;
    rr << 2.0, 1.0, 1.0, 1.0;
    auto g = stabilizer_element(rr, 1.0, 0.0);
    CHECK((quatlin::act_on_form({q0(), Order::Block}, g).m - q0()).norm() < 1e-14);
}
