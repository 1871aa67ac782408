#pragma once

#include "twistorq/core.hpp"

#include <random>

namespace twistorq::quatlin {

// 2x2 block K = [[0,-1],[1,0]].
Mat2 kmat();

// The reality matrix: {0|-I} in Block order, blockdiag(K,K) in Twistor order.
Mat4 jmat(Order order);

// {A|B} = [[A, B], [-conj(B), conj(A)]] (Block order).
Mat4 block(const Mat2& a, const Mat2& b);

struct GL2HCheck {
    bool ok;
    double residual;
};

// Residual ||G J - J conj(G)|| on the unit-normalized matrix.
GL2HCheck is_gl2h(const Mat4& g, Order order, double tol = tolerances().structural);

struct RealityParts {
    Quadric real;
    Quadric imag;
};

RealityParts reality_decompose(const Quadric& q);
bool is_real(const Quadric& q, double tol = tolerances().structural);

// q = z1 + j z2, stored as the complex pair (z1, z2).
struct Quaternion {
    cd z1{0.0, 0.0};
    cd z2{0.0, 0.0};

    Quaternion operator+(const Quaternion& o) const { return {z1 + o.z1, z2 + o.z2}; }
    Quaternion operator*(const Quaternion& o) const;
    Quaternion conj() const { return {std::conj(z1), -z2}; }
    double norm2() const { return std::norm(z1) + std::norm(z2); }
    Quaternion inverse() const;
};

// Quaternion acting by left multiplication through a 2x2 block
// [[c1, c2], [-conj(c2), conj(c1)]]; the quaternion is the first column.
Quaternion from_block(const Mat2& b);
Mat2 to_block(const Quaternion& q);

struct SpherePoint {
    bool infinite = false;
    cd z1{0.0, 0.0};
    cd z2{0.0, 0.0};

    static SpherePoint finite(cd a, cd b) { return {false, a, b}; }
    static SpherePoint infinity() { return {true, {}, {}}; }
    static SpherePoint from_real(const RVec4& x);
    RVec4 real() const;  // (x1, y1, x2, y2)
    double norm2() const { return std::norm(z1) + std::norm(z2); }
};

struct ConformalElement {
    Mat4 g = Mat4::Identity();
    cd gamma{1.0, 0.0};
    Order order = Order::Block;

    double magnitude() const { return std::abs(gamma); }
    cd phase() const { return gamma / std::abs(gamma); }
};

ConformalElement identity(Order order);
ConformalElement converted(const ConformalElement& t, Order to);
// compose(a, b) acts as a followed by b.
ConformalElement compose(const ConformalElement& a, const ConformalElement& b);
ConformalElement inverse(const ConformalElement& t);

Quadric act_on_form(const Quadric& q, const ConformalElement& t);

// Quaternionic Moebius action q -> (c + d q)(a + b q)^{-1}.
SpherePoint act_on_sphere(const ConformalElement& t, const SpherePoint& p);

// Twistor projection of a point of C^4 given in Twistor order.
SpherePoint project(const Vec4& v);

// Element of SL(2,H) with Gaussian quaternion blocks; rejection keeps cond < max_cond.
ConformalElement random_sl2h(std::mt19937_64& rng, Order order, double max_cond = 30.0);

// min over unit phases of ||a/|a| - e^{it} b/|b|||_F.
double projective_distance(const Mat4& a, const Mat4& b);

}  // namespace twistorq::quatlin
