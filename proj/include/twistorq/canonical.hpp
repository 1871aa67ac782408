#pragma once

#include "twistorq/core.hpp"
#include "twistorq/quatlin.hpp"

#include <vector>

namespace twistorq::canonical {

using quatlin::ConformalElement;

// Tolerance for deciding that a canonical parameter sits on a special stratum
// (lambda = mu, nu = 0, ...).
inline constexpr double kStratumTol = 1e-8;

// Standard matrices, all in Block order.
Mat4 q0();                                          // {0|K}
Mat4 f_matrix();                                    // F with F^T Q0 F = identity
Mat4 diagonal_form(double lambda, double mu, double nu);  // Q_{lambda,mu,nu}
Mat4 r_matrix(double v, double k);                  // R_{v,k}
Mat4 nondiagonal_form(double k, double v = 0.0);    // Q0 + i R_{v,k}
Mat4 can1_form(double x, double y, double u, double v);

// Residual symmetry generators H1..H4 with their scalar factor.
ConformalElement gamma_generator(int index);

struct RealPartNormalization {
    ConformalElement h;  // H^T Re(Q) H = Q0, gamma = 1
    Quadric form;        // H^T Q H
};

RealPartNormalization normalize_real_part(const Quadric& q);

struct LMNData {
    RMat2 l = RMat2::Zero();
    RMat2 m = RMat2::Zero();
    RMat2 n = RMat2::Zero();
    double v = 0.0;
    double residual = 0.0;
};

LMNData extract_lmnv(const Quadric& q);
Mat4 imag_from_lmnv(const LMNData& d);  // {L + iM | -vK + iN}
RMat3 x_matrix(const LMNData& d);
LMNData lmn_from_x(const RMat3& x, double v);

RMat3 lorentz_metric();
RMat3 mk_matrix(double k);

enum class SvdKind { Diagonal, NonDiagonal };

struct LorentzSVD {
    SvdKind kind = SvdKind::Diagonal;
    RMat3 p = RMat3::Identity();  // SO0(1,2)
    RMat3 o = RMat3::Identity();  // SO(3)
    RMat3 form = RMat3::Zero();   // P X O
    RVec3 diag = RVec3::Zero();
    double k = 0.0;
    int rank = 0;
    double residual = 0.0;        // distance of P X O from its normal form
};

LorentzSVD lorentz_svd(const RMat3& x);

// Matrices of L -> R^T L R and Lambda -> U^T Lambda U in the (x,y,z) and
// (l,m,n) coordinates. Under G = {aR|bR}, X -> pi1(R) X pi2(U)^T.
RMat3 pi1(const RMat2& r);
RMat3 pi2(const Mat2& u);
RMat2 lift_so12(const RMat3& p);
Mat2 lift_so3(const RMat3& o);
ConformalElement stabilizer_element(const RMat2& r, cd a, cd b);

enum class Kind { Diagonal, NonDiagonalizable };

struct CanonicalForm {
    Kind kind = Kind::Diagonal;
    double lambda = 0.0;
    double mu = 0.0;
    double nu = 0.0;
    double k = 0.0;
    ConformalElement witness;  // Block order: gamma W^T Q W = matrix()
    double residual = 0.0;
    std::vector<int> word;     // symmetry generators applied, in order

    Mat4 matrix() const;
    static CanonicalForm diagonal(double lambda, double mu, double nu);
    static CanonicalForm nondiagonal(double k);
};

struct Reduction {
    double lambda = 0.0;
    double mu = 0.0;
    double nu = 0.0;
    ConformalElement t;
    std::vector<int> word;
};

Reduction reduce_to_fundamental(double lambda, double mu, double nu);

CanonicalForm canonicalize(const Quadric& q);

struct Invariants {
    double p = 0.0;
    double q = 0.0;
    double d = 0.0;
    double v = 0.0;
};

Invariants invariants(const CanonicalForm& c);
Invariants invariants(const Quadric& q);

}  // namespace twistorq::canonical
