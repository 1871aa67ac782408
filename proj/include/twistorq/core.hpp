#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace twistorq {

using cd = std::complex<double>;
using Mat4 = Eigen::Matrix<cd, 4, 4>;
using Mat2 = Eigen::Matrix<cd, 2, 2>;
using Vec4 = Eigen::Matrix<cd, 4, 1>;
using RMat2 = Eigen::Matrix2d;
using RMat3 = Eigen::Matrix3d;
using RMat4 = Eigen::Matrix4d;
using RVec3 = Eigen::Vector3d;
using RVec4 = Eigen::Vector4d;

inline constexpr cd I_{0.0, 1.0};
inline constexpr double kPi = 3.14159265358979323846;

// Twistor = (xi0, xi12, W1, W2); Block = (xi0, W1, xi12, W2).
enum class Order { Twistor, Block };

const char* to_string(Order order);

enum class ErrorKind {
    OrderMismatch,
    NotInGroup,
    Precondition,
    RankDeficient,
    MalformedInput,
    NumericalBreakdown,
    InfinityBasepoint,
    SingularPoint,
    OnDiscriminant,
    PathBlocked,
    ChartBreakdown,
    NuZero,
    ResolutionTooLow,
    Parse,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct Tolerances {
    double structural = 1e-10;  // symmetry, reality, GL(2,H) membership
    double rank = 1e-9;         // |det| of unit-normalized matrices
};

// Process-wide defaults, overridable through TWISTORQ_TOL ("1e-9" sets the
// structural tolerance; "structural=1e-9,rank=1e-8" sets either).
const Tolerances& tolerances();
Tolerances parse_tolerances(const std::string& spec, Tolerances base = {});

struct Quadric {
    Mat4 m = Mat4::Zero();
    Order order = Order::Block;
};

// Permutation swapping the second and third coordinates; P = P^T = P^{-1}.
const Mat4& perm_p();

Mat4 convert(const Mat4& m, Order from, Order to);
Quadric to_order(const Quadric& q, Order to);

double symmetry_residual(const Mat4& m);
double normalized_det(const Mat4& m);

}  // namespace twistorq
