#include "twistorq/core.hpp"

#include <cstdlib>
#include <sstream>

namespace twistorq {

const char* to_string(Order order)
{
    return order == Order::Twistor ? "twistor" : "block";
}

const char* to_string(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::OrderMismatch: return "OrderMismatch";
    case ErrorKind::NotInGroup: return "NotInGroup";
    case ErrorKind::Precondition: return "Precondition";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::MalformedInput: return "MalformedInput";
    case ErrorKind::NumericalBreakdown: return "NumericalBreakdown";
    case ErrorKind::InfinityBasepoint: return "InfinityBasepoint";
    case ErrorKind::SingularPoint: return "SingularPoint";
    case ErrorKind::OnDiscriminant: return "OnDiscriminant";
    case ErrorKind::PathBlocked: return "PathBlocked";
    case ErrorKind::ChartBreakdown: return "ChartBreakdown";
    case ErrorKind::NuZero: return "NuZero";
    case ErrorKind::ResolutionTooLow: return "ResolutionTooLow";
    case ErrorKind::Parse: return "Parse";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind)
{
}

Tolerances parse_tolerances(const std::string& spec, Tolerances base)
{
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto eq = item.find('=');
        try {
            if (eq == std::string::npos) {
                base.structural = std::stod(item);
                continue;
            }
            std::string key = item.substr(0, eq);
            double value = std::stod(item.substr(eq + 1));
            if (key == "structural")
                base.structural = value;
            else if (key == "rank")
                base.rank = value;
            else
                throw Error(ErrorKind::Parse, "unknown tolerance key '" + key + "'");
        } catch (const std::logic_error&) {
            throw Error(ErrorKind::Parse, "bad tolerance entry '" + item + "'");
        }
    }
    if (!(base.structural > 0) || !(base.rank > 0))
        throw Error(ErrorKind::Parse, "tolerances must be positive");
    return base;
}

const Tolerances& tolerances()
{
    static const Tolerances tol = [] {
        const char* env = std::getenv("TWISTORQ_TOL");
        return env ? parse_tolerances(env) : Tolerances{};
    }();
    return tol;
}

const Mat4& perm_p()
{
    static const Mat4 p = [] {
        Mat4 m = Mat4::Zero();
        m(0, 0) = 1;
        m(1, 2) = 1;
        m(2, 1) = 1;
        m(3, 3) = 1;
        return m;
    }();
    return p;
}

Mat4 convert(const Mat4& m, Order from, Order to)
{
    if (from == to)
        return m;
    return perm_p() * m * perm_p();
}

Quadric to_order(const Quadric& q, Order to)
{
    return {convert(q.m, q.order, to), to};
}

double symmetry_residual(const Mat4& m)
{
    double n = m.norm();
    return n == 0 ? 0.0 : (m - m.transpose()).norm() / n;
}

double normalized_det(const Mat4& m)
{
    double n = m.norm();
    return n == 0 ? 0.0 : std::abs((m / n).determinant());
}

}  // namespace twistorq
