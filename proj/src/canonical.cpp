#include "twistorq/canonical.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace twistorq::canonical {

using quatlin::block;
using quatlin::kmat;

namespace {

constexpr double kSvdRankRtol = 1e-7;
constexpr double kNullRtol = 1e-8;
constexpr double kGroupTol = 1e-8;
constexpr double kBreakdown = 1e-6;
constexpr int kPhaseGrid = 64;
constexpr int kPhaseRefine = 20;
constexpr int kPolishIters = 25;

const Mat2 kI2 = Mat2::Identity();

RVec3 vsym(const RMat2& s)
{
    return {0.5 * (s(0, 0) + s(1, 1)), 0.5 * (s(0, 0) - s(1, 1)), s(0, 1)};
}

RMat2 unvsym(const RVec3& c)
{
    RMat2 s;
    s << c(0) + c(1), c(2), c(2), c(0) - c(1);
    return s;
}

Mat2 lam(const RVec3& w)
{
    Mat2 l;
    l << cd(w(0), w(1)), cd(0, w(2)), cd(0, w(2)), cd(w(0), -w(1));
    return l;
}

RVec3 wof(const Mat2& l)
{
    return {(0.5 * (l(0, 0) + l(1, 1))).real(), (0.5 * (l(0, 0) - l(1, 1))).imag(), l(0, 1).imag()};
}

double lnorm(const RVec3& c)
{
    return c(0) * c(0) - c(1) * c(1) - c(2) * c(2);
}

double ldot(const RVec3& a, const RVec3& b)
{
    return a(0) * b(0) - a(1) * b(1) - a(2) * b(2);
}

RVec3 lcross(const RVec3& u, const RVec3& w)
{
    return lorentz_metric() * u.cross(w);
}

Mat4 real_part(const Mat4& m)
{
    return quatlin::reality_decompose({m, Order::Block}).real.m;
}

Mat4 imag_part(const Mat4& m)
{
    return quatlin::reality_decompose({m, Order::Block}).imag.m;
}

double real_det(const Mat4& m)
{
    return std::abs(real_part(m).determinant());
}

// Quadratic map pi composed with a linear parametrization make(r), r in R^4.
// Recovers the rank-one matrix r r^T from the monomial values and reads r
// off its largest column.
template <class Make, class Pi>
RVec4 quad_lift(const Make& make, const Pi& pi, const RMat3& target,
                const Eigen::Matrix<double, 10, 1>& constraint)
{
    Eigen::Matrix<double, 10, 10> a;
    Eigen::Matrix<double, 10, 1> b;
    int col = 0;
    for (int i = 0; i < 4; ++i)
        for (int j = i; j < 4; ++j, ++col) {
            RMat3 v;
            if (i == j) {
                v = pi(make(RVec4::Unit(i)));
            } else {
                v = pi(make(RVec4::Unit(i) + RVec4::Unit(j))) - pi(make(RVec4::Unit(i))) -
                    pi(make(RVec4::Unit(j)));
            }
            a.block<9, 1>(0, col) = Eigen::Map<const Eigen::Matrix<double, 9, 1>>(v.data());
        }
    a.row(9) = constraint.transpose();
    b.head<9>() = Eigen::Map<const Eigen::Matrix<double, 9, 1>>(target.data());
    b(9) = 1.0;
    Eigen::Matrix<double, 10, 1> mono = a.completeOrthogonalDecomposition().solve(b);

    RMat4 m;
    col = 0;
    for (int i = 0; i < 4; ++i)
        for (int j = i; j < 4; ++j, ++col)
            m(i, j) = m(j, i) = mono(col);
    int k;
    m.diagonal().maxCoeff(&k);
    if (!(m(k, k) > 0))
        throw Error(ErrorKind::NotInGroup, "lift failed: no positive pivot");
    return m.col(k) / std::sqrt(m(k, k));
}

RMat2 make_r(const RVec4& r)
{
    RMat2 m;
    m << r(0), r(1), r(2), r(3);
    return m;
}

Mat2 make_u(const RVec4& r)
{
    Mat2 m;
    m << cd(r(0), r(1)), cd(r(2), r(3)), -cd(r(2), -r(3)), cd(r(0), -r(1));
    return m;
}

RMat3 boost(double t)
{
    RMat3 b = RMat3::Identity();
    b(0, 0) = b(1, 1) = std::cosh(t);
    b(0, 1) = b(1, 0) = std::sinh(t);
    return b;
}

RMat3 perm3(const std::vector<int>& perm)
{
    RMat3 p = RMat3::Zero();
    for (int c = 0; c < 3; ++c)
        p(perm[c], c) = 1.0;
    if (p.determinant() < 0)
        p.col(2) *= -1.0;
    return p;
}

// Fills the missing slots of a partial Lorentz-orthonormal frame; slot 0 is
// timelike, slots 1 and 2 spacelike.
RMat3 complete_frame(std::array<std::optional<RVec3>, 3> frame)
{
    auto proj = [&](const RVec3& v) {
        RVec3 p = v;
        for (const auto& f : frame)
            if (f)
                p -= ldot(v, *f) / lnorm(*f) * *f;
        return p;
    };
    std::vector<int> missing;
    for (int s = 0; s < 3; ++s)
        if (!frame[s])
            missing.push_back(s);
    while (missing.size() > 1) {
        int s = missing.front();
        double best_score = -1e300;
        RVec3 best = RVec3::Zero();
        for (int e = 0; e < 3; ++e) {
            RVec3 p = proj(RVec3::Unit(e));
            double n = lnorm(p);
            double score = s == 0 ? n : -n;
            if (score > best_score) {
                best_score = score;
                best = p;
            }
        }
        frame[s] = best / std::sqrt(std::abs(lnorm(best)));
        missing.erase(missing.begin());
    }
    if (!missing.empty()) {
        int s = missing.front();
        std::vector<RVec3> o;
        for (int t = 0; t < 3; ++t)
            if (t != s)
                o.push_back(*frame[t]);
        RVec3 c = lcross(o[0], o[1]);
        frame[s] = c / std::sqrt(std::abs(lnorm(c)));
    }
    RMat3 f;
    for (int s = 0; s < 3; ++s)
        f.col(s) = *frame[s];
    return f;
}

// Tracks W and gamma so that current() = gamma W^T Q W.
struct Track {
    Mat4 q;
    Mat4 w = Mat4::Identity();
    cd gamma{1.0, 0.0};

    Mat4 current() const { return gamma * w.transpose() * q * w; }
    void apply(const Mat4& t, cd g = 1.0)
    {
        w = w * t;
        gamma *= g;
    }
};

double best_phase(const Mat4& m)
{
    auto f = [&](double t) { return real_det(std::exp(I_ * t) * m); };
    const double h = kPi / kPhaseGrid;
    int best = 0;
    double best_val = -1.0;
    for (int i = 0; i < kPhaseGrid; ++i) {
        double v = f(i * h);
        if (v > best_val) {
            best_val = v;
            best = i;
        }
    }
    double a = best * h - h, b = best * h + h;
    for (int it = 0; it < kPhaseRefine; ++it) {
        double m1 = a + (b - a) / 3, m2 = b - (b - a) / 3;
        if (f(m1) < f(m2))
            a = m1;
        else
            b = m2;
    }
    return 0.5 * (a + b);
}

struct StageResult {
    LorentzSVD svd;
    double v = 0.0;
};

// Real part to Q0, then the stabilizer moves X to its Lorentz normal form.
StageResult stage(Track& tr)
{
    auto rp = normalize_real_part({tr.current(), Order::Block});
    tr.apply(rp.h.g);
    LMNData d = extract_lmnv({tr.current(), Order::Block});
    LorentzSVD svd = lorentz_svd(x_matrix(d));
    RMat2 r = lift_so12(svd.p);
    Mat2 u = lift_so3(svd.o.transpose());
    tr.apply(stabilizer_element(r, u(0, 0), u(0, 1)).g);
    return {svd, d.v};
}

// Gauss-Newton on W and gamma: minimize the upper triangle of
// gamma W^T Q W - target over W -> W (1 + delta), delta in gl(2,H).
double polish(Track& tr, const Mat4& target)
{
    std::vector<Mat4> basis;
    for (int half = 0; half < 2; ++half)
        for (int idx = 0; idx < 4; ++idx)
            for (cd unit : {cd(1, 0), cd(0, 1)}) {
                Mat2 a = Mat2::Zero(), b = Mat2::Zero();
                (half == 0 ? a : b)(idx / 2, idx % 2) = unit;
                basis.push_back(block(a, b));
            }
    auto upper = [](const Mat4& m) {
        Eigen::Matrix<double, 20, 1> r;
        int c = 0;
        for (int i = 0; i < 4; ++i)
            for (int j = i; j < 4; ++j) {
                r(c++) = m(i, j).real();
                r(c++) = m(i, j).imag();
            }
        return r;
    };

    double best = (tr.current() - target).norm();
    for (int it = 0; it < kPolishIters && best > 1e-15; ++it) {
        Mat4 cur = tr.current();
        Eigen::Matrix<double, 20, 18> jac;
        for (int c = 0; c < 16; ++c)
            jac.col(c) = upper(basis[c].transpose() * cur + cur * basis[c]);
        jac.col(16) = upper(cur);
        jac.col(17) = upper(I_ * cur);
        Eigen::Matrix<double, 18, 1> step = jac.completeOrthogonalDecomposition().solve(-upper(cur - target));
        Mat4 delta = Mat4::Zero();
        for (int c = 0; c < 16; ++c)
            delta += step(c) * basis[c];
        Track trial = tr;
        trial.apply(Mat4::Identity() + delta, cd(1.0 + step(16), step(17)));
        double res = (trial.current() - target).norm();
        if (!(res < best))
            break;
        best = res;
        tr = trial;
    }
    return best;
}

}  // namespace

Mat4 q0()
{
    return block(Mat2::Zero(), kmat());
}

Mat4 f_matrix()
{
    Mat4 f;
    f << 1, 0, 0, I_, 0, -I_, 1, 0, 0, I_, 1, 0, -1, 0, 0, I_;
    return f / std::sqrt(2.0);
}

Mat4 diagonal_form(double lambda, double mu, double nu)
{
    Vec4 d;
    d << std::exp(cd(lambda, nu)), std::exp(cd(mu, -nu)), std::exp(cd(-lambda, nu)), std::exp(cd(-mu, -nu));
    return d.asDiagonal();
}

Mat4 r_matrix(double v, double k)
{
    Mat4 r;
    r << 2, I_ * k, 0, v, I_ * k, 0, -v, 0, 0, -v, 2, -I_ * k, v, 0, -I_ * k, 0;
    return r;
}

Mat4 nondiagonal_form(double k, double v)
{
    return q0() + I_ * r_matrix(v, k);
}

Mat4 can1_form(double x, double y, double u, double v)
{
    RMat3 x3 = RMat3::Zero();
    x3(0, 0) = y;
    x3(1, 1) = x;
    x3(2, 2) = u;
    return q0() + I_ * imag_from_lmnv(lmn_from_x(x3, v));
}

ConformalElement gamma_generator(int index)
{
    Mat4 h = Mat4::Zero();
    cd gamma = 1.0;
    switch (index) {
    case 1:
        h.diagonal() << 1, I_, 1, -I_;
        gamma = I_;
        break;
    case 2:
        h(0, 2) = -1;
        h(1, 1) = 1;
        h(2, 0) = 1;
        h(3, 3) = 1;
        break;
    case 3:
        h = block(Mat2::Zero(), kI2);
        break;
    case 4:
        h = block(kmat(), Mat2::Zero());
        break;
    default:
        throw Error(ErrorKind::Precondition, "generator index must be 1..4");
    }
    return {h, gamma, Order::Block};
}

RealPartNormalization normalize_real_part(const Quadric& q)
{
    Quadric qb = to_order(q, Order::Block);
    Mat4 q1 = real_part(qb.m);
    if (normalized_det(q1) <= tolerances().rank)
        throw Error(ErrorKind::RankDeficient, "real part is singular");
    const Mat4 jj = quatlin::jmat(Order::Block);
    Mat4 hm = -I_ * q1 * jj;
    hm = 0.5 * (hm + hm.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Mat4> es(hm);
    const auto& w = es.eigenvalues();
    if (!(w(2) > 0) || !(w(1) < 0))
        throw Error(ErrorKind::NumericalBreakdown, "real part has unexpected signature");
    Vec4 u1 = es.eigenvectors().col(3), u2 = es.eigenvectors().col(2);
    Mat4 u;
    u.col(0) = u1;
    u.col(1) = u2;
    u.col(2) = jj * u1.conjugate();
    u.col(3) = jj * u2.conjugate();
    Vec4 s;
    s << 1.0 / std::sqrt(w(3)), 1.0 / std::sqrt(w(2)), 1.0 / std::sqrt(w(3)), 1.0 / std::sqrt(w(2));
    Mat4 hh = block(kI2, I_ * kI2);
    Mat4 h = std::sqrt(2.0) * u.conjugate() * s.asDiagonal() * hh.inverse() * f_matrix().inverse();
    ConformalElement el{convert(h, Order::Block, q.order), 1.0, q.order};
    return {el, quatlin::act_on_form(q, el)};
}

LMNData extract_lmnv(const Quadric& q)
{
    Mat4 m = to_order(q, Order::Block).m;
    if ((real_part(m) - q0()).norm() > kBreakdown)
        throw Error(ErrorKind::Precondition, "real part is not Q0");
    Mat4 q2 = imag_part(m);
    Mat2 a = q2.topLeftCorner<2, 2>(), b = q2.topRightCorner<2, 2>();
    LMNData d;
    RMat2 l = a.real(), mm = a.imag(), n = b.imag();
    d.l = 0.5 * (l + l.transpose());
    d.m = 0.5 * (mm + mm.transpose());
    d.n = 0.5 * (n + n.transpose());
    d.v = 0.5 * (b(0, 1).real() - b(1, 0).real());
    d.residual = (q2 - imag_from_lmnv(d)).norm();
    if (d.residual > kBreakdown * std::max(1.0, q2.norm()))
        throw Error(ErrorKind::MalformedInput, "imaginary part is not of the expected form");
    return d;
}

Mat4 imag_from_lmnv(const LMNData& d)
{
    Mat2 a = d.l.cast<cd>() + I_ * d.m.cast<cd>();
    Mat2 b = -d.v * kmat() + I_ * d.n.cast<cd>();
    return block(a, b);
}

RMat3 x_matrix(const LMNData& d)
{
    RMat3 x;
    x.col(0) = vsym(d.l);
    x.col(1) = vsym(d.m);
    x.col(2) = vsym(d.n);
    return x;
}

LMNData lmn_from_x(const RMat3& x, double v)
{
    LMNData d;
    d.l = unvsym(x.col(0));
    d.m = unvsym(x.col(1));
    d.n = unvsym(x.col(2));
    d.v = v;
    return d;
}

RMat3 lorentz_metric()
{
    return RVec3(1.0, -1.0, -1.0).asDiagonal();
}

RMat3 mk_matrix(double k)
{
    RMat3 m = RMat3::Zero();
    m(0, 0) = 1;
    m(1, 0) = 1;
    m(2, 1) = k;
    return m;
}

LorentzSVD lorentz_svd(const RMat3& x)
{
    const RMat3 e = lorentz_metric();
    LorentzSVD res;
    Eigen::JacobiSVD<RMat3> svd(x, Eigen::ComputeFullU | Eigen::ComputeFullV);
    RVec3 sig = svd.singularValues();
    RMat3 o = svd.matrixV();
    const double thr = kSvdRankRtol * std::max(1.0, sig(0));
    int r = 0;
    for (int i = 0; i < 3; ++i)
        if (sig(i) > thr)
            ++r;
    res.rank = r;
    if (o.determinant() < 0)
        o.col(2) *= -1.0;
    RMat3 y = x * o;
    if (r > 0) {
        Eigen::MatrixXd yr = y.leftCols(r);
        Eigen::MatrixXd s = yr.transpose() * e * yr;
        s = (0.5 * (s + s.transpose())).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
        RMat3 wf = RMat3::Identity();
        wf.topLeftCorner(r, r) = es.eigenvectors();
        if (wf.determinant() < 0)
            wf.col(2) *= -1.0;
        o = o * wf;
    }
    y = x * o;
    for (int j = r; j < 3; ++j)
        y.col(j).setZero();
    RVec3 s;
    for (int j = 0; j < 3; ++j)
        s(j) = lnorm(y.col(j));
    std::vector<int> null;
    for (int j = 0; j < r; ++j)
        if (std::abs(s(j)) <= kNullRtol * y.col(j).squaredNorm())
            null.push_back(j);

    if (!null.empty()) {
        if (r == 3)
            throw Error(ErrorKind::NumericalBreakdown, "null column in a rank-3 matrix");
        int j = null.front();
        std::vector<int> perm{j};
        for (int t = 0; t < r; ++t)
            if (t != j)
                perm.push_back(t);
        for (int t = 0; t < 3; ++t)
            if (std::find(perm.begin(), perm.end(), t) == perm.end())
                perm.push_back(t);
        o = o * perm3(perm);
        y = x * o;
        y.col(2).setZero();
        if (r == 1)
            y.col(1).setZero();
        RVec3 n = y.col(0);
        if (n(0) < 0) {
            o.col(0) *= -1.0;
            o.col(2) *= -1.0;
            n = -n;
        }
        RVec3 f2;
        double k = 0.0;
        if (r >= 2) {
            k = std::sqrt(-lnorm(y.col(1)));
            f2 = y.col(1) / k;
        } else {
            Eigen::Vector2d sv = n.tail<2>().normalized();
            f2 = RVec3(0.0, -sv(1), sv(0));
        }
        RVec3 f0 = RVec3::UnitX() + ldot(RVec3::UnitX(), f2) * f2;
        f0 /= std::sqrt(lnorm(f0));
        RVec3 f1 = lcross(f2, f0);
        f1 /= std::sqrt(std::abs(lnorm(f1)));
        RMat3 fr;
        fr << f0, f1, f2;
        if (fr.determinant() < 0)
            fr.col(1) *= -1.0;
        RMat3 pm = e * fr.transpose() * e;
        RVec3 c = pm * n;
        if (c(1) * c(0) < 0) {
            pm = RVec3(1.0, -1.0, -1.0).asDiagonal() * pm;
            o.col(1) *= -1.0;
            o.col(2) *= -1.0;
        }
        c = pm * n;
        pm = boost(-std::log(c(0))) * pm;
        res.kind = SvdKind::NonDiagonal;
        res.p = pm;
        res.o = o;
        res.form = pm * x * o;
        res.k = res.form(2, 1);
        res.residual = (res.form - mk_matrix(res.k)).norm();
        return res;
    }

    std::vector<int> tl, spc, zer;
    for (int j = 0; j < 3; ++j) {
        if (j >= r)
            zer.push_back(j);
        else if (s(j) > 0)
            tl.push_back(j);
        else
            spc.push_back(j);
    }
    if (tl.size() > 1 || (tl.empty() && zer.empty()))
        throw Error(ErrorKind::NumericalBreakdown, "inconsistent Lorentz signature");
    std::vector<int> perm;
    if (!tl.empty()) {
        perm = tl;
        perm.insert(perm.end(), spc.begin(), spc.end());
        perm.insert(perm.end(), zer.begin(), zer.end());
    } else {
        perm = {zer.front()};
        perm.insert(perm.end(), spc.begin(), spc.end());
        perm.insert(perm.end(), zer.begin() + 1, zer.end());
    }
    o = o * perm3(perm);
    y = x * o;
    std::array<std::optional<RVec3>, 3> frame;
    for (int slot = 0; slot < 3; ++slot) {
        int j = perm[slot];
        if (j < r)
            frame[slot] = RVec3(y.col(slot) / std::sqrt(std::abs(s(j))));
    }
    RMat3 fr = complete_frame(frame);
    if (fr(0, 0) < 0)
        fr.col(0) *= -1.0;
    if (fr.determinant() < 0)
        fr.col(1) *= -1.0;
    res.kind = SvdKind::Diagonal;
    res.p = e * fr.transpose() * e;
    res.o = o;
    res.form = res.p * x * o;
    res.diag = res.form.diagonal();
    RMat3 off = res.form;
    off.diagonal().setZero();
    res.residual = off.norm();
    return res;
}

RMat3 pi1(const RMat2& r)
{
    RMat3 out;
    for (int c = 0; c < 3; ++c)
        out.col(c) = vsym(r.transpose() * unvsym(RVec3::Unit(c)) * r);
    return out;
}

RMat3 pi2(const Mat2& u)
{
    RMat3 out;
    for (int c = 0; c < 3; ++c)
        out.col(c) = wof(u.transpose() * lam(RVec3::Unit(c)) * u);
    return out;
}

RMat2 lift_so12(const RMat3& p)
{
    const RMat3 e = lorentz_metric();
    double scale = std::max(1.0, p.squaredNorm());
    if ((p.transpose() * e * p - e).norm() > kGroupTol * scale || p.determinant() <= 0 || p(0, 0) <= 0)
        throw Error(ErrorKind::NotInGroup, "matrix is not in SO0(1,2)");
    Eigen::Matrix<double, 10, 1> row = Eigen::Matrix<double, 10, 1>::Zero();
    row(3) = 1.0;   // r0 r3
    row(5) = -1.0;  // r1 r2
    RMat2 r = make_r(quad_lift(make_r, pi1, p, row));
    double det = r.determinant();
    if (!(det > 0))
        throw Error(ErrorKind::NotInGroup, "lift has non-positive determinant");
    r /= std::sqrt(det);
    if ((pi1(r) - p).norm() > kBreakdown * std::sqrt(scale))
        throw Error(ErrorKind::NotInGroup, "lift does not reproduce the matrix");
    return r;
}

Mat2 lift_so3(const RMat3& o)
{
    if ((o.transpose() * o - RMat3::Identity()).norm() > kGroupTol || o.determinant() <= 0)
        throw Error(ErrorKind::NotInGroup, "matrix is not in SO(3)");
    Eigen::Matrix<double, 10, 1> row = Eigen::Matrix<double, 10, 1>::Zero();
    row(0) = row(4) = row(7) = row(9) = 1.0;
    RVec4 rv = quad_lift(make_u, pi2, o, row);
    Mat2 u = make_u(rv / rv.norm());
    if ((pi2(u) - o).norm() > kBreakdown)
        throw Error(ErrorKind::NotInGroup, "lift does not reproduce the matrix");
    return u;
}

ConformalElement stabilizer_element(const RMat2& r, cd a, cd b)
{
    if (std::abs(r.determinant() - 1.0) > 1e-10 * std::max(1.0, r.squaredNorm()))
        throw Error(ErrorKind::Precondition, "R must have determinant 1");
    if (std::abs(std::norm(a) + std::norm(b) - 1.0) > 1e-10)
        throw Error(ErrorKind::Precondition, "|a|^2 + |b|^2 must be 1");
    Mat2 rc = r.cast<cd>();
    return {block(a * rc, b * rc), 1.0, Order::Block};
}

Mat4 CanonicalForm::matrix() const
{
    return kind == Kind::Diagonal ? diagonal_form(lambda, mu, nu) : nondiagonal_form(k);
}

CanonicalForm CanonicalForm::diagonal(double lambda, double mu, double nu)
{
    CanonicalForm c;
    c.kind = Kind::Diagonal;
    c.lambda = lambda;
    c.mu = mu;
    c.nu = nu;
    return c;
}

CanonicalForm CanonicalForm::nondiagonal(double k)
{
    CanonicalForm c;
    c.kind = Kind::NonDiagonalizable;
    c.k = k;
    return c;
}

Reduction reduce_to_fundamental(double lambda, double mu, double nu)
{
    Reduction red;
    red.t = quatlin::identity(Order::Block);
    auto apply = [&](int idx) {
        red.word.push_back(idx);
        red.t = quatlin::compose(red.t, gamma_generator(idx));
        switch (idx) {
        case 1: nu += kPi / 2; break;
        case 2: lambda = -lambda; break;
        case 3:
            lambda = -lambda;
            mu = -mu;
            break;
        case 4:
            std::swap(lambda, mu);
            nu = -nu;
            break;
        }
    };
    auto reduce_nu = [&] {
        // Quarter turns add pi/2 each; nu is 2 pi periodic.
        long q = static_cast<long>(std::floor(nu / (kPi / 2)));
        int turns = static_cast<int>(((-q) % 4 + 4) % 4);
        for (int i = 0; i < turns; ++i)
            apply(1);
        nu -= (q + turns) * (kPi / 2);
        if (kPi / 2 - nu < 1e-9) {
            for (int i = 0; i < 3; ++i)
                apply(1);
            nu -= 2 * kPi;
        }
        if (std::abs(nu) < 1e-12)
            nu = 0.0;
    };

    if (lambda < 0)
        apply(2);
    if (mu < 0) {
        apply(3);
        apply(2);
    }
    if (lambda > mu)
        apply(4);
    reduce_nu();
    if (std::abs(lambda - mu) <= kStratumTol && nu > kPi / 4) {
        apply(4);
        reduce_nu();
    }
    red.lambda = lambda;
    red.mu = mu;
    red.nu = nu;
    return red;
}

CanonicalForm canonicalize(const Quadric& q)
{
    if (symmetry_residual(q.m) > tolerances().structural)
        throw Error(ErrorKind::MalformedInput, "form is not symmetric");
    if (!q.m.allFinite())
        throw Error(ErrorKind::MalformedInput, "form has non-finite entries");
    if (normalized_det(q.m) <= tolerances().rank)
        throw Error(ErrorKind::RankDeficient, "form is degenerate");

    Quadric qb = to_order(q, Order::Block);
    Track tr{qb.m};
    tr.gamma = 1.0 / qb.m.norm();
    tr.gamma *= std::exp(I_ * best_phase(tr.current()));
    if (normalized_det(real_part(tr.current())) <= 1e-12)
        throw Error(ErrorKind::NumericalBreakdown, "no phase with a regular real part");

    CanonicalForm out;
    StageResult st = stage(tr);
    if (st.svd.kind == SvdKind::Diagonal) {
        tr.apply(f_matrix());
        Mat4 d4 = tr.current();
        Mat4 off = d4;
        off.diagonal().setZero();
        if (off.norm() > kBreakdown * d4.norm())
            throw Error(ErrorKind::NumericalBreakdown, "diagonalization left off-diagonal terms");
        cd al = std::atan(-I_ * (d4(0, 0) - 1.0));
        cd be = std::atan(-I_ * (d4(1, 1) - 1.0));
        cd c = std::sqrt(std::cos(al)), d = std::sqrt(std::cos(be));
        Vec4 sc;
        sc << c, d, std::conj(c), std::conj(d);
        tr.apply(sc.asDiagonal(), std::exp(-I_ * (al.real() + be.real()) / 2.0));
        Reduction red = reduce_to_fundamental(-al.imag(), -be.imag(), (al.real() - be.real()) / 2);
        tr.apply(red.t.g, red.t.gamma);
        out = CanonicalForm::diagonal(red.lambda, red.mu, red.nu);
        out.word = red.word;
    } else {
        const double base = -std::arg(tr.current().determinant()) / 4;
        std::optional<Track> best;
        double best_k = 0.0;
        for (int m = 0; m < 2; ++m) {
            Track t2 = tr;
            t2.gamma *= std::exp(I_ * (base + m * kPi / 2));
            if (normalized_det(real_part(t2.current())) <= 1e-12)
                continue;
            StageResult s2;
            try {
                s2 = stage(t2);
            } catch (const Error&) {
                continue;
            }
            if (s2.svd.kind != SvdKind::NonDiagonal)
                continue;
            if (!best || s2.svd.k < best_k) {
                best = t2;
                best_k = s2.svd.k;
            }
        }
        if (!best || best_k >= 1.0 - kStratumTol)
            throw Error(ErrorKind::NumericalBreakdown, "could not reach the non-diagonal normal form");
        tr = *best;
        out = CanonicalForm::nondiagonal(best_k);
    }

    polish(tr, out.matrix());
    // Scale W into SL(2,H); det W is real and positive on GL(2,H).
    double det = tr.w.determinant().real();
    if (det > 0) {
        double s = std::pow(det, 0.25);
        tr.w /= s;
        tr.gamma *= s * s;
    }
    out.witness = {convert(tr.w, Order::Block, q.order), tr.gamma, q.order};
    out.residual = (tr.current() - out.matrix()).norm();
    if (!(out.residual <= kBreakdown))
        throw Error(ErrorKind::NumericalBreakdown, "canonical residual too large");
    return out;
}

Invariants invariants(const CanonicalForm& c)
{
    Quadric cq{c.matrix(), Order::Block};
    auto rp = normalize_real_part(cq);
    LMNData d = extract_lmnv(rp.form);
    RMat3 x = x_matrix(d);
    RMat3 s = x.transpose() * lorentz_metric() * x;
    Invariants inv;
    inv.p = s.trace();
    inv.q = 0.5 * (s.trace() * s.trace() - (s * s).trace());
    inv.d = x.determinant();
    inv.v = d.v;
    return inv;
}

Invariants invariants(const Quadric& q)
{
    return invariants(canonicalize(q));
}

}  // namespace twistorq::canonical
