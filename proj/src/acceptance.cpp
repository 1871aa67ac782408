#include "twistorq/acceptance.hpp"

#include "twistorq/canonical.hpp"
#include "twistorq/locus.hpp"
#include "twistorq/ocs.hpp"
#include "twistorq/quatlin.hpp"
#include "twistorq/twistor.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>

namespace twistorq::acceptance {

using canonical::CanonicalForm;
using quatlin::SpherePoint;

namespace {

constexpr std::uint64_t kSeed = 20240611;

std::string fmt(const char* f, double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

Quadric conjugate(const Mat4& c, std::mt19937_64& rng)
{
    auto t = quatlin::random_sl2h(rng, Order::Block);
    std::uniform_real_distribution<double> phase(0.0, 2 * kPi);
    return {std::exp(I_ * phase(rng)) * t.g.transpose() * c * t.g, Order::Block};
}

double witness_residual(const Quadric& q, const CanonicalForm& c)
{
    Mat4 w = convert(c.witness.g, c.witness.order, Order::Block);
    Mat4 qb = convert(q.m, q.order, Order::Block);
    return (c.witness.gamma * w.transpose() * qb * w - c.matrix()).norm();
}

CriterionResult roundtrip()
{
    std::mt19937_64 rng(kSeed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    double worst_param = 0.0, worst_res = 0.0;
    int failures = 0;
    std::string first_failure;
    auto check = [&](const Mat4& canon, const std::function<double(const CanonicalForm&)>& err) {
        Quadric q = conjugate(canon, rng);
        try {
            CanonicalForm c = canonical::canonicalize(q);
            worst_param = std::max(worst_param, err(c));
            worst_res = std::max(worst_res, witness_residual(q, c));
        } catch (const Error& e) {
            if (failures++ == 0)
                first_failure = e.what();
        }
    };
    for (int i = 0; i < 500; ++i) {
        double a = 2.0 * u01(rng), b = 2.0 * u01(rng), nu = 0.5 * kPi * u01(rng);
        double lambda = std::min(a, b), mu = std::max(a, b);
        check(canonical::diagonal_form(lambda, mu, nu), [=](const CanonicalForm& c) {
            if (c.kind != canonical::Kind::Diagonal)
                return 1e300;
            return std::max({std::abs(c.lambda - lambda), std::abs(c.mu - mu), std::abs(c.nu - nu)});
        });
    }
    for (int i = 0; i < 100; ++i) {
        double k = 0.95 * u01(rng);
        check(canonical::nondiagonal_form(k), [=](const CanonicalForm& c) {
            return c.kind == canonical::Kind::NonDiagonalizable ? std::abs(c.k - k) : 1e300;
        });
    }
    CriterionResult r;
    r.pass = failures == 0 && worst_param <= 1e-6 && worst_res <= 1e-6;
    r.detail = "max param error " + fmt("%.2e", worst_param) + ", max witness residual " + fmt("%.2e", worst_res) +
               ", failures " + std::to_string(failures) + (failures ? " (" + first_failure + ")" : "");
    return r;
}

CriterionResult real_discriminant()
{
    std::mt19937_64 rng(kSeed + 2);
    std::normal_distribution<double> n01;
    Quadric q = to_order({canonical::q0(), Order::Block}, Order::Twistor);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        cd z1(n01(rng), n01(rng)), z2(n01(rng), n01(rng));
        cd d = twistor::discriminant(q, SpherePoint::finite(z1, z2));
        double ref = -4.0 * (z1.imag() * z1.imag() + std::norm(z2));
        worst = std::max(worst, std::abs(d - ref) / std::abs(ref));
    }
    CriterionResult r;
    r.pass = worst <= 1e-12;
    r.detail = "convention factor 1, max relative error " + fmt("%.2e", worst);
    return r;
}

CriterionResult line_table()
{
    std::mt19937_64 rng(kSeed + 3);
    struct Case {
        std::string name;
        Mat4 m;
        twistor::LineKind kind;
        int count;
    };
    const std::vector<Case> cases = {
        {"(0,0,0)", canonical::diagonal_form(0, 0, 0), twistor::LineKind::CircleFamily, 0},
        {"(0.5,0.5,0)", canonical::diagonal_form(0.5, 0.5, 0), twistor::LineKind::Lines, 2},
        {"(0,0,pi/6)", canonical::diagonal_form(0, 0, kPi / 6), twistor::LineKind::NoLines, 0},
        {"(0.3,0.7,0.4)", canonical::diagonal_form(0.3, 0.7, 0.4), twistor::LineKind::NoLines, 0},
        {"k=0", canonical::nondiagonal_form(0.0), twistor::LineKind::Lines, 1},
        {"k=0.3", canonical::nondiagonal_form(0.3), twistor::LineKind::Lines, 1},
        {"k=0.9", canonical::nondiagonal_form(0.9), twistor::LineKind::Lines, 1},
    };
    CriterionResult r;
    r.pass = true;
    std::ostringstream det;
    for (const auto& cs : cases) {
        Quadric q = conjugate(cs.m, rng);
        bool ok;
        int found = 0;
        try {
            CanonicalForm c = canonical::canonicalize(q);
            twistor::LineReport lr = twistor::source_lines(c);
            found = static_cast<int>(lr.points.size());
            ok = lr.kind == cs.kind && found == cs.count;
            // Each reported line must lie in the original quadric.
            for (const auto& p : lr.points)
                ok = ok && twistor::contains_fiber(q, p, 1e-8);
        } catch (const Error&) {
            ok = false;
        }
        r.pass = r.pass && ok;
        det << cs.name << ":" << (cs.kind == twistor::LineKind::CircleFamily ? std::string("circle") : std::to_string(found))
            << (ok ? " " : "(!) ");
    }
    r.detail = det.str();
    return r;
}

CriterionResult clifford(int threads)
{
    auto t0 = std::chrono::steady_clock::now();
    auto mesh = locus::extract_mesh(CanonicalForm::diagonal(0, 0, kPi / 6), {4, threads});
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    double wz = 0.0, wy = 0.0;
    for (const auto& v : mesh.vertices) {
        double r2 = v.squaredNorm();
        wz = std::max(wz, std::abs(r2 * r2 - 1.0));
        wy = std::max(wy, std::abs(v(1) * v(1) + v(3) * v(3) - 0.75));
    }
    CriterionResult r;
    r.pass = wz <= 1e-8 && wy <= 1e-6 && mesh.report.euler == 0 && mesh.report.components == 1 && secs <= 30.0;
    r.detail = std::to_string(mesh.vertices.size()) + " vertices, max ||z|^4-1| " + fmt("%.1e", wz) +
               ", max ||y|^2-3/4| " + fmt("%.1e", wy) + ", chi " + std::to_string(mesh.report.euler) +
               ", components " + std::to_string(mesh.report.components);
    return r;
}

CriterionResult topology(int threads)
{
    std::mt19937_64 rng(kSeed + 5);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    CriterionResult r;
    r.pass = true;
    std::ostringstream det;
    int good = 0;
    for (int i = 0; i < 10; ++i) {
        double lambda = u01(rng), mu = lambda + 0.1 + u01(rng), nu = 0.1 + 1.3 * u01(rng);
        try {
            auto m = locus::extract_mesh(CanonicalForm::diagonal(lambda, mu, nu), {5, threads});
            if (m.report.euler == 0 && m.report.components == 1)
                ++good;
            else
                det << "[(" << lambda << "," << mu << "," << nu << ") chi " << m.report.euler << "] ";
        } catch (const Error& e) {
            det << "[" << e.what() << "] ";
        }
    }
    r.pass = good == 10;
    det << "generic tori " << good << "/10";

    try {
        auto m = locus::extract_mesh(CanonicalForm::diagonal(0.5, 0.5, 0.0), {4, threads});
        int near = 0;
        for (const auto& p : m.report.pinch_points)
            for (double s : {1.0, -1.0})
                near += (p - RVec4(0, s, 0, 0)).norm() <= 1e-3;
        bool ok = m.report.pinch_points.size() == 2 && near == 2;
        r.pass = r.pass && ok;
        det << "; (0.5,0.5,0) pinch points " << m.report.pinch_points.size() << (ok ? "" : "(!)") << " chi "
            << m.report.euler;
    } catch (const Error& e) {
        r.pass = false;
        det << "; (0.5,0.5,0) " << e.what();
    }

    try {
        auto m = locus::extract_mesh(CanonicalForm::nondiagonal(0.0), {4, threads});
        double wx = 0.0, wc = 0.0;
        for (const auto& v : m.vertices) {
            wx = std::max(wx, std::abs(v(2)));
            wc = std::max(wc, std::abs(v(2) * v(2) + v(3) * v(3) + v(1) * v(1) - 1.0));
        }
        bool ok = !m.vertices.empty() && wx <= 1e-6 && wc <= 1e-6;
        r.pass = r.pass && ok;
        det << "; k=0 cylinder residuals " << fmt("%.1e", wx) << " " << fmt("%.1e", wc);
    } catch (const Error& e) {
        r.pass = false;
        det << "; k=0 " << e.what();
    }
    r.detail = det.str();
    return r;
}

// Least-squares slope of log r against log h.
double order_of(const std::vector<double>& hs, const std::vector<double>& rs)
{
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < hs.size(); ++i) {
        mx += std::log(hs[i]);
        my += std::log(rs[i]);
    }
    mx /= hs.size();
    my /= hs.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < hs.size(); ++i) {
        sxy += (std::log(hs[i]) - mx) * (std::log(rs[i]) - my);
        sxx += (std::log(hs[i]) - mx) * (std::log(hs[i]) - mx);
    }
    return sxy / sxx;
}

CriterionResult ocs_validity()
{
    std::mt19937_64 rng(kSeed + 6);
    std::uniform_real_distribution<double> box(-1.5, 1.5);
    std::normal_distribution<double> n01;
    ocs::HyperplaneCoeffs hc;
    for (auto& c : hc)
        c = {n01(rng), n01(rng)};
    Quadric generic = to_order({canonical::diagonal_form(0.3, 0.7, 0.4), Order::Block}, Order::Twistor);

    struct Family {
        std::string name;
        ocs::OCSField field;
    };
    std::vector<Family> fams = {
        {"hyperplane", ocs::OCSField::hyperplane(hc)},
        {"real+", ocs::OCSField::real_quadric(1)},
        {"real-", ocs::OCSField::real_quadric(-1)},
        {"generic#1", ocs::OCSField::quadric(generic, 1)},
        {"generic#2", ocs::OCSField::quadric(generic, 2)},
    };
    const std::vector<double> hs = {1e-2, 5e-3, 2.5e-3};
    double worst_j = 0.0, min_order = 1e300;
    int evaluated = 0, failures = 0;
    std::string failure;
    for (const auto& fam : fams) {
        int done = 0;
        while (done < 200) {
            SpherePoint p = SpherePoint::from_real(RVec4(box(rng), box(rng), box(rng), box(rng)));
            // Keep away from the locus so that the stencil stays in one branch sheet.
            if (fam.field.source == ocs::FieldSource::Quadric && ocs::normalized_discriminant(generic, p) < 1e-3)
                continue;
            if (fam.field.source == ocs::FieldSource::RealQuadric &&
                p.z1.imag() * p.z1.imag() + std::norm(p.z2) < 0.04)
                continue;
            try {
                ocs::FiberPoint fp = ocs::eval_field(fam.field, p);
                RMat4 j = ocs::to_jmatrix(fp);
                worst_j = std::max({worst_j, (j * j + RMat4::Identity()).norm(),
                                    (j.transpose() * j - RMat4::Identity()).norm()});
                std::vector<double> rs;
                for (double h : hs)
                    rs.push_back(ocs::integrability_residual(fam.field, p, h).norm());
                if (rs[0] > 1e-10)
                    min_order = std::min(min_order, order_of(hs, rs));
                ++evaluated;
            } catch (const Error& e) {
                if (failures++ == 0)
                    failure = fam.name + ": " + e.what();
            }
            ++done;
        }
    }
    CriterionResult r;
    r.pass = failures == 0 && worst_j <= 1e-12 && min_order >= 1.9;
    r.detail = std::to_string(evaluated) + " points, max J residual " + fmt("%.1e", worst_j) +
               ", min integrability order " + fmt("%.3f", min_order) +
               (failures ? ", failures " + std::to_string(failures) + " (" + failure + ")" : "");
    return r;
}

CriterionResult det_identity()
{
    double worst = 0.0;
    for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 20; ++j) {
            double v = -2.0 + 4.0 * i / 19.0, k = 2.0 * j / 19.0;
            cd d = canonical::nondiagonal_form(k, v).determinant();
            cd s = k * k + (v + I_) * (v + I_);
            worst = std::max(worst, std::abs(d - s * s) / std::max(1.0, std::abs(s * s)));
        }
    CriterionResult r;
    r.pass = worst <= 1e-12;
    r.detail = "400 grid points, max error " + fmt("%.1e", worst);
    return r;
}

// Zero of Delta_q near x by minimum-norm Newton with numerical derivatives.
bool find_zero(const Quadric& qt, RVec4& x)
{
    auto f = [&](const RVec4& y) { return twistor::discriminant(qt, SpherePoint::from_real(y)); };
    for (int it = 0; it < 60; ++it) {
        cd v = f(x);
        if (ocs::normalized_discriminant(qt, SpherePoint::from_real(x)) < 1e-14)
            return true;
        Eigen::Matrix<double, 2, 4> jac;
        const double e = 1e-7 * (1.0 + x.norm());
        for (int k = 0; k < 4; ++k) {
            RVec4 a = x, b = x;
            a(k) += e;
            b(k) -= e;
            cd d = (f(a) - f(b)) / (2.0 * e);
            jac(0, k) = d.real();
            jac(1, k) = d.imag();
        }
        Eigen::Matrix2d jj = jac * jac.transpose();
        if (std::abs(jj.determinant()) < 1e-20)
            return false;
        RVec4 step = jac.transpose() * jj.inverse() * Eigen::Vector2d(v.real(), v.imag());
        double sn = step.norm();
        if (sn > 0.5)
            step *= 0.5 / sn;
        x -= step;
        if (x.norm() > 1e3)
            return false;
    }
    return false;
}

CriterionResult equivariance()
{
    std::mt19937_64 rng(kSeed + 8);
    std::normal_distribution<double> n01;
    Quadric q = to_order(conjugate(canonical::diagonal_form(0.3, 0.7, 0.4), rng), Order::Twistor);
    double worst = 0.0;
    int zeros = 0;
    for (int t = 0; t < 20; ++t) {
        auto el = quatlin::random_sl2h(rng, Order::Twistor);
        Quadric qp = quatlin::act_on_form(q, el);
        int got = 0, tries = 0;
        while (got < 10 && tries++ < 500) {
            RVec4 x(n01(rng), n01(rng), n01(rng), n01(rng));
            if (!find_zero(qp, x))
                continue;
            SpherePoint img = quatlin::act_on_sphere(el, SpherePoint::from_real(x));
            if (img.infinite)
                continue;
            worst = std::max(worst, ocs::normalized_discriminant(q, img));
            ++got;
        }
        zeros += got;
    }
    CriterionResult r;
    r.pass = zeros == 200 && worst <= 1e-6;
    r.detail = std::to_string(zeros) + " pushed zeros, max normalized |Delta| " + fmt("%.1e", worst);
    return r;
}

double circle_hausdorff(const locus::DiscriminantMesh& m)
{
    // Limit circle {x1 = x2 = 0, y1^2 + y2^2 = 1}.
    double to_circle = 0.0;
    for (const auto& v : m.vertices) {
        double ry = std::hypot(v(1), v(3));
        to_circle = std::max(to_circle, std::sqrt(v(0) * v(0) + v(2) * v(2) + (ry - 1) * (ry - 1)));
    }
    double to_mesh = 0.0;
    for (int i = 0; i < 720; ++i) {
        double a = 2 * kPi * i / 720;
        RVec4 c(0, std::cos(a), 0, std::sin(a));
        double best = 1e300;
        for (const auto& v : m.vertices)
            best = std::min(best, (v - c).squaredNorm());
        to_mesh = std::max(to_mesh, std::sqrt(best));
    }
    return std::max(to_circle, to_mesh);
}

CriterionResult degeneration(int threads)
{
    const std::vector<std::pair<double, int>> runs = {{0.2, 5}, {0.1, 6}, {0.05, 7}};
    std::vector<double> d;
    std::ostringstream det;
    bool ok = true;
    for (const auto& [nu, res] : runs) {
        try {
            auto m = locus::extract_mesh(CanonicalForm::diagonal(0, 0, nu), {res, threads});
            d.push_back(circle_hausdorff(m));
            det << "nu=" << nu << ": " << fmt("%.4f", d.back()) << "  ";
        } catch (const Error& e) {
            ok = false;
            det << "nu=" << nu << ": " << e.what() << "  ";
        }
    }
    for (std::size_t i = 1; ok && i < d.size(); ++i)
        ok = d[i] < d[i - 1];
    CriterionResult r;
    r.pass = ok && d.size() == runs.size();
    r.detail = det.str();
    return r;
}

const char* name_of(int id)
{
    switch (id) {
    case 1: return "canonicalization round-trip";
    case 2: return "real-quadric discriminant";
    case 3: return "twistor-line table";
    case 4: return "Clifford torus mesh";
    case 5: return "torus topology and pinch points";
    case 6: return "OCS validity and integrability";
    case 7: return "determinant identity";
    case 8: return "equivariance of the discriminant";
    case 9: return "degeneration to the circle";
    }
    return "?";
}

}  // namespace

CriterionResult run_criterion(int id, int threads)
{
    auto t0 = std::chrono::steady_clock::now();
    CriterionResult r;
    try {
        switch (id) {
        case 1: r = roundtrip(); break;
        case 2: r = real_discriminant(); break;
        case 3: r = line_table(); break;
        case 4: r = clifford(threads); break;
        case 5: r = topology(threads); break;
        case 6: r = ocs_validity(); break;
        case 7: r = det_identity(); break;
        case 8: r = equivariance(); break;
        case 9: r = degeneration(threads); break;
        default: throw Error(ErrorKind::Precondition, "no criterion " + std::to_string(id));
        }
    } catch (const Error& e) {
        r.pass = false;
        r.detail = e.what();
    }
    r.id = id;
    r.name = name_of(id);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (id == 1 && r.seconds > 60.0) {
        r.pass = false;
        r.detail += " (over the 60 s budget)";
    }
    return r;
}

std::vector<CriterionResult> run_all(int threads)
{
    std::vector<CriterionResult> out;
    for (int id = 1; id <= kCriteria; ++id)
        out.push_back(run_criterion(id, threads));
    return out;
}

std::string format_line(const CriterionResult& r)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, " (%.2f s): ", r.seconds);
    return std::string(r.pass ? "[PASS] " : "[FAIL] ") + std::to_string(r.id) + " " + r.name + buf + r.detail;
}

}  // namespace twistorq::acceptance
