#include "oracles.hpp"

#include "twistorq/canonical.hpp"
#include "twistorq/locus.hpp"
#include "twistorq/twistor.hpp"

#include <doctest.h>

#include <sstream>

using namespace twistorq;
using namespace twistorq::locus;
using canonical::CanonicalForm;

namespace {

double max_normalized_delta(const DiscriminantMesh& m, const CanonicalForm& c)
{
    Quadric qt = to_order({c.matrix(), Order::Block}, Order::Twistor);
    double worst = 0.0;
    for (const auto& v : m.vertices) {
        cd d = oracle::sampled_discriminant(qt.m, {v(0), v(1)}, {v(2), v(3)});
        double s = 1.0 + v.squaredNorm();
        worst = std::max(worst, std::abs(d) / (s * s));
    }
    return worst;
}

}  // namespace

TEST_CASE("topology of the fixtures")
{
    auto ico = icosahedron_fixture();
    CHECK(topology_report(ico).euler == 2);
    CHECK(topology_report(ico).components == 1);
    CHECK(oracle::euler(ico.vertices.size(), ico.triangles) == 2);
    auto tori = two_tori_fixture();
    CHECK(topology_report(tori).euler == 0);
    CHECK(topology_report(tori).components == 2);
    CHECK(oracle::euler(tori.vertices.size(), tori.triangles) == 0);
}

TEST_CASE("radius of the Im Delta graph")
{
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n01;
    for (int i = 0; i < 100; ++i) {
        RVec4 d(n01(rng), n01(rng), n01(rng), n01(rng));
        d.normalize();
        const double l = 0.5 * std::abs(n01(rng)), m = l + 0.5 * std::abs(n01(rng)), n = 0.1 + 0.02 * i;
        const double r = im_delta_radius(d, l, m, n);
        CHECK(r > 0);
        RVec4 x = r * d;
        cd delta = twistor::diagonal_discriminant(l, m, n, {x(0), x(1)}, {x(2), x(3)});
        CHECK(std::abs(delta.imag()) < 1e-12 * (1 + r * r) * (1 + r * r));
        CHECK(std::abs(im_delta_radius(d, 0, 0, n) - 1.0) < 1e-14);
    }
    // x1 y1 = x2 y2 = 0 makes the linear term vanish.
    CHECK(std::abs(im_delta_radius(RVec4(0.6, 0, 0.8, 0), 0.3, 0.7, 0.4) - 1.0) < 1e-15);
    CHECK(std::abs(im_delta_radius(RVec4(0, 0.6, 0.8, 0), 0.3, 0.7, 0.4) - 1.0) < 1e-15);
    try {
        im_delta_radius(RVec4(1, 0, 0, 0), 0.2, 0.3, 0.0);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NuZero);
    }
}

TEST_CASE("circle locus has no surface mesh")
{
    CHECK_THROWS_AS(extract_mesh(CanonicalForm::diagonal(0, 0, 0)), Error);
}

TEST_CASE("Clifford torus mesh")
{
    auto c = CanonicalForm::diagonal(0, 0, kPi / 6);
    auto m = extract_mesh(c, {4, 1});
    CHECK(m.report.method == "radial");
    CHECK(m.report.euler == 0);
    CHECK(m.report.components == 1);
    CHECK(oracle::euler(m.vertices.size(), m.triangles) == 0);
    CHECK(m.report.pinch_points.empty());
    for (const auto& v : m.vertices) {
        CHECK(std::abs(v.squaredNorm() - 1.0) < 1e-9);
        CHECK(std::abs(v(1) * v(1) + v(3) * v(3) - 0.75) < 1e-6);
    }
    CHECK(max_normalized_delta(m, c) < 1e-10);
}

TEST_CASE("meshes are deterministic across thread counts")
{
    auto c = CanonicalForm::diagonal(0.2, 0.6, 0.5);
    auto a = extract_mesh(c, {3, 1});
    auto b = extract_mesh(c, {3, 3});
    REQUIRE(a.vertices.size() == b.vertices.size());
    REQUIRE(a.triangles == b.triangles);
    for (std::size_t i = 0; i < a.vertices.size(); ++i)
        CHECK((a.vertices[i] - b.vertices[i]).norm() == 0.0);
    CHECK(a.report.euler == 0);
    CHECK(max_normalized_delta(a, c) < 1e-10);
}

TEST_CASE("pinched loci")
{
    auto two = CanonicalForm::diagonal(0.5, 0.5, 0);
    auto m = extract_mesh(two, {4, 1});
    CHECK(m.report.method == "grid");
    CHECK(m.report.pinch_points.size() == 2);
    CHECK(m.report.euler == 2);
    CHECK(m.report.components == 1);
    CHECK(max_normalized_delta(m, two) < 1e-8);

    auto one = CanonicalForm::nondiagonal(0.3);
    auto n = extract_mesh(one, {4, 1});
    CHECK(n.report.pinch_at_infinity);
    CHECK(n.report.boundary_edges > 0);
    CHECK(max_normalized_delta(n, one) < 1e-8);
}

TEST_CASE("OBJ output")
{
    auto ico = icosahedron_fixture();
    std::ostringstream os;
    write_obj(os, ico);
    std::istringstream in(os.str());
    std::string line;
    int v = 0, f = 0, w = 0;
    while (std::getline(in, line)) {
        v += line.rfind("v ", 0) == 0;
        f += line.rfind("f ", 0) == 0;
        w += line.rfind("# w=", 0) == 0;
    }
    CHECK(v == 12);
    CHECK(w == 12);
    CHECK(f == 20);
    CHECK_THROWS_AS(write_obj(os, ico, RVec4::Zero()), Error);
}
