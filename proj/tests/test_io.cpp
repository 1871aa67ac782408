#include "oracles.hpp"

#include "twistorq/canonical.hpp"
#include "twistorq/quadric_io.hpp"

#include <doctest.h>

#include <cstring>
#include <sstream>

using namespace twistorq;
using namespace twistorq::io;

namespace {

std::string twenty(const char* sep = " ")
{
    std::string s;
    for (int i = 0; i < 20; ++i)
        s += std::to_string(i + 1) + (i % 2 ? "\n" : sep);
    return s;
}

ErrorKind kind_of(const std::string& text)
{
    try {
        parse_quadric_string(text);
    } catch (const Error& e) {
        return e.kind();
    }
    return ErrorKind::Precondition;
}

}  // namespace

TEST_CASE("upper triangle fills a symmetric matrix")
{
    QuadricFile f = parse_quadric_string("# comment\nlabel = demo\n" + twenty());
    CHECK(f.label == "demo");
    CHECK(f.q.order == Order::Twistor);
    CHECK(f.q.m(0, 0) == cd(1, 2));
    CHECK(f.q.m(0, 3) == cd(7, 8));
    CHECK(f.q.m(3, 0) == cd(7, 8));
    CHECK(f.q.m(1, 2) == cd(11, 12));
    CHECK(f.q.m(3, 3) == cd(19, 20));
    CHECK(symmetry_residual(f.q.m) == 0.0);
    QuadricFile g = parse_quadric_string(twenty(", "));
    CHECK((g.q.m - f.q.m).norm() == 0.0);
}

TEST_CASE("block order input is converted")
{
    QuadricFile f = parse_quadric_string(twenty());
    QuadricFile b = parse_quadric_string("order = block\n" + twenty());
    CHECK(b.q.order == Order::Twistor);
    CHECK((b.q.m - oracle::swap23(f.q.m)).norm() == 0.0);
}

TEST_CASE("malformed files are parse errors")
{
    CHECK(kind_of("1 2 3") == ErrorKind::Parse);
    CHECK(kind_of(twenty() + " 21") == ErrorKind::Parse);
    CHECK(kind_of("nan " + twenty().substr(2)) == ErrorKind::Parse);
    CHECK(kind_of("inf " + twenty().substr(2)) == ErrorKind::Parse);
    CHECK(kind_of("order = sideways\n" + twenty()) == ErrorKind::Parse);
    CHECK(kind_of("x" + twenty()) == ErrorKind::Parse);
    CHECK_THROWS_AS(read_quadric_file("/nonexistent/quadric.txt"), Error);
}

TEST_CASE("writing and reading is lossless")
{
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n01;
    Mat4 m;
    for (int i = 0; i < 4; ++i)
        for (int j = i; j < 4; ++j)
            m(i, j) = m(j, i) = cd(n01(rng), n01(rng) * 1e-7);
    std::ostringstream os;
    write_quadric(os, {m, Order::Block}, "round trip");
    QuadricFile back = parse_quadric_string(os.str());
    CHECK(back.label == "round trip");
    CHECK((back.q.m - oracle::swap23(m)).norm() == 0.0);
    for (int i = 0; i < 1000; ++i) {
        double x = n01(rng) * std::pow(10.0, static_cast<int>(n01(rng) * 10));
        double y = std::stod(format_double(x));
        CHECK(std::memcmp(&x, &y, sizeof x) == 0);
    }
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(-0.0) == "0");
}

TEST_CASE("tolerance overrides")
{
    Tolerances t = parse_tolerances("1e-9");
    CHECK(t.structural == 1e-9);
    Tolerances u = parse_tolerances("structural=1e-7,rank=1e-6");
    CHECK(u.structural == 1e-7);
    CHECK(u.rank == 1e-6);
    CHECK_THROWS_AS(parse_tolerances("rank=abc"), Error);
}
