#include "twistorq/cli.hpp"

#include "twistorq/acceptance.hpp"
#include "twistorq/canonical.hpp"
#include "twistorq/locus.hpp"
#include "twistorq/ocs.hpp"
#include "twistorq/quadric_io.hpp"
#include "twistorq/quatlin.hpp"
#include "twistorq/twistor.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <ostream>
#include <random>
#include <sstream>

namespace twistorq::cli {

namespace {

using canonical::CanonicalForm;
using json = nlohmann::ordered_json;
using quatlin::SpherePoint;
using io::format_double;

std::string fmt_c(cd z)
{
    return "(" + format_double(z.real()) + ", " + format_double(z.imag()) + ")";
}

json jc(cd z) { return json::array({z.real(), z.imag()}); }

json jpoint(const SpherePoint& p)
{
    if (p.infinite)
        return "infinity";
    return json{{"z1", jc(p.z1)}, {"z2", jc(p.z2)}};
}

std::string fmt_point(const SpherePoint& p)
{
    return p.infinite ? std::string("infinity") : "z1=" + fmt_c(p.z1) + " z2=" + fmt_c(p.z2);
}

cd parse_complex(const std::string& s)
{
    std::istringstream in(s);
    double re = 0, im = 0;
    char comma = 0;
    if (!(in >> re) || !(in >> comma) || comma != ',' || !(in >> im) || !std::isfinite(re) || !std::isfinite(im))
        throw Error(ErrorKind::Parse, "expected a complex number as 're,im', got '" + s + "'");
    in >> std::ws;
    if (!in.eof())
        throw Error(ErrorKind::Parse, "trailing characters in '" + s + "'");
    return {re, im};
}

RVec4 parse_real4(const std::string& s)
{
    std::istringstream in(s);
    RVec4 v;
    for (int i = 0; i < 4; ++i) {
        char comma = ',';
        if ((i > 0 && (!(in >> comma) || comma != ',')) || !(in >> v(i)))
            throw Error(ErrorKind::Parse, "expected four comma-separated reals, got '" + s + "'");
    }
    return v;
}

Mat4 witness_block(const CanonicalForm& c)
{
    return convert(c.witness.g, c.witness.order, Order::Block);
}

json canonical_json(const CanonicalForm& c)
{
    json j;
    if (c.kind == canonical::Kind::Diagonal) {
        j["kind"] = "diagonal";
        j["lambda"] = c.lambda;
        j["mu"] = c.mu;
        j["nu"] = c.nu;
    } else {
        j["kind"] = "nondiagonalizable";
        j["k"] = c.k;
    }
    auto inv = canonical::invariants(c);
    j["invariants"] = {{"p", inv.p}, {"q", inv.q}, {"d", inv.d}, {"v", inv.v}};
    j["residual"] = c.residual;
    j["word"] = c.word;
    Mat4 w = witness_block(c);
    json rows = json::array();
    for (int r = 0; r < 4; ++r) {
        json row = json::array();
        for (int k = 0; k < 4; ++k)
            row.push_back(jc(w(r, k)));
        rows.push_back(row);
    }
    j["witness"] = {{"order", "block"}, {"gamma", jc(c.witness.gamma)}, {"matrix", rows}};
    return j;
}

void canonical_text(std::ostream& out, const CanonicalForm& c)
{
    if (c.kind == canonical::Kind::Diagonal) {
        out << "kind: diagonal\n";
        out << "lambda: " << format_double(c.lambda) << "\n";
        out << "mu: " << format_double(c.mu) << "\n";
        out << "nu: " << format_double(c.nu) << "\n";
    } else {
        out << "kind: nondiagonalizable\n";
        out << "k: " << format_double(c.k) << "\n";
    }
    auto inv = canonical::invariants(c);
    out << "invariants: p=" << format_double(inv.p) << " q=" << format_double(inv.q) << " d=" << format_double(inv.d)
        << " v=" << format_double(inv.v) << "\n";
    out << "residual: " << format_double(c.residual) << "\n";
    out << "word:";
    for (int g : c.word)
        out << " H" << g;
    out << "\n";
    out << "witness gamma: " << fmt_c(c.witness.gamma) << "\n";
    out << "witness (block order):\n";
    Mat4 w = witness_block(c);
    for (int r = 0; r < 4; ++r) {
        out << " ";
        for (int k = 0; k < 4; ++k)
            out << " " << fmt_c(w(r, k));
        out << "\n";
    }
}

json lines_json(const twistor::LineReport& lr)
{
    json pts = json::array();
    for (const auto& p : lr.points)
        pts.push_back(jpoint(p));
    return {{"kind", twistor::to_string(lr.kind)}, {"points", pts}};
}

void lines_text(std::ostream& out, const twistor::LineReport& lr)
{
    out << "lines: " << twistor::to_string(lr.kind);
    if (lr.kind == twistor::LineKind::Lines)
        out << " (" << lr.points.size() << ")";
    out << "\n";
    for (const auto& p : lr.points)
        out << "  line over " << fmt_point(p) << "\n";
}

json locus_json(const twistor::LocusReport& lr)
{
    json pts = json::array();
    for (const auto& p : lr.pinch_points)
        pts.push_back(jpoint(p));
    json j{{"class", twistor::to_string(lr.cls)}, {"pinch_points", pts}};
    if (lr.cls == twistor::LocusClass::CliffordTorus)
        j["radii"] = {{"y2", lr.y_radius2}, {"x2", lr.x_radius2}};
    return j;
}

void locus_text(std::ostream& out, const twistor::LocusReport& lr)
{
    out << "locus: " << twistor::to_string(lr.cls) << "\n";
    if (lr.cls == twistor::LocusClass::CliffordTorus)
        out << "  canonical radii: |y|^2=" << format_double(lr.y_radius2) << " |x|^2=" << format_double(lr.x_radius2)
            << "\n";
    for (const auto& p : lr.pinch_points)
        out << "  pinch point " << fmt_point(p) << "\n";
}

struct Context {
    std::ostream& out;
    std::ostream& err;
};

io::QuadricFile load(const std::string& path) { return io::read_quadric_file(path); }

void header(std::ostream& out, const io::QuadricFile& f)
{
    if (!f.label.empty())
        out << "label: " << f.label << "\n";
}

int cmd_canonicalize(Context& cx, const std::string& path, bool as_json)
{
    auto f = load(path);
    CanonicalForm c = canonical::canonicalize(f.q);
    if (as_json) {
        json j{{"label", f.label}, {"canonical", canonical_json(c)}};
        cx.out << j.dump(2) << "\n";
    } else {
        header(cx.out, f);
        canonical_text(cx.out, c);
    }
    return kOk;
}

int cmd_classify(Context& cx, const std::string& path, bool as_json)
{
    auto f = load(path);
    CanonicalForm c = canonical::canonicalize(f.q);
    auto lines = twistor::source_lines(c);
    auto locus = twistor::source_locus(c);
    if (as_json) {
        json j{{"label", f.label},
               {"canonical", canonical_json(c)},
               {"locus", locus_json(locus)},
               {"lines", lines_json(lines)}};
        cx.out << j.dump(2) << "\n";
    } else {
        header(cx.out, f);
        locus_text(cx.out, locus);
        lines_text(cx.out, lines);
        canonical_text(cx.out, c);
    }
    return kOk;
}

int cmd_lines(Context& cx, const std::string& path, bool as_json)
{
    auto f = load(path);
    auto lines = twistor::source_lines(canonical::canonicalize(f.q));
    if (as_json)
        cx.out << json{{"label", f.label}, {"lines", lines_json(lines)}}.dump(2) << "\n";
    else {
        header(cx.out, f);
        lines_text(cx.out, lines);
    }
    return kOk;
}

int cmd_eval(Context& cx, const std::string& path, const std::string& z1s, const std::string& z2s, int branch,
             double h, bool as_json)
{
    auto f = load(path);
    SpherePoint p = SpherePoint::finite(parse_complex(z1s), parse_complex(z2s));
    ocs::OCSField field = ocs::OCSField::quadric(f.q, branch);
    ocs::FiberPoint fp = ocs::eval_field(field, p);
    RMat4 j = ocs::to_jmatrix(fp);
    if (h <= 0)
        h = ocs::default_step(p);
    auto r1 = ocs::integrability_residual(field, p, h);
    auto r2 = ocs::integrability_residual(field, p, h / 2);
    const double order = r2.norm() > 0 && r1.norm() > 0 ? std::log2(r1.norm() / r2.norm()) : 0.0;
    if (as_json) {
        json rows = json::array();
        for (int r = 0; r < 4; ++r)
            rows.push_back({j(r, 0), j(r, 1), j(r, 2), j(r, 3)});
        json out{{"label", f.label},
                 {"point", jpoint(p)},
                 {"branch", branch},
                 {"base", jpoint(field.base)},
                 {"fiber", {{"xi0", jc(fp.xi0)}, {"xi12", jc(fp.xi12)}}},
                 {"J", rows},
                 {"integrability",
                  {{"h", h}, {"residual_h", {r1.r1, r1.r2}}, {"residual_h2", {r2.r1, r2.r2}}, {"order", order}}}};
        cx.out << out.dump(2) << "\n";
        return kOk;
    }
    header(cx.out, f);
    cx.out << "point: " << fmt_point(p) << "\n";
    cx.out << "branch: " << branch << " (labelled at " << fmt_point(field.base) << ")\n";
    cx.out << "fiber: [" << fmt_c(fp.xi0) << " : " << fmt_c(fp.xi12) << "]\n";
    cx.out << "J (x1, y1, x2, y2):\n";
    for (int r = 0; r < 4; ++r) {
        cx.out << " ";
        for (int k = 0; k < 4; ++k)
            cx.out << " " << format_double(j(r, k));
        cx.out << "\n";
    }
    cx.out << "integrability h=" << format_double(h) << ": " << format_double(r1.r1) << " " << format_double(r1.r2)
           << "\n";
    cx.out << "integrability h/2=" << format_double(h / 2) << ": " << format_double(r2.r1) << " "
           << format_double(r2.r2) << "\n";
    cx.out << "observed order: " << format_double(order) << "\n";
    return kOk;
}

int cmd_mesh(Context& cx, const std::string& path, int resolution, const std::string& out_path, int threads,
             const std::string& pole, bool canonical_coords)
{
    auto f = load(path);
    CanonicalForm c = canonical::canonicalize(f.q);
    std::optional<RVec4> pole_dir;
    if (!pole.empty())
        pole_dir = parse_real4(pole);
    auto mesh = locus::extract_mesh(c, {resolution, threads});
    if (!canonical_coords) {
        for (auto& v : mesh.vertices) {
            SpherePoint s = quatlin::act_on_sphere(c.witness, SpherePoint::from_real(v));
            if (s.infinite)
                throw Error(ErrorKind::NumericalBreakdown, "a mesh vertex maps to infinity; use --canonical");
            v = s.real();
        }
    }
    std::ofstream os(out_path);
    if (!os)
        throw Error(ErrorKind::Precondition, "cannot write " + out_path);
    locus::write_obj(os, mesh, pole_dir);
    const auto& r = mesh.report;
    header(cx.out, f);
    cx.out << "locus: " << r.label << "\n";
    cx.out << "method: " << r.method << " (resolution " << r.resolution << ")\n";
    cx.out << "vertices: " << mesh.vertices.size() << "\n";
    cx.out << "triangles: " << mesh.triangles.size() << "\n";
    cx.out << "euler: " << r.euler << "\n";
    cx.out << "components: " << r.components << "\n";
    cx.out << "pinch points: " << r.pinch_points.size() << (r.pinch_at_infinity ? " (+ infinity)" : "") << "\n";
    cx.out << "boundary edges: " << r.boundary_edges << "\n";
    cx.out << "max normalized |Delta|: " << format_double(r.max_abs_delta) << "\n";
    cx.out << "coordinates: " << (canonical_coords ? "canonical" : "source") << "\n";
    cx.out << "written: " << out_path << "\n";
    return kOk;
}

struct Check {
    std::string name;
    bool pass;
    double value;
    double limit;
};

int cmd_verify_file(Context& cx, const std::string& path)
{
    auto f = load(path);
    std::vector<Check> rows;
    rows.push_back({"symmetry", symmetry_residual(f.q.m) <= tolerances().structural, symmetry_residual(f.q.m),
                    tolerances().structural});
    CanonicalForm c = canonical::canonicalize(f.q);
    {
        Mat4 qb = convert(f.q.m, f.q.order, Order::Block);
        Mat4 w = witness_block(c);
        double res = (c.witness.gamma * w.transpose() * qb * w - c.matrix()).norm();
        rows.push_back({"witness congruence", res <= 1e-6, res, 1e-6});
        auto g = quatlin::is_gl2h(w, Order::Block, 1e-9);
        rows.push_back({"witness in GL(2,H)", g.ok, g.residual, 1e-9});
    }
    {
        double worst = 0.0;
        for (const auto& p : twistor::source_lines(c).points) {
            Quadric qt = to_order(f.q, Order::Twistor);
            SpherePoint at = p;
            if (p.infinite) {
                qt = twistor::invert_lift(qt);
                at = SpherePoint::finite(0.0, 0.0);
            }
            auto fq = twistor::fiber_coefficients(qt, at);
            double s = qt.m.norm() * (1.0 + at.norm2());
            worst = std::max({worst, std::abs(fq.a) / s, std::abs(fq.b) / s, std::abs(fq.c) / s});
        }
        rows.push_back({"lines contained", worst <= 1e-8, worst, 1e-8});
    }
    {
        std::mt19937_64 rng(7);
        std::normal_distribution<double> n01;
        double worst_j = 0.0, worst_i = 0.0;
        int used = 0;
        for (int t = 0; t < 200 && used < 5; ++t) {
            SpherePoint p = SpherePoint::from_real(RVec4(n01(rng), n01(rng), n01(rng), n01(rng)));
            if (ocs::normalized_discriminant(f.q, p) < 1e-3)
                continue;
            for (int branch : {1, 2}) {
                auto field = ocs::OCSField::quadric(f.q, branch);
                RMat4 j = ocs::to_jmatrix(ocs::eval_field(field, p));
                worst_j = std::max({worst_j, (j * j + RMat4::Identity()).norm(),
                                    (j.transpose() * j - RMat4::Identity()).norm()});
                worst_i = std::max(worst_i, ocs::integrability_residual(field, p, 1e-3).norm());
            }
            ++used;
        }
        rows.push_back({"J orthogonal complex", worst_j <= 1e-12, worst_j, 1e-12});
        rows.push_back({"integrability (h=1e-3)", worst_i <= 1e-4, worst_i, 1e-4});
    }
    header(cx.out, f);
    bool all = true;
    for (const auto& r : rows) {
        all = all && r.pass;
        char buf[160];
        std::snprintf(buf, sizeof buf, "%-4s %-24s %.3e (limit %.0e)\n", r.pass ? "ok" : "FAIL", r.name.c_str(),
                      r.value, r.limit);
        cx.out << buf;
    }
    return all ? kOk : kOtherError;
}

int cmd_verify_suite(Context& cx, int threads, int only)
{
    bool all = true;
    for (int id = 1; id <= acceptance::kCriteria; ++id) {
        if (only != 0 && id != only)
            continue;
        auto r = acceptance::run_criterion(id, threads);
        all = all && r.pass;
        cx.out << acceptance::format_line(r) << std::endl;
    }
    return all ? kOk : kOtherError;
}

int cmd_gen(Context& cx, std::uint64_t seed, const std::vector<double>& diag, double k, bool has_k,
            const std::string& out_path, const std::string& label)
{
    if (has_k == !diag.empty())
        throw Error(ErrorKind::Precondition, "give exactly one of --diag or --k");
    Mat4 canon = has_k ? canonical::nondiagonal_form(k) : canonical::diagonal_form(diag[0], diag[1], diag[2]);
    std::mt19937_64 rng(seed);
    auto t = quatlin::random_sl2h(rng, Order::Block);
    std::uniform_real_distribution<double> phase(0.0, 2 * kPi);
    Quadric q{std::exp(I_ * phase(rng)) * t.g.transpose() * canon * t.g, Order::Block};
    std::string lab = label;
    if (lab.empty()) {
        std::ostringstream s;
        if (has_k)
            s << "k=" << format_double(k);
        else
            s << "diag " << format_double(diag[0]) << " " << format_double(diag[1]) << " " << format_double(diag[2]);
        s << " seed " << seed;
        lab = s.str();
    }
    if (out_path.empty()) {
        io::write_quadric(cx.out, q, lab);
        return kOk;
    }
    std::ofstream os(out_path);
    if (!os)
        throw Error(ErrorKind::Precondition, "cannot write " + out_path);
    io::write_quadric(os, q, lab);
    return kOk;
}

int exit_code(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::RankDeficient: return kRankDeficient;
    case ErrorKind::NumericalBreakdown: return kNumericalBreakdown;
    case ErrorKind::Parse:
    case ErrorKind::MalformedInput: return kParseError;
    default: return kOtherError;
    }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Twistor discriminant loci of quadrics in CP^3", "twistorq"};
    app.require_subcommand(1);
    Context cx{out, err};
    std::function<int()> action;

    std::string path;
    bool as_json = false;

    auto* can = app.add_subcommand("canonicalize", "canonical form, invariants and witness");
    can->add_option("file", path, "quadric file")->required();
    can->add_flag("--json", as_json, "structured output");
    can->callback([&] { action = [&] { return cmd_canonicalize(cx, path, as_json); }; });

    auto* cls = app.add_subcommand("classify", "discriminant locus class, pinch points and lines");
    cls->add_option("file", path, "quadric file")->required();
    cls->add_flag("--json", as_json, "structured output");
    cls->callback([&] { action = [&] { return cmd_classify(cx, path, as_json); }; });

    auto* lin = app.add_subcommand("lines", "twistor lines contained in the quadric");
    lin->add_option("file", path, "quadric file")->required();
    lin->add_flag("--json", as_json, "structured output");
    lin->callback([&] { action = [&] { return cmd_lines(cx, path, as_json); }; });

    std::string z1s, z2s;
    int branch = 1;
    double h = 0.0;
    auto* ev = app.add_subcommand("eval", "orthogonal complex structure at a point");
    ev->add_option("file", path, "quadric file")->required();
    ev->add_option("--z1", z1s, "z1 as re,im")->required();
    ev->add_option("--z2", z2s, "z2 as re,im")->required();
    ev->add_option("--branch", branch, "root label, 1 or 2")->check(CLI::IsMember({1, 2}));
    ev->add_option("--step", h, "finite-difference step (default 1e-3 (1 + |z|))");
    ev->add_flag("--json", as_json, "structured output");
    ev->callback([&] { action = [&] { return cmd_eval(cx, path, z1s, z2s, branch, h, as_json); }; });

    int resolution = 4, threads = 1;
    std::string out_path, pole;
    bool canonical_coords = false;
    auto* me = app.add_subcommand("mesh", "triangulated discriminant locus as OBJ");
    me->add_option("file", path, "quadric file")->required();
    me->add_option("--resolution", resolution, "subdivision level")->check(CLI::Range(1, 64));
    me->add_option("--out", out_path, "OBJ output path")->required();
    me->add_option("--threads", threads, "worker threads")->check(CLI::Range(1, 256));
    me->add_option("--pole", pole, "projection pole direction as x1,y1,x2,y2");
    me->add_flag("--canonical", canonical_coords, "keep canonical coordinates");
    me->callback([&] {
        action = [&] { return cmd_mesh(cx, path, resolution, out_path, threads, pole, canonical_coords); };
    });

    bool suite = false;
    int only = 0;
    auto* ve = app.add_subcommand("verify", "invariant checks for a file, or the acceptance suite");
    ve->add_option("file", path, "quadric file");
    ve->add_flag("--suite", suite, "run the acceptance suite");
    ve->add_option("--threads", threads, "worker threads for meshing")->check(CLI::Range(1, 256));
    ve->add_option("--only", only, "run a single criterion")->check(CLI::Range(1, acceptance::kCriteria));
    ve->callback([&] {
        action = [&] {
            if (suite == !path.empty())
                throw CLI::ValidationError("verify", "give a file or --suite");
            return suite ? cmd_verify_suite(cx, threads, only) : cmd_verify_file(cx, path);
        };
    });

    std::uint64_t seed = 1;
    std::vector<double> diag;
    double k = 0.0;
    std::string label;
    auto* ge = app.add_subcommand("gen", "random conjugate of a canonical form");
    ge->add_option("--seed", seed, "random seed");
    auto* diag_opt = ge->add_option("--diag", diag, "lambda mu nu")->expected(3);
    auto* k_opt = ge->add_option("--k", k, "non-diagonalizable parameter");
    diag_opt->excludes(k_opt);
    ge->add_option("--out", out_path, "output path (default stdout)");
    ge->add_option("--label", label, "label stored in the file");
    ge->callback([&] {
        action = [&] { return cmd_gen(cx, seed, diag, k, k_opt->count() > 0, out_path, label); };
    });

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
        return action();
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kOtherError;
    }
}

}  // namespace twistorq::cli
