#include "twistorq/locus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <thread>
#include <unordered_map>

namespace twistorq::locus {

using canonical::CanonicalForm;
using canonical::Kind;
using canonical::kStratumTol;

namespace {

using Key = std::uint64_t;
using EdgeKey = std::pair<Key, Key>;

struct EdgeKeyHash {
    std::size_t operator()(const EdgeKey& e) const
    {
        return std::hash<Key>()(e.first * 0x9E3779B97F4A7C15ULL ^ (e.second + 0x7F4A7C159E3779B9ULL));
    }
};

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x)
    {
        while (parent[x] != x)
            x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

EdgeKey edge_key(Key a, Key b)
{
    return a < b ? EdgeKey{a, b} : EdgeKey{b, a};
}

std::pair<int, int> vedge(int a, int b)
{
    return a < b ? std::pair<int, int>{a, b} : std::pair<int, int>{b, a};
}

// Illinois false position on [0,1] for f with f(0) = fa, f(1) = fb of
// opposite sign classes (zero counts as positive).
template <class F>
double find_root(const F& f, double fa, double fb)
{
    double a = 0.0, b = 1.0;
    int side = 0;
    for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
        double c = (a * fb - b * fa) / (fb - fa);
        if (!(c > a && c < b))
            c = 0.5 * (a + b);
        double fc = f(c);
        if (fc == 0.0)
            return c;
        if ((fc >= 0) == (fa >= 0)) {
            a = c;
            fa = fc;
            if (side == -1)
                fb *= 0.5;
            side = -1;
        } else {
            b = c;
            fb = fc;
            if (side == 1)
                fa *= 0.5;
            side = 1;
        }
    }
    return 0.5 * (a + b);
}

cd delta_at(const Quadric& qt, const RVec4& x)
{
    return twistor::discriminant(qt, quatlin::SpherePoint::from_real(x));
}

double normalized_delta(const Quadric& qt, const RVec4& x)
{
    double r2 = x.squaredNorm();
    return std::abs(delta_at(qt, x)) / (1.0 + r2 * r2);
}

// Collects triangles keyed by arbitrary point keys, then assigns indices.
struct LocalMesh {
    std::unordered_map<EdgeKey, int, EdgeKeyHash> index;
    std::vector<EdgeKey> keys;
    std::vector<RVec4> points;
    std::vector<std::array<int, 3>> tris;

    template <class Make>
    int point(const EdgeKey& k, const Make& make)
    {
        auto it = index.find(k);
        if (it != index.end())
            return it->second;
        int id = static_cast<int>(points.size());
        index.emplace(k, id);
        keys.push_back(k);
        points.push_back(make());
        return id;
    }
};

DiscriminantMesh merge(std::vector<LocalMesh>& parts)
{
    DiscriminantMesh mesh;
    std::unordered_map<EdgeKey, int, EdgeKeyHash> global;
    for (auto& part : parts) {
        std::vector<int> remap(part.points.size());
        for (std::size_t i = 0; i < part.points.size(); ++i) {
            auto [it, fresh] = global.emplace(part.keys[i], static_cast<int>(mesh.vertices.size()));
            if (fresh)
                mesh.vertices.push_back(part.points[i]);
            remap[i] = it->second;
        }
        for (const auto& t : part.tris)
            mesh.triangles.push_back({remap[t[0]], remap[t[1]], remap[t[2]]});
        part = LocalMesh{};
    }
    return mesh;
}

template <class Job>
void run_parallel(int jobs, int threads, const Job& job)
{
    threads = std::max(1, std::min(threads, jobs));
    if (threads == 1) {
        for (int i = 0; i < jobs; ++i)
            job(i);
        return;
    }
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            for (int i = t; i < jobs; i += threads)
                job(i);
        });
    for (auto& th : pool)
        th.join();
}

// ---- radial method: 16-cell boundary, lattice subdivision, marching tets

struct RadialField {
    double lambda, mu, nu;

    double g(const RVec4& dir) const
    {
        RVec4 p = im_delta_radius(dir, lambda, mu, nu) * dir;
        return twistor::diagonal_discriminant(lambda, mu, nu, {p(0), p(1)}, {p(2), p(3)}).real();
    }
};

constexpr std::array<std::array<int, 3>, 6> kPerms3 = {{{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};

void radial_facet(const RadialField& field, int facet, int n, LocalMesh& out)
{
    std::array<int, 4> sg;
    for (int i = 0; i < 4; ++i)
        sg[i] = (facet >> i) & 1 ? -1 : 1;
    const Key base = 2 * static_cast<Key>(n) + 1;
    const int m = n + 1;
    auto lin = [m](int b1, int b2, int b3) { return (static_cast<std::size_t>(b1) * m + b2) * m + b3; };
    auto bary = [n](const std::array<int, 3>& u) {
        return std::array<int, 4>{n - u[0], u[0] - u[1], u[1] - u[2], u[2]};
    };
    auto key = [&](const std::array<int, 4>& b) {
        Key k = 0;
        for (int i = 0; i < 4; ++i)
            k = k * base + static_cast<Key>(sg[i] * b[i] + n);
        return k;
    };
    auto dir = [&](const std::array<int, 4>& b) {
        RVec4 d(sg[0] * b[0], sg[1] * b[1], sg[2] * b[2], sg[3] * b[3]);
        return RVec4(d.normalized());
    };

    std::vector<double> val(static_cast<std::size_t>(m) * m * m, 0.0);
    for (int b1 = 0; b1 <= n; ++b1)
        for (int b2 = 0; b1 + b2 <= n; ++b2)
            for (int b3 = 0; b1 + b2 + b3 <= n; ++b3)
                val[lin(b1, b2, b3)] = field.g(dir({n - b1 - b2 - b3, b1, b2, b3}));

    struct V {
        Key k;
        RVec4 d;
        double g;
    };
    auto crossing = [&](const V& p, const V& q) {
        const V& a = p.k < q.k ? p : q;
        const V& b = p.k < q.k ? q : p;
        return out.point(edge_key(a.k, b.k), [&] {
            auto along = [&](double t) { return RVec4(((1 - t) * a.d + t * b.d).normalized()); };
            double t = find_root([&](double s) { return field.g(along(s)); }, a.g, b.g);
            RVec4 d = along(t);
            return RVec4(im_delta_radius(d, field.lambda, field.mu, field.nu) * d);
        });
    };

    for (int u1 = 0; u1 < n; ++u1)
        for (int u2 = 0; u2 <= u1; ++u2)
            for (int u3 = 0; u3 <= u2; ++u3)
                for (const auto& perm : kPerms3) {
                    std::array<std::array<int, 3>, 4> us;
                    us[0] = {u1, u2, u3};
                    bool inside = true;
                    for (int s = 0; s < 3; ++s) {
                        us[s + 1] = us[s];
                        us[s + 1][perm[s]] += 1;
                    }
                    for (const auto& u : us)
                        if (!(n >= u[0] && u[0] >= u[1] && u[1] >= u[2] && u[2] >= 0))
                            inside = false;
                    if (!inside)
                        continue;
                    std::array<V, 4> v;
                    int npos = 0;
                    for (int i = 0; i < 4; ++i) {
                        auto b = bary(us[i]);
                        v[i] = {key(b), dir(b), val[lin(b[1], b[2], b[3])]};
                        npos += v[i].g >= 0;
                    }
                    if (npos == 0 || npos == 4)
                        continue;
                    std::vector<int> pos, neg;
                    for (int i = 0; i < 4; ++i)
                        (v[i].g >= 0 ? pos : neg).push_back(i);
                    if (pos.size() == 1 || neg.size() == 1) {
                        const auto& lone = pos.size() == 1 ? pos : neg;
                        const auto& rest = pos.size() == 1 ? neg : pos;
                        out.tris.push_back({crossing(v[lone[0]], v[rest[0]]), crossing(v[lone[0]], v[rest[1]]),
                                            crossing(v[lone[0]], v[rest[2]])});
                    } else {
                        int ac = crossing(v[pos[0]], v[neg[0]]), ad = crossing(v[pos[0]], v[neg[1]]);
                        int bd = crossing(v[pos[1]], v[neg[1]]), bc = crossing(v[pos[1]], v[neg[0]]);
                        out.tris.push_back({ac, ad, bd});
                        out.tris.push_back({ac, bd, bc});
                    }
                }
}

DiscriminantMesh radial_mesh(const CanonicalForm& c, const MeshOptions& opt)
{
    const int depth = std::clamp(opt.resolution, 1, 9);
    const int n = 1 << depth;
    RadialField field{c.lambda, c.mu, c.nu};
    std::vector<LocalMesh> parts(16);
    run_parallel(16, opt.threads, [&](int f) { radial_facet(field, f, n, parts[f]); });
    DiscriminantMesh mesh = merge(parts);
    mesh.report.method = "radial";
    return mesh;
}

// ---- grid method: Freudenthal triangulation of a box in R^4, codimension-2
// contouring of (Re Delta, Im Delta) by linear interpolation per 4-simplex.

struct GridSpec {
    double r = 1.0;
    int cells = 40;
    double h = 0.05;
    RVec4 origin = RVec4::Zero();

    RVec4 at(const std::array<int, 4>& i) const
    {
        return origin + h * RVec4(i[0], i[1], i[2], i[3]);
    }
    Key id(const std::array<int, 4>& i) const
    {
        Key m = static_cast<Key>(cells) + 1;
        return ((static_cast<Key>(i[0]) * m + i[1]) * m + i[2]) * m + i[3];
    }
};

std::vector<std::array<int, 4>> perms4()
{
    std::vector<std::array<int, 4>> out;
    std::array<int, 4> p{0, 1, 2, 3};
    do
        out.push_back(p);
    while (std::next_permutation(p.begin(), p.end()));
    return out;
}

// Triangle-face points are keyed by their three sorted grid vertex ids.
EdgeKey tri_edge_key(Key a, Key b, Key c, Key stride)
{
    return {a, b * stride + c};
}

void grid_slab(const Quadric& qt, const GridSpec& g, int i0, LocalMesh& out)
{
    const int m = g.cells + 1;
    auto lin = [m](int a, int b, int c) { return (static_cast<std::size_t>(a) * m + b) * m + c; };
    std::array<std::vector<cd>, 2> slab;
    for (int s = 0; s < 2; ++s) {
        slab[s].resize(static_cast<std::size_t>(m) * m * m);
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b)
                for (int c = 0; c < m; ++c)
                    slab[s][lin(a, b, c)] = delta_at(qt, g.at({i0 + s, a, b, c}));
    }
    auto value = [&](const std::array<int, 4>& i) { return slab[i[0] - i0][lin(i[1], i[2], i[3])]; };
    static const auto perms = perms4();
    const Key stride = static_cast<Key>(m) * m * m * m;

    for (int a = 0; a < g.cells; ++a)
        for (int b = 0; b < g.cells; ++b)
            for (int c = 0; c < g.cells; ++c) {
                // Reject cubes on which Re or Im Delta keeps one sign.
                bool fp = false, fn = false, gp = false, gn = false;
                for (int corner = 0; corner < 16; ++corner) {
                    cd v = value({i0 + (corner & 1), a + ((corner >> 1) & 1), b + ((corner >> 2) & 1),
                                  c + ((corner >> 3) & 1)});
                    (v.real() >= 0 ? fp : fn) = true;
                    (v.imag() >= 0 ? gp : gn) = true;
                }
                if (!(fp && fn && gp && gn))
                    continue;
                for (const auto& perm : perms) {
                    std::array<std::array<int, 4>, 5> vi;
                    vi[0] = {i0, a, b, c};
                    for (int s = 0; s < 4; ++s) {
                        vi[s + 1] = vi[s];
                        vi[s + 1][perm[s]] += 1;
                    }
                    std::array<Key, 5> id;
                    std::array<cd, 5> val;
                    for (int k = 0; k < 5; ++k) {
                        id[k] = g.id(vi[k]);
                        val[k] = value(vi[k]);
                    }
                    // Zero of the linear interpolant on each triangle face.
                    std::map<std::array<int, 3>, int> face_point;
                    for (int x = 0; x < 5; ++x)
                        for (int y = x + 1; y < 5; ++y)
                            for (int z = y + 1; z < 5; ++z) {
                                std::array<int, 3> tri{x, y, z};
                                std::sort(tri.begin(), tri.end(), [&](int p, int q) { return id[p] < id[q]; });
                                Eigen::Matrix3d mat;
                                for (int k = 0; k < 3; ++k)
                                    mat.col(k) << val[tri[k]].real(), val[tri[k]].imag(), 1.0;
                                Eigen::Vector3d w = mat.partialPivLu().solve(Eigen::Vector3d(0, 0, 1));
                                if (!w.allFinite() || w.minCoeff() < 0)
                                    continue;
                                EdgeKey k = tri_edge_key(id[tri[0]], id[tri[1]], id[tri[2]], stride);
                                int pid = out.point(k, [&] {
                                    RVec4 p = RVec4::Zero();
                                    for (int q = 0; q < 3; ++q)
                                        p += w(q) * g.at(vi[tri[q]]);
                                    return p;
                                });
                                face_point[{x, y, z}] = pid;
                            }
                    if (face_point.size() < 3)
                        continue;
                    // Each tetrahedral facet contributes one polygon edge.
                    std::vector<std::pair<int, int>> edges;
                    bool ok = true;
                    for (int omit = 0; omit < 5 && ok; ++omit) {
                        std::vector<int> pts;
                        for (const auto& [tri, pid] : face_point)
                            if (tri[0] != omit && tri[1] != omit && tri[2] != omit)
                                pts.push_back(pid);
                        if (pts.size() == 2)
                            edges.emplace_back(pts[0], pts[1]);
                        else if (!pts.empty())
                            ok = false;
                    }
                    if (!ok || edges.size() < 3)
                        continue;
                    // Chain the edges into one cycle and fan-triangulate.
                    std::vector<int> cycle{edges[0].first, edges[0].second};
                    std::vector<bool> used(edges.size(), false);
                    used[0] = true;
                    for (std::size_t step = 1; step < edges.size(); ++step) {
                        bool found = false;
                        for (std::size_t e = 0; e < edges.size(); ++e) {
                            if (used[e])
                                continue;
                            int nxt = -1;
                            if (edges[e].first == cycle.back())
                                nxt = edges[e].second;
                            else if (edges[e].second == cycle.back())
                                nxt = edges[e].first;
                            if (nxt < 0)
                                continue;
                            used[e] = true;
                            cycle.push_back(nxt);
                            found = true;
                            break;
                        }
                        if (!found)
                            break;
                    }
                    if (cycle.size() != edges.size() + 1 || cycle.back() != cycle.front())
                        continue;
                    cycle.pop_back();
                    for (std::size_t k = 1; k + 1 < cycle.size(); ++k)
                        out.tris.push_back({cycle[0], cycle[k], cycle[k + 1]});
                }
            }
}

void newton_polish(const Quadric& qt, RVec4& x, double max_step)
{
    for (int it = 0; it < 40; ++it) {
        cd f = delta_at(qt, x);
        double r2 = x.squaredNorm();
        if (std::abs(f) <= 1e-15 * (1.0 + r2 * r2))
            return;
        Eigen::Matrix<double, 2, 4> jac;
        const double e = 1e-7 * (1.0 + std::sqrt(r2));
        for (int k = 0; k < 4; ++k) {
            RVec4 xp = x, xm = x;
            xp(k) += e;
            xm(k) -= e;
            cd d = (delta_at(qt, xp) - delta_at(qt, xm)) / (2.0 * e);
            jac(0, k) = d.real();
            jac(1, k) = d.imag();
        }
        Eigen::Matrix2d jj = jac * jac.transpose();
        if (std::abs(jj.determinant()) <= 1e-24 * (1.0 + jj.squaredNorm()))
            return;
        RVec4 step = jac.transpose() * jj.inverse() * Eigen::Vector2d(f.real(), f.imag());
        if (step.norm() > max_step)
            return;
        x -= step;
    }
}

GridSpec grid_spec(const CanonicalForm& c, const MeshOptions& opt)
{
    GridSpec g;
    g.r = c.kind == Kind::Diagonal ? 1.1 * std::exp(0.5 * (c.lambda + c.mu)) : 3.0;
    g.cells = 10 * std::max(1, opt.resolution);
    g.h = 2.0 * g.r / g.cells;
    // Generic offset keeps grid vertices off the coordinate hyperplanes.
    const RVec4 shift(0.1234567, 0.2718281, 0.3141592, 0.1414213);
    g.origin = RVec4::Constant(-g.r) + g.h * shift;
    return g;
}

DiscriminantMesh grid_mesh(const CanonicalForm& c, const GridSpec& g, const MeshOptions& opt)
{
    Quadric qt = to_order({c.matrix(), Order::Block}, Order::Twistor);

    std::vector<LocalMesh> parts(g.cells);
    run_parallel(g.cells, opt.threads, [&](int i0) { grid_slab(qt, g, i0, parts[i0]); });
    DiscriminantMesh mesh = merge(parts);
    std::vector<RVec4>& vs = mesh.vertices;
    run_parallel(static_cast<int>(vs.size()), opt.threads, [&](int i) { newton_polish(qt, vs[i], g.h); });
    mesh.report.method = "grid";
    return mesh;
}

// Vertices within max(2 mean edge, min_radius) of a target collapse onto it.
void snap_to_points(DiscriminantMesh& mesh, const std::vector<RVec4>& targets, double min_radius)
{
    if (targets.empty() || mesh.triangles.empty())
        return;
    double total = 0.0;
    int count = 0;
    for (const auto& t : mesh.triangles)
        for (int k = 0; k < 3; ++k) {
            total += (mesh.vertices[t[k]] - mesh.vertices[t[(k + 1) % 3]]).norm();
            ++count;
        }
    const double radius = std::max(2.0 * total / count, min_radius);
    std::vector<int> remap(mesh.vertices.size());
    std::iota(remap.begin(), remap.end(), 0);
    for (const auto& p : targets) {
        int anchor = static_cast<int>(mesh.vertices.size());
        mesh.vertices.push_back(p);
        remap.push_back(anchor);
        for (int i = 0; i < anchor; ++i)
            if (remap[i] == i && (mesh.vertices[i] - p).norm() <= radius) {
                remap[i] = anchor;
                ++mesh.report.snapped_vertices;
            }
    }
    for (auto& t : mesh.triangles)
        for (int& v : t)
            v = remap[v];
}

// Drops degenerate and repeated triangles, then unused vertices.
void clean(DiscriminantMesh& mesh)
{
    std::set<std::array<int, 3>> seen;
    std::vector<std::array<int, 3>> tris;
    for (const auto& t : mesh.triangles) {
        if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2])
            continue;
        std::array<int, 3> s = t;
        std::sort(s.begin(), s.end());
        if (seen.insert(s).second)
            tris.push_back(t);
    }
    std::vector<int> remap(mesh.vertices.size(), -1);
    std::vector<RVec4> verts;
    for (auto& t : tris)
        for (int& v : t) {
            if (remap[v] < 0) {
                remap[v] = static_cast<int>(verts.size());
                verts.push_back(mesh.vertices[v]);
            }
            v = remap[v];
        }
    mesh.vertices = std::move(verts);
    mesh.triangles = std::move(tris);
}

// Number of connected components of the link of each vertex.
std::vector<int> link_cycles(const DiscriminantMesh& mesh)
{
    const int nv = static_cast<int>(mesh.vertices.size());
    std::vector<std::vector<std::pair<int, int>>> link(nv);
    for (const auto& t : mesh.triangles)
        for (int k = 0; k < 3; ++k)
            link[t[k]].emplace_back(t[(k + 1) % 3], t[(k + 2) % 3]);
    std::vector<int> out(nv, 0);
    for (int v = 0; v < nv; ++v) {
        std::map<int, int> local;
        for (const auto& [a, b] : link[v]) {
            local.emplace(a, static_cast<int>(local.size()));
            local.emplace(b, static_cast<int>(local.size()));
        }
        UnionFind uf(static_cast<int>(local.size()));
        for (const auto& [a, b] : link[v])
            uf.unite(local[a], local[b]);
        int comps = 0;
        for (int i = 0; i < static_cast<int>(local.size()); ++i)
            comps += uf.find(i) == i;
        out[v] = comps;
    }
    return out;
}

void finalize(DiscriminantMesh& mesh, const CanonicalForm& c, double truncation)
{
    clean(mesh);
    std::map<std::pair<int, int>, int> edges;
    for (const auto& t : mesh.triangles)
        for (int k = 0; k < 3; ++k)
            ++edges[vedge(t[k], t[(k + 1) % 3])];
    auto near_cut = [&](int v) { return truncation > 0 && mesh.vertices[v].cwiseAbs().maxCoeff() >= truncation; };

    std::vector<int> cycles = link_cycles(mesh);
    std::vector<bool> boundary_vertex(mesh.vertices.size(), false);
    for (const auto& [e, n] : edges)
        if (n == 1)
            boundary_vertex[e.first] = boundary_vertex[e.second] = true;
    std::vector<bool> pinch(mesh.vertices.size(), false);
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
        if (cycles[v] >= 2 && !boundary_vertex[v]) {
            pinch[v] = true;
            mesh.report.pinch_points.push_back(mesh.vertices[v]);
        }

    for (const auto& [e, n] : edges) {
        if (n == 2)
            continue;
        if (n == 1) {
            ++mesh.report.boundary_edges;
            if (near_cut(e.first) && near_cut(e.second))
                continue;
        }
        if (pinch[e.first] || pinch[e.second])
            continue;
        throw Error(ErrorKind::ResolutionTooLow,
                    "mesh is not a surface near (" + std::to_string(mesh.vertices[e.first](0)) + ", " +
                        std::to_string(mesh.vertices[e.first](1)) + ", " +
                        std::to_string(mesh.vertices[e.first](2)) + ", " +
                        std::to_string(mesh.vertices[e.first](3)) + "); raise the resolution");
    }

    Topology topo = topology_report(mesh);
    mesh.report.euler = topo.euler;
    mesh.report.components = topo.components;
    mesh.report.label = twistor::to_string(twistor::classify_locus(c).cls);
    mesh.report.pinch_at_infinity = c.kind == Kind::NonDiagonalizable;

    Quadric qt = to_order({c.matrix(), Order::Block}, Order::Twistor);
    double worst = 0.0;
    for (const auto& v : mesh.vertices)
        worst = std::max(worst, normalized_delta(qt, v));
    mesh.report.max_abs_delta = worst;
}

void add_torus(DiscriminantMesh& mesh, const RVec4& center, int nu, int nv)
{
    const int base = static_cast<int>(mesh.vertices.size());
    for (int i = 0; i < nu; ++i)
        for (int j = 0; j < nv; ++j) {
            double a = 2 * kPi * i / nu, b = 2 * kPi * j / nv;
            mesh.vertices.push_back(center + RVec4((2 + std::cos(b)) * std::cos(a), (2 + std::cos(b)) * std::sin(a),
                                                   std::sin(b), 0.0));
        }
    auto id = [&](int i, int j) { return base + (i % nu) * nv + (j % nv); };
    for (int i = 0; i < nu; ++i)
        for (int j = 0; j < nv; ++j) {
            mesh.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            mesh.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
}

}  // namespace

Topology topology_report(const DiscriminantMesh& mesh)
{
    std::set<std::pair<int, int>> edges;
    std::set<int> used;
    UnionFind uf(static_cast<int>(mesh.vertices.size()));
    for (const auto& t : mesh.triangles)
        for (int k = 0; k < 3; ++k) {
            edges.insert(vedge(t[k], t[(k + 1) % 3]));
            used.insert(t[k]);
            uf.unite(t[k], t[(k + 1) % 3]);
        }
    std::set<int> roots;
    for (int v : used)
        roots.insert(uf.find(v));
    Topology topo;
    topo.euler = static_cast<int>(used.size()) - static_cast<int>(edges.size()) +
                 static_cast<int>(mesh.triangles.size());
    topo.components = static_cast<int>(roots.size());
    return topo;
}

double im_delta_radius(const RVec4& dir, double lambda, double mu, double nu)
{
    const double s = std::sin(2.0 * nu);
    if (std::abs(s) < 1e-12)
        throw Error(ErrorKind::NuZero, "Im Delta = 0 is a cone when nu = 0");
    const RVec4 d = dir.normalized();
    const double b = 4.0 * std::sinh(lambda - mu) * d(0) * d(1) + 4.0 * std::sinh(lambda + mu) * d(2) * d(3);
    // Positive root t = r^2 of |s| t^2 + b' t - |s| = 0, without cancellation.
    const double sa = std::abs(s), bs = s > 0 ? b : -b;
    const double root = std::sqrt(bs * bs + 4.0 * sa * sa);
    const double t = bs >= 0 ? 2.0 * sa / (bs + root) : (root - bs) / (2.0 * sa);
    return std::sqrt(t);
}

double im_delta_radius(const RVec4& dir, const CanonicalForm& c)
{
    if (c.kind != Kind::Diagonal)
        throw Error(ErrorKind::Precondition, "radial graph needs a diagonal canonical form");
    return im_delta_radius(dir, c.lambda, c.mu, c.nu);
}

DiscriminantMesh extract_mesh(const CanonicalForm& c, const MeshOptions& opt)
{
    twistor::LocusReport loc = twistor::classify_locus(c);
    if (loc.cls == twistor::LocusClass::Circle)
        throw Error(ErrorKind::Precondition, "the locus is a circle, not a surface");
    DiscriminantMesh mesh;
    double truncation = 0.0;
    if (c.kind == Kind::Diagonal && std::abs(c.nu) > kStratumTol) {
        mesh = radial_mesh(c, opt);
    } else {
        const GridSpec g = grid_spec(c, opt);
        mesh = grid_mesh(c, g, opt);
        if (c.kind == Kind::NonDiagonalizable)
            truncation = g.r - 2.0 * g.h;
        std::vector<RVec4> targets;
        for (const auto& p : loc.pinch_points)
            if (!p.infinite)
                targets.push_back(p.real());
        // Contouring leaves a gap of about one cell around each cone point.
        snap_to_points(mesh, targets, 1.5 * g.h);
    }
    mesh.report.resolution = opt.resolution;
    finalize(mesh, c, truncation);
    return mesh;
}

DiscriminantMesh icosahedron_fixture()
{
    DiscriminantMesh mesh;
    const double p = (1.0 + std::sqrt(5.0)) / 2.0;
    const double v[12][3] = {{-1, p, 0}, {1, p, 0}, {-1, -p, 0}, {1, -p, 0}, {0, -1, p}, {0, 1, p},
                             {0, -1, -p}, {0, 1, -p}, {p, 0, -1}, {p, 0, 1}, {-p, 0, -1}, {-p, 0, 1}};
    for (const auto& x : v)
        mesh.vertices.push_back(RVec4(x[0], x[1], x[2], 0.0).normalized());
    mesh.triangles = {{0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                      {11, 10, 2}, {10, 7, 6}, {7, 1, 8}, {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8},
                      {3, 8, 9}, {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1}};
    Topology t = topology_report(mesh);
    mesh.report.euler = t.euler;
    mesh.report.components = t.components;
    return mesh;
}

DiscriminantMesh two_tori_fixture()
{
    DiscriminantMesh mesh;
    add_torus(mesh, RVec4::Zero(), 12, 8);
    add_torus(mesh, RVec4(10.0, 0.0, 0.0, 0.0), 9, 6);
    Topology t = topology_report(mesh);
    mesh.report.euler = t.euler;
    mesh.report.components = t.components;
    return mesh;
}

void write_obj(std::ostream& out, const DiscriminantMesh& mesh, const std::optional<RVec4>& pole_dir)
{
    if (pole_dir && !(pole_dir->norm() > 0))
        throw Error(ErrorKind::Precondition, "pole direction must be nonzero");
    RVec4 n = pole_dir ? pole_dir->normalized() : RVec4::UnitW();
    if (!n.allFinite())
        throw Error(ErrorKind::Precondition, "pole direction must be nonzero");
    // Orthonormal basis of the hyperplane orthogonal to n.
    int drop;
    n.cwiseAbs().maxCoeff(&drop);
    std::vector<RVec4> basis;
    for (int k = 0; k < 4; ++k) {
        if (k == drop)
            continue;
        RVec4 e = RVec4::Unit(k) - n(k) * n;
        for (const auto& b : basis)
            e -= e.dot(b) * b;
        basis.push_back(e.normalized());
    }
    double far = 0.0;
    for (const auto& v : mesh.vertices)
        far = std::max(far, v.norm());
    const double rho = far + 1.0;
    const RVec4 pole = rho * n;

    char buf[128];
    out << "# discriminant locus: " << mesh.vertices.size() << " vertices, " << mesh.triangles.size()
        << " triangles\n";
    for (const auto& v : mesh.vertices) {
        double t = rho / (rho - v.dot(n));
        RVec4 img = pole + t * (v - pole);
        std::snprintf(buf, sizeof buf, "v %.9g %.9g %.9g\n", img.dot(basis[0]), img.dot(basis[1]),
                      img.dot(basis[2]));
        out << buf;
        std::snprintf(buf, sizeof buf, "# w=%.9g\n", v(3));
        out << buf;
    }
    for (const auto& t : mesh.triangles)
        out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

}  // namespace twistorq::locus
