#pragma once

#include "twistorq/canonical.hpp"
#include "twistorq/core.hpp"
#include "twistorq/twistor.hpp"

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace twistorq::locus {

struct MeshReport {
    int euler = 0;
    int components = 0;
    double max_abs_delta = 0.0;       // max |Delta| / (1 + |z|^4) over vertices
    std::vector<RVec4> pinch_points;  // vertices whose link has two or more cycles
    bool pinch_at_infinity = false;
    int boundary_edges = 0;           // only nonzero for truncated (non-compact) loci
    int snapped_vertices = 0;
    std::string label;                // locus class of the canonical form
    std::string method;               // "radial" or "grid"
    int resolution = 0;
};

struct DiscriminantMesh {
    std::vector<RVec4> vertices;  // (x1, y1, x2, y2)
    std::vector<std::array<int, 3>> triangles;
    MeshReport report;
};

struct Topology {
    int euler = 0;
    int components = 0;
};

Topology topology_report(const DiscriminantMesh& mesh);

// Positive radius r with Im Delta(r * dir) = 0 for Q_{lambda,mu,nu}, nu != 0.
double im_delta_radius(const RVec4& dir, double lambda, double mu, double nu);
double im_delta_radius(const RVec4& dir, const canonical::CanonicalForm& c);

struct MeshOptions {
    int resolution = 4;
    int threads = 1;
};

DiscriminantMesh extract_mesh(const canonical::CanonicalForm& c, const MeshOptions& opt = {});

// Test fixtures with known topology.
DiscriminantMesh icosahedron_fixture();
DiscriminantMesh two_tori_fixture();

// Wavefront OBJ after stereographic projection from a pole on the ray
// through `pole_dir` (default: +y2 axis), beyond the farthest vertex.
void write_obj(std::ostream& out, const DiscriminantMesh& mesh,
               const std::optional<RVec4>& pole_dir = std::nullopt);

}  // namespace twistorq::locus
