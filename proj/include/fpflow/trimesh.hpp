#ifndef FPFLOW_TRIMESH_HPP
#define FPFLOW_TRIMESH_HPP

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fpflow/geometry.hpp"

namespace fpflow {

/// Labels for tagged (boundary or interface) edges.
enum class EdgeTag : std::uint8_t { obstacle, top, bottom, left, right, interface_S };

std::string to_string(EdgeTag tag);
EdgeTag edge_tag_from_string(const std::string& s);

/// Identification of degrees of freedom across a periodic side pair.
/// Pairs are (master, slave) vertex indices; the slave side is identified
/// with the master side.
struct PeriodicMap {
    enum class Direction { x1, y1 } direction = Direction::x1;
    std::vector<std::array<int, 2>> pairs;  ///< (master vertex, slave vertex)
};

/// A tagged mesh edge. For interface_S edges, `side` records which half the
/// adjacent triangle lies in: +1 above the interface, -1 below. Other tags
/// use side = 0.
struct TaggedEdge {
    int v0 = -1;
    int v1 = -1;
    EdgeTag tag = EdgeTag::obstacle;
    int side = 0;
};

/// Conforming triangle mesh with tagged edges, periodic vertex pairing and
/// (for stripe domains) a duplicated interface line.
struct TriMesh {
    std::vector<Vec2> vertices;
    std::vector<std::array<int, 3>> triangles;  ///< CCW vertex index triples
    std::vector<TaggedEdge> edge_tags;
    std::vector<PeriodicMap> periodic_maps;
    /// Duplicated interface vertices: (minus-side vertex, plus-side vertex),
    /// coincident coordinates. Empty unless the mesh has a duplicated line.
    std::vector<std::array<int, 2>> interface_pairs;
    /// Inclusion metadata for re-projection and obstacle masking.
    std::vector<Circle> circles;
    /// Construction parameters used for diagnostics and provenance.
    GeometrySpec spec;

    double fluid_area() const;
    double triangle_area(int t) const;
    bool has_tag(EdgeTag tag) const;
    std::vector<TaggedEdge> edges_with_tag(EdgeTag tag) const;

    /// Validates conformity, orientation, tag coverage and periodic-pair
    /// coordinate matching. Throws std::runtime_error on violation.
    void check_valid() const;
};

/// Builders for the four domain families. All meshes pass check_valid().
TriMesh build_unit_cell(double d, double h, int circle_segments = 16);
TriMesh build_stripe(int m, double d, double h, int circle_segments = 16);
TriMesh build_perforated_domain(double eps, double d, double shift, Rect bounds,
                                double h_porous, double h_free, int circle_segments = 16);
/// Plain rectangle, no inclusions. One edge may be tagged interface_S instead
/// of its positional tag: pass interface_edge = tag of the side that is the
/// coupling interface (EdgeTag::top or EdgeTag::bottom), or -1 for none.
TriMesh build_rectangle(Rect bounds, double h, int interface_edge = -1);

/// Uniform refinement. factor 2 splits every triangle in four once, factor 4
/// twice. Obstacle-boundary midpoints are re-projected onto the true circle;
/// tags, periodic maps and interface pairs are rebuilt.
TriMesh refine(const TriMesh& mesh, int factor);

/// Plain-text mesh serialization (format: docs/formats.md).
void write_trimesh(const TriMesh& mesh, std::ostream& os);
TriMesh read_trimesh(std::istream& is);

}  // namespace fpflow

#endif  // FPFLOW_TRIMESH_HPP
