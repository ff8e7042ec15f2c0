#pragma once

// Constrained Delaunay mesh generation from a planar straight-line graph.
//
// The input is a PSLG: a point set, tagged constraint segments between those
// points, hole polygons (closed loops whose interior is removed from the
// triangulation), and optional interior seed points that control element
// size.  The output is a conforming triangulation of the region bounded by
// the constraint segments, with every hole removed and every boundary edge
// carrying the tag of the constraint segment it came from.
//
// The algorithm is incremental Bowyer-Watson insertion with an epsilon-
// filtered orientation/incircle predicate pair (double fast path, long
// double fallback) and a star-shape repair pass on each insertion cavity,
// which keeps the triangulation valid when many input points are exactly
// cocircular (structured grids, regular polygons).  Constraint segments are
// recovered after insertion; with boundary subdivisions no coarser than the
// interior spacing this succeeds without edge splits, and the mesher refuses
// to split segments marked as split-forbidden (periodic boundaries must
// stay identical on both sides) rather than silently desynchronizing them.

#include <array>
#include <cstdint>
#include <vector>

#include "fpflow/geometry.hpp"
#include "fpflow/trimesh.hpp"

namespace fpflow {

struct PslgSegment {
    int a = -1;             // endpoint indices into Pslg::points
    int b = -1;
    EdgeTag tag = EdgeTag::obstacle;
    bool allow_split = true;   // false for periodically paired boundary pieces
    bool interior = false;     // true: constrained interior line (kept, not a boundary)
};

struct Pslg {
    std::vector<Vec2> points;
    std::vector<PslgSegment> segments;
    // Closed loops (not self-intersecting); triangles whose centroid falls
    // inside any loop are removed.  Loop edges that bound the fluid region
    // must also appear in `segments`; chord closures along outer walls may
    // appear only here.
    std::vector<std::vector<Vec2>> hole_polygons;
    std::vector<Vec2> interior_points;
};

struct MeshedPslg {
    std::vector<Vec2> vertices;
    std::vector<std::array<int, 3>> triangles;   // CCW
    std::vector<TaggedEdge> boundary_edges;      // tag inherited from segments
    std::vector<TaggedEdge> interior_edges;      // recovered interior constraints
    int segment_splits = 0;                      // how many constraints needed splitting
};

// Triangulates the PSLG.  Throws std::runtime_error on invalid input, on a
// constraint that cannot be recovered, or on an untagged boundary edge.
MeshedPslg triangulate_pslg(const Pslg& pslg);

// Distance from point p to segment [a,b].
double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b);

// Winding-number point-in-polygon test (closed loop, any orientation).
bool point_in_polygon(const Vec2& p, const std::vector<Vec2>& poly);

// Deterministic jitter in [-1,1] derived from integer lattice coordinates;
// used to displace structured seed points so no four are exactly cocircular.
double lattice_jitter(std::int64_t ix, std::int64_t iy, std::uint64_t salt);

}  // namespace fpflow
