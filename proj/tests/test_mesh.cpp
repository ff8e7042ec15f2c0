#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "fpflow/mesher.hpp"
#include "fpflow/trimesh.hpp"

using namespace fpflow;

namespace {

// Unique undirected edges of a mesh.
std::set<std::pair<int, int>> mesh_edges(const TriMesh& m) {
    std::set<std::pair<int, int>> edges;
    for (const auto& t : m.triangles)
        for (int k = 0; k < 3; ++k)
            edges.insert({std::min(t[k], t[(k + 1) % 3]), std::max(t[k], t[(k + 1) % 3])});
    return edges;
}

// Euler characteristic V - E + T of the triangulated surface; equals
// 1 - (number of interior holes) for a connected planar region.
int euler_characteristic(const TriMesh& m) {
    return static_cast<int>(m.vertices.size()) - static_cast<int>(mesh_edges(m).size()) +
           static_cast<int>(m.triangles.size());
}

// Connected components of the triangle adjacency graph (shared edges).
int triangle_components(const TriMesh& m) {
    std::map<std::pair<int, int>, std::vector<int>> by_edge;
    for (int t = 0; t < static_cast<int>(m.triangles.size()); ++t)
        for (int k = 0; k < 3; ++k) {
            const auto& tr = m.triangles[t];
            by_edge[{std::min(tr[k], tr[(k + 1) % 3]), std::max(tr[k], tr[(k + 1) % 3])}].push_back(t);
        }
    std::vector<int> comp(m.triangles.size(), -1);
    int n_comp = 0;
    for (int s = 0; s < static_cast<int>(m.triangles.size()); ++s) {
        if (comp[s] >= 0) continue;
        std::vector<int> stack{s};
        comp[s] = n_comp;
        while (!stack.empty()) {
            const int t = stack.back();
            stack.pop_back();
            const auto& tr = m.triangles[t];
            for (int k = 0; k < 3; ++k)
                for (const int u :
                     by_edge[{std::min(tr[k], tr[(k + 1) % 3]), std::max(tr[k], tr[(k + 1) % 3])}])
                    if (comp[u] < 0) {
                        comp[u] = n_comp;
                        stack.push_back(u);
                    }
        }
        ++n_comp;
    }
    return n_comp;
}

int count_tag(const TriMesh& m, EdgeTag tag) {
    return static_cast<int>(m.edges_with_tag(tag).size());
}

}  // namespace

TEST_CASE("mesher primitives") {
    CHECK(point_segment_distance({0.0, 1.0}, {-1.0, 0.0}, {1.0, 0.0}) == doctest::Approx(1.0));
    CHECK(point_segment_distance({3.0, 0.0}, {-1.0, 0.0}, {1.0, 0.0}) == doctest::Approx(2.0));
    const std::vector<Vec2> square{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    CHECK(point_in_polygon({0.5, 0.5}, square));
    CHECK(!point_in_polygon({1.5, 0.5}, square));
    // Jitter is deterministic and bounded.
    const double j1 = lattice_jitter(3, 7, 42);
    const double j2 = lattice_jitter(3, 7, 42);
    CHECK(j1 == j2);
    CHECK(std::abs(j1) <= 1.0);
    CHECK(lattice_jitter(3, 7, 43) != j1);
}

TEST_CASE("triangulating a plain square PSLG") {
    Pslg p;
    p.points = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    p.segments = {{0, 1, EdgeTag::bottom, true, false},
                  {1, 2, EdgeTag::right, true, false},
                  {2, 3, EdgeTag::top, true, false},
                  {3, 0, EdgeTag::left, true, false}};
    const MeshedPslg m = triangulate_pslg(p);
    CHECK(m.triangles.size() == 2);
    CHECK(m.boundary_edges.size() == 4);
    CHECK(m.segment_splits == 0);
    double area = 0.0;
    for (const auto& t : m.triangles)
        area += 0.5 * cross(m.vertices[t[1]] - m.vertices[t[0]], m.vertices[t[2]] - m.vertices[t[0]]);
    CHECK(area == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("PSLG with an unclosed boundary is rejected") {
    Pslg p;
    p.points = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    p.segments = {{0, 1, EdgeTag::bottom, true, false},
                  {1, 2, EdgeTag::right, true, false},
                  {2, 3, EdgeTag::top, true, false}};  // left side missing
    CHECK_THROWS_AS(triangulate_pslg(p), std::runtime_error);
}

TEST_CASE("unit cell mesh: area bookkeeping and structure") {
    const double d = 0.5;
    const TriMesh m = build_unit_cell(d, 0.05);
    m.check_valid();

    // The polygonal obstacle area is matched exactly by the triangulation.
    const int nseg = m.spec.circle_segments;
    CHECK(nseg == 63);  // max(16, ceil(2*pi*0.25 / 0.025))
    const double expected = 1.0 - polygon_area(0.25, nseg);
    CHECK(std::abs(m.fluid_area() - expected) <= 1e-9);

    // And the polygon resolution keeps the discretized area within 0.2%
    // of the true circular-obstacle value 1 - pi d^2 / 4.
    const double exact = 0.8036504591506379;
    CHECK(std::abs(m.fluid_area() - exact) / exact <= 0.002);

    // 21 subdivision points per side -> 20 tagged edges per wall.
    CHECK(count_tag(m, EdgeTag::bottom) == 20);
    CHECK(count_tag(m, EdgeTag::top) == 20);
    CHECK(count_tag(m, EdgeTag::left) == 20);
    CHECK(count_tag(m, EdgeTag::right) == 20);
    CHECK(count_tag(m, EdgeTag::obstacle) == nseg);

    // One interior hole: V - E + T = 1 - 1 = 0.
    CHECK(euler_characteristic(m) == 0);
    CHECK(triangle_components(m) == 1);
    CHECK(m.interface_pairs.empty());

    REQUIRE(m.periodic_maps.size() == 2);
    for (const PeriodicMap& pm : m.periodic_maps) {
        CHECK(pm.pairs.size() == 21);
        for (const auto& [master, slave] : pm.pairs) {
            const Vec2 a = m.vertices[master], b = m.vertices[slave];
            if (pm.direction == PeriodicMap::Direction::x1) {
                CHECK(std::abs(b.x - a.x - 1.0) <= 1e-12);
                CHECK(std::abs(b.y - a.y) <= 1e-12);
            } else {
                CHECK(std::abs(b.y - a.y - 1.0) <= 1e-12);
                CHECK(std::abs(b.x - a.x) <= 1e-12);
            }
        }
    }
}

TEST_CASE("refinement re-projects the obstacle and quarters the area deficit") {
    const TriMesh m = build_unit_cell(0.5, 0.1);
    const int n0 = m.spec.circle_segments;
    CHECK(n0 == 32);

    const TriMesh r2 = refine(m, 2);
    CHECK(r2.triangles.size() == 4 * m.triangles.size());
    // Midpoints of obstacle chords land exactly on the circle: the refined
    // obstacle is the inscribed regular polygon with twice the segments.
    CHECK(std::abs(r2.fluid_area() - (1.0 - polygon_area(0.25, 2 * n0))) <= 1e-9);

    const TriMesh r4 = refine(m, 4);
    CHECK(r4.triangles.size() == 16 * m.triangles.size());
    CHECK(std::abs(r4.fluid_area() - (1.0 - polygon_area(0.25, 4 * n0))) <= 1e-9);

    // The polygonal area deficit decays quadratically with resolution.
    const double circle = M_PI * 0.25 * 0.25;
    const double def0 = circle - polygon_area(0.25, n0);
    const double def1 = circle - polygon_area(0.25, 2 * n0);
    CHECK(def0 / def1 > 3.9);
    CHECK(def0 / def1 < 4.1);

    // Refinement preserves the periodic pairing (each boundary edge
    // midpoint joins its partner).
    REQUIRE(r2.periodic_maps.size() == 2);
    CHECK(r2.periodic_maps[0].pairs.size() == 21);  // 11 vertices + 10 edge midpoints
    r2.check_valid();
    r4.check_valid();
}

TEST_CASE("rectangle meshes: exact area, interface tagging, matching traces") {
    const TriMesh plain = build_rectangle(Rect{0.0, 1.0, 0.0, 1.0}, 0.6);
    CHECK(std::abs(plain.fluid_area() - 1.0) <= 1e-9);
    const TriMesh pr = refine(plain, 2);
    CHECK(pr.triangles.size() == 4 * plain.triangles.size());
    CHECK(std::abs(pr.fluid_area() - 1.0) <= 1e-9);

    // The free-flow box couples through its bottom edge, the porous box
    // through its top edge; both carry the interface tag with the half-plane
    // side of their own domain, and their interface subdivisions coincide.
    const TriMesh ff = build_rectangle(Rect{0.0, 1.0, 0.0, 0.5}, 0.1, static_cast<int>(EdgeTag::bottom));
    const TriMesh pm = build_rectangle(Rect{0.0, 1.0, -0.5, 0.0}, 0.1, static_cast<int>(EdgeTag::top));
    CHECK(!ff.has_tag(EdgeTag::bottom));
    CHECK(!pm.has_tag(EdgeTag::top));
    auto xs_of = [](const TriMesh& m) {
        std::vector<double> xs;
        for (const TaggedEdge& e : m.edges_with_tag(EdgeTag::interface_S)) {
            xs.push_back(m.vertices[e.v0].x);
            xs.push_back(m.vertices[e.v1].x);
        }
        std::sort(xs.begin(), xs.end());
        xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
        return xs;
    };
    const std::vector<double> xf = xs_of(ff);
    const std::vector<double> xp = xs_of(pm);
    REQUIRE(xf.size() == 11);
    CHECK(xf == xp);  // bitwise identical trace subdivisions
    for (const TaggedEdge& e : ff.edges_with_tag(EdgeTag::interface_S)) CHECK(e.side == +1);
    for (const TaggedEdge& e : pm.edges_with_tag(EdgeTag::interface_S)) CHECK(e.side == -1);
}

TEST_CASE("stripe mesh: duplicated interface line") {
    const int m_cells = 2;
    const TriMesh m = build_stripe(m_cells, 0.5, 0.1);
    m.check_valid();

    const int nseg = m.spec.circle_segments;
    CHECK(nseg == 32);
    const double expected = 2.0 * m_cells - m_cells * polygon_area(0.25, nseg);
    CHECK(std::abs(m.fluid_area() - expected) <= 1e-9);
    const double exact = 3.607300918301276;  // 2*m - 2*(pi/16)
    CHECK(std::abs(m.fluid_area() - exact) / exact <= 0.002);

    // 11 interface vertices duplicated into coincident pairs; 10 edges per side.
    REQUIRE(m.interface_pairs.size() == 11);
    const auto s_edges = m.edges_with_tag(EdgeTag::interface_S);
    CHECK(s_edges.size() == 20);
    int n_plus = 0, n_minus = 0;
    for (const TaggedEdge& e : s_edges) (e.side > 0 ? n_plus : n_minus)++;
    CHECK(n_plus == 10);
    CHECK(n_minus == 10);

    // The duplicated line separates the mesh into two components.
    CHECK(triangle_components(m) == 2);

    // Each interface edge's triangle lies in the half its side claims.
    std::map<std::pair<int, int>, std::vector<int>> by_edge;
    for (int t = 0; t < static_cast<int>(m.triangles.size()); ++t)
        for (int k = 0; k < 3; ++k) {
            const auto& tr = m.triangles[t];
            by_edge[{std::min(tr[k], tr[(k + 1) % 3]), std::max(tr[k], tr[(k + 1) % 3])}].push_back(t);
        }
    for (const TaggedEdge& e : s_edges) {
        const auto& tris = by_edge.at({std::min(e.v0, e.v1), std::max(e.v0, e.v1)});
        REQUIRE(tris.size() == 1);
        const auto& tr = m.triangles[tris[0]];
        const double cy = (m.vertices[tr[0]].y + m.vertices[tr[1]].y + m.vertices[tr[2]].y) / 3.0;
        CHECK((e.side > 0 ? cy > 0.0 : cy < 0.0));
    }

    // Lateral periodicity spans both halves and both interface copies.
    REQUIRE(m.periodic_maps.size() == 1);
    CHECK(m.periodic_maps[0].pairs.size() == 42);  // 41 side vertices + the duplicated corner

    // Refinement doubles the interface subdivision on both copies.
    const TriMesh r = refine(m, 2);
    CHECK(r.interface_pairs.size() == 21);
    CHECK(r.edges_with_tag(EdgeTag::interface_S).size() == 40);
    CHECK(triangle_components(r) == 2);
}

TEST_CASE("perforated domain: lattice of inclusions with wall wrapping") {
    const double eps = 0.05, d = 0.5;
    const Rect box{0.0, 1.0, -0.5, 0.5};
    const double h_p = eps / 6.0, h_f = 0.02;

    const TriMesh m0 = build_perforated_domain(eps, d, 0.0, box, h_p, h_f);
    m0.check_valid();
    REQUIRE(m0.circles.size() == 200);
    for (const Circle& c : m0.circles) CHECK(!c.clipped);
    CHECK(euler_characteristic(m0) == 1 - 200);

    const double r = 0.5 * d * eps;
    const int nseg = m0.spec.circle_segments;
    const double expected = 1.0 - 200.0 * polygon_area(r, nseg);
    CHECK(std::abs(m0.fluid_area() - expected) <= 1e-9);
    const double exact = 0.901825229575319;  // 1 - 200 pi r^2
    CHECK(std::abs(m0.fluid_area() - exact) / exact <= 0.005);

    // A half-cell shift pushes one column onto the lateral walls; the wrapped
    // halves together preserve the solid volume up to the wall-snap margin.
    const TriMesh m5 = build_perforated_domain(eps, d, 0.5, box, h_p, h_f);
    m5.check_valid();
    int clipped = 0;
    for (const Circle& c : m5.circles) clipped += c.clipped ? 1 : 0;
    CHECK(clipped == 20);  // 10 rows, base + wrapped copy each
    CHECK(std::abs(m5.fluid_area() - m0.fluid_area()) <= 1e-3);

    // A quarter shift makes one column exactly tangent to the right wall;
    // the snap margin absorbs the tangency without degenerate geometry.
    const TriMesh m25 = build_perforated_domain(eps, d, 0.25, box, h_p, h_f);
    m25.check_valid();
    clipped = 0;
    for (const Circle& c : m25.circles) clipped += c.clipped ? 1 : 0;
    CHECK(clipped == 10);
    CHECK(std::abs(m25.fluid_area() - m0.fluid_area()) <= 2e-3);
}

TEST_CASE("mesh serialization round-trip") {
    const TriMesh m = build_stripe(1, 0.5, 0.2);
    std::stringstream ss;
    write_trimesh(m, ss);
    const TriMesh r = read_trimesh(ss);
    REQUIRE(r.vertices.size() == m.vertices.size());
    for (std::size_t i = 0; i < m.vertices.size(); ++i) {
        CHECK(r.vertices[i].x == m.vertices[i].x);
        CHECK(r.vertices[i].y == m.vertices[i].y);
    }
    CHECK(r.triangles == m.triangles);
    REQUIRE(r.edge_tags.size() == m.edge_tags.size());
    for (std::size_t i = 0; i < m.edge_tags.size(); ++i) {
        CHECK(r.edge_tags[i].v0 == m.edge_tags[i].v0);
        CHECK(r.edge_tags[i].v1 == m.edge_tags[i].v1);
        CHECK(r.edge_tags[i].tag == m.edge_tags[i].tag);
        CHECK(r.edge_tags[i].side == m.edge_tags[i].side);
    }
    REQUIRE(r.periodic_maps.size() == m.periodic_maps.size());
    for (std::size_t i = 0; i < m.periodic_maps.size(); ++i)
        CHECK(r.periodic_maps[i].pairs == m.periodic_maps[i].pairs);
    CHECK(r.interface_pairs == m.interface_pairs);
    REQUIRE(r.circles.size() == m.circles.size());
    for (std::size_t i = 0; i < m.circles.size(); ++i) {
        CHECK(r.circles[i].center.x == m.circles[i].center.x);
        CHECK(r.circles[i].radius == m.circles[i].radius);
        CHECK(r.circles[i].clipped == m.circles[i].clipped);
    }
    CHECK(r.spec.kind == m.spec.kind);
    CHECK(r.spec.circle_segments == m.spec.circle_segments);
    CHECK(r.fluid_area() == m.fluid_area());
}

TEST_CASE("mesh builds are deterministic") {
    const TriMesh a = build_unit_cell(0.5, 0.1);
    const TriMesh b = build_unit_cell(0.5, 0.1);
    REQUIRE(a.vertices.size() == b.vertices.size());
    for (std::size_t i = 0; i < a.vertices.size(); ++i) {
        CHECK(a.vertices[i].x == b.vertices[i].x);
        CHECK(a.vertices[i].y == b.vertices[i].y);
    }
    CHECK(a.triangles == b.triangles);
}
