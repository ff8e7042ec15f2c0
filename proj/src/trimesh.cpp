#include "fpflow/trimesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "fpflow/mesher.hpp"

namespace fpflow {

namespace {

constexpr double kCoordTol = 1e-12;

struct EKey {
    int a, b;
    EKey(int u, int v) : a(std::min(u, v)), b(std::max(u, v)) {}
    bool operator==(const EKey& o) const { return a == o.a && b == o.b; }
    bool operator<(const EKey& o) const { return a != o.a ? a < o.a : b < o.b; }
};
struct EKeyHash {
    std::size_t operator()(const EKey& k) const {
        return std::hash<std::uint64_t>()((static_cast<std::uint64_t>(static_cast<std::uint32_t>(k.a)) << 32) |
                                          static_cast<std::uint64_t>(static_cast<std::uint32_t>(k.b)));
    }
};

std::vector<double> spaced(double a, double b, double h) {
    if (!(b > a) || !(h > 0.0)) throw std::invalid_argument("spaced: need b > a and h > 0");
    const int n = std::max(1, static_cast<int>(std::ceil((b - a) / h - 1e-9)));
    std::vector<double> v(n + 1);
    for (int i = 0; i <= n; ++i) v[i] = a + (b - a) * static_cast<double>(i) / n;
    v[0] = a;
    v[n] = b;
    return v;
}

// Subdivision of [a,b] honoring a y-dependent target spacing, placing a
// point exactly at 0 when the interval crosses it.
std::vector<double> spaced_graded(double a, double b, const std::function<double(double)>& h) {
    if (a < 0.0 && b > 0.0) {
        std::vector<double> lo = spaced(a, 0.0, h(0.5 * a));
        const std::vector<double> hi = spaced(0.0, b, h(0.5 * b));
        lo.insert(lo.end(), hi.begin() + 1, hi.end());
        return lo;
    }
    return spaced(a, b, h(0.5 * (a + b)));
}

struct PslgBuilder {
    Pslg pslg;

    int pt(Vec2 p) {
        pslg.points.push_back(p);
        return static_cast<int>(pslg.points.size()) - 1;
    }
    void seg(int a, int b, EdgeTag tag, bool allow_split, bool interior = false) {
        pslg.segments.push_back({a, b, tag, allow_split, interior});
    }
    void chain(const std::vector<int>& ids, EdgeTag tag, bool allow_split, bool interior = false) {
        for (std::size_t i = 0; i + 1 < ids.size(); ++i) seg(ids[i], ids[i + 1], tag, allow_split, interior);
    }
};

struct CircleLoop {
    std::vector<int> ids;      // polygon vertex ids (closed implicitly)
    std::vector<Vec2> coords;  // same points, used as the hole polygon
};

int circle_segment_count(double r, double h, int min_segments) {
    const double arc_spacing = 0.5 * h;
    return std::max(min_segments, static_cast<int>(std::ceil(2.0 * M_PI * r / arc_spacing)));
}

CircleLoop add_full_circle(PslgBuilder& B, Vec2 c, double r, int nseg) {
    CircleLoop loop;
    const double phase = M_PI / nseg;  // no vertex exactly on a lattice axis
    for (int k = 0; k < nseg; ++k) {
        const double th = phase + 2.0 * M_PI * k / nseg;
        const Vec2 p{c.x + r * std::cos(th), c.y + r * std::sin(th)};
        loop.ids.push_back(B.pt(p));
        loop.coords.push_back(p);
    }
    for (int k = 0; k < nseg; ++k)
        B.seg(loop.ids[k], loop.ids[(k + 1) % nseg], EdgeTag::obstacle, true);
    B.pslg.hole_polygons.push_back(loop.coords);
    return loop;
}

// A circle cut by a lateral wall.  The meshed solid is the disc restricted
// to the domain side of a clip line g_min inside the wall, closed by two
// short connectors to chord points placed exactly on the wall; the sub-g_min
// sliver between obstacle and wall is deliberately blocked (it carries no
// flow and would otherwise force degenerate elements).
struct ClippedCircle {
    double y_lo = 0.0, y_hi = 0.0;  // blocked wall interval
    int wall_lo_id = -1, wall_hi_id = -1;
    std::vector<Vec2> hole_poly;
    double solid_area = 0.0;
};

double shoelace(const std::vector<Vec2>& poly) {
    double s = 0.0;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++)
        s += cross(poly[j], poly[i]);
    return 0.5 * std::abs(s);
}

// wall_side = +1: wall on the right at x = wall_x (solid keeps x <= clip);
// wall_side = -1: wall on the left (solid keeps x >= clip).
ClippedCircle add_clipped_circle(PslgBuilder& B, Vec2 c, double r, int nseg, double wall_x,
                                 int wall_side, double g_min) {
    const double clip_x = wall_x - wall_side * g_min;
    const double q = (clip_x - c.x) / (wall_side > 0 ? r : -r);  // cos of the half-opening
    if (!(q > -1.0 && q < 1.0)) throw std::logic_error("clipped circle: clip line misses the disc");
    const double th_c = std::acos(q);
    const double w = r * std::sin(th_c);

    // Kept arc: the part of the circle on the domain side of the clip line.
    // Right wall: angles th in [th_c, 2pi - th_c].  Left wall: the mirror.
    const double span = 2.0 * (M_PI - th_c);
    const int n_arc = std::max(5, static_cast<int>(std::ceil(nseg * span / (2.0 * M_PI))));
    std::vector<int> arc_ids;
    std::vector<Vec2> arc_pts;
    for (int k = 0; k <= n_arc; ++k) {
        double th = th_c + span * static_cast<double>(k) / n_arc;
        if (wall_side < 0) th = th + M_PI;  // mirror: keep the x >= clip side
        Vec2 p{c.x + r * std::cos(th), c.y + r * std::sin(th)};
        if (k == 0) p = {clip_x, c.y + (wall_side > 0 ? w : -w)};
        if (k == n_arc) p = {clip_x, c.y - (wall_side > 0 ? w : -w)};
        arc_ids.push_back(B.pt(p));
        arc_pts.push_back(p);
    }

    ClippedCircle out;
    out.y_lo = c.y - w;
    out.y_hi = c.y + w;
    const Vec2 wall_lo{wall_x, out.y_lo};
    const Vec2 wall_hi{wall_x, out.y_hi};
    out.wall_lo_id = B.pt(wall_lo);
    out.wall_hi_id = B.pt(wall_hi);

    // Connectors from the chord points on the wall to the arc endpoints.
    const int arc_hi = (wall_side > 0) ? arc_ids.front() : arc_ids.back();
    const int arc_lo = (wall_side > 0) ? arc_ids.back() : arc_ids.front();
    B.seg(out.wall_hi_id, arc_hi, EdgeTag::obstacle, true);
    B.chain(arc_ids, EdgeTag::obstacle, true);
    B.seg(arc_lo, out.wall_lo_id, EdgeTag::obstacle, true);

    // Simple closed loop: wall chord bottom -> top, then the arc from its
    // top endpoint down to its bottom endpoint (the chord closes the loop).
    out.hole_poly.clear();
    out.hole_poly.push_back(wall_lo);
    out.hole_poly.push_back(wall_hi);
    if (wall_side > 0)
        out.hole_poly.insert(out.hole_poly.end(), arc_pts.begin(), arc_pts.end());
    else
        out.hole_poly.insert(out.hole_poly.end(), arc_pts.rbegin(), arc_pts.rend());
    out.solid_area = shoelace(out.hole_poly);
    B.pslg.hole_polygons.push_back(out.hole_poly);
    return out;
}

// Structured interior seed lattice with deterministic jitter, buffered away
// from every constraint segment and every hole polygon.
void add_seeds(PslgBuilder& B, const Rect& box, const std::function<double(double)>& hfun) {
    struct SegBox {
        Vec2 a, b;
        Rect bb;
    };
    std::vector<SegBox> segs;
    segs.reserve(B.pslg.segments.size());
    for (const PslgSegment& s : B.pslg.segments) {
        const Vec2 a = B.pslg.points[s.a];
        const Vec2 b = B.pslg.points[s.b];
        segs.push_back({a, b,
                        Rect{std::min(a.x, b.x), std::max(a.x, b.x), std::min(a.y, b.y), std::max(a.y, b.y)}});
    }
    std::vector<Rect> hole_bb;
    for (const auto& poly : B.pslg.hole_polygons) {
        Rect r{1e300, -1e300, 1e300, -1e300};
        for (const Vec2& q : poly) {
            r.x_min = std::min(r.x_min, q.x);
            r.x_max = std::max(r.x_max, q.x);
            r.y_min = std::min(r.y_min, q.y);
            r.y_max = std::max(r.y_max, q.y);
        }
        hole_bb.push_back(r);
    }

    double y = box.y_min;
    std::int64_t row = 0;
    while (true) {
        const double hy = hfun(std::min(y + 0.5 * hfun(y), box.y_max));
        const double yc = y + 0.5 * hy;
        if (yc >= box.y_max) break;
        const double hx = hy;
        const int nx = std::max(1, static_cast<int>(std::round(box.width() / hx)));
        for (int i = 0; i < nx; ++i) {
            const double xc = box.x_min + (i + 0.5) * box.width() / nx;
            const Vec2 p{xc + 0.15 * hx * lattice_jitter(i, row, 0x5eedu),
                         yc + 0.15 * hy * lattice_jitter(i, row, 0xca11u)};
            if (p.x <= box.x_min || p.x >= box.x_max || p.y <= box.y_min || p.y >= box.y_max) continue;
            const double buffer = 0.5 * hy;
            bool ok = true;
            for (const SegBox& s : segs) {
                if (p.x < s.bb.x_min - buffer || p.x > s.bb.x_max + buffer || p.y < s.bb.y_min - buffer ||
                    p.y > s.bb.y_max + buffer)
                    continue;
                if (point_segment_distance(p, s.a, s.b) < buffer) {
                    ok = false;
                    break;
                }
            }
            if (ok)
                for (std::size_t hidx = 0; hidx < hole_bb.size(); ++hidx) {
                    const Rect& r = hole_bb[hidx];
                    if (p.x < r.x_min || p.x > r.x_max || p.y < r.y_min || p.y > r.y_max) continue;
                    if (point_in_polygon(p, B.pslg.hole_polygons[hidx])) {
                        ok = false;
                        break;
                    }
                }
            if (ok) B.pslg.interior_points.push_back(p);
        }
        y += hy;
        ++row;
    }
}

// Shared tail of every builder: triangulate, transfer, sanity-check area.
TriMesh finish_mesh(PslgBuilder& B, GeometrySpec spec, std::vector<Circle> circles,
                    double expected_area, bool expect_interior_edges,
                    std::vector<TaggedEdge>* interior_out = nullptr) {
    MeshedPslg m = triangulate_pslg(B.pslg);
    TriMesh mesh;
    mesh.vertices = std::move(m.vertices);
    mesh.triangles = std::move(m.triangles);
    mesh.edge_tags = std::move(m.boundary_edges);
    mesh.circles = std::move(circles);
    mesh.spec = spec;
    if (!expect_interior_edges && !m.interior_edges.empty())
        throw std::runtime_error("mesh builder: unexpected interior constrained edges");
    if (interior_out) *interior_out = std::move(m.interior_edges);
    const double area = mesh.fluid_area();
    if (std::abs(area - expected_area) > 1e-9 * std::max(1.0, expected_area)) {
        std::ostringstream os;
        os << "mesh builder: fluid area " << area << " differs from the exact polygonal area "
           << expected_area;
        throw std::runtime_error(os.str());
    }
    return mesh;
}

}  // namespace

std::string to_string(EdgeTag tag) {
    switch (tag) {
        case EdgeTag::obstacle: return "obstacle";
        case EdgeTag::top: return "top";
        case EdgeTag::bottom: return "bottom";
        case EdgeTag::left: return "left";
        case EdgeTag::right: return "right";
        case EdgeTag::interface_S: return "interface";
    }
    throw std::logic_error("unknown EdgeTag");
}

EdgeTag edge_tag_from_string(const std::string& s) {
    if (s == "obstacle") return EdgeTag::obstacle;
    if (s == "top") return EdgeTag::top;
    if (s == "bottom") return EdgeTag::bottom;
    if (s == "left") return EdgeTag::left;
    if (s == "right") return EdgeTag::right;
    if (s == "interface") return EdgeTag::interface_S;
    throw std::invalid_argument("unknown edge tag: " + s);
}

double TriMesh::triangle_area(int t) const {
    const auto& tr = triangles.at(t);
    return 0.5 * cross(vertices[tr[1]] - vertices[tr[0]], vertices[tr[2]] - vertices[tr[0]]);
}

double TriMesh::fluid_area() const {
    double a = 0.0;
    for (int t = 0; t < static_cast<int>(triangles.size()); ++t) a += triangle_area(t);
    return a;
}

bool TriMesh::has_tag(EdgeTag tag) const {
    for (const TaggedEdge& e : edge_tags)
        if (e.tag == tag) return true;
    return false;
}

std::vector<TaggedEdge> TriMesh::edges_with_tag(EdgeTag tag) const {
    std::vector<TaggedEdge> out;
    for (const TaggedEdge& e : edge_tags)
        if (e.tag == tag) out.push_back(e);
    return out;
}

void TriMesh::check_valid() const {
    const int nv = static_cast<int>(vertices.size());
    for (const Vec2& p : vertices)
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            throw std::runtime_error("mesh: non-finite vertex");
    std::unordered_map<EKey, int, EKeyHash> count;
    for (int t = 0; t < static_cast<int>(triangles.size()); ++t) {
        for (const int v : triangles[t])
            if (v < 0 || v >= nv) throw std::runtime_error("mesh: triangle index out of range");
        if (triangle_area(t) <= 0.0) throw std::runtime_error("mesh: non-CCW or degenerate triangle");
        for (int k = 0; k < 3; ++k) count[EKey(triangles[t][k], triangles[t][(k + 1) % 3])] += 1;
    }
    std::unordered_set<EKey, EKeyHash> tagged;
    for (const TaggedEdge& e : edge_tags) {
        const EKey key(e.v0, e.v1);
        auto it = count.find(key);
        if (it == count.end()) throw std::runtime_error("mesh: tagged edge is not a mesh edge");
        if (it->second != 1) throw std::runtime_error("mesh: tagged edge is not a boundary edge");
        if (!tagged.insert(key).second) throw std::runtime_error("mesh: duplicate tagged edge");
        if (e.tag == EdgeTag::interface_S) {
            if (e.side != 1 && e.side != -1)
                throw std::runtime_error("mesh: interface edge without a side");
        } else if (e.side != 0) {
            throw std::runtime_error("mesh: non-interface edge with a side");
        }
    }
    for (const auto& [key, n] : count) {
        if (n > 2) throw std::runtime_error("mesh: non-manifold edge");
        if (n == 1 && !tagged.count(key)) throw std::runtime_error("mesh: untagged boundary edge");
    }
    for (const PeriodicMap& pm : periodic_maps) {
        const double period =
            pm.direction == PeriodicMap::Direction::x1 ? spec.bounds.width() : spec.bounds.height();
        for (const auto& [master, slave] : pm.pairs) {
            if (master < 0 || master >= nv || slave < 0 || slave >= nv)
                throw std::runtime_error("mesh: periodic pair index out of range");
            const Vec2 a = vertices[master], b = vertices[slave];
            const double dp = pm.direction == PeriodicMap::Direction::x1 ? b.x - a.x : b.y - a.y;
            const double dq = pm.direction == PeriodicMap::Direction::x1 ? b.y - a.y : b.x - a.x;
            if (std::abs(dp - period) > kCoordTol || std::abs(dq) > kCoordTol)
                throw std::runtime_error("mesh: periodic pair coordinates do not match");
        }
    }
    for (const auto& [minus, plus] : interface_pairs) {
        if (minus < 0 || minus >= nv || plus < 0 || plus >= nv || minus == plus)
            throw std::runtime_error("mesh: invalid interface pair");
        if (std::abs(vertices[minus].x - vertices[plus].x) > kCoordTol ||
            std::abs(vertices[minus].y - vertices[plus].y) > kCoordTol)
            throw std::runtime_error("mesh: interface pair vertices are not coincident");
    }
    for (const Circle& c : circles)
        if (!(c.radius > 0.0)) throw std::runtime_error("mesh: circle with non-positive radius");
}

TriMesh build_unit_cell(double d, double h, int circle_segments) {
    if (!(d > 0.0 && d < 1.0)) throw std::invalid_argument("build_unit_cell: need 0 < d < 1");
    if (!(h > 0.0)) throw std::invalid_argument("build_unit_cell: need h > 0");
    const double r = 0.5 * d;
    PslgBuilder B;

    const std::vector<double> xs = spaced(0.0, 1.0, h);
    const int n = static_cast<int>(xs.size());
    std::vector<int> bot(n), top(n), left(n), right(n);
    for (int i = 0; i < n; ++i) bot[i] = B.pt({xs[i], 0.0});
    for (int i = 0; i < n; ++i) top[i] = B.pt({xs[i], 1.0});
    left[0] = bot[0];
    right[0] = bot[n - 1];
    for (int j = 1; j + 1 < n; ++j) left[j] = B.pt({0.0, xs[j]});
    for (int j = 1; j + 1 < n; ++j) right[j] = B.pt({1.0, xs[j]});
    left[n - 1] = top[0];
    right[n - 1] = top[n - 1];
    B.chain(bot, EdgeTag::bottom, false);
    B.chain(top, EdgeTag::top, false);
    B.chain(left, EdgeTag::left, false);
    B.chain(right, EdgeTag::right, false);

    const int nseg = circle_segment_count(r, h, circle_segments);
    add_full_circle(B, {0.5, 0.5}, r, nseg);
    add_seeds(B, Rect{0.0, 1.0, 0.0, 1.0}, [h](double) { return h; });

    GeometrySpec spec;
    spec.kind = DomainKind::unit_cell;
    spec.inclusion_diameter = d;
    spec.bounds = Rect{0.0, 1.0, 0.0, 1.0};
    spec.circle_segments = nseg;
    const double expected = 1.0 - polygon_area(r, nseg);
    TriMesh mesh = finish_mesh(B, spec, {Circle{{0.5, 0.5}, r, false}}, expected, false);

    PeriodicMap mx;
    mx.direction = PeriodicMap::Direction::x1;
    for (int j = 0; j < n; ++j) mx.pairs.push_back({left[j], right[j]});
    PeriodicMap my;
    my.direction = PeriodicMap::Direction::y1;
    for (int i = 0; i < n; ++i) my.pairs.push_back({bot[i], top[i]});
    mesh.periodic_maps = {mx, my};
    mesh.check_valid();
    return mesh;
}

TriMesh build_stripe(int m, double d, double h, int circle_segments) {
    if (m < 1) throw std::invalid_argument("build_stripe: need m >= 1");
    if (!(d > 0.0 && d < 1.0)) throw std::invalid_argument("build_stripe: need 0 < d < 1");
    const double r = 0.5 * d;
    PslgBuilder B;

    const std::vector<double> xs = spaced(0.0, 1.0, h);
    const std::vector<double> ys_lo = spaced(-static_cast<double>(m), 0.0, h);
    const std::vector<double> ys_hi = spaced(0.0, static_cast<double>(m), h);
    const int nx = static_cast<int>(xs.size());

    std::vector<int> bot(nx), top(nx);
    for (int i = 0; i < nx; ++i) bot[i] = B.pt({xs[i], -static_cast<double>(m)});
    for (int i = 0; i < nx; ++i) top[i] = B.pt({xs[i], static_cast<double>(m)});

    auto side = [&](double x, int corner_lo, int corner_hi) {
        std::vector<int> ids;
        ids.push_back(corner_lo);
        for (std::size_t j = 1; j + 1 < ys_lo.size(); ++j) ids.push_back(B.pt({x, ys_lo[j]}));
        ids.push_back(B.pt({x, 0.0}));
        for (std::size_t j = 1; j + 1 < ys_hi.size(); ++j) ids.push_back(B.pt({x, ys_hi[j]}));
        ids.push_back(corner_hi);
        return ids;
    };
    const std::vector<int> left = side(0.0, bot[0], top[0]);
    const std::vector<int> right = side(1.0, bot[nx - 1], top[nx - 1]);
    B.chain(bot, EdgeTag::bottom, true);
    B.chain(top, EdgeTag::top, true);
    B.chain(left, EdgeTag::left, false);
    B.chain(right, EdgeTag::right, false);

    const int left_zero = left[static_cast<int>(ys_lo.size()) - 1];
    const int right_zero = right[static_cast<int>(ys_lo.size()) - 1];
    std::vector<int> sline;
    sline.push_back(left_zero);
    for (int i = 1; i + 1 < nx; ++i) sline.push_back(B.pt({xs[i], 0.0}));
    sline.push_back(right_zero);
    B.chain(sline, EdgeTag::interface_S, true, /*interior=*/true);

    const int nseg = circle_segment_count(r, h, circle_segments);
    std::vector<Circle> circles;
    double solid = 0.0;
    for (int k = 1; k <= m; ++k) {
        const Vec2 c{0.5, -(static_cast<double>(k) - 0.5)};
        add_full_circle(B, c, r, nseg);
        circles.push_back({c, r, false});
        solid += polygon_area(r, nseg);
    }
    add_seeds(B, Rect{0.0, 1.0, -static_cast<double>(m), static_cast<double>(m)},
              [h](double) { return h; });

    GeometrySpec spec;
    spec.kind = DomainKind::stripe;
    spec.inclusion_diameter = d;
    spec.stripe_height = m;
    spec.bounds = Rect{0.0, 1.0, -static_cast<double>(m), static_cast<double>(m)};
    spec.circle_segments = nseg;
    std::vector<TaggedEdge> s_edges;
    TriMesh mesh = finish_mesh(B, spec, std::move(circles), 2.0 * m - solid, true, &s_edges);
    for (const TaggedEdge& e : s_edges)
        if (e.tag != EdgeTag::interface_S)
            throw std::runtime_error("build_stripe: unexpected interior constraint tag");

    // Duplicate the interface line: triangles above y = 0 are rewired to
    // fresh copies of the interface vertices, turning the constrained line
    // into a double-valued boundary (one side per half).
    std::vector<int> s_vertices;
    {
        std::unordered_set<int> seen;
        for (const TaggedEdge& e : s_edges) {
            seen.insert(e.v0);
            seen.insert(e.v1);
        }
        s_vertices.assign(seen.begin(), seen.end());
        std::sort(s_vertices.begin(), s_vertices.end(),
                  [&](int a, int b) { return mesh.vertices[a].x < mesh.vertices[b].x; });
    }
    std::unordered_map<int, int> dup;
    for (const int v : s_vertices) {
        dup[v] = static_cast<int>(mesh.vertices.size());
        mesh.vertices.push_back(mesh.vertices[v]);
    }
    for (auto& tri : mesh.triangles) {
        const double cy =
            (mesh.vertices[tri[0]].y + mesh.vertices[tri[1]].y + mesh.vertices[tri[2]].y) / 3.0;
        if (cy > 0.0)
            for (int& v : tri) {
                auto it = dup.find(v);
                if (it != dup.end()) v = it->second;
            }
    }
    for (TaggedEdge& e : mesh.edge_tags) {
        const auto d0 = dup.find(e.v0);
        const auto d1 = dup.find(e.v1);
        if (d0 != dup.end() && d1 == dup.end() && mesh.vertices[e.v1].y > 0.0) e.v0 = d0->second;
        if (d1 != dup.end() && d0 == dup.end() && mesh.vertices[e.v0].y > 0.0) e.v1 = d1->second;
    }
    for (const TaggedEdge& e : s_edges) {
        const bool fwd = mesh.vertices[e.v0].x < mesh.vertices[e.v1].x;
        const int a = fwd ? e.v0 : e.v1;
        const int b = fwd ? e.v1 : e.v0;
        mesh.edge_tags.push_back({a, b, EdgeTag::interface_S, -1});
        mesh.edge_tags.push_back({dup.at(a), dup.at(b), EdgeTag::interface_S, +1});
    }
    for (const int v : s_vertices) mesh.interface_pairs.push_back({v, dup.at(v)});

    PeriodicMap mx;
    mx.direction = PeriodicMap::Direction::x1;
    for (std::size_t j = 0; j < left.size(); ++j) mx.pairs.push_back({left[j], right[j]});
    mx.pairs.push_back({dup.at(left_zero), dup.at(right_zero)});
    mesh.periodic_maps = {mx};
    mesh.check_valid();
    return mesh;
}

TriMesh build_perforated_domain(double eps, double d, double shift, Rect bounds, double h_porous,
                                double h_free, int circle_segments) {
    if (!(eps > 0.0) || !(d > 0.0 && d < 1.0))
        throw std::invalid_argument("build_perforated_domain: bad eps or d");
    if (!(bounds.y_min < 0.0 && bounds.y_max > 0.0))
        throw std::invalid_argument("build_perforated_domain: interface y = 0 must be interior");
    const int cols = static_cast<int>(std::round(bounds.width() / eps));
    const int rows = static_cast<int>(std::round(-bounds.y_min / eps));
    if (std::abs(cols * eps - bounds.width()) > 1e-9 || std::abs(rows * eps + bounds.y_min) > 1e-9)
        throw std::invalid_argument("build_perforated_domain: bounds must be whole multiples of eps");
    const double r = 0.5 * d * eps;
    const double g_min = 0.3 * h_porous;
    const double W_l = bounds.x_min, W_r = bounds.x_max;
    const auto hfun = [h_porous, h_free](double y) { return y < 0.0 ? h_porous : h_free; };

    PslgBuilder B;
    std::vector<Circle> circles;
    double solid = 0.0;
    struct WallGap {
        double lo, hi;
        int lo_id, hi_id;
    };
    std::vector<WallGap> gaps_l, gaps_r;

    const int nseg = circle_segment_count(r, h_porous, circle_segments);
    auto wrap_x = [&](double x) {
        double t = std::fmod(x - bounds.x_min, bounds.width());
        if (t < 0.0) t += bounds.width();
        return bounds.x_min + t;
    };
    auto place = [&](Vec2 c) {
        const bool near_r = c.x + r > W_r - g_min;
        const bool near_l = c.x - r < W_l + g_min;
        if (!near_r && !near_l) {
            add_full_circle(B, c, r, nseg);
            circles.push_back({c, r, false});
            solid += polygon_area(r, nseg);
            return;
        }
        const int wall_side = near_r ? +1 : -1;
        const double wall_x = near_r ? W_r : W_l;
        const double clip_x = wall_x - wall_side * g_min;
        // Negligible inside sliver: the whole in-domain part sits within the
        // snap band, or the clip chord would be degenerate; leave it unmeshed.
        if (wall_side > 0 ? (c.x - r >= clip_x) : (c.x + r <= clip_x)) return;
        const double q = (clip_x - c.x) / r;
        if (r * std::sqrt(std::max(0.0, 1.0 - q * q)) < 0.5 * g_min) return;
        ClippedCircle cc = add_clipped_circle(B, c, r, nseg, wall_x, wall_side, g_min);
        circles.push_back({c, r, true});
        solid += cc.solid_area;
        (near_r ? gaps_r : gaps_l).push_back({cc.y_lo, cc.y_hi, cc.wall_lo_id, cc.wall_hi_id});
    };
    for (int j = 0; j < rows; ++j) {
        const double cy = -(j + 0.5) * eps;
        for (int i = 0; i < cols; ++i) {
            const double cx = wrap_x(bounds.x_min + (i + 0.5 + shift) * eps);
            place({cx, cy});
            if (cx - r < W_l + g_min) place({cx + bounds.width(), cy});
            if (cx + r > W_r - g_min) place({cx - bounds.width(), cy});
        }
    }

    // Bottom and top walls (never touched by inclusions).
    const std::vector<double> xs_b = spaced(bounds.x_min, bounds.x_max, h_porous);
    const std::vector<double> xs_t = spaced(bounds.x_min, bounds.x_max, h_free);
    std::vector<int> bot, top;
    for (const double x : xs_b) bot.push_back(B.pt({x, bounds.y_min}));
    for (const double x : xs_t) top.push_back(B.pt({x, bounds.y_max}));
    B.chain(bot, EdgeTag::bottom, true);
    B.chain(top, EdgeTag::top, true);

    // Lateral walls, split around the blocked chord intervals.
    auto build_wall = [&](double x, std::vector<WallGap> gaps, EdgeTag tag, int corner_lo,
                          int corner_hi) {
        std::sort(gaps.begin(), gaps.end(), [](const WallGap& a, const WallGap& b) { return a.lo < b.lo; });
        double cur = bounds.y_min;
        int cur_id = corner_lo;
        for (const WallGap& g : gaps) {
            if (!(g.lo > cur)) throw std::runtime_error("build_perforated_domain: overlapping wall gaps");
            std::vector<int> piece{cur_id};
            const std::vector<double> ys = spaced_graded(cur, g.lo, hfun);
            for (std::size_t j = 1; j + 1 < ys.size(); ++j) piece.push_back(B.pt({x, ys[j]}));
            piece.push_back(g.lo_id);
            B.chain(piece, tag, true);
            cur = g.hi;
            cur_id = g.hi_id;
        }
        std::vector<int> piece{cur_id};
        const std::vector<double> ys = spaced_graded(cur, bounds.y_max, hfun);
        for (std::size_t j = 1; j + 1 < ys.size(); ++j) piece.push_back(B.pt({x, ys[j]}));
        piece.push_back(corner_hi);
        B.chain(piece, tag, true);
    };
    build_wall(bounds.x_min, gaps_l, EdgeTag::left, bot.front(), top.front());
    build_wall(bounds.x_max, gaps_r, EdgeTag::right, bot.back(), top.back());

    add_seeds(B, bounds, hfun);

    GeometrySpec spec;
    spec.kind = DomainKind::perforated;
    spec.inclusion_diameter = d;
    spec.eps = eps;
    spec.shift = shift;
    spec.bounds = bounds;
    spec.circle_segments = nseg;
    const double expected = bounds.width() * bounds.height() - solid;
    TriMesh mesh = finish_mesh(B, spec, std::move(circles), expected, false);
    mesh.check_valid();
    return mesh;
}

TriMesh build_rectangle(Rect bounds, double h, int interface_edge) {
    if (!(bounds.width() > 0.0 && bounds.height() > 0.0))
        throw std::invalid_argument("build_rectangle: empty bounds");
    if (interface_edge != -1 && interface_edge != static_cast<int>(EdgeTag::top) &&
        interface_edge != static_cast<int>(EdgeTag::bottom))
        throw std::invalid_argument("build_rectangle: interface edge must be top or bottom");
    PslgBuilder B;
    const std::vector<double> xs = spaced(bounds.x_min, bounds.x_max, h);
    const std::vector<double> ys = spaced(bounds.y_min, bounds.y_max, h);
    const int nx = static_cast<int>(xs.size());
    const int ny = static_cast<int>(ys.size());
    std::vector<int> bot(nx), top(nx), left(ny), right(ny);
    for (int i = 0; i < nx; ++i) bot[i] = B.pt({xs[i], bounds.y_min});
    for (int i = 0; i < nx; ++i) top[i] = B.pt({xs[i], bounds.y_max});
    left[0] = bot[0];
    right[0] = bot[nx - 1];
    for (int j = 1; j + 1 < ny; ++j) left[j] = B.pt({bounds.x_min, ys[j]});
    for (int j = 1; j + 1 < ny; ++j) right[j] = B.pt({bounds.x_max, ys[j]});
    left[ny - 1] = top[0];
    right[ny - 1] = top[nx - 1];
    const EdgeTag bot_tag =
        interface_edge == static_cast<int>(EdgeTag::bottom) ? EdgeTag::interface_S : EdgeTag::bottom;
    const EdgeTag top_tag =
        interface_edge == static_cast<int>(EdgeTag::top) ? EdgeTag::interface_S : EdgeTag::top;
    B.chain(bot, bot_tag, true);
    B.chain(top, top_tag, true);
    B.chain(left, EdgeTag::left, true);
    B.chain(right, EdgeTag::right, true);
    add_seeds(B, bounds, [h](double) { return h; });

    GeometrySpec spec;
    spec.kind = DomainKind::rectangle;
    spec.bounds = bounds;
    TriMesh mesh = finish_mesh(B, spec, {}, bounds.width() * bounds.height(), false);
    // The domain lies above a bottom interface (+1) or below a top one (-1).
    const int side = interface_edge == static_cast<int>(EdgeTag::bottom) ? +1 : -1;
    for (TaggedEdge& e : mesh.edge_tags)
        if (e.tag == EdgeTag::interface_S) e.side = side;
    mesh.check_valid();
    return mesh;
}

namespace {

TriMesh split_once(const TriMesh& in) {
    TriMesh out;
    out.vertices = in.vertices;
    out.circles = in.circles;
    out.spec = in.spec;

    std::unordered_map<EKey, int, EKeyHash> mid;
    std::vector<std::pair<EKey, int>> mid_order;
    auto midpoint = [&](int a, int b) {
        const EKey key(a, b);
        auto it = mid.find(key);
        if (it != mid.end()) return it->second;
        const int id = static_cast<int>(out.vertices.size());
        out.vertices.push_back(0.5 * (in.vertices[a] + in.vertices[b]));
        mid.emplace(key, id);
        mid_order.push_back({key, id});
        return id;
    };
    for (const auto& tri : in.triangles) {
        const int mab = midpoint(tri[0], tri[1]);
        const int mbc = midpoint(tri[1], tri[2]);
        const int mca = midpoint(tri[2], tri[0]);
        out.triangles.push_back({tri[0], mab, mca});
        out.triangles.push_back({tri[1], mbc, mab});
        out.triangles.push_back({tri[2], mca, mbc});
        out.triangles.push_back({mab, mbc, mca});
    }

    // Re-project onto the true circle the midpoints of obstacle edges whose
    // endpoints both sit on the same circle (chords of the polygonal arc).
    for (const TaggedEdge& e : in.edge_tags) {
        if (e.tag != EdgeTag::obstacle) continue;
        auto it = mid.find(EKey(e.v0, e.v1));
        if (it == mid.end()) continue;
        for (const Circle& c : in.circles) {
            const Vec2 da = in.vertices[e.v0] - c.center;
            const Vec2 db = in.vertices[e.v1] - c.center;
            const double tol = 1e-7 * std::max(1.0, c.radius);
            if (std::abs(std::sqrt(dot(da, da)) - c.radius) > tol) continue;
            if (std::abs(std::sqrt(dot(db, db)) - c.radius) > tol) continue;
            Vec2& p = out.vertices[it->second];
            const Vec2 dp = p - c.center;
            const double len = std::sqrt(dot(dp, dp));
            if (len > 0.0) p = c.center + (c.radius / len) * dp;
            break;
        }
    }

    for (const TaggedEdge& e : in.edge_tags) {
        const int m = mid.at(EKey(e.v0, e.v1));
        out.edge_tags.push_back({e.v0, m, e.tag, e.side});
        out.edge_tags.push_back({m, e.v1, e.tag, e.side});
    }

    for (const PeriodicMap& pm : in.periodic_maps) {
        PeriodicMap np;
        np.direction = pm.direction;
        np.pairs = pm.pairs;
        std::unordered_map<int, int> master_of;  // slave -> master
        for (const auto& [master, slave] : pm.pairs) master_of[slave] = master;
        for (const auto& [key, mv] : mid_order) {
            auto a = master_of.find(key.a);
            auto b = master_of.find(key.b);
            if (a == master_of.end() || b == master_of.end()) continue;
            auto pm_it = mid.find(EKey(a->second, b->second));
            if (pm_it == mid.end()) continue;
            np.pairs.push_back({pm_it->second, mv});
        }
        out.periodic_maps.push_back(std::move(np));
    }

    out.interface_pairs = in.interface_pairs;
    {
        std::unordered_map<int, int> plus_of;
        for (const auto& [minus, plus] : in.interface_pairs) plus_of[minus] = plus;
        for (const auto& [key, mv] : mid_order) {
            auto a = plus_of.find(key.a);
            auto b = plus_of.find(key.b);
            if (a == plus_of.end() || b == plus_of.end()) continue;
            auto it = mid.find(EKey(a->second, b->second));
            if (it == mid.end()) continue;
            out.interface_pairs.push_back({mv, it->second});
        }
    }
    out.check_valid();
    return out;
}

}  // namespace

TriMesh refine(const TriMesh& mesh, int factor) {
    if (factor != 2 && factor != 4) throw std::invalid_argument("refine: factor must be 2 or 4");
    TriMesh cur = split_once(mesh);
    if (factor == 4) cur = split_once(cur);
    return cur;
}

void write_trimesh(const TriMesh& mesh, std::ostream& os) {
    char buf[160];
    os << "TRIMESH 2\n";
    os << "vertices " << mesh.vertices.size() << "\n";
    for (const Vec2& p : mesh.vertices) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g\n", p.x, p.y);
        os << buf;
    }
    os << "triangles " << mesh.triangles.size() << "\n";
    for (const auto& t : mesh.triangles) os << t[0] << ' ' << t[1] << ' ' << t[2] << "\n";
    os << "edges " << mesh.edge_tags.size() << "\n";
    for (const TaggedEdge& e : mesh.edge_tags)
        os << e.v0 << ' ' << e.v1 << ' ' << to_string(e.tag) << ' ' << e.side << "\n";
    os << "periodic " << mesh.periodic_maps.size() << "\n";
    for (const PeriodicMap& pm : mesh.periodic_maps) {
        os << "map " << (pm.direction == PeriodicMap::Direction::x1 ? "x1" : "y1") << ' '
           << pm.pairs.size() << "\n";
        for (const auto& [a, b] : pm.pairs) os << a << ' ' << b << "\n";
    }
    os << "interface " << mesh.interface_pairs.size() << "\n";
    for (const auto& [a, b] : mesh.interface_pairs) os << a << ' ' << b << "\n";
    os << "circles " << mesh.circles.size() << "\n";
    for (const Circle& c : mesh.circles) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g %d\n", c.center.x, c.center.y, c.radius,
                      c.clipped ? 1 : 0);
        os << buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g %d %.17g %.17g ", mesh.spec.inclusion_diameter,
                  mesh.spec.stripe_height, mesh.spec.eps, mesh.spec.shift);
    os << "spec " << to_string(mesh.spec.kind) << ' ' << buf;
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g %.17g %d\n", mesh.spec.bounds.x_min,
                  mesh.spec.bounds.x_max, mesh.spec.bounds.y_min, mesh.spec.bounds.y_max,
                  mesh.spec.circle_segments);
    os << buf;
}

namespace {
void expect_word(std::istream& is, const std::string& word) {
    std::string got;
    if (!(is >> got) || got != word)
        throw std::runtime_error("mesh file: expected '" + word + "', got '" + got + "'");
}
}  // namespace

TriMesh read_trimesh(std::istream& is) {
    expect_word(is, "TRIMESH");
    int version = 0;
    if (!(is >> version) || version != 2) throw std::runtime_error("mesh file: unsupported version");
    TriMesh mesh;
    std::size_t n = 0;
    expect_word(is, "vertices");
    is >> n;
    mesh.vertices.resize(n);
    for (Vec2& p : mesh.vertices)
        if (!(is >> p.x >> p.y)) throw std::runtime_error("mesh file: bad vertex");
    expect_word(is, "triangles");
    is >> n;
    mesh.triangles.resize(n);
    for (auto& t : mesh.triangles)
        if (!(is >> t[0] >> t[1] >> t[2])) throw std::runtime_error("mesh file: bad triangle");
    expect_word(is, "edges");
    is >> n;
    mesh.edge_tags.resize(n);
    for (TaggedEdge& e : mesh.edge_tags) {
        std::string tag;
        if (!(is >> e.v0 >> e.v1 >> tag >> e.side)) throw std::runtime_error("mesh file: bad edge");
        e.tag = edge_tag_from_string(tag);
    }
    expect_word(is, "periodic");
    is >> n;
    mesh.periodic_maps.resize(n);
    for (PeriodicMap& pm : mesh.periodic_maps) {
        expect_word(is, "map");
        std::string dir;
        std::size_t np = 0;
        if (!(is >> dir >> np)) throw std::runtime_error("mesh file: bad periodic map");
        if (dir == "x1")
            pm.direction = PeriodicMap::Direction::x1;
        else if (dir == "y1")
            pm.direction = PeriodicMap::Direction::y1;
        else
            throw std::runtime_error("mesh file: bad periodic direction");
        pm.pairs.resize(np);
        for (auto& pr : pm.pairs)
            if (!(is >> pr[0] >> pr[1])) throw std::runtime_error("mesh file: bad periodic pair");
    }
    expect_word(is, "interface");
    is >> n;
    mesh.interface_pairs.resize(n);
    for (auto& pr : mesh.interface_pairs)
        if (!(is >> pr[0] >> pr[1])) throw std::runtime_error("mesh file: bad interface pair");
    expect_word(is, "circles");
    is >> n;
    mesh.circles.resize(n);
    for (Circle& c : mesh.circles) {
        int clipped = 0;
        if (!(is >> c.center.x >> c.center.y >> c.radius >> clipped))
            throw std::runtime_error("mesh file: bad circle");
        c.clipped = clipped != 0;
    }
    expect_word(is, "spec");
    std::string kind;
    if (!(is >> kind >> mesh.spec.inclusion_diameter >> mesh.spec.stripe_height >> mesh.spec.eps >>
          mesh.spec.shift >> mesh.spec.bounds.x_min >> mesh.spec.bounds.x_max >>
          mesh.spec.bounds.y_min >> mesh.spec.bounds.y_max >> mesh.spec.circle_segments))
        throw std::runtime_error("mesh file: bad spec");
    if (kind == "unit_cell")
        mesh.spec.kind = DomainKind::unit_cell;
    else if (kind == "stripe")
        mesh.spec.kind = DomainKind::stripe;
    else if (kind == "perforated")
        mesh.spec.kind = DomainKind::perforated;
    else if (kind == "rectangle")
        mesh.spec.kind = DomainKind::rectangle;
    else
        throw std::runtime_error("mesh file: bad domain kind");
    mesh.check_valid();
    return mesh;
}

}  // namespace fpflow
