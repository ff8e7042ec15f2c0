#include "fpflow/mesher.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace fpflow {

namespace {

struct EdgeKey {
    int a;
    int b;
    EdgeKey(int u, int v) : a(std::min(u, v)), b(std::max(u, v)) {}
    bool operator==(const EdgeKey& o) const { return a == o.a && b == o.b; }
};

struct EdgeKeyHash {
    std::size_t operator()(const EdgeKey& k) const {
        return std::hash<std::uint64_t>()((static_cast<std::uint64_t>(static_cast<std::uint32_t>(k.a)) << 32) |
                                          static_cast<std::uint64_t>(static_cast<std::uint32_t>(k.b)));
    }
};

// Orientation predicate: > 0 when (a,b,c) is counterclockwise.  Double fast
// path with a relative epsilon filter; near-degenerate cases re-evaluated in
// long double and snapped to exactly zero when still inconclusive.
double orient2d(const Vec2& a, const Vec2& b, const Vec2& c) {
    const double acx = a.x - c.x;
    const double acy = a.y - c.y;
    const double bcx = b.x - c.x;
    const double bcy = b.y - c.y;
    const double l = acx * bcy;
    const double r = acy * bcx;
    const double det = l - r;
    const double mag = std::abs(l) + std::abs(r);
    if (std::abs(det) > 1e-12 * mag) return det;

    const long double lacx = static_cast<long double>(a.x) - c.x;
    const long double lacy = static_cast<long double>(a.y) - c.y;
    const long double lbcx = static_cast<long double>(b.x) - c.x;
    const long double lbcy = static_cast<long double>(b.y) - c.y;
    const long double ll = lacx * lbcy;
    const long double lr = lacy * lbcx;
    const long double ldet = ll - lr;
    const long double lmag = std::abs(ll) + std::abs(lr);
    if (std::abs(ldet) <= 1e-17L * lmag) return 0.0;
    return static_cast<double>(ldet);
}

// Incircle predicate: > 0 when d lies strictly inside the circumcircle of
// the counterclockwise triangle (a,b,c).  Same filtering scheme as orient2d.
double incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    const double adx = a.x - d.x, ady = a.y - d.y;
    const double bdx = b.x - d.x, bdy = b.y - d.y;
    const double cdx = c.x - d.x, cdy = c.y - d.y;
    const double ad2 = adx * adx + ady * ady;
    const double bd2 = bdx * bdx + bdy * bdy;
    const double cd2 = cdx * cdx + cdy * cdy;
    const double t1 = ad2 * (bdx * cdy - bdy * cdx);
    const double t2 = bd2 * (cdx * ady - cdy * adx);
    const double t3 = cd2 * (adx * bdy - ady * bdx);
    const double det = t1 + t2 + t3;
    const double mag = std::abs(t1) + std::abs(t2) + std::abs(t3);
    if (std::abs(det) > 1e-11 * mag) return det;

    const long double ladx = static_cast<long double>(a.x) - d.x, lady = static_cast<long double>(a.y) - d.y;
    const long double lbdx = static_cast<long double>(b.x) - d.x, lbdy = static_cast<long double>(b.y) - d.y;
    const long double lcdx = static_cast<long double>(c.x) - d.x, lcdy = static_cast<long double>(c.y) - d.y;
    const long double lad2 = ladx * ladx + lady * lady;
    const long double lbd2 = lbdx * lbdx + lbdy * lbdy;
    const long double lcd2 = lcdx * lcdx + lcdy * lcdy;
    const long double s1 = lad2 * (lbdx * lcdy - lbdy * lcdx);
    const long double s2 = lbd2 * (lcdx * lady - lcdy * ladx);
    const long double s3 = lcd2 * (ladx * lbdy - lady * lbdx);
    const long double ldet = s1 + s2 + s3;
    const long double lmag = std::abs(s1) + std::abs(s2) + std::abs(s3);
    if (std::abs(ldet) <= 1e-16L * lmag) return 0.0;
    return static_cast<double>(ldet);
}

struct Tri {
    std::array<int, 3> v{-1, -1, -1};
    // nb[k] is the neighbor across edge (v[k], v[(k+1)%3]); -1 when none.
    std::array<int, 3> nb{-1, -1, -1};
    bool alive = false;
};

struct SegRecord {
    EdgeTag tag;
    bool allow_split;
    bool interior;
};

class Triangulator {
public:
    explicit Triangulator(const Pslg& pslg) : pslg_(pslg) {}

    MeshedPslg run();

private:
    const Pslg& pslg_;
    std::vector<Vec2> pts_;
    std::vector<Tri> tris_;
    int hint_ = 0;
    int n_super_base_ = 0;  // indices >= this are the three super vertices

    std::unordered_map<EdgeKey, SegRecord, EdgeKeyHash> registry_;
    int splits_ = 0;

    void build_super_triangle();
    void audit_adjacency() const;
    int locate(const Vec2& p) const;
    // Inserts the already-stored vertex pts_[vid] into the triangulation.
    // Returns vid, or the index of a coincident already-inserted vertex.
    int insert_vertex(int vid);
    void recover_segments();
    std::vector<bool> select_removed() const;
    MeshedPslg finalize(const std::vector<bool>& removed);

    int edge_index_of(const Tri& t, int u, int v) const {
        for (int k = 0; k < 3; ++k)
            if (t.v[k] == u && t.v[(k + 1) % 3] == v) return k;
        return -1;
    }
};

void Triangulator::build_super_triangle() {
    double xmin = std::numeric_limits<double>::max(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const Vec2& p : pts_) {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    }
    const double cx = 0.5 * (xmin + xmax);
    const double cy = 0.5 * (ymin + ymax);
    const double R = std::max({xmax - xmin, ymax - ymin, 1.0});
    n_super_base_ = static_cast<int>(pts_.size());
    pts_.push_back({cx - 40.0 * R, cy - 20.0 * R});
    pts_.push_back({cx + 40.0 * R, cy - 20.0 * R});
    pts_.push_back({cx, cy + 40.0 * R});
    Tri t;
    t.v = {n_super_base_, n_super_base_ + 1, n_super_base_ + 2};
    t.alive = true;
    tris_.push_back(t);
    hint_ = 0;
}

void Triangulator::audit_adjacency() const {
    for (int i = 0; i < static_cast<int>(tris_.size()); ++i) {
        const Tri& t = tris_[i];
        if (!t.alive) continue;
        for (int k = 0; k < 3; ++k) {
            const int nb = t.nb[k];
            if (nb < 0) continue;
            if (nb >= static_cast<int>(tris_.size()) || !tris_[nb].alive)
                throw std::runtime_error("mesher audit: neighbor link to a dead triangle");
            const Tri& o = tris_[nb];
            int back = -1;
            for (int j = 0; j < 3; ++j)
                if (o.v[j] == t.v[(k + 1) % 3] && o.v[(j + 1) % 3] == t.v[k]) back = j;
            if (back < 0 || o.nb[back] != i)
                throw std::runtime_error("mesher audit: asymmetric neighbor link");
        }
    }
}

int Triangulator::locate(const Vec2& p) const {
    int cur = hint_;
    if (cur < 0 || cur >= static_cast<int>(tris_.size()) || !tris_[cur].alive) {
        cur = -1;
        for (int i = static_cast<int>(tris_.size()) - 1; i >= 0; --i)
            if (tris_[i].alive) { cur = i; break; }
        if (cur < 0) throw std::runtime_error("mesher: no live triangle during location");
    }
    const int max_steps = 4 * static_cast<int>(tris_.size()) + 64;
    int last = -1;
    for (int step = 0; step < max_steps; ++step) {
        const Tri& t = tris_[cur];
        int next = -1;
        for (int k = 0; k < 3; ++k) {
            const int nb = t.nb[k];
            if (nb == last && last >= 0) continue;  // avoid immediate backtrack
            if (orient2d(pts_[t.v[k]], pts_[t.v[(k + 1) % 3]], p) < 0.0) {
                next = nb;
                break;
            }
        }
        if (next == -1) {
            // Re-check all three edges without the backtrack exclusion.
            bool inside = true;
            for (int k = 0; k < 3; ++k)
                if (orient2d(pts_[t.v[k]], pts_[t.v[(k + 1) % 3]], p) < 0.0) {
                    inside = false;
                    next = t.nb[k];
                    break;
                }
            if (inside) return cur;
        }
        if (next < 0) throw std::runtime_error("mesher: point located outside the super triangle");
        last = cur;
        cur = next;
    }
    // Walk cycled (can happen with near-degenerate geometry): linear scan.
    for (int i = 0; i < static_cast<int>(tris_.size()); ++i) {
        const Tri& t = tris_[i];
        if (!t.alive) continue;
        bool inside = true;
        for (int k = 0; k < 3 && inside; ++k)
            if (orient2d(pts_[t.v[k]], pts_[t.v[(k + 1) % 3]], p) < 0.0) inside = false;
        if (inside) return i;
    }
    throw std::runtime_error("mesher: point location failed");
}

int Triangulator::insert_vertex(int vid) {
    const Vec2 p = pts_[vid];
    const int seed = locate(p);
    // Duplicate guard: coincident with a vertex of the containing triangle.
    for (int k = 0; k < 3; ++k) {
        const int vid = tris_[seed].v[k];
        const Vec2& q = pts_[vid];
        if (std::abs(q.x - p.x) < 1e-12 && std::abs(q.y - p.y) < 1e-12) return vid;
    }

    // Grow the insertion cavity: every reachable triangle whose circumcircle
    // strictly contains p.
    std::unordered_set<int> cavity;
    std::unordered_set<int> visited;
    std::vector<int> stack{seed};
    cavity.insert(seed);
    visited.insert(seed);
    while (!stack.empty()) {
        const int ti = stack.back();
        stack.pop_back();
        const Tri t = tris_[ti];
        for (int k = 0; k < 3; ++k) {
            const int nb = t.nb[k];
            if (nb < 0 || visited.count(nb)) continue;
            visited.insert(nb);
            const Tri& u = tris_[nb];
            if (incircle(pts_[u.v[0]], pts_[u.v[1]], pts_[u.v[2]], p) > 0.0) {
                cavity.insert(nb);
                stack.push_back(nb);
            }
        }
    }

    // Star-shape repair: every cavity boundary edge must see p strictly on
    // its left.  Cocircular clusters can produce cavities violating this;
    // shrink (or, for the seed's own edges, grow) until the fan is valid.
    struct BEdge {
        int u, v, owner, outside;
    };
    std::vector<BEdge> boundary;
    const int max_repair = 16 + 8 * static_cast<int>(visited.size());
    for (int round = 0;; ++round) {
        if (round > max_repair) throw std::runtime_error("mesher: cavity repair did not converge");
        // Keep only the connected component containing the seed.
        {
            std::unordered_set<int> comp;
            std::vector<int> st{seed};
            comp.insert(seed);
            while (!st.empty()) {
                const int ti = st.back();
                st.pop_back();
                for (int k = 0; k < 3; ++k) {
                    const int nb = tris_[ti].nb[k];
                    if (nb >= 0 && cavity.count(nb) && !comp.count(nb)) {
                        comp.insert(nb);
                        st.push_back(nb);
                    }
                }
            }
            cavity = std::move(comp);
        }
        boundary.clear();
        for (const int ti : cavity) {
            const Tri& t = tris_[ti];
            for (int k = 0; k < 3; ++k) {
                const int nb = t.nb[k];
                if (nb < 0 || !cavity.count(nb))
                    boundary.push_back({t.v[k], t.v[(k + 1) % 3], ti, nb});
            }
        }
        bool ok = true;
        for (const BEdge& e : boundary) {
            if (orient2d(pts_[e.u], pts_[e.v], p) <= 0.0) {
                ok = false;
                if (e.owner != seed) {
                    cavity.erase(e.owner);
                } else if (e.outside >= 0) {
                    cavity.insert(e.outside);
                } else {
                    throw std::runtime_error("mesher: degenerate insertion cavity");
                }
                break;
            }
        }
        if (ok) break;
    }

    // Retriangulate the cavity as a fan around the new vertex.
    const int pv = vid;
    for (const int ti : cavity) tris_[ti].alive = false;

    std::unordered_map<EdgeKey, std::pair<int, int>, EdgeKeyHash> spoke;  // edge -> (tri, local k)
    int first_new = -1;
    for (const BEdge& e : boundary) {
        Tri nt;
        nt.v = {e.u, e.v, pv};
        nt.alive = true;
        const int nid = static_cast<int>(tris_.size());
        nt.nb[0] = e.outside;
        tris_.push_back(nt);
        if (first_new < 0) first_new = nid;
        if (e.outside >= 0) {
            Tri& o = tris_[e.outside];
            const int ok = edge_index_of(o, e.v, e.u);
            if (ok < 0) throw std::runtime_error("mesher: neighbor wiring mismatch");
            o.nb[ok] = nid;
        }
        // Spokes (v,pv) [k=1] and (pv,u) [k=2] pair up between fan triangles.
        for (int k = 1; k < 3; ++k) {
            Tri& self = tris_[nid];
            EdgeKey key(self.v[k], self.v[(k + 1) % 3]);
            auto it = spoke.find(key);
            if (it == spoke.end()) {
                spoke.emplace(key, std::make_pair(nid, k));
            } else {
                tris_[nid].nb[k] = it->second.first;
                tris_[it->second.first].nb[it->second.second] = nid;
                spoke.erase(it);
            }
        }
    }
    if (!spoke.empty()) throw std::runtime_error("mesher: cavity fan did not close");
    hint_ = first_new;
    return pv;
}

void Triangulator::recover_segments() {
    for (int round = 0; round < 12; ++round) {
        std::unordered_set<EdgeKey, EdgeKeyHash> present;
        for (const Tri& t : tris_) {
            if (!t.alive) continue;
            for (int k = 0; k < 3; ++k) present.insert(EdgeKey(t.v[k], t.v[(k + 1) % 3]));
        }
        std::vector<std::pair<EdgeKey, SegRecord>> missing;
        for (const auto& [key, rec] : registry_)
            if (!present.count(key)) missing.push_back({key, rec});
        if (missing.empty()) return;
        for (const auto& [key, rec] : missing) {
            if (!rec.allow_split) {
                std::ostringstream os;
                os << "mesher: constraint segment (" << key.a << "," << key.b
                   << ") tagged " << to_string(rec.tag)
                   << " is not recoverable without splitting, and splitting is "
                      "forbidden for it; refine the boundary subdivision";
                throw std::runtime_error(os.str());
            }
            const Vec2 mid{0.5 * (pts_[key.a].x + pts_[key.b].x), 0.5 * (pts_[key.a].y + pts_[key.b].y)};
            pts_.push_back(mid);
            const int mv = insert_vertex(static_cast<int>(pts_.size()) - 1);
            registry_.erase(key);
            registry_.emplace(EdgeKey(key.a, mv), rec);
            registry_.emplace(EdgeKey(mv, key.b), rec);
            ++splits_;
        }
    }
    throw std::runtime_error("mesher: segment recovery did not converge");
}

std::vector<bool> Triangulator::select_removed() const {
    std::vector<bool> removed(tris_.size(), false);
    if (std::getenv("FPFLOW_MESH_DEBUG")) {
        std::unordered_map<EdgeKey, int, EdgeKeyHash> adj;
        int alive = 0;
        for (const Tri& t : tris_) {
            if (!t.alive) continue;
            ++alive;
            for (int k = 0; k < 3; ++k) adj[EdgeKey(t.v[k], t.v[(k + 1) % 3])] += 1;
        }
        std::fprintf(stderr, "[mesh debug] alive=%d registry=%zu\n", alive, registry_.size());
        for (const auto& [key, rec] : registry_) {
            const int n = adj.count(key) ? adj.at(key) : 0;
            if (n != 2)
                std::fprintf(stderr, "[mesh debug] constraint (%d,%d)=(%g,%g)-(%g,%g) adj=%d\n", key.a,
                             key.b, pts_[key.a].x, pts_[key.a].y, pts_[key.b].x, pts_[key.b].y, n);
        }
    }

    // Flood fill from super-vertex triangles across unconstrained edges:
    // everything outside the constrained outer boundary is removed,
    // including wall-clipped obstacle pockets open to the exterior.
    std::vector<int> stack;
    const auto is_super = [&](int v) { return v >= n_super_base_ && v < n_super_base_ + 3; };
    for (int i = 0; i < static_cast<int>(tris_.size()); ++i) {
        const Tri& t = tris_[i];
        if (!t.alive) continue;
        if (is_super(t.v[0]) || is_super(t.v[1]) || is_super(t.v[2])) {
            removed[i] = true;
            stack.push_back(i);
        }
    }
    while (!stack.empty()) {
        const int ti = stack.back();
        stack.pop_back();
        const Tri& t = tris_[ti];
        for (int k = 0; k < 3; ++k) {
            const int nb = t.nb[k];
            if (nb < 0 || removed[nb] || !tris_[nb].alive) continue;
            if (registry_.count(EdgeKey(t.v[k], t.v[(k + 1) % 3]))) continue;
            removed[nb] = true;
            stack.push_back(nb);
        }
    }

    // Hole polygons: remove triangles whose centroid is inside any loop.
    if (!pslg_.hole_polygons.empty()) {
        std::vector<Rect> boxes;
        boxes.reserve(pslg_.hole_polygons.size());
        for (const auto& poly : pslg_.hole_polygons) {
            Rect r{1e300, -1e300, 1e300, -1e300};
            for (const Vec2& q : poly) {
                r.x_min = std::min(r.x_min, q.x);
                r.x_max = std::max(r.x_max, q.x);
                r.y_min = std::min(r.y_min, q.y);
                r.y_max = std::max(r.y_max, q.y);
            }
            boxes.push_back(r);
        }
        for (int i = 0; i < static_cast<int>(tris_.size()); ++i) {
            const Tri& t = tris_[i];
            if (!t.alive || removed[i]) continue;
            const Vec2 c{(pts_[t.v[0]].x + pts_[t.v[1]].x + pts_[t.v[2]].x) / 3.0,
                         (pts_[t.v[0]].y + pts_[t.v[1]].y + pts_[t.v[2]].y) / 3.0};
            for (std::size_t h = 0; h < pslg_.hole_polygons.size(); ++h) {
                const Rect& r = boxes[h];
                if (c.x < r.x_min || c.x > r.x_max || c.y < r.y_min || c.y > r.y_max) continue;
                if (point_in_polygon(c, pslg_.hole_polygons[h])) {
                    removed[i] = true;
                    break;
                }
            }
        }
    }
    return removed;
}

MeshedPslg Triangulator::finalize(const std::vector<bool>& removed) {
    MeshedPslg out;
    out.segment_splits = splits_;

    std::vector<int> vmap(pts_.size(), -1);
    // Original PSLG points keep their indices (every one must survive).
    const int n_orig = static_cast<int>(pslg_.points.size());
    std::vector<bool> used(pts_.size(), false);
    for (std::size_t i = 0; i < tris_.size(); ++i) {
        if (!tris_[i].alive || removed[i]) continue;
        for (int k = 0; k < 3; ++k) used[tris_[i].v[k]] = true;
    }
    for (int i = 0; i < n_orig; ++i) {
        if (!used[i]) {
            std::ostringstream os;
            os << "mesher: input point " << i << " at (" << pts_[i].x << "," << pts_[i].y
               << ") is not part of the meshed region";
            throw std::runtime_error(os.str());
        }
        vmap[i] = i;
        out.vertices.push_back(pts_[i]);
    }
    for (int i = n_orig; i < static_cast<int>(pts_.size()); ++i) {
        if (i >= n_super_base_ && i < n_super_base_ + 3) continue;
        if (!used[i]) continue;
        vmap[i] = static_cast<int>(out.vertices.size());
        out.vertices.push_back(pts_[i]);
    }

    std::unordered_map<EdgeKey, int, EdgeKeyHash> edge_count;
    std::unordered_map<EdgeKey, std::pair<int, int>, EdgeKeyHash> directed_owner;  // (u,v) stored sorted -> owner of directed (a,b)=(key order)
    for (std::size_t i = 0; i < tris_.size(); ++i) {
        if (!tris_[i].alive || removed[i]) continue;
        std::array<int, 3> tv;
        for (int k = 0; k < 3; ++k) {
            tv[k] = vmap[tris_[i].v[k]];
            if (tv[k] < 0) throw std::runtime_error("mesher: vertex map inconsistency");
        }
        if (orient2d(out.vertices[tv[0]], out.vertices[tv[1]], out.vertices[tv[2]]) <= 0.0)
            throw std::runtime_error("mesher: non-positive triangle in output");
        out.triangles.push_back(tv);
        for (int k = 0; k < 3; ++k) {
            const EdgeKey key(tv[k], tv[(k + 1) % 3]);
            edge_count[key] += 1;
            if (key.a == tv[k]) directed_owner[key] = {static_cast<int>(out.triangles.size()) - 1, k};
        }
    }

    // Remap the registry and classify each constraint.
    for (const auto& [key, rec] : registry_) {
        const int a = vmap[key.a], b = vmap[key.b];
        if (a < 0 || b < 0) throw std::runtime_error("mesher: constraint endpoint removed");
        const EdgeKey nk(a, b);
        auto it = edge_count.find(nk);
        if (it == edge_count.end()) {
            std::ostringstream os;
            os << "mesher: constraint (" << key.a << "," << key.b << ") tagged " << to_string(rec.tag)
               << " absent from the final mesh";
            throw std::runtime_error(os.str());
        }
        if (it->second == 1) {
            out.boundary_edges.push_back({0, 0, rec.tag, 0});
        } else {
            out.interior_edges.push_back({nk.a, nk.b, rec.tag, 0});
            continue;
        }
        // Orient the boundary edge so its unique triangle lies on the left:
        // directed_owner holds the sorted direction only when some triangle
        // traverses the edge as (a,b) in CCW order.
        TaggedEdge& e = out.boundary_edges.back();
        auto down = directed_owner.find(nk);
        if (down != directed_owner.end()) {
            e.v0 = nk.a;
            e.v1 = nk.b;
        } else {
            e.v0 = nk.b;
            e.v1 = nk.a;
        }
    }

    // Every boundary edge of the final mesh must be a registered constraint.
    std::unordered_set<EdgeKey, EdgeKeyHash> constrained;
    for (const auto& [key, rec] : registry_) constrained.insert(EdgeKey(vmap[key.a], vmap[key.b]));
    for (const auto& [key, n] : edge_count) {
        if (n == 1 && !constrained.count(key)) {
            std::ostringstream os;
            os << "mesher: boundary edge (" << key.a << "," << key.b << ") at ("
               << out.vertices[key.a].x << "," << out.vertices[key.a].y << ")-("
               << out.vertices[key.b].x << "," << out.vertices[key.b].y
               << ") carries no tag";
            throw std::runtime_error(os.str());
        }
        if (n > 2) throw std::runtime_error("mesher: non-manifold edge in output");
    }
    return out;
}

MeshedPslg Triangulator::run() {
    if (pslg_.points.size() < 3) throw std::runtime_error("mesher: need at least 3 points");
    pts_ = pslg_.points;
    for (const Vec2& p : pts_)
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            throw std::runtime_error("mesher: non-finite input point");
    // Reject coincident input points (they break constraint identity).
    {
        std::unordered_map<std::uint64_t, std::vector<int>> grid;
        const double cell = 1e-9;
        for (int i = 0; i < static_cast<int>(pts_.size()); ++i) {
            const auto gx = static_cast<std::int64_t>(std::floor(pts_[i].x / cell));
            const auto gy = static_cast<std::int64_t>(std::floor(pts_[i].y / cell));
            for (std::int64_t dx = -1; dx <= 1; ++dx)
                for (std::int64_t dy = -1; dy <= 1; ++dy) {
                    const std::uint64_t key = static_cast<std::uint64_t>(gx + dx) * 0x9E3779B97F4A7C15ull ^
                                              static_cast<std::uint64_t>(gy + dy);
                    auto it = grid.find(key);
                    if (it == grid.end()) continue;
                    for (const int j : it->second)
                        if (std::abs(pts_[j].x - pts_[i].x) < 1e-12 && std::abs(pts_[j].y - pts_[i].y) < 1e-12) {
                            std::ostringstream os;
                            os << "mesher: duplicate input points " << j << " and " << i << " at ("
                               << pts_[i].x << "," << pts_[i].y << ")";
                            throw std::runtime_error(os.str());
                        }
                }
            const std::uint64_t key = static_cast<std::uint64_t>(gx) * 0x9E3779B97F4A7C15ull ^
                                      static_cast<std::uint64_t>(gy);
            grid[key].push_back(i);
        }
    }
    for (const PslgSegment& s : pslg_.segments) {
        if (s.a < 0 || s.b < 0 || s.a >= static_cast<int>(pts_.size()) || s.b >= static_cast<int>(pts_.size()) ||
            s.a == s.b)
            throw std::runtime_error("mesher: invalid segment endpoints");
        registry_.emplace(EdgeKey(s.a, s.b), SegRecord{s.tag, s.allow_split, s.interior});
    }

    build_super_triangle();
    for (int i = 0; i < n_super_base_; ++i) {
        const int got = insert_vertex(i);
        if (got != i) throw std::runtime_error("mesher: input point collided during insertion");
    }
    for (const Vec2& p : pslg_.interior_points) {
        pts_.push_back(p);
        insert_vertex(static_cast<int>(pts_.size()) - 1);
    }
    audit_adjacency();
    recover_segments();
    return finalize(select_removed());
}

}  // namespace

MeshedPslg triangulate_pslg(const Pslg& pslg) {
    Triangulator tr(pslg);
    return tr.run();
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
    const double dx = b.x - a.x, dy = b.y - a.y;
    const double len2 = dx * dx + dy * dy;
    double t = 0.0;
    if (len2 > 0.0) t = std::clamp(((p.x - a.x) * dx + (p.y - a.y) * dy) / len2, 0.0, 1.0);
    const double px = a.x + t * dx - p.x;
    const double py = a.y + t * dy - p.y;
    return std::sqrt(px * px + py * py);
}

bool point_in_polygon(const Vec2& p, const std::vector<Vec2>& poly) {
    bool inside = false;
    const std::size_t n = poly.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2& a = poly[j];
        const Vec2& b = poly[i];
        if ((b.y > p.y) != (a.y > p.y)) {
            const double x_cross = b.x + (p.y - b.y) * (a.x - b.x) / (a.y - b.y);
            if (p.x < x_cross) inside = !inside;
        }
    }
    return inside;
}

double lattice_jitter(std::int64_t ix, std::int64_t iy, std::uint64_t salt) {
    std::uint64_t z = static_cast<std::uint64_t>(ix) * 0x9E3779B97F4A7C15ull +
                      static_cast<std::uint64_t>(iy) * 0xBF58476D1CE4E5B9ull + salt;
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return 2.0 * (static_cast<double>(z >> 11) * (1.0 / 9007199254740992.0)) - 1.0;
}

}  // namespace fpflow
