#include "fpflow/function_space.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace fpflow {

namespace {

std::uint64_t edge_key(int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

}  // namespace

FunctionSpace::FunctionSpace(const TriMesh& mesh, int order, int components)
    : mesh_(&mesh), order_(order), components_(components) {
    if (order != 1 && order != 2) throw std::invalid_argument("function space: order must be 1 or 2");
    if (components != 1 && components != 2)
        throw std::invalid_argument("function space: 1 or 2 components supported");

    // Unique undirected edges in first-seen order over triangles.
    for (const auto& t : mesh.triangles) {
        for (int e = 0; e < 3; ++e) {
            const std::uint64_t key = edge_key(t[e], t[(e + 1) % 3]);
            if (edge_index_.emplace(key, n_edges_).second) ++n_edges_;
        }
    }
    const int V = static_cast<int>(mesh.vertices.size());
    n_nodes_ = order_ == 1 ? V : V + n_edges_;

    node_pos_.resize(n_nodes_);
    for (int v = 0; v < V; ++v) node_pos_[v] = mesh.vertices[v];
    if (order_ == 2) {
        for (const auto& kv : edge_index_) {
            const int a = static_cast<int>(kv.first >> 32);
            const int b = static_cast<int>(kv.first & 0xffffffffu);
            node_pos_[V + kv.second] = 0.5 * (mesh.vertices[a] + mesh.vertices[b]);
        }
    }

    geom_.resize(mesh.triangles.size());
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        const Vec2 p0 = mesh.vertices[tri[0]];
        const Vec2 p1 = mesh.vertices[tri[1]];
        const Vec2 p2 = mesh.vertices[tri[2]];
        ElementGeom& g = geom_[t];
        g.x0 = p0;
        g.jac[0][0] = p1.x - p0.x;
        g.jac[0][1] = p2.x - p0.x;
        g.jac[1][0] = p1.y - p0.y;
        g.jac[1][1] = p2.y - p0.y;
        g.det = g.jac[0][0] * g.jac[1][1] - g.jac[0][1] * g.jac[1][0];
        if (!(g.det > 0.0)) throw std::runtime_error("function space: non-positive triangle area");
        const double inv = 1.0 / g.det;
        // inverse transpose of J
        g.inv_jac_t[0][0] = g.jac[1][1] * inv;
        g.inv_jac_t[0][1] = -g.jac[1][0] * inv;
        g.inv_jac_t[1][0] = -g.jac[0][1] * inv;
        g.inv_jac_t[1][1] = g.jac[0][0] * inv;
    }
}

std::array<int, 6> FunctionSpace::element_nodes(int t) const {
    const auto& tri = mesh_->triangles[t];
    std::array<int, 6> n{tri[0], tri[1], tri[2], -1, -1, -1};
    if (order_ == 2) {
        const int V = n_vertices();
        n[3] = V + edge_index_.at(edge_key(tri[0], tri[1]));
        n[4] = V + edge_index_.at(edge_key(tri[1], tri[2]));
        n[5] = V + edge_index_.at(edge_key(tri[2], tri[0]));
    }
    return n;
}

int FunctionSpace::edge_node(int a, int b) const {
    if (order_ != 2) return -1;
    auto it = edge_index_.find(edge_key(a, b));
    return it == edge_index_.end() ? -1 : n_vertices() + it->second;
}

Vec2 FunctionSpace::node_position(int node) const { return node_pos_.at(node); }

void FunctionSpace::shape(double xi, double eta, double* N) const {
    const double l0 = 1.0 - xi - eta;
    const double l1 = xi;
    const double l2 = eta;
    if (order_ == 1) {
        N[0] = l0;
        N[1] = l1;
        N[2] = l2;
        return;
    }
    N[0] = l0 * (2.0 * l0 - 1.0);
    N[1] = l1 * (2.0 * l1 - 1.0);
    N[2] = l2 * (2.0 * l2 - 1.0);
    N[3] = 4.0 * l0 * l1;
    N[4] = 4.0 * l1 * l2;
    N[5] = 4.0 * l2 * l0;
}

void FunctionSpace::shape_grad_ref(double xi, double eta, double (*dN)[2]) const {
    const double l0 = 1.0 - xi - eta;
    if (order_ == 1) {
        dN[0][0] = -1.0;
        dN[0][1] = -1.0;
        dN[1][0] = 1.0;
        dN[1][1] = 0.0;
        dN[2][0] = 0.0;
        dN[2][1] = 1.0;
        return;
    }
    // d/dxi, d/deta of the quadratic basis; l0 depends on both coordinates.
    dN[0][0] = 1.0 - 4.0 * l0;
    dN[0][1] = 1.0 - 4.0 * l0;
    dN[1][0] = 4.0 * xi - 1.0;
    dN[1][1] = 0.0;
    dN[2][0] = 0.0;
    dN[2][1] = 4.0 * eta - 1.0;
    dN[3][0] = 4.0 * (l0 - xi);
    dN[3][1] = -4.0 * xi;
    dN[4][0] = 4.0 * eta;
    dN[4][1] = 4.0 * xi;
    dN[5][0] = -4.0 * eta;
    dN[5][1] = 4.0 * (l0 - eta);
}

int FunctionSpace::edge_shape(double s, double* N) const {
    if (order_ == 1) {
        N[0] = 1.0 - s;
        N[1] = s;
        return 2;
    }
    N[0] = (1.0 - s) * (1.0 - 2.0 * s);
    N[1] = s * (2.0 * s - 1.0);
    N[2] = 4.0 * s * (1.0 - s);
    return 3;
}

std::vector<int> FunctionSpace::nodes_with_tag(EdgeTag tag) const {
    return nodes_with_tag(tag, 3);  // 3: wildcard, matches every side
}

std::vector<int> FunctionSpace::nodes_with_tag(EdgeTag tag, int side) const {
    std::set<int> out;
    for (const auto& e : mesh_->edge_tags) {
        if (e.tag != tag) continue;
        if (side != 3 && e.side != side) continue;
        out.insert(e.v0);
        out.insert(e.v1);
        if (order_ == 2) {
            const int m = edge_node(e.v0, e.v1);
            if (m < 0) throw std::runtime_error("function space: tagged edge is not a mesh edge");
            out.insert(m);
        }
    }
    return {out.begin(), out.end()};
}

FunctionSpace::EdgeTrace FunctionSpace::trace(const TaggedEdge& e) const {
    EdgeTrace tr;
    tr.nodes = {e.v0, e.v1, order_ == 2 ? edge_node(e.v0, e.v1) : -1};
    tr.a = mesh_->vertices[e.v0];
    tr.b = mesh_->vertices[e.v1];
    const Vec2 d = tr.b - tr.a;
    tr.length = std::sqrt(dot(d, d));
    if (!(tr.length > 0.0)) throw std::runtime_error("function space: zero-length tagged edge");
    tr.tangent = (1.0 / tr.length) * d;
    tr.normal = {tr.tangent.y, -tr.tangent.x};
    return tr;
}

}  // namespace fpflow
