#ifndef FPFLOW_FUNCTION_SPACE_HPP
#define FPFLOW_FUNCTION_SPACE_HPP

#include <array>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "fpflow/trimesh.hpp"

namespace fpflow {

/// Continuous Lagrange finite-element space (P1 or P2) over a TriMesh,
/// scalar- or vector-valued.
///
/// Node numbering: mesh vertices occupy nodes [0, V); for order 2 the
/// unique undirected mesh edges add midpoint nodes [V, V + E), numbered in
/// first-seen order over triangles (deterministic for a given mesh).
/// Vector fields interleave components: dof = components * node + comp.
class FunctionSpace {
public:
    FunctionSpace(const TriMesh& mesh, int order, int components);

    const TriMesh& mesh() const { return *mesh_; }
    int order() const { return order_; }
    int components() const { return components_; }
    int n_vertices() const { return static_cast<int>(mesh_->vertices.size()); }
    int n_edges() const { return n_edges_; }
    int n_nodes() const { return n_nodes_; }
    int n_dofs() const { return components_ * n_nodes_; }
    int n_element_nodes() const { return order_ == 1 ? 3 : 6; }

    int dof(int node, int comp) const { return components_ * node + comp; }

    /// Global node ids of triangle t, local order [v0, v1, v2, e01, e12, e20]
    /// (only the first three entries are meaningful for order 1).
    std::array<int, 6> element_nodes(int t) const;

    /// Midpoint node of the undirected edge (a, b); -1 if absent or order 1.
    int edge_node(int a, int b) const;

    Vec2 node_position(int node) const;

    /// Reference shape functions and reference gradients at (xi, eta).
    /// N must hold n_element_nodes() doubles, dN as many [2]-arrays.
    void shape(double xi, double eta, double* N) const;
    void shape_grad_ref(double xi, double eta, double (*dN)[2]) const;

    /// Shape functions of an edge trace at parameter s in [0, 1] (from
    /// endpoint a to b), ordered [a, b, midpoint]; returns their count.
    int edge_shape(double s, double* N) const;

    /// Affine element geometry: x = x0 + J * (xi, eta).
    struct ElementGeom {
        Vec2 x0;
        double jac[2][2];
        double inv_jac_t[2][2];  ///< transforms reference to physical gradients
        double det;              ///< positive (triangles are CCW)
    };
    const ElementGeom& geom(int t) const { return geom_[t]; }

    /// All nodes lying on edges carrying the tag (optionally one side of a
    /// duplicated interface line), sorted ascending.
    std::vector<int> nodes_with_tag(EdgeTag tag) const;
    std::vector<int> nodes_with_tag(EdgeTag tag, int side) const;

    /// Trace data of one tagged mesh edge.
    struct EdgeTrace {
        std::array<int, 3> nodes;  ///< [end a, end b, midpoint]; midpoint -1 for P1
        Vec2 a, b;
        double length = 0.0;
        Vec2 tangent;  ///< unit, from a to b
        Vec2 normal;   ///< unit, right of the tangent = outward (fluid lies left)
    };
    EdgeTrace trace(const TaggedEdge& e) const;

private:
    const TriMesh* mesh_;
    int order_;
    int components_;
    int n_edges_ = 0;
    int n_nodes_ = 0;
    std::unordered_map<std::uint64_t, int> edge_index_;  ///< key(a,b) -> edge ordinal
    std::vector<Vec2> node_pos_;
    std::vector<ElementGeom> geom_;
};

}  // namespace fpflow

#endif  // FPFLOW_FUNCTION_SPACE_HPP
