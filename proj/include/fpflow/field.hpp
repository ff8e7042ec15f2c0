#ifndef FPFLOW_FIELD_HPP
#define FPFLOW_FIELD_HPP

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <optional>

#include "fpflow/function_space.hpp"

namespace fpflow {

/// A finite-element function: a FunctionSpace (held by reference) plus a
/// coefficient vector. Provides point evaluation through a uniform-grid
/// triangle locator, exact integrals of the discrete function over the
/// domain, along axis-parallel lines and over tagged boundary edges, and
/// quadrature-based error norms against callables.
class Field {
public:
    Field(const FunctionSpace& space, Eigen::VectorXd coeffs);

    const FunctionSpace& space() const { return *space_; }
    const Eigen::VectorXd& coeffs() const { return u_; }

    /// Point evaluation; empty when p lies outside the meshed region (in a
    /// hole or beyond the boundary).
    std::optional<double> try_eval(Vec2 p, int comp = 0) const;
    /// On a duplicated interface line, side = +1/-1 restricts the lookup to
    /// triangles whose centroid lies above/below p.y.
    std::optional<double> try_eval_side(Vec2 p, int comp, int side) const;
    double eval(Vec2 p, int comp = 0) const;  ///< throws when outside
    std::optional<Vec2> try_grad(Vec2 p, int comp = 0) const;

    /// Exact integral of the discrete function over the mesh.
    double integrate(int comp = 0) const;

    /// Exact line integral of the discrete function along y = c (clipped to
    /// x in [x0, x1]) or x = c (y in [y0, y1]). When the line runs along
    /// mesh edges (a duplicated interface at y = 0, say), each on-line edge
    /// is counted once, from the triangle above (side >= 0) or below
    /// (side < 0).
    double integrate_line_y(double c, int comp, double x0, double x1, int side = 0) const;
    double integrate_line_x(double c, int comp, double y0, double y1, int side = 0) const;

    /// Integral over all edges with the tag (side = 0: any side).
    double integrate_edges(EdgeTag tag, int side, int comp) const;

    /// Quadrature-based norms and errors for one component.
    double l2_norm(int comp = 0, int quad_degree = 6) const;
    double l2_error(const std::function<double(Vec2)>& exact, int comp = 0,
                    int quad_degree = 6) const;
    double h1_seminorm_error(const std::function<Vec2(Vec2)>& exact_grad, int comp = 0,
                             int quad_degree = 6) const;

private:
    struct Locator;
    int locate(Vec2 p, double* xi, double* eta, int side) const;
    double eval_in_triangle(int t, double xi, double eta, int comp) const;

    const FunctionSpace* space_;
    Eigen::VectorXd u_;
    std::shared_ptr<const Locator> locator_;
};

}  // namespace fpflow

#endif  // FPFLOW_FIELD_HPP
