#include "fpflow/field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fpflow/quadrature.hpp"

namespace fpflow {

namespace {

constexpr double kBaryTol = 1e-10;   // barycentric slack for point location
constexpr double kOnLineTol = 1e-12;  // coordinate tolerance for on-line tests

}  // namespace

/// Uniform-grid bin structure over triangle bounding boxes.
struct Field::Locator {
    double x_min, y_min, hx, hy;
    int nx, ny;
    std::vector<std::vector<int>> bins;

    explicit Locator(const TriMesh& mesh) {
        double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
        for (const Vec2& v : mesh.vertices) {
            x0 = std::min(x0, v.x);
            y0 = std::min(y0, v.y);
            x1 = std::max(x1, v.x);
            y1 = std::max(y1, v.y);
        }
        const int n = std::max(1, static_cast<int>(std::sqrt(
                                      static_cast<double>(mesh.triangles.size()) / 2.0)));
        nx = ny = n;
        x_min = x0;
        y_min = y0;
        hx = std::max((x1 - x0) / nx, 1e-300);
        hy = std::max((y1 - y0) / ny, 1e-300);
        bins.resize(static_cast<std::size_t>(nx) * ny);
        for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
            const auto& tri = mesh.triangles[t];
            double tx0 = 1e300, ty0 = 1e300, tx1 = -1e300, ty1 = -1e300;
            for (int k = 0; k < 3; ++k) {
                const Vec2& v = mesh.vertices[tri[k]];
                tx0 = std::min(tx0, v.x);
                ty0 = std::min(ty0, v.y);
                tx1 = std::max(tx1, v.x);
                ty1 = std::max(ty1, v.y);
            }
            const int i0 = clamp_x(tx0), i1 = clamp_x(tx1);
            const int j0 = clamp_y(ty0), j1 = clamp_y(ty1);
            for (int j = j0; j <= j1; ++j)
                for (int i = i0; i <= i1; ++i)
                    bins[static_cast<std::size_t>(j) * nx + i].push_back(static_cast<int>(t));
        }
    }

    int clamp_x(double x) const {
        return std::clamp(static_cast<int>((x - x_min) / hx), 0, nx - 1);
    }
    int clamp_y(double y) const {
        return std::clamp(static_cast<int>((y - y_min) / hy), 0, ny - 1);
    }
    const std::vector<int>& bin(Vec2 p) const {
        return bins[static_cast<std::size_t>(clamp_y(p.y)) * nx + clamp_x(p.x)];
    }
};

Field::Field(const FunctionSpace& space, Eigen::VectorXd coeffs)
    : space_(&space), u_(std::move(coeffs)) {
    if (u_.size() != space.n_dofs())
        throw std::invalid_argument("field: coefficient vector size mismatch");
    locator_ = std::make_shared<const Locator>(space.mesh());
}

int Field::locate(Vec2 p, double* xi, double* eta, int side) const {
    const TriMesh& mesh = space_->mesh();
    int best = -1;
    double best_margin = -1e300;
    double best_xi = 0, best_eta = 0;
    for (int t : locator_->bin(p)) {
        if (side != 0) {
            const auto& tri = mesh.triangles[t];
            const double cy = (mesh.vertices[tri[0]].y + mesh.vertices[tri[1]].y +
                               mesh.vertices[tri[2]].y) /
                              3.0;
            if (side > 0 ? cy <= p.y : cy >= p.y) continue;
        }
        const auto& g = space_->geom(t);
        const double dx = p.x - g.x0.x;
        const double dy = p.y - g.x0.y;
        const double txi = (g.jac[1][1] * dx - g.jac[0][1] * dy) / g.det;
        const double teta = (-g.jac[1][0] * dx + g.jac[0][0] * dy) / g.det;
        const double margin = std::min({txi, teta, 1.0 - txi - teta});
        if (margin > best_margin) {
            best_margin = margin;
            best = t;
            best_xi = txi;
            best_eta = teta;
        }
    }
    if (best < 0 || best_margin < -kBaryTol) return -1;
    *xi = best_xi;
    *eta = best_eta;
    return best;
}

double Field::eval_in_triangle(int t, double xi, double eta, int comp) const {
    double N[6];
    space_->shape(xi, eta, N);
    const auto nodes = space_->element_nodes(t);
    const int ne = space_->n_element_nodes();
    double val = 0.0;
    for (int i = 0; i < ne; ++i) val += N[i] * u_[space_->dof(nodes[i], comp)];
    return val;
}

std::optional<double> Field::try_eval(Vec2 p, int comp) const {
    double xi, eta;
    const int t = locate(p, &xi, &eta, 0);
    if (t < 0) return std::nullopt;
    return eval_in_triangle(t, xi, eta, comp);
}

std::optional<double> Field::try_eval_side(Vec2 p, int comp, int side) const {
    double xi, eta;
    const int t = locate(p, &xi, &eta, side);
    if (t < 0) return std::nullopt;
    return eval_in_triangle(t, xi, eta, comp);
}

double Field::eval(Vec2 p, int comp) const {
    auto v = try_eval(p, comp);
    if (!v) throw std::runtime_error("field: evaluation point lies outside the mesh");
    return *v;
}

std::optional<Vec2> Field::try_grad(Vec2 p, int comp) const {
    double xi, eta;
    const int t = locate(p, &xi, &eta, 0);
    if (t < 0) return std::nullopt;
    double dref[6][2];
    space_->shape_grad_ref(xi, eta, dref);
    const auto& g = space_->geom(t);
    const auto nodes = space_->element_nodes(t);
    const int ne = space_->n_element_nodes();
    Vec2 grad{0.0, 0.0};
    for (int i = 0; i < ne; ++i) {
        const double gx = g.inv_jac_t[0][0] * dref[i][0] + g.inv_jac_t[0][1] * dref[i][1];
        const double gy = g.inv_jac_t[1][0] * dref[i][0] + g.inv_jac_t[1][1] * dref[i][1];
        const double c = u_[space_->dof(nodes[i], comp)];
        grad.x += c * gx;
        grad.y += c * gy;
    }
    return grad;
}

double Field::integrate(int comp) const {
    const TriQuadrature& quad = TriQuadrature::degree(space_->order());
    const int nt = static_cast<int>(space_->mesh().triangles.size());
    double total = 0.0;
    for (int t = 0; t < nt; ++t) {
        const auto& g = space_->geom(t);
        for (const auto& qp : quad.points)
            total += qp.w * g.det * eval_in_triangle(t, qp.xi, qp.eta, comp);
    }
    return total;
}

namespace {

/// Intersection of one triangle with an axis-parallel line: at most one
/// segment, described by the parameter interval along the free axis.
struct LineCut {
    bool full_edge = false;
    double t0 = 0.0, t1 = 0.0;  // free-axis coordinates of the endpoints
};

}  // namespace

double Field::integrate_line_y(double c, int comp, double x0, double x1, int side) const {
    if (!(x1 > x0)) return 0.0;
    const TriMesh& mesh = space_->mesh();
    const LineQuadrature& quad = LineQuadrature::gauss(3);
    double total = 0.0;
    const int nt = static_cast<int>(mesh.triangles.size());
    for (int t = 0; t < nt; ++t) {
        const auto& tri = mesh.triangles[t];
        const Vec2 v[3] = {mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]};
        int on[3];
        int n_on = 0;
        for (int k = 0; k < 3; ++k) {
            on[k] = std::abs(v[k].y - c) <= kOnLineTol;
            n_on += on[k];
        }
        double xa = 0.0, xb = 0.0;
        if (n_on == 2) {
            // An edge lies on the line; claim it from one side only.
            const double cy = (v[0].y + v[1].y + v[2].y) / 3.0;
            if (side >= 0 ? cy <= c : cy >= c) continue;
            int idx = 0;
            double xs[2];
            for (int k = 0; k < 3; ++k)
                if (on[k]) xs[idx++] = v[k].x;
            xa = std::min(xs[0], xs[1]);
            xb = std::max(xs[0], xs[1]);
        } else {
            // Generic cut: collect crossings of the edges plus on-line vertices.
            double xs[4];
            int idx = 0;
            for (int k = 0; k < 3; ++k) {
                if (on[k]) xs[idx++] = v[k].x;
                const Vec2 a = v[k];
                const Vec2 b = v[(k + 1) % 3];
                if (on[k] || on[(k + 1) % 3]) continue;
                if ((a.y - c) * (b.y - c) < 0.0)
                    xs[idx++] = a.x + (c - a.y) / (b.y - a.y) * (b.x - a.x);
            }
            if (idx < 2) continue;
            xa = *std::min_element(xs, xs + idx);
            xb = *std::max_element(xs, xs + idx);
        }
        xa = std::max(xa, x0);
        xb = std::min(xb, x1);
        if (!(xb - xa > kOnLineTol)) continue;
        const auto& g = space_->geom(t);
        for (const auto& qp : quad.points) {
            const double x = xa + qp.s * (xb - xa);
            const double dx = x - g.x0.x;
            const double dy = c - g.x0.y;
            const double xi = (g.jac[1][1] * dx - g.jac[0][1] * dy) / g.det;
            const double eta = (-g.jac[1][0] * dx + g.jac[0][0] * dy) / g.det;
            total += qp.w * (xb - xa) * eval_in_triangle(t, xi, eta, comp);
        }
    }
    return total;
}

double Field::integrate_line_x(double c, int comp, double y0, double y1, int side) const {
    if (!(y1 > y0)) return 0.0;
    const TriMesh& mesh = space_->mesh();
    const LineQuadrature& quad = LineQuadrature::gauss(3);
    double total = 0.0;
    const int nt = static_cast<int>(mesh.triangles.size());
    for (int t = 0; t < nt; ++t) {
        const auto& tri = mesh.triangles[t];
        const Vec2 v[3] = {mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]};
        int on[3];
        int n_on = 0;
        for (int k = 0; k < 3; ++k) {
            on[k] = std::abs(v[k].x - c) <= kOnLineTol;
            n_on += on[k];
        }
        double ya = 0.0, yb = 0.0;
        if (n_on == 2) {
            const double cx = (v[0].x + v[1].x + v[2].x) / 3.0;
            if (side >= 0 ? cx <= c : cx >= c) continue;
            int idx = 0;
            double ys[2];
            for (int k = 0; k < 3; ++k)
                if (on[k]) ys[idx++] = v[k].y;
            ya = std::min(ys[0], ys[1]);
            yb = std::max(ys[0], ys[1]);
        } else {
            double ys[4];
            int idx = 0;
            for (int k = 0; k < 3; ++k) {
                if (on[k]) ys[idx++] = v[k].y;
                const Vec2 a = v[k];
                const Vec2 b = v[(k + 1) % 3];
                if (on[k] || on[(k + 1) % 3]) continue;
                if ((a.x - c) * (b.x - c) < 0.0)
                    ys[idx++] = a.y + (c - a.x) / (b.x - a.x) * (b.y - a.y);
            }
            if (idx < 2) continue;
            ya = *std::min_element(ys, ys + idx);
            yb = *std::max_element(ys, ys + idx);
        }
        ya = std::max(ya, y0);
        yb = std::min(yb, y1);
        if (!(yb - ya > kOnLineTol)) continue;
        const auto& g = space_->geom(t);
        for (const auto& qp : quad.points) {
            const double y = ya + qp.s * (yb - ya);
            const double dx = c - g.x0.x;
            const double dy = y - g.x0.y;
            const double xi = (g.jac[1][1] * dx - g.jac[0][1] * dy) / g.det;
            const double eta = (-g.jac[1][0] * dx + g.jac[0][0] * dy) / g.det;
            total += qp.w * (yb - ya) * eval_in_triangle(t, xi, eta, comp);
        }
    }
    return total;
}

double Field::integrate_edges(EdgeTag tag, int side, int comp) const {
    const LineQuadrature& quad = LineQuadrature::gauss(3);
    double N[3];
    double total = 0.0;
    for (const auto& e : space_->mesh().edge_tags) {
        if (e.tag != tag) continue;
        if (side != 0 && e.side != side) continue;
        const auto tr = space_->trace(e);
        for (const auto& qp : quad.points) {
            const int ne = space_->edge_shape(qp.s, N);
            double val = 0.0;
            for (int i = 0; i < ne; ++i) val += N[i] * u_[space_->dof(tr.nodes[i], comp)];
            total += qp.w * tr.length * val;
        }
    }
    return total;
}

double Field::l2_norm(int comp, int quad_degree) const {
    const TriQuadrature& quad = TriQuadrature::degree(quad_degree);
    const int nt = static_cast<int>(space_->mesh().triangles.size());
    double total = 0.0;
    for (int t = 0; t < nt; ++t) {
        const auto& g = space_->geom(t);
        for (const auto& qp : quad.points) {
            const double v = eval_in_triangle(t, qp.xi, qp.eta, comp);
            total += qp.w * g.det * v * v;
        }
    }
    return std::sqrt(total);
}

double Field::l2_error(const std::function<double(Vec2)>& exact, int comp,
                       int quad_degree) const {
    const TriQuadrature& quad = TriQuadrature::degree(quad_degree);
    const int nt = static_cast<int>(space_->mesh().triangles.size());
    double total = 0.0;
    for (int t = 0; t < nt; ++t) {
        const auto& g = space_->geom(t);
        for (const auto& qp : quad.points) {
            const Vec2 x{g.x0.x + g.jac[0][0] * qp.xi + g.jac[0][1] * qp.eta,
                         g.x0.y + g.jac[1][0] * qp.xi + g.jac[1][1] * qp.eta};
            const double d = eval_in_triangle(t, qp.xi, qp.eta, comp) - exact(x);
            total += qp.w * g.det * d * d;
        }
    }
    return std::sqrt(total);
}

double Field::h1_seminorm_error(const std::function<Vec2(Vec2)>& exact_grad, int comp,
                                int quad_degree) const {
    const TriQuadrature& quad = TriQuadrature::degree(quad_degree);
    const int nt = static_cast<int>(space_->mesh().triangles.size());
    const int ne = space_->n_element_nodes();
    double total = 0.0;
    double dref[6][2];
    for (int t = 0; t < nt; ++t) {
        const auto& g = space_->geom(t);
        const auto nodes = space_->element_nodes(t);
        for (const auto& qp : quad.points) {
            space_->shape_grad_ref(qp.xi, qp.eta, dref);
            Vec2 grad{0.0, 0.0};
            for (int i = 0; i < ne; ++i) {
                const double gx = g.inv_jac_t[0][0] * dref[i][0] + g.inv_jac_t[0][1] * dref[i][1];
                const double gy = g.inv_jac_t[1][0] * dref[i][0] + g.inv_jac_t[1][1] * dref[i][1];
                const double cu = u_[space_->dof(nodes[i], comp)];
                grad.x += cu * gx;
                grad.y += cu * gy;
            }
            const Vec2 x{g.x0.x + g.jac[0][0] * qp.xi + g.jac[0][1] * qp.eta,
                         g.x0.y + g.jac[1][0] * qp.xi + g.jac[1][1] * qp.eta};
            const Vec2 eg = exact_grad(x);
            const double ex = grad.x - eg.x;
            const double ey = grad.y - eg.y;
            total += qp.w * g.det * (ex * ex + ey * ey);
        }
    }
    return std::sqrt(total);
}

}  // namespace fpflow
