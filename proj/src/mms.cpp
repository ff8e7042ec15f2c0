#include "fpflow/mms.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "fpflow/assemble.hpp"
#include "fpflow/constraints.hpp"
#include "fpflow/field.hpp"
#include "fpflow/function_space.hpp"
#include "fpflow/sparse_system.hpp"
#include "fpflow/trimesh.hpp"

namespace fpflow {

namespace {

constexpr double PI = 3.14159265358979323846;

// Exactly divergence-free velocity from the stream function
// psi = sin^2(pi x) sin^2(pi y); pressure with zero mean on the unit square.
Vec2 exact_velocity(Vec2 p) {
    const double sx = std::sin(PI * p.x), cx = std::cos(PI * p.x);
    const double sy = std::sin(PI * p.y), cy = std::cos(PI * p.y);
    return {2.0 * PI * sx * sx * sy * cy, -2.0 * PI * sx * cx * sy * sy};
}

Vec2 exact_velocity_grad_row(Vec2 p, int comp) {
    const double sx = std::sin(PI * p.x), cx = std::cos(PI * p.x);
    const double sy = std::sin(PI * p.y), cy = std::cos(PI * p.y);
    const double s2x = 2.0 * sx * cx, c2x = cx * cx - sx * sx;
    const double s2y = 2.0 * sy * cy, c2y = cy * cy - sy * sy;
    if (comp == 0)  // grad of v1 = pi sin^2(pi x) sin(2 pi y)
        return {PI * PI * s2x * s2y, 2.0 * PI * PI * sx * sx * c2y};
    // grad of v2 = -pi sin(2 pi x) sin^2(pi y)
    return {-2.0 * PI * PI * c2x * sy * sy, -PI * PI * s2x * s2y};
}

double exact_pressure(Vec2 p) { return std::cos(PI * p.x) * std::sin(PI * p.y); }

// f = -laplace(v) + grad(p) for the fields above.
Vec2 body_force(Vec2 p) {
    const double sx = std::sin(PI * p.x), cx = std::cos(PI * p.x);
    const double sy = std::sin(PI * p.y), cy = std::cos(PI * p.y);
    const double s2x = 2.0 * sx * cx, c2x = cx * cx - sx * sx;
    const double s2y = 2.0 * sy * cy, c2y = cy * cy - sy * sy;
    const double pi2 = PI * PI;
    // laplace of v1 = 2 pi^2 [c2x s2y - 2 sx*sx s2y] ... expanded directly:
    const double lap_v1 = 2.0 * PI * pi2 * (c2x * s2y - 2.0 * sx * sx * s2y);
    const double lap_v2 = -2.0 * PI * pi2 * (-2.0 * s2x * sy * sy + s2x * c2y);
    const double dpx = -PI * sx * sy;
    const double dpy = PI * cx * cy;
    return {-lap_v1 + dpx, -lap_v2 + dpy};
}

double darcy_exact(Vec2 p) { return std::sin(PI * p.x) * std::cos(PI * p.y); }

// f = -div(K grad p) for K = [[2, 0.3], [0.3, 1]].
double darcy_source(Vec2 p) {
    const double sx = std::sin(PI * p.x), cx = std::cos(PI * p.x);
    const double sy = std::sin(PI * p.y), cy = std::cos(PI * p.y);
    return PI * PI * (3.0 * sx * cy + 0.6 * cx * sy);
}

std::vector<TriMesh> refinement_sequence(double h0, int n_levels) {
    if (n_levels < 2) throw std::invalid_argument("mms: need at least two levels");
    if (n_levels > 3) throw std::invalid_argument("mms: refinement factors support three levels");
    std::vector<TriMesh> meshes;
    meshes.push_back(build_rectangle({0.0, 1.0, 0.0, 1.0}, h0));
    meshes.push_back(refine(meshes[0], 2));
    if (n_levels == 3) meshes.push_back(refine(meshes[0], 4));
    return meshes;
}

double rate_from(const std::vector<MmsLevel>& lv, double MmsLevel::*err) {
    const std::size_t n = lv.size();
    return std::log2(lv[n - 2].*err / lv[n - 1].*err);
}

}  // namespace

MmsReport stokes_mms(double h0, int n_levels) {
    MmsReport rep;
    auto meshes = refinement_sequence(h0, n_levels);
    for (int lev = 0; lev < n_levels; ++lev) {
        const TriMesh& mesh = meshes[lev];
        FunctionSpace V(mesh, 2, 2);
        FunctionSpace Q(mesh, 1, 1);
        const int nv = V.n_dofs(), np = Q.n_dofs();
        SparseSystem sys(nv + np + 1);
        assemble_laplacian(sys, V, 1.0, 0);
        assemble_divergence_coupling(sys, V, Q, 0, nv, -1.0);
        add_mean_constraint(sys, Q, nv, nv + np);
        add_body_force(sys, V, body_force, 0, 6);

        LinearConstraints bc(nv + np + 1);
        std::unordered_set<int> boundary;
        for (const EdgeTag tag : {EdgeTag::top, EdgeTag::bottom, EdgeTag::left, EdgeTag::right})
            for (const int n : V.nodes_with_tag(tag)) boundary.insert(n);
        for (const int n : boundary) {
            const Vec2 v = exact_velocity(V.node_position(n));
            bc.fix(V.dof(n, 0), v.x);
            bc.fix(V.dof(n, 1), v.y);
        }
        const Eigen::VectorXd x = sys.solve(bc);

        Field vh(V, x.head(nv));
        Field ph(Q, x.segment(nv, np));
        MmsLevel l;
        l.h = h0 / (1 << lev);
        const double e0 = vh.l2_error([](Vec2 p) { return exact_velocity(p).x; }, 0, 6);
        const double e1 = vh.l2_error([](Vec2 p) { return exact_velocity(p).y; }, 1, 6);
        l.v_l2 = std::hypot(e0, e1);
        const double g0 = vh.h1_seminorm_error([](Vec2 p) { return exact_velocity_grad_row(p, 0); },
                                               0, 6);
        const double g1 = vh.h1_seminorm_error([](Vec2 p) { return exact_velocity_grad_row(p, 1); },
                                               1, 6);
        l.v_h1 = std::hypot(g0, g1);
        l.p_l2 = ph.l2_error(exact_pressure, 0, 6);
        rep.levels.push_back(l);
    }
    rep.rate_v_l2 = rate_from(rep.levels, &MmsLevel::v_l2);
    rep.rate_v_h1 = rate_from(rep.levels, &MmsLevel::v_h1);
    rep.rate_p_l2 = rate_from(rep.levels, &MmsLevel::p_l2);
    return rep;
}

MmsReport darcy_mms(double h0, int n_levels) {
    MmsReport rep;
    Eigen::Matrix2d K;
    K << 2.0, 0.3, 0.3, 1.0;
    auto meshes = refinement_sequence(h0, n_levels);
    for (int lev = 0; lev < n_levels; ++lev) {
        const TriMesh& mesh = meshes[lev];
        FunctionSpace P(mesh, 2, 1);
        SparseSystem sys(P.n_dofs());
        assemble_scalar_diffusion(sys, P, K, 0);
        add_scalar_source(sys, P, darcy_source, 0, 6);

        LinearConstraints bc(P.n_dofs());
        std::unordered_set<int> boundary;
        for (const EdgeTag tag : {EdgeTag::top, EdgeTag::bottom, EdgeTag::left, EdgeTag::right})
            for (const int n : P.nodes_with_tag(tag)) boundary.insert(n);
        for (const int n : boundary) bc.fix(P.dof(n, 0), darcy_exact(P.node_position(n)));
        const Eigen::VectorXd x = sys.solve(bc);

        Field ph(P, x);
        MmsLevel l;
        l.h = h0 / (1 << lev);
        l.p_l2 = ph.l2_error(darcy_exact, 0, 6);
        rep.levels.push_back(l);
    }
    rep.rate_p_l2 = rate_from(rep.levels, &MmsLevel::p_l2);
    return rep;
}

}  // namespace fpflow
