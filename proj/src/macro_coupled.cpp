#include "fpflow/macro_coupled.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "fpflow/assemble.hpp"
#include "fpflow/constraints.hpp"
#include "fpflow/quadrature.hpp"

namespace fpflow {

namespace {

Vec2 grad_local(const FunctionSpace& S, const Eigen::VectorXd& u, int t, double xi, double eta,
                int comp) {
    double dN[6][2];
    S.shape_grad_ref(xi, eta, dN);
    const auto nodes = S.element_nodes(t);
    const auto& g = S.geom(t);
    const int ne = S.n_element_nodes();
    Vec2 out{0.0, 0.0};
    for (int i = 0; i < ne; ++i) {
        const double c = u[S.dof(nodes[i], comp)];
        out.x += c * (g.inv_jac_t[0][0] * dN[i][0] + g.inv_jac_t[0][1] * dN[i][1]);
        out.y += c * (g.inv_jac_t[1][0] * dN[i][0] + g.inv_jac_t[1][1] * dN[i][1]);
    }
    return out;
}

void ref_coords(const FunctionSpace::ElementGeom& g, Vec2 p, double* xi, double* eta) {
    const double dx = p.x - g.x0.x;
    const double dy = p.y - g.x0.y;
    *xi = (g.jac[1][1] * dx - g.jac[0][1] * dy) / g.det;
    *eta = (-g.jac[1][0] * dx + g.jac[0][0] * dy) / g.det;
}

/// d/ds of the edge trace shape functions at s, ordered like edge_shape
/// ([a, b] for linear, [a, b, midpoint] for quadratic); returns the count.
int edge_shape_ds(const FunctionSpace& S, double s, double* dNds) {
    if (S.order() == 1) {
        dNds[0] = -1.0;
        dNds[1] = 1.0;
        return 2;
    }
    dNds[0] = 4.0 * s - 3.0;
    dNds[1] = 4.0 * s - 1.0;
    dNds[2] = 4.0 - 8.0 * s;
    return 3;
}

/// One matched interface edge: the free-flow trace (velocity space), the
/// porous trace (porous pressure space) and the one-sided elements.
struct SigmaEdge {
    FunctionSpace::EdgeTrace ff;
    FunctionSpace::EdgeTrace pm;
    int ff_tri = -1;  ///< free-flow triangle adjacent to the edge
    int pm_tri = -1;  ///< porous triangle adjacent to the edge
};

std::vector<SigmaEdge> match_interface(const FunctionSpace& V, const FunctionSpace& Ppm) {
    auto ff_edges = V.mesh().edges_with_tag(EdgeTag::interface_S);
    auto pm_edges = Ppm.mesh().edges_with_tag(EdgeTag::interface_S);
    if (ff_edges.empty() || pm_edges.empty())
        throw std::invalid_argument("coupled assembly: a subdomain mesh has no interface edge");
    if (ff_edges.size() != pm_edges.size())
        throw std::invalid_argument("coupled assembly: interface traces do not match "
                                    "(different edge counts)");

    // Adjacency maps: a boundary edge belongs to exactly one triangle.
    std::unordered_map<std::uint64_t, int> ff_tri, pm_tri;
    auto key = [](int a, int b) {
        if (a > b) std::swap(a, b);
        return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
    };
    for (int t = 0; t < static_cast<int>(V.mesh().triangles.size()); ++t) {
        const auto& tri = V.mesh().triangles[t];
        for (int k = 0; k < 3; ++k) ff_tri.emplace(key(tri[k], tri[(k + 1) % 3]), t);
    }
    for (int t = 0; t < static_cast<int>(Ppm.mesh().triangles.size()); ++t) {
        const auto& tri = Ppm.mesh().triangles[t];
        for (int k = 0; k < 3; ++k) pm_tri.emplace(key(tri[k], tri[(k + 1) % 3]), t);
    }

    std::vector<SigmaEdge> out;
    out.reserve(ff_edges.size());
    for (const TaggedEdge& e : ff_edges) {
        SigmaEdge se;
        se.ff = V.trace(e);
        se.ff_tri = ff_tri.at(key(e.v0, e.v1));
        out.push_back(se);
    }
    std::sort(out.begin(), out.end(), [](const SigmaEdge& a, const SigmaEdge& b) {
        return a.ff.a.x + a.ff.b.x < b.ff.a.x + b.ff.b.x;
    });

    std::vector<std::pair<FunctionSpace::EdgeTrace, int>> pm_sorted;
    pm_sorted.reserve(pm_edges.size());
    for (const TaggedEdge& e : pm_edges)
        pm_sorted.push_back({Ppm.trace(e), pm_tri.at(key(e.v0, e.v1))});
    std::sort(pm_sorted.begin(), pm_sorted.end(), [](const auto& a, const auto& b) {
        return a.first.a.x + a.first.b.x < b.first.a.x + b.first.b.x;
    });

    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].pm = pm_sorted[i].first;
        out[i].pm_tri = pm_sorted[i].second;
        const double lo_f = std::min(out[i].ff.a.x, out[i].ff.b.x);
        const double hi_f = std::max(out[i].ff.a.x, out[i].ff.b.x);
        const double lo_p = std::min(out[i].pm.a.x, out[i].pm.b.x);
        const double hi_p = std::max(out[i].pm.a.x, out[i].pm.b.x);
        if (std::abs(lo_f - lo_p) > 1e-12 || std::abs(hi_f - hi_p) > 1e-12 ||
            std::abs(out[i].ff.a.y - out[i].pm.a.y) > 1e-12)
            throw std::invalid_argument("coupled assembly: interface traces do not match "
                                        "(edge endpoints differ)");
    }
    return out;
}

void check_problem(const MacroProblem& prob) {
    if (std::abs(prob.free_flow.y_min - prob.porous.y_max) > 1e-12 ||
        std::abs(prob.free_flow.x_min - prob.porous.x_min) > 1e-12 ||
        std::abs(prob.free_flow.x_max - prob.porous.x_max) > 1e-12)
        throw std::invalid_argument(
            "coupled problem: the rectangles must share the horizontal interface edge");
    if (!(prob.eps > 0.0)) throw std::invalid_argument("coupled problem: eps must be positive");
    if (!(prob.h > 0.0)) throw std::invalid_argument("coupled problem: mesh size must be positive");
}

}  // namespace

MacroAssembly assemble_coupled(const MacroProblem& prob, const ConditionSet& set) {
    check_problem(prob);
    if (set.kind == ConditionKind::higher_order && std::abs(set.coeffs.N1) < 1e-8)
        throw std::invalid_argument(
            "higher-order conditions: slip constant N1 is numerically zero and the "
            "formulation divides by it");
    if (set.kind == ConditionKind::classical && !(set.K_char > 0.0 && set.alpha > 0.0))
        throw std::invalid_argument("classical conditions: alpha and K_char must be positive");
    if (set.kind != ConditionKind::classical && !(set.eps > 0.0))
        throw std::invalid_argument("interface conditions: eps must be positive");

    MacroAssembly A;
    A.ff_mesh = std::make_shared<const TriMesh>(
        build_rectangle(prob.free_flow, prob.h, static_cast<int>(EdgeTag::bottom)));
    A.pm_mesh = std::make_shared<const TriMesh>(
        build_rectangle(prob.porous, prob.h, static_cast<int>(EdgeTag::top)));
    A.velocity_space = std::make_shared<const FunctionSpace>(*A.ff_mesh, 2, 2);
    A.ff_pressure_space = std::make_shared<const FunctionSpace>(*A.ff_mesh, 1, 1);
    A.pm_pressure_space = std::make_shared<const FunctionSpace>(*A.pm_mesh, 2, 1);
    const FunctionSpace& V = *A.velocity_space;
    const FunctionSpace& Qf = *A.ff_pressure_space;
    const FunctionSpace& Pp = *A.pm_pressure_space;

    const int nv = V.n_dofs();
    const int npf = Qf.n_dofs();
    const int npp = Pp.n_dofs();
    A.offset_v = 0;
    A.offset_pff = nv;
    A.offset_ppm = nv + npf;
    A.K_eps = prob.eps * prob.eps * prob.K;

    A.system = std::make_unique<SparseSystem>(nv + npf + npp);
    SparseSystem& sys = *A.system;
    assemble_laplacian(sys, V, 1.0, A.offset_v);
    assemble_divergence_coupling(sys, V, Qf, A.offset_v, A.offset_pff, -1.0);
    assemble_scalar_diffusion(sys, Pp, A.K_eps, A.offset_ppm);

    // Interface terms. The viscous weak form contributes
    //   + integral over Sigma of phi_1 d(v_1)/dy + phi_2 (d(v_2)/dy - p_ff);
    // the shear d(v_1)/dy is replaced by the slip condition solved for it,
    // the combination d(v_2)/dy - p_ff by the pressure-balance condition
    // (it equals minus the right side of that condition beyond p_ff). The
    // Darcy weak form contributes + integral of q v2_pm, replaced by the
    // mass condition.
    const EffectiveCoefficients& c = set.coeffs;
    const double eps = set.eps;
    const auto edges = match_interface(V, Pp);
    const auto& lq = LineQuadrature::gauss(3);
    for (const SigmaEdge& se : edges) {
        const auto& gpm = Pp.geom(se.pm_tri);
        const auto pm_elem = Pp.element_nodes(se.pm_tri);
        for (const auto& qp : lq.points) {
            const Vec2 p = se.ff.a + qp.s * (se.ff.b - se.ff.a);
            const double w = qp.w * se.ff.length;

            double Nf[3], dNf[3] = {0.0, 0.0, 0.0};
            V.edge_shape(qp.s, Nf);
            edge_shape_ds(V, qp.s, dNf);
            const double dxf = se.ff.b.x - se.ff.a.x;  // signed; d/dx1 = d/ds / dxf
            int v1d[3], v2d[3];
            for (int i = 0; i < 3; ++i) {
                v1d[i] = A.offset_v + V.dof(se.ff.nodes[i], 0);
                v2d[i] = A.offset_v + V.dof(se.ff.nodes[i], 1);
            }

            const double sp = (p.x - se.pm.a.x) / (se.pm.b.x - se.pm.a.x);
            double Np[3], dNp[3] = {0.0, 0.0, 0.0};
            Pp.edge_shape(sp, Np);
            edge_shape_ds(Pp, sp, dNp);
            const double dxp = se.pm.b.x - se.pm.a.x;
            int ppd[3];
            for (int i = 0; i < 3; ++i) ppd[i] = A.offset_ppm + Pp.dof(se.pm.nodes[i], 0);

            // One-sided y-derivative of the porous pressure basis.
            double xi, eta, dN6[6][2], dYb[6];
            ref_coords(gpm, p, &xi, &eta);
            Pp.shape_grad_ref(xi, eta, dN6);
            int ped[6];
            for (int i = 0; i < 6; ++i) {
                dYb[i] = gpm.inv_jac_t[1][0] * dN6[i][0] + gpm.inv_jac_t[1][1] * dN6[i][1];
                ped[i] = A.offset_ppm + Pp.dof(pm_elem[i], 0);
            }

            if (set.kind == ConditionKind::classical) {
                // Slip law solved for the shear: d(v_1)/dy = (alpha/sqrt(K_char))
                // (v_1 - v1_pm) with v1_pm = -(K_eps grad p)_1 from the porous trace.
                const double cr = set.alpha / std::sqrt(set.K_char);
                for (int i = 0; i < 3; ++i) {
                    for (int j = 0; j < 3; ++j) {
                        sys.add(v1d[i], v1d[j], w * cr * Nf[i] * Nf[j]);
                        sys.add(v1d[i], ppd[j], w * cr * A.K_eps(0, 0) * Nf[i] * dNp[j] / dxp);
                        // Pressure balance: d(v_2)/dy - p_ff = -p_pm.
                        sys.add(v2d[i], ppd[j], -w * Nf[i] * Np[j]);
                        // Mass condition: v2_pm = v2_ff.
                        sys.add(ppd[i], v2d[j], w * Np[i] * Nf[j]);
                    }
                    for (int j = 0; j < 6; ++j)
                        sys.add(v1d[i], ped[j], w * cr * A.K_eps(0, 1) * Nf[i] * dYb[j]);
                }
            } else {
                // Slip law solved for the shear:
                //   d(v_1)/dy = -(1/(eps N1)) v_1 + (eps/N1) (M1_1 d(p_pm)/dx1
                //                                           [+ M1_2 d(p_pm)/dy]).
                const double rob = -1.0 / (eps * c.N1);
                const double m1 = eps / c.N1 * c.M1_1;
                const double m2 =
                    set.kind == ConditionKind::generalized ? eps / c.N1 * c.M1_2 : 0.0;
                for (int i = 0; i < 3; ++i) {
                    for (int j = 0; j < 3; ++j) {
                        sys.add(v1d[i], v1d[j], w * rob * Nf[i] * Nf[j]);
                        sys.add(v1d[i], ppd[j], w * m1 * Nf[i] * dNp[j] / dxp);
                        sys.add(v2d[i], ppd[j], -w * Nf[i] * Np[j]);
                        sys.add(ppd[i], v2d[j], w * Np[i] * Nf[j]);
                    }
                    if (m2 != 0.0)
                        for (int j = 0; j < 6; ++j) sys.add(v1d[i], ped[j], w * m2 * Nf[i] * dYb[j]);
                }
                if (set.kind == ConditionKind::generalized && c.Ns != 0.0) {
                    // Pressure balance keeps the shear term Ns d(v_1)/dy,
                    // substituted through the same slip law.
                    for (int i = 0; i < 3; ++i) {
                        for (int j = 0; j < 3; ++j) {
                            sys.add(v2d[i], v1d[j], w * c.Ns * rob * Nf[i] * Nf[j]);
                            sys.add(v2d[i], ppd[j], w * c.Ns * m1 * Nf[i] * dNp[j] / dxp);
                        }
                        if (m2 != 0.0)
                            for (int j = 0; j < 6; ++j)
                                sys.add(v2d[i], ped[j], w * c.Ns * m2 * Nf[i] * dYb[j]);
                    }
                }
                if (set.kind == ConditionKind::higher_order) {
                    // Pressure balance corrections: -eps Mw_2 d(p_pm)/dy and
                    // the tangential-slip term -(Leta+Eb+N1)/N1 d(v_1)/dx1;
                    // mass-condition correction: -eps (W/N1) d(v_1)/dx1.
                    const double cp = (c.Leta + c.Eb + c.N1) / c.N1;
                    const double wn = eps * c.W / c.N1;
                    for (int i = 0; i < 3; ++i) {
                        for (int j = 0; j < 6; ++j)
                            sys.add(v2d[i], ped[j], -w * eps * c.Mw_2 * Nf[i] * dYb[j]);
                        for (int j = 0; j < 3; ++j) {
                            if (cp != 0.0)
                                sys.add(v2d[i], v1d[j], -w * cp * Nf[i] * dNf[j] / dxf);
                            if (wn != 0.0)
                                sys.add(ppd[i], v1d[j], -w * wn * Np[i] * dNf[j] / dxf);
                        }
                    }
                }
            }
        }
    }

    // Exterior data: lid on top, no slip on the free-flow walls (walls win
    // at the corners), prescribed pressure on the porous bottom; the no-flow
    // porous walls are natural.
    A.bc = std::make_unique<LinearConstraints>(nv + npf + npp);
    std::unordered_set<int> wall;
    for (const int n : V.nodes_with_tag(EdgeTag::left)) wall.insert(n);
    for (const int n : V.nodes_with_tag(EdgeTag::right)) wall.insert(n);
    for (const int n : wall) {
        A.bc->fix(A.offset_v + V.dof(n, 0), 0.0);
        A.bc->fix(A.offset_v + V.dof(n, 1), 0.0);
    }
    for (const int n : V.nodes_with_tag(EdgeTag::top)) {
        if (wall.count(n)) continue;
        A.bc->fix(A.offset_v + V.dof(n, 0), prob.lid_velocity);
        A.bc->fix(A.offset_v + V.dof(n, 1), 0.0);
    }
    for (const int n : Pp.nodes_with_tag(EdgeTag::bottom))
        A.bc->fix(A.offset_ppm + Pp.dof(n, 0), prob.bottom_pressure);
    return A;
}

MacroSolution solve_macro(const MacroProblem& prob, const ConditionSet& set) {
    MacroAssembly A = assemble_coupled(prob, set);
    Eigen::VectorXd x;
    try {
        x = A.system->solve(*A.bc);
    } catch (const std::exception& e) {
        throw std::runtime_error("coupled solve with " + to_string(set.kind) +
                                 " conditions failed: " + e.what());
    }

    MacroSolution sol;
    sol.ff_mesh = A.ff_mesh;
    sol.pm_mesh = A.pm_mesh;
    sol.velocity_space = A.velocity_space;
    sol.ff_pressure_space = A.ff_pressure_space;
    sol.pm_pressure_space = A.pm_pressure_space;
    sol.K_eps = A.K_eps;
    sol.kind = set.kind;
    sol.n_dofs = A.system->size();
    const int nv = A.velocity_space->n_dofs();
    const int npf = A.ff_pressure_space->n_dofs();
    const int npp = A.pm_pressure_space->n_dofs();
    sol.vff = x.segment(A.offset_v, nv);
    sol.pff = x.segment(A.offset_pff, npf);
    sol.ppm = x.segment(A.offset_ppm, npp);
    sol.pm_velocity_space = std::make_shared<const FunctionSpace>(*A.pm_mesh, 2, 2);
    sol.vpm = darcy_velocity(*A.pm_pressure_space, sol.ppm, A.K_eps, *sol.pm_velocity_space);
    return sol;
}

Eigen::VectorXd darcy_velocity(const FunctionSpace& P, const Eigen::VectorXd& p,
                               const Eigen::Matrix2d& K_eps, const FunctionSpace& Vout) {
    if (&P.mesh() != &Vout.mesh())
        throw std::invalid_argument("darcy_velocity: spaces must share one mesh");
    if (p.size() != P.n_dofs())
        throw std::invalid_argument("darcy_velocity: coefficient size does not match the space");
    SparseSystem ms(Vout.n_dofs());
    assemble_mass(ms, Vout, 1.0, 0);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(Vout.n_dofs());
    const auto& quad = TriQuadrature::degree(4);
    const int ne = Vout.n_element_nodes();
    for (int t = 0; t < static_cast<int>(P.mesh().triangles.size()); ++t) {
        const auto nodes = Vout.element_nodes(t);
        const double det = Vout.geom(t).det;
        for (const auto& qp : quad.points) {
            const Vec2 g = grad_local(P, p, t, qp.xi, qp.eta, 0);
            const double vx = -(K_eps(0, 0) * g.x + K_eps(0, 1) * g.y);
            const double vy = -(K_eps(1, 0) * g.x + K_eps(1, 1) * g.y);
            double N[6];
            Vout.shape(qp.xi, qp.eta, N);
            for (int i = 0; i < ne; ++i) {
                rhs[Vout.dof(nodes[i], 0)] += qp.w * det * N[i] * vx;
                rhs[Vout.dof(nodes[i], 1)] += qp.w * det * N[i] * vy;
            }
        }
    }
    LinearConstraints none(Vout.n_dofs());
    ms.prepare(none);
    return ms.solve_prepared(none, rhs);
}

double interface_flux_mismatch(const MacroSolution& sol, const ConditionSet& set) {
    const FunctionSpace& Pp = *sol.pm_pressure_space;
    const FunctionSpace& V = *sol.velocity_space;

    // Variationally consistent interface flux: integral of K_eps grad(p_pm)
    // . grad(qhat) with qhat = 1 at every interface node, which equals the
    // weak integral over Sigma of -v2_pm by the assembled Darcy rows.
    SparseSystem ak(Pp.n_dofs());
    assemble_scalar_diffusion(ak, Pp, sol.K_eps, 0);
    const Eigen::VectorXd Ap = ak.matrix() * sol.ppm;
    double weak = 0.0;
    for (const int n : Pp.nodes_with_tag(EdgeTag::interface_S)) weak += Ap[Pp.dof(n, 0)];
    const double pm_flux = -weak;  // weak integral over Sigma of v2_pm

    // Mass-condition right side, integrated independently from the solved
    // free-flow trace.
    double rhs = 0.0;
    const auto& lq = LineQuadrature::gauss(3);
    for (const TaggedEdge& e : V.mesh().edges_with_tag(EdgeTag::interface_S)) {
        const auto tr = V.trace(e);
        const double dxf = tr.b.x - tr.a.x;
        for (const auto& qp : lq.points) {
            double Nf[3], dNf[3] = {0.0, 0.0, 0.0};
            V.edge_shape(qp.s, Nf);
            edge_shape_ds(V, qp.s, dNf);
            double v2 = 0.0, d1v1 = 0.0;
            for (int i = 0; i < 3; ++i) {
                v2 += Nf[i] * sol.vff[V.dof(tr.nodes[i], 1)];
                d1v1 += dNf[i] / dxf * sol.vff[V.dof(tr.nodes[i], 0)];
            }
            double val = v2;
            if (set.kind == ConditionKind::higher_order)
                val -= set.eps * set.coeffs.W / set.coeffs.N1 * d1v1;
            rhs += qp.w * tr.length * val;
        }
    }
    return std::abs(pm_flux - rhs);
}

double slip_condition_residual(const MacroSolution& sol, const ConditionSet& set) {
    const FunctionSpace& V = *sol.velocity_space;
    const FunctionSpace& Pp = *sol.pm_pressure_space;
    const auto edges = match_interface(V, Pp);
    const auto& lq = LineQuadrature::gauss(3);
    double num = 0.0, den = 0.0;
    for (const SigmaEdge& se : edges) {
        const auto& gff = V.geom(se.ff_tri);
        const auto& gpm = Pp.geom(se.pm_tri);
        const double dxp = se.pm.b.x - se.pm.a.x;
        for (const auto& qp : lq.points) {
            const Vec2 p = se.ff.a + qp.s * (se.ff.b - se.ff.a);
            const double w = qp.w * se.ff.length;
            double Nf[3];
            V.edge_shape(qp.s, Nf);
            double v1 = 0.0;
            for (int i = 0; i < 3; ++i) v1 += Nf[i] * sol.vff[V.dof(se.ff.nodes[i], 0)];
            double xi, eta;
            ref_coords(gff, p, &xi, &eta);
            const double shear = grad_local(V, sol.vff, se.ff_tri, xi, eta, 0).y;

            const double sp = (p.x - se.pm.a.x) / dxp;
            double Np[3], dNp[3] = {0.0, 0.0, 0.0};
            Pp.edge_shape(sp, Np);
            edge_shape_ds(Pp, sp, dNp);
            double d1p = 0.0;
            for (int i = 0; i < 3; ++i) d1p += dNp[i] / dxp * sol.ppm[Pp.dof(se.pm.nodes[i], 0)];
            ref_coords(gpm, p, &xi, &eta);
            const double d2p = grad_local(Pp, sol.ppm, se.pm_tri, xi, eta, 0).y;

            double r;
            if (set.kind == ConditionKind::classical) {
                const double v1pm = -(sol.K_eps(0, 0) * d1p + sol.K_eps(0, 1) * d2p);
                r = v1 - v1pm - std::sqrt(set.K_char) / set.alpha * shear;
            } else {
                const double m2 = set.kind == ConditionKind::generalized ? set.coeffs.M1_2 : 0.0;
                r = v1 + set.eps * set.coeffs.N1 * shear -
                    set.eps * set.eps * (set.coeffs.M1_1 * d1p + m2 * d2p);
            }
            num += w * r * r;
            den += w * v1 * v1;
        }
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

double net_boundary_flux(const MacroSolution& sol) {
    const FunctionSpace& Pp = *sol.pm_pressure_space;
    SparseSystem ak(Pp.n_dofs());
    assemble_scalar_diffusion(ak, Pp, sol.K_eps, 0);
    const Eigen::VectorXd Ap = ak.matrix() * sol.ppm;
    double weak = 0.0;
    for (const int n : Pp.nodes_with_tag(EdgeTag::bottom)) weak += Ap[Pp.dof(n, 0)];
    // weak equals the consistent integral of v2_pm along the bottom; the
    // outward normal there is -e2, so the outflow is its negative.
    return -weak;
}

}  // namespace fpflow
