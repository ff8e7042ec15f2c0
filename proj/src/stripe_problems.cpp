#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fpflow/assemble.hpp"
#include "fpflow/constraints.hpp"
#include "fpflow/effective_coefficients.hpp"
#include "fpflow/quadrature.hpp"

namespace fpflow {

namespace {

// Element-local evaluation of a discrete field at a reference point, used
// for same-mesh data transfer (no point location involved).
double eval_local(const FunctionSpace& S, const Eigen::VectorXd& u, int t, double xi, double eta,
                  int comp) {
    double N[6];
    S.shape(xi, eta, N);
    const auto nodes = S.element_nodes(t);
    const int ne = S.n_element_nodes();
    double v = 0.0;
    for (int i = 0; i < ne; ++i) v += N[i] * u[S.dof(nodes[i], comp)];
    return v;
}

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

// Reference coordinates of a physical point inside element t.
void ref_coords(const FunctionSpace::ElementGeom& g, Vec2 p, double* xi, double* eta) {
    const double dx = p.x - g.x0.x;
    const double dy = p.y - g.x0.y;
    *xi = (g.jac[1][1] * dx - g.jac[0][1] * dy) / g.det;
    *eta = (-g.jac[1][0] * dx + g.jac[0][0] * dy) / g.det;
}

double centroid_y(const TriMesh& mesh, int t) {
    const auto& tri = mesh.triangles[t];
    return (mesh.vertices[tri[0]].y + mesh.vertices[tri[1]].y + mesh.vertices[tri[2]].y) / 3.0;
}

std::uint64_t edge_key(int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

// Squared L2 norm of the velocity over elements selected by centroid.
double velocity_norm_sq(const FunctionSpace& V, const Eigen::VectorXd& u,
                        const std::function<bool(double)>& keep) {
    const auto& quad = TriQuadrature::degree(4);
    double acc = 0.0;
    for (int t = 0; t < static_cast<int>(V.mesh().triangles.size()); ++t) {
        if (!keep(centroid_y(V.mesh(), t))) continue;
        const double det = V.geom(t).det;
        for (const auto& qp : quad.points) {
            for (int c = 0; c < 2; ++c) {
                const double v = eval_local(V, u, t, qp.xi, qp.eta, c);
                acc += qp.w * det * v * v;
            }
        }
    }
    return acc;
}

// L2-projection residual of (div u - g) onto the scalar multiplier space:
// moments rho_q = ∫ q (div u - g) folded over the periodic identifications,
// returned as rho^T M^{-1} rho (the squared norm of the projected defect).
double multiplier_space_defect(const FunctionSpace& V, const FunctionSpace& Q,
                               const Eigen::VectorXd& u,
                               const std::function<double(int, double, double)>& gfun) {
    const auto& quad = TriQuadrature::degree(4);
    const int np = Q.n_dofs();
    Eigen::VectorXd rho = Eigen::VectorXd::Zero(np);
    for (int t = 0; t < static_cast<int>(V.mesh().triangles.size()); ++t) {
        const double det = V.geom(t).det;
        const auto qnodes = Q.element_nodes(t);
        for (const auto& qp : quad.points) {
            const double div =
                grad_local(V, u, t, qp.xi, qp.eta, 0).x + grad_local(V, u, t, qp.xi, qp.eta, 1).y;
            const double defect = div - gfun(t, qp.xi, qp.eta);
            double NQ[6];
            Q.shape(qp.xi, qp.eta, NQ);
            for (int i = 0; i < 3; ++i) rho[Q.dof(qnodes[i], 0)] += qp.w * det * NQ[i] * defect;
        }
    }
    LinearConstraints bq(np);
    for (const auto& pm : Q.mesh().periodic_maps) tie_periodic(bq, Q, pm, 0);
    SparseSystem ms(np);
    assemble_mass(ms, Q, 1.0, 0);
    ms.prepare(bq);
    const Eigen::VectorXd y = ms.solve_prepared(bq, rho);
    return rho.dot(y);
}

}  // namespace

struct StripeSolver::EdgePair {
    FunctionSpace::EdgeTrace trace;  ///< minus-side trace (tests assemble here)
    int tri_minus = -1;
    int tri_plus = -1;
};

StripeSolver::StripeSolver(TriMesh stripe_mesh) {
    if (stripe_mesh.spec.kind != DomainKind::stripe || stripe_mesh.interface_pairs.empty())
        throw std::invalid_argument(
            "stripe solver: mesh is not a cut stripe with a duplicated interface line");
    mesh_ = std::make_shared<TriMesh>(std::move(stripe_mesh));
    m_ = mesh_->spec.stripe_height;
    V_ = std::make_shared<FunctionSpace>(*mesh_, 2, 2);
    Q_ = std::make_shared<FunctionSpace>(*mesh_, 1, 1);
    nv_ = V_->n_dofs();
    np_ = Q_->n_dofs();
    const int n = nv_ + np_ + 1;  // trailing dof: top-cell pressure-mean gauge
    sys_ = std::make_unique<SparseSystem>(n);

    assemble_laplacian(*sys_, *V_, 1.0, 0);
    assemble_divergence_coupling(*sys_, *V_, *Q_, 0, nv_, -1.0);

    // Natural condition at the top cut: zero normal derivative of the
    // velocity with the pressure left free. The symmetric form's natural
    // condition couples the pressure into the traction; the boundary term
    // + integral of p * phi_y over the top edge cancels that coupling.
    const auto& lq = LineQuadrature::gauss(3);
    for (const TaggedEdge& e : mesh_->edges_with_tag(EdgeTag::top)) {
        const auto tv = V_->trace(e);
        const auto tq = Q_->trace(e);
        for (const auto& qp : lq.points) {
            double NV[3], NQ[3];
            const int nvn = V_->edge_shape(qp.s, NV);
            const int nqn = Q_->edge_shape(qp.s, NQ);
            for (int i = 0; i < nvn; ++i)
                for (int j = 0; j < nqn; ++j)
                    sys_->add(V_->dof(tv.nodes[i], 1), nv_ + Q_->dof(tq.nodes[j], 0),
                              qp.w * tv.length * NV[i] * NQ[j]);
        }
    }

    // Pressure gauge: zero mean over the top cell of the upper half. The
    // measured constants use a different normalization (zero far-field
    // pressure below the interface), applied after the solve.
    {
        const auto& quad = TriQuadrature::degree(2);
        const int row = nv_ + np_;
        for (int t = 0; t < static_cast<int>(mesh_->triangles.size()); ++t) {
            if (centroid_y(*mesh_, t) <= m_ - 1.0) continue;
            const double det = Q_->geom(t).det;
            const auto qnodes = Q_->element_nodes(t);
            for (const auto& qp : quad.points) {
                double NQ[6];
                Q_->shape(qp.xi, qp.eta, NQ);
                for (int i = 0; i < 3; ++i) {
                    const double v = qp.w * det * NQ[i];
                    sys_->add(row, nv_ + Q_->dof(qnodes[i], 0), v);
                    sys_->add(nv_ + Q_->dof(qnodes[i], 0), row, v);
                }
            }
        }
    }

    bc0_ = std::make_unique<LinearConstraints>(make_constraints(nullptr));
    sys_->prepare(*bc0_);
}

StripeSolver::~StripeSolver() = default;

LinearConstraints StripeSolver::make_constraints(const std::function<Vec2(Vec2)>& jump) const {
    LinearConstraints bc(nv_ + np_ + 1);
    for (const auto& pm : mesh_->periodic_maps) {
        tie_periodic(bc, *V_, pm, 0);
        tie_periodic(bc, *Q_, pm, nv_);
    }
    tie_interface_jump(bc, *V_, mesh_->interface_pairs, 0, jump);
    for (int node : V_->nodes_with_tag(EdgeTag::obstacle)) {
        bc.fix(V_->dof(node, 0), 0.0);
        bc.fix(V_->dof(node, 1), 0.0);
    }
    for (int node : V_->nodes_with_tag(EdgeTag::bottom)) {
        bc.fix(V_->dof(node, 0), 0.0);
        bc.fix(V_->dof(node, 1), 0.0);
    }
    return bc;
}

double StripeSolver::band_mean(const Eigen::VectorXd& prs) const {
    const auto& quad = TriQuadrature::degree(2);
    double integral = 0.0;
    double area = 0.0;
    for (int t = 0; t < static_cast<int>(mesh_->triangles.size()); ++t) {
        const double cy = centroid_y(*mesh_, t);
        if (cy >= -m_ + 1.0 || cy <= -m_) continue;
        const double det = Q_->geom(t).det;
        area += 0.5 * det;
        for (const auto& qp : quad.points)
            integral += qp.w * det * eval_local(*Q_, prs, t, qp.xi, qp.eta, 0);
    }
    if (area <= 0.0) throw std::runtime_error("stripe solver: empty bottom cell band");
    return integral / area;
}

double StripeSolver::level_average(const Eigen::VectorXd& coeffs, const FunctionSpace& S,
                                   double level, int comp) const {
    Field f(S, coeffs);
    // Sampled from below so a level coinciding with the top cut still
    // integrates over existing triangles.
    return f.integrate_line_y(level, comp, 0.0, 1.0, -1);
}

void StripeSolver::check_decay(const std::string& id, StripeSolution& sol) const {
    const double m = static_cast<double>(m_);
    const double total = velocity_norm_sq(*V_, sol.velocity, [](double) { return true; });
    const double band = velocity_norm_sq(
        *V_, sol.velocity, [m](double cy) { return cy > -m && cy < -m + 1.0; });
    sol.diag.decay_ratio = total > 1e-28 ? std::sqrt(band / total) : 0.0;
    if (sol.diag.decay_ratio > decay_tol_) {
        std::ostringstream os;
        os << id << " problem: velocity has not decayed at the bottom cut (lowest-cell fraction "
           << sol.diag.decay_ratio << " > " << decay_tol_ << "); stripe too short, increase m";
        throw std::runtime_error(os.str());
    }
}

StripeSolution StripeSolver::finish(const std::string& id, Eigen::VectorXd x,
                                    bool measure_constants) {
    StripeSolution sol;
    sol.id = id;
    sol.velocity = x.head(nv_);
    sol.pressure = x.segment(nv_, np_);
    sol.pressure.array() -= band_mean(sol.pressure);

    check_decay(id, sol);

    // Stabilization: horizontal averages of the velocity across fixed
    // levels above the interface settle to the far-field constant.
    {
        std::vector<double> levels;
        for (double c : {1.0, 1.5, 2.0})
            if (c <= static_cast<double>(m_)) levels.push_back(c);
        double worst = 0.0;
        for (int comp = 0; comp < 2; ++comp) {
            std::vector<double> vals;
            vals.reserve(levels.size());
            for (double c : levels) vals.push_back(level_average(sol.velocity, *V_, c, comp));
            double mean = 0.0;
            for (double v : vals) mean += v;
            mean /= static_cast<double>(vals.size());
            double var = 0.0;
            for (double v : vals) var += (v - mean) * (v - mean);
            var /= static_cast<double>(vals.size());
            worst = std::max(worst, var);
        }
        sol.diag.stabilization_variance = worst;
    }

    if (measure_constants) {
        Field vel(*V_, sol.velocity);
        Field prs(*Q_, sol.pressure);
        sol.vel_constant = vel.integrate_edges(EdgeTag::interface_S, +1, 0);
        sol.prs_constant = prs.integrate_edges(EdgeTag::interface_S, +1, 0);
        const double v1 = level_average(sol.velocity, *V_, 1.0, 0);
        const double p1 = level_average(sol.pressure, *Q_, 1.0, 0);
        sol.diag.trace_vs_level1 =
            std::max(std::abs(sol.vel_constant - v1), std::abs(sol.prs_constant - p1));
    }
    return sol;
}

StripeSolution StripeSolver::solve_t() {
    // Unit tangential stress jump across S, realized as a one-sided edge
    // traction on the minus side: the jump term enters the weak form as
    // + integral over S of [[(grad u - p I) e2]] . phi, so a prescribed
    // jump e1 loads the right-hand side with - integral of e1 . phi.
    add_edge_load(*sys_, *V_, EdgeTag::interface_S, -1, [](Vec2) { return Vec2{-1.0, 0.0}; }, 0);
    Eigen::VectorXd x = sys_->solve_prepared(*bc0_, sys_->take_rhs());
    return finish("t", std::move(x), true);
}

StripeSolution StripeSolver::solve_beta(const CellProblemResult& cell, int j) {
    if (j != 1 && j != 2) throw std::invalid_argument("beta problem: j must be 1 or 2");
    if (!cell.velocity_space || cell.velocity[j - 1].size() == 0)
        throw std::invalid_argument("beta problem: cell solution is incomplete");
    Field w(*cell.velocity_space, cell.velocity[j - 1]);
    Field pi(*cell.pressure_space, cell.pressure[j - 1]);
    const double k2j = cell.K(1, j - 1);

    // Velocity jump k_{2j} e2 - w^j across S, with the cell trace taken on
    // the top edge of the unit cell and extended 1-periodically.
    const auto jump = [&w, k2j](Vec2 p) -> Vec2 {
        const Vec2 q{p.x, 1.0};
        return Vec2{-w.eval(q, 0), k2j - w.eval(q, 1)};
    };
    // Stress jump -(grad w^j - pi^j I) e2: enters the load with the
    // opposite sign (see solve_t), i.e. + integral of (grad w - pi I) e2 . phi.
    const auto traction = [&w, &pi](Vec2 p) -> Vec2 {
        const Vec2 q{p.x, 1.0};
        const auto g1 = w.try_grad(q, 0);
        const auto g2 = w.try_grad(q, 1);
        if (!g1 || !g2)
            throw std::runtime_error("beta problem: cell trace evaluation failed on the top edge");
        return Vec2{g1->y, g2->y - pi.eval(q, 0)};
    };

    LinearConstraints bc = make_constraints(jump);
    add_edge_load(*sys_, *V_, EdgeTag::interface_S, -1, traction, 0);
    Eigen::VectorXd x = sys_->solve_prepared(bc, sys_->take_rhs());
    return finish(j == 1 ? "beta1" : "beta2", std::move(x), true);
}

StripeSolution StripeSolver::solve_zeta(const StripeSolution& t, double n1) {
    if (t.velocity.size() != nv_)
        throw std::invalid_argument("zeta problem: solution does not match this discretization");

    // Divergence data g = t1 - H(y2) n1 and its moments against the
    // multiplier space; the jump constant is the lower-half volume integral
    // W = - integral over the lower half of t1.
    const auto& quad = TriQuadrature::degree(4);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nv_ + np_ + 1);
    double int_t1_lower = 0.0;
    double int_g = 0.0;
    const int n_elems = static_cast<int>(mesh_->triangles.size());
    for (int e = 0; e < n_elems; ++e) {
        const double cy = centroid_y(*mesh_, e);
        const double H = cy > 0.0 ? 1.0 : 0.0;
        const double det = Q_->geom(e).det;
        const auto qnodes = Q_->element_nodes(e);
        for (const auto& qp : quad.points) {
            const double t1 = eval_local(*V_, t.velocity, e, qp.xi, qp.eta, 0);
            const double gval = t1 - H * n1;
            int_g += qp.w * det * gval;
            if (cy < 0.0) int_t1_lower += qp.w * det * t1;
            double NQ[6];
            Q_->shape(qp.xi, qp.eta, NQ);
            for (int i = 0; i < 3; ++i)
                rhs[nv_ + Q_->dof(qnodes[i], 0)] -= qp.w * det * NQ[i] * gval;
        }
    }
    const double W = -int_t1_lower;

    // Net divergence must balance the prescribed normal-velocity jump; for
    // consistent inputs the mismatch sits at solver precision.
    const double compat = std::abs(int_g + W);
    if (compat > 1e-8) {
        std::ostringstream os;
        os << "zeta problem: divergence data inconsistent with the interface jump "
              "(compatibility integral "
           << compat << " > 1e-8)";
        throw std::runtime_error(os.str());
    }

    LinearConstraints bc = make_constraints([W](Vec2) { return Vec2{0.0, W}; });
    Eigen::VectorXd x = sys_->solve_prepared(bc, rhs);
    StripeSolution sol = finish("zeta", std::move(x), false);
    sol.vel_constant = W;
    sol.diag.compatibility = compat;
    sol.diag.divergence_residual = multiplier_space_defect(
        *V_, *Q_, sol.velocity, [&](int e, double xi, double eta) {
            const double H = centroid_y(*mesh_, e) > 0.0 ? 1.0 : 0.0;
            return eval_local(*V_, t.velocity, e, xi, eta, 0) - H * n1;
        });

    // Mean normal-gradient jump across S: signed for the wall-normal
    // component (pinned by the divergence data), absolute for the tangential
    // component (a property of the chosen lifting, reported only).
    {
        const auto& lq = LineQuadrature::gauss(2);
        double acc = 0.0;
        double acc_t = 0.0;
        for (const EdgePair& ep : interface_edge_pairs()) {
            for (const auto& qp : lq.points) {
                const Vec2 p = ep.trace.a + qp.s * (ep.trace.b - ep.trace.a);
                double xi, eta;
                ref_coords(V_->geom(ep.tri_plus), p, &xi, &eta);
                const double up = grad_local(*V_, sol.velocity, ep.tri_plus, xi, eta, 1).y;
                const double up_t = grad_local(*V_, sol.velocity, ep.tri_plus, xi, eta, 0).y;
                ref_coords(V_->geom(ep.tri_minus), p, &xi, &eta);
                const double dn = grad_local(*V_, sol.velocity, ep.tri_minus, xi, eta, 1).y;
                const double dn_t = grad_local(*V_, sol.velocity, ep.tri_minus, xi, eta, 0).y;
                acc += qp.w * ep.trace.length * (up - dn);
                acc_t += qp.w * ep.trace.length * std::abs(up_t - dn_t);
            }
        }
        sol.diag.normal_gradient_jump = acc;
        sol.diag.tangential_gradient_jump = acc_t;
    }
    return sol;
}

StripeSolution StripeSolver::solve_xi(const StripeSolution& t, double ns) {
    if (t.velocity.size() != nv_)
        throw std::invalid_argument("xi problem: solution does not match this discretization");

    // Body force 2 d(t)/dy1 - (s - H(y2) ns) e1 with the renormalized
    // pressure of the tangential-jump solve.
    const auto& quad = TriQuadrature::degree(4);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nv_ + np_ + 1);
    const int n_elems = static_cast<int>(mesh_->triangles.size());
    for (int e = 0; e < n_elems; ++e) {
        const double H = centroid_y(*mesh_, e) > 0.0 ? 1.0 : 0.0;
        const double det = V_->geom(e).det;
        const auto vnodes = V_->element_nodes(e);
        for (const auto& qp : quad.points) {
            const double dt1 = grad_local(*V_, t.velocity, e, qp.xi, qp.eta, 0).x;
            const double dt2 = grad_local(*V_, t.velocity, e, qp.xi, qp.eta, 1).x;
            const double s = eval_local(*Q_, t.pressure, e, qp.xi, qp.eta, 0);
            const Vec2 f{2.0 * dt1 - (s - H * ns), 2.0 * dt2};
            double NV[6];
            V_->shape(qp.xi, qp.eta, NV);
            for (int i = 0; i < 6; ++i) {
                rhs[V_->dof(vnodes[i], 0)] += qp.w * det * NV[i] * f.x;
                rhs[V_->dof(vnodes[i], 1)] += qp.w * det * NV[i] * f.y;
            }
        }
    }
    Eigen::VectorXd x = sys_->solve_prepared(*bc0_, rhs);
    return finish("xi", std::move(x), true);
}

StripeSolution StripeSolver::solve_c(const StripeSolution& zeta) {
    if (zeta.velocity.size() != nv_)
        throw std::invalid_argument("c problem: solution does not match this discretization");

    // Load: the interface stress sheet + integral over S of the wall-normal
    // gradient jump of the divergence lifting times phi_2.  The wall-normal
    // jump is pinned by the divergence data, so this sheet is the same for
    // every admissible lifting; it is the lifting-independent part of the
    // load.  Adding the volume gradient form of a particular lifting on top
    // would leave the velocity response at zero and shift the pressure by
    // exactly that lifting's own constraint multiplier (the lifting solve's
    // stationarity turns its gradient form into a pure pressure image), so
    // the sheet response is what defines the pressure constant measured
    // downstream.
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nv_ + np_ + 1);
    {
        const auto& lq = LineQuadrature::gauss(3);
        for (const EdgePair& ep : interface_edge_pairs()) {
            for (const auto& qp : lq.points) {
                const Vec2 p = ep.trace.a + qp.s * (ep.trace.b - ep.trace.a);
                double xi, eta;
                ref_coords(V_->geom(ep.tri_plus), p, &xi, &eta);
                double jump = grad_local(*V_, zeta.velocity, ep.tri_plus, xi, eta, 1).y;
                ref_coords(V_->geom(ep.tri_minus), p, &xi, &eta);
                jump -= grad_local(*V_, zeta.velocity, ep.tri_minus, xi, eta, 1).y;
                double NE[3];
                const int nn = V_->edge_shape(qp.s, NE);
                for (int i = 0; i < nn; ++i)
                    rhs[V_->dof(ep.trace.nodes[i], 1)] +=
                        qp.w * ep.trace.length * NE[i] * jump;
            }
        }
    }
    Eigen::VectorXd x = sys_->solve_prepared(*bc0_, rhs);
    return finish("c", std::move(x), true);
}

const std::vector<StripeSolver::EdgePair>& StripeSolver::interface_edge_pairs() {
    if (edge_pairs_) return *edge_pairs_;
    // Adjacent triangles per undirected vertex pair; interface-copy edges
    // border exactly one triangle each (their copies live in one half).
    std::unordered_map<std::uint64_t, std::array<int, 2>> owner;
    for (int t = 0; t < static_cast<int>(mesh_->triangles.size()); ++t) {
        const auto& tri = mesh_->triangles[t];
        for (int k = 0; k < 3; ++k) {
            auto& slot =
                owner.try_emplace(edge_key(tri[k], tri[(k + 1) % 3]), std::array<int, 2>{-1, -1})
                    .first->second;
            (slot[0] < 0 ? slot[0] : slot[1]) = t;
        }
    }
    std::unordered_map<int, int> plus_of;
    for (const auto& pr : mesh_->interface_pairs) plus_of[pr[0]] = pr[1];

    auto pairs = std::make_unique<std::vector<EdgePair>>();
    for (const TaggedEdge& e : mesh_->edge_tags) {
        if (e.tag != EdgeTag::interface_S || e.side != -1) continue;
        EdgePair ep;
        ep.trace = V_->trace(e);
        const auto mo = owner.find(edge_key(e.v0, e.v1));
        const auto po = owner.find(edge_key(plus_of.at(e.v0), plus_of.at(e.v1)));
        if (mo == owner.end() || po == owner.end() || mo->second[1] >= 0 || po->second[1] >= 0)
            throw std::runtime_error("stripe solver: malformed interface edge pairing");
        ep.tri_minus = mo->second[0];
        ep.tri_plus = po->second[0];
        pairs->push_back(ep);
    }
    edge_pairs_ = std::move(pairs);
    return *edge_pairs_;
}

}  // namespace fpflow
