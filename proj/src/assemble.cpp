#include "fpflow/assemble.hpp"

#include <stdexcept>

#include "fpflow/quadrature.hpp"

namespace fpflow {

namespace {

constexpr int kMaxNodes = 6;

struct QuadGrads {
    double dN[kMaxNodes][2];  // physical gradients
};

void physical_gradients(const FunctionSpace& S, const FunctionSpace::ElementGeom& g, double xi,
                        double eta, QuadGrads& out) {
    double dref[kMaxNodes][2];
    S.shape_grad_ref(xi, eta, dref);
    const int ne = S.n_element_nodes();
    for (int i = 0; i < ne; ++i) {
        out.dN[i][0] = g.inv_jac_t[0][0] * dref[i][0] + g.inv_jac_t[0][1] * dref[i][1];
        out.dN[i][1] = g.inv_jac_t[1][0] * dref[i][0] + g.inv_jac_t[1][1] * dref[i][1];
    }
}

Vec2 map_point(const FunctionSpace::ElementGeom& g, double xi, double eta) {
    return {g.x0.x + g.jac[0][0] * xi + g.jac[0][1] * eta,
            g.x0.y + g.jac[1][0] * xi + g.jac[1][1] * eta};
}

bool side_matches(const TaggedEdge& e, int side) { return side == 0 || e.side == side; }

}  // namespace

void assemble_laplacian(SparseSystem& sys, const FunctionSpace& S, double coeff, int offset) {
    const TriQuadrature& quad = TriQuadrature::degree(2 * (S.order() - 1));
    const int ne = S.n_element_nodes();
    const int nc = S.components();
    QuadGrads g;
    const int nt = static_cast<int>(S.mesh().triangles.size());
    for (int t = 0; t < nt; ++t) {
        const auto& geom = S.geom(t);
        const auto nodes = S.element_nodes(t);
        for (const auto& qp : quad.points) {
            physical_gradients(S, geom, qp.xi, qp.eta, g);
            const double scale = coeff * qp.w * geom.det;
            for (int i = 0; i < ne; ++i)
                for (int j = 0; j < ne; ++j) {
                    const double ke = scale * (g.dN[i][0] * g.dN[j][0] + g.dN[i][1] * g.dN[j][1]);
                    for (int c = 0; c < nc; ++c)
                        sys.add(offset + S.dof(nodes[i], c), offset + S.dof(nodes[j], c), ke);
                }
        }
    }
}

void assemble_scalar_diffusion(SparseSystem& sys, const FunctionSpace& S,
                               const Eigen::Matrix2d& K, int offset) {
    if (S.components() != 1)
        throw std::invalid_argument("scalar diffusion needs a scalar space");
    const TriQuadrature& quad = TriQuadrature::degree(2 * (S.order() - 1));
    const int ne = S.n_element_nodes();
    QuadGrads g;
    const int nt = static_cast<int>(S.mesh().triangles.size());
    for (int t = 0; t < nt; ++t) {
        const auto& geom = S.geom(t);
        const auto nodes = S.element_nodes(t);
        for (const auto& qp : quad.points) {
            physical_gradients(S, geom, qp.xi, qp.eta, g);
            const double scale = qp.w * geom.det;
            for (int i = 0; i < ne; ++i)
                for (int j = 0; j < ne; ++j) {
                    const double kgrad0 = K(0, 0) * g.dN[j][0] + K(0, 1) * g.dN[j][1];
                    const double kgrad1 = K(1, 0) * g.dN[j][0] + K(1, 1) * g.dN[j][1];
                    const double ke = scale * (g.dN[i][0] * kgrad0 + g.dN[i][1] * kgrad1);
                    sys.add(offset + nodes[i], offset + nodes[j], ke);
                }
        }
    }
}

void assemble_mass(SparseSystem& sys, const FunctionSpace& S, double coeff, int offset) {
    const TriQuadrature& quad = TriQuadrature::degree(2 * S.order());
    const int ne = S.n_element_nodes();
    const int nc = S.components();
    double N[kMaxNodes];
    const int nt = static_cast<int>(S.mesh().triangles.size());
    for (int t = 0; t < nt; ++t) {
        const auto& geom = S.geom(t);
        const auto nodes = S.element_nodes(t);
        for (const auto& qp : quad.points) {
            S.shape(qp.xi, qp.eta, N);
            const double scale = coeff * qp.w * geom.det;
            for (int i = 0; i < ne; ++i)
                for (int j = 0; j < ne; ++j)
                    for (int c = 0; c < nc; ++c)
                        sys.add(offset + S.dof(nodes[i], c), offset + S.dof(nodes[j], c),
                                scale * N[i] * N[j]);
        }
    }
}

void assemble_divergence_coupling(SparseSystem& sys, const FunctionSpace& V,
                                  const FunctionSpace& P, int offset_v, int offset_p,
                                  double sign) {
    if (V.components() != 2 || P.components() != 1)
        throw std::invalid_argument("divergence coupling needs a vector and a scalar space");
    if (&V.mesh() != &P.mesh())
        throw std::invalid_argument("divergence coupling: spaces live on different meshes");
    const TriQuadrature& quad = TriQuadrature::degree(V.order());
    const int nev = V.n_element_nodes();
    const int nep = P.n_element_nodes();
    QuadGrads gv;
    double Np[kMaxNodes];
    const int nt = static_cast<int>(V.mesh().triangles.size());
    for (int t = 0; t < nt; ++t) {
        const auto& geom = V.geom(t);
        const auto vnodes = V.element_nodes(t);
        const auto pnodes = P.element_nodes(t);
        for (const auto& qp : quad.points) {
            physical_gradients(V, geom, qp.xi, qp.eta, gv);
            P.shape(qp.xi, qp.eta, Np);
            const double scale = sign * qp.w * geom.det;
            for (int i = 0; i < nev; ++i)
                for (int c = 0; c < 2; ++c) {
                    const double div_ic = gv.dN[i][c];  // div of (N_i e_c)
                    const int vd = offset_v + V.dof(vnodes[i], c);
                    for (int k = 0; k < nep; ++k) {
                        const double val = scale * Np[k] * div_ic;
                        sys.add(vd, offset_p + pnodes[k], val);
                        sys.add(offset_p + pnodes[k], vd, val);
                    }
                }
        }
    }
}

void add_body_force(SparseSystem& sys, const FunctionSpace& V,
                    const std::function<Vec2(Vec2)>& f, int offset, int quad_degree) {
    const TriQuadrature& quad = TriQuadrature::degree(quad_degree);
    const int ne = V.n_element_nodes();
    double N[kMaxNodes];
    const int nt = static_cast<int>(V.mesh().triangles.size());
    for (int t = 0; t < nt; ++t) {
        const auto& geom = V.geom(t);
        const auto nodes = V.element_nodes(t);
        for (const auto& qp : quad.points) {
            V.shape(qp.xi, qp.eta, N);
            const Vec2 fx = f(map_point(geom, qp.xi, qp.eta));
            const double scale = qp.w * geom.det;
            for (int i = 0; i < ne; ++i) {
                sys.add_rhs(offset + V.dof(nodes[i], 0), scale * N[i] * fx.x);
                sys.add_rhs(offset + V.dof(nodes[i], 1), scale * N[i] * fx.y);
            }
        }
    }
}

void add_scalar_source(SparseSystem& sys, const FunctionSpace& S,
                       const std::function<double(Vec2)>& f, int offset, int quad_degree) {
    const TriQuadrature& quad = TriQuadrature::degree(quad_degree);
    const int ne = S.n_element_nodes();
    double N[kMaxNodes];
    const int nt = static_cast<int>(S.mesh().triangles.size());
    for (int t = 0; t < nt; ++t) {
        const auto& geom = S.geom(t);
        const auto nodes = S.element_nodes(t);
        for (const auto& qp : quad.points) {
            S.shape(qp.xi, qp.eta, N);
            const double fx = f(map_point(geom, qp.xi, qp.eta));
            const double scale = qp.w * geom.det;
            for (int i = 0; i < ne; ++i) sys.add_rhs(offset + nodes[i], scale * N[i] * fx);
        }
    }
}

void add_edge_load(SparseSystem& sys, const FunctionSpace& V, EdgeTag tag, int side,
                   const std::function<Vec2(Vec2)>& g, int offset) {
    const LineQuadrature& quad = LineQuadrature::gauss(4);
    double N[3];
    for (const auto& e : V.mesh().edge_tags) {
        if (e.tag != tag || !side_matches(e, side)) continue;
        const auto tr = V.trace(e);
        for (const auto& qp : quad.points) {
            const int ne = V.edge_shape(qp.s, N);
            const Vec2 x = tr.a + qp.s * (tr.b - tr.a);
            const Vec2 gx = g(x);
            const double scale = qp.w * tr.length;
            for (int i = 0; i < ne; ++i) {
                sys.add_rhs(offset + V.dof(tr.nodes[i], 0), scale * N[i] * gx.x);
                sys.add_rhs(offset + V.dof(tr.nodes[i], 1), scale * N[i] * gx.y);
            }
        }
    }
}

void add_scalar_edge_load(SparseSystem& sys, const FunctionSpace& S, EdgeTag tag, int side,
                          const std::function<double(Vec2)>& g, int offset) {
    const LineQuadrature& quad = LineQuadrature::gauss(4);
    double N[3];
    for (const auto& e : S.mesh().edge_tags) {
        if (e.tag != tag || !side_matches(e, side)) continue;
        const auto tr = S.trace(e);
        for (const auto& qp : quad.points) {
            const int ne = S.edge_shape(qp.s, N);
            const Vec2 x = tr.a + qp.s * (tr.b - tr.a);
            const double gx = g(x);
            const double scale = qp.w * tr.length;
            for (int i = 0; i < ne; ++i) sys.add_rhs(offset + tr.nodes[i], scale * N[i] * gx);
        }
    }
}

void add_tangential_robin(SparseSystem& sys, const FunctionSpace& V, EdgeTag tag, int side,
                          double alpha, int offset) {
    if (V.components() != 2)
        throw std::invalid_argument("tangential Robin term needs a vector space");
    const LineQuadrature& quad = LineQuadrature::gauss(3);
    double N[3];
    for (const auto& e : V.mesh().edge_tags) {
        if (e.tag != tag || !side_matches(e, side)) continue;
        const auto tr = V.trace(e);
        const double tau[2] = {tr.tangent.x, tr.tangent.y};
        for (const auto& qp : quad.points) {
            const int ne = V.edge_shape(qp.s, N);
            const double scale = alpha * qp.w * tr.length;
            for (int i = 0; i < ne; ++i)
                for (int j = 0; j < ne; ++j)
                    for (int c = 0; c < 2; ++c)
                        for (int d = 0; d < 2; ++d)
                            sys.add(offset + V.dof(tr.nodes[i], c), offset + V.dof(tr.nodes[j], d),
                                    scale * N[i] * N[j] * tau[c] * tau[d]);
        }
    }
}

void add_mean_constraint(SparseSystem& sys, const FunctionSpace& P, int offset_p, int row) {
    if (P.components() != 1) throw std::invalid_argument("mean constraint needs a scalar space");
    const TriQuadrature& quad = TriQuadrature::degree(P.order());
    const int ne = P.n_element_nodes();
    double N[kMaxNodes];
    const int nt = static_cast<int>(P.mesh().triangles.size());
    for (int t = 0; t < nt; ++t) {
        const auto& geom = P.geom(t);
        const auto nodes = P.element_nodes(t);
        for (const auto& qp : quad.points) {
            P.shape(qp.xi, qp.eta, N);
            const double scale = qp.w * geom.det;
            for (int i = 0; i < ne; ++i) {
                sys.add(row, offset_p + nodes[i], scale * N[i]);
                sys.add(offset_p + nodes[i], row, scale * N[i]);
            }
        }
    }
}

}  // namespace fpflow
