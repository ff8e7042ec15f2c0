#include <memory>
#include <stdexcept>
#include <utility>

#include "fpflow/assemble.hpp"
#include "fpflow/constraints.hpp"
#include "fpflow/effective_coefficients.hpp"

namespace fpflow {

CellProblemResult solve_cell_problems(TriMesh cell_mesh) {
    if (!cell_mesh.has_tag(EdgeTag::obstacle)) {
        throw std::runtime_error(
            "cell problems: mesh has no obstacle boundary; "
            "the permeability of an unobstructed cell is undefined");
    }
    if (cell_mesh.periodic_maps.size() != 2) {
        throw std::runtime_error("cell problems: mesh must be periodic in both directions");
    }

    auto mesh = std::make_shared<TriMesh>(std::move(cell_mesh));
    auto V = std::make_shared<FunctionSpace>(*mesh, 2, 2);
    auto Q = std::make_shared<FunctionSpace>(*mesh, 1, 1);
    const int nv = V->n_dofs();
    const int np = Q->n_dofs();
    const int n = nv + np + 1;  // trailing dof: multiplier fixing the pressure mean

    SparseSystem sys(n);
    assemble_laplacian(sys, *V, 1.0, 0);
    assemble_divergence_coupling(sys, *V, *Q, 0, nv, -1.0);
    add_mean_constraint(sys, *Q, nv, nv + np);

    LinearConstraints bc(n);
    for (const auto& pm : mesh->periodic_maps) {
        tie_periodic(bc, *V, pm, 0);
        tie_periodic(bc, *Q, pm, nv);
    }
    for (int node : V->nodes_with_tag(EdgeTag::obstacle)) {
        bc.fix(V->dof(node, 0), 0.0);
        bc.fix(V->dof(node, 1), 0.0);
    }
    sys.prepare(bc);

    CellProblemResult out;
    out.mesh = mesh;
    out.velocity_space = V;
    out.pressure_space = Q;
    for (int j = 0; j < 2; ++j) {
        const Vec2 e = (j == 0) ? Vec2{1.0, 0.0} : Vec2{0.0, 1.0};
        add_body_force(sys, *V, [e](Vec2) { return e; }, 0);
        const Eigen::VectorXd rhs = sys.take_rhs();
        const Eigen::VectorXd x = sys.solve_prepared(bc, rhs);
        out.velocity[j] = x.head(nv);
        out.pressure[j] = x.segment(nv, np);
        Field vel(*V, out.velocity[j]);
        for (int i = 0; i < 2; ++i) out.K(i, j) = vel.integrate(i);
    }
    return out;
}

}  // namespace fpflow
