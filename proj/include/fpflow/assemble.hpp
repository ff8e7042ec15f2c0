#ifndef FPFLOW_ASSEMBLE_HPP
#define FPFLOW_ASSEMBLE_HPP

#include <Eigen/Dense>
#include <functional>

#include "fpflow/function_space.hpp"
#include "fpflow/sparse_system.hpp"

namespace fpflow {

/// Every assembler adds into an existing system; `offset` shifts the
/// space's dofs inside a larger monolithic block layout.

/// coeff * integral of grad(u) : grad(phi), componentwise (the vector
/// Laplacian for vector spaces, the scalar one for scalar spaces).
void assemble_laplacian(SparseSystem& sys, const FunctionSpace& S, double coeff, int offset);

/// Scalar diffusion with a constant coefficient matrix:
/// integral of grad(q) . K grad(p).
void assemble_scalar_diffusion(SparseSystem& sys, const FunctionSpace& S,
                               const Eigen::Matrix2d& K, int offset);

/// coeff * integral of u phi, componentwise.
void assemble_mass(SparseSystem& sys, const FunctionSpace& S, double coeff, int offset);

/// Saddle coupling of a vector velocity space and a scalar pressure space:
/// adds sign * integral of p div(phi) at (velocity row, pressure column)
/// and sign * integral of q div(v) at (pressure row, velocity column).
/// The default sign -1 yields the symmetric form
///   integral grad(v):grad(phi) - p div(phi) - q div(v).
void assemble_divergence_coupling(SparseSystem& sys, const FunctionSpace& V,
                                  const FunctionSpace& P, int offset_v, int offset_p,
                                  double sign = -1.0);

/// Right-hand side loads.
void add_body_force(SparseSystem& sys, const FunctionSpace& V,
                    const std::function<Vec2(Vec2)>& f, int offset, int quad_degree = 6);
void add_scalar_source(SparseSystem& sys, const FunctionSpace& S,
                       const std::function<double(Vec2)>& f, int offset, int quad_degree = 6);

/// Boundary load integral of g . phi over edges carrying the tag (side = 0
/// matches any side; otherwise the edge's side must equal `side`).
void add_edge_load(SparseSystem& sys, const FunctionSpace& V, EdgeTag tag, int side,
                   const std::function<Vec2(Vec2)>& g, int offset);
void add_scalar_edge_load(SparseSystem& sys, const FunctionSpace& S, EdgeTag tag, int side,
                          const std::function<double(Vec2)>& g, int offset);

/// Tangential Robin term alpha * integral of (v . tau)(phi . tau) over the
/// tagged edges.
void add_tangential_robin(SparseSystem& sys, const FunctionSpace& V, EdgeTag tag, int side,
                          double alpha, int offset);

/// Couples one auxiliary scalar unknown (at dof index `row`) to the mean of
/// a scalar field: adds entries m_i = integral of phi_i at (row, p_i) and
/// (p_i, row). With zero right-hand side at `row` this enforces a zero mean
/// and returns the mean of the residual functional as the multiplier.
void add_mean_constraint(SparseSystem& sys, const FunctionSpace& P, int offset_p, int row);

}  // namespace fpflow

#endif  // FPFLOW_ASSEMBLE_HPP
