#ifndef FPFLOW_CONSTRAINTS_HPP
#define FPFLOW_CONSTRAINTS_HPP

#include <array>
#include <functional>
#include <unordered_map>
#include <vector>

#include "fpflow/function_space.hpp"

namespace fpflow {

/// Affine equality constraints on the degrees of freedom of a linear
/// system: fixed values (Dirichlet) and ties u_a = u_b + delta (periodic
/// identification for delta = 0, prescribed jumps across a duplicated line
/// otherwise). Ties are merged with an offset-carrying union-find, so
/// chains and cycles are handled; each class is represented by its
/// smallest member for determinism. Inconsistent cycles or conflicting
/// fixed values are an error.
class LinearConstraints {
public:
    explicit LinearConstraints(int n_dofs);

    void fix(int dof, double value);
    /// Imposes u_a = u_b + delta.
    void tie(int a, int b, double delta = 0.0);

    /// Builds the reduced numbering. Called automatically by the queries
    /// below; further fix/tie calls after finalization throw.
    void finalize();

    int n_full() const { return static_cast<int>(parent_.size()); }
    int n_reduced();

    /// Class representative of a dof.
    int representative(int dof);
    /// Offset of the dof relative to its representative:
    /// u_dof = u_representative + offset(dof).
    double offset(int dof);
    /// True when the dof's class carries a fixed value.
    bool is_fixed(int dof);
    /// The dof's own prescribed value (class value plus its offset).
    double fixed_value(int dof);
    /// Index of the dof's class in the reduced system; -1 for fixed classes.
    int reduced_index(int dof);

private:
    int find(int dof);

    std::vector<int> parent_;
    std::vector<double> shift_;              ///< offset to the current parent
    std::unordered_map<int, double> fixed_;  ///< root -> value at the root
    std::vector<int> reduced_;
    std::vector<int> path_;  ///< scratch for find()
    int n_reduced_ = 0;
    bool finalized_ = false;
};

/// Ties every dof of each (master, slave) vertex pair, including the P2
/// midpoint nodes of edges whose endpoints are both paired. `offset` shifts
/// the space's dofs inside a larger monolithic system.
void tie_vertex_pairs(LinearConstraints& bc, const FunctionSpace& space,
                      const std::vector<std::array<int, 2>>& pairs, int offset);

/// tie_vertex_pairs over all pair lists of a periodic map.
void tie_periodic(LinearConstraints& bc, const FunctionSpace& space, const PeriodicMap& map,
                  int offset);

/// Imposes u(plus vertex) = u(minus vertex) + jump(x) componentwise across a
/// duplicated interface line given as (minus, plus) vertex pairs, including
/// the midpoint nodes of paired edges (jump evaluated at the midpoint). A
/// null jump ties the sides together (continuous field).
void tie_interface_jump(LinearConstraints& bc, const FunctionSpace& space,
                        const std::vector<std::array<int, 2>>& pairs, int offset,
                        const std::function<Vec2(Vec2)>& jump);

}  // namespace fpflow

#endif  // FPFLOW_CONSTRAINTS_HPP
