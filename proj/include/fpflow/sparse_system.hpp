#ifndef FPFLOW_SPARSE_SYSTEM_HPP
#define FPFLOW_SPARSE_SYSTEM_HPP

#include <memory>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "fpflow/constraints.hpp"

namespace fpflow {

/// Triplet-buffered sparse linear system A x = b with constrained solve.
/// Constraints are folded algebraically: tied columns accumulate onto the
/// representative (tie offsets and fixed values move to the right-hand
/// side), and slave rows add onto their representative rows. The reduced
/// system is solved with a sparse LU factorization and the solution is
/// accepted only if the reduced residual norm satisfies
/// |A x - b| <= tol * max(1, |b|).
class SparseSystem {
public:
    explicit SparseSystem(int n_dofs);
    ~SparseSystem();
    SparseSystem(const SparseSystem&) = delete;
    SparseSystem& operator=(const SparseSystem&) = delete;

    int size() const { return n_; }
    void add(int i, int j, double v);
    void add_rhs(int i, double v);

    struct Stats {
        int n_full = 0;
        int n_reduced = 0;
        double residual = -1.0;
    };

    /// Unconstrained matrix and right-hand side assembled so far (mainly
    /// for inspection in tests).
    Eigen::SparseMatrix<double> matrix() const;
    const Eigen::VectorXd& rhs() const { return rhs_; }

    /// Returns the accumulated right-hand side and resets it to zero, so
    /// several load cases can be assembled against one operator.
    Eigen::VectorXd take_rhs();

    /// Folds the constraints into the reduced operator and factorizes it
    /// once. Matrix entries are frozen afterwards (add() throws). Repeated
    /// solve_prepared() calls may use constraint sets with different fixed
    /// values and tie offsets, as long as the tie/fix topology matches the
    /// one given here.
    void prepare(LinearConstraints& bc);
    bool prepared() const { return lu_ != nullptr; }

    /// Solves for one full-length right-hand side against the prepared
    /// factorization and expands back to full length (fixed dofs carry
    /// their values, tied dofs their representative's value plus their tie
    /// offset). Throws on an out-of-tolerance residual.
    Eigen::VectorXd solve_prepared(LinearConstraints& bc, const Eigen::VectorXd& full_rhs,
                                   double residual_tol = 1e-10);

    /// One-shot convenience: prepare() against bc, then solve_prepared()
    /// with the internally accumulated right-hand side.
    Eigen::VectorXd solve(LinearConstraints& bc, double residual_tol = 1e-10);

    const Stats& stats() const { return stats_; }

private:
    int n_;
    std::vector<Eigen::Triplet<double>> triplets_;
    Eigen::VectorXd rhs_;
    Stats stats_;

    Eigen::SparseMatrix<double> reduced_;
    std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> lu_;
};

}  // namespace fpflow

#endif  // FPFLOW_SPARSE_SYSTEM_HPP
