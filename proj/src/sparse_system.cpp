#include "fpflow/sparse_system.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/SparseLU>

namespace fpflow {

SparseSystem::SparseSystem(int n_dofs) : n_(n_dofs), rhs_(Eigen::VectorXd::Zero(n_dofs)) {}

SparseSystem::~SparseSystem() = default;

void SparseSystem::add(int i, int j, double v) {
    if (lu_) throw std::logic_error("sparse system: add after prepare");
    if (v != 0.0) triplets_.emplace_back(i, j, v);
}

void SparseSystem::add_rhs(int i, double v) { rhs_[i] += v; }

Eigen::SparseMatrix<double> SparseSystem::matrix() const {
    Eigen::SparseMatrix<double> A(n_, n_);
    A.setFromTriplets(triplets_.begin(), triplets_.end());
    A.makeCompressed();
    return A;
}

Eigen::VectorXd SparseSystem::take_rhs() {
    Eigen::VectorXd out = rhs_;
    rhs_.setZero();
    return out;
}

void SparseSystem::prepare(LinearConstraints& bc) {
    if (bc.n_full() != n_) throw std::invalid_argument("sparse system: constraint size mismatch");
    bc.finalize();
    const int nr = bc.n_reduced();
    if (nr <= 0) throw std::runtime_error("sparse system: no free dofs remain");

    std::vector<Eigen::Triplet<double>> reduced;
    reduced.reserve(triplets_.size());
    for (const auto& t : triplets_) {
        const int ri = bc.reduced_index(t.row());
        if (ri < 0) continue;  // row of a fixed class: equation dropped
        const int rj = bc.reduced_index(t.col());
        if (rj >= 0) reduced.emplace_back(ri, rj, t.value());
    }
    reduced_.resize(nr, nr);
    reduced_.setFromTriplets(reduced.begin(), reduced.end());
    reduced_.makeCompressed();

    lu_ = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
    lu_->analyzePattern(reduced_);
    lu_->factorize(reduced_);
    if (lu_->info() != Eigen::Success) {
        const std::string msg = lu_->lastErrorMessage();
        lu_.reset();
        throw std::runtime_error(
            "sparse system: LU factorization failed (singular or ill-posed system): " + msg);
    }
    stats_ = {n_, nr, -1.0};
}

Eigen::VectorXd SparseSystem::solve_prepared(LinearConstraints& bc,
                                             const Eigen::VectorXd& full_rhs,
                                             double residual_tol) {
    if (!lu_) throw std::logic_error("sparse system: solve_prepared before prepare");
    if (bc.n_full() != n_ || full_rhs.size() != n_)
        throw std::invalid_argument("sparse system: size mismatch");
    const int nr = bc.n_reduced();

    Eigen::VectorXd b = Eigen::VectorXd::Zero(nr);
    for (int i = 0; i < n_; ++i) {
        const int ri = bc.reduced_index(i);
        if (ri >= 0) b[ri] += full_rhs[i];
    }
    // Inhomogeneous constraint parts: a column j contributes A_ij * c_j to
    // the right-hand side, where c_j is the fixed value of j, or its tie
    // offset relative to its representative.
    for (const auto& t : triplets_) {
        const int ri = bc.reduced_index(t.row());
        if (ri < 0) continue;
        const int rj = bc.reduced_index(t.col());
        if (rj < 0) {
            b[ri] -= t.value() * bc.fixed_value(t.col());
        } else {
            const double off = bc.offset(t.col());
            if (off != 0.0) b[ri] -= t.value() * off;
        }
    }

    Eigen::VectorXd xr = lu_->solve(b);
    const double residual = (reduced_ * xr - b).norm() / std::max(1.0, b.norm());
    stats_.residual = residual;
    if (!(residual <= residual_tol))
        throw std::runtime_error("sparse system: residual " + std::to_string(residual) +
                                 " exceeds tolerance");

    Eigen::VectorXd x(n_);
    for (int i = 0; i < n_; ++i) {
        const int ri = bc.reduced_index(i);
        x[i] = ri >= 0 ? xr[ri] + bc.offset(i) : bc.fixed_value(i);
    }
    return x;
}

Eigen::VectorXd SparseSystem::solve(LinearConstraints& bc, double residual_tol) {
    if (!lu_) prepare(bc);
    return solve_prepared(bc, rhs_, residual_tol);
}

}  // namespace fpflow
