#ifndef FPFLOW_EFFECTIVE_COEFFICIENTS_HPP
#define FPFLOW_EFFECTIVE_COEFFICIENTS_HPP

#include <array>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>

#include <Eigen/Dense>

#include "fpflow/field.hpp"
#include "fpflow/function_space.hpp"
#include "fpflow/sparse_system.hpp"
#include "fpflow/trimesh.hpp"

namespace fpflow {

/// Solutions of the two unit-cell flow problems (unit body force along
/// each axis, periodic, no-slip on the inclusion) and the permeability
/// tensor K_ij = integral over the fluid cell of velocity component i of
/// problem j.
struct CellProblemResult {
    std::shared_ptr<const TriMesh> mesh;
    std::shared_ptr<const FunctionSpace> velocity_space;  ///< quadratic, 2 components
    std::shared_ptr<const FunctionSpace> pressure_space;  ///< linear, scalar
    std::array<Eigen::VectorXd, 2> velocity;              ///< forcing along x1 / x2
    std::array<Eigen::VectorXd, 2> pressure;              ///< mean-zero
    Eigen::Matrix2d K = Eigen::Matrix2d::Zero();
};

/// Solves both unit-cell problems on the given periodic cell mesh.
/// Throws if the mesh carries no obstacle boundary (the permeability is
/// undefined for an empty cell).
CellProblemResult solve_cell_problems(TriMesh cell_mesh);

/// Stabilization/decay diagnostics of one stripe solve. All quantities are
/// also checked internally against their tolerances where the contract
/// demands it.
struct StripeDiagnostics {
    /// Velocity norm on the lowest porous cell relative to the whole stripe.
    double decay_ratio = 0.0;
    /// Variance of the horizontal velocity averages across y2 = 1, 1.5, 2
    /// (max over components).
    double stabilization_variance = 0.0;
    /// Largest deviation between a constant measured at y2 = +0 and the
    /// same average taken along y2 = 1.
    double trace_vs_level1 = 0.0;
    /// Squared L2 norm of the divergence defect projected onto the
    /// multiplier space (divergence-constrained solve only).
    double divergence_residual = -1.0;
    /// Mismatch between the direct and the volume-balance evaluation of the
    /// interface jump constant (divergence-constrained solve only).
    double compatibility = -1.0;
    /// Mean normal-gradient jump of the second velocity component across
    /// the interface (divergence-constrained solve only).
    double normal_gradient_jump = 0.0;
    /// Mean absolute normal-gradient jump of the first (tangential) velocity
    /// component across the interface (divergence-constrained solve only).
    /// Reported for information; it depends on the chosen divergence lifting
    /// and does not enter any downstream load.
    double tangential_gradient_jump = 0.0;
};

/// One boundary-layer stripe solve. The pressure vector is renormalized so
/// that its mean over the lowest porous cell vanishes (the far-field
/// pressure below the interface is the zero reference).
struct StripeSolution {
    std::string id;
    Eigen::VectorXd velocity;  ///< on the stripe velocity space
    Eigen::VectorXd pressure;  ///< on the stripe pressure space, renormalized
    /// Interface integral at +0 of the first velocity component
    /// (for the divergence-constrained problem: the jump constant itself).
    double vel_constant = 0.0;
    /// Interface integral at +0 of the renormalized pressure.
    double prs_constant = 0.0;
    StripeDiagnostics diag;
};

/// Shared discretization of the cut boundary-layer stripe: one velocity/
/// pressure operator and one factorization serve every stripe problem
/// (they differ only in loads and in the prescribed interface jumps).
///
/// Boundary conditions on the cut stripe: no slip at the bottom cut and on
/// all inclusions, periodicity in x1, and a natural (zero normal stress)
/// condition at the top cut, which pins the pressure level; constants are
/// read off after renormalizing the pressure to vanish in the deep porous
/// far field.
class StripeSolver {
public:
    explicit StripeSolver(TriMesh stripe_mesh);
    ~StripeSolver();
    StripeSolver(const StripeSolver&) = delete;
    StripeSolver& operator=(const StripeSolver&) = delete;

    const TriMesh& mesh() const { return *mesh_; }
    const FunctionSpace& velocity_space() const { return *V_; }
    const FunctionSpace& pressure_space() const { return *Q_; }
    int half_height() const { return m_; }

    /// Relative lowest-cell norm above which a solve reports the stripe as
    /// too short. Default 1e-6.
    void set_decay_tolerance(double tol) { decay_tol_ = tol; }

    /// Unit tangential stress jump across the interface; constants
    /// (slip and pressure-slip) are the +0 interface integrals.
    StripeSolution solve_t();

    /// Prescribed velocity and stress jumps built from the trace of cell
    /// problem j (1 or 2) on the top edge of the unit cell.
    StripeSolution solve_beta(const CellProblemResult& cell, int j);

    /// Divergence-constrained minimal-gradient-energy field: divergence
    /// prescribed from the tangential-jump solution and its slip constant,
    /// interface jump equal to the volume defect. The jump constant is
    /// returned in vel_constant.
    StripeSolution solve_zeta(const StripeSolution& t, double n1);

    /// Volume force built from the tangential-jump solution; ns is the
    /// stabilized pressure value subtracted above the interface so the
    /// force decays on both sides (pass the far-field plateau, not the
    /// interface trace, to keep the discrete force summable in height).
    StripeSolution solve_xi(const StripeSolution& t, double ns);

    /// Response to the interface stress sheet carrying the wall-normal
    /// gradient jump of the divergence-constrained field (the
    /// lifting-independent part of that field's weak Laplacian). The
    /// pressure constant it stabilizes to above the interface is the
    /// second-order pressure-slip contribution.
    StripeSolution solve_c(const StripeSolution& zeta);

private:
    struct EdgePair;  // matched interface edge with its two one-sided triangles

    LinearConstraints make_constraints(const std::function<Vec2(Vec2)>& jump) const;
    StripeSolution finish(const std::string& id, Eigen::VectorXd x, bool measure_constants);
    void check_decay(const std::string& id, StripeSolution& sol) const;
    double band_mean(const Eigen::VectorXd& prs) const;
    double level_average(const Eigen::VectorXd& coeffs, const FunctionSpace& S, double level,
                         int comp) const;
    const std::vector<EdgePair>& interface_edge_pairs();

    std::shared_ptr<const TriMesh> mesh_;
    std::shared_ptr<const FunctionSpace> V_;  ///< quadratic, 2 components
    std::shared_ptr<const FunctionSpace> Q_;  ///< linear, scalar
    std::unique_ptr<SparseSystem> sys_;
    std::unique_ptr<LinearConstraints> bc0_;  ///< continuous-interface constraint set
    std::unique_ptr<std::vector<EdgePair>> edge_pairs_;
    int nv_ = 0;
    int np_ = 0;
    int m_ = 0;
    double decay_tol_ = 1e-6;
};

/// Permeability entries and every interface constant, with the geometry
/// provenance they were computed from.
struct EffectiveCoefficients {
    double k11 = 0.0, k12 = 0.0, k21 = 0.0, k22 = 0.0;
    double N1 = 0.0, Ns = 0.0;
    double M1_1 = 0.0, M1_2 = 0.0, Mw_1 = 0.0, Mw_2 = 0.0;
    double W = 0.0;
    double L1 = 0.0, Leta = 0.0;
    double E1 = 0.0, Eb = 0.0;
    double d = 0.0;
    int m = 0;
    double h = 0.0;
    int circle_segments = 0;
    int version = 1;
};

/// Full pipeline products, kept for inspection and property checks.
struct CoefficientRun {
    EffectiveCoefficients coeffs;
    CellProblemResult cell;
    std::shared_ptr<StripeSolver> stripe;
    StripeSolution t, beta1, beta2, zeta, xi, c;
};

/// Runs the whole chain (cell problems, then every stripe problem) on
/// freshly built meshes. Any stage failure is reported with the stage name.
/// decay_tol is forwarded to the stripe solver.
CoefficientRun compute_all_detailed(double d, int m, double h, int circle_segments = 16,
                                    double decay_tol = 1e-6);
EffectiveCoefficients compute_all(double d, int m, double h, int circle_segments = 16,
                                  double decay_tol = 1e-6);

/// Plain-text key=value coefficient file (docs/formats.md). Writing is
/// deterministic: equal inputs give byte-identical files.
void write_coefficients(const EffectiveCoefficients& c, std::ostream& os);
EffectiveCoefficients read_coefficients(std::istream& is);

}  // namespace fpflow

#endif  // FPFLOW_EFFECTIVE_COEFFICIENTS_HPP
