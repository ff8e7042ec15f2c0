#ifndef FPFLOW_MACRO_COUPLED_HPP
#define FPFLOW_MACRO_COUPLED_HPP

#include <memory>

#include <Eigen/Dense>

#include "fpflow/condition_set.hpp"
#include "fpflow/field.hpp"
#include "fpflow/function_space.hpp"
#include "fpflow/sparse_system.hpp"
#include "fpflow/trimesh.hpp"

namespace fpflow {

/// Two-domain macroscale problem: viscous free flow in an upper rectangle,
/// Darcy flow in a lower rectangle, coupled across the shared horizontal
/// edge. Exterior data is the lid-driven cavity configuration: a tangential
/// lid on top of the free-flow region, no slip on its lateral walls, a
/// prescribed pressure on the porous bottom and no flow through the porous
/// lateral walls.
struct MacroProblem {
    Rect free_flow{0.0, 1.0, 0.0, 0.5};
    Rect porous{0.0, 1.0, -0.5, 0.0};
    double lid_velocity = 1.0;    ///< (lid_velocity, 0) on the top edge
    double bottom_pressure = 0.0; ///< Dirichlet pressure on the porous bottom
    /// Permeability of the porous matrix per unit cell; the macroscale
    /// model uses the scaled tensor eps^2 * K.
    Eigen::Matrix2d K = Eigen::Matrix2d::Identity();
    double eps = 0.05;
    double h = 1.0 / 64.0;        ///< target mesh size for both rectangles
};

/// Monolithic discrete operator of the coupled problem. Velocity is a
/// quadratic vector space and pressure a linear scalar space on the
/// free-flow mesh; the porous pressure is a quadratic scalar space on the
/// porous mesh (its interface conditions consume first derivatives of the
/// porous pressure, which quadratic traces deliver at full order). The
/// block layout is [velocity | free-flow pressure | porous pressure].
struct MacroAssembly {
    std::shared_ptr<const TriMesh> ff_mesh, pm_mesh;
    std::shared_ptr<const FunctionSpace> velocity_space;     ///< quadratic, 2 comps
    std::shared_ptr<const FunctionSpace> ff_pressure_space;  ///< linear, scalar
    std::shared_ptr<const FunctionSpace> pm_pressure_space;  ///< quadratic, scalar
    std::unique_ptr<SparseSystem> system;
    std::unique_ptr<LinearConstraints> bc;
    int offset_v = 0;
    int offset_pff = 0;
    int offset_ppm = 0;
    Eigen::Matrix2d K_eps = Eigen::Matrix2d::Zero();
};

/// Assembles the coupled system for one condition set.
///
/// The viscous weak form keeps its interface boundary integral and replaces
/// the traction by the selected conditions: the normal stress by the
/// pressure-balance condition and the shear by the slip condition solved
/// for the wall-normal velocity derivative (a Robin term). The Darcy weak
/// form replaces its interface flux by the mass condition. Tangential
/// derivatives of interface traces are assembled from the trace's own shape
/// function derivatives; the wall-normal porous pressure derivative is the
/// one-sided gradient of the quadratic porous pressure.
///
/// Throws std::invalid_argument when the two rectangles do not share the
/// interface edge, when the meshed interface traces do not match, or when a
/// higher-order set carries a numerically zero slip constant.
MacroAssembly assemble_coupled(const MacroProblem& problem, const ConditionSet& conditions);

/// Solved coupled fields, split back into their subdomains.
struct MacroSolution {
    std::shared_ptr<const TriMesh> ff_mesh, pm_mesh;
    std::shared_ptr<const FunctionSpace> velocity_space;
    std::shared_ptr<const FunctionSpace> ff_pressure_space;
    std::shared_ptr<const FunctionSpace> pm_pressure_space;
    std::shared_ptr<const FunctionSpace> pm_velocity_space;  ///< quadratic, 2 comps

    Eigen::VectorXd vff;  ///< free-flow velocity
    Eigen::VectorXd pff;  ///< free-flow pressure
    Eigen::VectorXd ppm;  ///< porous pressure
    Eigen::VectorXd vpm;  ///< Darcy velocity -K_eps grad(ppm), projected

    Eigen::Matrix2d K_eps = Eigen::Matrix2d::Zero();
    ConditionKind kind = ConditionKind::classical;
    int n_dofs = 0;

    Field ff_velocity() const { return Field(*velocity_space, vff); }
    Field ff_pressure() const { return Field(*ff_pressure_space, pff); }
    Field pm_pressure() const { return Field(*pm_pressure_space, ppm); }
    Field pm_velocity() const { return Field(*pm_velocity_space, vpm); }
};

/// Assembles and solves the coupled problem, then derives the Darcy
/// velocity. Solver failures propagate with the condition-set name.
MacroSolution solve_macro(const MacroProblem& problem, const ConditionSet& conditions);

/// L2 projection of -K_eps grad(p) onto a continuous vector space over the
/// same mesh (for sampling the seepage velocity). `velocity_out` must live
/// on the mesh of `pressure_space`.
Eigen::VectorXd darcy_velocity(const FunctionSpace& pressure_space, const Eigen::VectorXd& p,
                               const Eigen::Matrix2d& K_eps, const FunctionSpace& velocity_out);

/// Discrete flux balance of the coupling: integral over the interface of
/// the normal Darcy flux -K_eps grad(ppm) . n minus the integral of the
/// right side of the mass condition (the free-flow normal velocity plus,
/// for the higher-order set, its tangential-derivative correction).
double interface_flux_mismatch(const MacroSolution& sol, const ConditionSet& conditions);

/// Relative L2 residual, along the interface, of the tangential slip
/// condition evaluated on the solved fields (one-sided shear from the
/// free-flow side, one-sided pressure gradient from the porous side).
/// Normalized by the L2 norm of the tangential velocity trace.
double slip_condition_residual(const MacroSolution& sol, const ConditionSet& conditions);

/// Signed net outflow through the open porous bottom, computed as the
/// variationally consistent boundary flux of the Darcy block. The closed
/// cavity conserves mass, so this should vanish to solver accuracy.
double net_boundary_flux(const MacroSolution& sol);

}  // namespace fpflow

#endif  // FPFLOW_MACRO_COUPLED_HPP
