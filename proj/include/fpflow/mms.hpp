#ifndef FPFLOW_MMS_HPP
#define FPFLOW_MMS_HPP

/// Manufactured-solution convergence studies for the viscous-flow and
/// porous-pressure discretizations: solve with an analytically known
/// solution imposed through body forces and boundary data, then report
/// errors and observed orders over a refinement sequence.

#include <vector>

namespace fpflow {

struct MmsLevel {
    double h = 0.0;     ///< representative mesh size of the level
    double v_l2 = 0.0;  ///< velocity L2 error (0 for scalar studies)
    double v_h1 = 0.0;  ///< velocity H1-seminorm error (0 for scalar studies)
    double p_l2 = 0.0;  ///< pressure L2 error
};

struct MmsReport {
    std::vector<MmsLevel> levels;  ///< coarse to fine, mesh size halving
    /// Observed orders from the finest level pair (log2 of the error ratio).
    double rate_v_l2 = 0.0;
    double rate_v_h1 = 0.0;
    double rate_p_l2 = 0.0;
};

/// Mixed velocity-pressure solve on the unit square with an exactly
/// divergence-free polynomial-trigonometric field, full Dirichlet velocity
/// data and a zero-mean pressure gauge. Expected orders: velocity L2 -> 3,
/// velocity H1 -> 2, pressure L2 -> 2 (often superconvergent toward 3 on
/// nested uniform refinements).
MmsReport stokes_mms(double h0 = 0.15, int n_levels = 3);

/// Scalar diffusion solve with a full anisotropic coefficient tensor,
/// quadratic elements and Dirichlet data from the exact solution.
/// Expected order: pressure L2 -> 3.
MmsReport darcy_mms(double h0 = 0.15, int n_levels = 3);

}  // namespace fpflow

#endif  // FPFLOW_MMS_HPP
