#ifndef FPFLOW_PORE_SCALE_HPP
#define FPFLOW_PORE_SCALE_HPP

/// Fully resolved flow solves in the perforated cavity and their ensemble
/// average over horizontally shifted obstacle lattices. The averaged
/// interface profiles are the reference data the homogenized models are
/// validated against.

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fpflow/csv_io.hpp"
#include "fpflow/field.hpp"
#include "fpflow/function_space.hpp"
#include "fpflow/trimesh.hpp"

namespace fpflow {

/// One resolved solve: viscous incompressible flow around every obstacle,
/// lid-driven at the top, open (zero normal stress) at the bottom.
struct PoreScaleProblem {
    double eps = 0.05;          ///< obstacle lattice period
    double d = 0.5;             ///< obstacle diameter in units of eps
    double shift = 0.0;         ///< horizontal lattice offset in units of eps
    double lid_velocity = 1.0;  ///< tangential velocity of the top boundary
    Rect bounds{0.0, 1.0, -0.5, 0.5};
    double h_porous = 0.01;  ///< target mesh size in the perforated half
    double h_free = 0.02;    ///< target mesh size in the open half
    int circle_segments = 16;
};

struct PoreScaleRun {
    double shift = 0.0;
    std::shared_ptr<const TriMesh> mesh;
    std::shared_ptr<const FunctionSpace> velocity_space;  ///< quadratic, 2 components
    std::shared_ptr<const FunctionSpace> pressure_space;  ///< linear, scalar
    Eigen::VectorXd velocity, pressure;
    double obstacle_noslip = 0.0;  ///< max |v| over obstacle boundary nodes
    double bottom_net_flux = 0.0;  ///< signed net outflow through the open bottom
    double solver_residual = 0.0;
    int n_dofs = 0;

    Field velocity_field() const { return Field(*velocity_space, velocity); }
    Field pressure_field() const { return Field(*pressure_space, pressure); }
};

PoreScaleRun solve_pore_scale(const PoreScaleProblem& problem);

/// Samples v1, v2 and p along a cross-section at `n` midpoint abscissae.
/// Points where the fields are undefined (inside an obstacle) are masked
/// with count 0; defined points carry count 1.
ProfileSet sample_fields(const Field& velocity, const Field& pressure, const CrossSection& section,
                         Rect bounds, int n);

/// Pointwise arithmetic mean of member profile sets sampled at identical
/// abscissae. Masked samples are excluded from the mean; the recorded
/// count is the number of contributing members. Members are summed in a
/// canonical order (sorted by the attached shift), which makes the result
/// bitwise independent of the input order.
ProfileSet average_profiles(const std::vector<std::pair<double, ProfileSet>>& members);

struct EnsembleMember {
    double shift = 0.0;
    int n_dofs = 0;
    double solver_residual = 0.0;
    double obstacle_noslip = 0.0;
    double bottom_net_flux = 0.0;
};

struct EnsembleConfig {
    double eps = 0.05;
    double d = 0.5;
    double lid_velocity = 1.0;
    int n_samples = 16;  ///< members at lattice shifts k/n_samples
    Rect bounds{0.0, 1.0, -0.5, 0.5};
    double h_porous = 0.01;
    double h_free = 0.02;
    int circle_segments = 16;
    int workers = 4;
    int samples_per_line = 400;
    std::vector<CrossSection> sections{{CrossSection::Axis::horizontal, 0.0},
                                       {CrossSection::Axis::vertical, 0.7}};
};

struct Ensemble {
    EnsembleConfig config;
    std::vector<EnsembleMember> members;
    /// member_profiles[k][j]: member k sampled along config.sections[j].
    std::vector<std::vector<ProfileSet>> member_profiles;
    /// mean_profiles[j]: ensemble mean along config.sections[j].
    std::vector<ProfileSet> mean_profiles;
    std::string manifest;  ///< plain-text run record (shifts, dofs, residuals)
};

/// Runs the members at shifts k/n_samples on a worker pool and reduces
/// their profiles deterministically. Any member failure aborts with the
/// failing shift in the message.
Ensemble ensemble_average(const EnsembleConfig& config);

}  // namespace fpflow

#endif  // FPFLOW_PORE_SCALE_HPP
