#ifndef FPFLOW_PIPELINE_HPP
#define FPFLOW_PIPELINE_HPP

/// The full comparison pipeline: homogenized coefficients -> three coupled
/// macroscale solves -> resolved pore-scale ensemble -> profile comparison
/// and a rendered validation report.

#include <string>
#include <vector>

#include "fpflow/condition_set.hpp"
#include "fpflow/config.hpp"
#include "fpflow/csv_io.hpp"
#include "fpflow/effective_coefficients.hpp"
#include "fpflow/macro_coupled.hpp"
#include "fpflow/pore_scale.hpp"

namespace fpflow {

/// Samples the coupled macroscale fields along a cross-section with the
/// same abscissae, mask convention and column names as the pore-scale
/// sampler. Points take the velocity/pressure of the subdomain containing
/// them; points on the interface line itself are evaluated from the
/// free-flow side.
ProfileSet sample_macro(const MacroSolution& sol, const CrossSection& section, Rect bounds, int n);

/// Relative L2 distances of one interface model to the ensemble mean along
/// the two comparison lines, plus the model's own consistency diagnostics.
struct ModelScores {
    ConditionKind kind = ConditionKind::classical;
    // along the horizontal line (the interface)
    double v1_interface = 0.0;
    double v2_interface = 0.0;
    double p_interface = 0.0;
    // along the vertical line
    double v1_vertical = 0.0;
    double v2_vertical = 0.0;
    double p_vertical = 0.0;
    // diagnostics of the coupled solve itself
    double flux_mismatch = 0.0;
    double net_flux = 0.0;
    double slip_residual = 0.0;
    int n_dofs = 0;
};

/// Everything one full comparison run produces.
struct PipelineResult {
    RunConfig config;
    EffectiveCoefficients coeffs;
    /// Classical, generalized, higher_order — in this order everywhere.
    std::vector<ConditionSet> condition_sets;
    std::vector<MacroSolution> macro;
    /// macro_profiles[model][section]; sections are the horizontal line at
    /// config.section_x2 then the vertical line at config.section_x1.
    std::vector<std::vector<ProfileSet>> macro_profiles;
    Ensemble ensemble;
    std::vector<ModelScores> scores;
    /// Direct distance between the generalized and higher-order pressure
    /// profiles along the vertical line.
    double gen_vs_ho_p_vertical = 0.0;
    /// Oscillation of the interface tangential velocity: ensemble mean vs
    /// the smallest single member.
    double tv_mean_v1 = 0.0;
    double tv_min_member_v1 = 0.0;
    /// Deterministic "ok:"/"FAIL:" lines of the built-in plausibility
    /// checks; `passed` is their conjunction.
    std::vector<std::string> checks;
    bool passed = true;
    std::string report;  ///< rendered plain-text report
};

/// Runs the whole chain on freshly built meshes. Artifacts (effective
/// configuration, coefficient file, one profile CSV per model and section,
/// per-member and mean pore profiles, ensemble manifest, report) are
/// written into config.out_dir unless it is empty. Equal configurations
/// produce byte-identical artifacts.
PipelineResult run_pipeline(const RunConfig& config);

}  // namespace fpflow

#endif  // FPFLOW_PIPELINE_HPP
