// Command-line front end: effective coefficients, manufactured-solution
// convergence, single coupled or resolved solves, profile comparison, and
// the full validation pipeline.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fpflow/config.hpp"
#include "fpflow/effective_coefficients.hpp"
#include "fpflow/macro_coupled.hpp"
#include "fpflow/mms.hpp"
#include "fpflow/pipeline.hpp"
#include "fpflow/pore_scale.hpp"

namespace {

fpflow::RunConfig load_run_config(const std::string& config_path,
                                  const std::vector<std::string>& overrides) {
    fpflow::Config cfg;
    if (!config_path.empty()) cfg = fpflow::Config::load(config_path);
    for (const std::string& assignment : overrides) cfg.set_override(assignment);
    return fpflow::RunConfig::from_config(cfg);
}

void add_config_options(CLI::App* cmd, std::string& config_path,
                        std::vector<std::string>& overrides) {
    cmd->add_option("--config", config_path, "key=value configuration file");
    cmd->add_option("--set", overrides, "override one configuration key (key=value; repeatable)");
}

std::vector<fpflow::CrossSection> run_sections(const fpflow::RunConfig& rc) {
    return {{fpflow::CrossSection::Axis::horizontal, rc.section_x2},
            {fpflow::CrossSection::Axis::vertical, rc.section_x1}};
}

}  // namespace

int main(int argc, char** argv) {
    using namespace fpflow;
    CLI::App app{"finite-element toolkit for coupled free-flow / porous-medium problems"};
    app.require_subcommand(1);
    int exit_code = 0;

    std::string config_path;
    std::vector<std::string> overrides;
    std::string out;

    auto* coeffs_cmd = app.add_subcommand(
        "coeffs", "compute the homogenized permeability and interface constants");
    add_config_options(coeffs_cmd, config_path, overrides);
    coeffs_cmd->add_option("--out", out, "also write the coefficient file to this path");
    coeffs_cmd->callback([&] {
        const RunConfig rc = load_run_config(config_path, overrides);
        const EffectiveCoefficients c =
            compute_all(rc.d, rc.m, rc.coeff_h, rc.coeff_circle_segments, rc.decay_tol);
        write_coefficients(c, std::cout);
        if (!out.empty()) {
            std::ofstream os(out);
            if (!os) throw std::runtime_error("cannot write '" + out + "'");
            write_coefficients(c, os);
        }
    });

    auto* mms_cmd =
        app.add_subcommand("mms", "manufactured-solution convergence study of both solvers");
    double mms_h0 = 0.15;
    int mms_levels = 3;
    mms_cmd->add_option("--h0", mms_h0, "coarsest mesh size");
    mms_cmd->add_option("--levels", mms_levels, "number of uniform refinements (max 3)");
    mms_cmd->callback([&] {
        const MmsReport stokes = stokes_mms(mms_h0, mms_levels);
        const MmsReport darcy = darcy_mms(mms_h0, mms_levels);
        std::printf("viscous solver:\n");
        for (const MmsLevel& L : stokes.levels)
            std::printf("  h=%-8.5g velocity L2 %.3e  velocity H1 %.3e  pressure L2 %.3e\n", L.h,
                        L.v_l2, L.v_h1, L.p_l2);
        std::printf("  rates: velocity L2 %.3f, velocity H1 %.3f, pressure L2 %.3f\n",
                    stokes.rate_v_l2, stokes.rate_v_h1, stokes.rate_p_l2);
        std::printf("porous solver:\n");
        for (const MmsLevel& L : darcy.levels)
            std::printf("  h=%-8.5g pressure L2 %.3e\n", L.h, L.p_l2);
        std::printf("  rate: pressure L2 %.3f\n", darcy.rate_p_l2);
        const bool ok = stokes.rate_v_l2 >= 2.64 && stokes.rate_v_l2 <= 3.36 &&
                        stokes.rate_v_h1 >= 1.76 && stokes.rate_v_h1 <= 2.24 &&
                        stokes.rate_p_l2 >= 1.7 && stokes.rate_p_l2 <= 3.4 &&
                        darcy.rate_p_l2 >= 2.8 && darcy.rate_p_l2 <= 3.2;
        std::printf("convergence orders %s\n", ok ? "as expected" : "OUT OF RANGE");
        if (!ok) exit_code = 1;
    });

    auto* macro_cmd =
        app.add_subcommand("macro", "solve the coupled two-domain problem for one model");
    std::string model = "higher_order";
    macro_cmd->add_option("--model", model, "classical | generalized | higher_order");
    add_config_options(macro_cmd, config_path, overrides);
    macro_cmd->add_option("--out", out, "write profile CSVs into this directory");
    macro_cmd->callback([&] {
        const RunConfig rc = load_run_config(config_path, overrides);
        const ConditionKind kind = condition_kind_from_string(model);
        const EffectiveCoefficients c =
            compute_all(rc.d, rc.m, rc.coeff_h, rc.coeff_circle_segments, rc.decay_tol);
        ConditionSet cs;
        if (kind == ConditionKind::classical)
            cs = make_classical(rc.alpha, rc.eps * rc.eps * c.k11);
        else if (kind == ConditionKind::generalized)
            cs = make_generalized(c, rc.eps);
        else
            cs = make_higher_order(c, rc.eps);
        MacroProblem mp;
        mp.lid_velocity = rc.lid_velocity;
        mp.bottom_pressure = rc.bottom_pressure;
        mp.K << c.k11, c.k12, c.k21, c.k22;
        mp.eps = rc.eps;
        mp.h = rc.macro_h;
        const MacroSolution sol = solve_macro(mp, cs);
        std::printf("%s model, %d dofs\n", to_string(kind).c_str(), sol.n_dofs);
        std::printf("  interface flux mismatch %.3e\n", interface_flux_mismatch(sol, cs));
        std::printf("  net outflow             %.3e\n", net_boundary_flux(sol));
        std::printf("  slip-condition residual %.3e\n", slip_condition_residual(sol, cs));
        if (!out.empty()) {
            std::filesystem::create_directories(out);
            const Rect full{mp.free_flow.x_min, mp.free_flow.x_max, mp.porous.y_min,
                            mp.free_flow.y_max};
            for (const CrossSection& sec : run_sections(rc))
                write_profile_csv(out + "/profile_" + to_string(kind) + "_" + sec.label() + ".csv",
                                  sample_macro(sol, sec, full, rc.samples_per_line));
            std::printf("profiles written to %s\n", out.c_str());
        }
    });

    auto* pore_cmd =
        app.add_subcommand("porescale", "one fully resolved solve at a given lattice shift");
    double shift = 0.0;
    pore_cmd->add_option("--shift", shift, "horizontal lattice offset in units of eps");
    add_config_options(pore_cmd, config_path, overrides);
    pore_cmd->add_option("--out", out, "write profile CSVs into this directory");
    pore_cmd->callback([&] {
        const RunConfig rc = load_run_config(config_path, overrides);
        PoreScaleProblem pp;
        pp.eps = rc.eps;
        pp.d = rc.d;
        pp.shift = shift;
        pp.lid_velocity = rc.lid_velocity;
        pp.h_porous = rc.pore_h_porous;
        pp.h_free = rc.pore_h_free;
        pp.circle_segments = rc.pore_circle_segments;
        const PoreScaleRun run = solve_pore_scale(pp);
        std::printf("resolved solve at shift %g: %d dofs\n", run.shift, run.n_dofs);
        std::printf("  solver residual   %.3e\n", run.solver_residual);
        std::printf("  max obstacle slip %.3e\n", run.obstacle_noslip);
        std::printf("  net outflow       %.3e\n", run.bottom_net_flux);
        if (!out.empty()) {
            std::filesystem::create_directories(out);
            for (const CrossSection& sec : run_sections(rc))
                write_profile_csv(
                    out + "/profile_pore_" + sec.label() + ".csv",
                    sample_fields(run.velocity_field(), run.pressure_field(), sec, pp.bounds,
                                  rc.samples_per_line));
            std::printf("profiles written to %s\n", out.c_str());
        }
    });

    auto* compare_cmd =
        app.add_subcommand("compare", "compare two profile CSV files quantity by quantity");
    std::string candidate_path, reference_path;
    compare_cmd->add_option("candidate", candidate_path)->required();
    compare_cmd->add_option("reference", reference_path)->required();
    compare_cmd->callback([&] {
        const ProfileSet a = read_profile_csv(candidate_path);
        const ProfileSet b = read_profile_csv(reference_path);
        for (const std::string& q : a.quantities) {
            bool shared = false;
            for (const std::string& r : b.quantities) shared |= (r == q);
            if (!shared) continue;
            const ProfileMetrics m = compare_profiles(a.get(q), b.get(q));
            std::printf("%-4s rel L2 %.6g   max |diff| %.6g   mean diff %+.6g   (%d samples)\n",
                        q.c_str(), m.rel_l2, m.max_abs, m.mean_signed, m.n_used);
        }
    });

    auto* pipeline_cmd = app.add_subcommand(
        "pipeline", "full comparison: coefficients, coupled solves, resolved ensemble, report");
    add_config_options(pipeline_cmd, config_path, overrides);
    pipeline_cmd->add_option("--out", out, "artifact directory (overrides output.dir)");
    pipeline_cmd->callback([&] {
        RunConfig rc = load_run_config(config_path, overrides);
        if (!out.empty()) rc.out_dir = out;
        const PipelineResult result = run_pipeline(rc);
        std::cout << result.report;
        if (!result.passed) exit_code = 1;
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return exit_code;
}
