#include "fpflow/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace fpflow {

namespace {

std::string fmt(double v, int precision = 4) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
    return buf;
}

std::ofstream open_artifact(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("pipeline: cannot write artifact '" + path + "'");
    return os;
}

}  // namespace

ProfileSet sample_macro(const MacroSolution& sol, const CrossSection& section, Rect bounds,
                        int n) {
    ProfileSet set;
    set.section = section;
    const bool horizontal = section.axis == CrossSection::Axis::horizontal;
    const double lo = horizontal ? bounds.x_min : bounds.y_min;
    const double hi = horizontal ? bounds.x_max : bounds.y_max;
    const Field vff = sol.ff_velocity(), pff = sol.ff_pressure();
    const Field vpm = sol.pm_velocity(), ppm = sol.pm_pressure();
    std::vector<double> v1(n), v2(n), p(n);
    set.s.resize(n);
    set.count.resize(n);
    for (int i = 0; i < n; ++i) {
        const double s = lo + (i + 0.5) * (hi - lo) / n;
        set.s[i] = s;
        const Vec2 pt = horizontal ? Vec2{s, section.coord} : Vec2{section.coord, s};
        const bool below = pt.y < 0.0;
        const Field& v = below ? vpm : vff;
        const Field& q = below ? ppm : pff;
        auto a = v.try_eval(pt, 0);
        auto b = v.try_eval(pt, 1);
        auto c = q.try_eval(pt, 0);
        if (!a || !b || !c) {  // the interface line itself: take the free-flow trace
            a = vff.try_eval_side(pt, 0, +1);
            b = vff.try_eval_side(pt, 1, +1);
            c = pff.try_eval_side(pt, 0, +1);
        }
        v1[i] = a ? *a : 0.0;
        v2[i] = b ? *b : 0.0;
        p[i] = c ? *c : 0.0;
        set.count[i] = (a && b && c) ? 1 : 0;
    }
    set.add("v1", std::move(v1));
    set.add("v2", std::move(v2));
    set.add("p", std::move(p));
    return set;
}

namespace {

void write_artifacts(const PipelineResult& R) {
    const std::string dir = R.config.out_dir;
    std::filesystem::create_directories(dir);
    {
        auto os = open_artifact(dir + "/config.txt");
        R.config.to_config().write(os);
    }
    {
        auto os = open_artifact(dir + "/coefficients.txt");
        write_coefficients(R.coeffs, os);
    }
    for (std::size_t i = 0; i < R.macro_profiles.size(); ++i)
        for (const ProfileSet& set : R.macro_profiles[i])
            write_profile_csv(dir + "/profile_" + to_string(R.condition_sets[i].kind) + "_" +
                                  set.section.label() + ".csv",
                              set);
    for (std::size_t k = 0; k < R.ensemble.member_profiles.size(); ++k) {
        char tag[32];
        std::snprintf(tag, sizeof(tag), "pore_member%02zu", k);
        for (const ProfileSet& set : R.ensemble.member_profiles[k])
            write_profile_csv(dir + "/profile_" + tag + "_" + set.section.label() + ".csv", set);
    }
    for (const ProfileSet& set : R.ensemble.mean_profiles)
        write_profile_csv(dir + "/profile_pore_mean_" + set.section.label() + ".csv", set);
    {
        auto os = open_artifact(dir + "/ensemble_manifest.txt");
        os << R.ensemble.manifest;
    }
    {
        auto os = open_artifact(dir + "/report.txt");
        os << R.report;
    }
}

std::string render_report(const PipelineResult& R) {
    std::ostringstream os;
    const EffectiveCoefficients& c = R.coeffs;
    os << "coupled-flow model comparison\n";
    os << "=============================\n\n";
    os << "microstructure: d=" << fmt(R.config.d) << ", eps=" << fmt(R.config.eps) << "\n";
    os << "effective coefficients (m=" << c.m << ", h=" << fmt(c.h) << ", " << c.circle_segments
       << " obstacle segments):\n";
    os << "  K11=" << fmt(c.k11, 6) << "  K12=" << fmt(c.k12, 3) << "  K21=" << fmt(c.k21, 3)
       << "  K22=" << fmt(c.k22, 6) << "\n";
    os << "  N1=" << fmt(c.N1, 6) << "  Ns=" << fmt(c.Ns, 3) << "  M1_1=" << fmt(c.M1_1, 6)
       << "  M1_2=" << fmt(c.M1_2, 3) << "\n";
    os << "  Mw_1=" << fmt(c.Mw_1, 3) << "  Mw_2=" << fmt(c.Mw_2, 6) << "  W=" << fmt(c.W, 6)
       << "\n";
    os << "  L1=" << fmt(c.L1, 6) << "  Leta=" << fmt(c.Leta, 6) << "  E1=" << fmt(c.E1, 3)
       << "  Eb=" << fmt(c.Eb, 6) << "  Leta+Eb+N1=" << fmt(c.Leta + c.Eb + c.N1, 6) << "\n\n";

    os << "resolved ensemble: " << R.ensemble.members.size() << " members";
    if (!R.ensemble.members.empty()) {
        double res = 0.0, noslip = 0.0, flux = 0.0;
        for (const auto& mem : R.ensemble.members) {
            res = std::max(res, mem.solver_residual);
            noslip = std::max(noslip, mem.obstacle_noslip);
            flux = std::max(flux, std::abs(mem.bottom_net_flux));
        }
        os << " (max solver residual " << fmt(res, 3) << ", max obstacle slip " << fmt(noslip, 3)
           << ", max |net outflow| " << fmt(flux, 3) << ")";
    }
    os << "\n";
    os << "interface velocity oscillation: TV(mean)=" << fmt(R.tv_mean_v1)
       << ", smallest member TV=" << fmt(R.tv_min_member_v1) << "\n\n";

    os << "model-vs-ensemble distances (relative L2 along each line):\n";
    char row[160];
    std::snprintf(row, sizeof(row), "  %-22s %12s %12s %12s\n", "line / quantity", "classical",
                  "generalized", "higher-order");
    os << row;
    auto table_row = [&](const char* name, double a, double b, double cc) {
        std::snprintf(row, sizeof(row), "  %-22s %12s %12s %12s\n", name, fmt(a).c_str(),
                      fmt(b).c_str(), fmt(cc).c_str());
        os << row;
    };
    const ModelScores &cl = R.scores[0], &gn = R.scores[1], &ho = R.scores[2];
    table_row("interface  v1", cl.v1_interface, gn.v1_interface, ho.v1_interface);
    table_row("interface  v2", cl.v2_interface, gn.v2_interface, ho.v2_interface);
    table_row("interface  p", cl.p_interface, gn.p_interface, ho.p_interface);
    table_row("vertical   v1", cl.v1_vertical, gn.v1_vertical, ho.v1_vertical);
    table_row("vertical   v2", cl.v2_vertical, gn.v2_vertical, ho.v2_vertical);
    table_row("vertical   p", cl.p_vertical, gn.p_vertical, ho.p_vertical);
    os << "  generalized vs higher-order vertical pressure: " << fmt(R.gen_vs_ho_p_vertical)
       << "\n\n";

    os << "coupled-solve diagnostics:\n";
    std::snprintf(row, sizeof(row), "  %-22s %12d %12d %12d\n", "dofs", cl.n_dofs, gn.n_dofs,
                  ho.n_dofs);
    os << row;
    table_row("flux mismatch", cl.flux_mismatch, gn.flux_mismatch, ho.flux_mismatch);
    table_row("net outflow", cl.net_flux, gn.net_flux, ho.net_flux);
    table_row("slip residual", cl.slip_residual, gn.slip_residual, ho.slip_residual);
    os << "\nchecks:\n";
    for (const auto& line : R.checks) os << "  " << line << "\n";
    os << "\nRESULT: " << (R.passed ? "PASS" : "FAIL") << "\n";
    return os.str();
}

}  // namespace

PipelineResult run_pipeline(const RunConfig& rc) {
    PipelineResult R;
    R.config = rc;

    R.coeffs = compute_all(rc.d, rc.m, rc.coeff_h, rc.coeff_circle_segments, rc.decay_tol);

    const double K_char = rc.eps * rc.eps * R.coeffs.k11;
    R.condition_sets = {make_classical(rc.alpha, K_char), make_generalized(R.coeffs, rc.eps),
                        make_higher_order(R.coeffs, rc.eps)};

    MacroProblem mp;
    mp.lid_velocity = rc.lid_velocity;
    mp.bottom_pressure = rc.bottom_pressure;
    mp.K << R.coeffs.k11, R.coeffs.k12, R.coeffs.k21, R.coeffs.k22;
    mp.eps = rc.eps;
    mp.h = rc.macro_h;
    const Rect full{mp.free_flow.x_min, mp.free_flow.x_max, mp.porous.y_min, mp.free_flow.y_max};
    const std::vector<CrossSection> sections{{CrossSection::Axis::horizontal, rc.section_x2},
                                             {CrossSection::Axis::vertical, rc.section_x1}};

    for (const ConditionSet& cs : R.condition_sets) {
        R.macro.push_back(solve_macro(mp, cs));
        std::vector<ProfileSet> profs;
        for (const CrossSection& sec : sections)
            profs.push_back(sample_macro(R.macro.back(), sec, full, rc.samples_per_line));
        R.macro_profiles.push_back(std::move(profs));
    }

    EnsembleConfig ec;
    ec.eps = rc.eps;
    ec.d = rc.d;
    ec.lid_velocity = rc.lid_velocity;
    ec.n_samples = rc.n_samples;
    ec.bounds = full;
    ec.h_porous = rc.pore_h_porous;
    ec.h_free = rc.pore_h_free;
    ec.circle_segments = rc.pore_circle_segments;
    ec.workers = rc.workers;
    ec.samples_per_line = rc.samples_per_line;
    ec.sections = sections;
    R.ensemble = ensemble_average(ec);

    for (std::size_t i = 0; i < R.condition_sets.size(); ++i) {
        ModelScores sc;
        sc.kind = R.condition_sets[i].kind;
        auto rel = [&](int section, const char* q) {
            return compare_profiles(R.macro_profiles[i][section].get(q),
                                    R.ensemble.mean_profiles[section].get(q))
                .rel_l2;
        };
        sc.v1_interface = rel(0, "v1");
        sc.v2_interface = rel(0, "v2");
        sc.p_interface = rel(0, "p");
        sc.v1_vertical = rel(1, "v1");
        sc.v2_vertical = rel(1, "v2");
        sc.p_vertical = rel(1, "p");
        sc.flux_mismatch = interface_flux_mismatch(R.macro[i], R.condition_sets[i]);
        sc.net_flux = net_boundary_flux(R.macro[i]);
        sc.slip_residual = slip_condition_residual(R.macro[i], R.condition_sets[i]);
        sc.n_dofs = R.macro[i].n_dofs;
        R.scores.push_back(sc);
    }
    R.gen_vs_ho_p_vertical =
        compare_profiles(R.macro_profiles[1][1].get("p"), R.macro_profiles[2][1].get("p")).rel_l2;

    R.tv_mean_v1 = total_variation(R.ensemble.mean_profiles[0].get("v1"));
    R.tv_min_member_v1 = std::numeric_limits<double>::infinity();
    for (const auto& member : R.ensemble.member_profiles)
        R.tv_min_member_v1 = std::min(R.tv_min_member_v1, total_variation(member[0].get("v1")));

    auto check = [&](bool ok, const std::string& text) {
        R.checks.push_back((ok ? "ok: " : "FAIL: ") + text);
        if (!ok) R.passed = false;
    };
    const ModelScores &cl = R.scores[0], &gn = R.scores[1], &ho = R.scores[2];
    check(ho.v2_interface <= cl.v2_interface,
          "higher-order normal interface velocity is at least as close to the resolved mean as "
          "classical (" +
              fmt(ho.v2_interface) + " vs " + fmt(cl.v2_interface) + ")");
    check(gn.v1_interface <= 0.05, "generalized interface slip velocity within 5% (" +
                                       fmt(gn.v1_interface) + ")");
    check(ho.v1_interface <= 0.05, "higher-order interface slip velocity within 5% (" +
                                       fmt(ho.v1_interface) + ")");
    check(R.gen_vs_ho_p_vertical <= 0.02,
          "generalized and higher-order vertical pressure profiles agree within 2% (" +
              fmt(R.gen_vs_ho_p_vertical) + ")");
    check(gn.p_vertical <= 0.10,
          "generalized vertical pressure within 10% of the resolved profile (" +
              fmt(gn.p_vertical) + ")");
    check(ho.p_vertical <= 0.10,
          "higher-order vertical pressure within 10% of the resolved profile (" +
              fmt(ho.p_vertical) + ")");
    check(cl.p_vertical > gn.p_vertical && cl.p_vertical > ho.p_vertical,
          "classical vertical pressure error exceeds both homogenized models (" +
              fmt(cl.p_vertical) + " vs " + fmt(gn.p_vertical) + ", " + fmt(ho.p_vertical) + ")");
    check(R.tv_mean_v1 <= R.tv_min_member_v1 + 1e-12,
          "ensemble averaging smooths the interface velocity (TV " + fmt(R.tv_mean_v1) + " vs " +
              fmt(R.tv_min_member_v1) + ")");
    for (const ModelScores& sc : R.scores)
        check(std::abs(sc.flux_mismatch) <= 1e-8 && std::abs(sc.net_flux) <= 1e-8,
              to_string(sc.kind) + " coupled solve conserves mass (flux mismatch " +
                  fmt(sc.flux_mismatch, 3) + ", net outflow " + fmt(sc.net_flux, 3) + ")");

    R.report = render_report(R);
    if (!rc.out_dir.empty()) write_artifacts(R);
    return R;
}

}  // namespace fpflow
