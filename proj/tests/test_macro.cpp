// Coupled two-domain solver tests: trivial equilibria reproduced exactly,
// the Darcy-velocity projection on closed-form pressures, conservation
// diagnostics at machine precision, the reduction of the higher-order
// condition set to the generalized one, mirror symmetry of the cavity
// solution, interface-residual decay and self-convergence under
// refinement, and the input-validation branches.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <memory>

#include "doctest.h"
#include "fpflow/macro_coupled.hpp"
#include "fpflow/pipeline.hpp"

using namespace fpflow;

namespace {

// Coefficients of the d=0.5 microstructure at production resolution,
// frozen so this suite is independent of the coefficient chain. The
// constants that vanish by symmetry are set to their limits.
EffectiveCoefficients reference_coefficients() {
    EffectiveCoefficients c;
    c.k11 = 1.99403146e-2;
    c.k22 = 1.99403146e-2;
    c.k12 = 0.0;
    c.k21 = 0.0;
    c.N1 = -3.040031e-1;
    c.M1_1 = -4.77158e-2;
    c.Mw_2 = 2.57346e-2;
    c.W = 4.77231e-2;
    c.Eb = 3.03945e-1;
    c.Leta = 4.67697e-3;
    c.d = 0.5;
    c.m = 4;
    c.h = 0.05;
    c.circle_segments = 63;
    return c;
}

MacroProblem cavity_problem(double h) {
    const EffectiveCoefficients c = reference_coefficients();
    MacroProblem mp;
    mp.K << c.k11, c.k12, c.k21, c.k22;
    mp.eps = 0.05;
    mp.h = h;
    return mp;
}

std::vector<ConditionSet> all_condition_sets() {
    const EffectiveCoefficients c = reference_coefficients();
    const double eps = 0.05;
    return {make_classical(1.0, eps * eps * c.k11), make_generalized(c, eps),
            make_higher_order(c, eps)};
}

}  // namespace

TEST_CASE("zero boundary data produces the zero solution") {
    MacroProblem mp = cavity_problem(1.0 / 8.0);
    mp.lid_velocity = 0.0;
    mp.bottom_pressure = 0.0;
    for (const ConditionSet& cs : all_condition_sets()) {
        const MacroSolution sol = solve_macro(mp, cs);
        CHECK(sol.vff.lpNorm<Eigen::Infinity>() <= 1e-12);
        CHECK(sol.pff.lpNorm<Eigen::Infinity>() <= 1e-12);
        CHECK(sol.ppm.lpNorm<Eigen::Infinity>() <= 1e-12);
        CHECK(sol.vpm.lpNorm<Eigen::Infinity>() <= 1e-12);
    }
}

TEST_CASE("a closed cavity at rest carries the prescribed constant pressure") {
    MacroProblem mp = cavity_problem(1.0 / 8.0);
    mp.lid_velocity = 0.0;
    mp.bottom_pressure = 0.3;
    for (const ConditionSet& cs : all_condition_sets()) {
        const MacroSolution sol = solve_macro(mp, cs);
        CHECK(sol.vff.lpNorm<Eigen::Infinity>() <= 1e-12);
        CHECK(sol.vpm.lpNorm<Eigen::Infinity>() <= 1e-12);
        CHECK((sol.pff.array() - 0.3).abs().maxCoeff() <= 1e-11);
        CHECK((sol.ppm.array() - 0.3).abs().maxCoeff() <= 1e-11);
    }
}

TEST_CASE("Darcy velocity projection reproduces closed-form pressure gradients") {
    const TriMesh mesh = build_rectangle({0.0, 1.0, -0.5, 0.0}, 1.0 / 8.0);
    const FunctionSpace P(mesh, 2, 1);
    const FunctionSpace V(mesh, 2, 2);
    Eigen::Matrix2d K_eps;
    K_eps << 2e-3, 0.0, 0.0, 1e-3;

    Eigen::VectorXd zero = Eigen::VectorXd::Zero(P.n_dofs());
    CHECK(darcy_velocity(P, zero, K_eps, V).lpNorm<Eigen::Infinity>() <= 1e-14);

    Eigen::VectorXd linear(P.n_dofs());
    for (int node = 0; node < P.n_nodes(); ++node)
        linear[P.dof(node, 0)] = 2.0 - 3.0 * P.node_position(node).y;
    const Eigen::VectorXd v = darcy_velocity(P, linear, K_eps, V);
    // -K grad(2 - 3 y) = (0, 3e-3), a constant the projection captures exactly
    for (int node = 0; node < V.n_nodes(); ++node) {
        CHECK(std::abs(v[V.dof(node, 0)]) <= 1e-14);
        CHECK(std::abs(v[V.dof(node, 1)] - 3e-3) <= 1e-14);
    }

    const TriMesh other = build_rectangle({0.0, 1.0, -0.5, 0.0}, 1.0 / 8.0);
    const FunctionSpace V_other(other, 2, 2);
    CHECK_THROWS_AS(darcy_velocity(P, linear, K_eps, V_other), std::invalid_argument);
    CHECK_THROWS_AS(darcy_velocity(P, zero.head(10).eval(), K_eps, V), std::invalid_argument);
}

TEST_CASE("lid and wall conditions are imposed exactly; the cavity conserves mass") {
    const MacroProblem mp = cavity_problem(1.0 / 32.0);
    const std::vector<ConditionSet> sets = all_condition_sets();
    for (const ConditionSet& cs : sets) {
        const MacroSolution sol = solve_macro(mp, cs);
        const FunctionSpace& V = *sol.velocity_space;

        double wall_worst = 0.0;
        for (EdgeTag tag : {EdgeTag::left, EdgeTag::right})
            for (int node : V.nodes_with_tag(tag))
                for (int comp = 0; comp < 2; ++comp)
                    wall_worst = std::max(wall_worst, std::abs(sol.vff[V.dof(node, comp)]));
        CHECK(wall_worst == 0.0);

        double lid_worst = 0.0;
        bool lid_seen = false;
        for (int node : V.nodes_with_tag(EdgeTag::top)) {
            const double x = V.node_position(node).x;
            if (x <= 0.0 || x >= 1.0) continue;  // the corners belong to the walls
            lid_seen = true;
            lid_worst = std::max(lid_worst, std::abs(sol.vff[V.dof(node, 0)] - mp.lid_velocity));
            lid_worst = std::max(lid_worst, std::abs(sol.vff[V.dof(node, 1)]));
        }
        CHECK(lid_seen);
        CHECK(lid_worst == 0.0);

        // variationally consistent flux balances across and out of the domain
        CHECK(std::abs(interface_flux_mismatch(sol, cs)) <= 1e-10);
        CHECK(std::abs(net_boundary_flux(sol)) <= 1e-10);
    }
}

TEST_CASE("higher-order conditions with vanishing corrections reduce to the generalized set") {
    EffectiveCoefficients c = reference_coefficients();
    c.Ns = 0.0;
    c.M1_2 = 0.0;   // shared by both sets
    c.W = 0.0;      // wipe every higher-order correction term
    c.Mw_2 = 0.0;
    c.Eb = -c.N1 - c.Leta;  // combined pressure-slip constant Leta + Eb + N1 = 0
    const double eps = 0.05;
    const MacroProblem mp = cavity_problem(1.0 / 8.0);

    const MacroAssembly gen = assemble_coupled(mp, make_generalized(c, eps));
    const MacroAssembly ho = assemble_coupled(mp, make_higher_order(c, eps));
    REQUIRE(gen.system->size() == ho.system->size());

    const Eigen::SparseMatrix<double> diff = gen.system->matrix() - ho.system->matrix();
    double worst = 0.0;
    for (int k = 0; k < diff.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(diff, k); it; ++it)
            worst = std::max(worst, std::abs(it.value()));
    CHECK(worst <= 1e-12);
    CHECK((gen.system->rhs() - ho.system->rhs()).lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("cavity solution has the mirror symmetry of the continuous problem") {
    const MacroProblem mp = cavity_problem(1.0 / 32.0);
    const MacroSolution sol = solve_macro(mp, all_condition_sets()[2]);
    const Field p = sol.pm_pressure();
    const Field v = sol.ff_velocity();

    // porous pressure is odd about x = 1/2
    double p_odd = 0.0, p_scale = 0.0;
    for (double x = 0.11; x < 0.90; x += 0.06)
        for (double y = -0.45; y < -0.02; y += 0.05) {
            const auto a = p.try_eval({x, y}), b = p.try_eval({1.0 - x, y});
            REQUIRE(a);
            REQUIRE(b);
            p_odd = std::max(p_odd, std::abs(*a + *b));
            p_scale = std::max(p_scale, std::abs(*a));
        }
    CHECK(p_odd <= 2e-3 * p_scale);

    // free-flow velocity away from the lid corners: v1 even, v2 odd
    double v1_even = 0.0, v2_odd = 0.0, v1_wrong = 0.0;
    for (double x = 0.11; x < 0.90; x += 0.06)
        for (double y = 0.05; y < 0.31; y += 0.05) {
            const auto a1 = v.try_eval({x, y}, 0), b1 = v.try_eval({1.0 - x, y}, 0);
            const auto a2 = v.try_eval({x, y}, 1), b2 = v.try_eval({1.0 - x, y}, 1);
            REQUIRE((a1 && b1 && a2 && b2));
            v1_even = std::max(v1_even, std::abs(*a1 - *b1));
            v1_wrong = std::max(v1_wrong, std::abs(*a1 + *b1));
            v2_odd = std::max(v2_odd, std::abs(*a2 + *b2));
        }
    CHECK(v1_even <= 5e-3);
    CHECK(v2_odd <= 5e-3);
    CHECK(v1_wrong >= 100.0 * v1_even);  // the opposite parity grossly fails

    // the sampled interface profile inherits the symmetry
    const ProfileSet line =
        sample_macro(sol, {CrossSection::Axis::horizontal, 0.0}, {0.0, 1.0, -0.5, 0.5}, 200);
    const Profile v1 = line.get("v1"), v2 = line.get("v2"), pr = line.get("p");
    double l1 = 0.0, l2 = 0.0, lp = 0.0;
    for (int i = 0; i < 100; ++i) {
        const int j = 199 - i;
        l1 = std::max(l1, std::abs(v1.value[i] - v1.value[j]));
        l2 = std::max(l2, std::abs(v2.value[i] + v2.value[j]));
        lp = std::max(lp, std::abs(pr.value[i] + pr.value[j]));
    }
    CHECK(l1 <= 1e-3);
    CHECK(l2 <= 1e-3);
    CHECK(lp <= 0.1);
}

TEST_CASE("interface residual and profiles converge under refinement") {
    const CrossSection sec{CrossSection::Axis::horizontal, 0.0};
    const Rect full{0.0, 1.0, -0.5, 0.5};
    for (const ConditionSet& cs : all_condition_sets()) {
        double slip[3];
        ProfileSet prof[3];
        int level = 0;
        for (double h : {1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0}) {
            const MacroSolution sol = solve_macro(cavity_problem(h), cs);
            slip[level] = slip_condition_residual(sol, cs);
            prof[level] = sample_macro(sol, sec, full, 200);
            ++level;
        }
        // the solved fields satisfy the imposed slip condition better and
        // better: the residual drops by at least x0.6 per halving
        CHECK(slip[1] <= 0.6 * slip[0]);
        CHECK(slip[2] <= 0.6 * slip[1]);
        // successive interface profiles approach the finest one
        const double d_coarse = compare_profiles(prof[0].get("v1"), prof[2].get("v1")).rel_l2;
        const double d_mid = compare_profiles(prof[1].get("v1"), prof[2].get("v1")).rel_l2;
        CHECK(d_mid <= 0.6 * d_coarse);
    }
}

TEST_CASE("invalid coupled problems and condition sets are rejected") {
    EffectiveCoefficients c = reference_coefficients();
    CHECK_THROWS_AS(make_classical(0.0, 1e-5), std::invalid_argument);
    CHECK_THROWS_AS(make_classical(1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(make_generalized(c, 0.0), std::invalid_argument);
    c.N1 = 1e-12;  // the higher-order formulation divides by the slip constant
    CHECK_THROWS_AS(make_higher_order(c, 0.05), std::invalid_argument);

    MacroProblem gap = cavity_problem(1.0 / 8.0);
    gap.porous = Rect{0.0, 1.0, -0.5, -0.1};  // rectangles no longer share an edge
    CHECK_THROWS_AS(assemble_coupled(gap, all_condition_sets()[0]), std::invalid_argument);
    MacroProblem offset = cavity_problem(1.0 / 8.0);
    offset.porous = Rect{0.2, 1.2, -0.5, 0.0};  // horizontally shifted
    CHECK_THROWS_AS(assemble_coupled(offset, all_condition_sets()[1]), std::invalid_argument);
}
