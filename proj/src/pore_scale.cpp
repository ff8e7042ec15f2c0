#include "fpflow/pore_scale.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <unordered_set>

#include "fpflow/assemble.hpp"
#include "fpflow/constraints.hpp"
#include "fpflow/sparse_system.hpp"

namespace fpflow {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

PoreScaleRun solve_pore_scale(const PoreScaleProblem& prob) {
    PoreScaleRun run;
    run.shift = prob.shift;
    run.mesh = std::make_shared<const TriMesh>(build_perforated_domain(
        prob.eps, prob.d, prob.shift, prob.bounds, prob.h_porous, prob.h_free,
        prob.circle_segments));
    run.velocity_space = std::make_shared<const FunctionSpace>(*run.mesh, 2, 2);
    run.pressure_space = std::make_shared<const FunctionSpace>(*run.mesh, 1, 1);
    const FunctionSpace& V = *run.velocity_space;
    const FunctionSpace& Q = *run.pressure_space;
    const int nv = V.n_dofs();
    run.n_dofs = nv + Q.n_dofs();

    SparseSystem sys(run.n_dofs);
    assemble_laplacian(sys, V, 1.0, 0);
    assemble_divergence_coupling(sys, V, Q, 0, nv, -1.0);

    // No slip on the side walls and every obstacle; the lid drives the top
    // (walls win at the corners); the bottom is open with zero normal
    // stress, which also pins the pressure gauge.
    LinearConstraints bc(run.n_dofs);
    std::unordered_set<int> fixed;
    for (const EdgeTag tag : {EdgeTag::left, EdgeTag::right, EdgeTag::obstacle})
        for (const int n : V.nodes_with_tag(tag)) fixed.insert(n);
    for (const int n : fixed) {
        bc.fix(V.dof(n, 0), 0.0);
        bc.fix(V.dof(n, 1), 0.0);
    }
    for (const int n : V.nodes_with_tag(EdgeTag::top)) {
        if (fixed.count(n)) continue;
        bc.fix(V.dof(n, 0), prob.lid_velocity);
        bc.fix(V.dof(n, 1), 0.0);
    }

    Eigen::VectorXd x;
    try {
        x = sys.solve(bc);
    } catch (const std::exception& e) {
        throw std::runtime_error("resolved solve at shift " + fmt(prob.shift) +
                                 " failed: " + e.what());
    }
    run.velocity = x.head(nv);
    run.pressure = x.tail(Q.n_dofs());
    run.solver_residual = sys.stats().residual;

    double noslip = 0.0;
    for (const int n : V.nodes_with_tag(EdgeTag::obstacle))
        noslip = std::max(noslip, std::hypot(run.velocity[V.dof(n, 0)],
                                             run.velocity[V.dof(n, 1)]));
    run.obstacle_noslip = noslip;
    run.bottom_net_flux = -run.velocity_field().integrate_edges(EdgeTag::bottom, 0, 1);
    return run;
}

ProfileSet sample_fields(const Field& velocity, const Field& pressure, const CrossSection& sec,
                         Rect bounds, int n) {
    if (n < 1) throw std::invalid_argument("sample_fields: need at least one sample point");
    ProfileSet set;
    set.section = sec;
    const bool horizontal = sec.axis == CrossSection::Axis::horizontal;
    const double lo = horizontal ? bounds.x_min : bounds.y_min;
    const double hi = horizontal ? bounds.x_max : bounds.y_max;
    std::vector<double> v1(n), v2(n), p(n);
    set.s.resize(n);
    set.count.resize(n);
    for (int i = 0; i < n; ++i) {
        const double s = lo + (i + 0.5) * (hi - lo) / n;
        set.s[i] = s;
        const Vec2 pt = horizontal ? Vec2{s, sec.coord} : Vec2{sec.coord, s};
        const auto a = velocity.try_eval(pt, 0);
        const auto b = velocity.try_eval(pt, 1);
        const auto c = pressure.try_eval(pt, 0);
        if (a && b && c) {
            v1[i] = *a;
            v2[i] = *b;
            p[i] = *c;
            set.count[i] = 1;
        } else {
            v1[i] = v2[i] = p[i] = 0.0;
            set.count[i] = 0;
        }
    }
    set.add("v1", std::move(v1));
    set.add("v2", std::move(v2));
    set.add("p", std::move(p));
    return set;
}

ProfileSet average_profiles(const std::vector<std::pair<double, ProfileSet>>& members) {
    if (members.empty()) throw std::invalid_argument("average_profiles: no members");
    std::vector<std::size_t> order(members.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return members[a].first < members[b].first;
    });

    const ProfileSet& first = members[order[0]].second;
    ProfileSet mean;
    mean.section = first.section;
    mean.s = first.s;
    mean.quantities = first.quantities;
    mean.values.assign(first.quantities.size(), std::vector<double>(first.s.size(), 0.0));
    mean.count.assign(first.s.size(), 0);

    for (const std::size_t idx : order) {
        const ProfileSet& m = members[idx].second;
        if (m.s.size() != mean.s.size() || m.quantities != mean.quantities ||
            m.section.axis != mean.section.axis ||
            std::abs(m.section.coord - mean.section.coord) > 1e-12)
            throw std::invalid_argument("average_profiles: members sampled differently");
        for (std::size_t i = 0; i < mean.s.size(); ++i) {
            if (std::abs(m.s[i] - mean.s[i]) > 1e-12)
                throw std::invalid_argument("average_profiles: members sampled differently");
            if (m.count[i] == 0) continue;
            for (std::size_t k = 0; k < mean.values.size(); ++k)
                mean.values[k][i] += m.values[k][i];
            ++mean.count[i];
        }
    }
    for (std::size_t i = 0; i < mean.s.size(); ++i)
        if (mean.count[i] > 0)
            for (auto& col : mean.values) col[i] /= mean.count[i];
    return mean;
}

Ensemble ensemble_average(const EnsembleConfig& cfg) {
    if (cfg.n_samples < 1)
        throw std::invalid_argument("ensemble: need at least one member");
    if (cfg.workers < 1) throw std::invalid_argument("ensemble: need at least one worker");

    Ensemble ens;
    ens.config = cfg;
    ens.members.resize(cfg.n_samples);
    ens.member_profiles.resize(cfg.n_samples);
    std::vector<std::string> errors(cfg.n_samples);

    std::atomic<int> next{0};
    auto work = [&]() {
        for (;;) {
            const int k = next.fetch_add(1);
            if (k >= cfg.n_samples) return;
            const double shift = static_cast<double>(k) / cfg.n_samples;
            try {
                PoreScaleProblem prob;
                prob.eps = cfg.eps;
                prob.d = cfg.d;
                prob.shift = shift;
                prob.lid_velocity = cfg.lid_velocity;
                prob.bounds = cfg.bounds;
                prob.h_porous = cfg.h_porous;
                prob.h_free = cfg.h_free;
                prob.circle_segments = cfg.circle_segments;
                const PoreScaleRun run = solve_pore_scale(prob);
                ens.members[k] = {run.shift, run.n_dofs, run.solver_residual,
                                  run.obstacle_noslip, run.bottom_net_flux};
                const Field v = run.velocity_field();
                const Field p = run.pressure_field();
                for (const CrossSection& sec : cfg.sections)
                    ens.member_profiles[k].push_back(
                        sample_fields(v, p, sec, cfg.bounds, cfg.samples_per_line));
            } catch (const std::exception& e) {
                errors[k] = e.what();
                return;
            }
        }
    };
    {
        std::vector<std::thread> pool;
        const int n_threads = std::min(cfg.workers, cfg.n_samples);
        pool.reserve(n_threads);
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    for (int k = 0; k < cfg.n_samples; ++k)
        if (!errors[k].empty())
            throw std::runtime_error("ensemble member at shift " +
                                     fmt(static_cast<double>(k) / cfg.n_samples) +
                                     " failed: " + errors[k]);

    for (std::size_t j = 0; j < cfg.sections.size(); ++j) {
        std::vector<std::pair<double, ProfileSet>> per_member;
        per_member.reserve(cfg.n_samples);
        for (int k = 0; k < cfg.n_samples; ++k)
            per_member.push_back({ens.members[k].shift, ens.member_profiles[k][j]});
        ens.mean_profiles.push_back(average_profiles(per_member));
    }

    std::ostringstream man;
    man << "{\n";
    man << "  \"eps\": " << fmt(cfg.eps) << ",\n";
    man << "  \"d\": " << fmt(cfg.d) << ",\n";
    man << "  \"n_samples\": " << cfg.n_samples << ",\n";
    man << "  \"lid_velocity\": " << fmt(cfg.lid_velocity) << ",\n";
    man << "  \"h_porous\": " << fmt(cfg.h_porous) << ",\n";
    man << "  \"h_free\": " << fmt(cfg.h_free) << ",\n";
    man << "  \"circle_segments\": " << cfg.circle_segments << ",\n";
    man << "  \"samples_per_line\": " << cfg.samples_per_line << ",\n";
    man << "  \"sections\": [";
    for (std::size_t j = 0; j < cfg.sections.size(); ++j)
        man << (j ? ", " : "") << "\"" << cfg.sections[j].label() << "\"";
    man << "],\n";
    man << "  \"members\": [\n";
    for (int k = 0; k < cfg.n_samples; ++k) {
        const EnsembleMember& m = ens.members[k];
        man << "    {\"shift\": " << fmt(m.shift) << ", \"n_dofs\": " << m.n_dofs
            << ", \"residual\": " << fmt(m.solver_residual)
            << ", \"obstacle_noslip\": " << fmt(m.obstacle_noslip)
            << ", \"bottom_net_flux\": " << fmt(m.bottom_net_flux) << "}"
            << (k + 1 < cfg.n_samples ? "," : "") << "\n";
    }
    man << "  ]\n}\n";
    ens.manifest = man.str();
    return ens;
}

}  // namespace fpflow
