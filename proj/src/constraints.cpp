#include "fpflow/constraints.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fpflow {

namespace {
constexpr double kOffsetTol = 1e-12;

bool values_agree(double a, double b) {
    return std::abs(a - b) <= kOffsetTol * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}
}  // namespace

LinearConstraints::LinearConstraints(int n_dofs) : parent_(n_dofs), shift_(n_dofs, 0.0) {
    std::iota(parent_.begin(), parent_.end(), 0);
}

int LinearConstraints::find(int dof) {
    int root = dof;
    path_.clear();
    while (parent_[root] != root) {
        path_.push_back(root);
        root = parent_[root];
    }
    // Compress the path, accumulating offsets from the root outward: the
    // last path entry points directly at the root already.
    double acc = 0.0;
    for (int i = static_cast<int>(path_.size()) - 1; i >= 0; --i) {
        const int v = path_[i];
        acc += shift_[v];
        parent_[v] = root;
        shift_[v] = acc;
    }
    return root;
}

void LinearConstraints::fix(int dof, double value) {
    if (finalized_) throw std::logic_error("constraints: fix after finalize");
    const int r = find(dof);
    const double root_value = value - shift_[dof];  // u_dof = u_root + shift
    auto it = fixed_.find(r);
    if (it != fixed_.end()) {
        if (!values_agree(it->second, root_value))
            throw std::runtime_error("constraints: conflicting fixed values on one dof class");
        return;
    }
    fixed_.emplace(r, root_value);
}

void LinearConstraints::tie(int a, int b, double delta) {
    if (finalized_) throw std::logic_error("constraints: tie after finalize");
    int ra = find(a);
    const double sa = shift_[a];  // u_a = u_ra + sa
    int rb = find(b);
    const double sb = shift_[b];  // u_b = u_rb + sb
    // Requested relation: u_a = u_b + delta  =>  u_ra = u_rb + (sb - sa + delta).
    const double rel = sb - sa + delta;
    if (ra == rb) {
        if (!values_agree(rel, 0.0))
            throw std::runtime_error("constraints: inconsistent tie cycle");
        return;
    }
    int child, root;
    double child_shift;  // u_child = u_root + child_shift
    if (ra > rb) {
        child = ra;
        root = rb;
        child_shift = rel;
    } else {
        child = rb;
        root = ra;
        child_shift = -rel;
    }
    auto fc = fixed_.find(child);
    if (fc != fixed_.end()) {
        const double migrated = fc->second + child_shift;  // value seen from the new root
        auto fr = fixed_.find(root);
        if (fr != fixed_.end()) {
            if (!values_agree(fr->second, migrated))
                throw std::runtime_error("constraints: conflicting fixed values on one dof class");
        } else {
            fixed_.emplace(root, migrated);
        }
        fixed_.erase(child);
    }
    parent_[child] = root;
    shift_[child] = child_shift;
}

void LinearConstraints::finalize() {
    if (finalized_) return;
    reduced_.assign(parent_.size(), -1);
    int next = 0;
    for (int i = 0; i < static_cast<int>(parent_.size()); ++i) {
        if (find(i) != i) continue;
        if (fixed_.count(i)) continue;
        reduced_[i] = next++;
    }
    n_reduced_ = next;
    finalized_ = true;
}

int LinearConstraints::n_reduced() {
    finalize();
    return n_reduced_;
}

int LinearConstraints::representative(int dof) { return find(dof); }

double LinearConstraints::offset(int dof) {
    find(dof);
    return shift_[dof];
}

bool LinearConstraints::is_fixed(int dof) { return fixed_.count(find(dof)) > 0; }

double LinearConstraints::fixed_value(int dof) {
    auto it = fixed_.find(find(dof));
    if (it == fixed_.end()) throw std::logic_error("constraints: dof is not fixed");
    return it->second + shift_[dof];
}

int LinearConstraints::reduced_index(int dof) {
    finalize();
    return reduced_[find(dof)];
}

void tie_vertex_pairs(LinearConstraints& bc, const FunctionSpace& space,
                      const std::vector<std::array<int, 2>>& pairs, int offset) {
    const int nc = space.components();
    for (const auto& pr : pairs)
        for (int c = 0; c < nc; ++c)
            bc.tie(offset + space.dof(pr[0], c), offset + space.dof(pr[1], c));
    if (space.order() == 2) {
        // Midpoint nodes of edges whose endpoints are both paired and whose
        // partner endpoints also form a mesh edge.
        std::unordered_map<int, int> partner;
        for (const auto& pr : pairs) partner.emplace(pr[1], pr[0]);
        for (const auto& tri : space.mesh().triangles) {
            for (int e = 0; e < 3; ++e) {
                const int a = tri[e];
                const int b = tri[(e + 1) % 3];
                auto ia = partner.find(a);
                auto ib = partner.find(b);
                if (ia == partner.end() || ib == partner.end()) continue;
                const int m_slave = space.edge_node(a, b);
                const int m_master = space.edge_node(ia->second, ib->second);
                if (m_master < 0) continue;  // partner vertices are not joined by an edge
                for (int c = 0; c < nc; ++c)
                    bc.tie(offset + space.dof(m_master, c), offset + space.dof(m_slave, c));
            }
        }
    }
}

void tie_periodic(LinearConstraints& bc, const FunctionSpace& space, const PeriodicMap& map,
                  int offset) {
    tie_vertex_pairs(bc, space, map.pairs, offset);
}

void tie_interface_jump(LinearConstraints& bc, const FunctionSpace& space,
                        const std::vector<std::array<int, 2>>& pairs, int offset,
                        const std::function<Vec2(Vec2)>& jump) {
    const int nc = space.components();
    auto tie_nodes = [&](int plus_node, int minus_node, Vec2 x) {
        Vec2 g{0.0, 0.0};
        if (jump) g = jump(x);
        for (int c = 0; c < nc; ++c)
            bc.tie(offset + space.dof(plus_node, c), offset + space.dof(minus_node, c),
                   c == 0 ? g.x : g.y);
    };
    for (const auto& pr : pairs) tie_nodes(pr[1], pr[0], space.node_position(pr[0]));
    if (space.order() == 2) {
        std::unordered_map<int, int> minus_of;
        for (const auto& pr : pairs) minus_of.emplace(pr[1], pr[0]);
        for (const auto& tri : space.mesh().triangles) {
            for (int e = 0; e < 3; ++e) {
                const int a = tri[e];
                const int b = tri[(e + 1) % 3];
                auto ia = minus_of.find(a);
                auto ib = minus_of.find(b);
                if (ia == minus_of.end() || ib == minus_of.end()) continue;
                const int m_plus = space.edge_node(a, b);
                const int m_minus = space.edge_node(ia->second, ib->second);
                if (m_minus < 0) continue;
                tie_nodes(m_plus, m_minus, space.node_position(m_plus));
            }
        }
    }
}

}  // namespace fpflow
