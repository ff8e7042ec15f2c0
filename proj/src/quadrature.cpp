#include "fpflow/quadrature.hpp"

#include <stdexcept>

namespace fpflow {

namespace {

// Symmetric triangle rules in barycentric form. A group (a, a, 1-2a) with
// normalized weight w contributes its three distinct permutations; a fully
// asymmetric group (a, b, c) contributes all six. Normalized weights sum to
// one and are scaled by the reference area 1/2 on output.
void push_s2(std::vector<TriQuadrature::Point>& pts, double a, double w) {
    const double b = 1.0 - 2.0 * a;
    pts.push_back({a, a, 0.5 * w});
    pts.push_back({b, a, 0.5 * w});
    pts.push_back({a, b, 0.5 * w});
}

void push_s1(std::vector<TriQuadrature::Point>& pts, double a, double b, double w) {
    const double c = 1.0 - a - b;
    const double abc[6][2] = {{a, b}, {b, a}, {a, c}, {c, a}, {b, c}, {c, b}};
    for (auto& p : abc) pts.push_back({p[0], p[1], 0.5 * w});
}

TriQuadrature make_tri_rule(int d) {
    TriQuadrature q;
    if (d <= 1) {
        q.points.push_back({1.0 / 3.0, 1.0 / 3.0, 0.5});
        q.exact_degree = 1;
    } else if (d <= 2) {
        q.points.push_back({0.5, 0.0, 1.0 / 6.0});
        q.points.push_back({0.5, 0.5, 1.0 / 6.0});
        q.points.push_back({0.0, 0.5, 1.0 / 6.0});
        q.exact_degree = 2;
    } else if (d <= 4) {
        push_s2(q.points, 0.445948490915965, 0.223381589678011);
        push_s2(q.points, 0.091576213509771, 0.109951743655322);
        q.exact_degree = 4;
    } else if (d <= 6) {
        push_s2(q.points, 0.063089014491502, 0.050844906370207);
        push_s2(q.points, 0.249286745170910, 0.116786275726379);
        push_s1(q.points, 0.310352451033785, 0.053145049844816, 0.082851075618374);
        q.exact_degree = 6;
    } else {
        throw std::invalid_argument("triangle quadrature: degree above 6 not available");
    }
    return q;
}

LineQuadrature make_line_rule(int n) {
    // Gauss-Legendre nodes/weights on [-1, 1], mapped to [0, 1].
    static const double nodes[5][5] = {
        {0.0},
        {-0.5773502691896257, 0.5773502691896257},
        {-0.7745966692414834, 0.0, 0.7745966692414834},
        {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526},
        {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
         0.9061798459386640}};
    static const double weights[5][5] = {
        {2.0},
        {1.0, 1.0},
        {0.5555555555555556, 0.8888888888888888, 0.5555555555555556},
        {0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538},
        {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
         0.2369268850561891}};
    if (n < 1 || n > 5) throw std::invalid_argument("line quadrature: 1..5 points supported");
    LineQuadrature q;
    for (int i = 0; i < n; ++i)
        q.points.push_back({0.5 * (nodes[n - 1][i] + 1.0), 0.5 * weights[n - 1][i]});
    return q;
}

}  // namespace

const TriQuadrature& TriQuadrature::degree(int d) {
    if (d > 6) throw std::invalid_argument("triangle quadrature: degree above 6 not available");
    static const TriQuadrature r1 = make_tri_rule(1);
    static const TriQuadrature r2 = make_tri_rule(2);
    static const TriQuadrature r4 = make_tri_rule(4);
    static const TriQuadrature r6 = make_tri_rule(6);
    if (d <= 1) return r1;
    if (d <= 2) return r2;
    if (d <= 4) return r4;
    return r6;
}

const LineQuadrature& LineQuadrature::gauss(int n) {
    static const LineQuadrature rules[5] = {make_line_rule(1), make_line_rule(2),
                                            make_line_rule(3), make_line_rule(4),
                                            make_line_rule(5)};
    if (n < 1 || n > 5) throw std::invalid_argument("line quadrature: 1..5 points supported");
    return rules[n - 1];
}

}  // namespace fpflow
