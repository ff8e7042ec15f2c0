#ifndef FPFLOW_QUADRATURE_HPP
#define FPFLOW_QUADRATURE_HPP

#include <vector>

namespace fpflow {

/// Quadrature rule on the reference triangle {(xi, eta) : xi, eta >= 0,
/// xi + eta <= 1}. Weights sum to 1/2 (the reference area), so a physical
/// integral is sum_q w_q * |det J| * f(x(q)).
struct TriQuadrature {
    struct Point {
        double xi;
        double eta;
        double w;
    };
    std::vector<Point> points;
    int exact_degree = 0;

    /// Smallest built-in rule integrating polynomials of the given total
    /// degree exactly. Available degrees reach 6.
    static const TriQuadrature& degree(int d);
};

/// Gauss-Legendre rule on [0, 1]; weights sum to 1.
struct LineQuadrature {
    struct Point {
        double s;
        double w;
    };
    std::vector<Point> points;

    /// n-point rule, 1 <= n <= 5 (exact to degree 2n-1).
    static const LineQuadrature& gauss(int n);
};

}  // namespace fpflow

#endif  // FPFLOW_QUADRATURE_HPP
