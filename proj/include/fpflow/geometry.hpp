#ifndef FPFLOW_GEOMETRY_HPP
#define FPFLOW_GEOMETRY_HPP

#include <array>
#include <string>
#include <vector>

namespace fpflow {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

struct Rect {
    double x_min = 0.0;
    double x_max = 1.0;
    double y_min = 0.0;
    double y_max = 1.0;

    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
    bool contains(Vec2 p, double tol = 0.0) const {
        return p.x >= x_min - tol && p.x <= x_max + tol && p.y >= y_min - tol && p.y <= y_max + tol;
    }
};

/// Circular inclusion. Meshed as an inscribed regular polygon; the exact
/// center/radius are kept so refinement can re-project midpoints and so
/// samplers can mask points inside the obstacle.
struct Circle {
    Vec2 center;
    double radius = 0.0;
    /// True when the circle is cut by a lateral wall and only an arc is meshed.
    bool clipped = false;
};

enum class DomainKind { unit_cell, stripe, perforated, rectangle };

/// Parameters selecting one of the four meshable domain families.
struct GeometrySpec {
    DomainKind kind = DomainKind::rectangle;
    double inclusion_diameter = 0.5;  ///< d, as a fraction of the cell size
    int stripe_height = 4;            ///< m, cells above/below the interface
    double eps = 0.05;                ///< pore size of the perforated domain
    double shift = 0.0;               ///< horizontal lattice offset in units of eps
    Rect bounds;
    int circle_segments = 16;         ///< minimum polygon resolution per circle
};

std::string to_string(DomainKind kind);

/// Area of the inscribed regular n-gon of a circle with radius r.
double polygon_area(double radius, int segments);

}  // namespace fpflow

#endif  // FPFLOW_GEOMETRY_HPP
