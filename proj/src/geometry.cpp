#include "fpflow/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace fpflow {

std::string to_string(DomainKind kind) {
    switch (kind) {
        case DomainKind::unit_cell: return "unit_cell";
        case DomainKind::stripe: return "stripe";
        case DomainKind::perforated: return "perforated";
        case DomainKind::rectangle: return "rectangle";
    }
    throw std::logic_error("unknown DomainKind");
}

double polygon_area(double radius, int segments) {
    return 0.5 * segments * radius * radius * std::sin(2.0 * M_PI / segments);
}

}  // namespace fpflow
