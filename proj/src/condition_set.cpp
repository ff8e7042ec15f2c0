#include "fpflow/condition_set.hpp"

#include <cmath>
#include <stdexcept>

namespace fpflow {

std::string to_string(ConditionKind kind) {
    switch (kind) {
        case ConditionKind::classical: return "classical";
        case ConditionKind::generalized: return "generalized";
        case ConditionKind::higher_order: return "higher_order";
    }
    throw std::logic_error("unknown condition kind");
}

ConditionKind condition_kind_from_string(const std::string& s) {
    if (s == "classical") return ConditionKind::classical;
    if (s == "generalized") return ConditionKind::generalized;
    if (s == "higher_order") return ConditionKind::higher_order;
    throw std::invalid_argument("unknown condition set '" + s +
                                "' (expected classical, generalized or higher_order)");
}

ConditionSet make_classical(double alpha, double K_char) {
    if (!(alpha > 0.0))
        throw std::invalid_argument("classical conditions: alpha must be positive");
    if (!(K_char > 0.0))
        throw std::invalid_argument("classical conditions: characteristic permeability must be positive");
    ConditionSet set;
    set.kind = ConditionKind::classical;
    set.alpha = alpha;
    set.K_char = K_char;
    return set;
}

ConditionSet make_generalized(const EffectiveCoefficients& coeffs, double eps) {
    if (!(eps > 0.0))
        throw std::invalid_argument("generalized conditions: eps must be positive");
    ConditionSet set;
    set.kind = ConditionKind::generalized;
    set.coeffs = coeffs;
    set.eps = eps;
    return set;
}

ConditionSet make_higher_order(const EffectiveCoefficients& coeffs, double eps) {
    if (!(eps > 0.0))
        throw std::invalid_argument("higher-order conditions: eps must be positive");
    if (std::abs(coeffs.N1) < 1e-8)
        throw std::invalid_argument(
            "higher-order conditions: slip constant N1 is numerically zero and the "
            "formulation divides by it");
    ConditionSet set;
    set.kind = ConditionKind::higher_order;
    set.coeffs = coeffs;
    set.eps = eps;
    return set;
}

}  // namespace fpflow
