#ifndef FPFLOW_CONDITION_SET_HPP
#define FPFLOW_CONDITION_SET_HPP

#include <string>

#include "fpflow/effective_coefficients.hpp"

namespace fpflow {

/// The three families of coupling conditions on the fluid-porous interface.
///
/// classical:     continuity of the normal velocity, balance of the normal
///                stress against the porous pressure, and a Beavers-Joseph
///                slip law with parameter alpha and a characteristic
///                permeability.
/// generalized:   normal-velocity continuity, normal-stress balance with a
///                tangential-shear correction (Ns), and a slip law whose
///                slip length and pressure-gradient terms come from the
///                boundary-layer constants (N1, M1_1, M1_2).
/// higher_order:  the generalized slip law restricted to its leading terms
///                plus corrections on the normal velocity (W) and on the
///                pressure balance (Mw_2 and the combined pressure-slip
///                constant Leta + Eb + N1), with the interface shear
///                eliminated through the slip law itself; this is the
///                formulation with the tangential-derivative terms.
enum class ConditionKind { classical, generalized, higher_order };

std::string to_string(ConditionKind kind);
ConditionKind condition_kind_from_string(const std::string& s);

/// One selected set of interface conditions with its parameters.
/// Use the factory functions below; they validate the parameters.
struct ConditionSet {
    ConditionKind kind = ConditionKind::classical;

    /// Slip parameter of the classical law (classical only).
    double alpha = 1.0;
    /// Characteristic permeability entering the classical slip length
    /// sqrt(K_char) / alpha; already scaled to the macroscale (classical
    /// only).
    double K_char = 0.0;

    /// Homogenized constants (generalized and higher_order).
    EffectiveCoefficients coeffs;
    /// Scale separation parameter; the slip length and the higher-order
    /// corrections are O(eps) and O(eps^2) terms.
    double eps = 0.0;
};

/// Classical set. Throws std::invalid_argument unless alpha > 0 and
/// K_char > 0.
ConditionSet make_classical(double alpha, double K_char);

/// Generalized set. Throws std::invalid_argument unless eps > 0.
ConditionSet make_generalized(const EffectiveCoefficients& coeffs, double eps);

/// Higher-order set. Throws std::invalid_argument unless eps > 0 and
/// |N1| >= 1e-8 (the formulation divides by the slip constant).
ConditionSet make_higher_order(const EffectiveCoefficients& coeffs, double eps);

}  // namespace fpflow

#endif  // FPFLOW_CONDITION_SET_HPP
