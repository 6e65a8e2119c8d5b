#pragma once
#include <stdexcept>
#include <string>

namespace perfprism {

enum class errc {
    window_mismatch,
    not_a_unit,
    denominator_overflow,
    non_constant_coefficients,
    no_convergence,
    insufficient_precision,
    not_primitive,
    precision_exhausted,
    guard_insufficient,
    out_of_interval,
    zero_element,
    residue_collision,
    hensel_failure,
    coeff_mismatch,
    not_a_unit_determinant,
    search_exhausted,
    slope_order_violation,
    window_too_narrow,
    not_contracting,
    max_iter_exceeded,
    not_phi_stable,
    invalid_argument,
    schema_error,
};

inline const char* errc_name(errc e) {
    switch (e) {
    case errc::window_mismatch: return "WindowMismatch";
    case errc::not_a_unit: return "NotAUnit";
    case errc::denominator_overflow: return "DenominatorOverflow";
    case errc::non_constant_coefficients: return "NonConstantCoefficients";
    case errc::no_convergence: return "NoConvergence";
    case errc::insufficient_precision: return "InsufficientPrecision";
    case errc::not_primitive: return "NotPrimitive";
    case errc::precision_exhausted: return "PrecisionExhausted";
    case errc::guard_insufficient: return "GuardInsufficient";
    case errc::out_of_interval: return "OutOfInterval";
    case errc::zero_element: return "ZeroElement";
    case errc::residue_collision: return "ResidueCollision";
    case errc::hensel_failure: return "HenselFailure";
    case errc::coeff_mismatch: return "CoeffMismatch";
    case errc::not_a_unit_determinant: return "NotAUnitDeterminant";
    case errc::search_exhausted: return "SearchExhausted";
    case errc::slope_order_violation: return "SlopeOrderViolation";
    case errc::window_too_narrow: return "WindowTooNarrow";
    case errc::not_contracting: return "NotContracting";
    case errc::max_iter_exceeded: return "MaxIterExceeded";
    case errc::not_phi_stable: return "NotPhiStable";
    case errc::invalid_argument: return "InvalidArgument";
    case errc::schema_error: return "SchemaError";
    }
    return "Unknown";
}

// Every failure of the library is reported through this one type; the kind
// distinguishes precision failures from genuine mathematical obstructions.
class error : public std::runtime_error {
public:
    error(errc kind, const std::string& what)
        : std::runtime_error(std::string(errc_name(kind)) + ": " + what), kind_(kind) {}
    errc kind() const noexcept { return kind_; }

private:
    errc kind_;
};

[[noreturn]] inline void fail(errc kind, const std::string& what) { throw error(kind, what); }

inline void require(bool cond, errc kind, const std::string& what) {
    if (!cond) fail(kind, what);
}

} // namespace perfprism
