#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ricci {

// Numeric values are part of the C ABI (see entropic_ricci.h); append only.
enum class ErrorCode : int {
    Ok = 0,
    NotStochastic = 1,
    NotIrreducible = 2,
    NotReversible = 3,
    BadSpec = 4,
    BadLambda = 5,
    WeightSum = 6,
    EmptyProduct = 7,
    GeneratorMismatch = 8,
    NoInverse = 9,
    ReversibilityFail = 10,
    NegativeInput = 11,
    BoundaryDerivative = 12,
    QuadratureFail = 13,
    ShapeMismatch = 14,
    SolverDiverged = 15,
    Infeasible = 16,
    LPFail = 17,
    BoundaryState = 18,
    LeftInterior = 19,
    StepRejected = 20,
    NoConvergence = 21,
    BoundaryDensity = 22,
    OptFail = 23,
    BadRate = 24,
    EigFail = 25,
    InvalidDensity = 26,
    InvalidArgument = 27,
    Io = 28,
    Internal = 29,
};

std::string_view error_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_name(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace ricci
