#include "ricci/error.hpp"

namespace ricci {

std::string_view error_name(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::Ok: return "Ok";
        case ErrorCode::NotStochastic: return "NotStochastic";
        case ErrorCode::NotIrreducible: return "NotIrreducible";
        case ErrorCode::NotReversible: return "NotReversible";
        case ErrorCode::BadSpec: return "BadSpec";
        case ErrorCode::BadLambda: return "BadLambda";
        case ErrorCode::WeightSum: return "WeightSum";
        case ErrorCode::EmptyProduct: return "EmptyProduct";
        case ErrorCode::GeneratorMismatch: return "GeneratorMismatch";
        case ErrorCode::NoInverse: return "NoInverse";
        case ErrorCode::ReversibilityFail: return "ReversibilityFail";
        case ErrorCode::NegativeInput: return "NegativeInput";
        case ErrorCode::BoundaryDerivative: return "BoundaryDerivative";
        case ErrorCode::QuadratureFail: return "QuadratureFail";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::SolverDiverged: return "SolverDiverged";
        case ErrorCode::Infeasible: return "Infeasible";
        case ErrorCode::LPFail: return "LPFail";
        case ErrorCode::BoundaryState: return "BoundaryState";
        case ErrorCode::LeftInterior: return "LeftInterior";
        case ErrorCode::StepRejected: return "StepRejected";
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::BoundaryDensity: return "BoundaryDensity";
        case ErrorCode::OptFail: return "OptFail";
        case ErrorCode::BadRate: return "BadRate";
        case ErrorCode::EigFail: return "EigFail";
        case ErrorCode::InvalidDensity: return "InvalidDensity";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::Io: return "Io";
        case ErrorCode::Internal: return "Internal";
    }
    return "Unknown";
}

}  // namespace ricci
