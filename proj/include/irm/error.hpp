#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace irm {

enum class ErrorCode {
    EmptyLevelSet,
    UnknownLevelEndpoint,
    UnknownLevel,
    UnknownAgent,
    DuplicateBody,
    MissingBody,
    IllegalInfluenceTarget,
    IllegalPerception,
    UndeclaredInfluenceKind,
    ForbiddenEmergenceProducer,
    ForbiddenConstraintProducer,
    MalformedConstraint,
    KindDiscipline,
    ConstraintOverConstraint,
    ReactionFault,
    UnknownCoupling,
    EmitterOnBlockedCell,
    InvalidModel,
    ParseError,
    ValidationError,
};

std::string_view to_string(ErrorCode code);

/// Base for every error raised by the engine and its models.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// A rule broke the routing, perception or hierarchy contract during a step.
/// The step is aborted; nothing produced in it is installed.
class ContractViolation : public Error {
public:
    using Error::Error;
};

inline std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::EmptyLevelSet: return "EmptyLevelSet";
    case ErrorCode::UnknownLevelEndpoint: return "UnknownLevelEndpoint";
    case ErrorCode::UnknownLevel: return "UnknownLevel";
    case ErrorCode::UnknownAgent: return "UnknownAgent";
    case ErrorCode::DuplicateBody: return "DuplicateBody";
    case ErrorCode::MissingBody: return "MissingBody";
    case ErrorCode::IllegalInfluenceTarget: return "IllegalInfluenceTarget";
    case ErrorCode::IllegalPerception: return "IllegalPerception";
    case ErrorCode::UndeclaredInfluenceKind: return "UndeclaredInfluenceKind";
    case ErrorCode::ForbiddenEmergenceProducer: return "ForbiddenEmergenceProducer";
    case ErrorCode::ForbiddenConstraintProducer: return "ForbiddenConstraintProducer";
    case ErrorCode::MalformedConstraint: return "MalformedConstraint";
    case ErrorCode::KindDiscipline: return "KindDiscipline";
    case ErrorCode::ConstraintOverConstraint: return "ConstraintOverConstraint";
    case ErrorCode::ReactionFault: return "ReactionFault";
    case ErrorCode::UnknownCoupling: return "UnknownCoupling";
    case ErrorCode::EmitterOnBlockedCell: return "EmitterOnBlockedCell";
    case ErrorCode::InvalidModel: return "InvalidModel";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    }
    return "Unknown";
}

} // namespace irm
