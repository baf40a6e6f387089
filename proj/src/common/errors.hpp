#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace forge {

// Every failure raised by the core carries one of these codes. The C API maps
// them 1:1 onto forge_status values, so keep the order in sync with forge.h.
enum class Errc {
    Ok = 0,
    Usage,
    ConfigInvalid,
    MissingUpstreamArtifact,
    MissingProfile,
    DuplicateVideoId,
    UnauthorizedPersona,
    MalformedRecord,
    EmptyTranscript,
    InvalidRequest,
    ProviderFailure,
    RateLimited,
    EmptyText,
    ExtractionCountMismatch,
    ParseFailure,
    VerdictParseFailure,
    UnresolvedOpinionRef,
    UnfilteredPair,
    MixedPersona,
    IoFailure,
    EmptyCorpus,
    DimensionMismatch,
    TokenizerMismatch,
    EmptyIndex,
    MissingIndex,
    ContextBudgetExceeded,
    EmptyMessage,
    Busy,
    NotFound,
    NoComments,
    ServiceUnreachable,
    EmptyTurn,
    ScoreParseFailure,
    IncompleteSession,
    LengthMismatch,
    NotDefined,
    JoinMismatch,
    Internal,
};

std::string_view errc_name(Errc code) noexcept;

// True for errors caused by bad inputs or missing prerequisites (exit code 2)
// as opposed to runtime failures such as a dead backend (exit code 1).
bool is_validation_error(Errc code) noexcept;

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) { throw Error(code, message); }

inline void require(bool condition, Errc code, const std::string& message) {
    if (!condition) fail(code, message);
}

inline std::string_view errc_name(Errc code) noexcept {
    switch (code) {
        case Errc::Ok: return "Ok";
        case Errc::Usage: return "Usage";
        case Errc::ConfigInvalid: return "ConfigInvalid";
        case Errc::MissingUpstreamArtifact: return "MissingUpstreamArtifact";
        case Errc::MissingProfile: return "MissingProfile";
        case Errc::DuplicateVideoId: return "DuplicateVideoId";
        case Errc::UnauthorizedPersona: return "UnauthorizedPersona";
        case Errc::MalformedRecord: return "MalformedRecord";
        case Errc::EmptyTranscript: return "EmptyTranscript";
        case Errc::InvalidRequest: return "InvalidRequest";
        case Errc::ProviderFailure: return "ProviderFailure";
        case Errc::RateLimited: return "RateLimited";
        case Errc::EmptyText: return "EmptyText";
        case Errc::ExtractionCountMismatch: return "ExtractionCountMismatch";
        case Errc::ParseFailure: return "ParseFailure";
        case Errc::VerdictParseFailure: return "VerdictParseFailure";
        case Errc::UnresolvedOpinionRef: return "UnresolvedOpinionRef";
        case Errc::UnfilteredPair: return "UnfilteredPair";
        case Errc::MixedPersona: return "MixedPersona";
        case Errc::IoFailure: return "IoFailure";
        case Errc::EmptyCorpus: return "EmptyCorpus";
        case Errc::DimensionMismatch: return "DimensionMismatch";
        case Errc::TokenizerMismatch: return "TokenizerMismatch";
        case Errc::EmptyIndex: return "EmptyIndex";
        case Errc::MissingIndex: return "MissingIndex";
        case Errc::ContextBudgetExceeded: return "ContextBudgetExceeded";
        case Errc::EmptyMessage: return "EmptyMessage";
        case Errc::Busy: return "Busy";
        case Errc::NotFound: return "NotFound";
        case Errc::NoComments: return "NoComments";
        case Errc::ServiceUnreachable: return "ServiceUnreachable";
        case Errc::EmptyTurn: return "EmptyTurn";
        case Errc::ScoreParseFailure: return "ScoreParseFailure";
        case Errc::IncompleteSession: return "IncompleteSession";
        case Errc::LengthMismatch: return "LengthMismatch";
        case Errc::NotDefined: return "NotDefined";
        case Errc::JoinMismatch: return "JoinMismatch";
        case Errc::Internal: return "Internal";
    }
    return "Unknown";
}

inline bool is_validation_error(Errc code) noexcept {
    switch (code) {
        case Errc::ProviderFailure:
        case Errc::RateLimited:
        case Errc::IoFailure:
        case Errc::ServiceUnreachable:
        case Errc::Busy:
        case Errc::Internal:
        case Errc::ExtractionCountMismatch:
        case Errc::ParseFailure:
        case Errc::VerdictParseFailure:
        case Errc::ScoreParseFailure:
        case Errc::EmptyTurn:
            return false;
        default:
            return true;
    }
}

}  // namespace forge
