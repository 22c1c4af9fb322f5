#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sqpo {

/// Stable error codes. The CLI prints these verbatim on stderr.
enum class ErrorCode {
    InvalidGraph,
    DomainMismatch,
    NotMono,
    ParseError,
    SchemaError,
    InvalidSpan,
    InvalidCospan,
    MediatorIllDefined,
    NonCommutingSquare,
    InvalidRule,
    InstanceMismatch,
    NotReversible,
    NoMatch,
    AmbiguousMatch,
    NotApplicable,
    CycleDetected,
    CommutativityViolation,
    RuleHomViolation,
    PropagationConflict,
    InvalidState,
    IndexOutOfRange,
    NameConflict,
    UnknownVersion,
    InvalidMergeSpec,
    StoreCorrupt,
    StoreLocked,
    VersionMismatch,
    Io,
    Usage,
};

std::string_view code_name(ErrorCode code);

/// True for errors caused by the content of a request (domain errors) as
/// opposed to malformed input or I/O problems.
bool is_domain_error(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace sqpo
