#include "sqpo/error.hpp"

namespace sqpo {

std::string_view code_name(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidGraph: return "INVALID_GRAPH";
    case ErrorCode::DomainMismatch: return "DOMAIN_MISMATCH";
    case ErrorCode::NotMono: return "NOT_MONO";
    case ErrorCode::ParseError: return "PARSE_ERROR";
    case ErrorCode::SchemaError: return "SCHEMA_ERROR";
    case ErrorCode::InvalidSpan: return "INVALID_SPAN";
    case ErrorCode::InvalidCospan: return "INVALID_COSPAN";
    case ErrorCode::MediatorIllDefined: return "MEDIATOR_ILL_DEFINED";
    case ErrorCode::NonCommutingSquare: return "NON_COMMUTING_SQUARE";
    case ErrorCode::InvalidRule: return "INVALID_RULE";
    case ErrorCode::InstanceMismatch: return "INSTANCE_MISMATCH";
    case ErrorCode::NotReversible: return "NOT_REVERSIBLE";
    case ErrorCode::NoMatch: return "NO_MATCH";
    case ErrorCode::AmbiguousMatch: return "AMBIGUOUS_MATCH";
    case ErrorCode::NotApplicable: return "NOT_APPLICABLE";
    case ErrorCode::CycleDetected: return "CYCLE_DETECTED";
    case ErrorCode::CommutativityViolation: return "COMMUTATIVITY_VIOLATION";
    case ErrorCode::RuleHomViolation: return "RULE_HOM_VIOLATION";
    case ErrorCode::PropagationConflict: return "PROPAGATION_CONFLICT";
    case ErrorCode::InvalidState: return "INVALID_STATE";
    case ErrorCode::IndexOutOfRange: return "INDEX_OUT_OF_RANGE";
    case ErrorCode::NameConflict: return "NAME_CONFLICT";
    case ErrorCode::UnknownVersion: return "UNKNOWN_VERSION";
    case ErrorCode::InvalidMergeSpec: return "INVALID_MERGE_SPEC";
    case ErrorCode::StoreCorrupt: return "STORE_CORRUPT";
    case ErrorCode::StoreLocked: return "STORE_LOCKED";
    case ErrorCode::VersionMismatch: return "VERSION_MISMATCH";
    case ErrorCode::Io: return "IO_ERROR";
    case ErrorCode::Usage: return "USAGE";
    }
    return "UNKNOWN";
}

bool is_domain_error(ErrorCode code) {
    switch (code) {
    case ErrorCode::ParseError:
    case ErrorCode::SchemaError:
    case ErrorCode::StoreCorrupt:
    case ErrorCode::StoreLocked:
    case ErrorCode::VersionMismatch:
    case ErrorCode::Io:
    case ErrorCode::Usage:
        return false;
    default:
        return true;
    }
}

}  // namespace sqpo
