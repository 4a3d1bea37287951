#include "autocbt/error.hpp"

namespace autocbt {

std::string_view errc_name(Errc code) {
    switch (code) {
        case Errc::UnknownAgent: return "UnknownAgent";
        case Errc::DuplicateAgent: return "DuplicateAgent";
        case Errc::SelfEdge: return "SelfEdge";
        case Errc::DuplicateCounsellor: return "DuplicateCounsellor";
        case Errc::DuplicateUser: return "DuplicateUser";
        case Errc::MissingCounsellor: return "MissingCounsellor";
        case Errc::MissingUser: return "MissingUser";
        case Errc::EdgeNotFound: return "EdgeNotFound";
        case Errc::AlreadyConsumed: return "AlreadyConsumed";
        case Errc::Unparseable: return "Unparseable";
        case Errc::StrategyNotAllowed: return "StrategyNotAllowed";
        case Errc::TargetNotCommunicable: return "TargetNotCommunicable";
        case Errc::CardinalityMismatch: return "CardinalityMismatch";
        case Errc::OutOfOrderMessage: return "OutOfOrderMessage";
        case Errc::MissingBinding: return "MissingBinding";
        case Errc::Transport: return "Transport";
        case Errc::Auth: return "Auth";
        case Errc::RateLimited: return "RateLimited";
        case Errc::Malformed: return "Malformed";
        case Errc::ScriptExhausted: return "ScriptExhausted";
        case Errc::RetriesExhausted: return "RetriesExhausted";
        case Errc::ParseError: return "ParseError";
        case Errc::MissingField: return "MissingField";
        case Errc::DuplicateId: return "DuplicateId";
        case Errc::InsufficientClass: return "InsufficientClass";
        case Errc::UnlabeledItem: return "UnlabeledItem";
        case Errc::UnknownLabel: return "UnknownLabel";
        case Errc::UnclassifiableResponse: return "UnclassifiableResponse";
        case Errc::NoRatingFound: return "NoRatingFound";
        case Errc::OutOfRange: return "OutOfRange";
        case Errc::JudgeUnparseable: return "JudgeUnparseable";
        case Errc::MissingMetric: return "MissingMetric";
        case Errc::EmptyAfterExclusion: return "EmptyAfterExclusion";
        case Errc::MetricSetMismatch: return "MetricSetMismatch";
        case Errc::InvalidConfig: return "InvalidConfig";
        case Errc::Io: return "Io";
    }
    return "Unknown";
}

bool is_backend_error(Errc code) {
    switch (code) {
        case Errc::Transport:
        case Errc::Auth:
        case Errc::RateLimited:
        case Errc::Malformed:
        case Errc::ScriptExhausted:
        case Errc::RetriesExhausted:
            return true;
        default:
            return false;
    }
}

}  // namespace autocbt
