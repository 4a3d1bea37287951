#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace autocbt {

// Every failure the engine reports maps to exactly one of these codes.
enum class Errc {
    // topology / routing
    UnknownAgent,
    DuplicateAgent,
    SelfEdge,
    DuplicateCounsellor,
    DuplicateUser,
    MissingCounsellor,
    MissingUser,
    EdgeNotFound,
    AlreadyConsumed,
    Unparseable,
    StrategyNotAllowed,
    TargetNotCommunicable,
    CardinalityMismatch,
    // agents / memory
    OutOfOrderMessage,
    MissingBinding,
    // backend
    Transport,
    Auth,
    RateLimited,
    Malformed,
    ScriptExhausted,
    RetriesExhausted,
    // dataset
    ParseError,
    MissingField,
    DuplicateId,
    InsufficientClass,
    UnlabeledItem,
    UnknownLabel,
    UnclassifiableResponse,
    // evaluation
    NoRatingFound,
    OutOfRange,
    JudgeUnparseable,
    MissingMetric,
    EmptyAfterExclusion,
    MetricSetMismatch,
    // config / io
    InvalidConfig,
    Io,
};

std::string_view errc_name(Errc code);

// True for the chat-backend classes (Transport .. RetriesExhausted).
bool is_backend_error(Errc code);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

// Backend failure. RetriesExhausted carries the class of the last attempt.
class BackendError : public Error {
public:
    BackendError(Errc code, const std::string& message, std::optional<Errc> cause = std::nullopt)
        : Error(code, message), cause_(cause) {}

    std::optional<Errc> cause() const noexcept { return cause_; }

private:
    std::optional<Errc> cause_;
};

}  // namespace autocbt
