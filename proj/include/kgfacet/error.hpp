#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

namespace kgfacet {

enum class ErrorCode {
    MalformedDocument,
    DuplicateId,
    DanglingPaperRef,
    InvalidValue,
    NotFound,
    EmptySelection,
    UnknownContribution,
    InvalidSubset,
    PersistenceFailure,
    WrongFacetKind,
    KindMismatch,
    UnknownProperty,
    ProviderUnavailable,
    UnknownEntity,
    CycleDetected,
    DepthExceeded,
    InvalidRequest,
    InvalidConfig,
};

std::string_view to_string(ErrorCode code);

/// Single exception type used across the library. `detail` is structured
/// context (line numbers, offending ids, mismatch lists) that the service
/// forwards verbatim in its error envelope.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, nlohmann::json detail = nullptr)
        : std::runtime_error(message), code_(code), detail_(std::move(detail)) {}

    ErrorCode code() const noexcept { return code_; }
    const nlohmann::json& detail() const noexcept { return detail_; }

    /// {code, message, detail}
    nlohmann::json envelope() const;

private:
    ErrorCode code_;
    nlohmann::json detail_;
};

}  // namespace kgfacet
