#include "kgfacet/error.hpp"

namespace kgfacet {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::MalformedDocument: return "MalformedDocument";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::DanglingPaperRef: return "DanglingPaperRef";
    case ErrorCode::InvalidValue: return "InvalidValue";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::EmptySelection: return "EmptySelection";
    case ErrorCode::UnknownContribution: return "UnknownContribution";
    case ErrorCode::InvalidSubset: return "InvalidSubset";
    case ErrorCode::PersistenceFailure: return "PersistenceFailure";
    case ErrorCode::WrongFacetKind: return "WrongFacetKind";
    case ErrorCode::KindMismatch: return "KindMismatch";
    case ErrorCode::UnknownProperty: return "UnknownProperty";
    case ErrorCode::ProviderUnavailable: return "ProviderUnavailable";
    case ErrorCode::UnknownEntity: return "UnknownEntity";
    case ErrorCode::CycleDetected: return "CycleDetected";
    case ErrorCode::DepthExceeded: return "DepthExceeded";
    case ErrorCode::InvalidRequest: return "InvalidRequest";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    }
    return "Unknown";
}

nlohmann::json Error::envelope() const {
    return {{"code", std::string(to_string(code_))}, {"message", what()}, {"detail", detail_}};
}

}  // namespace kgfacet
