#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "kgfacet/comparison.hpp"
#include "kgfacet/taxonomy.hpp"

namespace kgfacet {

enum class FacetKind { Categorical, Numeric, Temporal, Taxonomic };

std::string_view to_string(FacetKind kind);
FacetKind parse_facet_kind(std::string_view name);

struct CandidateCount {
    std::string value;  // display string, or external id for taxonomic leaves
    std::string label;
    std::size_t count = 0;
    bool operator==(const CandidateCount&) const = default;
};

struct CategoricalSummary {
    std::vector<CandidateCount> values;
};

struct NumericSummary {
    double min = 0;
    double max = 0;
    std::size_t count = 0;        // rows holding a quantity
    std::size_t value_count = 0;  // quantities
    std::vector<std::string> units;
    // More than one unit (a missing unit counts as one) in the column;
    // magnitudes are compared raw.
    bool mixed_units = false;
};

struct TemporalSummary {
    Date earliest;
    Date latest;
    std::size_t count = 0;
    std::size_t value_count = 0;
};

struct TaxonomicSummary {
    std::string graph;
    std::vector<CandidateCount> leaves;
    std::vector<LevelCode> levels;
};

struct FacetSpec {
    std::string property_id;
    std::string label;
    FacetKind kind = FacetKind::Categorical;
    std::variant<CategoricalSummary, NumericSummary, TemporalSummary, TaxonomicSummary> summary;
    std::size_t rows_with_value = 0;
    // Set when a taxonomic column fell back to categorical labels because
    // the hierarchy provider was unreachable.
    bool degraded = false;
};

struct FacetOptions {
    std::vector<std::string> hierarchy_graphs{"geonames"};
    /// With a provider, taxonomic facets list the levels their chains
    /// actually reach and honour the degradation flag.
    TaxonomyContext taxonomy{};
};

std::vector<FacetSpec> infer_facets(const Comparison& comparison, const FacetOptions& options = {});

/// Kind chosen for one column's values by the majority rule.
FacetKind infer_kind(std::span<const Value> values, std::span<const std::string> hierarchy_graphs);

inline constexpr std::size_t kDefaultCandidateCap = 50;

struct CandidateList {
    std::vector<CandidateCount> entries;
    bool truncated = false;
    std::size_t total = 0;  // matches before capping
};

/// Categorical or taxonomic only (WrongFacetKind otherwise). Prefix match is
/// case-insensitive on the label.
CandidateList candidate_values(const FacetSpec& facet, std::string_view prefix = "",
                               std::size_t cap = kDefaultCandidateCap);

inline constexpr std::string_view kUnclassified = "(unclassified)";

/// Leaf values grouped by their ancestor at `level`. Throws WrongFacetKind,
/// or ProviderUnavailable when the hierarchy cannot be reached.
std::vector<CandidateCount> facet_values_at_level(const FacetSpec& facet, LevelCode level,
                                                  const TaxonomyContext& taxonomy);

nlohmann::json to_json(const FacetSpec& facet);
nlohmann::json to_json(const CandidateList& list);
nlohmann::json to_json(const CandidateCount& c);

}  // namespace kgfacet
