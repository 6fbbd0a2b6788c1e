#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "kgfacet/comparison.hpp"
#include "kgfacet/facet_engine.hpp"
#include "kgfacet/taxonomy.hpp"

namespace kgfacet {

/// Any selected display string, case-insensitive.
struct CategoricalIn {
    std::vector<std::string> values;
    bool operator==(const CategoricalIn&) const = default;
};

enum class CmpOp { Less, LessEqual, Greater, GreaterEqual, Equal, NotEqual };

struct NumericCmp {
    CmpOp op = CmpOp::Equal;
    double bound = 0;
    bool operator==(const NumericCmp&) const = default;
};

struct NumericRange {
    double low = 0;
    double high = 0;
    bool low_inclusive = true;
    bool high_inclusive = true;
    bool operator==(const NumericRange&) const = default;
};

struct NumericExclude {
    std::vector<double> values;
    bool operator==(const NumericExclude&) const = default;
};

struct TemporalOn {
    Date date;
    bool operator==(const TemporalOn&) const = default;
};

struct TemporalBefore {
    Date date;
    bool operator==(const TemporalBefore&) const = default;
};

struct TemporalAfter {
    Date date;
    bool operator==(const TemporalAfter&) const = default;
};

/// Closed interval; matches any overlapping value.
struct TemporalInterval {
    Date start;
    Date end;
    bool operator==(const TemporalInterval&) const = default;
};

/// Descendant-or-self of any listed ancestor. With a level, the value's
/// ancestor at that level must be one of them.
struct TaxonomicUnder {
    std::vector<std::string> ancestors;
    std::optional<LevelCode> level;
    bool operator==(const TaxonomicUnder&) const = default;
};

using FilterExpr = std::variant<CategoricalIn, NumericCmp, NumericRange, NumericExclude, TemporalOn, TemporalBefore,
                                TemporalAfter, TemporalInterval, TaxonomicUnder>;

/// AND across properties; every expression listed for a property must hold
/// for one and the same value of the row.
using FilterSet = std::map<std::string, std::vector<FilterExpr>>;

FacetKind kind_of(const FilterExpr& expr);
std::string_view to_string(CmpOp op);
CmpOp parse_cmp_op(std::string_view s);

/// Throws Error(InvalidRequest) on schema or invariant violations.
FilterExpr filter_expr_from_json(const nlohmann::json& j);
FilterSet filter_set_from_json(const nlohmann::json& j);
/// Parses text, reporting the byte position of syntax errors.
FilterSet parse_filter_set(std::string_view text);

nlohmann::json to_json(const FilterExpr& expr);
nlohmann::json to_json(const FilterSet& filters);
/// Canonical text form (sorted keys, compact).
std::string serialize(const FilterSet& filters);

/// Returns the set when every expression's kind matches its facet; the
/// error detail lists every mismatch and unknown property.
FilterSet validate_filters(const FilterSet& filters, std::span<const FacetSpec> facets);

/// Throws KindMismatch when the value's kind cannot be tested by `expr`.
/// Taxonomic tests resolve the value's chain through `provider`.
bool match_value(const Value& value, const FilterExpr& expr, HierarchyProvider* provider,
                 std::size_t max_depth = kDefaultMaxDepth);

/// Kind compatibility used by match_value (categorical accepts every kind).
bool compatible(const Value& value, const FilterExpr& expr);

struct FilterOutcome {
    std::vector<std::string> surviving;
    // Properties whose taxonomic filters ran without a reachable hierarchy
    // (only with degradation enabled; such values never match).
    std::vector<std::string> degraded;
};

/// Surviving row ids in comparison order. A row lacking a filtered property
/// is excluded. Throws ProviderUnavailable when taxonomic filters cannot
/// resolve and degradation is off.
FilterOutcome apply_filters(const Comparison& comparison, const FilterSet& filters, const TaxonomyContext& taxonomy);

/// Short description such as "> 2.5" or "under Europe"; ancestor ids are
/// replaced by their labels when known.
std::string describe(const FilterExpr& expr, const std::map<std::string, std::string>& ancestor_labels = {});

}  // namespace kgfacet
