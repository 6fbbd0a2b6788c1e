#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "kgfacet/kg_store.hpp"
#include "kgfacet/value.hpp"

namespace kgfacet {

struct PropertyColumn {
    std::string id;
    std::string label;
    bool operator==(const PropertyColumn&) const = default;
};

struct ComparisonRow {
    std::string contribution_id;
    std::string label;
    std::string paper_title;
    std::map<std::string, std::vector<Value>> cells;
    // Set when a saved row's contribution no longer exists in the store.
    bool tombstoned = false;
    bool operator==(const ComparisonRow&) const = default;
};

/// Property columns x contribution rows. Immutable once built.
class Comparison {
public:
    Comparison() = default;

    /// Columns are derived from the rows' cells (see order_columns). Throws
    /// InvalidValue on duplicate row ids.
    Comparison(std::string id, std::string label, std::vector<ComparisonRow> rows,
               const std::map<std::string, std::string>& property_labels);

    const std::string& id() const { return id_; }
    const std::string& label() const { return label_; }
    const std::vector<PropertyColumn>& columns() const { return columns_; }
    const std::vector<ComparisonRow>& rows() const { return rows_; }

    /// Null when the row has no value for the property.
    const std::vector<Value>* cell(std::size_t row, const std::string& property_id) const;
    const PropertyColumn* column(const std::string& property_id) const;
    bool has_row(const std::string& contribution_id) const;
    std::vector<std::string> row_ids() const;

    /// Same columns rule applied to the selected rows, kept in this
    /// comparison's row order. Unknown ids throw InvalidSubset.
    Comparison restricted(std::span<const std::string> ids) const;

    bool operator==(const Comparison&) const = default;

private:
    std::string id_;
    std::string label_;
    std::vector<PropertyColumn> columns_;
    std::vector<ComparisonRow> rows_;
    std::map<std::string, std::string> labels_;
};

/// Descending coverage, then label, then id.
std::vector<PropertyColumn> order_columns(std::span<const ComparisonRow> rows,
                                          const std::map<std::string, std::string>& property_labels);

/// Throws EmptySelection or UnknownContribution. Repeated ids keep their
/// first position.
Comparison build_comparison(const StoreSnapshot& snapshot, std::span<const std::string> contribution_ids,
                            std::string comparison_id = "", std::string label = "");

/// Stable URL-safe id for a research-problem grouping ("COVID-19 R0" -> "covid-19-r0").
std::string slugify(std::string_view label);

/// One comparison per distinct research problem, sorted by id.
std::vector<Comparison> build_problem_comparisons(const StoreSnapshot& snapshot);

nlohmann::json to_json(const Comparison& comparison);

}  // namespace kgfacet
