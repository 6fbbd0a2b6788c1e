#include "kgfacet/comparison.hpp"

#include <algorithm>
#include <set>

#include "kgfacet/error.hpp"
#include "kgfacet/text.hpp"

namespace kgfacet {

using nlohmann::json;

std::vector<PropertyColumn> order_columns(std::span<const ComparisonRow> rows,
                                          const std::map<std::string, std::string>& property_labels) {
    std::map<std::string, std::size_t> coverage;
    for (const auto& row : rows) {
        for (const auto& [prop, values] : row.cells) {
            if (!values.empty()) ++coverage[prop];
        }
    }
    struct Ranked {
        PropertyColumn column;
        std::size_t coverage;
    };
    std::vector<Ranked> ranked;
    for (const auto& [prop, n] : coverage) {
        auto it = property_labels.find(prop);
        ranked.push_back({{prop, it == property_labels.end() ? prop : it->second}, n});
    }
    std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
        if (a.coverage != b.coverage) return a.coverage > b.coverage;
        if (a.column.label != b.column.label) return a.column.label < b.column.label;
        return a.column.id < b.column.id;
    });
    std::vector<PropertyColumn> out;
    out.reserve(ranked.size());
    for (auto& r : ranked) out.push_back(std::move(r.column));
    return out;
}

Comparison::Comparison(std::string id, std::string label, std::vector<ComparisonRow> rows,
                       const std::map<std::string, std::string>& property_labels)
    : id_(std::move(id)), label_(std::move(label)), rows_(std::move(rows)) {
    std::set<std::string> seen;
    for (const auto& row : rows_) {
        if (!seen.insert(row.contribution_id).second) {
            throw Error(ErrorCode::InvalidValue, "duplicate row '" + row.contribution_id + "' in comparison",
                        {{"id", row.contribution_id}});
        }
    }
    columns_ = order_columns(rows_, property_labels);
    for (const auto& col : columns_) labels_.emplace(col.id, col.label);
}

const std::vector<Value>* Comparison::cell(std::size_t row, const std::string& property_id) const {
    const auto& cells = rows_.at(row).cells;
    auto it = cells.find(property_id);
    return it == cells.end() || it->second.empty() ? nullptr : &it->second;
}

const PropertyColumn* Comparison::column(const std::string& property_id) const {
    auto it = std::find_if(columns_.begin(), columns_.end(),
                           [&](const PropertyColumn& c) { return c.id == property_id; });
    return it == columns_.end() ? nullptr : &*it;
}

bool Comparison::has_row(const std::string& contribution_id) const {
    return std::any_of(rows_.begin(), rows_.end(),
                       [&](const ComparisonRow& r) { return r.contribution_id == contribution_id; });
}

std::vector<std::string> Comparison::row_ids() const {
    std::vector<std::string> ids;
    ids.reserve(rows_.size());
    for (const auto& r : rows_) ids.push_back(r.contribution_id);
    return ids;
}

Comparison Comparison::restricted(std::span<const std::string> ids) const {
    std::set<std::string> wanted(ids.begin(), ids.end());
    for (const auto& id : wanted) {
        if (!has_row(id)) {
            throw Error(ErrorCode::InvalidSubset, "'" + id + "' is not a row of comparison '" + id_ + "'",
                        {{"id", id}, {"comparison", id_}});
        }
    }
    std::vector<ComparisonRow> rows;
    for (const auto& r : rows_) {
        if (wanted.contains(r.contribution_id)) rows.push_back(r);
    }
    return Comparison(id_, label_, std::move(rows), labels_);
}

Comparison build_comparison(const StoreSnapshot& snapshot, std::span<const std::string> contribution_ids,
                            std::string comparison_id, std::string label) {
    if (contribution_ids.empty()) throw Error(ErrorCode::EmptySelection, "a comparison needs at least one contribution");
    std::vector<ComparisonRow> rows;
    std::set<std::string> seen;
    for (const auto& id : contribution_ids) {
        const auto* c = snapshot.find_contribution(id);
        if (!c) throw Error(ErrorCode::UnknownContribution, "unknown contribution '" + id + "'", {{"id", id}});
        if (!seen.insert(id).second) continue;
        const auto* paper = snapshot.find_paper(c->paper_id);
        rows.push_back({c->id, c->label, paper ? paper->title : "", c->properties, false});
    }
    return Comparison(std::move(comparison_id), std::move(label), std::move(rows), snapshot.property_labels());
}

std::string slugify(std::string_view label) {
    std::string out;
    bool dash = false;
    for (char c : to_lower(label)) {
        if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
            if (dash && !out.empty()) out += '-';
            out += c;
            dash = false;
        } else {
            dash = true;
        }
    }
    return out.empty() ? "unnamed" : out;
}

std::vector<Comparison> build_problem_comparisons(const StoreSnapshot& snapshot) {
    std::vector<Comparison> out;
    for (const auto& problem : snapshot.research_problems()) {
        auto ids = list_contributions(snapshot, problem);
        out.push_back(build_comparison(snapshot, ids, slugify(problem), problem));
    }
    std::sort(out.begin(), out.end(), [](const Comparison& a, const Comparison& b) { return a.id() < b.id(); });
    return out;
}

json to_json(const Comparison& comparison) {
    json columns = json::array();
    for (const auto& c : comparison.columns()) columns.push_back({{"id", c.id}, {"label", c.label}});
    json rows = json::array();
    for (const auto& r : comparison.rows()) {
        json cells = json::object();
        for (const auto& [prop, values] : r.cells) {
            json list = json::array();
            for (const auto& v : values) list.push_back(to_json(v));
            cells[prop] = std::move(list);
        }
        rows.push_back({{"id", r.contribution_id},
                        {"label", r.label},
                        {"paper_title", r.paper_title},
                        {"tombstoned", r.tombstoned},
                        {"cells", std::move(cells)}});
    }
    return {{"id", comparison.id()},
            {"label", comparison.label()},
            {"row_count", comparison.rows().size()},
            {"columns", std::move(columns)},
            {"rows", std::move(rows)}};
}

}  // namespace kgfacet
