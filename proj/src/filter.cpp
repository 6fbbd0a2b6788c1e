#include "kgfacet/filter.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <unordered_map>

#include "kgfacet/text.hpp"

namespace kgfacet {

using nlohmann::json;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

FacetKind kind_of(const FilterExpr& expr) {
    return std::visit(overloaded{
                          [](const CategoricalIn&) { return FacetKind::Categorical; },
                          [](const NumericCmp&) { return FacetKind::Numeric; },
                          [](const NumericRange&) { return FacetKind::Numeric; },
                          [](const NumericExclude&) { return FacetKind::Numeric; },
                          [](const TemporalOn&) { return FacetKind::Temporal; },
                          [](const TemporalBefore&) { return FacetKind::Temporal; },
                          [](const TemporalAfter&) { return FacetKind::Temporal; },
                          [](const TemporalInterval&) { return FacetKind::Temporal; },
                          [](const TaxonomicUnder&) { return FacetKind::Taxonomic; },
                      },
                      expr);
}

std::string_view to_string(CmpOp op) {
    switch (op) {
    case CmpOp::Less: return "<";
    case CmpOp::LessEqual: return "<=";
    case CmpOp::Greater: return ">";
    case CmpOp::GreaterEqual: return ">=";
    case CmpOp::Equal: return "=";
    case CmpOp::NotEqual: return "!=";
    }
    return "?";
}

CmpOp parse_cmp_op(std::string_view s) {
    if (s == "<" || s == "lt") return CmpOp::Less;
    if (s == "<=" || s == "≤" || s == "le") return CmpOp::LessEqual;
    if (s == ">" || s == "gt") return CmpOp::Greater;
    if (s == ">=" || s == "≥" || s == "ge") return CmpOp::GreaterEqual;
    if (s == "=" || s == "==" || s == "eq") return CmpOp::Equal;
    if (s == "!=" || s == "≠" || s == "ne") return CmpOp::NotEqual;
    throw Error(ErrorCode::InvalidRequest, "unknown comparison operator '" + std::string(s) + "'", {{"op", std::string(s)}});
}

// ---------------------------------------------------------------------------
// JSON codec

namespace {

[[noreturn]] void bad(const std::string& what, json detail = nullptr) {
    throw Error(ErrorCode::InvalidRequest, what, std::move(detail));
}

const json& field(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) bad(std::string("filter is missing field '") + key + "'", {{"field", key}});
    return *it;
}

double number(const json& j, const char* key) {
    const auto& f = field(j, key);
    if (!f.is_number()) bad(std::string("filter field '") + key + "' must be a number", {{"field", key}});
    auto x = f.get<double>();
    if (!std::isfinite(x)) bad(std::string("filter field '") + key + "' must be finite", {{"field", key}});
    return x;
}

std::string string(const json& j, const char* key) {
    const auto& f = field(j, key);
    if (!f.is_string()) bad(std::string("filter field '") + key + "' must be a string", {{"field", key}});
    return f.get<std::string>();
}

bool flag(const json& j, const char* key, bool fallback) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    if (!it->is_boolean()) bad(std::string("filter field '") + key + "' must be a boolean", {{"field", key}});
    return it->get<bool>();
}

Date date(const json& j, const char* key) {
    try {
        return Date::parse(string(j, key));
    } catch (const Error& e) {
        if (e.code() == ErrorCode::InvalidRequest) throw;
        bad(e.what(), {{"field", key}});
    }
}

std::vector<std::string> strings(const json& f, const char* key) {
    if (!f.is_array()) bad(std::string("filter field '") + key + "' must be an array", {{"field", key}});
    std::vector<std::string> out;
    for (const auto& s : f) {
        if (!s.is_string()) bad(std::string("filter field '") + key + "' must hold strings", {{"field", key}});
        out.push_back(s.get<std::string>());
    }
    return out;
}

}  // namespace

FilterExpr filter_expr_from_json(const json& j) {
    if (!j.is_object()) bad("filter expression must be an object");
    auto type = string(j, "type");
    if (type == "categorical_in") {
        auto values = strings(field(j, "values"), "values");
        if (values.empty()) bad("categorical_in needs at least one value");
        return CategoricalIn{std::move(values)};
    }
    if (type == "numeric_cmp") return NumericCmp{parse_cmp_op(string(j, "op")), number(j, "value")};
    if (type == "numeric_range") {
        NumericRange r{number(j, "low"), number(j, "high"), flag(j, "low_inclusive", true), flag(j, "high_inclusive", true)};
        if (r.low > r.high) bad("numeric_range needs low <= high", {{"low", r.low}, {"high", r.high}});
        return r;
    }
    if (type == "numeric_exclude") {
        const auto& f = field(j, "values");
        if (!f.is_array() || f.empty()) bad("numeric_exclude needs a non-empty array of numbers");
        NumericExclude ex;
        for (const auto& x : f) {
            if (!x.is_number() || !std::isfinite(x.get<double>())) bad("numeric_exclude values must be finite numbers");
            ex.values.push_back(x.get<double>());
        }
        return ex;
    }
    if (type == "temporal_on") return TemporalOn{date(j, "date")};
    if (type == "temporal_before") return TemporalBefore{date(j, "date")};
    if (type == "temporal_after") return TemporalAfter{date(j, "date")};
    if (type == "temporal_interval") {
        TemporalInterval t{date(j, "start"), date(j, "end")};
        if (t.end < t.start) bad("temporal_interval needs start <= end", {{"start", t.start.iso()}, {"end", t.end.iso()}});
        return t;
    }
    if (type == "taxonomic_under") {
        TaxonomicUnder t;
        if (j.contains("ancestors")) {
            t.ancestors = strings(j["ancestors"], "ancestors");
        } else {
            t.ancestors.push_back(string(j, "ancestor"));
        }
        if (t.ancestors.empty() ||
            std::any_of(t.ancestors.begin(), t.ancestors.end(), [](const std::string& s) { return s.empty(); })) {
            bad("taxonomic_under needs non-empty ancestor ids");
        }
        if (auto it = j.find("level"); it != j.end() && !it->is_null()) {
            if (!it->is_string()) bad("filter field 'level' must be a string", {{"field", "level"}});
            t.level = parse_level(it->get<std::string>());
        }
        return t;
    }
    bad("unknown filter type '" + type + "'", {{"type", type}});
}

FilterSet filter_set_from_json(const json& j) {
    if (!j.is_object()) bad("filter set must be an object keyed by property id");
    FilterSet out;
    for (const auto& [prop, list] : j.items()) {
        if (prop.empty()) bad("property ids must be non-empty");
        if (!list.is_array()) bad("filters for '" + prop + "' must be an array", {{"property", prop}});
        if (list.empty()) bad("filters for '" + prop + "' must not be empty", {{"property", prop}});
        auto& exprs = out[prop];
        std::size_t index = 0;
        for (const auto& e : list) {
            try {
                exprs.push_back(filter_expr_from_json(e));
            } catch (const Error& err) {
                throw Error(err.code(), "property '" + prop + "' filter " + std::to_string(index) + ": " + err.what(),
                            {{"property", prop}, {"index", index}, {"cause", err.detail()}});
            }
            ++index;
        }
    }
    return out;
}

FilterSet parse_filter_set(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        bad(std::string("malformed filter JSON: ") + e.what(), {{"position", e.byte}});
    }
    return filter_set_from_json(j);
}

json to_json(const FilterExpr& expr) {
    return std::visit(overloaded{
                          [](const CategoricalIn& e) -> json { return {{"type", "categorical_in"}, {"values", e.values}}; },
                          [](const NumericCmp& e) -> json {
                              return {{"type", "numeric_cmp"}, {"op", to_string(e.op)}, {"value", e.bound}};
                          },
                          [](const NumericRange& e) -> json {
                              return {{"type", "numeric_range"}, {"low", e.low}, {"high", e.high},
                                      {"low_inclusive", e.low_inclusive}, {"high_inclusive", e.high_inclusive}};
                          },
                          [](const NumericExclude& e) -> json { return {{"type", "numeric_exclude"}, {"values", e.values}}; },
                          [](const TemporalOn& e) -> json { return {{"type", "temporal_on"}, {"date", e.date.iso()}}; },
                          [](const TemporalBefore& e) -> json { return {{"type", "temporal_before"}, {"date", e.date.iso()}}; },
                          [](const TemporalAfter& e) -> json { return {{"type", "temporal_after"}, {"date", e.date.iso()}}; },
                          [](const TemporalInterval& e) -> json {
                              return {{"type", "temporal_interval"}, {"start", e.start.iso()}, {"end", e.end.iso()}};
                          },
                          [](const TaxonomicUnder& e) -> json {
                              json j{{"type", "taxonomic_under"}, {"ancestors", e.ancestors}};
                              if (e.level) j["level"] = to_string(*e.level);
                              return j;
                          },
                      },
                      expr);
}

json to_json(const FilterSet& filters) {
    json j = json::object();
    for (const auto& [prop, exprs] : filters) {
        json list = json::array();
        for (const auto& e : exprs) list.push_back(to_json(e));
        j[prop] = std::move(list);
    }
    return j;
}

std::string serialize(const FilterSet& filters) { return to_json(filters).dump(); }

// ---------------------------------------------------------------------------
// Validation

FilterSet validate_filters(const FilterSet& filters, std::span<const FacetSpec> facets) {
    json mismatches = json::array();
    json unknown = json::array();
    for (const auto& [prop, exprs] : filters) {
        auto it = std::find_if(facets.begin(), facets.end(), [&](const FacetSpec& f) { return f.property_id == prop; });
        if (it == facets.end()) {
            unknown.push_back(prop);
            continue;
        }
        for (std::size_t i = 0; i < exprs.size(); ++i) {
            auto got = kind_of(exprs[i]);
            // A degraded facet still names a taxonomic column.
            bool degraded_taxonomic = it->degraded && got == FacetKind::Taxonomic;
            if (got != it->kind && !degraded_taxonomic) {
                mismatches.push_back({{"property", prop},
                                      {"index", i},
                                      {"expected", to_string(it->kind)},
                                      {"got", to_string(got)}});
            }
        }
    }
    if (mismatches.empty() && unknown.empty()) return filters;

    json detail{{"mismatches", mismatches}, {"unknown_properties", unknown}};
    if (!mismatches.empty()) {
        const auto& first = mismatches.front();
        throw Error(ErrorCode::KindMismatch,
                    "filter kind mismatch on '" + first["property"].get<std::string>() + "': expected " +
                        first["expected"].get<std::string>() + ", got " + first["got"].get<std::string>(),
                    std::move(detail));
    }
    throw Error(ErrorCode::UnknownProperty, "no facet for property '" + unknown.front().get<std::string>() + "'",
                std::move(detail));
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

bool compare(double x, CmpOp op, double bound) {
    switch (op) {
    case CmpOp::Less: return x < bound;
    case CmpOp::LessEqual: return x <= bound;
    case CmpOp::Greater: return x > bound;
    case CmpOp::GreaterEqual: return x >= bound;
    case CmpOp::Equal: return x == bound;
    case CmpOp::NotEqual: return x != bound;
    }
    return false;
}

bool in_range(double x, const NumericRange& r) {
    bool lo = r.low_inclusive ? x >= r.low : x > r.low;
    bool hi = r.high_inclusive ? x <= r.high : x < r.high;
    return lo && hi;
}

bool chain_matches(const AncestorChain& chain, const TaxonomicUnder& t) {
    if (t.level) {
        const auto* node = chain.ancestor_at(*t.level);
        return node && std::find(t.ancestors.begin(), t.ancestors.end(), node->id) != t.ancestors.end();
    }
    return std::any_of(t.ancestors.begin(), t.ancestors.end(), [&](const std::string& a) { return chain.contains(a); });
}

// Non-taxonomic part of matching; the chain is supplied by the caller.
bool match_with_chain(const Value& value, const FilterExpr& expr, const AncestorChain* chain) {
    return std::visit(
        overloaded{
            [&](const CategoricalIn& e) {
                auto shown = display_string(value);
                return std::any_of(e.values.begin(), e.values.end(), [&](const std::string& s) { return iequals(shown, s); });
            },
            [&](const NumericCmp& e) { return compare(std::get<Quantity>(value).magnitude, e.op, e.bound); },
            [&](const NumericRange& e) { return in_range(std::get<Quantity>(value).magnitude, e); },
            [&](const NumericExclude& e) {
                auto x = std::get<Quantity>(value).magnitude;
                return std::find(e.values.begin(), e.values.end(), x) == e.values.end();
            },
            [&](const TemporalOn& e) {
                const auto& d = std::get<CalendarDate>(value);
                return d.start <= e.date && e.date <= d.end;
            },
            [&](const TemporalBefore& e) { return std::get<CalendarDate>(value).end < e.date; },
            [&](const TemporalAfter& e) { return std::get<CalendarDate>(value).start > e.date; },
            [&](const TemporalInterval& e) {
                const auto& d = std::get<CalendarDate>(value);
                return d.start <= e.end && e.start <= d.end;
            },
            [&](const TaxonomicUnder& e) { return chain != nullptr && chain_matches(*chain, e); },
        },
        expr);
}

}  // namespace

bool compatible(const Value& value, const FilterExpr& expr) {
    switch (kind_of(expr)) {
    case FacetKind::Categorical: return true;
    case FacetKind::Numeric: return std::holds_alternative<Quantity>(value);
    case FacetKind::Temporal: return std::holds_alternative<CalendarDate>(value);
    case FacetKind::Taxonomic: {
        const auto* e = std::get_if<EntityRef>(&value);
        return e && e->link.has_value();
    }
    }
    return false;
}

bool match_value(const Value& value, const FilterExpr& expr, HierarchyProvider* provider, std::size_t max_depth) {
    if (!compatible(value, expr)) {
        throw Error(ErrorCode::KindMismatch,
                    "cannot test a " + std::string(to_string(kind_of(value))) + " value with a " +
                        std::string(to_string(kind_of(expr))) + " filter",
                    {{"value_kind", to_string(kind_of(value))}, {"filter_kind", to_string(kind_of(expr))}});
    }
    if (!std::holds_alternative<TaxonomicUnder>(expr)) return match_with_chain(value, expr, nullptr);
    if (!provider) {
        throw Error(ErrorCode::ProviderUnavailable, "no hierarchy provider configured", {{"cause", "unconfigured"}});
    }
    auto chain = resolve_chain(*provider, std::get<EntityRef>(value), max_depth);
    return match_with_chain(value, expr, &chain);
}

FilterOutcome apply_filters(const Comparison& comparison, const FilterSet& filters, const TaxonomyContext& ctx) {
    FilterOutcome out;

    // Resolve every linked entity under a taxonomic filter once, up front.
    std::map<std::string, AncestorChain> chains;
    std::set<std::string> degraded;
    for (const auto& [prop, exprs] : filters) {
        bool taxonomic = std::any_of(exprs.begin(), exprs.end(),
                                     [](const FilterExpr& e) { return std::holds_alternative<TaxonomicUnder>(e); });
        if (!taxonomic) continue;

        std::vector<std::string> ids;
        for (std::size_t r = 0; r < comparison.rows().size(); ++r) {
            const auto* cell = comparison.cell(r, prop);
            if (!cell) continue;
            for (const auto& v : *cell) {
                const auto* e = std::get_if<EntityRef>(&v);
                if (e && e->link && (!ctx.provider || e->link->graph == ctx.provider->graph())) {
                    ids.push_back(e->link->external_id);
                }
            }
        }
        if (ids.empty()) continue;
        if (!ctx.provider) {
            if (!ctx.degrade) {
                throw Error(ErrorCode::ProviderUnavailable, "no hierarchy provider configured",
                            {{"property", prop}, {"cause", "unconfigured"}});
            }
            degraded.insert(prop);
            continue;
        }
        for (auto& [id, result] : resolve_many_ids(*ctx.provider, ids, ctx.max_depth, ctx.concurrency)) {
            if (auto* chain = std::get_if<AncestorChain>(&result)) {
                chains.emplace(id, std::move(*chain));
                continue;
            }
            const auto& err = std::get<Error>(result);
            if (err.code() != ErrorCode::ProviderUnavailable) continue;
            if (!ctx.degrade) {
                throw Error(ErrorCode::ProviderUnavailable, err.what(), {{"property", prop}, {"cause", err.detail()}});
            }
            degraded.insert(prop);
        }
    }

    auto value_matches = [&](const Value& v, const std::vector<FilterExpr>& exprs) {
        for (const auto& expr : exprs) {
            if (!compatible(v, expr)) return false;
            const AncestorChain* chain = nullptr;
            if (std::holds_alternative<TaxonomicUnder>(expr)) {
                const auto& link = *std::get<EntityRef>(v).link;
                if (ctx.provider && link.graph != ctx.provider->graph()) return false;
                auto it = chains.find(link.external_id);
                if (it == chains.end()) return false;
                chain = &it->second;
            }
            if (!match_with_chain(v, expr, chain)) return false;
        }
        return true;
    };

    for (std::size_t r = 0; r < comparison.rows().size(); ++r) {
        bool keep = true;
        for (const auto& [prop, exprs] : filters) {
            const auto* cell = comparison.cell(r, prop);
            if (!cell || std::none_of(cell->begin(), cell->end(), [&](const Value& v) { return value_matches(v, exprs); })) {
                keep = false;
                break;
            }
        }
        if (keep) out.surviving.push_back(comparison.rows()[r].contribution_id);
    }
    out.degraded.assign(degraded.begin(), degraded.end());
    return out;
}

std::string describe(const FilterExpr& expr, const std::map<std::string, std::string>& labels) {
    auto join = [](const auto& items, auto&& render) {
        std::string s;
        for (const auto& x : items) {
            if (!s.empty()) s += ", ";
            s += render(x);
        }
        return s;
    };
    return std::visit(
        overloaded{
            [&](const CategoricalIn& e) { return "in {" + join(e.values, [](const std::string& s) { return s; }) + "}"; },
            [&](const NumericCmp& e) { return std::string(to_string(e.op)) + " " + format_number(e.bound); },
            [&](const NumericRange& e) {
                return std::string(e.low_inclusive ? "[" : "(") + format_number(e.low) + ", " + format_number(e.high) +
                       (e.high_inclusive ? "]" : ")");
            },
            [&](const NumericExclude& e) { return "not {" + join(e.values, format_number) + "}"; },
            [&](const TemporalOn& e) { return "on " + e.date.iso(); },
            [&](const TemporalBefore& e) { return "before " + e.date.iso(); },
            [&](const TemporalAfter& e) { return "after " + e.date.iso(); },
            [&](const TemporalInterval& e) { return "overlaps " + e.start.iso() + " .. " + e.end.iso(); },
            [&](const TaxonomicUnder& e) {
                auto s = "under " + join(e.ancestors, [&](const std::string& id) {
                             auto it = labels.find(id);
                             return it == labels.end() ? id : it->second;
                         });
                if (e.level) s += " (" + std::string(to_string(*e.level)) + ")";
                return s;
            },
        },
        expr);
}

}  // namespace kgfacet
