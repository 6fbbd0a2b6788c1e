#include "kgfacet/facet_engine.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>

#include "kgfacet/text.hpp"

namespace kgfacet {

using nlohmann::json;

std::string_view to_string(FacetKind kind) {
    switch (kind) {
    case FacetKind::Categorical: return "categorical";
    case FacetKind::Numeric: return "numeric";
    case FacetKind::Temporal: return "temporal";
    case FacetKind::Taxonomic: return "taxonomic";
    }
    return "?";
}

FacetKind parse_facet_kind(std::string_view name) {
    for (auto k : {FacetKind::Categorical, FacetKind::Numeric, FacetKind::Temporal, FacetKind::Taxonomic}) {
        if (iequals(name, to_string(k))) return k;
    }
    throw Error(ErrorCode::InvalidRequest, "unknown facet kind '" + std::string(name) + "'");
}

namespace {

bool links_into(const Value& v, std::span<const std::string> graphs) {
    const auto* e = std::get_if<EntityRef>(&v);
    return e && e->link && std::find(graphs.begin(), graphs.end(), e->link->graph) != graphs.end();
}

void rank(std::vector<CandidateCount>& list) {
    std::vector<std::size_t> order(list.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        const auto& a = list[i];
        const auto& b = list[j];
        if (a.count != b.count) return a.count > b.count;
        if (a.label != b.label) return a.label < b.label;
        return a.value < b.value;
    });
    std::vector<CandidateCount> out;
    out.reserve(list.size());
    for (auto i : order) out.push_back(std::move(list[i]));
    list = std::move(out);
}

struct Column {
    std::vector<const std::vector<Value>*> cells;  // rows holding a value
    std::vector<const Value*> values;
};

Column gather(const Comparison& c, const std::string& prop) {
    Column col;
    for (std::size_t r = 0; r < c.rows().size(); ++r) {
        if (const auto* cell = c.cell(r, prop)) {
            col.cells.push_back(cell);
            for (const auto& v : *cell) col.values.push_back(&v);
        }
    }
    return col;
}

CategoricalSummary categorical(const Column& col) {
    std::unordered_map<std::string, std::size_t> counts;
    counts.reserve(col.values.size());
    for (const auto* v : col.values) ++counts[display_string(*v)];
    CategoricalSummary s;
    s.values.reserve(counts.size());
    for (auto& [value, n] : counts) s.values.push_back({value, value, n});
    rank(s.values);
    return s;
}

NumericSummary numeric(const Column& col) {
    NumericSummary s;
    std::set<std::optional<std::string>> units;
    bool first = true;
    for (const auto* cell : col.cells) {
        bool any = false;
        for (const auto& v : *cell) {
            const auto* q = std::get_if<Quantity>(&v);
            if (!q) continue;
            any = true;
            ++s.value_count;
            units.insert(q->unit);
            if (first || q->magnitude < s.min) s.min = q->magnitude;
            if (first || q->magnitude > s.max) s.max = q->magnitude;
            first = false;
        }
        if (any) ++s.count;
    }
    for (const auto& u : units) {
        if (u) s.units.push_back(*u);
    }
    s.mixed_units = units.size() > 1;
    return s;
}

TemporalSummary temporal(const Column& col) {
    TemporalSummary s;
    bool first = true;
    for (const auto* cell : col.cells) {
        bool any = false;
        for (const auto& v : *cell) {
            const auto* d = std::get_if<CalendarDate>(&v);
            if (!d) continue;
            any = true;
            ++s.value_count;
            if (first || d->start < s.earliest) s.earliest = d->start;
            if (first || d->end > s.latest) s.latest = d->end;
            first = false;
        }
        if (any) ++s.count;
    }
    return s;
}

TaxonomicSummary taxonomic_leaves(const Column& col, std::span<const std::string> graphs) {
    TaxonomicSummary s;
    std::map<std::string, CandidateCount> leaves;
    for (const auto* v : col.values) {
        if (!links_into(*v, graphs)) continue;
        const auto& e = std::get<EntityRef>(*v);
        if (s.graph.empty()) s.graph = e.link->graph;
        auto [it, fresh] = leaves.try_emplace(e.link->external_id, CandidateCount{e.link->external_id, e.display(), 0});
        ++it->second.count;
    }
    for (auto& [id, cc] : leaves) s.leaves.push_back(std::move(cc));
    rank(s.leaves);
    return s;
}

bool provider_down(const ChainResult& r) {
    const auto* e = std::get_if<Error>(&r);
    return e && e->code() == ErrorCode::ProviderUnavailable;
}

}  // namespace

namespace {

template <class Range, class Get>
FacetKind majority_kind(const Range& values, Get get, std::span<const std::string> graphs) {
    std::size_t quantities = 0, dates = 0, linked = 0;
    for (const auto& item : values) {
        const Value& v = get(item);
        quantities += std::holds_alternative<Quantity>(v);
        dates += std::holds_alternative<CalendarDate>(v);
        linked += links_into(v, graphs);
    }
    auto total = std::size(values);
    if (2 * quantities > total) return FacetKind::Numeric;
    if (2 * dates > total) return FacetKind::Temporal;
    if (2 * linked > total) return FacetKind::Taxonomic;
    return FacetKind::Categorical;
}

}  // namespace

FacetKind infer_kind(std::span<const Value> values, std::span<const std::string> graphs) {
    return majority_kind(values, [](const Value& v) -> const Value& { return v; }, graphs);
}

std::vector<FacetSpec> infer_facets(const Comparison& comparison, const FacetOptions& options) {
    std::vector<FacetSpec> out;
    const auto& ctx = options.taxonomy;
    for (const auto& column : comparison.columns()) {
        auto col = gather(comparison, column.id);
        if (col.values.empty()) continue;

        FacetSpec spec;
        spec.property_id = column.id;
        spec.label = column.label;
        spec.rows_with_value = col.cells.size();
        spec.kind = majority_kind(col.values, [](const Value* v) -> const Value& { return *v; }, options.hierarchy_graphs);

        switch (spec.kind) {
        case FacetKind::Numeric: spec.summary = numeric(col); break;
        case FacetKind::Temporal: spec.summary = temporal(col); break;
        case FacetKind::Categorical: spec.summary = categorical(col); break;
        case FacetKind::Taxonomic: {
            auto tax = taxonomic_leaves(col, options.hierarchy_graphs);
            if (!ctx.provider) {
                tax.levels.assign(std::begin(kAllLevels), std::end(kAllLevels));
                spec.summary = std::move(tax);
                break;
            }
            std::vector<std::string> ids;
            for (const auto& leaf : tax.leaves) ids.push_back(leaf.value);
            auto chains = resolve_many_ids(*ctx.provider, ids, ctx.max_depth, ctx.concurrency);
            auto failed = std::find_if(chains.begin(), chains.end(), [](const auto& kv) { return provider_down(kv.second); });
            if (failed != chains.end()) {
                if (!ctx.degrade) {
                    const auto& e = std::get<Error>(failed->second);
                    throw Error(ErrorCode::ProviderUnavailable, e.what(),
                                {{"property", column.id}, {"cause", e.detail()}});
                }
                spec.kind = FacetKind::Categorical;
                spec.summary = categorical(col);
                spec.degraded = true;
                break;
            }
            std::set<LevelCode> reached{LevelCode::Leaf};
            for (const auto& [id, r] : chains) {
                if (const auto* chain = std::get_if<AncestorChain>(&r)) {
                    for (const auto& n : chain->nodes) {
                        if (auto l = n.level()) reached.insert(*l);
                    }
                }
            }
            tax.levels.assign(reached.begin(), reached.end());
            spec.summary = std::move(tax);
            break;
        }
        }
        out.push_back(std::move(spec));
    }
    return out;
}

CandidateList candidate_values(const FacetSpec& facet, std::string_view prefix, std::size_t cap) {
    const std::vector<CandidateCount>* source = nullptr;
    if (const auto* c = std::get_if<CategoricalSummary>(&facet.summary)) source = &c->values;
    if (const auto* t = std::get_if<TaxonomicSummary>(&facet.summary)) source = &t->leaves;
    if (!source || (facet.kind != FacetKind::Categorical && facet.kind != FacetKind::Taxonomic)) {
        throw Error(ErrorCode::WrongFacetKind,
                    "candidate values need a categorical or taxonomic facet; '" + facet.property_id + "' is " +
                        std::string(to_string(facet.kind)),
                    {{"property", facet.property_id}, {"kind", to_string(facet.kind)}});
    }
    CandidateList out;
    for (const auto& c : *source) {
        if (!istarts_with(c.label, prefix)) continue;
        ++out.total;
        if (out.entries.size() < cap) out.entries.push_back(c);
    }
    out.truncated = out.total > out.entries.size();
    return out;
}

std::vector<CandidateCount> facet_values_at_level(const FacetSpec& facet, LevelCode level,
                                                  const TaxonomyContext& ctx) {
    const auto* tax = std::get_if<TaxonomicSummary>(&facet.summary);
    if (!tax || facet.kind != FacetKind::Taxonomic) {
        throw Error(ErrorCode::WrongFacetKind, "'" + facet.property_id + "' is not a taxonomic facet",
                    {{"property", facet.property_id}, {"kind", to_string(facet.kind)}});
    }
    if (level == LevelCode::Leaf) return tax->leaves;
    if (!ctx.provider) {
        throw Error(ErrorCode::ProviderUnavailable, "no hierarchy provider configured",
                    {{"property", facet.property_id}, {"cause", "unconfigured"}});
    }

    std::vector<std::string> ids;
    for (const auto& leaf : tax->leaves) ids.push_back(leaf.value);
    auto chains = resolve_many_ids(*ctx.provider, ids, ctx.max_depth, ctx.concurrency);

    std::map<std::string, CandidateCount> buckets;
    std::size_t unclassified = 0;
    for (const auto& leaf : tax->leaves) {
        const auto& result = chains.at(leaf.value);
        if (provider_down(result)) {
            const auto& e = std::get<Error>(result);
            throw Error(ErrorCode::ProviderUnavailable, e.what(), {{"property", facet.property_id}, {"cause", e.detail()}});
        }
        const auto* chain = std::get_if<AncestorChain>(&result);
        const TaxonomyNode* node = chain ? chain->ancestor_at(level) : nullptr;
        if (!node) {
            unclassified += leaf.count;
            continue;
        }
        auto [it, fresh] = buckets.try_emplace(node->id, CandidateCount{node->id, node->label, 0});
        it->second.count += leaf.count;
    }
    std::vector<CandidateCount> out;
    for (auto& [id, b] : buckets) out.push_back(std::move(b));
    rank(out);
    if (unclassified > 0) {
        out.push_back({std::string(kUnclassified), std::string(kUnclassified), unclassified});
    }
    return out;
}

json to_json(const CandidateCount& c) { return {{"value", c.value}, {"label", c.label}, {"count", c.count}}; }

json to_json(const CandidateList& list) {
    json entries = json::array();
    for (const auto& e : list.entries) entries.push_back(to_json(e));
    return {{"candidates", std::move(entries)}, {"truncated", list.truncated}, {"total", list.total}};
}

json to_json(const FacetSpec& facet) {
    json j{{"property", facet.property_id},
           {"label", facet.label},
           {"kind", to_string(facet.kind)},
           {"rows_with_value", facet.rows_with_value},
           {"degraded", facet.degraded}};
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, CategoricalSummary>) {
                json values = json::array();
                for (const auto& c : s.values) values.push_back(to_json(c));
                j["values"] = std::move(values);
            } else if constexpr (std::is_same_v<T, NumericSummary>) {
                j["min"] = s.min;
                j["max"] = s.max;
                j["count"] = s.count;
                j["value_count"] = s.value_count;
                j["units"] = s.units;
                j["mixed_units"] = s.mixed_units;
            } else if constexpr (std::is_same_v<T, TemporalSummary>) {
                j["earliest"] = s.earliest.iso();
                j["latest"] = s.latest.iso();
                j["count"] = s.count;
                j["value_count"] = s.value_count;
            } else {
                json leaves = json::array();
                for (const auto& c : s.leaves) leaves.push_back(to_json(c));
                json levels = json::array();
                for (auto l : s.levels) levels.push_back(to_string(l));
                j["graph"] = s.graph;
                j["leaves"] = std::move(leaves);
                j["levels"] = std::move(levels);
            }
        },
        facet.summary);
    if (facet.degraded) j["warning"] = "hierarchy provider unavailable; showing plain labels";
    return j;
}

}  // namespace kgfacet
