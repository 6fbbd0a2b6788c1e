#include "kgfacet/service.hpp"

#include <cstdlib>
#include <fstream>

#include "kgfacet/remote_provider.hpp"

namespace kgfacet {

using nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Configuration

namespace {

[[noreturn]] void bad_config(const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); }

fs::path resolve_path(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_relative() && !base.empty() ? base / path : path;
}

void parse_listen(const std::string& spec, std::string& host, int& port) {
    auto colon = spec.rfind(':');
    if (colon == std::string::npos) bad_config("listen address must be host:port, got '" + spec + "'");
    host = spec.substr(0, colon);
    try {
        port = std::stoi(spec.substr(colon + 1));
    } catch (const std::exception&) {
        bad_config("listen port is not a number in '" + spec + "'");
    }
    if (port < 0 || port > 65535) bad_config("listen port out of range in '" + spec + "'");
}

}  // namespace

ServiceConfig ServiceConfig::from_json(const json& j, const fs::path& base_dir) {
    if (!j.is_object()) bad_config("configuration must be a JSON object");
    ServiceConfig c;
    try {
        if (j.contains("dataset")) c.dataset = resolve_path(base_dir, j["dataset"].get<std::string>());
        if (j.contains("journal")) c.journal = resolve_path(base_dir, j["journal"].get<std::string>());
        if (j.contains("provider")) {
            const auto& p = j["provider"];
            if (p.contains("remote")) {
                const auto& r = p["remote"];
                c.provider_url = r.at("base_url").get<std::string>();
                c.remote_timeout = std::chrono::milliseconds(r.value("timeout_ms", 3000));
                c.remote_retries = r.value("retries", 1);
                c.remote_max_in_flight = r.value("max_in_flight", std::size_t{8});
            }
            if (p.contains("fixture")) c.hierarchy_fixture = resolve_path(base_dir, p["fixture"].get<std::string>());
        }
        c.graph = j.value("graph", c.graph);
        c.degrade = j.value("degrade", c.degrade);
        if (j.contains("cache")) {
            c.cache = j["cache"].value("enabled", false);
            c.cache_ttl = std::chrono::seconds(j["cache"].value("ttl_seconds", 60));
        }
        if (j.contains("listen")) parse_listen(j["listen"].get<std::string>(), c.listen_host, c.listen_port);
        c.candidate_cap = j.value("candidate_cap", c.candidate_cap);
        c.public_base_url = j.value("public_base_url", c.public_base_url);
    } catch (const json::exception& e) {
        bad_config(std::string("configuration: ") + e.what());
    }
    return c;
}

ServiceConfig ServiceConfig::load(const fs::path& path) {
    std::ifstream in(path);
    if (!in) bad_config("cannot read configuration '" + path.string() + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("configuration is not JSON: ") + e.what(),
                    {{"position", e.byte}});
    }
    auto c = from_json(j, path.parent_path());
    c.apply_env_overrides();
    return c;
}

void ServiceConfig::apply_env_overrides() {
    if (const char* listen = std::getenv("KGFACET_LISTEN"); listen && *listen) {
        parse_listen(listen, listen_host, listen_port);
    }
    if (const char* url = std::getenv("KGFACET_PROVIDER_URL"); url && *url) {
        provider_url = url;
        hierarchy_fixture.reset();
    }
}

void ServiceConfig::validate() const {
    if (provider_url.has_value() == hierarchy_fixture.has_value()) {
        bad_config("configure exactly one hierarchy provider (remote base_url or fixture)");
    }
    if (dataset.empty()) bad_config("no dataset configured");
    if (std::ifstream probe(dataset); !probe) bad_config("dataset '" + dataset.string() + "' is not readable");
    if (hierarchy_fixture) {
        if (std::ifstream probe(*hierarchy_fixture); !probe) {
            bad_config("hierarchy fixture '" + hierarchy_fixture->string() + "' is not readable");
        }
    }
    if (!journal.empty() && fs::exists(journal)) {
        if (std::ifstream probe(journal); !probe) bad_config("journal '" + journal.string() + "' is not readable");
    }
    if (candidate_cap == 0) bad_config("candidate_cap must be positive");
}

std::shared_ptr<HierarchyProvider> make_provider(const ServiceConfig& config) {
    std::shared_ptr<HierarchyProvider> provider;
    if (config.provider_url) {
        provider = std::make_shared<RemoteProvider>(RemoteProviderOptions{
            *config.provider_url, config.graph, config.remote_timeout, config.remote_retries, config.remote_max_in_flight});
    } else if (config.hierarchy_fixture) {
        provider = std::shared_ptr<FixtureProvider>(
            new FixtureProvider(FixtureProvider::from_file(*config.hierarchy_fixture, config.graph)));
    } else {
        bad_config("no hierarchy provider configured");
    }
    if (config.cache) {
        provider = std::make_shared<CachingProvider>(
            provider, std::chrono::duration_cast<std::chrono::milliseconds>(config.cache_ttl));
    }
    return provider;
}

// ---------------------------------------------------------------------------
// Service

json parse_body(std::string_view text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::InvalidRequest, std::string("malformed JSON body: ") + e.what(), {{"position", e.byte}});
    }
}

SearchService::SearchService(std::shared_ptr<const StoreSnapshot> snapshot, std::shared_ptr<HierarchyProvider> provider,
                             std::shared_ptr<PermalinkStore> permalinks, ServiceOptions options)
    : provider_(std::move(provider)), permalinks_(std::move(permalinks)), options_(std::move(options)) {
    if (!permalinks_) permalinks_ = std::make_shared<PermalinkStore>();
    replace_snapshot(std::move(snapshot));
}

std::unique_ptr<SearchService> SearchService::from_config(const ServiceConfig& config) {
    config.validate();
    auto snapshot = std::make_shared<const StoreSnapshot>(ingest_file(config.dataset));
    auto provider = make_provider(config);
    auto permalinks = std::make_shared<PermalinkStore>(config.journal);
    ServiceOptions options;
    options.degrade = config.degrade;
    options.candidate_cap = config.candidate_cap;
    options.public_base_url = config.public_base_url;
    return std::make_unique<SearchService>(std::move(snapshot), std::move(provider), std::move(permalinks), options);
}

void SearchService::replace_snapshot(std::shared_ptr<const StoreSnapshot> snapshot) {
    if (!snapshot) snapshot = std::make_shared<const StoreSnapshot>();
    auto next = std::make_shared<State>();
    next->comparisons = build_problem_comparisons(*snapshot);
    next->snapshot = std::move(snapshot);
    std::lock_guard lock(state_mu_);
    state_ = std::move(next);
}

std::shared_ptr<const SearchService::State> SearchService::state() const {
    std::lock_guard lock(state_mu_);
    return state_;
}

std::shared_ptr<const StoreSnapshot> SearchService::snapshot() const { return state()->snapshot; }

TaxonomyContext SearchService::taxonomy() const {
    return TaxonomyContext{provider_.get(), options_.degrade, options_.max_depth, options_.concurrency};
}

Comparison SearchService::find_comparison(const State& st, const std::string& id) const {
    for (const auto& c : st.comparisons) {
        if (c.id() == id) return c;
    }
    if (auto p = permalinks_->find(id)) {
        return load_permalink(*permalinks_, *st.snapshot, id, "saved: " + p->comparison_id).comparison;
    }
    throw Error(ErrorCode::NotFound, "no comparison '" + id + "'", {{"id", id}});
}

std::vector<FacetSpec> SearchService::facet_specs(const Comparison& comparison) const {
    FacetOptions opts;
    if (provider_) opts.hierarchy_graphs = {provider_->graph()};
    opts.taxonomy = taxonomy();
    return infer_facets(comparison, opts);
}

const FacetSpec& SearchService::facet_for(const std::vector<FacetSpec>& facets, const std::string& property) const {
    for (const auto& f : facets) {
        if (f.property_id == property) return f;
    }
    throw Error(ErrorCode::NotFound, "no facet for property '" + property + "'", {{"property", property}});
}

json SearchService::list_comparisons() const {
    auto st = state();
    json out = json::array();
    for (const auto& c : st->comparisons) {
        out.push_back({{"id", c.id()}, {"label", c.label()}, {"row_count", c.rows().size()}, {"saved", false}});
    }
    for (const auto& p : permalinks_->list()) {
        out.push_back({{"id", p.id},
                       {"label", "saved: " + p.comparison_id},
                       {"row_count", p.surviving_ids.size()},
                       {"saved", true},
                       {"source", p.comparison_id}});
    }
    return out;
}

json SearchService::comparison(const std::string& id) const { return to_json(find_comparison(*state(), id)); }

json SearchService::facets(const std::string& id) const {
    auto c = find_comparison(*state(), id);
    json out = json::array();
    for (const auto& f : facet_specs(c)) out.push_back(to_json(f));
    return out;
}

json SearchService::candidates(const std::string& id, const std::string& property, const std::string& prefix) const {
    auto c = find_comparison(*state(), id);
    auto specs = facet_specs(c);
    auto list = candidate_values(facet_for(specs, property), prefix, options_.candidate_cap);
    auto j = to_json(list);
    j["property"] = property;
    return j;
}

json SearchService::facet_levels(const std::string& id, const std::string& property, const std::string& level) const {
    auto c = find_comparison(*state(), id);
    auto lvl = parse_level(level);
    auto specs = facet_specs(c);
    const auto& spec = facet_for(specs, property);
    json buckets = json::array();
    for (const auto& b : facet_values_at_level(spec, lvl, taxonomy())) buckets.push_back(to_json(b));
    return {{"property", property}, {"level", to_string(lvl)}, {"buckets", std::move(buckets)}};
}

json SearchService::filter(const std::string& id, const json& body) const {
    auto st = state();
    auto c = find_comparison(*st, id);

    const json* filters_json = &body;
    std::map<std::string, LevelCode> levels;
    if (body.is_object() && body.contains("filters") && body["filters"].is_object()) {
        filters_json = &body["filters"];
        if (auto it = body.find("levels"); it != body.end() && !it->is_null()) {
            if (!it->is_object()) throw Error(ErrorCode::InvalidRequest, "'levels' must map property ids to level names");
            for (const auto& [prop, lvl] : it->items()) {
                if (!lvl.is_string()) throw Error(ErrorCode::InvalidRequest, "level for '" + prop + "' must be a string");
                levels[prop] = parse_level(lvl.get<std::string>());
            }
        }
    }
    auto filters = filter_set_from_json(*filters_json);
    for (auto& [prop, exprs] : filters) {
        auto lvl = levels.find(prop);
        if (lvl == levels.end()) continue;
        for (auto& e : exprs) {
            if (auto* t = std::get_if<TaxonomicUnder>(&e); t && !t->level) t->level = lvl->second;
        }
    }

    auto specs = facet_specs(c);
    validate_filters(filters, specs);
    auto outcome = apply_filters(c, filters, taxonomy());

    std::map<std::string, std::string> ancestor_labels;
    if (provider_) {
        for (const auto& [prop, exprs] : filters) {
            for (const auto& e : exprs) {
                const auto* t = std::get_if<TaxonomicUnder>(&e);
                if (!t) continue;
                for (const auto& a : t->ancestors) {
                    if (ancestor_labels.contains(a)) continue;
                    try {
                        ancestor_labels[a] = provider_->resolve(a).label;
                    } catch (const Error&) {
                    }
                }
            }
        }
    }

    json applied = json::array();
    for (const auto& [prop, exprs] : filters) {
        const auto& spec = facet_for(specs, prop);
        json descriptions = json::array();
        json list = json::array();
        std::string chip = spec.label + ":";
        for (std::size_t i = 0; i < exprs.size(); ++i) {
            auto d = describe(exprs[i], ancestor_labels);
            chip += (i ? "; " : " ") + d;
            descriptions.push_back(d);
            list.push_back(to_json(exprs[i]));
        }
        json entry{{"property", prop},
                   {"label", spec.label},
                   {"kind", to_string(spec.kind)},
                   {"filters", std::move(list)},
                   {"descriptions", std::move(descriptions)},
                   {"chip", chip}};
        if (auto lvl = levels.find(prop); lvl != levels.end()) entry["level"] = to_string(lvl->second);
        applied.push_back(std::move(entry));
    }

    return {{"comparison_id", c.id()},
            {"surviving_ids", outcome.surviving},
            {"surviving_count", outcome.surviving.size()},
            {"total_rows", c.rows().size()},
            {"filters", to_json(filters)},
            {"applied", std::move(applied)},
            {"degraded", outcome.degraded}};
}

json SearchService::save(const std::string& id, const json& body) {
    auto st = state();
    auto c = find_comparison(*st, id);
    if (!body.is_object()) throw Error(ErrorCode::InvalidRequest, "save body must be an object");

    FilterSet filters;
    if (auto it = body.find("filters"); it != body.end() && !it->is_null()) filters = filter_set_from_json(*it);
    auto specs = facet_specs(c);
    validate_filters(filters, specs);

    std::vector<std::string> ids;
    if (auto it = body.find("surviving_ids"); it != body.end() && !it->is_null()) {
        if (!it->is_array()) throw Error(ErrorCode::InvalidRequest, "'surviving_ids' must be an array of strings");
        for (const auto& x : *it) {
            if (!x.is_string()) throw Error(ErrorCode::InvalidRequest, "'surviving_ids' must be an array of strings");
            ids.push_back(x.get<std::string>());
        }
    } else {
        ids = apply_filters(c, filters, taxonomy()).surviving;
    }

    auto p = save_filtered(*permalinks_, c, filters, ids, st->snapshot->revision(), specs);
    return {{"permalink_id", p.id},
            {"url", options_.public_base_url + "/saved/" + p.id},
            {"comparison_id", p.comparison_id},
            {"surviving_ids", p.surviving_ids},
            {"filters", to_json(p.filters)},
            {"created_at", p.created_at}};
}

json SearchService::saved(const std::string& permalink_id) const {
    auto st = state();
    auto loaded = load_permalink(*permalinks_, *st->snapshot, permalink_id);
    const auto& p = loaded.permalink;
    return {{"permalink_id", p.id},
            {"comparison_id", p.comparison_id},
            {"created_at", p.created_at},
            {"snapshot_revision", p.snapshot_revision},
            {"current_revision", st->snapshot->revision()},
            {"stale", loaded.stale},
            {"filters", to_json(p.filters)},
            {"surviving_ids", p.surviving_ids},
            {"tombstoned_ids", loaded.tombstoned},
            {"comparison", to_json(loaded.comparison)}};
}

json SearchService::resolve(const std::string& external_id) const {
    if (!provider_) {
        throw Error(ErrorCode::ProviderUnavailable, "no hierarchy provider configured", {{"cause", "unconfigured"}});
    }
    auto chain = resolve_chain(*provider_, external_id, options_.max_depth);
    json nodes = json::array();
    for (const auto& n : chain.nodes) {
        auto j = to_json(n);
        if (auto l = n.level()) j["level"] = to_string(*l);
        nodes.push_back(std::move(j));
    }
    return {{"id", external_id}, {"chain", std::move(nodes)}};
}

}  // namespace kgfacet
