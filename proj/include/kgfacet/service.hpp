#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "kgfacet/comparison.hpp"
#include "kgfacet/facet_engine.hpp"
#include "kgfacet/filter.hpp"
#include "kgfacet/kg_store.hpp"
#include "kgfacet/permalink.hpp"
#include "kgfacet/taxonomy.hpp"

namespace kgfacet {

struct ServiceConfig {
    std::filesystem::path dataset;
    std::filesystem::path journal;  // empty: permalinks live in memory only

    // Exactly one of these selects the hierarchy provider.
    std::optional<std::string> provider_url;
    std::optional<std::filesystem::path> hierarchy_fixture;

    std::string graph = "geonames";
    std::chrono::milliseconds remote_timeout{3000};
    int remote_retries = 1;
    std::size_t remote_max_in_flight = 8;

    bool degrade = true;
    bool cache = false;
    std::chrono::seconds cache_ttl{60};

    std::string listen_host = "127.0.0.1";
    int listen_port = 8080;
    std::size_t candidate_cap = kDefaultCandidateCap;
    std::string public_base_url;  // prefix of returned permalink URLs

    /// Relative paths resolve against `base_dir`.
    static ServiceConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
    /// Reads the file and applies environment overrides.
    static ServiceConfig load(const std::filesystem::path& path);

    /// KGFACET_LISTEN=host:port, KGFACET_PROVIDER_URL=url (replaces a fixture provider).
    void apply_env_overrides();
    /// Throws InvalidConfig.
    void validate() const;
};

std::shared_ptr<HierarchyProvider> make_provider(const ServiceConfig& config);

struct ServiceOptions {
    bool degrade = true;
    std::size_t candidate_cap = kDefaultCandidateCap;
    std::string public_base_url;
    std::size_t max_depth = kDefaultMaxDepth;
    std::size_t concurrency = 8;
};

/// Transport-independent API. Every method returns the JSON body the HTTP
/// layer sends and the CLI prints; failures throw Error.
class SearchService {
public:
    SearchService(std::shared_ptr<const StoreSnapshot> snapshot, std::shared_ptr<HierarchyProvider> provider,
                  std::shared_ptr<PermalinkStore> permalinks, ServiceOptions options = {});

    static std::unique_ptr<SearchService> from_config(const ServiceConfig& config);

    nlohmann::json list_comparisons() const;
    nlohmann::json comparison(const std::string& id) const;
    nlohmann::json facets(const std::string& id) const;
    nlohmann::json candidates(const std::string& id, const std::string& property, const std::string& prefix) const;
    nlohmann::json facet_levels(const std::string& id, const std::string& property, const std::string& level) const;
    /// Body: a FilterSet, or {"filters": FilterSet, "levels": {property: level}}.
    nlohmann::json filter(const std::string& id, const nlohmann::json& body) const;
    /// Body: {"filters": FilterSet, "surviving_ids": [...]?}. Without ids the
    /// filters are applied to pick them.
    nlohmann::json save(const std::string& id, const nlohmann::json& body);
    nlohmann::json saved(const std::string& permalink_id) const;
    nlohmann::json resolve(const std::string& external_id) const;

    /// Publishes a new snapshot; in-flight requests keep the old one.
    void replace_snapshot(std::shared_ptr<const StoreSnapshot> snapshot);
    std::shared_ptr<const StoreSnapshot> snapshot() const;

    HierarchyProvider* provider() const { return provider_.get(); }
    const ServiceOptions& options() const { return options_; }

private:
    struct State {
        std::shared_ptr<const StoreSnapshot> snapshot;
        std::vector<Comparison> comparisons;
    };

    std::shared_ptr<const State> state() const;
    /// Problem grouping or saved permalink. Throws NotFound.
    Comparison find_comparison(const State& state, const std::string& id) const;
    TaxonomyContext taxonomy() const;
    std::vector<FacetSpec> facet_specs(const Comparison& comparison) const;
    const FacetSpec& facet_for(const std::vector<FacetSpec>& facets, const std::string& property) const;

    std::shared_ptr<HierarchyProvider> provider_;
    std::shared_ptr<PermalinkStore> permalinks_;
    ServiceOptions options_;

    mutable std::mutex state_mu_;
    std::shared_ptr<const State> state_;
};

/// Parses a request body, reporting the byte position of syntax errors as
/// InvalidRequest.
nlohmann::json parse_body(std::string_view text);

}  // namespace kgfacet
