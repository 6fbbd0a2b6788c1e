#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "kgfacet/error.hpp"
#include "kgfacet/value.hpp"

namespace kgfacet {

/// Granularity of a taxonomic facet, coarsest first.
enum class LevelCode { Continent, Country, Region, City, Leaf };

inline constexpr LevelCode kAllLevels[] = {LevelCode::Continent, LevelCode::Country, LevelCode::Region,
                                          LevelCode::City, LevelCode::Leaf};

std::string_view to_string(LevelCode level);
/// Case-insensitive; throws Error(InvalidRequest).
LevelCode parse_level(std::string_view name);
/// CONT, PCLI, ADM1 and the PPL* family; other codes have no level.
std::optional<LevelCode> level_from_feature_code(std::string_view feature_code);

struct TaxonomyNode {
    std::string id;
    std::string label;
    std::string feature_code;
    std::optional<std::string> parent_id;

    std::optional<LevelCode> level() const { return level_from_feature_code(feature_code); }
    bool operator==(const TaxonomyNode&) const = default;
};

nlohmann::json to_json(const TaxonomyNode& node);
TaxonomyNode node_from_json(const nlohmann::json& j);

/// Leaf first, root last.
struct AncestorChain {
    std::vector<TaxonomyNode> nodes;

    const TaxonomyNode& leaf() const { return nodes.front(); }
    bool contains(std::string_view id) const;
    /// Leaf level answers the leaf itself; other levels the first node
    /// (walking up) whose feature code maps to that level.
    const TaxonomyNode* ancestor_at(LevelCode level) const;

    bool operator==(const AncestorChain&) const = default;
};

inline constexpr std::size_t kDefaultMaxDepth = 16;

/// Read-only view of an external hierarchy graph reached through its
/// parent-feature relation.
class HierarchyProvider {
public:
    HierarchyProvider() = default;
    HierarchyProvider(HierarchyProvider&& other) noexcept : path_requests_(other.path_requests_.load()) {}
    virtual ~HierarchyProvider() = default;

    /// Graph id entity links must carry to be resolvable here ("geonames").
    virtual const std::string& graph() const = 0;

    /// One node. Throws UnknownEntity or ProviderUnavailable.
    virtual TaxonomyNode resolve(const std::string& id) = 0;

    /// Raw leaf-first path. The default walks resolve() and stops after a
    /// parentless node, a repeated id (kept so the caller can see it) or
    /// `max_nodes` nodes. Remote providers answer in one round trip.
    virtual std::vector<TaxonomyNode> fetch_path(const std::string& id, std::size_t max_nodes);

    /// Number of fetch_path sequences started.
    std::size_t path_requests() const { return path_requests_.load(); }

protected:
    void count_path_request() { ++path_requests_; }

private:
    std::atomic<std::size_t> path_requests_{0};
};

/// Backed by a JSON-lines node file: {id, label, feature_code, parent_id?}.
class FixtureProvider : public HierarchyProvider {
public:
    explicit FixtureProvider(std::vector<TaxonomyNode> nodes, std::string graph = "geonames");
    FixtureProvider(FixtureProvider&& other) noexcept
        : HierarchyProvider(std::move(other)),
          graph_(std::move(other.graph_)),
          nodes_(std::move(other.nodes_)),
          resolve_calls_(other.resolve_calls_.load()) {}
    static FixtureProvider from_stream(std::istream& in, std::string graph = "geonames");
    static FixtureProvider from_file(const std::filesystem::path& path, std::string graph = "geonames");

    const std::string& graph() const override { return graph_; }
    TaxonomyNode resolve(const std::string& id) override;

    const std::map<std::string, TaxonomyNode>& nodes() const { return nodes_; }
    std::size_t resolve_calls() const { return resolve_calls_.load(); }

private:
    std::string graph_;
    std::map<std::string, TaxonomyNode> nodes_;
    std::atomic<std::size_t> resolve_calls_{0};
};

/// Bounded TTL cache in front of another provider. Off unless configured.
class CachingProvider : public HierarchyProvider {
public:
    using Clock = std::chrono::steady_clock;

    CachingProvider(std::shared_ptr<HierarchyProvider> inner, std::chrono::milliseconds ttl,
                    std::size_t capacity = 4096);

    const std::string& graph() const override { return inner_->graph(); }
    TaxonomyNode resolve(const std::string& id) override;
    std::vector<TaxonomyNode> fetch_path(const std::string& id, std::size_t max_nodes) override;

    HierarchyProvider& inner() { return *inner_; }
    std::size_t hits() const { return hits_.load(); }

private:
    struct Entry {
        std::vector<TaxonomyNode> path;
        Clock::time_point expires;
    };

    std::shared_ptr<HierarchyProvider> inner_;
    std::chrono::milliseconds ttl_;
    std::size_t capacity_;
    std::mutex mu_;
    std::unordered_map<std::string, Entry> paths_;
    std::atomic<std::size_t> hits_{0};
};

/// Validated leaf-first chain for an external id.
/// Throws ProviderUnavailable, UnknownEntity, CycleDetected or DepthExceeded.
AncestorChain resolve_chain(HierarchyProvider& provider, const std::string& external_id,
                            std::size_t max_depth = kDefaultMaxDepth);
/// The entity must link into provider.graph(); otherwise InvalidValue.
AncestorChain resolve_chain(HierarchyProvider& provider, const EntityRef& entity,
                            std::size_t max_depth = kDefaultMaxDepth);

/// Descendant-or-self membership.
bool is_under(HierarchyProvider& provider, const EntityRef& entity, const std::string& ancestor_id,
              std::size_t max_depth = kDefaultMaxDepth);

using ChainResult = std::variant<AncestorChain, Error>;

/// Per-entry outcome keyed by external id (local id for unlinked refs).
/// Duplicates resolve once; distinct ids run on up to `concurrency` threads.
std::map<std::string, ChainResult> resolve_many(HierarchyProvider& provider, std::span<const EntityRef> refs,
                                                std::size_t max_depth = kDefaultMaxDepth,
                                                std::size_t concurrency = 8);
std::map<std::string, ChainResult> resolve_many_ids(HierarchyProvider& provider,
                                                    std::span<const std::string> external_ids,
                                                    std::size_t max_depth = kDefaultMaxDepth,
                                                    std::size_t concurrency = 8);

/// What facet and filter evaluation need to reach a hierarchy. A null
/// provider means taxonomic work cannot be federated.
struct TaxonomyContext {
    HierarchyProvider* provider = nullptr;
    /// On provider failure: true falls back to categorical labels,
    /// false raises ProviderUnavailable.
    bool degrade = true;
    std::size_t max_depth = kDefaultMaxDepth;
    std::size_t concurrency = 8;
};

}  // namespace kgfacet
