#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "kgfacet/comparison.hpp"
#include "kgfacet/filter.hpp"
#include "kgfacet/kg_store.hpp"

namespace kgfacet {

struct Permalink {
    std::string id;
    std::string comparison_id;
    FilterSet filters;
    std::vector<std::string> surviving_ids;
    std::uint64_t snapshot_revision = 0;
    std::string created_at;  // ISO-8601 UTC
};

nlohmann::json to_json(const Permalink& p);
Permalink permalink_from_json(const nlohmann::json& j);

/// 128 random bits, lowercase RFC 4648 base32 without padding (26 chars).
std::string new_permalink_id();

/// Append-only journal of saved subsets, one JSON document per line,
/// replayed on construction. An empty path keeps everything in memory.
class PermalinkStore {
public:
    explicit PermalinkStore(std::filesystem::path journal = {});

    PermalinkStore(const PermalinkStore&) = delete;
    PermalinkStore& operator=(const PermalinkStore&) = delete;

    /// Throws InvalidSubset when a surviving id is not a row of `source`,
    /// PersistenceFailure when the journal write fails.
    Permalink save(const Comparison& source, const FilterSet& filters, std::span<const std::string> surviving_ids,
                   std::uint64_t snapshot_revision);

    /// Throws NotFound.
    Permalink get(const std::string& id) const;
    std::optional<Permalink> find(const std::string& id) const;
    /// In save order.
    std::vector<Permalink> list() const;
    std::size_t size() const;

    const std::filesystem::path& journal() const { return journal_; }

private:
    void replay();
    void append(const Permalink& p);

    std::filesystem::path journal_;
    mutable std::shared_mutex mu_;
    std::vector<Permalink> saved_;
    std::map<std::string, std::size_t> index_;
};

/// Validates `filters` against `facets` (when given) before saving.
Permalink save_filtered(PermalinkStore& store, const Comparison& comparison, const FilterSet& filters,
                        std::span<const std::string> surviving_ids, std::uint64_t snapshot_revision,
                        std::span<const FacetSpec> facets);

struct LoadedPermalink {
    Permalink permalink;
    // Rows in saved order; rows whose contribution is gone are tombstoned.
    Comparison comparison;
    std::vector<std::string> tombstoned;
    bool stale = false;  // snapshot revision differs from save time
};

/// Rebuilds the saved subset against the current snapshot. The frozen id
/// list governs; nothing is silently dropped. Throws NotFound.
LoadedPermalink load_permalink(const PermalinkStore& store, const StoreSnapshot& snapshot, const std::string& id,
                               const std::string& label = "");

}  // namespace kgfacet
