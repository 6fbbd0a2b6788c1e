#include "kgfacet/taxonomy.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <thread>

#include "kgfacet/text.hpp"

namespace kgfacet {

using nlohmann::json;

std::string_view to_string(LevelCode level) {
    switch (level) {
    case LevelCode::Continent: return "continent";
    case LevelCode::Country: return "country";
    case LevelCode::Region: return "region";
    case LevelCode::City: return "city";
    case LevelCode::Leaf: return "leaf";
    }
    return "?";
}

LevelCode parse_level(std::string_view name) {
    for (auto level : kAllLevels) {
        if (iequals(name, to_string(level))) return level;
    }
    throw Error(ErrorCode::InvalidRequest, "unknown taxonomy level '" + std::string(name) + "'",
                {{"level", std::string(name)}});
}

std::optional<LevelCode> level_from_feature_code(std::string_view code) {
    if (code == "CONT") return LevelCode::Continent;
    if (code == "PCLI") return LevelCode::Country;
    if (code == "ADM1") return LevelCode::Region;
    if (code.starts_with("PPL")) return LevelCode::City;
    return std::nullopt;
}

json to_json(const TaxonomyNode& node) {
    json j{{"id", node.id}, {"label", node.label}, {"feature_code", node.feature_code}};
    if (node.parent_id) j["parent_id"] = *node.parent_id;
    return j;
}

TaxonomyNode node_from_json(const json& j) {
    auto str = [&](const char* key) {
        auto it = j.find(key);
        if (it == j.end() || !it->is_string()) {
            throw Error(ErrorCode::InvalidValue, std::string("taxonomy node field '") + key + "' must be a string");
        }
        return it->get<std::string>();
    };
    if (!j.is_object()) throw Error(ErrorCode::InvalidValue, "taxonomy node must be an object");
    TaxonomyNode n{str("id"), str("label"), str("feature_code"), std::nullopt};
    if (auto it = j.find("parent_id"); it != j.end() && !it->is_null()) n.parent_id = str("parent_id");
    if (n.id.empty()) throw Error(ErrorCode::InvalidValue, "taxonomy node id must be non-empty");
    if (n.parent_id && *n.parent_id == n.id) {
        throw Error(ErrorCode::InvalidValue, "taxonomy node '" + n.id + "' is its own parent", {{"id", n.id}});
    }
    return n;
}

bool AncestorChain::contains(std::string_view id) const {
    return std::any_of(nodes.begin(), nodes.end(), [&](const TaxonomyNode& n) { return n.id == id; });
}

const TaxonomyNode* AncestorChain::ancestor_at(LevelCode level) const {
    if (nodes.empty()) return nullptr;
    if (level == LevelCode::Leaf) return &nodes.front();
    for (const auto& n : nodes) {
        if (n.level() == level) return &n;
    }
    return nullptr;
}

std::vector<TaxonomyNode> HierarchyProvider::fetch_path(const std::string& id, std::size_t max_nodes) {
    count_path_request();
    std::vector<TaxonomyNode> path;
    std::set<std::string> seen;
    std::string current = id;
    while (true) {
        auto node = resolve(current);
        bool repeated = !seen.insert(node.id).second;
        path.push_back(std::move(node));
        const auto& last = path.back();
        if (repeated || !last.parent_id || path.size() >= max_nodes) break;
        current = *last.parent_id;
    }
    return path;
}

FixtureProvider::FixtureProvider(std::vector<TaxonomyNode> nodes, std::string graph) : graph_(std::move(graph)) {
    for (auto& n : nodes) {
        auto id = n.id;
        if (!nodes_.emplace(id, std::move(n)).second) {
            throw Error(ErrorCode::DuplicateId, "duplicate taxonomy node '" + id + "'", {{"id", id}});
        }
    }
}

FixtureProvider FixtureProvider::from_stream(std::istream& in, std::string graph) {
    std::vector<TaxonomyNode> nodes;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            nodes.push_back(node_from_json(json::parse(line)));
        } catch (const json::parse_error& e) {
            throw Error(ErrorCode::MalformedDocument, "hierarchy line " + std::to_string(lineno) + ": " + e.what(),
                        {{"line", lineno}, {"position", e.byte}});
        }
    }
    return FixtureProvider(std::move(nodes), std::move(graph));
}

FixtureProvider FixtureProvider::from_file(const std::filesystem::path& path, std::string graph) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::NotFound, "cannot open hierarchy fixture '" + path.string() + "'");
    return from_stream(in, std::move(graph));
}

TaxonomyNode FixtureProvider::resolve(const std::string& id) {
    ++resolve_calls_;
    auto it = nodes_.find(id);
    if (it == nodes_.end()) throw Error(ErrorCode::UnknownEntity, "unknown entity '" + id + "'", {{"id", id}});
    return it->second;
}

CachingProvider::CachingProvider(std::shared_ptr<HierarchyProvider> inner, std::chrono::milliseconds ttl,
                                 std::size_t capacity)
    : inner_(std::move(inner)), ttl_(ttl), capacity_(std::max<std::size_t>(capacity, 1)) {}

TaxonomyNode CachingProvider::resolve(const std::string& id) { return inner_->resolve(id); }

std::vector<TaxonomyNode> CachingProvider::fetch_path(const std::string& id, std::size_t max_nodes) {
    count_path_request();
    auto now = Clock::now();
    {
        std::lock_guard lock(mu_);
        auto it = paths_.find(id);
        if (it != paths_.end() && it->second.expires > now) {
            const auto& cached = it->second.path;
            bool complete = !cached.empty() && (!cached.back().parent_id || cached.size() >= max_nodes);
            if (complete) {
                ++hits_;
                auto n = std::min(cached.size(), max_nodes);
                return {cached.begin(), cached.begin() + static_cast<std::ptrdiff_t>(n)};
            }
        }
    }
    auto path = inner_->fetch_path(id, max_nodes);
    std::lock_guard lock(mu_);
    if (paths_.size() >= capacity_) {
        std::erase_if(paths_, [&](const auto& kv) { return kv.second.expires <= now; });
        if (paths_.size() >= capacity_) {
            auto oldest = std::min_element(paths_.begin(), paths_.end(), [](const auto& a, const auto& b) {
                return a.second.expires < b.second.expires;
            });
            paths_.erase(oldest);
        }
    }
    paths_[id] = Entry{path, now + ttl_};
    return path;
}

AncestorChain resolve_chain(HierarchyProvider& provider, const std::string& external_id, std::size_t max_depth) {
    auto path = provider.fetch_path(external_id, max_depth + 1);
    if (path.empty() || path.front().id != external_id) {
        throw Error(ErrorCode::ProviderUnavailable, "hierarchy response does not start at '" + external_id + "'",
                    {{"cause", "bad-response"}, {"id", external_id}});
    }
    std::set<std::string> seen;
    for (std::size_t k = 0; k < path.size(); ++k) {
        const auto& node = path[k];
        if (!seen.insert(node.id).second) {
            throw Error(ErrorCode::CycleDetected, "cycle in hierarchy at '" + node.id + "'", {{"id", node.id}});
        }
        if (k > 0 && path[k - 1].parent_id != node.id) {
            throw Error(ErrorCode::ProviderUnavailable, "hierarchy response is not parent-linked at '" + node.id + "'",
                        {{"cause", "bad-response"}, {"id", node.id}});
        }
    }
    if (path.size() > max_depth) {
        throw Error(ErrorCode::DepthExceeded,
                    "hierarchy of '" + external_id + "' is deeper than " + std::to_string(max_depth),
                    {{"id", external_id}, {"max_depth", max_depth}});
    }
    if (path.back().parent_id) {
        throw Error(ErrorCode::ProviderUnavailable, "hierarchy response truncated below the root",
                    {{"cause", "bad-response"}, {"id", external_id}});
    }
    return AncestorChain{std::move(path)};
}

AncestorChain resolve_chain(HierarchyProvider& provider, const EntityRef& entity, std::size_t max_depth) {
    if (!entity.link || entity.link->graph != provider.graph()) {
        throw Error(ErrorCode::InvalidValue, "entity '" + entity.id + "' has no link into '" + provider.graph() + "'",
                    {{"id", entity.id}});
    }
    return resolve_chain(provider, entity.link->external_id, max_depth);
}

bool is_under(HierarchyProvider& provider, const EntityRef& entity, const std::string& ancestor_id,
              std::size_t max_depth) {
    return resolve_chain(provider, entity, max_depth).contains(ancestor_id);
}

namespace {

ChainResult resolve_one(HierarchyProvider& provider, const std::string& id, std::size_t max_depth) {
    try {
        return resolve_chain(provider, id, max_depth);
    } catch (const Error& e) {
        return e;
    }
}

}  // namespace

std::map<std::string, ChainResult> resolve_many_ids(HierarchyProvider& provider,
                                                    std::span<const std::string> external_ids,
                                                    std::size_t max_depth, std::size_t concurrency) {
    std::vector<std::string> distinct(external_ids.begin(), external_ids.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

    std::vector<std::optional<ChainResult>> results(distinct.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < distinct.size(); i = next++) {
            results[i] = resolve_one(provider, distinct[i], max_depth);
        }
    };
    std::size_t threads = std::min(std::max<std::size_t>(concurrency, 1), distinct.size());
    if (threads <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
    }

    std::map<std::string, ChainResult> out;
    for (std::size_t i = 0; i < distinct.size(); ++i) out.emplace(distinct[i], std::move(*results[i]));
    return out;
}

std::map<std::string, ChainResult> resolve_many(HierarchyProvider& provider, std::span<const EntityRef> refs,
                                                std::size_t max_depth, std::size_t concurrency) {
    std::vector<std::string> linked;
    std::map<std::string, ChainResult> unlinked;
    for (const auto& ref : refs) {
        if (ref.link && ref.link->graph == provider.graph()) {
            linked.push_back(ref.link->external_id);
        } else {
            unlinked.emplace(ref.id, Error(ErrorCode::InvalidValue,
                                           "entity '" + ref.id + "' has no link into '" + provider.graph() + "'",
                                           {{"id", ref.id}}));
        }
    }
    auto out = resolve_many_ids(provider, linked, max_depth, concurrency);
    out.merge(unlinked);
    return out;
}

}  // namespace kgfacet
