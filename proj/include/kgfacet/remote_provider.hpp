#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <mutex>
#include <string>

#include "kgfacet/taxonomy.hpp"

namespace kgfacet {

struct RemoteProviderOptions {
    std::string base_url;  // e.g. "http://127.0.0.1:8081" or with a path prefix
    std::string graph = "geonames";
    std::chrono::milliseconds timeout{3000};
    int retries = 1;
    std::size_t max_in_flight = 8;
};

/// Client for `GET {base}/hierarchy/{external_id}`, which answers a JSON
/// array of nodes (leaf first, root last) in the fixture node schema.
class RemoteProvider : public HierarchyProvider {
public:
    explicit RemoteProvider(RemoteProviderOptions options);

    const std::string& graph() const override { return options_.graph; }
    TaxonomyNode resolve(const std::string& id) override;
    std::vector<TaxonomyNode> fetch_path(const std::string& id, std::size_t max_nodes) override;

    std::size_t http_requests() const { return http_requests_.load(); }

private:
    std::vector<TaxonomyNode> get_hierarchy(const std::string& id);

    RemoteProviderOptions options_;
    std::string origin_;
    std::string path_prefix_;

    std::mutex slots_mu_;
    std::condition_variable slots_cv_;
    std::size_t in_flight_ = 0;
    std::atomic<std::size_t> http_requests_{0};
};

}  // namespace kgfacet
