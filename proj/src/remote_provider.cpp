#include "kgfacet/remote_provider.hpp"

#include <regex>

#include <httplib.h>

namespace kgfacet {

using nlohmann::json;

namespace {

std::string encode_segment(const std::string& s) {
    static const char* hex = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : s) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
            out += static_cast<char>(c);
        } else {
            out += '%';
            out += hex[c >> 4];
            out += hex[c & 15];
        }
    }
    return out;
}

class SlotGuard {
public:
    SlotGuard(std::mutex& mu, std::condition_variable& cv, std::size_t& used, std::size_t limit)
        : mu_(mu), cv_(cv), used_(used) {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [&] { return used_ < limit; });
        ++used_;
    }
    ~SlotGuard() {
        {
            std::lock_guard lock(mu_);
            --used_;
        }
        cv_.notify_one();
    }
    SlotGuard(const SlotGuard&) = delete;
    SlotGuard& operator=(const SlotGuard&) = delete;

private:
    std::mutex& mu_;
    std::condition_variable& cv_;
    std::size_t& used_;
};

}  // namespace

RemoteProvider::RemoteProvider(RemoteProviderOptions options) : options_(std::move(options)) {
    static const std::regex base_re(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(options_.base_url, m, base_re)) {
        throw Error(ErrorCode::InvalidConfig, "provider base url must be http(s)://host[:port][/prefix]",
                    {{"base_url", options_.base_url}});
    }
    origin_ = m[1].str();
    path_prefix_ = m[2].matched ? m[2].str() : "";
    while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
    if (options_.max_in_flight == 0) options_.max_in_flight = 1;
}

std::vector<TaxonomyNode> RemoteProvider::get_hierarchy(const std::string& id) {
    SlotGuard slot(slots_mu_, slots_cv_, in_flight_, options_.max_in_flight);

    auto path = path_prefix_ + "/hierarchy/" + encode_segment(id);
    auto secs = std::chrono::duration_cast<std::chrono::seconds>(options_.timeout);
    auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(options_.timeout - secs);

    json last_detail;
    std::string last_message;
    for (int attempt = 0; attempt <= options_.retries; ++attempt) {
        httplib::Client client(origin_);
        client.set_connection_timeout(secs.count(), usecs.count());
        client.set_read_timeout(secs.count(), usecs.count());
        client.set_write_timeout(secs.count(), usecs.count());
        ++http_requests_;
        auto res = client.Get(path);
        if (!res) {
            auto err = res.error();
            bool timeout = err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read;
            last_message = "hierarchy service unreachable: " + httplib::to_string(err);
            last_detail = {{"cause", timeout ? "timeout" : "network"}, {"id", id}};
            continue;
        }
        if (res->status == 404) {
            throw Error(ErrorCode::UnknownEntity, "unknown entity '" + id + "'", {{"id", id}});
        }
        if (res->status != 200) {
            last_message = "hierarchy service answered HTTP " + std::to_string(res->status);
            last_detail = {{"cause", "http"}, {"status", res->status}, {"id", id}};
            if (res->status >= 500) continue;
            break;
        }
        json body;
        try {
            body = json::parse(res->body);
        } catch (const json::parse_error& e) {
            throw Error(ErrorCode::ProviderUnavailable, std::string("hierarchy response is not JSON: ") + e.what(),
                        {{"cause", "bad-response"}, {"id", id}});
        }
        if (!body.is_array()) {
            throw Error(ErrorCode::ProviderUnavailable, "hierarchy response must be a JSON array",
                        {{"cause", "bad-response"}, {"id", id}});
        }
        std::vector<TaxonomyNode> nodes;
        try {
            for (const auto& n : body) nodes.push_back(node_from_json(n));
        } catch (const Error& e) {
            throw Error(ErrorCode::ProviderUnavailable, std::string("malformed hierarchy node: ") + e.what(),
                        {{"cause", "bad-response"}, {"id", id}});
        }
        return nodes;
    }
    throw Error(ErrorCode::ProviderUnavailable, last_message, last_detail);
}

TaxonomyNode RemoteProvider::resolve(const std::string& id) {
    auto nodes = get_hierarchy(id);
    if (nodes.empty()) throw Error(ErrorCode::UnknownEntity, "unknown entity '" + id + "'", {{"id", id}});
    return nodes.front();
}

std::vector<TaxonomyNode> RemoteProvider::fetch_path(const std::string& id, std::size_t max_nodes) {
    count_path_request();
    auto nodes = get_hierarchy(id);
    if (nodes.size() > max_nodes) nodes.resize(max_nodes);
    return nodes;
}

}  // namespace kgfacet
