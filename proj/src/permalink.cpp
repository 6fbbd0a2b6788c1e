#include "kgfacet/permalink.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <cstring>
#include <ctime>
#include <fstream>
#include <mutex>
#include <random>
#include <set>

namespace kgfacet {

using nlohmann::json;

json to_json(const Permalink& p) {
    return {{"permalink_id", p.id},
            {"comparison_id", p.comparison_id},
            {"filters", to_json(p.filters)},
            {"surviving_ids", p.surviving_ids},
            {"snapshot_revision", p.snapshot_revision},
            {"created_at", p.created_at}};
}

Permalink permalink_from_json(const json& j) {
    Permalink p;
    p.id = j.at("permalink_id").get<std::string>();
    p.comparison_id = j.at("comparison_id").get<std::string>();
    p.filters = filter_set_from_json(j.at("filters"));
    p.surviving_ids = j.at("surviving_ids").get<std::vector<std::string>>();
    p.snapshot_revision = j.at("snapshot_revision").get<std::uint64_t>();
    p.created_at = j.at("created_at").get<std::string>();
    return p;
}

std::string new_permalink_id() {
    static constexpr char alphabet[] = "abcdefghijklmnopqrstuvwxyz234567";
    std::random_device rd;
    std::array<unsigned char, 16> bytes{};
    for (std::size_t i = 0; i < bytes.size(); i += 4) {
        auto r = rd();
        for (std::size_t k = 0; k < 4; ++k) bytes[i + k] = static_cast<unsigned char>(r >> (8 * k));
    }
    std::string out;
    unsigned buffer = 0;
    int bits = 0;
    for (auto b : bytes) {
        buffer = (buffer << 8) | b;
        bits += 8;
        while (bits >= 5) {
            out += alphabet[(buffer >> (bits - 5)) & 31];
            bits -= 5;
        }
    }
    if (bits > 0) out += alphabet[(buffer << (5 - bits)) & 31];
    return out;
}

namespace {

std::string utc_now_iso() {
    auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

[[noreturn]] void persistence_failure(const std::filesystem::path& path, const std::string& what) {
    throw Error(ErrorCode::PersistenceFailure, "permalink journal '" + path.string() + "': " + what,
                {{"path", path.string()}});
}

}  // namespace

PermalinkStore::PermalinkStore(std::filesystem::path journal) : journal_(std::move(journal)) {
    if (!journal_.empty()) replay();
}

void PermalinkStore::replay() {
    std::ifstream in(journal_);
    if (!in) return;  // created on first save
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) lines.push_back(std::move(line));
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            auto p = permalink_from_json(json::parse(lines[i]));
            index_[p.id] = saved_.size();
            saved_.push_back(std::move(p));
        } catch (const std::exception& e) {
            // A torn final line is what an interrupted append leaves behind.
            if (i + 1 == lines.size()) break;
            persistence_failure(journal_, "line " + std::to_string(i + 1) + ": " + e.what());
        }
    }
}

void PermalinkStore::append(const Permalink& p) {
    if (journal_.empty()) return;
    std::error_code ec;
    if (journal_.has_parent_path()) std::filesystem::create_directories(journal_.parent_path(), ec);
    int fd = ::open(journal_.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
    if (fd < 0) persistence_failure(journal_, std::strerror(errno));
    auto line = to_json(p).dump() + "\n";
    std::size_t written = 0;
    while (written < line.size()) {
        auto n = ::write(fd, line.data() + written, line.size() - written);
        if (n < 0) {
            if (errno == EINTR) continue;
            auto err = errno;
            ::close(fd);
            persistence_failure(journal_, std::strerror(err));
        }
        written += static_cast<std::size_t>(n);
    }
    if (::fsync(fd) != 0) {
        auto err = errno;
        ::close(fd);
        persistence_failure(journal_, std::strerror(err));
    }
    ::close(fd);
}

Permalink PermalinkStore::save(const Comparison& source, const FilterSet& filters,
                               std::span<const std::string> surviving_ids, std::uint64_t snapshot_revision) {
    std::set<std::string> seen;
    for (const auto& id : surviving_ids) {
        if (!source.has_row(id)) {
            throw Error(ErrorCode::InvalidSubset, "'" + id + "' is not a row of comparison '" + source.id() + "'",
                        {{"id", id}, {"comparison", source.id()}});
        }
        if (!seen.insert(id).second) {
            throw Error(ErrorCode::InvalidSubset, "'" + id + "' listed twice", {{"id", id}});
        }
    }

    Permalink p;
    p.comparison_id = source.id();
    p.filters = filters;
    p.surviving_ids.assign(surviving_ids.begin(), surviving_ids.end());
    p.snapshot_revision = snapshot_revision;
    p.created_at = utc_now_iso();

    std::unique_lock lock(mu_);
    do {
        p.id = new_permalink_id();
    } while (index_.contains(p.id));
    append(p);
    index_[p.id] = saved_.size();
    saved_.push_back(p);
    return p;
}

std::optional<Permalink> PermalinkStore::find(const std::string& id) const {
    std::shared_lock lock(mu_);
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return saved_[it->second];
}

Permalink PermalinkStore::get(const std::string& id) const {
    if (auto p = find(id)) return *p;
    throw Error(ErrorCode::NotFound, "no saved comparison '" + id + "'", {{"id", id}});
}

std::vector<Permalink> PermalinkStore::list() const {
    std::shared_lock lock(mu_);
    return saved_;
}

std::size_t PermalinkStore::size() const {
    std::shared_lock lock(mu_);
    return saved_.size();
}

Permalink save_filtered(PermalinkStore& store, const Comparison& comparison, const FilterSet& filters,
                        std::span<const std::string> surviving_ids, std::uint64_t snapshot_revision,
                        std::span<const FacetSpec> facets) {
    if (!facets.empty() || !filters.empty()) validate_filters(filters, facets);
    return store.save(comparison, filters, surviving_ids, snapshot_revision);
}

LoadedPermalink load_permalink(const PermalinkStore& store, const StoreSnapshot& snapshot, const std::string& id,
                               const std::string& label) {
    LoadedPermalink out;
    out.permalink = store.get(id);
    std::vector<ComparisonRow> rows;
    for (const auto& cid : out.permalink.surviving_ids) {
        if (const auto* c = snapshot.find_contribution(cid)) {
            const auto* paper = snapshot.find_paper(c->paper_id);
            rows.push_back({c->id, c->label, paper ? paper->title : "", c->properties, false});
        } else {
            rows.push_back({cid, cid, "", {}, true});
            out.tombstoned.push_back(cid);
        }
    }
    out.stale = out.permalink.snapshot_revision != snapshot.revision();
    out.comparison = Comparison(out.permalink.id, label.empty() ? out.permalink.comparison_id : label, std::move(rows),
                                snapshot.property_labels());
    return out;
}

}  // namespace kgfacet
