#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kgfacet/value.hpp"

namespace kgfacet {

struct Statement {
    std::string subject;
    std::string property;
    Value object;
    bool operator==(const Statement&) const = default;
};

struct Paper {
    std::string id;
    std::string title;
    std::vector<std::string> authors;
    std::string venue;
    int year = 0;
    std::optional<std::string> doi;
    bool operator==(const Paper&) const = default;
};

struct Contribution {
    std::string id;
    std::string paper_id;
    std::string label;
    std::string research_problem;
    // Absent property = absent key; lists are never empty.
    std::map<std::string, std::vector<Value>> properties;

    std::vector<Statement> statements() const;
    bool operator==(const Contribution&) const = default;
};

/// Immutable result of one ingest. Shared read-only between threads.
class StoreSnapshot {
public:
    StoreSnapshot() = default;

    std::uint64_t revision() const { return revision_; }
    const std::map<std::string, Paper>& papers() const { return papers_; }
    const std::map<std::string, Contribution>& contributions() const { return contributions_; }
    const std::map<std::string, std::string>& property_labels() const { return property_labels_; }

    const Paper* find_paper(const std::string& id) const;
    const Contribution* find_contribution(const std::string& id) const;
    std::string property_label(const std::string& property_id) const;

    /// Distinct research problems, deduplicated case-insensitively, sorted by
    /// lowercase label. The spelling kept is the one on the lowest contribution id.
    std::vector<std::string> research_problems() const;

    bool operator==(const StoreSnapshot&) const = default;

private:
    friend StoreSnapshot ingest_dataset(std::istream&, const StoreSnapshot*);

    std::uint64_t revision_ = 0;
    std::map<std::string, Paper> papers_;
    std::map<std::string, Contribution> contributions_;
    std::map<std::string, std::string> property_labels_;
};

/// Parses a line-delimited JSON dataset. The returned snapshot's revision is
/// one past `previous` (or 1). Throws Error on the first bad document.
StoreSnapshot ingest_dataset(std::istream& in, const StoreSnapshot* previous = nullptr);
StoreSnapshot ingest_file(const std::filesystem::path& path, const StoreSnapshot* previous = nullptr);

/// Throws Error(NotFound).
const Contribution& get_contribution(const StoreSnapshot& snapshot, const std::string& id);

/// Sorted ids, optionally restricted to a research problem (case-insensitive).
std::vector<std::string> list_contributions(const StoreSnapshot& snapshot,
                                            const std::optional<std::string>& research_problem = std::nullopt);

/// Walks every reference; returns a description of the first violation.
std::optional<std::string> check_integrity(const StoreSnapshot& snapshot);

}  // namespace kgfacet
