#include "kgfacet/kg_store.hpp"

#include <fstream>
#include <set>

#include "kgfacet/error.hpp"
#include "kgfacet/text.hpp"

namespace kgfacet {

using nlohmann::json;

std::vector<Statement> Contribution::statements() const {
    std::vector<Statement> out;
    for (const auto& [prop, values] : properties) {
        for (const auto& v : values) out.push_back({id, prop, v});
    }
    return out;
}

const Paper* StoreSnapshot::find_paper(const std::string& id) const {
    auto it = papers_.find(id);
    return it == papers_.end() ? nullptr : &it->second;
}

const Contribution* StoreSnapshot::find_contribution(const std::string& id) const {
    auto it = contributions_.find(id);
    return it == contributions_.end() ? nullptr : &it->second;
}

std::string StoreSnapshot::property_label(const std::string& property_id) const {
    auto it = property_labels_.find(property_id);
    return it == property_labels_.end() ? property_id : it->second;
}

std::vector<std::string> StoreSnapshot::research_problems() const {
    std::map<std::string, std::string> by_key;
    for (const auto& [id, c] : contributions_) {
        by_key.try_emplace(to_lower(c.research_problem), c.research_problem);
    }
    std::vector<std::string> out;
    for (auto& [key, label] : by_key) out.push_back(label);
    return out;
}

namespace {

class DocumentReader {
public:
    DocumentReader(const json& doc, std::size_t line) : doc_(doc), line_(line) {}

    [[noreturn]] void fail(const std::string& what) const {
        throw Error(ErrorCode::MalformedDocument, "line " + std::to_string(line_) + ": " + what,
                    {{"line", line_}});
    }

    std::string string(const char* key) const {
        auto it = doc_.find(key);
        if (it == doc_.end() || !it->is_string()) fail(std::string("field '") + key + "' must be a string");
        return it->get<std::string>();
    }

    std::string nonempty(const char* key) const {
        auto s = string(key);
        if (s.empty()) fail(std::string("field '") + key + "' must be non-empty");
        return s;
    }

    std::optional<std::string> optional_string(const char* key) const {
        auto it = doc_.find(key);
        if (it == doc_.end() || it->is_null()) return std::nullopt;
        if (!it->is_string()) fail(std::string("field '") + key + "' must be a string");
        return it->get<std::string>();
    }

    const json& at(const char* key) const {
        auto it = doc_.find(key);
        if (it == doc_.end()) fail(std::string("missing field '") + key + "'");
        return *it;
    }

    std::size_t line() const { return line_; }

private:
    const json& doc_;
    std::size_t line_;
};

Paper read_paper(const DocumentReader& r) {
    Paper p;
    p.id = r.nonempty("id");
    p.title = r.nonempty("title");
    const auto& authors = r.at("authors");
    if (!authors.is_array()) r.fail("field 'authors' must be an array");
    for (const auto& a : authors) {
        if (!a.is_string()) r.fail("authors must be strings");
        p.authors.push_back(a.get<std::string>());
    }
    p.venue = r.optional_string("venue").value_or("");
    const auto& year = r.at("year");
    if (!year.is_number_integer()) r.fail("field 'year' must be an integer");
    p.year = year.get<int>();
    if (p.year < 1500 || p.year > 2100) {
        throw Error(ErrorCode::InvalidValue, "line " + std::to_string(r.line()) + ": year out of range",
                    {{"line", r.line()}, {"id", p.id}});
    }
    p.doi = r.optional_string("doi");
    return p;
}

Contribution read_contribution(const DocumentReader& r) {
    Contribution c;
    c.id = r.nonempty("id");
    c.paper_id = r.nonempty("paper");
    c.label = r.optional_string("label").value_or(c.id);
    c.research_problem = r.optional_string("research_problem").value_or("");
    const auto& values = r.at("values");
    if (!values.is_object()) r.fail("field 'values' must be an object");
    for (const auto& [prop, list] : values.items()) {
        if (prop.empty()) r.fail("property ids must be non-empty");
        if (!list.is_array() || list.empty()) {
            throw Error(ErrorCode::InvalidValue,
                        "line " + std::to_string(r.line()) + ": property '" + prop + "' needs a non-empty value list",
                        {{"line", r.line()}, {"property", prop}});
        }
        auto& out = c.properties[prop];
        for (const auto& v : list) {
            try {
                out.push_back(value_from_json(v));
            } catch (const Error& e) {
                throw Error(ErrorCode::InvalidValue, "line " + std::to_string(r.line()) + ": " + e.what(),
                            {{"line", r.line()}, {"property", prop}});
            }
        }
    }
    return c;
}

}  // namespace

StoreSnapshot ingest_dataset(std::istream& in, const StoreSnapshot* previous) {
    StoreSnapshot snap;
    snap.revision_ = previous ? previous->revision() + 1 : 1;

    std::set<std::string> seen_contributions;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;

        json doc;
        try {
            doc = json::parse(line);
        } catch (const json::parse_error& e) {
            throw Error(ErrorCode::MalformedDocument,
                        "line " + std::to_string(lineno) + ": " + e.what(),
                        {{"line", lineno}, {"position", e.byte}});
        }
        if (!doc.is_object()) {
            throw Error(ErrorCode::MalformedDocument, "line " + std::to_string(lineno) + ": document must be an object",
                        {{"line", lineno}});
        }
        DocumentReader r(doc, lineno);
        auto kind = r.string("kind");
        if (kind == "paper") {
            auto p = read_paper(r);
            auto id = p.id;
            if (!snap.papers_.emplace(id, std::move(p)).second) {
                throw Error(ErrorCode::DuplicateId, "duplicate paper id '" + id + "'", {{"id", id}, {"line", lineno}});
            }
        } else if (kind == "contribution") {
            auto c = read_contribution(r);
            auto id = c.id;
            if (!snap.contributions_.emplace(id, std::move(c)).second) {
                throw Error(ErrorCode::DuplicateId, "duplicate contribution id '" + id + "'",
                            {{"id", id}, {"line", lineno}});
            }
        } else if (kind == "property") {
            auto id = r.nonempty("id");
            auto label = r.nonempty("label");
            if (!snap.property_labels_.emplace(id, label).second) {
                throw Error(ErrorCode::DuplicateId, "duplicate property id '" + id + "'", {{"id", id}, {"line", lineno}});
            }
        } else {
            r.fail("unknown document kind '" + kind + "'");
        }
    }

    // Papers may appear after the contributions that cite them.
    for (const auto& [id, c] : snap.contributions_) {
        if (!snap.papers_.contains(c.paper_id)) {
            throw Error(ErrorCode::DanglingPaperRef,
                        "contribution '" + id + "' references unknown paper '" + c.paper_id + "'",
                        {{"contribution", id}, {"paper", c.paper_id}});
        }
        for (const auto& [prop, values] : c.properties) snap.property_labels_.try_emplace(prop, prop);
    }
    return snap;
}

StoreSnapshot ingest_file(const std::filesystem::path& path, const StoreSnapshot* previous) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::NotFound, "cannot open dataset '" + path.string() + "'", {{"path", path.string()}});
    return ingest_dataset(in, previous);
}

const Contribution& get_contribution(const StoreSnapshot& snapshot, const std::string& id) {
    if (const auto* c = snapshot.find_contribution(id)) return *c;
    throw Error(ErrorCode::NotFound, "no contribution '" + id + "'", {{"id", id}});
}

std::vector<std::string> list_contributions(const StoreSnapshot& snapshot,
                                            const std::optional<std::string>& research_problem) {
    std::vector<std::string> ids;
    for (const auto& [id, c] : snapshot.contributions()) {
        if (!research_problem || iequals(c.research_problem, *research_problem)) ids.push_back(id);
    }
    return ids;
}

std::optional<std::string> check_integrity(const StoreSnapshot& snapshot) {
    for (const auto& [id, c] : snapshot.contributions()) {
        if (id != c.id) return "contribution key mismatch for '" + id + "'";
        if (!snapshot.find_paper(c.paper_id)) return "contribution '" + id + "' has dangling paper '" + c.paper_id + "'";
        for (const auto& [prop, values] : c.properties) {
            if (values.empty()) return "contribution '" + id + "' has empty list for '" + prop + "'";
            if (!snapshot.property_labels().contains(prop)) return "property '" + prop + "' has no label";
        }
    }
    for (const auto& [id, p] : snapshot.papers()) {
        if (id != p.id || p.title.empty()) return "paper '" + id + "' is malformed";
    }
    return std::nullopt;
}

}  // namespace kgfacet
