#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include "kgfacet/comparison.hpp"
#include "kgfacet/kg_store.hpp"
#include "kgfacet/taxonomy.hpp"

namespace fixtures {

inline const std::string kCovidProblem = "COVID-19 reproductive number";
inline const std::string kCovidComparison = "covid-19-reproductive-number";
inline const std::string kLocation = "P_location";
inline const std::string kR0 = "P_r0";
inline const std::string kDate = "P_date";
inline const std::string kMethod = "P_method";

inline const std::string kEurope = "6255148";
inline const std::string kAsia = "6255147";
inline const std::string kEarth = "6295630";
inline const std::string kGermany = "2921044";
inline const std::string kFrance = "3017382";
inline const std::string kAustralia = "2077456";
inline const std::string kBonn = "2946447";
inline const std::string kBerlin = "2950159";
inline const std::string kLyon = "2996944";

inline std::string data(const std::string& name) { return std::string(KGFACET_DATA_DIR) + "/" + name; }
inline std::string test_data(const std::string& name) { return std::string(KGFACET_TEST_DATA_DIR) + "/" + name; }

inline std::string covid_dataset() { return data("covid19_r0.jsonl"); }
inline std::string geonames() { return data("geonames_hierarchy.jsonl"); }

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline const kgfacet::StoreSnapshot& covid_snapshot() {
    static const kgfacet::StoreSnapshot snap = kgfacet::ingest_file(covid_dataset());
    return snap;
}

inline kgfacet::Comparison covid_comparison() {
    return kgfacet::build_problem_comparisons(covid_snapshot()).at(0);
}

inline std::unique_ptr<kgfacet::FixtureProvider> provider(const std::string& path = geonames()) {
    return std::make_unique<kgfacet::FixtureProvider>(kgfacet::FixtureProvider::from_file(path));
}

inline kgfacet::EntityRef place(const std::string& external_id, const std::string& label = "") {
    kgfacet::EntityRef e;
    e.id = "L" + external_id;
    if (!label.empty()) e.label = label;
    e.link = kgfacet::ExternalLink{"geonames", external_id, "https://sws.geonames.org/" + external_id + "/"};
    return e;
}

/// Removed with its contents on destruction.
class TempDir {
public:
    TempDir() {
        std::string tmpl = (std::filesystem::temp_directory_path() / "kgfacet-XXXXXX").string();
        if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
        path_ = tmpl;
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace fixtures
