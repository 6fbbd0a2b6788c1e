#include <doctest.h>

#include <thread>

#include "kgfacet/remote_provider.hpp"
#include "kgfacet/taxonomy.hpp"
#include "support/fixtures.hpp"
#include "support/mock_hierarchy_server.hpp"
#include "support/naive_oracle.hpp"

using namespace kgfacet;
using namespace std::chrono_literals;

namespace {

std::vector<std::string> ids_of(const AncestorChain& c) {
    std::vector<std::string> out;
    for (const auto& n : c.nodes) out.push_back(n.id);
    return out;
}

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::InvalidRequest;
}

}  // namespace

TEST_CASE("feature codes map to levels") {
    CHECK(level_from_feature_code("CONT") == LevelCode::Continent);
    CHECK(level_from_feature_code("PCLI") == LevelCode::Country);
    CHECK(level_from_feature_code("ADM1") == LevelCode::Region);
    CHECK(level_from_feature_code("PPL") == LevelCode::City);
    CHECK(level_from_feature_code("PPLC") == LevelCode::City);
    CHECK(level_from_feature_code("PPLA2") == LevelCode::City);
    CHECK_FALSE(level_from_feature_code("ADM2").has_value());
    CHECK_FALSE(level_from_feature_code("AREA").has_value());
    CHECK(parse_level("Country") == LevelCode::Country);
    CHECK(parse_level("leaf") == LevelCode::Leaf);
    CHECK(code_of([] { parse_level("planet"); }) == ErrorCode::InvalidRequest);
}

TEST_CASE("Bonn resolves to its full chain") {
    auto p = fixtures::provider();
    auto chain = resolve_chain(*p, fixtures::kBonn);
    CHECK(ids_of(chain) ==
          std::vector<std::string>{fixtures::kBonn, "2886240", "2861876", fixtures::kGermany, fixtures::kEurope,
                                   fixtures::kEarth});
    CHECK(chain.ancestor_at(LevelCode::Country)->label == "Germany");
    CHECK(chain.ancestor_at(LevelCode::Continent)->label == "Europe");
    CHECK(chain.ancestor_at(LevelCode::Region)->label == "North Rhine-Westphalia");
    CHECK(chain.ancestor_at(LevelCode::City)->id == fixtures::kBonn);
    CHECK(chain.ancestor_at(LevelCode::Leaf)->id == fixtures::kBonn);
}

TEST_CASE("a root resolves to itself") {
    auto p = fixtures::provider();
    auto chain = resolve_chain(*p, fixtures::kEarth);
    CHECK(ids_of(chain) == std::vector<std::string>{fixtures::kEarth});
    CHECK(chain.ancestor_at(LevelCode::Country) == nullptr);
}

TEST_CASE("chains agree with parent pointers for every fixture node") {
    auto p = fixtures::provider();
    auto h = oracle::hierarchy_of(*p);
    for (const auto& [id, node] : p->nodes()) {
        CHECK(ids_of(resolve_chain(*p, id)) == oracle::ancestors(h, id));
    }
}

TEST_CASE("cycles are detected") {
    auto p = fixtures::provider(fixtures::test_data("cycle_hierarchy.jsonl"));
    CHECK(code_of([&] { resolve_chain(*p, "A"); }) == ErrorCode::CycleDetected);
    CHECK(code_of([&] { resolve_chain(*p, "C"); }) == ErrorCode::CycleDetected);
}

TEST_CASE("depth is bounded") {
    auto p = fixtures::provider(fixtures::test_data("deep_hierarchy.jsonl"));
    CHECK(code_of([&] { resolve_chain(*p, "D0"); }) == ErrorCode::DepthExceeded);
    CHECK(code_of([&] { resolve_chain(*p, "D3"); }) == ErrorCode::DepthExceeded);
    CHECK(resolve_chain(*p, "D4").nodes.size() == 16);
    CHECK(resolve_chain(*p, "D0", 32).nodes.size() == 20);
}

TEST_CASE("unknown and unlinked entities") {
    auto p = fixtures::provider();
    CHECK(code_of([&] { resolve_chain(*p, "123"); }) == ErrorCode::UnknownEntity);
    EntityRef unlinked{"L1", std::string("Somewhere"), std::nullopt};
    CHECK(code_of([&] { resolve_chain(*p, unlinked); }) == ErrorCode::InvalidValue);
    auto other = fixtures::place(fixtures::kBonn, "Bonn");
    other.link->graph = "wikidata";
    CHECK(code_of([&] { resolve_chain(*p, other); }) == ErrorCode::InvalidValue);
}

TEST_CASE("membership is descendant-or-self") {
    auto p = fixtures::provider();
    auto bonn = fixtures::place(fixtures::kBonn, "Bonn");
    CHECK(is_under(*p, bonn, fixtures::kEurope));
    CHECK(is_under(*p, bonn, fixtures::kGermany));
    CHECK(is_under(*p, bonn, fixtures::kBonn));
    CHECK_FALSE(is_under(*p, bonn, fixtures::kAustralia));
    CHECK_FALSE(is_under(*p, bonn, fixtures::kFrance));
}

TEST_CASE("resolve_many resolves each distinct id once") {
    auto p = fixtures::provider();
    std::vector<EntityRef> refs{fixtures::place(fixtures::kBonn), fixtures::place(fixtures::kBonn),
                                fixtures::place(fixtures::kBerlin), fixtures::place("424242"),
                                EntityRef{"X", std::nullopt, std::nullopt}};
    auto out = resolve_many(*p, refs);
    CHECK(p->path_requests() == 3);
    REQUIRE(out.size() == 4);
    CHECK(std::holds_alternative<AncestorChain>(out.at(fixtures::kBonn)));
    CHECK(std::holds_alternative<AncestorChain>(out.at(fixtures::kBerlin)));
    CHECK(std::get<Error>(out.at("424242")).code() == ErrorCode::UnknownEntity);
    CHECK(std::get<Error>(out.at("X")).code() == ErrorCode::InvalidValue);

    CHECK(resolve_many(*p, std::vector<EntityRef>{}).empty());
}

TEST_CASE("resolve_many is independent of concurrency") {
    auto p = fixtures::provider();
    std::vector<std::string> ids;
    for (const auto& [id, n] : p->nodes()) ids.push_back(id);
    auto serial = resolve_many_ids(*p, ids, kDefaultMaxDepth, 1);
    auto parallel = resolve_many_ids(*p, ids, kDefaultMaxDepth, 8);
    REQUIRE(serial.size() == parallel.size());
    for (const auto& [id, r] : serial) {
        CHECK(ids_of(std::get<AncestorChain>(r)) == ids_of(std::get<AncestorChain>(parallel.at(id))));
    }
}

TEST_CASE("the cache serves repeated paths until they expire") {
    std::shared_ptr<FixtureProvider> inner = fixtures::provider();
    CachingProvider cache(inner, 150ms);
    auto a = resolve_chain(cache, fixtures::kBonn);
    auto b = resolve_chain(cache, fixtures::kBonn);
    CHECK(a == b);
    CHECK(cache.hits() == 1);
    CHECK(inner->path_requests() == 1);
    std::this_thread::sleep_for(200ms);
    resolve_chain(cache, fixtures::kBonn);
    CHECK(inner->path_requests() == 2);
}

TEST_CASE("a short cached path does not satisfy a deeper request") {
    std::shared_ptr<FixtureProvider> inner = fixtures::provider();
    CachingProvider cache(inner, 10s);
    CHECK(code_of([&] { resolve_chain(cache, fixtures::kBonn, 3); }) == ErrorCode::DepthExceeded);
    CHECK(resolve_chain(cache, fixtures::kBonn).nodes.size() == 6);
}

TEST_CASE("remote provider against a mock hierarchy service") {
    std::shared_ptr<FixtureProvider> fixture = fixtures::provider();
    mock::HierarchyServer server(fixture);
    server.start();

    RemoteProvider remote({server.url(), "geonames", 1000ms, 1, 4});
    auto chain = resolve_chain(remote, fixtures::kBonn);
    CHECK(ids_of(chain) == ids_of(resolve_chain(*fixture, fixtures::kBonn)));
    CHECK(remote.resolve(fixtures::kGermany).label == "Germany");
    CHECK(code_of([&] { resolve_chain(remote, "424242"); }) == ErrorCode::UnknownEntity);

    server.set_failing(true);
    auto before = server.requests();
    try {
        resolve_chain(remote, fixtures::kBonn);
        FAIL("expected failure");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ProviderUnavailable);
        CHECK(e.detail().at("cause") == "http");
    }
    CHECK(server.requests() - before == 2);  // one retry

    server.stop();
    try {
        resolve_chain(remote, fixtures::kBonn);
        FAIL("expected failure");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ProviderUnavailable);
    }

    server.set_failing(false);
    server.start();
    CHECK(resolve_chain(remote, fixtures::kBerlin).nodes.size() >= 3);
}

TEST_CASE("node json") {
    auto n = node_from_json(nlohmann::json::parse(R"({"id": "1", "label": "x", "feature_code": "PPL", "parent_id": "2"})"));
    CHECK(n.parent_id == "2");
    CHECK(node_from_json(to_json(n)) == n);
    CHECK(code_of([] { node_from_json(nlohmann::json::parse(R"({"id": "1", "label": "x", "feature_code": "PPL", "parent_id": "1"})")); }) ==
          ErrorCode::InvalidValue);
}
