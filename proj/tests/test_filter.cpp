#include <doctest.h>

#include <algorithm>
#include <set>

#include "kgfacet/facet_engine.hpp"
#include "kgfacet/filter.hpp"
#include "support/fixtures.hpp"
#include "support/naive_oracle.hpp"
#include "support/random_gen.hpp"

using namespace kgfacet;
using nlohmann::json;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::InvalidRequest;
}

std::vector<std::string> intersect(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::set<std::string> keep(b.begin(), b.end());
    std::vector<std::string> out;
    for (const auto& x : a) {
        if (keep.contains(x)) out.push_back(x);
    }
    return out;
}

}  // namespace

TEST_CASE("single value predicates") {
    auto p = fixtures::provider();
    CHECK(match_value(Quantity{3.1, std::nullopt}, NumericCmp{CmpOp::Greater, 2.5}, nullptr));
    CHECK_FALSE(match_value(Quantity{2.5, std::nullopt}, NumericCmp{CmpOp::Greater, 2.5}, nullptr));
    CHECK(match_value(Quantity{2.5, std::nullopt}, NumericCmp{CmpOp::GreaterEqual, 2.5}, nullptr));
    CHECK_FALSE(match_value(Quantity{2.0, std::nullopt}, NumericExclude{{2.0}}, nullptr));
    CHECK(match_value(Quantity{2.1, std::nullopt}, NumericExclude{{2.0}}, nullptr));
    CHECK(match_value(Quantity{3, std::nullopt}, NumericRange{3, 4, true, false}, nullptr));
    CHECK_FALSE(match_value(Quantity{4, std::nullopt}, NumericRange{3, 4, true, false}, nullptr));

    auto march = CalendarDate::parse("2020-03");
    CHECK(match_value(march, TemporalInterval{Date(2020, 3, 31), Date(2020, 4, 10)}, nullptr));
    CHECK_FALSE(match_value(march, TemporalInterval{Date(2020, 4, 1), Date(2020, 4, 10)}, nullptr));
    CHECK(match_value(march, TemporalOn{Date(2020, 3, 15)}, nullptr));
    CHECK(match_value(march, TemporalBefore{Date(2020, 4, 1)}, nullptr));
    CHECK_FALSE(match_value(march, TemporalBefore{Date(2020, 3, 31)}, nullptr));
    CHECK(match_value(march, TemporalAfter{Date(2020, 2, 29)}, nullptr));
    CHECK_FALSE(match_value(march, TemporalAfter{Date(2020, 3, 1)}, nullptr));

    auto bonn = fixtures::place(fixtures::kBonn, "Bonn");
    CHECK(match_value(bonn, TaxonomicUnder{{fixtures::kGermany}}, p.get()));
    CHECK_FALSE(match_value(bonn, TaxonomicUnder{{fixtures::kFrance}}, p.get()));
    CHECK(match_value(bonn, TaxonomicUnder{{fixtures::kFrance, fixtures::kEurope}}, p.get()));
    CHECK(match_value(bonn, TaxonomicUnder{{fixtures::kGermany}, LevelCode::Country}, p.get()));
    CHECK_FALSE(match_value(bonn, TaxonomicUnder{{fixtures::kGermany}, LevelCode::Continent}, p.get()));
    CHECK(code_of([&] { match_value(bonn, TaxonomicUnder{{fixtures::kGermany}}, nullptr); }) ==
          ErrorCode::ProviderUnavailable);

    CHECK(match_value(Text{"SEIR Model"}, CategoricalIn{{"seir model"}}, nullptr));
    CHECK(match_value(bonn, CategoricalIn{{"BONN"}}, nullptr));
    CHECK(match_value(Quantity{2.5, std::nullopt}, CategoricalIn{{"2.5"}}, nullptr));
}

TEST_CASE("kind mismatches") {
    CHECK(code_of([] { match_value(Text{"x"}, NumericCmp{CmpOp::Less, 1}, nullptr); }) == ErrorCode::KindMismatch);
    CHECK(code_of([] { match_value(Quantity{1, std::nullopt}, TemporalOn{Date(2020, 1, 1)}, nullptr); }) ==
          ErrorCode::KindMismatch);
    CHECK(code_of([] { match_value(EntityRef{"x", std::nullopt, std::nullopt}, TaxonomicUnder{{"1"}}, nullptr); }) ==
          ErrorCode::KindMismatch);

    auto facets = infer_facets(fixtures::covid_comparison());
    FilterSet wrong{{fixtures::kR0, {TemporalOn{Date(2020, 1, 1)}}}, {"P_nope", {CategoricalIn{{"x"}}}}};
    try {
        validate_filters(wrong, facets);
        FAIL("expected KindMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::KindMismatch);
        CHECK(e.detail()["mismatches"].size() == 1);
        CHECK(e.detail()["mismatches"][0]["expected"] == "numeric");
        CHECK(e.detail()["unknown_properties"] == json::array({"P_nope"}));
    }
    FilterSet unknown{{"P_nope", {CategoricalIn{{"x"}}}}};
    CHECK(code_of([&] { validate_filters(unknown, facets); }) == ErrorCode::UnknownProperty);
    FilterSet ok{{fixtures::kR0, {NumericCmp{CmpOp::Greater, 2.5}}}};
    CHECK(validate_filters(ok, facets) == ok);
}

TEST_CASE("europe and R0 above 2.5") {
    auto c = fixtures::covid_comparison();
    auto p = fixtures::provider();
    TaxonomyContext ctx{p.get()};
    auto europe = parse_filter_set(fixtures::slurp(fixtures::test_data("europe_filter.json")));

    std::vector<std::string> europe_rows;
    for (int k = 12; k <= 27; ++k) europe_rows.push_back("C200" + std::to_string(k));
    CHECK(apply_filters(c, europe, ctx).surviving == europe_rows);

    FilterSet r0{{fixtures::kR0, {NumericCmp{CmpOp::Greater, 2.5}}}};
    auto both = europe;
    both.insert(r0.begin(), r0.end());
    auto got = apply_filters(c, both, ctx).surviving;
    CHECK(got == intersect(apply_filters(c, europe, ctx).surviving, apply_filters(c, r0, ctx).surviving));
    CHECK(got == oracle::apply(c, both, oracle::hierarchy_of(*p)));
    CHECK_FALSE(got.empty());
    CHECK(got.size() < europe_rows.size());
}

TEST_CASE("one value must satisfy all filters of its property") {
    ComparisonRow row{"r", "", "", {{"x", {Quantity{1, std::nullopt}, Quantity{5, std::nullopt}}}}, false};
    Comparison c("c", "c", {row}, {});
    FilterSet split{{"x", {NumericCmp{CmpOp::Less, 2}, NumericCmp{CmpOp::Greater, 4}}}};
    CHECK(apply_filters(c, split, {}).surviving.empty());
    FilterSet one{{"x", {NumericCmp{CmpOp::Less, 2}}}};
    CHECK(apply_filters(c, one, {}).surviving.size() == 1);
}

TEST_CASE("rows without the filtered property are excluded") {
    auto c = fixtures::covid_comparison();
    FilterSet f{{fixtures::kDate, {TemporalAfter{Date(1900, 1, 1)}}}};
    auto got = apply_filters(c, f, {}).surviving;
    CHECK(got.size() == 30);
    CHECK(std::find(got.begin(), got.end(), "C20029") == got.end());
}

TEST_CASE("taxonomic filters without a provider") {
    auto c = fixtures::covid_comparison();
    FilterSet f{{fixtures::kLocation, {TaxonomicUnder{{fixtures::kEurope}}}}};
    auto degraded = apply_filters(c, f, {nullptr, true});
    CHECK(degraded.surviving.empty());
    CHECK(degraded.degraded == std::vector<std::string>{fixtures::kLocation});
    CHECK(code_of([&] { apply_filters(c, f, {nullptr, false}); }) == ErrorCode::ProviderUnavailable);
}

TEST_CASE("filter algebra on random comparisons") {
    auto p = fixtures::provider();
    auto h = oracle::hierarchy_of(*p);
    TaxonomyContext ctx{p.get()};
    gen::Random rnd(20240501, gen::all_nodes(*p));
    for (int trial = 0; trial < 60; ++trial) {
        auto g = rnd.comparison(static_cast<std::size_t>(rnd.uniform(1, 60)), static_cast<std::size_t>(rnd.uniform(1, 8)));
        const auto& c = g.comparison;
        auto f1 = rnd.filters(g);
        auto f2 = rnd.filters(g);

        auto r1 = apply_filters(c, f1, ctx).surviving;
        CHECK(r1 == oracle::apply(c, f1, h));

        // The empty set keeps everything.
        CHECK(apply_filters(c, {}, ctx).surviving == c.row_ids());

        // Idempotent on its own output.
        auto again = apply_filters(c.restricted(r1), f1, ctx).surviving;
        CHECK(again == r1);

        // Adding filters on other properties narrows to the intersection.
        FilterSet disjoint = f1;
        bool overlap = false;
        for (const auto& [prop, exprs] : f2) overlap = overlap || f1.contains(prop);
        if (!overlap) {
            disjoint.insert(f2.begin(), f2.end());
            auto r12 = apply_filters(c, disjoint, ctx).surviving;
            CHECK(r12 == intersect(r1, apply_filters(c, f2, ctx).surviving));
        }

        // Adding an expression to an existing property only removes rows.
        FilterSet tighter = f1;
        for (const auto& [prop, exprs] : f2) {
            if (f1.contains(prop)) tighter[prop].insert(tighter[prop].end(), exprs.begin(), exprs.end());
        }
        auto rt = apply_filters(c, tighter, ctx).surviving;
        CHECK(intersect(rt, r1) == rt);

        // Round trip through JSON.
        auto back = filter_set_from_json(json::parse(serialize(f1)));
        CHECK(back == f1);
        CHECK(serialize(back) == serialize(f1));
    }
}

TEST_CASE("filter json parsing") {
    auto f = parse_filter_set(R"({"P_r0": [{"type": "numeric_cmp", "op": "≥", "value": 2}],
                                  "P_date": [{"type": "temporal_interval", "start": "2020-01-01", "end": "2020-02-01"}],
                                  "P_location": [{"type": "taxonomic_under", "ancestor": "6255148", "level": "continent"}]})");
    CHECK(std::get<NumericCmp>(f.at("P_r0")[0]).op == CmpOp::GreaterEqual);
    CHECK(std::get<TaxonomicUnder>(f.at("P_location")[0]).level == LevelCode::Continent);

    try {
        parse_filter_set(R"({"P_r0": [{"type": "numeric_cmp", "op": ">", "value": }]})");
        FAIL("expected InvalidRequest");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidRequest);
        CHECK(e.detail().at("position").get<int>() > 0);
    }
    CHECK(code_of([] { parse_filter_set(R"({"P": []})"); }) == ErrorCode::InvalidRequest);
    CHECK(code_of([] { parse_filter_set(R"({"P": [{"type": "numeric_range", "low": 3, "high": 1}]})"); }) ==
          ErrorCode::InvalidRequest);
    CHECK(code_of([] { parse_filter_set(R"({"P": [{"type": "temporal_on", "date": "2020-02-30"}]})"); }) ==
          ErrorCode::InvalidRequest);
    CHECK(code_of([] { parse_filter_set(R"({"P": [{"type": "numeric_cmp", "op": "~", "value": 1}]})"); }) ==
          ErrorCode::InvalidRequest);
    CHECK(code_of([] { parse_filter_set(R"({"P": [{"type": "categorical_in", "values": []}]})"); }) ==
          ErrorCode::InvalidRequest);
    CHECK(code_of([] { parse_filter_set(R"({"P": [{"type": "taxonomic_under", "ancestors": ["1"], "level": "galaxy"}]})"); }) ==
          ErrorCode::InvalidRequest);
    CHECK(code_of([] { parse_filter_set("[]"); }) == ErrorCode::InvalidRequest);
}

TEST_CASE("descriptions") {
    CHECK(describe(NumericCmp{CmpOp::Greater, 2.5}) == "> 2.5");
    CHECK(describe(TaxonomicUnder{{fixtures::kEurope}}, {{fixtures::kEurope, "Europe"}}) == "under Europe");
    CHECK(describe(TemporalInterval{Date(2020, 1, 1), Date(2020, 2, 1)}) == "overlaps 2020-01-01 .. 2020-02-01");
}
