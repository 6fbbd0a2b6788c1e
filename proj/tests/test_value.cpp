#include <doctest.h>

#include <cmath>
#include <limits>

#include "kgfacet/error.hpp"
#include "kgfacet/value.hpp"

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

}  // namespace

TEST_CASE("dates parse strictly and print as ISO") {
    CHECK(Date::parse("2020-02-29").iso() == "2020-02-29");
    CHECK(Date(2020, 1, 5) < Date(2020, 1, 6));
    CHECK(code_of([] { Date::parse("2019-02-29"); }) == ErrorCode::InvalidValue);
    CHECK(code_of([] { Date::parse("2020-13-01"); }) == ErrorCode::InvalidValue);
    CHECK(code_of([] { Date::parse("2020-1-01"); }) == ErrorCode::InvalidValue);
    CHECK(code_of([] { Date::parse("2020"); }) == ErrorCode::InvalidValue);
    CHECK(code_of([] { Date::parse("20x0-01-01"); }) == ErrorCode::InvalidValue);
}

TEST_CASE("reduced precision dates cover their whole period") {
    auto y = CalendarDate::parse("2020");
    CHECK(y.start.iso() == "2020-01-01");
    CHECK(y.end.iso() == "2020-12-31");

    auto feb = CalendarDate::parse("2020-02");
    CHECK(feb.start.iso() == "2020-02-01");
    CHECK(feb.end.iso() == "2020-02-29");

    auto span = CalendarDate::parse("2019-12", "2020-01-22");
    CHECK(span.start.iso() == "2019-12-01");
    CHECK(span.end.iso() == "2020-01-22");

    auto point = CalendarDate::parse("2020-03-15");
    CHECK(point.is_point());

    CHECK(code_of([] { CalendarDate::parse("2020-03-15", "2020-03-01"); }) == ErrorCode::InvalidValue);
    CHECK(code_of([] { CalendarDate::parse("2020-00"); }) == ErrorCode::InvalidValue);
}

TEST_CASE("invalid values are rejected") {
    CHECK(code_of([] { validate(Quantity{std::nan(""), std::nullopt}); }) == ErrorCode::InvalidValue);
    CHECK(code_of([] { validate(Quantity{std::numeric_limits<double>::infinity(), std::nullopt}); }) ==
          ErrorCode::InvalidValue);
    CHECK(code_of([] { validate(EntityRef{"", std::nullopt, std::nullopt}); }) == ErrorCode::InvalidValue);
    CHECK(code_of([] {
              validate(EntityRef{"L1", std::nullopt, ExternalLink{"geonames", "1", "not a url"}});
          }) == ErrorCode::InvalidValue);
    CHECK(code_of([] { validate(EntityRef{"L1", std::nullopt, ExternalLink{"geonames", "", "http://x/"}}); }) ==
          ErrorCode::InvalidValue);
    CHECK_NOTHROW(validate(EntityRef{"L1", std::nullopt, ExternalLink{"geonames", "1", "https://sws.geonames.org/1/"}}));
}

TEST_CASE("display strings") {
    CHECK(display_string(Text{"SEIR model"}) == "SEIR model");
    CHECK(display_string(Quantity{2.5, std::nullopt}) == "2.5");
    CHECK(display_string(Quantity{7, std::string("day")}) == "7 day");
    CHECK(display_string(Quantity{0.1, std::nullopt}) == "0.1");
    CHECK(display_string(CalendarDate::parse("2020-03-01")) == "2020-03-01");
    CHECK(display_string(CalendarDate::parse("2020-03")) == "2020-03-01/2020-03-31");
    CHECK(display_string(EntityRef{"L1", std::string("Bonn"), std::nullopt}) == "Bonn");
    CHECK(display_string(EntityRef{"L1", std::nullopt, std::nullopt}) == "L1");
}

TEST_CASE("json codec round-trips every kind") {
    std::vector<Value> values{
        Text{"x"},
        Quantity{3.49, std::nullopt},
        Quantity{7.5, std::string("day")},
        CalendarDate::parse("2020-01-10", "2020-01-24"),
        CalendarDate::parse("2020-01-10"),
        EntityRef{"L2946447", std::string("Bonn"), ExternalLink{"geonames", "2946447", "https://sws.geonames.org/2946447/"}},
        EntityRef{"E1", std::nullopt, std::nullopt},
    };
    for (const auto& v : values) {
        CHECK(value_from_json(to_json(v)) == v);
        CHECK(kind_of(value_from_json(json::parse(to_json(v).dump()))) == kind_of(v));
    }
}

TEST_CASE("json codec rejects malformed values") {
    CHECK(code_of([] { value_from_json(json::array()); }) == ErrorCode::InvalidValue);
    CHECK(code_of([] { value_from_json(json{{"type", "blob"}}); }) == ErrorCode::InvalidValue);
    CHECK(code_of([] { value_from_json(json{{"type", "quantity"}, {"value", "3"}}); }) == ErrorCode::InvalidValue);
    CHECK(code_of([] { value_from_json(json{{"type", "text"}}); }) == ErrorCode::InvalidValue);
    CHECK(code_of([] { value_from_json(json{{"type", "date"}, {"start", "2020-02-30"}}); }) == ErrorCode::InvalidValue);
    CHECK(code_of([] { value_from_json(json{{"type", "entity"}, {"id", "x"}, {"link", 3}}); }) ==
          ErrorCode::InvalidValue);
}
