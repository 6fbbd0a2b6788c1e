#include "kgfacet/value.hpp"

#include <charconv>
#include <cmath>
#include <regex>

#include "kgfacet/error.hpp"

namespace kgfacet {

using nlohmann::json;
namespace chr = std::chrono;

namespace {

int parse_digits(std::string_view s, std::string_view whole) {
    int out = 0;
    for (char c : s) {
        if (c < '0' || c > '9') {
            throw Error(ErrorCode::InvalidValue, "malformed date '" + std::string(whole) + "'");
        }
        out = out * 10 + (c - '0');
    }
    return out;
}

struct Covering {
    Date first;
    Date last;
};

// YYYY | YYYY-MM | YYYY-MM-DD
Covering parse_covering(std::string_view s) {
    if (s.size() != 4 && s.size() != 7 && s.size() != 10) {
        throw Error(ErrorCode::InvalidValue, "malformed date '" + std::string(s) + "'");
    }
    int y = parse_digits(s.substr(0, 4), s);
    if (s.size() == 4) {
        return {Date(y, 1, 1), Date(y, 12, 31)};
    }
    if (s[4] != '-') throw Error(ErrorCode::InvalidValue, "malformed date '" + std::string(s) + "'");
    auto m = static_cast<unsigned>(parse_digits(s.substr(5, 2), s));
    if (s.size() == 7) {
        if (m < 1 || m > 12) throw Error(ErrorCode::InvalidValue, "month out of range in '" + std::string(s) + "'");
        auto last = chr::year_month_day_last(chr::year(y), chr::month_day_last(chr::month(m)));
        return {Date(y, m, 1), Date(chr::sys_days(last))};
    }
    if (s[7] != '-') throw Error(ErrorCode::InvalidValue, "malformed date '" + std::string(s) + "'");
    auto d = static_cast<unsigned>(parse_digits(s.substr(8, 2), s));
    Date day(y, m, d);
    return {day, day};
}

}  // namespace

Date::Date(int year, unsigned month, unsigned day) {
    chr::year_month_day ymd{chr::year(year), chr::month(month), chr::day(day)};
    if (!ymd.ok()) {
        throw Error(ErrorCode::InvalidValue, "invalid calendar date " + std::to_string(year) + "-" +
                                                 std::to_string(month) + "-" + std::to_string(day));
    }
    day_ = chr::sys_days(ymd);
}

Date Date::parse(std::string_view iso) {
    if (iso.size() != 10) throw Error(ErrorCode::InvalidValue, "expected YYYY-MM-DD, got '" + std::string(iso) + "'");
    return parse_covering(iso).first;
}

std::string Date::iso() const {
    chr::year_month_day ymd(day_);
    int y = static_cast<int>(ymd.year());
    if (y < 0 || y > 9999) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", y, static_cast<unsigned>(ymd.month()),
                      static_cast<unsigned>(ymd.day()));
        return buf;
    }
    auto m = static_cast<unsigned>(ymd.month());
    auto d = static_cast<unsigned>(ymd.day());
    std::string out(10, '-');
    out[0] = static_cast<char>('0' + y / 1000);
    out[1] = static_cast<char>('0' + y / 100 % 10);
    out[2] = static_cast<char>('0' + y / 10 % 10);
    out[3] = static_cast<char>('0' + y % 10);
    out[5] = static_cast<char>('0' + m / 10);
    out[6] = static_cast<char>('0' + m % 10);
    out[8] = static_cast<char>('0' + d / 10);
    out[9] = static_cast<char>('0' + d % 10);
    return out;
}

CalendarDate CalendarDate::parse(std::string_view start, std::optional<std::string_view> end) {
    auto s = parse_covering(start);
    auto e = end ? parse_covering(*end) : s;
    CalendarDate out{s.first, e.last};
    if (out.end < out.start) {
        throw Error(ErrorCode::InvalidValue, "date range ends before it starts: " + out.start.iso() + " > " + out.end.iso());
    }
    return out;
}

std::string_view to_string(ValueKind kind) {
    switch (kind) {
    case ValueKind::Text: return "text";
    case ValueKind::Quantity: return "quantity";
    case ValueKind::CalendarDate: return "date";
    case ValueKind::EntityRef: return "entity";
    }
    return "?";
}

std::string format_number(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::string display_string(const Value& v) {
    return std::visit(
        [](const auto& x) -> std::string {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, Text>) {
                return x.text;
            } else if constexpr (std::is_same_v<T, Quantity>) {
                auto s = format_number(x.magnitude);
                if (x.unit) s += " " + *x.unit;
                return s;
            } else if constexpr (std::is_same_v<T, CalendarDate>) {
                return x.is_point() ? x.start.iso() : x.start.iso() + "/" + x.end.iso();
            } else {
                return x.display();
            }
        },
        v);
}

void validate(const ExternalLink& link) {
    static const std::regex url_re(R"(^[A-Za-z][A-Za-z0-9+.\-]*://[^\s/?#]+[^\s]*$)");
    if (link.graph.empty() || link.external_id.empty() || link.url.empty()) {
        throw Error(ErrorCode::InvalidValue, "external link fields must be non-empty");
    }
    if (!std::regex_match(link.url, url_re)) {
        throw Error(ErrorCode::InvalidValue, "external link url is not a valid URL: '" + link.url + "'");
    }
}

void validate(const Value& v) {
    if (const auto* q = std::get_if<Quantity>(&v); q && !std::isfinite(q->magnitude)) {
        throw Error(ErrorCode::InvalidValue, "quantity magnitude must be finite");
    }
    if (const auto* d = std::get_if<CalendarDate>(&v); d && d->end < d->start) {
        throw Error(ErrorCode::InvalidValue, "date range ends before it starts");
    }
    if (const auto* e = std::get_if<EntityRef>(&v)) {
        if (e->id.empty()) throw Error(ErrorCode::InvalidValue, "entity id must be non-empty");
        if (e->link) validate(*e->link);
    }
}

json to_json(const Value& v) {
    return std::visit(
        [](const auto& x) -> json {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, Text>) {
                return {{"type", "text"}, {"value", x.text}};
            } else if constexpr (std::is_same_v<T, Quantity>) {
                json j{{"type", "quantity"}, {"value", x.magnitude}};
                if (x.unit) j["unit"] = *x.unit;
                return j;
            } else if constexpr (std::is_same_v<T, CalendarDate>) {
                json j{{"type", "date"}, {"start", x.start.iso()}};
                if (!x.is_point()) j["end"] = x.end.iso();
                return j;
            } else {
                json j{{"type", "entity"}, {"id", x.id}};
                if (x.label) j["label"] = *x.label;
                if (x.link) {
                    j["link"] = {{"graph", x.link->graph}, {"external_id", x.link->external_id}, {"url", x.link->url}};
                }
                return j;
            }
        },
        v);
}

namespace {

const json& require(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) throw Error(ErrorCode::InvalidValue, std::string("value is missing field '") + key + "'");
    return *it;
}

std::string require_string(const json& j, const char* key) {
    const auto& f = require(j, key);
    if (!f.is_string()) throw Error(ErrorCode::InvalidValue, std::string("field '") + key + "' must be a string");
    return f.get<std::string>();
}

}  // namespace

Value value_from_json(const json& j) {
    if (!j.is_object()) throw Error(ErrorCode::InvalidValue, "value must be a JSON object");
    auto type = require_string(j, "type");
    Value out;
    if (type == "text") {
        out = Text{require_string(j, "value")};
    } else if (type == "quantity") {
        const auto& n = require(j, "value");
        if (!n.is_number()) throw Error(ErrorCode::InvalidValue, "quantity value must be a number");
        Quantity q{n.get<double>(), std::nullopt};
        if (j.contains("unit") && !j["unit"].is_null()) q.unit = require_string(j, "unit");
        out = q;
    } else if (type == "date") {
        auto start = require_string(j, "start");
        std::optional<std::string> end;
        if (j.contains("end") && !j["end"].is_null()) end = require_string(j, "end");
        out = end ? CalendarDate::parse(start, std::string_view(*end)) : CalendarDate::parse(start);
    } else if (type == "entity") {
        EntityRef e{require_string(j, "id"), std::nullopt, std::nullopt};
        if (j.contains("label") && !j["label"].is_null()) e.label = require_string(j, "label");
        if (j.contains("link") && !j["link"].is_null()) {
            const auto& l = j["link"];
            if (!l.is_object()) throw Error(ErrorCode::InvalidValue, "entity link must be an object");
            e.link = ExternalLink{require_string(l, "graph"), require_string(l, "external_id"), require_string(l, "url")};
        }
        out = std::move(e);
    } else {
        throw Error(ErrorCode::InvalidValue, "unknown value type '" + type + "'");
    }
    validate(out);
    return out;
}

}  // namespace kgfacet
