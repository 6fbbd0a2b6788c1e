#pragma once

#include <chrono>
#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include <json.hpp>

namespace kgfacet {

/// A proleptic Gregorian calendar day.
class Date {
public:
    Date() = default;
    explicit Date(std::chrono::sys_days day) : day_(day) {}
    Date(int year, unsigned month, unsigned day);

    /// Parses strict "YYYY-MM-DD". Throws Error(InvalidValue).
    static Date parse(std::string_view iso);

    std::chrono::sys_days days() const { return day_; }
    std::string iso() const;

    auto operator<=>(const Date&) const = default;

private:
    std::chrono::sys_days day_{};
};

struct Text {
    std::string text;
    bool operator==(const Text&) const = default;
};

struct Quantity {
    double magnitude = 0.0;
    std::optional<std::string> unit;
    bool operator==(const Quantity&) const = default;
};

/// A closed day range. A point date is a range with start == end.
struct CalendarDate {
    Date start;
    Date end;

    bool is_point() const { return start == end; }
    bool operator==(const CalendarDate&) const = default;

    /// Accepts YYYY-MM-DD, YYYY-MM or YYYY. Reduced precision expands to the
    /// covering range; with `end` given, the result spans start-of-start to
    /// end-of-end.
    static CalendarDate parse(std::string_view start, std::optional<std::string_view> end = {});
};

struct ExternalLink {
    std::string graph;
    std::string external_id;
    std::string url;
    bool operator==(const ExternalLink&) const = default;
};

struct EntityRef {
    std::string id;
    std::optional<std::string> label;
    std::optional<ExternalLink> link;

    const std::string& display() const { return label ? *label : id; }
    bool operator==(const EntityRef&) const = default;
};

using Value = std::variant<Text, Quantity, CalendarDate, EntityRef>;

enum class ValueKind { Text, Quantity, CalendarDate, EntityRef };

inline ValueKind kind_of(const Value& v) { return static_cast<ValueKind>(v.index()); }
std::string_view to_string(ValueKind kind);

/// Rendering used by categorical facets and CategoricalIn matching.
std::string display_string(const Value& v);

/// Shortest decimal text that round-trips the double.
std::string format_number(double x);

/// Throws Error(InvalidValue) when a Value breaks its type invariants.
void validate(const Value& v);
void validate(const ExternalLink& link);

/// Tagged-object codec used by the dataset format and API payloads.
nlohmann::json to_json(const Value& v);
Value value_from_json(const nlohmann::json& j);

}  // namespace kgfacet
