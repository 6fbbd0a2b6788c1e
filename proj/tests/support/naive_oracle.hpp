#pragma once

// Reference interpreter for filters, written without the library's matching
// or chain code. It walks parent pointers in the raw node table, compares
// dates as ISO strings and renders numbers with iostreams. Used only to
// check apply_filters and the federation scenarios.

#include <chrono>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "kgfacet/comparison.hpp"
#include "kgfacet/filter.hpp"
#include "kgfacet/taxonomy.hpp"

namespace oracle {

struct RawNode {
    std::string parent;  // empty at a root
    std::string code;
    std::string label;
};

using Hierarchy = std::map<std::string, RawNode>;

inline Hierarchy hierarchy_of(const kgfacet::FixtureProvider& p) {
    Hierarchy h;
    for (const auto& [id, n] : p.nodes()) h[id] = RawNode{n.parent_id.value_or(""), n.feature_code, n.label};
    return h;
}

/// Leaf itself, then each parent, by pointer chasing. Empty when unknown.
inline std::vector<std::string> ancestors(const Hierarchy& h, const std::string& leaf) {
    std::vector<std::string> out;
    std::string cur = leaf;
    for (int steps = 0; steps < 64 && !cur.empty(); ++steps) {
        auto it = h.find(cur);
        if (it == h.end()) return out.empty() ? out : std::vector<std::string>{};
        out.push_back(cur);
        cur = it->second.parent;
    }
    return out;
}

inline int level_rank(const std::string& code) {
    if (code == "CONT") return 0;
    if (code == "PCLI") return 1;
    if (code == "ADM1") return 2;
    if (code.rfind("PPL", 0) == 0) return 3;
    return -1;
}

inline std::string at_level(const Hierarchy& h, const std::string& leaf, kgfacet::LevelCode level) {
    auto chain = ancestors(h, leaf);
    if (chain.empty()) return "";
    if (level == kgfacet::LevelCode::Leaf) return chain.front();
    for (const auto& id : chain) {
        if (level_rank(h.at(id).code) == static_cast<int>(level)) return id;
    }
    return "";
}

inline std::string lower(std::string s) {
    for (auto& c : s) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c + 32);
    }
    return s;
}

inline std::string iso(const kgfacet::Date& d) {
    std::chrono::year_month_day ymd(d.days());
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", int(ymd.year()), unsigned(ymd.month()), unsigned(ymd.day()));
    return buf;
}

// Exact for the "nice" magnitudes the generators produce (multiples of 0.5).
inline std::string number(double x) {
    std::ostringstream os;
    os << x;
    return os.str();
}

inline std::string shown(const kgfacet::Value& v) {
    using namespace kgfacet;
    if (auto* t = std::get_if<Text>(&v)) return t->text;
    if (auto* q = std::get_if<Quantity>(&v)) return number(q->magnitude) + (q->unit ? " " + *q->unit : "");
    if (auto* d = std::get_if<CalendarDate>(&v)) {
        auto a = iso(d->start), b = iso(d->end);
        return a == b ? a : a + "/" + b;
    }
    const auto& e = std::get<EntityRef>(v);
    return e.label ? *e.label : e.id;
}

inline bool holds(const kgfacet::Value& v, const kgfacet::FilterExpr& f, const Hierarchy& h) {
    using namespace kgfacet;
    if (auto* c = std::get_if<CategoricalIn>(&f)) {
        for (const auto& s : c->values) {
            if (lower(s) == lower(shown(v))) return true;
        }
        return false;
    }
    if (auto* q = std::get_if<Quantity>(&v)) {
        double x = q->magnitude;
        if (auto* e = std::get_if<NumericCmp>(&f)) {
            switch (e->op) {
            case CmpOp::Less: return x < e->bound;
            case CmpOp::LessEqual: return !(x > e->bound);
            case CmpOp::Greater: return x > e->bound;
            case CmpOp::GreaterEqual: return !(x < e->bound);
            case CmpOp::Equal: return !(x < e->bound) && !(x > e->bound);
            case CmpOp::NotEqual: return x < e->bound || x > e->bound;
            }
        }
        if (auto* e = std::get_if<NumericRange>(&f)) {
            if (x < e->low || (x == e->low && !e->low_inclusive)) return false;
            if (x > e->high || (x == e->high && !e->high_inclusive)) return false;
            return true;
        }
        if (auto* e = std::get_if<NumericExclude>(&f)) {
            for (double y : e->values) {
                if (y == x) return false;
            }
            return true;
        }
        return false;
    }
    if (auto* d = std::get_if<CalendarDate>(&v)) {
        auto s = iso(d->start), t = iso(d->end);
        if (auto* e = std::get_if<TemporalOn>(&f)) return s <= iso(e->date) && iso(e->date) <= t;
        if (auto* e = std::get_if<TemporalBefore>(&f)) return t < iso(e->date);
        if (auto* e = std::get_if<TemporalAfter>(&f)) return s > iso(e->date);
        if (auto* e = std::get_if<TemporalInterval>(&f)) return !(t < iso(e->start)) && !(s > iso(e->end));
        return false;
    }
    if (auto* ent = std::get_if<EntityRef>(&v)) {
        auto* e = std::get_if<TaxonomicUnder>(&f);
        if (!e || !ent->link) return false;
        const auto& leaf = ent->link->external_id;
        for (const auto& a : e->ancestors) {
            if (e->level) {
                if (at_level(h, leaf, *e->level) == a) return true;
            } else {
                for (const auto& x : ancestors(h, leaf)) {
                    if (x == a) return true;
                }
            }
        }
        return false;
    }
    return false;
}

inline std::vector<std::string> apply(const kgfacet::Comparison& c, const kgfacet::FilterSet& filters,
                                      const Hierarchy& h) {
    std::vector<std::string> out;
    for (const auto& row : c.rows()) {
        bool ok = true;
        for (const auto& [prop, exprs] : filters) {
            auto it = row.cells.find(prop);
            bool some = false;
            if (it != row.cells.end()) {
                for (const auto& v : it->second) {
                    bool all = true;
                    for (const auto& f : exprs) all = all && holds(v, f, h);
                    some = some || all;
                }
            }
            ok = ok && some;
        }
        if (ok) out.push_back(row.contribution_id);
    }
    return out;
}

}  // namespace oracle
