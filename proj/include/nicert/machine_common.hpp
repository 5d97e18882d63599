#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "nicert/ast.hpp"
#include "nicert/diagnostics.hpp"

namespace nicert {

using Loc = int32_t;

inline constexpr long long kDefaultStepLimit = 1000000;

// Concrete runtime value. Object values carry the locations of their fields,
// so copies alias the same storage.
struct Value {
    enum Kind { Uninit, Void, Int, Bool, Object };
    Kind kind = Uninit;
    BigInt i;
    bool b = false;
    int class_index = -1;
    std::vector<Loc> field_locs;

    static Value of_int(BigInt v) {
        Value x;
        x.kind = Int;
        x.i = std::move(v);
        return x;
    }
    static Value of_bool(bool v) {
        Value x;
        x.kind = Bool;
        x.b = v;
        return x;
    }
    static Value void_value() {
        Value x;
        x.kind = Void;
        return x;
    }
    static Value object(int ci, std::vector<Loc> locs) {
        Value x;
        x.kind = Object;
        x.class_index = ci;
        x.field_locs = std::move(locs);
        return x;
    }

    bool operator==(const Value& o) const {
        if (kind != o.kind) return false;
        switch (kind) {
        case Int: return i == o.i;
        case Bool: return b == o.b;
        case Object: return class_index == o.class_index && field_locs == o.field_locs;
        default: return true;
        }
    }

    std::string show() const;  // "5", "true", "<C#k>"
};

// Lexical scopes of the current method, innermost last.
struct Env {
    std::vector<std::vector<std::pair<std::string, Loc>>> scopes;

    void push_scope() { scopes.emplace_back(); }
    void pop_scope() { scopes.pop_back(); }
    void bind(const std::string& name, Loc loc) { scopes.back().push_back({name, loc}); }
    const Loc* lookup(const std::string& name) const {
        for (auto it = scopes.rbegin(); it != scopes.rend(); ++it)
            for (auto f = it->rbegin(); f != it->rend(); ++f)
                if (f->first == name) return &f->second;
        return nullptr;
    }
    bool operator==(const Env& o) const { return scopes == o.scopes; }
};

// Locations of static fields, assigned at boot: [class][field].
struct StaticLayout {
    std::vector<std::vector<Loc>> locs;

    static StaticLayout make(const Program& p) {
        StaticLayout out;
        Loc next = 0;
        out.locs.resize(p.classes.size());
        for (size_t ci = 0; ci < p.classes.size(); ci++)
            for (size_t fi = 0; fi < p.classes[ci].static_fields.size(); fi++)
                out.locs[ci].push_back(next++);
        return out;
    }
    Loc total() const {
        Loc n = 0;
        for (const auto& v : locs) n += static_cast<Loc>(v.size());
        return n;
    }
};

// Scalar projection of a machine state onto named variable paths
// ("Class.field", "Class.field.sub", input names).
struct FinalState {
    std::map<std::string, Value> vars;
    std::vector<Value> output;
};

struct RunLimits {
    long long step_limit = kDefaultStepLimit;
};

}  // namespace nicert
