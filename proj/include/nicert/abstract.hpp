#pragma once

#include <optional>
#include <tuple>

#include "nicert/extended.hpp"
#include "nicert/machine_common.hpp"
#include "nicert/policy.hpp"
#include "nicert/rules.hpp"

namespace nicert {

// Label-only runtime value. Scalars erase to their confidentiality level;
// object references keep their shape, which is control structure.
struct AbsValue {
    enum Kind { Scalar, Object, Void };
    Kind kind = Scalar;
    Label label = Label::Low;
    int class_index = -1;
    std::vector<Loc> field_locs;

    static AbsValue scalar(Label l) { return {Scalar, l, -1, {}}; }
    static AbsValue void_value() { return {Void, Label::Low, -1, {}}; }
    static AbsValue object(Label l, int ci, std::vector<Loc> locs) {
        return {Object, l, ci, std::move(locs)};
    }
    bool operator==(const AbsValue&) const = default;
};

struct AbsCell {
    enum Kind { Uninit, Scalar, Object };
    Kind kind = Uninit;
    StoredLabel sl = StoredLabel::Low;
    int class_index = -1;
    std::vector<Loc> field_locs;
    bool operator==(const AbsCell&) const = default;
};

struct AKItem {
    enum Op {
        Stmt, Expr, Val, BinRhs, BinApply, UnApply, Branch, WhileCont, AssignTo,
        FieldAddr, FieldGet, Args, Declare, Discard, Print, Return, PopLstack,
        BlockExit, Restore,
    };
    Op op;
    int node = -1;
    AbsValue value;
    Loc loc = -1;
    bool flag = false;
    std::vector<AbsValue> collected;
    int next_arg = 0;
    Label ctx = Label::Low;
    bool operator==(const AKItem&) const = default;
};

using ACont = std::vector<AKItem>;

struct ALoopFrame {
    ACont continue_k;
    ACont break_k;
    size_t env_depth;
    bool operator==(const ALoopFrame&) const = default;
};

struct ACallFrame {
    Env saved_env;
    std::vector<ALoopFrame> saved_lstack;
    ACont saved_k;
    bool deliver_value;
    Label saved_cl;
    bool operator==(const ACallFrame&) const = default;
};

struct AbsConfig {
    const Program* program = nullptr;
    ACont k;
    Env env;
    std::map<Loc, AbsCell> store;
    std::vector<ALoopFrame> lstack;
    std::vector<ACallFrame> fstack;
    Label cl = Label::Low;
    Loc next_loc = 0;

    bool final() const { return k.empty() && fstack.empty(); }
};

// One abstract successor, with the println diagnostic if the step printed.
struct AbsSucc {
    Rule rule;
    AbsConfig cfg;
    std::optional<Label> printed;
};

// Canonical initial abstract state: static initializers executed (they must
// be branch-free), labels stamped from the policy, inputs bound to their
// policy labels, main pending.
AbsConfig lift(const Program& program, const NIPolicy& policy);

// All one-step successors in catalog order; branch steps yield two. Results
// are canonicalized. Empty iff the state is final.
std::vector<AbsSucc> abstract_successors(const AbsConfig& cfg);

// Renames locations into a fixed traversal order and drops unreachable
// store entries; equal canonical serializations = equal states.
void canonicalize(AbsConfig& cfg);
std::string serialize_config(const AbsConfig& cfg);
AbsConfig parse_config(const std::string& text, const Program& program);

// Label projection of an abstract store onto variable paths.
std::map<std::string, StoredLabel> project_store(const AbsConfig& cfg);

struct ReachGraph {
    std::vector<std::string> nodes;  // canonical serializations, id = index
    std::vector<std::tuple<int, Rule, int>> edges;
    std::vector<int> finals;

    // Canonical text: one node per line "N<id> <state>", one edge per line
    // "E <src> <rule> <dst>".
    std::string serialize() const;
};

struct ExploreOptions {
    bool parallel = true;
    long long state_budget = 1000000;
};

struct ExploreResult {
    ReachGraph graph;
    Verdict verdict;
    std::vector<Label> print_labels;  // one entry per print edge, in edge order
};

ExploreResult explore(const Program& program, const NIPolicy& policy,
                      const ExploreOptions& opts = {});
// Single-threaded reference exploration; must produce the identical graph.
ExploreResult explore_serial(const Program& program, const NIPolicy& policy,
                             const ExploreOptions& opts = {});

}  // namespace nicert
