#pragma once

#include "nicert/concrete.hpp"
#include "nicert/machine_common.hpp"
#include "nicert/policy.hpp"
#include "nicert/rules.hpp"

namespace nicert {

// Value together with the confidentiality level of its computation.
struct LValue {
    Value v;
    Label label = Label::Low;
    bool operator==(const LValue& o) const { return v == o.v && label == o.label; }
};

// Store cell: value plus its stored label (which may be a change label).
struct ExtCell {
    Value v;
    StoredLabel sl = StoredLabel::Low;
    bool operator==(const ExtCell& o) const { return v == o.v && sl == o.sl; }
};

struct EKItem {
    enum Op {
        Stmt, Expr, Val, BinRhs, BinApply, UnApply, Branch, WhileCont, AssignTo,
        FieldAddr, FieldGet, Args, Declare, Discard, Print, Return, PopLstack,
        BlockExit,
        Restore,  // reinstate the context label saved at a conditional
    };
    Op op;
    int node = -1;
    LValue value;
    Loc loc = -1;
    bool flag = false;
    std::vector<LValue> collected;
    int next_arg = 0;
    Label ctx = Label::Low;    // Restore payload; AssignTo: receiver label to join

    bool operator==(const EKItem& o) const {
        return op == o.op && node == o.node && value == o.value && loc == o.loc &&
               flag == o.flag && collected == o.collected && next_arg == o.next_arg &&
               ctx == o.ctx;
    }
};

using ECont = std::vector<EKItem>;

struct ELoopFrame {
    ECont continue_k;
    ECont break_k;
    size_t env_depth;
    bool operator==(const ELoopFrame&) const = default;
};

struct ECallFrame {
    Env saved_env;
    std::vector<ELoopFrame> saved_lstack;
    ECont saved_k;
    bool deliver_value;
    Label saved_cl;
    bool operator==(const ECallFrame&) const = default;
};

struct ExtOut {
    Value v;
    Label label;
    bool operator==(const ExtOut&) const = default;
};

struct ExtConfig {
    const Program* program = nullptr;
    StaticLayout statics;
    ECont k;
    Env env;
    std::map<Loc, ExtCell> store;
    std::vector<ELoopFrame> lstack;
    std::vector<ECallFrame> fstack;
    std::vector<ExtOut> output;
    Label cl = Label::Low;  // context label
    Loc next_loc = 0;
    long long steps = 0;

    bool final() const { return k.empty() && fstack.empty(); }
};

struct ExtFinalState {
    std::map<std::string, ExtCell> vars;
    std::vector<ExtOut> output;
};

// Per-trace strong non-interference verdict: every Low-policy variable must
// end with stored label exactly Low.
struct Verdict {
    bool pass = true;
    std::vector<std::pair<std::string, StoredLabel>> witness;
};

struct ExtTraceEntry {
    Rule rule;
    Label cl;  // context label after the step
};

ExtConfig boot_extended(const Program& program);
Rule step_extended(ExtConfig& cfg);

// Overwrites labels of inputs-to-be and everything reachable from static
// roots with the policy's initial assignment. Call between static
// initialization and enter_main_extended.
void stamp_labels(ExtConfig& cfg, const NIPolicy& policy);
void enter_main_extended(ExtConfig& cfg, const NIPolicy& policy,
                         const std::map<std::string, Value>& inputs);

std::map<std::string, ExtCell> project_vars_extended(const ExtConfig& cfg);

std::pair<ExtFinalState, Verdict> run_extended(const Program& program, const NIPolicy& policy,
                                               const std::map<std::string, Value>& inputs,
                                               const RunLimits& limits = {},
                                               std::vector<ExtTraceEntry>* trace = nullptr);

Verdict check_final(const ExtFinalState& st, const NIPolicy& policy);

// First projection: drops all label instrumentation. restoreLEnv
// continuation entries vanish, everything else maps one to one.
ConcreteConfig erase(const ExtConfig& cfg);

}  // namespace nicert
