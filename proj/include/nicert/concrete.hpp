#pragma once

#include <optional>

#include "nicert/machine_common.hpp"
#include "nicert/policy.hpp"
#include "nicert/rules.hpp"

namespace nicert {

// Continuation item of the standard machine.
struct CKItem {
    enum Op {
        Stmt,       // execute statement `node`
        Expr,       // evaluate expression `node`
        Val,        // computed value waiting for its consumer
        BinRhs,     // lhs done; evaluate rhs of binary `node`
        BinApply,   // rhs done; apply binary `node` (value = lhs)
        UnApply,    // apply unary `node`
        Branch,     // guard done; pick branch (flag: while-form)
        WhileCont,  // re-evaluate loop guard of while `node`
        AssignTo,   // value done; write to `loc`
        FieldAddr,  // assignment receiver done; `node` = Assign stmt
        FieldGet,   // receiver done; read field of access expr `node`
        Args,       // collecting call/new arguments (flag: new)
        Declare,    // initializer done; bind local of declare `node`
        Discard,    // drop statement-expression result
        Print,      // print value
        Return,     // return value to caller
        PopLstack,  // leave loop normally
        BlockExit,  // pop lexical scope
    };
    Op op;
    int node = -1;
    Value value;  // Val payload / BinApply lhs
    Loc loc = -1;
    bool flag = false;
    std::vector<Value> collected;  // Args
    int next_arg = 0;

    bool operator==(const CKItem& o) const {
        return op == o.op && node == o.node && value == o.value && loc == o.loc &&
               flag == o.flag && collected == o.collected && next_arg == o.next_arg;
    }
};

using CCont = std::vector<CKItem>;  // back = top

struct CLoopFrame {
    CCont continue_k;  // resumes at the while continuation
    CCont break_k;     // continuation after the whole loop
    size_t env_depth;
    bool operator==(const CLoopFrame& o) const {
        return continue_k == o.continue_k && break_k == o.break_k && env_depth == o.env_depth;
    }
};

struct CCallFrame {
    Env saved_env;
    std::vector<CLoopFrame> saved_lstack;
    CCont saved_k;
    bool deliver_value;
    bool operator==(const CCallFrame& o) const {
        return saved_env == o.saved_env && saved_lstack == o.saved_lstack &&
               saved_k == o.saved_k && deliver_value == o.deliver_value;
    }
};

struct ConcreteConfig {
    const Program* program = nullptr;
    StaticLayout statics;
    CCont k;
    Env env;
    std::map<Loc, Value> store;
    std::vector<CLoopFrame> lstack;
    std::vector<CCallFrame> fstack;
    std::vector<Value> output;
    Loc next_loc = 0;
    long long steps = 0;

    bool final() const { return k.empty() && fstack.empty(); }
    bool operator==(const ConcreteConfig& o) const {
        return k == o.k && env == o.env && store == o.store && lstack == o.lstack &&
               fstack == o.fstack && output == o.output && next_loc == o.next_loc;
    }
};

// Initial configuration: static fields allocated, the synthesized static
// initializers pending on the continuation. main is not yet entered.
ConcreteConfig boot_concrete(const Program& program);

// One deterministic step; returns the rule that fired. Precondition: !final.
Rule step_concrete(ConcreteConfig& cfg);

// Enter main with the given inputs. The boot configuration must have run to
// completion (empty continuation) first.
void enter_main(ConcreteConfig& cfg, const std::map<std::string, Value>& inputs);

// Full run: boot, static init, main, projection.
FinalState run_concrete(const Program& program, const std::map<std::string, Value>& inputs,
                        const RunLimits& limits = {}, std::vector<Rule>* trace = nullptr);

// Scalar projection of the current store (statics + reachable fields).
std::map<std::string, Value> project_vars(const ConcreteConfig& cfg);

// Initial-state projection: statics after boot plus the declared inputs.
FinalState initial_state(const Program& program, const std::map<std::string, Value>& inputs,
                         const RunLimits& limits = {});

// Def.-1 state indistinguishability at level Low. Printed output is
// Low-observable, so output sequences must match too.
bool low_equal(const FinalState& a, const FinalState& b, const NIPolicy& policy);

// Checks the inputs map against the program's declared inputs.
void validate_inputs(const Program& program, const std::map<std::string, Value>& inputs);

}  // namespace nicert
