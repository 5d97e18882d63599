#pragma once

#include <string>

namespace nicert {

// Fixed catalog of small-step rule names. Certificates record these; the
// two branch rules are the only ones that fork the abstract state space.
enum class Rule : unsigned char {
    Const,
    VarRead,
    FieldSched,
    FieldRead,
    BinSched,
    BinRhs,
    BinApply,
    UnSched,
    UnApply,
    AssignAddr,
    AssignFieldSched,
    AssignFieldAddr,
    Store,
    DeclareSched,
    DeclareBind,
    BlockEnter,
    BlockExit,
    IfSetup,
    IfSetupAbrupt,
    WhileSetup,
    WhileExpand,
    BranchThen,
    BranchElse,
    PopLstack,
    RestoreCtx,
    Break,
    Continue,
    ReturnSched,
    ReturnValue,
    ReturnVoid,
    CallSched,
    CallArg,
    CallInvoke,
    NewSched,
    NewArg,
    NewAlloc,
    ExprStmtSched,
    Discard,
    PrintSched,
    Print,
};

constexpr int kRuleCount = static_cast<int>(Rule::Print) + 1;

const char* rule_name(Rule r);
bool rule_from_name(const std::string& name, Rule& out);

inline bool is_branch_rule(Rule r) {
    return r == Rule::BranchThen || r == Rule::BranchElse;
}

}  // namespace nicert
