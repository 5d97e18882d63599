#include "nicert/rules.hpp"

namespace nicert {

namespace {
const char* kNames[kRuleCount] = {
    "const",
    "var-read",
    "field-sched",
    "field-read",
    "bin-sched",
    "bin-rhs",
    "bin-apply",
    "un-sched",
    "un-apply",
    "assign-addr",
    "assign-field-sched",
    "assign-field-addr",
    "store",
    "declare-sched",
    "declare-bind",
    "block-enter",
    "block-exit",
    "if-setup",
    "if-setup-abrupt",
    "while-setup",
    "while-expand",
    "branch-then",
    "branch-else",
    "pop-lstack",
    "restore-ctx",
    "break",
    "continue",
    "return-sched",
    "return-value",
    "return-void",
    "call-sched",
    "call-arg",
    "call-invoke",
    "new-sched",
    "new-arg",
    "new-alloc",
    "expr-stmt-sched",
    "discard",
    "print-sched",
    "print",
};
}  // namespace

const char* rule_name(Rule r) { return kNames[static_cast<int>(r)]; }

bool rule_from_name(const std::string& name, Rule& out) {
    for (int i = 0; i < kRuleCount; i++) {
        if (name == kNames[i]) {
            out = static_cast<Rule>(i);
            return true;
        }
    }
    return false;
}

}  // namespace nicert
