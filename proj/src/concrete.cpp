#include "nicert/concrete.hpp"

#include <functional>
#include <set>

namespace nicert {

namespace {

Value read_loc(const ConcreteConfig& cfg, Loc loc) {
    auto it = cfg.store.find(loc);
    if (it == cfg.store.end() || it->second.kind == Value::Uninit)
        throw RuntimeFault("read of uninitialized location");
    return it->second;
}

Loc alloc(ConcreteConfig& cfg) {
    Loc l = cfg.next_loc++;
    cfg.store[l] = Value{};  // Uninit
    return l;
}

Loc addr_of_var(ConcreteConfig& cfg, const Expr& var) {
    switch (var.var.kind) {
    case VarRef::Local: {
        const Loc* l = cfg.env.lookup(var.name);
        if (!l) throw RuntimeFault("unbound variable '" + var.name + "'");
        return *l;
    }
    case VarRef::StaticField:
        return cfg.statics.locs[var.var.class_index][var.var.field_index];
    case VarRef::ThisField: {
        const Loc* self = cfg.env.lookup("this");
        if (!self) throw RuntimeFault("no 'this' in scope");
        Value obj = read_loc(cfg, *self);
        return obj.field_locs[var.var.field_index];
    }
    default:
        throw RuntimeFault("unresolved variable");
    }
}

Value apply_binop(BinOp op, const Value& a, const Value& b) {
    switch (op) {
    case BinOp::Add: return Value::of_int(a.i + b.i);
    case BinOp::Sub: return Value::of_int(a.i - b.i);
    case BinOp::Mul: return Value::of_int(a.i * b.i);
    case BinOp::Div:
        if (b.i == 0) throw RuntimeFault("division by zero");
        return Value::of_int(a.i / b.i);
    case BinOp::Mod:
        if (b.i == 0) throw RuntimeFault("division by zero");
        return Value::of_int(a.i % b.i);
    case BinOp::Lt: return Value::of_bool(a.i < b.i);
    case BinOp::Gt: return Value::of_bool(a.i > b.i);
    case BinOp::Le: return Value::of_bool(a.i <= b.i);
    case BinOp::Ge: return Value::of_bool(a.i >= b.i);
    case BinOp::Eq: return Value::of_bool(a.kind == Value::Int ? a.i == b.i : a.b == b.b);
    case BinOp::Ne: return Value::of_bool(a.kind == Value::Int ? a.i != b.i : a.b != b.b);
    case BinOp::And: return Value::of_bool(a.b && b.b);
    case BinOp::Or: return Value::of_bool(a.b || b.b);
    }
    throw RuntimeFault("bad operator");
}

// receiver (for instance calls / field accesses) + argument expressions
std::vector<const Expr*> call_exprs(const Expr& e) {
    std::vector<const Expr*> out;
    if (e.kind == Expr::Call && e.base) out.push_back(e.base.get());
    for (const auto& a : e.args) out.push_back(a.get());
    return out;
}

void do_return(ConcreteConfig& cfg, Value v) {
    CCallFrame frame = std::move(cfg.fstack.back());
    cfg.fstack.pop_back();
    cfg.env = std::move(frame.saved_env);
    cfg.lstack = std::move(frame.saved_lstack);
    cfg.k = std::move(frame.saved_k);
    if (frame.deliver_value) cfg.k.push_back({CKItem::Val, -1, std::move(v), -1, false, {}, 0});
}

Rule invoke(ConcreteConfig& cfg, CKItem args_item) {
    const Expr& e = *cfg.program->expr_by_id[args_item.node];
    if (!args_item.flag) {
        // method call
        const ClassDecl& cls = cfg.program->classes[e.callee_class];
        const MethodDecl& m = cls.methods[e.callee_method];
        CCallFrame frame;
        frame.saved_env = std::move(cfg.env);
        frame.saved_lstack = std::move(cfg.lstack);
        frame.saved_k = std::move(cfg.k);
        frame.deliver_value = true;
        cfg.env = Env{};
        cfg.env.push_scope();
        cfg.lstack.clear();
        size_t ai = 0;
        if (e.base) {
            Loc l = alloc(cfg);
            cfg.store[l] = args_item.collected[ai++];
            cfg.env.bind("this", l);
        }
        for (const auto& p : m.params) {
            Loc l = alloc(cfg);
            cfg.store[l] = args_item.collected[ai++];
            cfg.env.bind(p.name, l);
        }
        cfg.k.clear();
        cfg.k.push_back({CKItem::Stmt, m.body->id, {}, -1, false, {}, 0});
        cfg.fstack.push_back(std::move(frame));
        return Rule::CallInvoke;
    }
    // object construction
    const ClassDecl& cls = cfg.program->classes[e.callee_class];
    std::vector<Loc> field_locs;
    for (size_t i = 0; i < cls.instance_fields.size(); i++) field_locs.push_back(alloc(cfg));
    Value obj = Value::object(e.callee_class, field_locs);

    CCallFrame frame;
    frame.saved_env = std::move(cfg.env);
    frame.saved_lstack = std::move(cfg.lstack);
    frame.saved_k = std::move(cfg.k);
    frame.saved_k.push_back({CKItem::Val, -1, obj, -1, false, {}, 0});
    frame.deliver_value = false;
    cfg.env = Env{};
    cfg.env.push_scope();
    cfg.lstack.clear();
    Loc self = alloc(cfg);
    cfg.store[self] = obj;
    cfg.env.bind("this", self);
    if (cls.ctor_index >= 0) {
        const MethodDecl& ctor = cls.methods[cls.ctor_index];
        for (size_t i = 0; i < ctor.params.size(); i++) {
            Loc l = alloc(cfg);
            cfg.store[l] = args_item.collected[i];
            cfg.env.bind(ctor.params[i].name, l);
        }
    }
    cfg.k.clear();
    if (cls.ctor_index >= 0)
        cfg.k.push_back({CKItem::Stmt, cls.methods[cls.ctor_index].body->id, {}, -1, false, {}, 0});
    for (auto it = cls.field_init.rbegin(); it != cls.field_init.rend(); ++it)
        cfg.k.push_back({CKItem::Stmt, (*it)->id, {}, -1, false, {}, 0});
    cfg.fstack.push_back(std::move(frame));
    return Rule::NewAlloc;
}

Rule exec_stmt(ConcreteConfig& cfg, const Stmt& s) {
    auto push_stmt = [&](const Stmt& c) {
        cfg.k.push_back({CKItem::Stmt, c.id, {}, -1, false, {}, 0});
    };
    auto push_expr = [&](const Expr& c) {
        cfg.k.push_back({CKItem::Expr, c.id, {}, -1, false, {}, 0});
    };
    switch (s.kind) {
    case Stmt::Block:
        cfg.env.push_scope();
        cfg.k.push_back({CKItem::BlockExit, -1, {}, -1, false, {}, 0});
        for (auto it = s.body.rbegin(); it != s.body.rend(); ++it) push_stmt(**it);
        return Rule::BlockEnter;
    case Stmt::Declare:
        cfg.k.push_back({CKItem::Declare, s.id, {}, -1, false, {}, 0});
        push_expr(*s.init);
        return Rule::DeclareSched;
    case Stmt::Assign:
        if (s.target->kind == Expr::Var) {
            Loc loc = addr_of_var(cfg, *s.target);
            cfg.k.push_back({CKItem::AssignTo, s.id, {}, loc, false, {}, 0});
            push_expr(*s.value);
            return Rule::AssignAddr;
        }
        cfg.k.push_back({CKItem::FieldAddr, s.id, {}, -1, false, {}, 0});
        push_expr(*s.target->base);
        return Rule::AssignFieldSched;
    case Stmt::If:
        cfg.k.push_back({CKItem::Branch, s.id, {}, -1, false, {}, 0});
        push_expr(*s.cond);
        return s.branch_abrupt ? Rule::IfSetupAbrupt : Rule::IfSetup;
    case Stmt::While: {
        CCont break_k = cfg.k;
        cfg.k.push_back({CKItem::PopLstack, -1, {}, -1, false, {}, 0});
        cfg.k.push_back({CKItem::WhileCont, s.id, {}, -1, false, {}, 0});
        CCont continue_k = cfg.k;
        cfg.lstack.push_back({std::move(continue_k), std::move(break_k), cfg.env.scopes.size()});
        return Rule::WhileSetup;
    }
    case Stmt::Break: {
        if (cfg.lstack.empty()) throw RuntimeFault("break outside loop");
        CLoopFrame frame = std::move(cfg.lstack.back());
        cfg.lstack.pop_back();
        cfg.k = std::move(frame.break_k);
        cfg.env.scopes.resize(frame.env_depth);
        return Rule::Break;
    }
    case Stmt::Continue: {
        if (cfg.lstack.empty()) throw RuntimeFault("continue outside loop");
        const CLoopFrame& frame = cfg.lstack.back();
        cfg.k = frame.continue_k;
        cfg.env.scopes.resize(frame.env_depth);
        return Rule::Continue;
    }
    case Stmt::Return:
        if (s.ret) {
            cfg.k.push_back({CKItem::Return, s.id, {}, -1, false, {}, 0});
            push_expr(*s.ret);
            return Rule::ReturnSched;
        }
        do_return(cfg, Value::void_value());
        return Rule::ReturnVoid;
    case Stmt::ExprStmt:
        cfg.k.push_back({CKItem::Discard, s.id, {}, -1, false, {}, 0});
        push_expr(*s.expr);
        return Rule::ExprStmtSched;
    case Stmt::Println:
        cfg.k.push_back({CKItem::Print, s.id, {}, -1, false, {}, 0});
        push_expr(*s.expr);
        return Rule::PrintSched;
    }
    throw RuntimeFault("bad statement");
}

Rule eval_expr(ConcreteConfig& cfg, const Expr& e) {
    auto push_val = [&](Value v) {
        cfg.k.push_back({CKItem::Val, -1, std::move(v), -1, false, {}, 0});
    };
    switch (e.kind) {
    case Expr::IntLit:
        push_val(Value::of_int(e.int_value));
        return Rule::Const;
    case Expr::BoolLit:
        push_val(Value::of_bool(e.bool_value));
        return Rule::Const;
    case Expr::Var:
        push_val(read_loc(cfg, addr_of_var(cfg, e)));
        return Rule::VarRead;
    case Expr::This: {
        const Loc* self = cfg.env.lookup("this");
        if (!self) throw RuntimeFault("no 'this' in scope");
        push_val(read_loc(cfg, *self));
        return Rule::VarRead;
    }
    case Expr::FieldAccess:
        cfg.k.push_back({CKItem::FieldGet, e.id, {}, -1, false, {}, 0});
        cfg.k.push_back({CKItem::Expr, e.base->id, {}, -1, false, {}, 0});
        return Rule::FieldSched;
    case Expr::Unary:
        cfg.k.push_back({CKItem::UnApply, e.id, {}, -1, false, {}, 0});
        cfg.k.push_back({CKItem::Expr, e.operand->id, {}, -1, false, {}, 0});
        return Rule::UnSched;
    case Expr::Binary:
        cfg.k.push_back({CKItem::BinRhs, e.id, {}, -1, false, {}, 0});
        cfg.k.push_back({CKItem::Expr, e.lhs->id, {}, -1, false, {}, 0});
        return Rule::BinSched;
    case Expr::Call:
    case Expr::New: {
        CKItem item{CKItem::Args, e.id, {}, -1, e.kind == Expr::New, {}, 0};
        std::vector<const Expr*> exprs = call_exprs(e);
        cfg.k.push_back(std::move(item));
        if (!exprs.empty())
            cfg.k.push_back({CKItem::Expr, exprs[0]->id, {}, -1, false, {}, 0});
        return e.kind == Expr::New ? Rule::NewSched : Rule::CallSched;
    }
    }
    throw RuntimeFault("bad expression");
}

Rule consume_value(ConcreteConfig& cfg, Value v) {
    CKItem item = std::move(cfg.k.back());
    const Program& p = *cfg.program;
    switch (item.op) {
    case CKItem::BinRhs: {
        cfg.k.pop_back();
        const Expr& e = *p.expr_by_id[item.node];
        cfg.k.push_back({CKItem::BinApply, e.id, std::move(v), -1, false, {}, 0});
        cfg.k.push_back({CKItem::Expr, e.rhs->id, {}, -1, false, {}, 0});
        return Rule::BinRhs;
    }
    case CKItem::BinApply: {
        cfg.k.pop_back();
        const Expr& e = *p.expr_by_id[item.node];
        Value r = apply_binop(e.bin_op, item.value, v);
        cfg.k.push_back({CKItem::Val, -1, std::move(r), -1, false, {}, 0});
        return Rule::BinApply;
    }
    case CKItem::UnApply: {
        cfg.k.pop_back();
        const Expr& e = *p.expr_by_id[item.node];
        Value r = e.un_op == UnOp::Neg ? Value::of_int(-v.i) : Value::of_bool(!v.b);
        cfg.k.push_back({CKItem::Val, -1, std::move(r), -1, false, {}, 0});
        return Rule::UnApply;
    }
    case CKItem::Branch: {
        cfg.k.pop_back();
        const Stmt& s = *p.stmt_by_id[item.node];
        bool taken = v.b;
        if (s.kind == Stmt::While) {
            if (taken) {
                cfg.k.push_back({CKItem::WhileCont, s.id, {}, -1, false, {}, 0});
                cfg.k.push_back({CKItem::Stmt, s.loop_body->id, {}, -1, false, {}, 0});
            }
        } else {
            if (taken)
                cfg.k.push_back({CKItem::Stmt, s.then_branch->id, {}, -1, false, {}, 0});
            else if (s.else_branch)
                cfg.k.push_back({CKItem::Stmt, s.else_branch->id, {}, -1, false, {}, 0});
        }
        return taken ? Rule::BranchThen : Rule::BranchElse;
    }
    case CKItem::AssignTo:
        cfg.k.pop_back();
        cfg.store[item.loc] = std::move(v);
        return Rule::Store;
    case CKItem::FieldAddr: {
        cfg.k.pop_back();
        const Stmt& s = *p.stmt_by_id[item.node];
        Loc loc = v.field_locs[s.target->field_index];
        cfg.k.push_back({CKItem::AssignTo, s.id, {}, loc, false, {}, 0});
        cfg.k.push_back({CKItem::Expr, s.value->id, {}, -1, false, {}, 0});
        return Rule::AssignFieldAddr;
    }
    case CKItem::FieldGet: {
        cfg.k.pop_back();
        const Expr& e = *p.expr_by_id[item.node];
        Value r = read_loc(cfg, v.field_locs[e.field_index]);
        cfg.k.push_back({CKItem::Val, -1, std::move(r), -1, false, {}, 0});
        return Rule::FieldRead;
    }
    case CKItem::Args: {
        // collector stays on the stack
        item.collected.push_back(std::move(v));
        item.next_arg++;
        const Expr& e = *p.expr_by_id[item.node];
        std::vector<const Expr*> exprs = call_exprs(e);
        int next = item.next_arg;
        bool is_new = item.flag;
        cfg.k.back() = std::move(item);
        if (next < static_cast<int>(exprs.size()))
            cfg.k.push_back({CKItem::Expr, exprs[next]->id, {}, -1, false, {}, 0});
        return is_new ? Rule::NewArg : Rule::CallArg;
    }
    case CKItem::Declare: {
        cfg.k.pop_back();
        const Stmt& s = *p.stmt_by_id[item.node];
        Loc l = alloc(cfg);
        cfg.store[l] = std::move(v);
        cfg.env.bind(s.name, l);
        return Rule::DeclareBind;
    }
    case CKItem::Discard:
        cfg.k.pop_back();
        return Rule::Discard;
    case CKItem::Print:
        cfg.k.pop_back();
        cfg.output.push_back(std::move(v));
        return Rule::Print;
    case CKItem::Return:
        cfg.k.pop_back();
        do_return(cfg, std::move(v));
        return Rule::ReturnValue;
    default:
        throw RuntimeFault("value without consumer");
    }
}

}  // namespace

std::string Value::show() const {
    switch (kind) {
    case Int: return i.str();
    case Bool: return b ? "true" : "false";
    case Object: return "<object>";
    case Void: return "<void>";
    default: return "<uninit>";
    }
}

ConcreteConfig boot_concrete(const Program& program) {
    ConcreteConfig cfg;
    cfg.program = &program;
    cfg.statics = StaticLayout::make(program);
    cfg.next_loc = cfg.statics.total();
    for (Loc l = 0; l < cfg.next_loc; l++) cfg.store[l] = Value{};
    cfg.env.push_scope();
    for (auto it = program.static_init.rbegin(); it != program.static_init.rend(); ++it)
        cfg.k.push_back({CKItem::Stmt, (*it)->id, {}, -1, false, {}, 0});
    return cfg;
}

Rule step_concrete(ConcreteConfig& cfg) {
    cfg.steps++;
    if (cfg.k.empty()) {
        if (cfg.fstack.empty()) throw RuntimeFault("step on final configuration");
        do_return(cfg, Value::void_value());
        return Rule::ReturnVoid;
    }
    CKItem& top = cfg.k.back();
    switch (top.op) {
    case CKItem::Stmt: {
        const Stmt& s = *cfg.program->stmt_by_id[top.node];
        cfg.k.pop_back();
        return exec_stmt(cfg, s);
    }
    case CKItem::Expr: {
        const Expr& e = *cfg.program->expr_by_id[top.node];
        cfg.k.pop_back();
        return eval_expr(cfg, e);
    }
    case CKItem::Val: {
        Value v = std::move(top.value);
        cfg.k.pop_back();
        if (cfg.k.empty()) throw RuntimeFault("value without consumer");
        return consume_value(cfg, std::move(v));
    }
    case CKItem::WhileCont: {
        const Stmt& s = *cfg.program->stmt_by_id[top.node];
        cfg.k.pop_back();
        cfg.k.push_back({CKItem::Branch, s.id, {}, -1, true, {}, 0});
        cfg.k.push_back({CKItem::Expr, s.cond->id, {}, -1, false, {}, 0});
        return Rule::WhileExpand;
    }
    case CKItem::PopLstack:
        cfg.k.pop_back();
        if (cfg.lstack.empty()) throw RuntimeFault("loop stack underflow");
        cfg.lstack.pop_back();
        return Rule::PopLstack;
    case CKItem::BlockExit:
        cfg.k.pop_back();
        cfg.env.pop_scope();
        return Rule::BlockExit;
    case CKItem::Args: {
        CKItem item = std::move(top);
        cfg.k.pop_back();
        return invoke(cfg, std::move(item));
    }
    default:
        throw RuntimeFault("bad continuation item");
    }
}

void validate_inputs(const Program& program, const std::map<std::string, Value>& inputs) {
    const auto& decls = program.inputs();
    if (inputs.size() != decls.size()) throw RuntimeFault("wrong number of inputs");
    for (const auto& p : decls) {
        auto it = inputs.find(p.name);
        if (it == inputs.end()) throw RuntimeFault("missing input '" + p.name + "'");
        bool ok = (p.type.kind == Type::Int && it->second.kind == Value::Int) ||
                  (p.type.kind == Type::Bool && it->second.kind == Value::Bool);
        if (!ok) throw RuntimeFault("input '" + p.name + "' has the wrong type");
    }
}

void enter_main(ConcreteConfig& cfg, const std::map<std::string, Value>& inputs) {
    const Program& p = *cfg.program;
    validate_inputs(p, inputs);
    const MethodDecl& main = p.classes[p.main_class].methods[p.main_method];
    CCallFrame frame;
    frame.saved_env = std::move(cfg.env);
    frame.saved_lstack = std::move(cfg.lstack);
    frame.saved_k = std::move(cfg.k);
    frame.deliver_value = false;
    cfg.env = Env{};
    cfg.env.push_scope();
    cfg.lstack.clear();
    for (const auto& prm : main.params) {
        Loc l = alloc(cfg);
        cfg.store[l] = inputs.at(prm.name);
        cfg.env.bind(prm.name, l);
    }
    cfg.k.clear();
    cfg.k.push_back({CKItem::Stmt, main.body->id, {}, -1, false, {}, 0});
    cfg.fstack.push_back(std::move(frame));
}

namespace {

void run_to_final(ConcreteConfig& cfg, const RunLimits& limits, std::vector<Rule>* trace) {
    while (!cfg.final()) {
        if (cfg.steps >= limits.step_limit) throw StepLimitExceeded(limits.step_limit);
        Rule r = step_concrete(cfg);
        if (trace) trace->push_back(r);
    }
}

void project_loc(const ConcreteConfig& cfg, const std::string& path, Loc loc,
                 std::map<std::string, Value>& out, std::set<Loc>& chain) {
    auto it = cfg.store.find(loc);
    if (it == cfg.store.end() || it->second.kind == Value::Uninit) return;
    const Value& v = it->second;
    if (v.kind == Value::Int || v.kind == Value::Bool) {
        out[path] = v;
        return;
    }
    if (v.kind == Value::Object) {
        if (chain.count(loc)) return;
        chain.insert(loc);
        const ClassDecl& cls = cfg.program->classes[v.class_index];
        for (size_t fi = 0; fi < cls.instance_fields.size(); fi++)
            project_loc(cfg, path + "." + cls.instance_fields[fi].name, v.field_locs[fi], out,
                        chain);
        chain.erase(loc);
    }
}

}  // namespace

std::map<std::string, Value> project_vars(const ConcreteConfig& cfg) {
    std::map<std::string, Value> out;
    const Program& p = *cfg.program;
    for (size_t ci = 0; ci < p.classes.size(); ci++) {
        for (size_t fi = 0; fi < p.classes[ci].static_fields.size(); fi++) {
            std::set<Loc> chain;
            project_loc(cfg, p.classes[ci].name + "." + p.classes[ci].static_fields[fi].name,
                        cfg.statics.locs[ci][fi], out, chain);
        }
    }
    return out;
}

FinalState run_concrete(const Program& program, const std::map<std::string, Value>& inputs,
                        const RunLimits& limits, std::vector<Rule>* trace) {
    ConcreteConfig cfg = boot_concrete(program);
    run_to_final(cfg, limits, trace);
    enter_main(cfg, inputs);
    run_to_final(cfg, limits, trace);
    return {project_vars(cfg), cfg.output};
}

FinalState initial_state(const Program& program, const std::map<std::string, Value>& inputs,
                         const RunLimits& limits) {
    validate_inputs(program, inputs);
    ConcreteConfig cfg = boot_concrete(program);
    run_to_final(cfg, limits, nullptr);
    FinalState st{project_vars(cfg), {}};
    for (const auto& [name, v] : inputs) st.vars[name] = v;
    return st;
}

bool low_equal(const FinalState& a, const FinalState& b, const NIPolicy& policy) {
    if (a.vars.size() != b.vars.size()) throw RuntimeFault("projection mismatch");
    for (const auto& [path, va] : a.vars) {
        auto it = b.vars.find(path);
        if (it == b.vars.end()) throw RuntimeFault("projection mismatch");
        if (policy.label_of(path) == Label::Low && !(va == it->second)) return false;
    }
    if (a.output.size() != b.output.size()) return false;
    for (size_t i = 0; i < a.output.size(); i++)
        if (!(a.output[i] == b.output[i])) return false;
    return true;
}

}  // namespace nicert
