#include "nicert/extended.hpp"

#include <functional>
#include <set>

namespace nicert {

namespace {

ExtCell& cell_at(ExtConfig& cfg, Loc loc) {
    auto it = cfg.store.find(loc);
    if (it == cfg.store.end()) throw RuntimeFault("read of unallocated location");
    return it->second;
}

// A read projects the stored label and joins the context label in.
LValue read_loc(ExtConfig& cfg, Loc loc) {
    const ExtCell& c = cell_at(cfg, loc);
    if (c.v.kind == Value::Uninit) throw RuntimeFault("read of uninitialized location");
    return {c.v, join(current(c.sl), cfg.cl)};
}

Loc alloc(ExtConfig& cfg) {
    Loc l = cfg.next_loc++;
    cfg.store[l] = ExtCell{};  // Uninit
    return l;
}

// First write creates the cell at the value's level; later writes go through
// the update table.
void write_loc(ExtConfig& cfg, Loc loc, const LValue& v) {
    ExtCell& c = cell_at(cfg, loc);
    if (c.v.kind == Value::Uninit) {
        c = {v.v, stored(v.label)};
    } else {
        c = {v.v, update(c.sl, v.label)};
    }
}

struct VarReadResult {
    Loc loc;
    Label path_label;  // labels of receiver reads along the way
};

VarReadResult addr_of_var(ExtConfig& cfg, const Expr& var) {
    switch (var.var.kind) {
    case VarRef::Local: {
        const Loc* l = cfg.env.lookup(var.name);
        if (!l) throw RuntimeFault("unbound variable '" + var.name + "'");
        return {*l, Label::Low};
    }
    case VarRef::StaticField:
        return {cfg.statics.locs[var.var.class_index][var.var.field_index], Label::Low};
    case VarRef::ThisField: {
        const Loc* self = cfg.env.lookup("this");
        if (!self) throw RuntimeFault("no 'this' in scope");
        LValue obj = read_loc(cfg, *self);
        return {obj.v.field_locs[var.var.field_index], obj.label};
    }
    default:
        throw RuntimeFault("unresolved variable");
    }
}

LValue apply_binop(BinOp op, const LValue& a, const LValue& b) {
    Label l = join(a.label, b.label);
    switch (op) {
    case BinOp::Add: return {Value::of_int(a.v.i + b.v.i), l};
    case BinOp::Sub: return {Value::of_int(a.v.i - b.v.i), l};
    case BinOp::Mul: return {Value::of_int(a.v.i * b.v.i), l};
    case BinOp::Div:
        if (b.v.i == 0) throw RuntimeFault("division by zero");
        return {Value::of_int(a.v.i / b.v.i), l};
    case BinOp::Mod:
        if (b.v.i == 0) throw RuntimeFault("division by zero");
        return {Value::of_int(a.v.i % b.v.i), l};
    case BinOp::Lt: return {Value::of_bool(a.v.i < b.v.i), l};
    case BinOp::Gt: return {Value::of_bool(a.v.i > b.v.i), l};
    case BinOp::Le: return {Value::of_bool(a.v.i <= b.v.i), l};
    case BinOp::Ge: return {Value::of_bool(a.v.i >= b.v.i), l};
    case BinOp::Eq:
        return {Value::of_bool(a.v.kind == Value::Int ? a.v.i == b.v.i : a.v.b == b.v.b), l};
    case BinOp::Ne:
        return {Value::of_bool(a.v.kind == Value::Int ? a.v.i != b.v.i : a.v.b != b.v.b), l};
    case BinOp::And: return {Value::of_bool(a.v.b && b.v.b), l};
    case BinOp::Or: return {Value::of_bool(a.v.b || b.v.b), l};
    }
    throw RuntimeFault("bad operator");
}

std::vector<const Expr*> call_exprs(const Expr& e) {
    std::vector<const Expr*> out;
    if (e.kind == Expr::Call && e.base) out.push_back(e.base.get());
    for (const auto& a : e.args) out.push_back(a.get());
    return out;
}

void do_return(ExtConfig& cfg, LValue v) {
    ECallFrame frame = std::move(cfg.fstack.back());
    cfg.fstack.pop_back();
    cfg.env = std::move(frame.saved_env);
    cfg.lstack = std::move(frame.saved_lstack);
    cfg.k = std::move(frame.saved_k);
    cfg.cl = frame.saved_cl;  // caller context survives the callee
    if (frame.deliver_value)
        cfg.k.push_back({EKItem::Val, -1, std::move(v), -1, false, {}, 0, Label::Low});
}

Rule invoke(ExtConfig& cfg, EKItem args_item) {
    const Expr& e = *cfg.program->expr_by_id[args_item.node];
    if (!args_item.flag) {
        const ClassDecl& cls = cfg.program->classes[e.callee_class];
        const MethodDecl& m = cls.methods[e.callee_method];
        ECallFrame frame;
        frame.saved_env = std::move(cfg.env);
        frame.saved_lstack = std::move(cfg.lstack);
        frame.saved_k = std::move(cfg.k);
        frame.deliver_value = true;
        frame.saved_cl = cfg.cl;
        cfg.env = Env{};
        cfg.env.push_scope();
        cfg.lstack.clear();
        size_t ai = 0;
        if (e.base) {
            Loc l = alloc(cfg);
            write_loc(cfg, l, args_item.collected[ai++]);
            cfg.env.bind("this", l);
        }
        for (const auto& p : m.params) {
            Loc l = alloc(cfg);
            write_loc(cfg, l, args_item.collected[ai++]);
            cfg.env.bind(p.name, l);
        }
        cfg.k.clear();
        cfg.k.push_back({EKItem::Stmt, m.body->id, {}, -1, false, {}, 0, Label::Low});
        cfg.fstack.push_back(std::move(frame));
        return Rule::CallInvoke;
    }
    const ClassDecl& cls = cfg.program->classes[e.callee_class];
    std::vector<Loc> field_locs;
    for (size_t i = 0; i < cls.instance_fields.size(); i++) field_locs.push_back(alloc(cfg));
    LValue obj = {Value::object(e.callee_class, field_locs), cfg.cl};

    ECallFrame frame;
    frame.saved_env = std::move(cfg.env);
    frame.saved_lstack = std::move(cfg.lstack);
    frame.saved_k = std::move(cfg.k);
    frame.saved_k.push_back({EKItem::Val, -1, obj, -1, false, {}, 0, Label::Low});
    frame.deliver_value = false;
    frame.saved_cl = cfg.cl;
    cfg.env = Env{};
    cfg.env.push_scope();
    cfg.lstack.clear();
    Loc self = alloc(cfg);
    write_loc(cfg, self, obj);
    cfg.env.bind("this", self);
    if (cls.ctor_index >= 0) {
        const MethodDecl& ctor = cls.methods[cls.ctor_index];
        for (size_t i = 0; i < ctor.params.size(); i++) {
            Loc l = alloc(cfg);
            write_loc(cfg, l, args_item.collected[i]);
            cfg.env.bind(ctor.params[i].name, l);
        }
    }
    cfg.k.clear();
    if (cls.ctor_index >= 0)
        cfg.k.push_back(
            {EKItem::Stmt, cls.methods[cls.ctor_index].body->id, {}, -1, false, {}, 0, Label::Low});
    for (auto it = cls.field_init.rbegin(); it != cls.field_init.rend(); ++it)
        cfg.k.push_back({EKItem::Stmt, (*it)->id, {}, -1, false, {}, 0, Label::Low});
    cfg.fstack.push_back(std::move(frame));
    return Rule::NewAlloc;
}

Rule exec_stmt(ExtConfig& cfg, const Stmt& s) {
    auto push_stmt = [&](const Stmt& c) {
        cfg.k.push_back({EKItem::Stmt, c.id, {}, -1, false, {}, 0, Label::Low});
    };
    auto push_expr = [&](const Expr& c) {
        cfg.k.push_back({EKItem::Expr, c.id, {}, -1, false, {}, 0, Label::Low});
    };
    switch (s.kind) {
    case Stmt::Block:
        cfg.env.push_scope();
        cfg.k.push_back({EKItem::BlockExit, -1, {}, -1, false, {}, 0, Label::Low});
        for (auto it = s.body.rbegin(); it != s.body.rend(); ++it) push_stmt(**it);
        return Rule::BlockEnter;
    case Stmt::Declare:
        cfg.k.push_back({EKItem::Declare, s.id, {}, -1, false, {}, 0, Label::Low});
        push_expr(*s.init);
        return Rule::DeclareSched;
    case Stmt::Assign:
        if (s.target->kind == Expr::Var) {
            VarReadResult a = addr_of_var(cfg, *s.target);
            cfg.k.push_back({EKItem::AssignTo, s.id, {}, a.loc, false, {}, 0, a.path_label});
            push_expr(*s.value);
            return Rule::AssignAddr;
        }
        cfg.k.push_back({EKItem::FieldAddr, s.id, {}, -1, false, {}, 0, Label::Low});
        push_expr(*s.target->base);
        return Rule::AssignFieldSched;
    case Stmt::If:
        // a branch holding break/continue/return escapes the conditional, so
        // the saved context must not be reinstated afterwards
        if (!s.branch_abrupt)
            cfg.k.push_back({EKItem::Restore, -1, {}, -1, false, {}, 0, cfg.cl});
        cfg.k.push_back({EKItem::Branch, s.id, {}, -1, false, {}, 0, Label::Low});
        push_expr(*s.cond);
        return s.branch_abrupt ? Rule::IfSetupAbrupt : Rule::IfSetup;
    case Stmt::While: {
        ECont break_k = cfg.k;
        cfg.k.push_back({EKItem::PopLstack, -1, {}, -1, false, {}, 0, Label::Low});
        cfg.k.push_back({EKItem::Restore, -1, {}, -1, false, {}, 0, cfg.cl});
        cfg.k.push_back({EKItem::WhileCont, s.id, {}, -1, false, {}, 0, Label::Low});
        ECont continue_k = cfg.k;
        cfg.lstack.push_back({std::move(continue_k), std::move(break_k), cfg.env.scopes.size()});
        return Rule::WhileSetup;
    }
    case Stmt::Break: {
        if (cfg.lstack.empty()) throw RuntimeFault("break outside loop");
        ELoopFrame frame = std::move(cfg.lstack.back());
        cfg.lstack.pop_back();
        // jumps past the loop's restoreLEnv: the raised context escapes
        cfg.k = std::move(frame.break_k);
        cfg.env.scopes.resize(frame.env_depth);
        return Rule::Break;
    }
    case Stmt::Continue: {
        if (cfg.lstack.empty()) throw RuntimeFault("continue outside loop");
        const ELoopFrame& frame = cfg.lstack.back();
        cfg.k = frame.continue_k;
        cfg.env.scopes.resize(frame.env_depth);
        return Rule::Continue;
    }
    case Stmt::Return:
        if (s.ret) {
            cfg.k.push_back({EKItem::Return, s.id, {}, -1, false, {}, 0, Label::Low});
            push_expr(*s.ret);
            return Rule::ReturnSched;
        }
        do_return(cfg, {Value::void_value(), cfg.cl});
        return Rule::ReturnVoid;
    case Stmt::ExprStmt:
        cfg.k.push_back({EKItem::Discard, s.id, {}, -1, false, {}, 0, Label::Low});
        push_expr(*s.expr);
        return Rule::ExprStmtSched;
    case Stmt::Println:
        cfg.k.push_back({EKItem::Print, s.id, {}, -1, false, {}, 0, Label::Low});
        push_expr(*s.expr);
        return Rule::PrintSched;
    }
    throw RuntimeFault("bad statement");
}

Rule eval_expr(ExtConfig& cfg, const Expr& e) {
    auto push_val = [&](LValue v) {
        cfg.k.push_back({EKItem::Val, -1, std::move(v), -1, false, {}, 0, Label::Low});
    };
    switch (e.kind) {
    case Expr::IntLit:
        push_val({Value::of_int(e.int_value), cfg.cl});  // constants carry the context
        return Rule::Const;
    case Expr::BoolLit:
        push_val({Value::of_bool(e.bool_value), cfg.cl});
        return Rule::Const;
    case Expr::Var: {
        VarReadResult a = addr_of_var(cfg, e);
        LValue v = read_loc(cfg, a.loc);
        v.label = join(v.label, a.path_label);
        push_val(std::move(v));
        return Rule::VarRead;
    }
    case Expr::This: {
        const Loc* self = cfg.env.lookup("this");
        if (!self) throw RuntimeFault("no 'this' in scope");
        push_val(read_loc(cfg, *self));
        return Rule::VarRead;
    }
    case Expr::FieldAccess:
        cfg.k.push_back({EKItem::FieldGet, e.id, {}, -1, false, {}, 0, Label::Low});
        cfg.k.push_back({EKItem::Expr, e.base->id, {}, -1, false, {}, 0, Label::Low});
        return Rule::FieldSched;
    case Expr::Unary:
        cfg.k.push_back({EKItem::UnApply, e.id, {}, -1, false, {}, 0, Label::Low});
        cfg.k.push_back({EKItem::Expr, e.operand->id, {}, -1, false, {}, 0, Label::Low});
        return Rule::UnSched;
    case Expr::Binary:
        cfg.k.push_back({EKItem::BinRhs, e.id, {}, -1, false, {}, 0, Label::Low});
        cfg.k.push_back({EKItem::Expr, e.lhs->id, {}, -1, false, {}, 0, Label::Low});
        return Rule::BinSched;
    case Expr::Call:
    case Expr::New: {
        EKItem item{EKItem::Args, e.id, {}, -1, e.kind == Expr::New, {}, 0, Label::Low};
        std::vector<const Expr*> exprs = call_exprs(e);
        cfg.k.push_back(std::move(item));
        if (!exprs.empty())
            cfg.k.push_back({EKItem::Expr, exprs[0]->id, {}, -1, false, {}, 0, Label::Low});
        return e.kind == Expr::New ? Rule::NewSched : Rule::CallSched;
    }
    }
    throw RuntimeFault("bad expression");
}

Rule consume_value(ExtConfig& cfg, LValue v) {
    EKItem item = std::move(cfg.k.back());
    const Program& p = *cfg.program;
    switch (item.op) {
    case EKItem::BinRhs: {
        cfg.k.pop_back();
        const Expr& e = *p.expr_by_id[item.node];
        cfg.k.push_back({EKItem::BinApply, e.id, std::move(v), -1, false, {}, 0, Label::Low});
        cfg.k.push_back({EKItem::Expr, e.rhs->id, {}, -1, false, {}, 0, Label::Low});
        return Rule::BinRhs;
    }
    case EKItem::BinApply: {
        cfg.k.pop_back();
        const Expr& e = *p.expr_by_id[item.node];
        LValue r = apply_binop(e.bin_op, item.value, v);
        cfg.k.push_back({EKItem::Val, -1, std::move(r), -1, false, {}, 0, Label::Low});
        return Rule::BinApply;
    }
    case EKItem::UnApply: {
        cfg.k.pop_back();
        const Expr& e = *p.expr_by_id[item.node];
        LValue r = e.un_op == UnOp::Neg ? LValue{Value::of_int(-v.v.i), v.label}
                                        : LValue{Value::of_bool(!v.v.b), v.label};
        cfg.k.push_back({EKItem::Val, -1, std::move(r), -1, false, {}, 0, Label::Low});
        return Rule::UnApply;
    }
    case EKItem::Branch: {
        cfg.k.pop_back();
        const Stmt& s = *p.stmt_by_id[item.node];
        cfg.cl = join(cfg.cl, v.label);  // guard level taints the context
        bool taken = v.v.b;
        if (s.kind == Stmt::While) {
            if (taken) {
                cfg.k.push_back({EKItem::WhileCont, s.id, {}, -1, false, {}, 0, Label::Low});
                cfg.k.push_back({EKItem::Stmt, s.loop_body->id, {}, -1, false, {}, 0, Label::Low});
            }
        } else {
            if (taken)
                cfg.k.push_back({EKItem::Stmt, s.then_branch->id, {}, -1, false, {}, 0, Label::Low});
            else if (s.else_branch)
                cfg.k.push_back({EKItem::Stmt, s.else_branch->id, {}, -1, false, {}, 0, Label::Low});
        }
        return taken ? Rule::BranchThen : Rule::BranchElse;
    }
    case EKItem::AssignTo: {
        cfg.k.pop_back();
        v.label = join(v.label, item.ctx);  // receiver label, for field targets
        write_loc(cfg, item.loc, v);
        return Rule::Store;
    }
    case EKItem::FieldAddr: {
        cfg.k.pop_back();
        const Stmt& s = *p.stmt_by_id[item.node];
        Loc loc = v.v.field_locs[s.target->field_index];
        cfg.k.push_back({EKItem::AssignTo, s.id, {}, loc, false, {}, 0, v.label});
        cfg.k.push_back({EKItem::Expr, s.value->id, {}, -1, false, {}, 0, Label::Low});
        return Rule::AssignFieldAddr;
    }
    case EKItem::FieldGet: {
        cfg.k.pop_back();
        const Expr& e = *p.expr_by_id[item.node];
        LValue r = read_loc(cfg, v.v.field_locs[e.field_index]);
        r.label = join(r.label, v.label);
        cfg.k.push_back({EKItem::Val, -1, std::move(r), -1, false, {}, 0, Label::Low});
        return Rule::FieldRead;
    }
    case EKItem::Args: {
        // collector stays on the stack
        item.collected.push_back(std::move(v));
        item.next_arg++;
        const Expr& e = *p.expr_by_id[item.node];
        std::vector<const Expr*> exprs = call_exprs(e);
        int next = item.next_arg;
        bool is_new = item.flag;
        cfg.k.back() = std::move(item);
        if (next < static_cast<int>(exprs.size()))
            cfg.k.push_back({EKItem::Expr, exprs[next]->id, {}, -1, false, {}, 0, Label::Low});
        return is_new ? Rule::NewArg : Rule::CallArg;
    }
    case EKItem::Declare: {
        cfg.k.pop_back();
        const Stmt& s = *p.stmt_by_id[item.node];
        Loc l = alloc(cfg);
        write_loc(cfg, l, v);
        cfg.env.bind(s.name, l);
        return Rule::DeclareBind;
    }
    case EKItem::Discard:
        cfg.k.pop_back();
        return Rule::Discard;
    case EKItem::Print:
        cfg.k.pop_back();
        cfg.output.push_back({std::move(v.v), v.label});
        return Rule::Print;
    case EKItem::Return:
        cfg.k.pop_back();
        do_return(cfg, std::move(v));
        return Rule::ReturnValue;
    default:
        throw RuntimeFault("value without consumer");
    }
}

}  // namespace

ExtConfig boot_extended(const Program& program) {
    ExtConfig cfg;
    cfg.program = &program;
    cfg.statics = StaticLayout::make(program);
    cfg.next_loc = cfg.statics.total();
    for (Loc l = 0; l < cfg.next_loc; l++) cfg.store[l] = ExtCell{};
    cfg.env.push_scope();
    for (auto it = program.static_init.rbegin(); it != program.static_init.rend(); ++it)
        cfg.k.push_back({EKItem::Stmt, (*it)->id, {}, -1, false, {}, 0, Label::Low});
    return cfg;
}

Rule step_extended(ExtConfig& cfg) {
    cfg.steps++;
    if (cfg.k.empty()) {
        if (cfg.fstack.empty()) throw RuntimeFault("step on final configuration");
        do_return(cfg, {Value::void_value(), cfg.cl});
        return Rule::ReturnVoid;
    }
    EKItem& top = cfg.k.back();
    switch (top.op) {
    case EKItem::Stmt: {
        const Stmt& s = *cfg.program->stmt_by_id[top.node];
        cfg.k.pop_back();
        return exec_stmt(cfg, s);
    }
    case EKItem::Expr: {
        const Expr& e = *cfg.program->expr_by_id[top.node];
        cfg.k.pop_back();
        return eval_expr(cfg, e);
    }
    case EKItem::Val: {
        LValue v = std::move(top.value);
        cfg.k.pop_back();
        if (cfg.k.empty()) throw RuntimeFault("value without consumer");
        return consume_value(cfg, std::move(v));
    }
    case EKItem::WhileCont: {
        const Stmt& s = *cfg.program->stmt_by_id[top.node];
        cfg.k.pop_back();
        cfg.k.push_back({EKItem::Branch, s.id, {}, -1, true, {}, 0, Label::Low});
        cfg.k.push_back({EKItem::Expr, s.cond->id, {}, -1, false, {}, 0, Label::Low});
        return Rule::WhileExpand;
    }
    case EKItem::Restore:
        cfg.cl = top.ctx;
        cfg.k.pop_back();
        return Rule::RestoreCtx;
    case EKItem::PopLstack:
        cfg.k.pop_back();
        if (cfg.lstack.empty()) throw RuntimeFault("loop stack underflow");
        cfg.lstack.pop_back();
        return Rule::PopLstack;
    case EKItem::BlockExit:
        cfg.k.pop_back();
        cfg.env.pop_scope();
        return Rule::BlockExit;
    case EKItem::Args: {
        EKItem item = std::move(top);
        cfg.k.pop_back();
        return invoke(cfg, std::move(item));
    }
    default:
        throw RuntimeFault("bad continuation item");
    }
}

namespace {

void stamp_loc(ExtConfig& cfg, const std::string& path, Loc loc, const NIPolicy& policy,
               std::set<Loc>& chain) {
    auto it = cfg.store.find(loc);
    if (it == cfg.store.end() || it->second.v.kind == Value::Uninit) return;
    ExtCell& c = it->second;
    if (c.v.kind == Value::Int || c.v.kind == Value::Bool) {
        c.sl = stored(policy.label_of(path));
        return;
    }
    if (c.v.kind == Value::Object) {
        c.sl = StoredLabel::Low;  // references are structure, not data
        if (chain.count(loc)) return;
        chain.insert(loc);
        const ClassDecl& cls = cfg.program->classes[c.v.class_index];
        std::vector<Loc> locs = c.v.field_locs;
        for (size_t fi = 0; fi < locs.size(); fi++)
            stamp_loc(cfg, path + "." + cls.instance_fields[fi].name, locs[fi], policy, chain);
        chain.erase(loc);
    }
}

void run_to_final_ext(ExtConfig& cfg, const RunLimits& limits,
                      std::vector<ExtTraceEntry>* trace) {
    while (!cfg.final()) {
        if (cfg.steps >= limits.step_limit) throw StepLimitExceeded(limits.step_limit);
        Rule r = step_extended(cfg);
        if (trace) trace->push_back({r, cfg.cl});
    }
}

void project_loc_ext(const ExtConfig& cfg, const std::string& path, Loc loc,
                     std::map<std::string, ExtCell>& out, std::set<Loc>& chain) {
    auto it = cfg.store.find(loc);
    if (it == cfg.store.end() || it->second.v.kind == Value::Uninit) return;
    const ExtCell& c = it->second;
    if (c.v.kind == Value::Int || c.v.kind == Value::Bool) {
        out[path] = c;
        return;
    }
    if (c.v.kind == Value::Object) {
        if (chain.count(loc)) return;
        chain.insert(loc);
        const ClassDecl& cls = cfg.program->classes[c.v.class_index];
        for (size_t fi = 0; fi < c.v.field_locs.size(); fi++)
            project_loc_ext(cfg, path + "." + cls.instance_fields[fi].name, c.v.field_locs[fi],
                            out, chain);
        chain.erase(loc);
    }
}

}  // namespace

void stamp_labels(ExtConfig& cfg, const NIPolicy& policy) {
    const Program& p = *cfg.program;
    for (size_t ci = 0; ci < p.classes.size(); ci++) {
        for (size_t fi = 0; fi < p.classes[ci].static_fields.size(); fi++) {
            std::set<Loc> chain;
            stamp_loc(cfg, p.classes[ci].name + "." + p.classes[ci].static_fields[fi].name,
                      cfg.statics.locs[ci][fi], policy, chain);
        }
    }
}

void enter_main_extended(ExtConfig& cfg, const NIPolicy& policy,
                         const std::map<std::string, Value>& inputs) {
    const Program& p = *cfg.program;
    validate_inputs(p, inputs);
    const MethodDecl& main = p.classes[p.main_class].methods[p.main_method];
    ECallFrame frame;
    frame.saved_env = std::move(cfg.env);
    frame.saved_lstack = std::move(cfg.lstack);
    frame.saved_k = std::move(cfg.k);
    frame.deliver_value = false;
    frame.saved_cl = cfg.cl;
    cfg.env = Env{};
    cfg.env.push_scope();
    cfg.lstack.clear();
    for (const auto& prm : main.params) {
        Loc l = alloc(cfg);
        write_loc(cfg, l, {inputs.at(prm.name), policy.label_of(prm.name)});
        cfg.env.bind(prm.name, l);
    }
    cfg.k.clear();
    cfg.k.push_back({EKItem::Stmt, main.body->id, {}, -1, false, {}, 0, Label::Low});
    cfg.fstack.push_back(std::move(frame));
}

std::map<std::string, ExtCell> project_vars_extended(const ExtConfig& cfg) {
    std::map<std::string, ExtCell> out;
    const Program& p = *cfg.program;
    for (size_t ci = 0; ci < p.classes.size(); ci++) {
        for (size_t fi = 0; fi < p.classes[ci].static_fields.size(); fi++) {
            std::set<Loc> chain;
            project_loc_ext(cfg, p.classes[ci].name + "." + p.classes[ci].static_fields[fi].name,
                            cfg.statics.locs[ci][fi], out, chain);
        }
    }
    return out;
}

Verdict check_final(const ExtFinalState& st, const NIPolicy& policy) {
    Verdict v;
    for (const auto& [path, cell] : st.vars) {
        if (policy.label_of(path) == Label::Low && cell.sl != StoredLabel::Low) {
            v.pass = false;
            v.witness.push_back({path, cell.sl});
        }
    }
    return v;
}

std::pair<ExtFinalState, Verdict> run_extended(const Program& program, const NIPolicy& policy,
                                               const std::map<std::string, Value>& inputs,
                                               const RunLimits& limits,
                                               std::vector<ExtTraceEntry>* trace) {
    ExtConfig cfg = boot_extended(program);
    run_to_final_ext(cfg, limits, trace);
    stamp_labels(cfg, policy);
    enter_main_extended(cfg, policy, inputs);
    run_to_final_ext(cfg, limits, trace);
    ExtFinalState st{project_vars_extended(cfg), cfg.output};
    return {st, check_final(st, policy)};
}

namespace {

CCont erase_cont(const ECont& k);

CKItem erase_item(const EKItem& it) {
    CKItem c;
    c.op = static_cast<CKItem::Op>(0);
    switch (it.op) {
    case EKItem::Stmt: c.op = CKItem::Stmt; break;
    case EKItem::Expr: c.op = CKItem::Expr; break;
    case EKItem::Val: c.op = CKItem::Val; break;
    case EKItem::BinRhs: c.op = CKItem::BinRhs; break;
    case EKItem::BinApply: c.op = CKItem::BinApply; break;
    case EKItem::UnApply: c.op = CKItem::UnApply; break;
    case EKItem::Branch: c.op = CKItem::Branch; break;
    case EKItem::WhileCont: c.op = CKItem::WhileCont; break;
    case EKItem::AssignTo: c.op = CKItem::AssignTo; break;
    case EKItem::FieldAddr: c.op = CKItem::FieldAddr; break;
    case EKItem::FieldGet: c.op = CKItem::FieldGet; break;
    case EKItem::Args: c.op = CKItem::Args; break;
    case EKItem::Declare: c.op = CKItem::Declare; break;
    case EKItem::Discard: c.op = CKItem::Discard; break;
    case EKItem::Print: c.op = CKItem::Print; break;
    case EKItem::Return: c.op = CKItem::Return; break;
    case EKItem::PopLstack: c.op = CKItem::PopLstack; break;
    case EKItem::BlockExit: c.op = CKItem::BlockExit; break;
    case EKItem::Restore: throw RuntimeFault("restore item has no concrete image");
    }
    c.node = it.node;
    c.value = it.value.v;
    c.loc = it.loc;
    c.flag = it.flag;
    for (const auto& lv : it.collected) c.collected.push_back(lv.v);
    c.next_arg = it.next_arg;
    return c;
}

CCont erase_cont(const ECont& k) {
    CCont out;
    for (const auto& it : k) {
        if (it.op == EKItem::Restore) continue;
        out.push_back(erase_item(it));
    }
    return out;
}

}  // namespace

ConcreteConfig erase(const ExtConfig& cfg) {
    ConcreteConfig c;
    c.program = cfg.program;
    c.statics = cfg.statics;
    c.k = erase_cont(cfg.k);
    c.env = cfg.env;
    for (const auto& [loc, cell] : cfg.store) c.store[loc] = cell.v;
    for (const auto& lf : cfg.lstack)
        c.lstack.push_back({erase_cont(lf.continue_k), erase_cont(lf.break_k), lf.env_depth});
    for (const auto& cf : cfg.fstack)
        c.fstack.push_back({cf.saved_env,
                            [&] {
                                std::vector<CLoopFrame> v;
                                for (const auto& lf : cf.saved_lstack)
                                    v.push_back({erase_cont(lf.continue_k),
                                                 erase_cont(lf.break_k), lf.env_depth});
                                return v;
                            }(),
                            erase_cont(cf.saved_k), cf.deliver_value});
    for (const auto& o : cfg.output) c.output.push_back(o.v);
    c.next_loc = cfg.next_loc;
    c.steps = cfg.steps;
    return c;
}

}  // namespace nicert
