#include "nicert/abstract.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>
#include <unordered_map>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace nicert {

namespace {

AbsCell& cell_at(AbsConfig& cfg, Loc loc) {
    auto it = cfg.store.find(loc);
    if (it == cfg.store.end()) throw RuntimeFault("read of unallocated location");
    return it->second;
}

AbsValue read_loc(AbsConfig& cfg, Loc loc) {
    const AbsCell& c = cell_at(cfg, loc);
    switch (c.kind) {
    case AbsCell::Uninit: throw RuntimeFault("read of uninitialized location");
    case AbsCell::Scalar: return AbsValue::scalar(join(current(c.sl), cfg.cl));
    case AbsCell::Object:
        return AbsValue::object(join(current(c.sl), cfg.cl), c.class_index, c.field_locs);
    }
    throw RuntimeFault("bad cell");
}

Loc alloc(AbsConfig& cfg) {
    Loc l = cfg.next_loc++;
    cfg.store[l] = AbsCell{};
    return l;
}

void write_loc(AbsConfig& cfg, Loc loc, const AbsValue& v) {
    AbsCell& c = cell_at(cfg, loc);
    StoredLabel sl = c.kind == AbsCell::Uninit ? stored(v.label) : update(c.sl, v.label);
    if (v.kind == AbsValue::Scalar) {
        c = {AbsCell::Scalar, sl, -1, {}};
    } else if (v.kind == AbsValue::Object) {
        c = {AbsCell::Object, sl, v.class_index, v.field_locs};
    } else {
        throw RuntimeFault("cannot store void");
    }
}

struct VarAddr {
    Loc loc;
    Label path_label;
};

VarAddr addr_of_var(AbsConfig& cfg, const Expr& var) {
    switch (var.var.kind) {
    case VarRef::Local: {
        const Loc* l = cfg.env.lookup(var.name);
        if (!l) throw RuntimeFault("unbound variable '" + var.name + "'");
        return {*l, Label::Low};
    }
    case VarRef::StaticField: {
        const StaticLayout layout = StaticLayout::make(*cfg.program);
        return {layout.locs[var.var.class_index][var.var.field_index], Label::Low};
    }
    case VarRef::ThisField: {
        const Loc* self = cfg.env.lookup("this");
        if (!self) throw RuntimeFault("no 'this' in scope");
        AbsValue obj = read_loc(cfg, *self);
        return {obj.field_locs[var.var.field_index], obj.label};
    }
    default:
        throw RuntimeFault("unresolved variable");
    }
}

std::vector<const Expr*> call_exprs(const Expr& e) {
    std::vector<const Expr*> out;
    if (e.kind == Expr::Call && e.base) out.push_back(e.base.get());
    for (const auto& a : e.args) out.push_back(a.get());
    return out;
}

void do_return(AbsConfig& cfg, AbsValue v) {
    ACallFrame frame = std::move(cfg.fstack.back());
    cfg.fstack.pop_back();
    cfg.env = std::move(frame.saved_env);
    cfg.lstack = std::move(frame.saved_lstack);
    cfg.k = std::move(frame.saved_k);
    cfg.cl = frame.saved_cl;
    if (frame.deliver_value)
        cfg.k.push_back({AKItem::Val, -1, std::move(v), -1, false, {}, 0, Label::Low});
}

Rule invoke(AbsConfig& cfg, AKItem args_item) {
    const Expr& e = *cfg.program->expr_by_id[args_item.node];
    if (!args_item.flag) {
        const ClassDecl& cls = cfg.program->classes[e.callee_class];
        const MethodDecl& m = cls.methods[e.callee_method];
        ACallFrame frame;
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
        cfg.k.push_back({AKItem::Stmt, m.body->id, {}, -1, false, {}, 0, Label::Low});
        cfg.fstack.push_back(std::move(frame));
        return Rule::CallInvoke;
    }
    const ClassDecl& cls = cfg.program->classes[e.callee_class];
    std::vector<Loc> field_locs;
    for (size_t i = 0; i < cls.instance_fields.size(); i++) field_locs.push_back(alloc(cfg));
    AbsValue obj = AbsValue::object(cfg.cl, e.callee_class, field_locs);

    ACallFrame frame;
    frame.saved_env = std::move(cfg.env);
    frame.saved_lstack = std::move(cfg.lstack);
    frame.saved_k = std::move(cfg.k);
    frame.saved_k.push_back({AKItem::Val, -1, obj, -1, false, {}, 0, Label::Low});
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
            {AKItem::Stmt, cls.methods[cls.ctor_index].body->id, {}, -1, false, {}, 0, Label::Low});
    for (auto it = cls.field_init.rbegin(); it != cls.field_init.rend(); ++it)
        cfg.k.push_back({AKItem::Stmt, (*it)->id, {}, -1, false, {}, 0, Label::Low});
    cfg.fstack.push_back(std::move(frame));
    return Rule::NewAlloc;
}

Rule exec_stmt(AbsConfig& cfg, const Stmt& s) {
    auto push_stmt = [&](const Stmt& c) {
        cfg.k.push_back({AKItem::Stmt, c.id, {}, -1, false, {}, 0, Label::Low});
    };
    auto push_expr = [&](const Expr& c) {
        cfg.k.push_back({AKItem::Expr, c.id, {}, -1, false, {}, 0, Label::Low});
    };
    switch (s.kind) {
    case Stmt::Block:
        cfg.env.push_scope();
        cfg.k.push_back({AKItem::BlockExit, -1, {}, -1, false, {}, 0, Label::Low});
        for (auto it = s.body.rbegin(); it != s.body.rend(); ++it) push_stmt(**it);
        return Rule::BlockEnter;
    case Stmt::Declare:
        cfg.k.push_back({AKItem::Declare, s.id, {}, -1, false, {}, 0, Label::Low});
        push_expr(*s.init);
        return Rule::DeclareSched;
    case Stmt::Assign:
        if (s.target->kind == Expr::Var) {
            VarAddr a = addr_of_var(cfg, *s.target);
            cfg.k.push_back({AKItem::AssignTo, s.id, {}, a.loc, false, {}, 0, a.path_label});
            push_expr(*s.value);
            return Rule::AssignAddr;
        }
        cfg.k.push_back({AKItem::FieldAddr, s.id, {}, -1, false, {}, 0, Label::Low});
        push_expr(*s.target->base);
        return Rule::AssignFieldSched;
    case Stmt::If:
        if (!s.branch_abrupt)
            cfg.k.push_back({AKItem::Restore, -1, {}, -1, false, {}, 0, cfg.cl});
        cfg.k.push_back({AKItem::Branch, s.id, {}, -1, false, {}, 0, Label::Low});
        push_expr(*s.cond);
        return s.branch_abrupt ? Rule::IfSetupAbrupt : Rule::IfSetup;
    case Stmt::While: {
        ACont break_k = cfg.k;
        cfg.k.push_back({AKItem::PopLstack, -1, {}, -1, false, {}, 0, Label::Low});
        cfg.k.push_back({AKItem::Restore, -1, {}, -1, false, {}, 0, cfg.cl});
        cfg.k.push_back({AKItem::WhileCont, s.id, {}, -1, false, {}, 0, Label::Low});
        ACont continue_k = cfg.k;
        cfg.lstack.push_back({std::move(continue_k), std::move(break_k), cfg.env.scopes.size()});
        return Rule::WhileSetup;
    }
    case Stmt::Break: {
        if (cfg.lstack.empty()) throw RuntimeFault("break outside loop");
        ALoopFrame frame = std::move(cfg.lstack.back());
        cfg.lstack.pop_back();
        cfg.k = std::move(frame.break_k);
        cfg.env.scopes.resize(frame.env_depth);
        return Rule::Break;
    }
    case Stmt::Continue: {
        if (cfg.lstack.empty()) throw RuntimeFault("continue outside loop");
        const ALoopFrame& frame = cfg.lstack.back();
        cfg.k = frame.continue_k;
        cfg.env.scopes.resize(frame.env_depth);
        return Rule::Continue;
    }
    case Stmt::Return:
        if (s.ret) {
            cfg.k.push_back({AKItem::Return, s.id, {}, -1, false, {}, 0, Label::Low});
            push_expr(*s.ret);
            return Rule::ReturnSched;
        }
        do_return(cfg, AbsValue::void_value());
        return Rule::ReturnVoid;
    case Stmt::ExprStmt:
        cfg.k.push_back({AKItem::Discard, s.id, {}, -1, false, {}, 0, Label::Low});
        push_expr(*s.expr);
        return Rule::ExprStmtSched;
    case Stmt::Println:
        cfg.k.push_back({AKItem::Print, s.id, {}, -1, false, {}, 0, Label::Low});
        push_expr(*s.expr);
        return Rule::PrintSched;
    }
    throw RuntimeFault("bad statement");
}

Rule eval_expr(AbsConfig& cfg, const Expr& e) {
    auto push_val = [&](AbsValue v) {
        cfg.k.push_back({AKItem::Val, -1, std::move(v), -1, false, {}, 0, Label::Low});
    };
    switch (e.kind) {
    case Expr::IntLit:
    case Expr::BoolLit:
        push_val(AbsValue::scalar(cfg.cl));
        return Rule::Const;
    case Expr::Var: {
        VarAddr a = addr_of_var(cfg, e);
        AbsValue v = read_loc(cfg, a.loc);
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
        cfg.k.push_back({AKItem::FieldGet, e.id, {}, -1, false, {}, 0, Label::Low});
        cfg.k.push_back({AKItem::Expr, e.base->id, {}, -1, false, {}, 0, Label::Low});
        return Rule::FieldSched;
    case Expr::Unary:
        cfg.k.push_back({AKItem::UnApply, e.id, {}, -1, false, {}, 0, Label::Low});
        cfg.k.push_back({AKItem::Expr, e.operand->id, {}, -1, false, {}, 0, Label::Low});
        return Rule::UnSched;
    case Expr::Binary:
        cfg.k.push_back({AKItem::BinRhs, e.id, {}, -1, false, {}, 0, Label::Low});
        cfg.k.push_back({AKItem::Expr, e.lhs->id, {}, -1, false, {}, 0, Label::Low});
        return Rule::BinSched;
    case Expr::Call:
    case Expr::New: {
        AKItem item{AKItem::Args, e.id, {}, -1, e.kind == Expr::New, {}, 0, Label::Low};
        std::vector<const Expr*> exprs = call_exprs(e);
        cfg.k.push_back(std::move(item));
        if (!exprs.empty())
            cfg.k.push_back({AKItem::Expr, exprs[0]->id, {}, -1, false, {}, 0, Label::Low});
        return e.kind == Expr::New ? Rule::NewSched : Rule::CallSched;
    }
    }
    throw RuntimeFault("bad expression");
}

// branch_choice: 0 take then-side, 1 take else-side, -1 the step is known
// to be deterministic.
Rule consume_value(AbsConfig& cfg, AbsValue v, int branch_choice,
                   std::optional<Label>* printed) {
    AKItem item = std::move(cfg.k.back());
    const Program& p = *cfg.program;
    switch (item.op) {
    case AKItem::BinRhs: {
        cfg.k.pop_back();
        const Expr& e = *p.expr_by_id[item.node];
        cfg.k.push_back({AKItem::BinApply, e.id, std::move(v), -1, false, {}, 0, Label::Low});
        cfg.k.push_back({AKItem::Expr, e.rhs->id, {}, -1, false, {}, 0, Label::Low});
        return Rule::BinRhs;
    }
    case AKItem::BinApply: {
        cfg.k.pop_back();
        AbsValue r = AbsValue::scalar(join(item.value.label, v.label));
        cfg.k.push_back({AKItem::Val, -1, std::move(r), -1, false, {}, 0, Label::Low});
        return Rule::BinApply;
    }
    case AKItem::UnApply: {
        cfg.k.pop_back();
        cfg.k.push_back({AKItem::Val, -1, AbsValue::scalar(v.label), -1, false, {}, 0,
                         Label::Low});
        return Rule::UnApply;
    }
    case AKItem::Branch: {
        cfg.k.pop_back();
        const Stmt& s = *p.stmt_by_id[item.node];
        cfg.cl = join(cfg.cl, v.label);
        bool take_then = branch_choice == 0;
        if (s.kind == Stmt::While) {
            if (take_then) {
                cfg.k.push_back({AKItem::WhileCont, s.id, {}, -1, false, {}, 0, Label::Low});
                cfg.k.push_back({AKItem::Stmt, s.loop_body->id, {}, -1, false, {}, 0, Label::Low});
            }
        } else {
            if (take_then)
                cfg.k.push_back({AKItem::Stmt, s.then_branch->id, {}, -1, false, {}, 0,
                                 Label::Low});
            else if (s.else_branch)
                cfg.k.push_back({AKItem::Stmt, s.else_branch->id, {}, -1, false, {}, 0,
                                 Label::Low});
        }
        return take_then ? Rule::BranchThen : Rule::BranchElse;
    }
    case AKItem::AssignTo: {
        cfg.k.pop_back();
        v.label = join(v.label, item.ctx);
        write_loc(cfg, item.loc, v);
        return Rule::Store;
    }
    case AKItem::FieldAddr: {
        cfg.k.pop_back();
        const Stmt& s = *p.stmt_by_id[item.node];
        Loc loc = v.field_locs[s.target->field_index];
        cfg.k.push_back({AKItem::AssignTo, s.id, {}, loc, false, {}, 0, v.label});
        cfg.k.push_back({AKItem::Expr, s.value->id, {}, -1, false, {}, 0, Label::Low});
        return Rule::AssignFieldAddr;
    }
    case AKItem::FieldGet: {
        cfg.k.pop_back();
        const Expr& e = *p.expr_by_id[item.node];
        AbsValue r = read_loc(cfg, v.field_locs[e.field_index]);
        r.label = join(r.label, v.label);
        cfg.k.push_back({AKItem::Val, -1, std::move(r), -1, false, {}, 0, Label::Low});
        return Rule::FieldRead;
    }
    case AKItem::Args: {
        item.collected.push_back(std::move(v));
        item.next_arg++;
        const Expr& e = *p.expr_by_id[item.node];
        std::vector<const Expr*> exprs = call_exprs(e);
        int next = item.next_arg;
        bool is_new = item.flag;
        cfg.k.back() = std::move(item);
        if (next < static_cast<int>(exprs.size()))
            cfg.k.push_back({AKItem::Expr, exprs[next]->id, {}, -1, false, {}, 0, Label::Low});
        return is_new ? Rule::NewArg : Rule::CallArg;
    }
    case AKItem::Declare: {
        cfg.k.pop_back();
        const Stmt& s = *p.stmt_by_id[item.node];
        Loc l = alloc(cfg);
        write_loc(cfg, l, v);
        cfg.env.bind(s.name, l);
        return Rule::DeclareBind;
    }
    case AKItem::Discard:
        cfg.k.pop_back();
        return Rule::Discard;
    case AKItem::Print:
        cfg.k.pop_back();
        if (printed) *printed = v.label;
        return Rule::Print;
    case AKItem::Return:
        cfg.k.pop_back();
        do_return(cfg, std::move(v));
        return Rule::ReturnValue;
    default:
        throw RuntimeFault("value without consumer");
    }
}

// True if the next step forks: a guard value sitting on a Branch item.
bool at_branch(const AbsConfig& cfg) {
    return cfg.k.size() >= 2 && cfg.k.back().op == AKItem::Val &&
           cfg.k[cfg.k.size() - 2].op == AKItem::Branch;
}

Rule step_abstract(AbsConfig& cfg, int branch_choice, std::optional<Label>* printed) {
    if (cfg.k.empty()) {
        if (cfg.fstack.empty()) throw RuntimeFault("step on final configuration");
        do_return(cfg, AbsValue::void_value());
        return Rule::ReturnVoid;
    }
    AKItem& top = cfg.k.back();
    switch (top.op) {
    case AKItem::Stmt: {
        const Stmt& s = *cfg.program->stmt_by_id[top.node];
        cfg.k.pop_back();
        return exec_stmt(cfg, s);
    }
    case AKItem::Expr: {
        const Expr& e = *cfg.program->expr_by_id[top.node];
        cfg.k.pop_back();
        return eval_expr(cfg, e);
    }
    case AKItem::Val: {
        AbsValue v = std::move(top.value);
        cfg.k.pop_back();
        if (cfg.k.empty()) throw RuntimeFault("value without consumer");
        return consume_value(cfg, std::move(v), branch_choice, printed);
    }
    case AKItem::WhileCont: {
        const Stmt& s = *cfg.program->stmt_by_id[top.node];
        cfg.k.pop_back();
        cfg.k.push_back({AKItem::Branch, s.id, {}, -1, true, {}, 0, Label::Low});
        cfg.k.push_back({AKItem::Expr, s.cond->id, {}, -1, false, {}, 0, Label::Low});
        return Rule::WhileExpand;
    }
    case AKItem::Restore:
        cfg.cl = top.ctx;
        cfg.k.pop_back();
        return Rule::RestoreCtx;
    case AKItem::PopLstack:
        cfg.k.pop_back();
        if (cfg.lstack.empty()) throw RuntimeFault("loop stack underflow");
        cfg.lstack.pop_back();
        return Rule::PopLstack;
    case AKItem::BlockExit:
        cfg.k.pop_back();
        cfg.env.pop_scope();
        return Rule::BlockExit;
    case AKItem::Args: {
        AKItem item = std::move(top);
        cfg.k.pop_back();
        return invoke(cfg, std::move(item));
    }
    default:
        throw RuntimeFault("bad continuation item");
    }
}

// ---- canonicalization ----

struct Renamer {
    const AbsConfig& cfg;
    std::map<Loc, Loc> remap;
    Loc next = 0;

    void visit(Loc old) {
        auto [it, inserted] = remap.insert({old, next});
        if (!inserted) return;
        next++;
        auto c = cfg.store.find(old);
        if (c != cfg.store.end() && c->second.kind == AbsCell::Object)
            for (Loc f : c->second.field_locs) visit(f);
    }
    void visit_value(const AbsValue& v) {
        if (v.kind == AbsValue::Object)
            for (Loc f : v.field_locs) visit(f);
    }
    void visit_env(const Env& e) {
        for (const auto& scope : e.scopes)
            for (const auto& [name, loc] : scope) visit(loc);
    }
    void visit_cont(const ACont& k) {
        for (const auto& item : k) {
            if (item.loc >= 0) visit(item.loc);
            visit_value(item.value);
            for (const auto& v : item.collected) visit_value(v);
        }
    }
    void visit_lstack(const std::vector<ALoopFrame>& ls) {
        for (const auto& f : ls) {
            visit_cont(f.continue_k);
            visit_cont(f.break_k);
        }
    }
};

struct Rewriter {
    const std::map<Loc, Loc>& remap;

    Loc operator()(Loc old) const {
        auto it = remap.find(old);
        if (it == remap.end()) throw RuntimeFault("canonicalization missed a location");
        return it->second;
    }
    void value(AbsValue& v) const {
        for (Loc& f : v.field_locs) f = (*this)(f);
    }
    void env(Env& e) const {
        for (auto& scope : e.scopes)
            for (auto& [name, loc] : scope) loc = (*this)(loc);
    }
    void cont(ACont& k) const {
        for (auto& item : k) {
            if (item.loc >= 0) item.loc = (*this)(item.loc);
            value(item.value);
            for (auto& v : item.collected) value(v);
        }
    }
    void lstack(std::vector<ALoopFrame>& ls) const {
        for (auto& f : ls) {
            cont(f.continue_k);
            cont(f.break_k);
        }
    }
};

}  // namespace

void canonicalize(AbsConfig& cfg) {
    Renamer rn{cfg, {}, 0};
    // statics first, in layout order: they keep their identity
    const StaticLayout layout = StaticLayout::make(*cfg.program);
    for (const auto& per_class : layout.locs)
        for (Loc l : per_class) rn.visit(l);
    rn.visit_env(cfg.env);
    rn.visit_cont(cfg.k);
    rn.visit_lstack(cfg.lstack);
    for (const auto& f : cfg.fstack) {
        rn.visit_env(f.saved_env);
        rn.visit_cont(f.saved_k);
        rn.visit_lstack(f.saved_lstack);
    }

    Rewriter rw{rn.remap};
    std::map<Loc, AbsCell> new_store;
    for (const auto& [old, nu] : rn.remap) {
        auto it = cfg.store.find(old);
        if (it == cfg.store.end()) throw RuntimeFault("dangling location");
        AbsCell cell = it->second;
        for (Loc& f : cell.field_locs) f = rw(f);
        new_store[nu] = std::move(cell);
    }
    cfg.store = std::move(new_store);
    rw.env(cfg.env);
    rw.cont(cfg.k);
    rw.lstack(cfg.lstack);
    for (auto& f : cfg.fstack) {
        rw.env(f.saved_env);
        rw.cont(f.saved_k);
        rw.lstack(f.saved_lstack);
    }
    cfg.next_loc = rn.next;
}

std::vector<AbsSucc> abstract_successors(const AbsConfig& cfg) {
    std::vector<AbsSucc> out;
    if (cfg.final()) return out;
    if (at_branch(cfg)) {
        for (int choice : {0, 1}) {
            AbsConfig c = cfg;
            std::optional<Label> printed;
            Rule r = step_abstract(c, choice, &printed);
            canonicalize(c);
            out.push_back({r, std::move(c), printed});
        }
        return out;
    }
    AbsConfig c = cfg;
    std::optional<Label> printed;
    Rule r = step_abstract(c, -1, &printed);
    canonicalize(c);
    out.push_back({r, std::move(c), printed});
    return out;
}

AbsConfig lift(const Program& program, const NIPolicy& policy) {
    AbsConfig cfg;
    cfg.program = &program;
    const StaticLayout layout = StaticLayout::make(program);
    cfg.next_loc = layout.total();
    for (Loc l = 0; l < cfg.next_loc; l++) cfg.store[l] = AbsCell{};
    cfg.env.push_scope();
    for (auto it = program.static_init.rbegin(); it != program.static_init.rend(); ++it)
        cfg.k.push_back({AKItem::Stmt, (*it)->id, {}, -1, false, {}, 0, Label::Low});

    // static initialization must not fork
    while (!cfg.final()) {
        if (at_branch(cfg))
            throw RuntimeFault("conditional in static initialization is not supported");
        step_abstract(cfg, -1, nullptr);
    }

    // stamp policy labels over everything reachable from static roots
    std::function<void(const std::string&, Loc, std::set<Loc>&)> stamp =
        [&](const std::string& path, Loc loc, std::set<Loc>& chain) {
            auto it = cfg.store.find(loc);
            if (it == cfg.store.end() || it->second.kind == AbsCell::Uninit) return;
            AbsCell& c = it->second;
            if (c.kind == AbsCell::Scalar) {
                c.sl = stored(policy.label_of(path));
                return;
            }
            c.sl = StoredLabel::Low;
            if (chain.count(loc)) return;
            chain.insert(loc);
            const ClassDecl& cls = program.classes[c.class_index];
            std::vector<Loc> locs = c.field_locs;
            for (size_t fi = 0; fi < locs.size(); fi++)
                stamp(path + "." + cls.instance_fields[fi].name, locs[fi], chain);
            chain.erase(loc);
        };
    for (size_t ci = 0; ci < program.classes.size(); ci++)
        for (size_t fi = 0; fi < program.classes[ci].static_fields.size(); fi++) {
            std::set<Loc> chain;
            stamp(program.classes[ci].name + "." + program.classes[ci].static_fields[fi].name,
                  layout.locs[ci][fi], chain);
        }

    // enter main with policy-labeled inputs
    const MethodDecl& main = program.classes[program.main_class].methods[program.main_method];
    ACallFrame frame;
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
        write_loc(cfg, l, AbsValue::scalar(policy.label_of(prm.name)));
        cfg.env.bind(prm.name, l);
    }
    cfg.k.clear();
    cfg.k.push_back({AKItem::Stmt, main.body->id, {}, -1, false, {}, 0, Label::Low});
    cfg.fstack.push_back(std::move(frame));

    canonicalize(cfg);
    return cfg;
}

std::map<std::string, StoredLabel> project_store(const AbsConfig& cfg) {
    std::map<std::string, StoredLabel> out;
    const Program& p = *cfg.program;
    const StaticLayout layout = StaticLayout::make(p);
    std::function<void(const std::string&, Loc, std::set<Loc>&)> walk =
        [&](const std::string& path, Loc loc, std::set<Loc>& chain) {
            auto it = cfg.store.find(loc);
            if (it == cfg.store.end() || it->second.kind == AbsCell::Uninit) return;
            const AbsCell& c = it->second;
            if (c.kind == AbsCell::Scalar) {
                out[path] = c.sl;
                return;
            }
            if (chain.count(loc)) return;
            chain.insert(loc);
            const ClassDecl& cls = p.classes[c.class_index];
            for (size_t fi = 0; fi < c.field_locs.size(); fi++)
                walk(path + "." + cls.instance_fields[fi].name, c.field_locs[fi], chain);
            chain.erase(loc);
        };
    for (size_t ci = 0; ci < p.classes.size(); ci++)
        for (size_t fi = 0; fi < p.classes[ci].static_fields.size(); fi++) {
            std::set<Loc> chain;
            walk(p.classes[ci].name + "." + p.classes[ci].static_fields[fi].name,
                 layout.locs[ci][fi], chain);
        }
    return out;
}

std::string ReachGraph::serialize() const {
    std::ostringstream os;
    for (size_t i = 0; i < nodes.size(); i++) os << "N" << i << " " << nodes[i] << "\n";
    for (const auto& [src, rule, dst] : edges)
        os << "E " << src << " " << rule_name(rule) << " " << dst << "\n";
    for (int f : finals) os << "F " << f << "\n";
    return os.str();
}

namespace {

ExploreResult explore_impl(const Program& program, const NIPolicy& policy,
                           const ExploreOptions& opts) {
    ExploreResult res;
    AbsConfig init = lift(program, policy);
    std::string init_ser = serialize_config(init);

    std::vector<AbsConfig> configs;
    std::unordered_map<std::string, int> index;
    res.graph.nodes.push_back(init_ser);
    configs.push_back(std::move(init));
    index[init_ser] = 0;

    // Narrow frontiers are not worth a parallel region.
    constexpr int kParallelWidth = 16;

    struct Expanded {
        AbsSucc succ;
        std::string ser;
    };

    std::vector<int> frontier{0};
    while (!frontier.empty()) {
        std::vector<std::vector<Expanded>> layer(frontier.size());
        const int n = static_cast<int>(frontier.size());
        auto expand = [&](int i) {
            for (AbsSucc& s : abstract_successors(configs[frontier[i]])) {
                std::string ser = serialize_config(s.cfg);
                layer[i].push_back({std::move(s), std::move(ser)});
            }
        };
        if (opts.parallel && n >= kParallelWidth) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 16)
#endif
            for (int i = 0; i < n; i++) expand(i);
        } else {
            for (int i = 0; i < n; i++) expand(i);
        }
        std::vector<int> next_frontier;
        for (int i = 0; i < n; i++) {
            int src = frontier[i];
            if (layer[i].empty()) {
                res.graph.finals.push_back(src);
                continue;
            }
            for (Expanded& e : layer[i]) {
                auto it = index.find(e.ser);
                int dst;
                if (it == index.end()) {
                    dst = static_cast<int>(res.graph.nodes.size());
                    if (dst >= opts.state_budget)
                        throw RuntimeFault("abstract state budget exceeded");
                    index[e.ser] = dst;
                    res.graph.nodes.push_back(e.ser);
                    configs.push_back(std::move(e.succ.cfg));
                    next_frontier.push_back(dst);
                } else {
                    dst = it->second;
                }
                res.graph.edges.push_back({src, e.succ.rule, dst});
                if (e.succ.printed) res.print_labels.push_back(*e.succ.printed);
            }
        }
        frontier = std::move(next_frontier);
    }

    // Theorem-2 style verdict over every final state
    std::set<std::pair<std::string, StoredLabel>> witness;
    for (int f : res.graph.finals) {
        for (const auto& [path, sl] : project_store(configs[f])) {
            if (policy.label_of(path) == Label::Low && sl != StoredLabel::Low)
                witness.insert({path, sl});
        }
    }
    res.verdict.pass = witness.empty();
    res.verdict.witness.assign(witness.begin(), witness.end());
    return res;
}

}  // namespace

ExploreResult explore(const Program& program, const NIPolicy& policy,
                      const ExploreOptions& opts) {
    return explore_impl(program, policy, opts);
}

ExploreResult explore_serial(const Program& program, const NIPolicy& policy,
                             const ExploreOptions& opts) {
    ExploreOptions serial = opts;
    serial.parallel = false;
    return explore_impl(program, policy, serial);
}

}  // namespace nicert
