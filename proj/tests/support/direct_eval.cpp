#include "support/direct_eval.hpp"

#include <functional>
#include <set>

#include "nicert/diagnostics.hpp"

namespace nicert::testing {

namespace {

enum class Flow { Normal, Break, Continue, Return };

struct Interp {
    const Program& p;
    std::map<Loc, Value> store;
    std::vector<std::vector<Loc>> statics;  // [class][field]
    Loc next = 0;
    long long budget;
    std::vector<Value> output;

    struct Frame {
        std::vector<std::map<std::string, Loc>> scopes;

        Loc* find(const std::string& n) {
            for (auto it = scopes.rbegin(); it != scopes.rend(); ++it) {
                auto f = it->find(n);
                if (f != it->end()) return &f->second;
            }
            return nullptr;
        }
    };

    explicit Interp(const Program& prog, long long limit) : p(prog), budget(limit) {
        statics.resize(p.classes.size());
        for (size_t ci = 0; ci < p.classes.size(); ci++)
            for (size_t fi = 0; fi < p.classes[ci].static_fields.size(); fi++) {
                (void)fi;
                statics[ci].push_back(fresh());
            }
    }

    void tick() {
        if (--budget <= 0) throw StepLimitExceeded(budget);
    }

    Loc fresh() {
        Loc l = next++;
        store[l] = Value{};
        return l;
    }

    Value read(Loc l) {
        const Value& v = store.at(l);
        if (v.kind == Value::Uninit) throw RuntimeFault("read of uninitialized location");
        return v;
    }

    Loc lvalue(const Expr& target, Frame& fr) {
        if (target.kind == Expr::Var) {
            switch (target.var.kind) {
            case VarRef::Local: {
                Loc* l = fr.find(target.name);
                if (!l) throw RuntimeFault("unbound variable");
                return *l;
            }
            case VarRef::StaticField:
                return statics[target.var.class_index][target.var.field_index];
            case VarRef::ThisField: {
                Loc* self = fr.find("this");
                Value obj = read(*self);
                return obj.field_locs[target.var.field_index];
            }
            default:
                throw RuntimeFault("unresolved variable");
            }
        }
        if (target.kind == Expr::FieldAccess) {
            Value obj = eval(*target.base, fr);
            return obj.field_locs[target.field_index];
        }
        throw RuntimeFault("bad assignment target");
    }

    Value eval(const Expr& e, Frame& fr) {
        tick();
        switch (e.kind) {
        case Expr::IntLit: return Value::of_int(e.int_value);
        case Expr::BoolLit: return Value::of_bool(e.bool_value);
        case Expr::This: {
            Loc* self = fr.find("this");
            if (!self) throw RuntimeFault("no 'this'");
            return read(*self);
        }
        case Expr::Var: return read(lvalue(e, fr));
        case Expr::FieldAccess: {
            Value obj = eval(*e.base, fr);
            return read(obj.field_locs[e.field_index]);
        }
        case Expr::Unary: {
            Value v = eval(*e.operand, fr);
            return e.un_op == UnOp::Neg ? Value::of_int(-v.i) : Value::of_bool(!v.b);
        }
        case Expr::Binary: {
            Value a = eval(*e.lhs, fr);
            Value b = eval(*e.rhs, fr);  // both sides always evaluated
            switch (e.bin_op) {
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
            case BinOp::Eq:
                return Value::of_bool(a.kind == Value::Int ? a.i == b.i : a.b == b.b);
            case BinOp::Ne:
                return Value::of_bool(a.kind == Value::Int ? a.i != b.i : a.b != b.b);
            case BinOp::And: return Value::of_bool(a.b && b.b);
            case BinOp::Or: return Value::of_bool(a.b || b.b);
            }
            throw RuntimeFault("bad operator");
        }
        case Expr::Call: {
            std::vector<Value> args;
            Value recv;
            bool has_recv = e.base != nullptr;
            if (has_recv) recv = eval(*e.base, fr);
            for (const auto& a : e.args) args.push_back(eval(*a, fr));
            return call(e.callee_class, e.callee_method, has_recv ? &recv : nullptr, args);
        }
        case Expr::New: {
            std::vector<Value> args;
            for (const auto& a : e.args) args.push_back(eval(*a, fr));
            return construct(e.callee_class, args);
        }
        }
        throw RuntimeFault("bad expression");
    }

    Value call(int ci, int mi, const Value* recv, const std::vector<Value>& args) {
        const MethodDecl& m = p.classes[ci].methods[mi];
        Frame fr;
        fr.scopes.emplace_back();
        if (recv) {
            Loc l = fresh();
            store[l] = *recv;
            fr.scopes.back()["this"] = l;
        }
        for (size_t i = 0; i < m.params.size(); i++) {
            Loc l = fresh();
            store[l] = args[i];
            fr.scopes.back()[m.params[i].name] = l;
        }
        Value ret = Value::void_value();
        Flow flow = exec(*m.body, fr, &ret);
        if (flow == Flow::Break || flow == Flow::Continue)
            throw RuntimeFault("loop escape past method boundary");
        return ret;
    }

    Value construct(int ci, const std::vector<Value>& args) {
        const ClassDecl& cls = p.classes[ci];
        std::vector<Loc> locs;
        for (size_t i = 0; i < cls.instance_fields.size(); i++) locs.push_back(fresh());
        Value obj = Value::object(ci, locs);
        Frame fr;
        fr.scopes.emplace_back();
        Loc self = fresh();
        store[self] = obj;
        fr.scopes.back()["this"] = self;
        if (cls.ctor_index >= 0) {
            const MethodDecl& ctor = cls.methods[cls.ctor_index];
            for (size_t i = 0; i < ctor.params.size(); i++) {
                Loc l = fresh();
                store[l] = args[i];
                fr.scopes.back()[ctor.params[i].name] = l;
            }
        }
        Value ret = Value::void_value();
        for (const auto& s : cls.field_init) exec(*s, fr, &ret);
        if (cls.ctor_index >= 0) exec(*p.classes[ci].methods[cls.ctor_index].body, fr, &ret);
        return obj;
    }

    Flow exec(const Stmt& s, Frame& fr, Value* ret) {
        tick();
        switch (s.kind) {
        case Stmt::Block: {
            fr.scopes.emplace_back();
            Flow flow = Flow::Normal;
            for (const auto& c : s.body) {
                flow = exec(*c, fr, ret);
                if (flow != Flow::Normal) break;
            }
            fr.scopes.pop_back();
            return flow;
        }
        case Stmt::Declare: {
            Value v = eval(*s.init, fr);
            Loc l = fresh();
            store[l] = v;
            fr.scopes.back()[s.name] = l;
            return Flow::Normal;
        }
        case Stmt::Assign: {
            Loc l = lvalue(*s.target, fr);
            store[l] = eval(*s.value, fr);
            return Flow::Normal;
        }
        case Stmt::If: {
            Value c = eval(*s.cond, fr);
            if (c.b) return exec(*s.then_branch, fr, ret);
            if (s.else_branch) return exec(*s.else_branch, fr, ret);
            return Flow::Normal;
        }
        case Stmt::While: {
            for (;;) {
                Value c = eval(*s.cond, fr);
                if (!c.b) return Flow::Normal;
                Flow flow = exec(*s.loop_body, fr, ret);
                if (flow == Flow::Break) return Flow::Normal;
                if (flow == Flow::Return) return flow;
            }
        }
        case Stmt::Break: return Flow::Break;
        case Stmt::Continue: return Flow::Continue;
        case Stmt::Return:
            if (s.ret) *ret = eval(*s.ret, fr);
            return Flow::Return;
        case Stmt::ExprStmt:
            eval(*s.expr, fr);
            return Flow::Normal;
        case Stmt::Println:
            output.push_back(eval(*s.expr, fr));
            return Flow::Normal;
        }
        throw RuntimeFault("bad statement");
    }

    void project(const std::string& path, Loc loc, std::map<std::string, Value>& out,
                 std::set<Loc>& chain) {
        auto it = store.find(loc);
        if (it == store.end() || it->second.kind == Value::Uninit) return;
        const Value& v = it->second;
        if (v.kind == Value::Int || v.kind == Value::Bool) {
            out[path] = v;
            return;
        }
        if (v.kind == Value::Object) {
            if (chain.count(loc)) return;
            chain.insert(loc);
            const ClassDecl& cls = p.classes[v.class_index];
            for (size_t fi = 0; fi < cls.instance_fields.size(); fi++)
                project(path + "." + cls.instance_fields[fi].name, v.field_locs[fi], out, chain);
            chain.erase(loc);
        }
    }
};

}  // namespace

FinalState direct_run(const Program& program, const std::map<std::string, Value>& inputs,
                      long long step_limit) {
    Interp in(program, step_limit);

    // static initializers, textual order
    Interp::Frame boot;
    boot.scopes.emplace_back();
    Value sink = Value::void_value();
    for (const auto& s : program.static_init) in.exec(*s, boot, &sink);

    // main
    const MethodDecl& main = program.classes[program.main_class].methods[program.main_method];
    Interp::Frame fr;
    fr.scopes.emplace_back();
    for (const auto& prm : main.params) {
        Loc l = in.fresh();
        in.store[l] = inputs.at(prm.name);
        fr.scopes.back()[prm.name] = l;
    }
    Value ret = Value::void_value();
    in.exec(*main.body, fr, &ret);

    FinalState fs;
    for (size_t ci = 0; ci < program.classes.size(); ci++)
        for (size_t fi = 0; fi < program.classes[ci].static_fields.size(); fi++) {
            std::set<Loc> chain;
            in.project(program.classes[ci].name + "." +
                           program.classes[ci].static_fields[fi].name,
                       in.statics[ci][fi], fs.vars, chain);
        }
    fs.output = in.output;
    return fs;
}

}  // namespace nicert::testing
