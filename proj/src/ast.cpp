#include "nicert/ast.hpp"

#include <sstream>

namespace nicert {

const char* to_string(BinOp op) {
    switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Div: return "/";
    case BinOp::Mod: return "%";
    case BinOp::Lt: return "<";
    case BinOp::Gt: return ">";
    case BinOp::Le: return "<=";
    case BinOp::Ge: return ">=";
    case BinOp::Eq: return "==";
    case BinOp::Ne: return "!=";
    case BinOp::And: return "&&";
    case BinOp::Or: return "||";
    }
    return "?";
}

const char* to_string(UnOp op) { return op == UnOp::Neg ? "-" : "!"; }

bool contains_abrupt(const Stmt& branch) {
    switch (branch.kind) {
    case Stmt::Break:
    case Stmt::Continue:
    case Stmt::Return:
        return true;
    case Stmt::Block:
        for (const auto& s : branch.body)
            if (contains_abrupt(*s)) return true;
        return false;
    // nested conditionals and loops shield their abrupt statements
    case Stmt::If:
    case Stmt::While:
    default:
        return false;
    }
}

namespace {

struct Printer {
    explicit Printer(const Program& prog) : p(prog) {}
    const Program& p;
    std::ostringstream out;
    int indent = 0;

    void nl() {
        out << "\n";
        for (int i = 0; i < indent; i++) out << "    ";
    }

    void type(const Type& t) {
        switch (t.kind) {
        case Type::Int: out << "int"; break;
        case Type::Bool: out << "boolean"; break;
        case Type::Void: out << "void"; break;
        case Type::Object: out << p.classes[t.class_index].name; break;
        case Type::Invalid: out << "?"; break;
        }
    }

    int prec(const Expr& e) const {
        if (e.kind != Expr::Binary) return 100;
        switch (e.bin_op) {
        case BinOp::Or: return 1;
        case BinOp::And: return 2;
        case BinOp::Eq: case BinOp::Ne: return 3;
        case BinOp::Lt: case BinOp::Gt: case BinOp::Le: case BinOp::Ge: return 4;
        case BinOp::Add: case BinOp::Sub: return 5;
        default: return 6;
        }
    }

    void expr(const Expr& e, int parent_prec = 0) {
        switch (e.kind) {
        case Expr::IntLit: out << e.int_value; return;
        case Expr::BoolLit: out << (e.bool_value ? "true" : "false"); return;
        case Expr::This: out << "this"; return;
        case Expr::Var: out << e.name; return;
        case Expr::FieldAccess:
            expr(*e.base, 99);
            out << "." << e.name;
            return;
        case Expr::Unary:
            out << to_string(e.un_op);
            expr(*e.operand, 99);
            return;
        case Expr::Binary: {
            int pr = prec(e);
            bool paren = pr < parent_prec;
            if (paren) out << "(";
            expr(*e.lhs, pr);
            out << " " << to_string(e.bin_op) << " ";
            expr(*e.rhs, pr + 1);
            if (paren) out << ")";
            return;
        }
        case Expr::Call:
            if (e.base) {
                if (e.base->kind == Expr::This && e.name.find('.') == std::string::npos) {
                    // implicit receiver stays implicit
                } else {
                    expr(*e.base, 99);
                    out << ".";
                }
            }
            out << e.name << "(";
            args(e.args);
            out << ")";
            return;
        case Expr::New:
            out << "new " << e.name << "(";
            args(e.args);
            out << ")";
            return;
        }
    }

    void args(const std::vector<ExprPtr>& as) {
        for (size_t i = 0; i < as.size(); i++) {
            if (i) out << ", ";
            expr(*as[i]);
        }
    }

    void stmt(const Stmt& s) {
        switch (s.kind) {
        case Stmt::Block: {
            out << "{";
            indent++;
            for (const auto& c : s.body) {
                nl();
                stmt(*c);
            }
            indent--;
            nl();
            out << "}";
            return;
        }
        case Stmt::Declare:
            type(s.decl_type);
            out << " " << s.name << " = ";
            expr(*s.init);
            out << ";";
            return;
        case Stmt::Assign:
            expr(*s.target);
            out << " = ";
            expr(*s.value);
            out << ";";
            return;
        case Stmt::If:
            out << "if (";
            expr(*s.cond);
            out << ") ";
            stmt(*s.then_branch);
            if (s.else_branch) {
                out << " else ";
                stmt(*s.else_branch);
            }
            return;
        case Stmt::While:
            out << "while (";
            expr(*s.cond);
            out << ") ";
            stmt(*s.loop_body);
            return;
        case Stmt::Break: out << "break;"; return;
        case Stmt::Continue: out << "continue;"; return;
        case Stmt::Return:
            out << "return";
            if (s.ret) {
                out << " ";
                expr(*s.ret);
            }
            out << ";";
            return;
        case Stmt::ExprStmt:
            expr(*s.expr);
            out << ";";
            return;
        case Stmt::Println:
            out << "println(";
            expr(*s.expr);
            out << ");";
            return;
        }
    }

    void run() {
        for (const auto& cls : p.classes) {
            out << "class " << cls.name << " {";
            indent++;
            for (const auto& f : cls.static_fields) {
                nl();
                out << "static ";
                type(f.type);
                out << " " << f.name << " = ";
                expr(*f.init);
                out << ";";
            }
            for (const auto& f : cls.instance_fields) {
                nl();
                type(f.type);
                out << " " << f.name << " = ";
                expr(*f.init);
                out << ";";
            }
            for (const auto& a : cls.annotations) {
                nl();
                out << "//@ setLabel(" << a.path << ", " << to_string(a.label) << ");";
            }
            for (const auto& m : cls.methods) {
                nl();
                if (m.is_ctor) {
                    out << cls.name << "(";
                } else {
                    if (m.is_static) out << "static ";
                    type(m.return_type);
                    out << " " << m.name << "(";
                }
                for (size_t i = 0; i < m.params.size(); i++) {
                    if (i) out << ", ";
                    type(m.params[i].type);
                    out << " " << m.params[i].name;
                }
                out << ") ";
                stmt(*m.body);
            }
            indent--;
            nl();
            out << "}";
            nl();
        }
    }
};

}  // namespace

std::string to_source(const Program& p) {
    Printer pr(p);
    pr.run();
    return pr.out.str();
}

}  // namespace nicert
