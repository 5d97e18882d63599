#include "nicert/parser.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

#include "nicert/lexer.hpp"

namespace nicert {

namespace {

ExprPtr make_expr(Expr::Kind k, SourcePos pos) {
    auto e = std::make_unique<Expr>();
    e->kind = k;
    e->pos = pos;
    return e;
}

StmtPtr make_stmt(Stmt::Kind k, SourcePos pos) {
    auto s = std::make_unique<Stmt>();
    s->kind = k;
    s->pos = pos;
    return s;
}

ExprPtr default_init(const Type& t, SourcePos pos) {
    if (t.kind == Type::Int) {
        auto e = make_expr(Expr::IntLit, pos);
        e->int_value = 0;
        return e;
    }
    auto e = make_expr(Expr::BoolLit, pos);
    e->bool_value = false;
    return e;
}

class Parser {
public:
    explicit Parser(const std::string& source) : toks_(lex(source)) {
        prog_ = std::make_unique<Program>();
        prog_->source = source;
    }

    std::unique_ptr<Program> run() {
        while (!at(Token::Eof)) parse_class();
        if (prog_->classes.empty()) throw ParseError({1, 1}, "empty program");
        synthesize_init();
        number_ids();
        Resolver(*prog_).run();
        check_no_recursion();
        return std::move(prog_);
    }

private:
    std::vector<Token> toks_;
    size_t ti_ = 0;
    std::unique_ptr<Program> prog_;
    int loop_depth_ = 0;
    int cur_class_ = -1;

    // ---- token helpers ----
    const Token& cur() const { return toks_[ti_]; }
    const Token& ahead(size_t n) const { return toks_[std::min(ti_ + n, toks_.size() - 1)]; }
    bool at(Token::Kind k) const { return cur().kind == k; }
    bool at_kw(const char* kw) const { return cur().kind == Token::Keyword && cur().text == kw; }
    bool at_punct(const char* p) const { return cur().kind == Token::Punct && cur().text == p; }
    Token take() { return toks_[ti_++]; }
    Token expect_punct(const char* p) {
        if (!at_punct(p)) throw ParseError(cur().pos, std::string("expected '") + p + "'");
        return take();
    }
    Token expect_ident() {
        if (!at(Token::Ident)) throw ParseError(cur().pos, "expected identifier");
        return take();
    }
    bool eat_punct(const char* p) {
        if (at_punct(p)) { take(); return true; }
        return false;
    }
    bool eat_kw(const char* kw) {
        if (at_kw(kw)) { take(); return true; }
        return false;
    }
    void skip_modifiers() {
        while (at_kw("public") || at_kw("private") || at_kw("protected")) take();
    }

    void collect_annotations() {
        while (at(Token::Annotation)) {
            Token t = take();
            parse_annotation(t);
        }
    }

    // ---- annotations ----
    void parse_annotation(const Token& tok) {
        if (cur_class_ < 0) throw ParseError(tok.pos, "annotation outside of a class");
        // the body is a ';'-separated list of JML-style clauses
        std::vector<Token> ts = lex(tok.text);
        size_t i = 0;
        auto at_end = [&] { return ts[i].kind == Token::Eof; };
        while (!at_end()) {
            if (ts[i].kind == Token::Punct && ts[i].text == ";") { i++; continue; }
            if (ts[i].kind != Token::Ident && ts[i].kind != Token::Keyword)
                throw ParseError(tok.pos, "malformed annotation");
            std::string word = ts[i].text;
            if (word == "setLabel") {
                i++;
                if (!(ts[i].kind == Token::Punct && ts[i].text == "("))
                    throw ParseError(tok.pos, "expected '(' after setLabel");
                i++;
                std::string path;
                if (ts[i].kind != Token::Ident) throw ParseError(tok.pos, "expected variable in setLabel");
                path = ts[i++].text;
                while (ts[i].kind == Token::Punct && ts[i].text == ".") {
                    i++;
                    if (ts[i].kind != Token::Ident) throw ParseError(tok.pos, "expected field name");
                    path += "." + ts[i++].text;
                }
                if (!(ts[i].kind == Token::Punct && ts[i].text == ","))
                    throw ParseError(tok.pos, "expected ',' in setLabel");
                i++;
                if (ts[i].kind != Token::Ident || (ts[i].text != "Low" && ts[i].text != "High"))
                    throw ParseError(tok.pos, "label must be Low or High");
                Label lab = ts[i].text == "High" ? Label::High : Label::Low;
                i++;
                if (!(ts[i].kind == Token::Punct && ts[i].text == ")"))
                    throw ParseError(tok.pos, "expected ')' in setLabel");
                i++;
                prog_->classes[cur_class_].annotations.push_back({path, lab, tok.pos});
            } else if (word == "requires" || word == "ensures" || word == "assert" ||
                       word == "invariant") {
                // parsed and ignored
                i++;
                while (!at_end() && !(ts[i].kind == Token::Punct && ts[i].text == ";")) i++;
            } else {
                throw ParseError(tok.pos, "unknown annotation clause '" + word + "'");
            }
        }
    }

    // ---- declarations ----
    Type parse_type() {
        if (eat_kw("int")) return {Type::Int, -1};
        if (eat_kw("boolean")) return {Type::Bool, -1};
        if (at(Token::Ident)) {
            Token t = take();
            Type ty{Type::Object, -1};
            // class index patched once all classes are known
            ty.class_index = type_placeholder(t.text, t.pos);
            return ty;
        }
        throw ParseError(cur().pos, "expected type");
    }

    // Object types may be referenced before the class is declared; collect
    // names now, patch indices once all classes are known.
    std::map<std::string, int> classes_byname_;
    std::vector<std::pair<std::string, SourcePos>> type_names_;

    int type_placeholder(const std::string& name, SourcePos pos) {
        type_names_.push_back({name, pos});
        return -static_cast<int>(type_names_.size());  // negative placeholder
    }

    int resolve_type_placeholder(int placeholder) {
        const auto& [name, pos] = type_names_[-placeholder - 1];
        auto it = classes_byname_.find(name);
        if (it == classes_byname_.end()) throw ParseError(pos, "unknown class '" + name + "'");
        return it->second;
    }

    void patch_types() {
        std::function<void(Expr&)> fix_e;
        std::function<void(Stmt&)> fix_s;
        auto fix_t = [&](Type& t) {
            if (t.kind == Type::Object && t.class_index < 0)
                t.class_index = resolve_type_placeholder(t.class_index);
        };
        fix_e = [&](Expr& e) {
            fix_t(e.type);
            if (e.kind == Expr::New && e.callee_class < 0)
                e.callee_class = resolve_type_placeholder(e.callee_class);
            if (e.base) fix_e(*e.base);
            if (e.lhs) fix_e(*e.lhs);
            if (e.rhs) fix_e(*e.rhs);
            if (e.operand) fix_e(*e.operand);
            for (auto& a : e.args) fix_e(*a);
        };
        fix_s = [&](Stmt& s) {
            fix_t(s.decl_type);
            for (auto& c : s.body) fix_s(*c);
            for (ExprPtr* e : {&s.init, &s.target, &s.value, &s.cond, &s.ret, &s.expr})
                if (*e) fix_e(**e);
            for (StmtPtr* c : {&s.then_branch, &s.else_branch, &s.loop_body})
                if (*c) fix_s(**c);
        };
        for (auto& c : prog_->classes) {
            for (auto& f : c.static_fields) { fix_t(f.type); if (f.init) fix_e(*f.init); }
            for (auto& f : c.instance_fields) { fix_t(f.type); if (f.init) fix_e(*f.init); }
            for (auto& m : c.methods) {
                fix_t(m.return_type);
                for (auto& p : m.params) fix_t(p.type);
                if (m.body) fix_s(*m.body);
            }
        }
    }

    void parse_class() {
        collect_annotations_toplevel();
        skip_modifiers();
        if (!eat_kw("class")) throw ParseError(cur().pos, "expected class declaration");
        Token name = expect_ident();
        if (classes_byname_.count(name.text))
            throw ParseError(name.pos, "duplicate class '" + name.text + "'");
        ClassDecl cls;
        cls.name = name.text;
        cls.pos = name.pos;
        cur_class_ = static_cast<int>(prog_->classes.size());
        classes_byname_[name.text] = cur_class_;
        prog_->classes.push_back(std::move(cls));
        expect_punct("{");
        while (!at_punct("}")) {
            if (at(Token::Eof)) throw ParseError(cur().pos, "unterminated class body");
            parse_member();
        }
        expect_punct("}");
        cur_class_ = -1;
    }

    void collect_annotations_toplevel() {
        if (at(Token::Annotation))
            throw ParseError(cur().pos, "annotation outside of a class");
    }

    void parse_member() {
        collect_annotations();
        if (at_punct("}")) return;
        skip_modifiers();
        ClassDecl& cls = prog_->classes[cur_class_];

        bool is_static = eat_kw("static");
        skip_modifiers();

        // constructor: Ident matching class name followed by '('
        if (at(Token::Ident) && cur().text == cls.name && ahead(1).kind == Token::Punct &&
            ahead(1).text == "(") {
            if (is_static) throw ParseError(cur().pos, "constructor cannot be static");
            MethodDecl m;
            m.pos = cur().pos;
            m.name = take().text;
            m.is_ctor = true;
            m.return_type = {Type::Void, -1};
            parse_params(m.params);
            m.body = parse_block();
            if (cls.ctor_index >= 0) throw ParseError(m.pos, "duplicate constructor");
            cls.ctor_index = static_cast<int>(cls.methods.size());
            cls.methods.push_back(std::move(m));
            return;
        }

        Type ty;
        if (eat_kw("void")) {
            ty = {Type::Void, -1};
        } else {
            ty = parse_type();
        }
        Token name = expect_ident();
        if (at_punct("(")) {
            MethodDecl m;
            m.pos = name.pos;
            m.name = name.text;
            m.is_static = is_static;
            m.return_type = ty;
            parse_params(m.params);
            m.body = parse_block();
            for (const auto& other : cls.methods)
                if (other.name == m.name && !other.is_ctor)
                    throw ParseError(m.pos, "duplicate method '" + m.name + "'");
            cls.methods.push_back(std::move(m));
            return;
        }
        if (ty.kind == Type::Void) throw ParseError(name.pos, "field cannot be void");
        // field list
        for (;;) {
            FieldDecl f;
            f.name = name.text;
            f.type = ty;
            f.is_static = is_static;
            f.pos = name.pos;
            if (eat_punct("=")) f.init = parse_expr();
            else if (ty.kind == Type::Object)
                throw ParseError(name.pos, "field of class type needs an initializer");
            else f.init = default_init(ty, name.pos);
            auto dup = [&](const std::vector<FieldDecl>& v) {
                return std::any_of(v.begin(), v.end(),
                                   [&](const FieldDecl& o) { return o.name == f.name; });
            };
            if (dup(cls.static_fields) || dup(cls.instance_fields))
                throw ParseError(name.pos, "duplicate field '" + f.name + "'");
            (is_static ? cls.static_fields : cls.instance_fields).push_back(std::move(f));
            if (!eat_punct(",")) break;
            name = expect_ident();
        }
        expect_punct(";");
        collect_annotations();
    }

    void parse_params(std::vector<Param>& out) {
        expect_punct("(");
        if (!at_punct(")")) {
            for (;;) {
                Param p;
                p.type = parse_type();
                Token n = expect_ident();
                p.name = n.text;
                p.pos = n.pos;
                for (const auto& o : out)
                    if (o.name == p.name) throw ParseError(n.pos, "duplicate parameter");
                out.push_back(std::move(p));
                if (!eat_punct(",")) break;
            }
        }
        expect_punct(")");
    }

    // ---- statements ----
    StmtPtr parse_block() {
        SourcePos pos = cur().pos;
        expect_punct("{");
        auto blk = make_stmt(Stmt::Block, pos);
        while (!at_punct("}")) {
            if (at(Token::Eof)) throw ParseError(cur().pos, "unterminated block");
            collect_annotations();
            if (at_punct("}")) break;
            parse_stmt_into(blk->body);
        }
        expect_punct("}");
        return blk;
    }

    // Multi-declarator statements expand to several Declare statements that
    // scope to the surrounding block.
    void parse_stmt_into(std::vector<StmtPtr>& out) {
        if (at_kw("int") || at_kw("boolean") ||
            (at(Token::Ident) && ahead(1).kind == Token::Ident)) {
            parse_decl(out);
            return;
        }
        out.push_back(parse_stmt());
    }

    StmtPtr parse_stmt() {
        SourcePos pos = cur().pos;
        if (at_punct("{")) return parse_block();
        if (at_kw("if")) return parse_if();
        if (at_kw("while")) return parse_while();
        if (eat_kw("break")) {
            if (loop_depth_ == 0) throw ParseError(pos, "break outside loop");
            expect_punct(";");
            return make_stmt(Stmt::Break, pos);
        }
        if (eat_kw("continue")) {
            if (loop_depth_ == 0) throw ParseError(pos, "continue outside loop");
            expect_punct(";");
            return make_stmt(Stmt::Continue, pos);
        }
        if (eat_kw("return")) {
            auto s = make_stmt(Stmt::Return, pos);
            if (!at_punct(";")) s->ret = parse_expr();
            expect_punct(";");
            return s;
        }
        if (at_kw("println")) return parse_println();
        // System.out.println(e);
        if (at(Token::Ident) && cur().text == "System" && ahead(1).text == "." &&
            ahead(2).text == "out" && ahead(3).text == "." && ahead(4).kind == Token::Keyword &&
            ahead(4).text == "println") {
            take(); take(); take(); take();
            return parse_println();
        }
        // declaration as a branch body: wrap in a block scope
        if (at_kw("int") || at_kw("boolean") ||
            (at(Token::Ident) && ahead(1).kind == Token::Ident)) {
            auto blk = make_stmt(Stmt::Block, pos);
            parse_decl(blk->body);
            return blk;
        }
        // ++x; / --x;
        if (at_punct("++") || at_punct("--")) {
            bool inc = take().text == "++";
            ExprPtr target = parse_postfix_path();
            expect_punct(";");
            return desugar_incdec(std::move(target), inc, pos);
        }
        return parse_assign_or_call();
    }

    StmtPtr parse_println() {
        SourcePos pos = cur().pos;
        take();  // println
        expect_punct("(");
        auto s = make_stmt(Stmt::Println, pos);
        s->expr = parse_expr();
        expect_punct(")");
        expect_punct(";");
        return s;
    }

    void parse_decl(std::vector<StmtPtr>& out) {
        Type ty = parse_type();
        for (;;) {
            Token name = expect_ident();
            auto d = make_stmt(Stmt::Declare, name.pos);
            d->decl_type = ty;
            d->name = name.text;
            if (eat_punct("=")) d->init = parse_expr();
            else if (ty.kind == Type::Object)
                throw ParseError(name.pos, "variable of class type needs an initializer");
            else d->init = default_init(ty, name.pos);
            out.push_back(std::move(d));
            if (!eat_punct(",")) break;
        }
        expect_punct(";");
    }

    StmtPtr parse_if() {
        SourcePos pos = cur().pos;
        take();
        expect_punct("(");
        auto s = make_stmt(Stmt::If, pos);
        s->cond = parse_expr();
        expect_punct(")");
        s->then_branch = parse_stmt();
        if (eat_kw("else")) s->else_branch = parse_stmt();
        s->branch_abrupt = contains_abrupt(*s->then_branch) ||
                           (s->else_branch && contains_abrupt(*s->else_branch));
        return s;
    }

    StmtPtr parse_while() {
        SourcePos pos = cur().pos;
        take();
        expect_punct("(");
        auto s = make_stmt(Stmt::While, pos);
        s->cond = parse_expr();
        expect_punct(")");
        loop_depth_++;
        s->loop_body = parse_stmt();
        loop_depth_--;
        return s;
    }

    StmtPtr desugar_incdec(ExprPtr target, bool inc, SourcePos pos) {
        auto s = make_stmt(Stmt::Assign, pos);
        auto rhs = make_expr(Expr::Binary, pos);
        rhs->bin_op = inc ? BinOp::Add : BinOp::Sub;
        rhs->lhs = clone_expr(*target);
        auto one = make_expr(Expr::IntLit, pos);
        one->int_value = 1;
        rhs->rhs = std::move(one);
        s->target = std::move(target);
        s->value = std::move(rhs);
        return s;
    }

    StmtPtr parse_assign_or_call() {
        SourcePos pos = cur().pos;
        ExprPtr e = parse_postfix_path();
        if (at_punct("=")) {
            take();
            auto s = make_stmt(Stmt::Assign, pos);
            s->target = std::move(e);
            s->value = parse_expr();
            expect_punct(";");
            return s;
        }
        if (at_punct("+=") || at_punct("-=")) {
            bool add = take().text == "+=";
            auto s = make_stmt(Stmt::Assign, pos);
            auto rhs = make_expr(Expr::Binary, pos);
            rhs->bin_op = add ? BinOp::Add : BinOp::Sub;
            rhs->lhs = clone_expr(*e);
            rhs->rhs = parse_expr();
            s->target = std::move(e);
            s->value = std::move(rhs);
            expect_punct(";");
            return s;
        }
        if (at_punct("++") || at_punct("--")) {
            bool inc = take().text == "++";
            expect_punct(";");
            return desugar_incdec(std::move(e), inc, pos);
        }
        if (at_punct(";")) {
            take();
            if (e->kind != Expr::Call && e->kind != Expr::New)
                throw ParseError(pos, "expression statement must be a call");
            auto s = make_stmt(Stmt::ExprStmt, pos);
            s->expr = std::move(e);
            return s;
        }
        throw ParseError(cur().pos, "expected statement");
    }

    // ---- expressions ----
    ExprPtr parse_expr() { return parse_or(); }

    ExprPtr parse_or() {
        ExprPtr e = parse_and();
        while (at_punct("||")) {
            SourcePos pos = take().pos;
            auto b = make_expr(Expr::Binary, pos);
            b->bin_op = BinOp::Or;
            b->lhs = std::move(e);
            b->rhs = parse_and();
            e = std::move(b);
        }
        return e;
    }

    ExprPtr parse_and() {
        ExprPtr e = parse_equality();
        while (at_punct("&&")) {
            SourcePos pos = take().pos;
            auto b = make_expr(Expr::Binary, pos);
            b->bin_op = BinOp::And;
            b->lhs = std::move(e);
            b->rhs = parse_equality();
            e = std::move(b);
        }
        return e;
    }

    ExprPtr parse_equality() {
        ExprPtr e = parse_relational();
        while (at_punct("==") || at_punct("!=")) {
            bool eq = take().text == "==";
            auto b = make_expr(Expr::Binary, e->pos);
            b->bin_op = eq ? BinOp::Eq : BinOp::Ne;
            b->lhs = std::move(e);
            b->rhs = parse_relational();
            e = std::move(b);
        }
        return e;
    }

    ExprPtr parse_relational() {
        ExprPtr e = parse_additive();
        while (at_punct("<") || at_punct(">") || at_punct("<=") || at_punct(">=")) {
            std::string op = take().text;
            auto b = make_expr(Expr::Binary, e->pos);
            b->bin_op = op == "<" ? BinOp::Lt : op == ">" ? BinOp::Gt
                        : op == "<=" ? BinOp::Le : BinOp::Ge;
            b->lhs = std::move(e);
            b->rhs = parse_additive();
            e = std::move(b);
        }
        return e;
    }

    ExprPtr parse_additive() {
        ExprPtr e = parse_multiplicative();
        while (at_punct("+") || at_punct("-")) {
            bool add = take().text == "+";
            auto b = make_expr(Expr::Binary, e->pos);
            b->bin_op = add ? BinOp::Add : BinOp::Sub;
            b->lhs = std::move(e);
            b->rhs = parse_multiplicative();
            e = std::move(b);
        }
        return e;
    }

    ExprPtr parse_multiplicative() {
        ExprPtr e = parse_unary();
        while (at_punct("*") || at_punct("/") || at_punct("%")) {
            std::string op = take().text;
            auto b = make_expr(Expr::Binary, e->pos);
            b->bin_op = op == "*" ? BinOp::Mul : op == "/" ? BinOp::Div : BinOp::Mod;
            b->lhs = std::move(e);
            b->rhs = parse_unary();
            e = std::move(b);
        }
        return e;
    }

    ExprPtr parse_unary() {
        if (at_punct("-")) {
            SourcePos pos = take().pos;
            auto u = make_expr(Expr::Unary, pos);
            u->un_op = UnOp::Neg;
            u->operand = parse_unary();
            return u;
        }
        if (at_punct("!")) {
            SourcePos pos = take().pos;
            auto u = make_expr(Expr::Unary, pos);
            u->un_op = UnOp::Not;
            u->operand = parse_unary();
            return u;
        }
        return parse_postfix();
    }

    ExprPtr parse_postfix() {
        ExprPtr e = parse_primary();
        return parse_postfix_tail(std::move(e));
    }

    ExprPtr parse_postfix_tail(ExprPtr e) {
        while (at_punct(".")) {
            take();
            Token member = expect_ident();
            if (at_punct("(")) {
                auto call = make_expr(Expr::Call, member.pos);
                call->name = member.text;
                call->base = std::move(e);
                parse_args(call->args);
                e = std::move(call);
            } else {
                auto fa = make_expr(Expr::FieldAccess, member.pos);
                fa->name = member.text;
                fa->base = std::move(e);
                e = std::move(fa);
            }
        }
        return e;
    }

    // A path-shaped expression usable as assignment target or call statement.
    ExprPtr parse_postfix_path() {
        SourcePos pos = cur().pos;
        ExprPtr e;
        if (eat_kw("this")) {
            e = make_expr(Expr::This, pos);
        } else if (at(Token::Ident)) {
            Token name = take();
            if (at_punct("(")) {
                auto call = make_expr(Expr::Call, name.pos);
                call->name = name.text;
                parse_args(call->args);
                e = std::move(call);
            } else {
                e = make_expr(Expr::Var, name.pos);
                e->name = name.text;
            }
        } else {
            throw ParseError(pos, "expected statement");
        }
        return parse_postfix_tail(std::move(e));
    }

    ExprPtr parse_primary() {
        SourcePos pos = cur().pos;
        if (at(Token::IntLit)) {
            Token t = take();
            auto e = make_expr(Expr::IntLit, pos);
            e->int_value = BigInt(t.text);
            return e;
        }
        if (eat_kw("true")) {
            auto e = make_expr(Expr::BoolLit, pos);
            e->bool_value = true;
            return e;
        }
        if (eat_kw("false")) {
            auto e = make_expr(Expr::BoolLit, pos);
            e->bool_value = false;
            return e;
        }
        if (eat_kw("this")) return make_expr(Expr::This, pos);
        if (eat_kw("new")) {
            Token name = expect_ident();
            auto e = make_expr(Expr::New, pos);
            e->name = name.text;
            e->callee_class = type_placeholder(name.text, name.pos);
            parse_args(e->args);
            return e;
        }
        if (eat_punct("(")) {
            ExprPtr e = parse_expr();
            expect_punct(")");
            return e;
        }
        if (at(Token::Ident)) {
            Token name = take();
            if (at_punct("(")) {
                auto call = make_expr(Expr::Call, name.pos);
                call->name = name.text;
                parse_args(call->args);
                return call;
            }
            auto e = make_expr(Expr::Var, name.pos);
            e->name = name.text;
            return e;
        }
        throw ParseError(pos, "expected expression");
    }

    void parse_args(std::vector<ExprPtr>& out) {
        expect_punct("(");
        if (!at_punct(")")) {
            for (;;) {
                out.push_back(parse_expr());
                if (!eat_punct(",")) break;
            }
        }
        expect_punct(")");
    }

    // ---- post-parse synthesis ----
    void synthesize_init() {
        patch_types();
        // static initializers: C.f = init;
        for (size_t ci = 0; ci < prog_->classes.size(); ci++) {
            auto& cls = prog_->classes[ci];
            for (auto& f : cls.static_fields) {
                auto assign = make_stmt(Stmt::Assign, f.pos);
                auto base = make_expr(Expr::Var, f.pos);
                base->name = cls.name;
                auto target = make_expr(Expr::FieldAccess, f.pos);
                target->name = f.name;
                target->base = std::move(base);
                assign->target = std::move(target);
                assign->value = clone_expr(*f.init);
                prog_->static_init.push_back(std::move(assign));
                prog_->static_init_class.push_back(static_cast<int>(ci));
            }
            // instance field initializers: this.f = init;
            for (auto& f : cls.instance_fields) {
                auto assign = make_stmt(Stmt::Assign, f.pos);
                auto target = make_expr(Expr::FieldAccess, f.pos);
                target->name = f.name;
                target->base = make_expr(Expr::This, f.pos);
                assign->target = std::move(target);
                assign->value = clone_expr(*f.init);
                cls.field_init.push_back(std::move(assign));
            }
        }
    }

    void number_ids() {
        std::function<void(Expr&)> num_e;
        std::function<void(Stmt&)> num_s;
        num_e = [&](Expr& e) {
            e.id = static_cast<int>(prog_->expr_by_id.size());
            prog_->expr_by_id.push_back(&e);
            if (e.base) num_e(*e.base);
            if (e.lhs) num_e(*e.lhs);
            if (e.rhs) num_e(*e.rhs);
            if (e.operand) num_e(*e.operand);
            for (auto& a : e.args) num_e(*a);
        };
        num_s = [&](Stmt& s) {
            s.id = static_cast<int>(prog_->stmt_by_id.size());
            prog_->stmt_by_id.push_back(&s);
            for (auto& c : s.body) num_s(*c);
            for (ExprPtr* e : {&s.init, &s.target, &s.value, &s.cond, &s.ret, &s.expr})
                if (*e) num_e(**e);
            for (StmtPtr* c : {&s.then_branch, &s.else_branch, &s.loop_body})
                if (*c) num_s(**c);
        };
        for (auto& cls : prog_->classes) {
            for (auto& f : cls.static_fields) num_e(*f.init);
            for (auto& f : cls.instance_fields) num_e(*f.init);
            for (auto& m : cls.methods) num_s(*m.body);
            for (auto& s : cls.field_init) num_s(*s);
        }
        for (auto& s : prog_->static_init) num_s(*s);
    }

    // ---- name/type resolution ----
    class Resolver {
    public:
        explicit Resolver(Program& p) : p_(p) {}

        void run() {
            find_main();
            for (size_t ci = 0; ci < p_.classes.size(); ci++) {
                ClassDecl& cls = p_.classes[ci];
                for (auto& m : cls.methods) resolve_method(static_cast<int>(ci), m);
                for (auto& s : cls.field_init) {
                    Ctx ctx{static_cast<int>(ci), false, nullptr, {}};
                    resolve_stmt(*s, ctx);
                }
            }
            for (size_t i = 0; i < p_.static_init.size(); i++) {
                Ctx ctx{p_.static_init_class[i], true, nullptr, {}};
                resolve_stmt(*p_.static_init[i], ctx);
            }
        }

    private:
        Program& p_;

        struct Ctx {
            int class_index;
            bool is_static;
            const MethodDecl* method;  // for return type; null in initializers
            std::vector<std::map<std::string, Type>> scopes;

            const Type* lookup_local(const std::string& n) const {
                for (auto it = scopes.rbegin(); it != scopes.rend(); ++it) {
                    auto f = it->find(n);
                    if (f != it->end()) return &f->second;
                }
                return nullptr;
            }
        };

        void find_main() {
            for (size_t ci = 0; ci < p_.classes.size(); ci++) {
                auto& cls = p_.classes[ci];
                for (size_t mi = 0; mi < cls.methods.size(); mi++) {
                    auto& m = cls.methods[mi];
                    if (m.is_ctor || m.name != "main") continue;
                    if (p_.main_class >= 0) throw ParseError(m.pos, "duplicate main method");
                    if (!m.is_static || m.return_type.kind != Type::Void)
                        throw ParseError(m.pos, "main must be static void");
                    for (const auto& prm : m.params)
                        if (!prm.type.is_scalar())
                            throw ParseError(prm.pos, "main inputs must be int or boolean");
                    p_.main_class = static_cast<int>(ci);
                    p_.main_method = static_cast<int>(mi);
                }
            }
            if (p_.main_class < 0) throw ParseError({1, 1}, "no main method");
        }

        int find_field(const std::vector<FieldDecl>& v, const std::string& n) const {
            for (size_t i = 0; i < v.size(); i++)
                if (v[i].name == n) return static_cast<int>(i);
            return -1;
        }

        bool names_member(const Ctx& ctx, const std::string& n) const {
            if (ctx.class_index < 0) return false;
            const ClassDecl& cls = p_.classes[ctx.class_index];
            return find_field(cls.static_fields, n) >= 0 ||
                   find_field(cls.instance_fields, n) >= 0;
        }

        void resolve_method(int ci, MethodDecl& m) {
            Ctx ctx{ci, m.is_static, &m, {}};
            ctx.scopes.emplace_back();
            for (const auto& prm : m.params) ctx.scopes.back()[prm.name] = prm.type;
            resolve_stmt(*m.body, ctx);
        }

        void resolve_stmt(Stmt& s, Ctx& ctx) {
            switch (s.kind) {
            case Stmt::Block: {
                ctx.scopes.emplace_back();
                for (auto& c : s.body) resolve_stmt(*c, ctx);
                ctx.scopes.pop_back();
                return;
            }
            case Stmt::Declare: {
                resolve_expr(*s.init, ctx);
                if (!(s.init->type == s.decl_type))
                    throw ParseError(s.pos, "initializer type mismatch for '" + s.name + "'");
                if (ctx.lookup_local(s.name))
                    throw ParseError(s.pos, "redeclaration of '" + s.name + "'");
                ctx.scopes.back()[s.name] = s.decl_type;
                return;
            }
            case Stmt::Assign: {
                resolve_expr(*s.target, ctx);
                if (s.target->kind != Expr::Var && s.target->kind != Expr::FieldAccess)
                    throw ParseError(s.pos, "assignment target must be a variable or field");
                resolve_expr(*s.value, ctx);
                if (!(s.value->type == s.target->type))
                    throw ParseError(s.pos, "assignment type mismatch");
                return;
            }
            case Stmt::If: {
                resolve_expr(*s.cond, ctx);
                require(s.cond->type.kind == Type::Bool, s.pos, "condition must be boolean");
                resolve_stmt(*s.then_branch, ctx);
                if (s.else_branch) resolve_stmt(*s.else_branch, ctx);
                return;
            }
            case Stmt::While: {
                resolve_expr(*s.cond, ctx);
                require(s.cond->type.kind == Type::Bool, s.pos, "condition must be boolean");
                resolve_stmt(*s.loop_body, ctx);
                return;
            }
            case Stmt::Break:
            case Stmt::Continue:
                return;
            case Stmt::Return: {
                const Type want = ctx.method ? ctx.method->return_type : Type{Type::Void, -1};
                if (s.ret) {
                    if (ctx.method && ctx.method->is_ctor)
                        throw ParseError(s.pos, "constructor cannot return a value");
                    resolve_expr(*s.ret, ctx);
                    require(s.ret->type == want, s.pos, "return type mismatch");
                } else {
                    require(want.kind == Type::Void, s.pos, "missing return value");
                }
                return;
            }
            case Stmt::ExprStmt:
                resolve_expr(*s.expr, ctx);
                return;
            case Stmt::Println:
                resolve_expr(*s.expr, ctx);
                require(s.expr->type.is_scalar(), s.pos, "println argument must be int or boolean");
                return;
            }
        }

        void require(bool ok, SourcePos pos, const char* msg) {
            if (!ok) throw ParseError(pos, msg);
        }

        // Rewrites ClassName.member chains, resolves identifiers, types.
        void resolve_expr(Expr& e, Ctx& ctx) {
            switch (e.kind) {
            case Expr::IntLit: e.type = {Type::Int, -1}; return;
            case Expr::BoolLit: e.type = {Type::Bool, -1}; return;
            case Expr::This: {
                if (ctx.is_static || ctx.class_index < 0)
                    throw ParseError(e.pos, "'this' in a static context");
                e.type = {Type::Object, ctx.class_index};
                return;
            }
            case Expr::Var: {
                if (const Type* t = ctx.lookup_local(e.name)) {
                    e.var.kind = VarRef::Local;
                    e.type = *t;
                    return;
                }
                if (ctx.class_index >= 0) {
                    ClassDecl& cls = p_.classes[ctx.class_index];
                    int fi = find_field(cls.static_fields, e.name);
                    if (fi >= 0) {
                        e.var = {VarRef::StaticField, ctx.class_index, fi};
                        e.type = cls.static_fields[fi].type;
                        return;
                    }
                    fi = find_field(cls.instance_fields, e.name);
                    if (fi >= 0) {
                        if (ctx.is_static)
                            throw ParseError(e.pos, "instance field '" + e.name +
                                                        "' in a static context");
                        e.var = {VarRef::ThisField, ctx.class_index, fi};
                        e.type = cls.instance_fields[fi].type;
                        return;
                    }
                }
                throw ParseError(e.pos, "unresolved name '" + e.name + "'");
            }
            case Expr::FieldAccess: {
                // ClassName.staticField ?  (locals and own fields shadow class names)
                if (e.base->kind == Expr::Var && !ctx.lookup_local(e.base->name) &&
                    !names_member(ctx, e.base->name)) {
                    int ci = p_.class_index(e.base->name);
                    if (ci >= 0) {
                        int fi = find_field(p_.classes[ci].static_fields, e.name);
                        if (fi < 0)
                            throw ParseError(e.pos, "no static field '" + e.name + "' in class '" +
                                                        e.base->name + "'");
                        e.var = {VarRef::StaticField, ci, fi};
                        e.type = p_.classes[ci].static_fields[fi].type;
                        e.kind = Expr::Var;
                        e.name = p_.classes[ci].name + "." + e.name;
                        e.base.reset();
                        return;
                    }
                }
                resolve_expr(*e.base, ctx);
                require(e.base->type.kind == Type::Object, e.pos, "field access on non-object");
                ClassDecl& cls = p_.classes[e.base->type.class_index];
                int fi = find_field(cls.instance_fields, e.name);
                if (fi < 0)
                    throw ParseError(e.pos,
                                     "no field '" + e.name + "' in class '" + cls.name + "'");
                e.field_index = fi;
                e.type = cls.instance_fields[fi].type;
                return;
            }
            case Expr::Unary: {
                resolve_expr(*e.operand, ctx);
                if (e.un_op == UnOp::Neg)
                    require(e.operand->type.kind == Type::Int, e.pos, "operand must be int");
                else
                    require(e.operand->type.kind == Type::Bool, e.pos, "operand must be boolean");
                e.type = e.operand->type;
                return;
            }
            case Expr::Binary: {
                resolve_expr(*e.lhs, ctx);
                resolve_expr(*e.rhs, ctx);
                auto both = [&](Type::Kind k) {
                    return e.lhs->type.kind == k && e.rhs->type.kind == k;
                };
                switch (e.bin_op) {
                case BinOp::Add: case BinOp::Sub: case BinOp::Mul:
                case BinOp::Div: case BinOp::Mod:
                    require(both(Type::Int), e.pos, "arithmetic needs int operands");
                    e.type = {Type::Int, -1};
                    return;
                case BinOp::Lt: case BinOp::Gt: case BinOp::Le: case BinOp::Ge:
                    require(both(Type::Int), e.pos, "comparison needs int operands");
                    e.type = {Type::Bool, -1};
                    return;
                case BinOp::Eq: case BinOp::Ne:
                    require(both(Type::Int) || both(Type::Bool), e.pos,
                            "equality needs two ints or two booleans");
                    e.type = {Type::Bool, -1};
                    return;
                case BinOp::And: case BinOp::Or:
                    require(both(Type::Bool), e.pos, "logical operator needs boolean operands");
                    e.type = {Type::Bool, -1};
                    return;
                }
                return;
            }
            case Expr::Call: {
                int ci;
                bool static_call = false;
                if (!e.base) {
                    require(ctx.class_index >= 0, e.pos, "call outside of a class");
                    ci = ctx.class_index;
                } else if (e.base->kind == Expr::Var && !ctx.lookup_local(e.base->name) &&
                           !names_member(ctx, e.base->name) &&
                           p_.class_index(e.base->name) >= 0) {
                    ci = p_.class_index(e.base->name);
                    static_call = true;
                    e.base.reset();
                } else {
                    resolve_expr(*e.base, ctx);
                    require(e.base->type.kind == Type::Object, e.pos, "call on non-object");
                    ci = e.base->type.class_index;
                }
                ClassDecl& cls = p_.classes[ci];
                int mi = -1;
                for (size_t i = 0; i < cls.methods.size(); i++)
                    if (!cls.methods[i].is_ctor && cls.methods[i].name == e.name)
                        mi = static_cast<int>(i);
                if (mi < 0)
                    throw ParseError(e.pos,
                                     "no method '" + e.name + "' in class '" + cls.name + "'");
                MethodDecl& m = cls.methods[mi];
                if (static_call && !m.is_static)
                    throw ParseError(e.pos, "instance method '" + e.name + "' needs a receiver");
                if (static_call) e.name = cls.name + "." + e.name;  // keeps printing qualified
                if (!e.base && !m.is_static) {
                    if (ctx.is_static)
                        throw ParseError(e.pos, "instance method '" + e.name +
                                                    "' called from a static context");
                    auto self = make_expr(Expr::This, e.pos);
                    self->type = {Type::Object, ctx.class_index};
                    e.base = std::move(self);
                }
                if (e.base && m.is_static)
                    throw ParseError(e.pos, "static method '" + e.name + "' called on an object");
                check_args(e, m, ctx);
                e.callee_class = ci;
                e.callee_method = mi;
                e.type = m.return_type;
                return;
            }
            case Expr::New: {
                int ci = e.callee_class;  // patched earlier
                ClassDecl& cls = p_.classes[ci];
                if (cls.ctor_index >= 0) {
                    check_args(e, cls.methods[cls.ctor_index], ctx);
                } else if (!e.args.empty()) {
                    throw ParseError(e.pos, "class '" + cls.name + "' has no constructor");
                }
                e.type = {Type::Object, ci};
                return;
            }
            }
        }

        void check_args(Expr& e, MethodDecl& m, Ctx& ctx) {
            if (e.args.size() != m.params.size())
                throw ParseError(e.pos, "wrong number of arguments to '" + m.name + "'");
            for (size_t i = 0; i < e.args.size(); i++) {
                resolve_expr(*e.args[i], ctx);
                if (!(e.args[i]->type == m.params[i].type))
                    throw ParseError(e.args[i]->pos, "argument type mismatch");
            }
        }
    };

    // Methods, constructors and initializers must not form call cycles.
    void check_no_recursion() {
        // node = class_index * 1000 + method_index; ctor body includes field_init
        auto node_id = [](int ci, int mi) { return ci * 1000 + mi; };
        std::map<int, std::vector<int>> edges;
        std::function<void(const Expr&, int)> scan_e;
        std::function<void(const Stmt&, int)> scan_s;
        scan_e = [&](const Expr& e, int from) {
            if (e.kind == Expr::Call) edges[from].push_back(node_id(e.callee_class, e.callee_method));
            if (e.kind == Expr::New) {
                const ClassDecl& cls = prog_->classes[e.callee_class];
                int mi = cls.ctor_index >= 0 ? cls.ctor_index : 999;
                edges[from].push_back(node_id(e.callee_class, mi));
            }
            if (e.base) scan_e(*e.base, from);
            if (e.lhs) scan_e(*e.lhs, from);
            if (e.rhs) scan_e(*e.rhs, from);
            if (e.operand) scan_e(*e.operand, from);
            for (const auto& a : e.args) scan_e(*a, from);
        };
        scan_s = [&](const Stmt& s, int from) {
            for (const auto& c : s.body) scan_s(*c, from);
            for (const Expr* e : {s.init.get(), s.target.get(), s.value.get(), s.cond.get(),
                                  s.ret.get(), s.expr.get()})
                if (e) scan_e(*e, from);
            for (const Stmt* c : {s.then_branch.get(), s.else_branch.get(), s.loop_body.get()})
                if (c) scan_s(*c, from);
        };
        for (size_t ci = 0; ci < prog_->classes.size(); ci++) {
            const ClassDecl& cls = prog_->classes[ci];
            for (size_t mi = 0; mi < cls.methods.size(); mi++) {
                int from = node_id(static_cast<int>(ci), static_cast<int>(mi));
                scan_s(*cls.methods[mi].body, from);
                if (cls.methods[mi].is_ctor)
                    for (const auto& s : cls.field_init) scan_s(*s, from);
            }
            // implicit constructor node
            int from = node_id(static_cast<int>(ci), cls.ctor_index >= 0 ? cls.ctor_index : 999);
            for (const auto& s : cls.field_init) scan_s(*s, from);
        }
        // DFS cycle detection
        std::map<int, int> state;  // 0 unvisited, 1 on stack, 2 done
        std::function<bool(int)> dfs = [&](int n) {
            state[n] = 1;
            for (int m : edges[n]) {
                if (state[m] == 1) return true;
                if (state[m] == 0 && dfs(m)) return true;
            }
            state[n] = 2;
            return false;
        };
        for (const auto& [n, _] : edges) {
            if (state[n] == 0 && dfs(n))
                throw ParseError({1, 1}, "recursive calls are not supported");
        }
    }
};

}  // namespace

int Program::class_index(const std::string& name) const {
    for (size_t i = 0; i < classes.size(); i++)
        if (classes[i].name == name) return static_cast<int>(i);
    return -1;
}

ExprPtr clone_expr(const Expr& e) {
    auto c = std::make_unique<Expr>();
    c->kind = e.kind;
    c->pos = e.pos;
    c->type = e.type;
    c->int_value = e.int_value;
    c->bool_value = e.bool_value;
    c->name = e.name;
    c->var = e.var;
    c->field_index = e.field_index;
    c->un_op = e.un_op;
    c->bin_op = e.bin_op;
    c->callee_class = e.callee_class;
    c->callee_method = e.callee_method;
    if (e.base) c->base = clone_expr(*e.base);
    if (e.lhs) c->lhs = clone_expr(*e.lhs);
    if (e.rhs) c->rhs = clone_expr(*e.rhs);
    if (e.operand) c->operand = clone_expr(*e.operand);
    for (const auto& a : e.args) c->args.push_back(clone_expr(*a));
    return c;
}

std::unique_ptr<Program> parse(const std::string& source) {
    return Parser(source).run();
}

}  // namespace nicert
