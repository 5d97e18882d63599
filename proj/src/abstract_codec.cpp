#include <cctype>
#include <cstring>
#include <sstream>

#include "nicert/abstract.hpp"

// Compact single-line state encoding. No token contains whitespace, so
// certificate lines stay trivially splittable.

namespace nicert {

namespace {

void put_label(std::ostringstream& os, Label l) { os << code(l); }
void put_stored(std::ostringstream& os, StoredLabel sl) { os << code(sl); }

void put_value(std::ostringstream& os, const AbsValue& v) {
    switch (v.kind) {
    case AbsValue::Scalar:
        os << "s";
        put_label(os, v.label);
        return;
    case AbsValue::Void:
        os << "void";
        return;
    case AbsValue::Object:
        os << "o";
        put_label(os, v.label);
        os << ":" << v.class_index << ":(";
        for (size_t i = 0; i < v.field_locs.size(); i++) {
            if (i) os << ".";
            os << v.field_locs[i];
        }
        os << ")";
        return;
    }
}

void put_env(std::ostringstream& os, const Env& env) {
    os << "[";
    for (size_t si = 0; si < env.scopes.size(); si++) {
        if (si) os << "|";
        os << "{";
        for (size_t bi = 0; bi < env.scopes[si].size(); bi++) {
            if (bi) os << ",";
            os << env.scopes[si][bi].first << "=" << env.scopes[si][bi].second;
        }
        os << "}";
    }
    os << "]";
}

void put_cont(std::ostringstream& os, const ACont& k);

void put_item(std::ostringstream& os, const AKItem& it) {
    switch (it.op) {
    case AKItem::Stmt: os << "st:" << it.node; return;
    case AKItem::Expr: os << "ex:" << it.node; return;
    case AKItem::Val:
        os << "v:";
        put_value(os, it.value);
        return;
    case AKItem::BinRhs: os << "b1:" << it.node; return;
    case AKItem::BinApply:
        os << "b2:" << it.node << ":";
        put_value(os, it.value);
        return;
    case AKItem::UnApply: os << "un:" << it.node; return;
    case AKItem::Branch: os << "br:" << it.node << ":" << (it.flag ? 1 : 0); return;
    case AKItem::WhileCont: os << "wc:" << it.node; return;
    case AKItem::AssignTo:
        os << "at:" << it.node << ":" << it.loc << ":";
        put_label(os, it.ctx);
        return;
    case AKItem::FieldAddr: os << "fa:" << it.node; return;
    case AKItem::FieldGet: os << "fg:" << it.node; return;
    case AKItem::Args: {
        os << "ar:" << it.node << ":" << (it.flag ? 1 : 0) << ":" << it.next_arg << ":(";
        for (size_t i = 0; i < it.collected.size(); i++) {
            if (i) os << ",";
            put_value(os, it.collected[i]);
        }
        os << ")";
        return;
    }
    case AKItem::Declare: os << "de:" << it.node; return;
    case AKItem::Discard: os << "ds"; return;
    case AKItem::Print: os << "pr:" << it.node; return;
    case AKItem::Return: os << "rt:" << it.node; return;
    case AKItem::PopLstack: os << "pl"; return;
    case AKItem::BlockExit: os << "bx"; return;
    case AKItem::Restore:
        os << "rs:";
        put_label(os, it.ctx);
        return;
    }
}

void put_cont(std::ostringstream& os, const ACont& k) {
    os << "[";
    for (size_t i = 0; i < k.size(); i++) {
        if (i) os << ";";
        put_item(os, k[i]);
    }
    os << "]";
}

void put_lstack(std::ostringstream& os, const std::vector<ALoopFrame>& ls) {
    os << "[";
    for (size_t i = 0; i < ls.size(); i++) {
        if (i) os << ";";
        os << "(";
        put_cont(os, ls[i].continue_k);
        os << ",";
        put_cont(os, ls[i].break_k);
        os << "," << ls[i].env_depth << ")";
    }
    os << "]";
}

void put_fstack(std::ostringstream& os, const std::vector<ACallFrame>& fs) {
    os << "[";
    for (size_t i = 0; i < fs.size(); i++) {
        if (i) os << ";";
        os << "(";
        put_env(os, fs[i].saved_env);
        os << ",";
        put_cont(os, fs[i].saved_k);
        os << ",";
        put_lstack(os, fs[i].saved_lstack);
        os << ",";
        put_label(os, fs[i].saved_cl);
        os << "," << (fs[i].deliver_value ? 1 : 0) << ")";
    }
    os << "]";
}

// ---- parsing ----

struct Cur {
    const std::string& s;
    size_t i = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        throw RuntimeFault("malformed state at offset " + std::to_string(i) + ": " + msg);
    }
    char peek() const { return i < s.size() ? s[i] : '\0'; }
    bool eat(char c) {
        if (peek() != c) return false;
        i++;
        return true;
    }
    void expect(char c) {
        if (!eat(c)) fail(std::string("expected '") + c + "'");
    }
    bool eat_str(const char* t) {
        size_t n = strlen(t);
        if (s.compare(i, n, t) != 0) return false;
        i += n;
        return true;
    }
    void expect_str(const char* t) {
        if (!eat_str(t)) fail(std::string("expected '") + t + "'");
    }
    long parse_int() {
        bool neg = eat('-');
        if (!isdigit(static_cast<unsigned char>(peek()))) fail("expected number");
        long v = 0;
        while (isdigit(static_cast<unsigned char>(peek()))) v = v * 10 + (s[i++] - '0');
        return neg ? -v : v;
    }
    std::string parse_name() {
        std::string out;
        while (isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '.')
            out += s[i++];
        if (out.empty()) fail("expected name");
        return out;
    }
    Label parse_label() {
        if (eat('H')) return Label::High;
        expect('L');
        return Label::Low;
    }
    StoredLabel parse_stored() {
        if (eat('H')) return eat('L') ? StoredLabel::HighToLow : StoredLabel::High;
        expect('L');
        return eat('H') ? StoredLabel::LowToHigh : StoredLabel::Low;
    }
};

AbsValue parse_value(Cur& c) {
    if (c.eat_str("void")) return AbsValue::void_value();
    if (c.eat('s')) return AbsValue::scalar(c.parse_label());
    c.expect('o');
    Label l = c.parse_label();
    c.expect(':');
    int ci = static_cast<int>(c.parse_int());
    c.expect(':');
    c.expect('(');
    std::vector<Loc> locs;
    if (!c.eat(')')) {
        for (;;) {
            locs.push_back(static_cast<Loc>(c.parse_int()));
            if (c.eat(')')) break;
            c.expect('.');
        }
    }
    return AbsValue::object(l, ci, std::move(locs));
}

Env parse_env(Cur& c) {
    Env env;
    c.expect('[');
    if (c.eat(']')) return env;
    for (;;) {
        c.expect('{');
        env.scopes.emplace_back();
        if (!c.eat('}')) {
            for (;;) {
                std::string name = c.parse_name();
                c.expect('=');
                Loc loc = static_cast<Loc>(c.parse_int());
                env.scopes.back().push_back({name, loc});
                if (c.eat('}')) break;
                c.expect(',');
            }
        }
        if (c.eat(']')) break;
        c.expect('|');
    }
    return env;
}

ACont parse_cont(Cur& c);

AKItem parse_item(Cur& c) {
    AKItem it{};
    it.op = AKItem::Discard;
    if (c.eat_str("st:")) { it.op = AKItem::Stmt; it.node = (int)c.parse_int(); return it; }
    if (c.eat_str("ex:")) { it.op = AKItem::Expr; it.node = (int)c.parse_int(); return it; }
    if (c.eat_str("v:")) { it.op = AKItem::Val; it.value = parse_value(c); return it; }
    if (c.eat_str("b1:")) { it.op = AKItem::BinRhs; it.node = (int)c.parse_int(); return it; }
    if (c.eat_str("b2:")) {
        it.op = AKItem::BinApply;
        it.node = (int)c.parse_int();
        c.expect(':');
        it.value = parse_value(c);
        return it;
    }
    if (c.eat_str("un:")) { it.op = AKItem::UnApply; it.node = (int)c.parse_int(); return it; }
    if (c.eat_str("br:")) {
        it.op = AKItem::Branch;
        it.node = (int)c.parse_int();
        c.expect(':');
        it.flag = c.parse_int() != 0;
        return it;
    }
    if (c.eat_str("wc:")) { it.op = AKItem::WhileCont; it.node = (int)c.parse_int(); return it; }
    if (c.eat_str("at:")) {
        it.op = AKItem::AssignTo;
        it.node = (int)c.parse_int();
        c.expect(':');
        it.loc = static_cast<Loc>(c.parse_int());
        c.expect(':');
        it.ctx = c.parse_label();
        return it;
    }
    if (c.eat_str("fa:")) { it.op = AKItem::FieldAddr; it.node = (int)c.parse_int(); return it; }
    if (c.eat_str("fg:")) { it.op = AKItem::FieldGet; it.node = (int)c.parse_int(); return it; }
    if (c.eat_str("ar:")) {
        it.op = AKItem::Args;
        it.node = (int)c.parse_int();
        c.expect(':');
        it.flag = c.parse_int() != 0;
        c.expect(':');
        it.next_arg = (int)c.parse_int();
        c.expect(':');
        c.expect('(');
        if (!c.eat(')')) {
            for (;;) {
                it.collected.push_back(parse_value(c));
                if (c.eat(')')) break;
                c.expect(',');
            }
        }
        return it;
    }
    if (c.eat_str("de:")) { it.op = AKItem::Declare; it.node = (int)c.parse_int(); return it; }
    if (c.eat_str("ds")) { it.op = AKItem::Discard; return it; }
    if (c.eat_str("pr:")) { it.op = AKItem::Print; it.node = (int)c.parse_int(); return it; }
    if (c.eat_str("rt:")) { it.op = AKItem::Return; it.node = (int)c.parse_int(); return it; }
    if (c.eat_str("pl")) { it.op = AKItem::PopLstack; return it; }
    if (c.eat_str("bx")) { it.op = AKItem::BlockExit; return it; }
    if (c.eat_str("rs:")) { it.op = AKItem::Restore; it.ctx = c.parse_label(); return it; }
    c.fail("unknown continuation item");
}

ACont parse_cont(Cur& c) {
    ACont k;
    c.expect('[');
    if (c.eat(']')) return k;
    for (;;) {
        k.push_back(parse_item(c));
        if (c.eat(']')) break;
        c.expect(';');
    }
    return k;
}

std::vector<ALoopFrame> parse_lstack(Cur& c) {
    std::vector<ALoopFrame> ls;
    c.expect('[');
    if (c.eat(']')) return ls;
    for (;;) {
        c.expect('(');
        ALoopFrame f;
        f.continue_k = parse_cont(c);
        c.expect(',');
        f.break_k = parse_cont(c);
        c.expect(',');
        f.env_depth = static_cast<size_t>(c.parse_int());
        c.expect(')');
        ls.push_back(std::move(f));
        if (c.eat(']')) break;
        c.expect(';');
    }
    return ls;
}

std::vector<ACallFrame> parse_fstack(Cur& c) {
    std::vector<ACallFrame> fs;
    c.expect('[');
    if (c.eat(']')) return fs;
    for (;;) {
        c.expect('(');
        ACallFrame f;
        f.saved_env = parse_env(c);
        c.expect(',');
        f.saved_k = parse_cont(c);
        c.expect(',');
        f.saved_lstack = parse_lstack(c);
        c.expect(',');
        f.saved_cl = c.parse_label();
        c.expect(',');
        f.deliver_value = c.parse_int() != 0;
        c.expect(')');
        fs.push_back(std::move(f));
        if (c.eat(']')) break;
        c.expect(';');
    }
    return fs;
}

}  // namespace

std::string serialize_config(const AbsConfig& cfg) {
    std::ostringstream os;
    os << "cl=";
    put_label(os, cfg.cl);
    os << ";env=";
    put_env(os, cfg.env);
    os << ";k=";
    put_cont(os, cfg.k);
    os << ";ls=";
    put_lstack(os, cfg.lstack);
    os << ";fs=";
    put_fstack(os, cfg.fstack);
    os << ";st={";
    bool first = true;
    for (const auto& [loc, cell] : cfg.store) {
        if (!first) os << ",";
        first = false;
        os << loc << "=";
        switch (cell.kind) {
        case AbsCell::Uninit: os << "u"; break;
        case AbsCell::Scalar: put_stored(os, cell.sl); break;
        case AbsCell::Object:
            os << "o";
            put_stored(os, cell.sl);
            os << ":" << cell.class_index << ":(";
            for (size_t i = 0; i < cell.field_locs.size(); i++) {
                if (i) os << ".";
                os << cell.field_locs[i];
            }
            os << ")";
            break;
        }
    }
    os << "}";
    return os.str();
}

AbsConfig parse_config(const std::string& text, const Program& program) {
    Cur c{text, 0};
    AbsConfig cfg;
    cfg.program = &program;
    c.expect_str("cl=");
    cfg.cl = c.parse_label();
    c.expect_str(";env=");
    cfg.env = parse_env(c);
    c.expect_str(";k=");
    cfg.k = parse_cont(c);
    c.expect_str(";ls=");
    cfg.lstack = parse_lstack(c);
    c.expect_str(";fs=");
    cfg.fstack = parse_fstack(c);
    c.expect_str(";st={");
    if (!c.eat('}')) {
        for (;;) {
            Loc loc = static_cast<Loc>(c.parse_int());
            c.expect('=');
            AbsCell cell;
            if (c.eat('u')) {
                cell.kind = AbsCell::Uninit;
            } else if (c.eat('o')) {
                cell.kind = AbsCell::Object;
                cell.sl = c.parse_stored();
                c.expect(':');
                cell.class_index = (int)c.parse_int();
                c.expect(':');
                c.expect('(');
                if (!c.eat(')')) {
                    for (;;) {
                        cell.field_locs.push_back(static_cast<Loc>(c.parse_int()));
                        if (c.eat(')')) break;
                        c.expect('.');
                    }
                }
            } else {
                cell.kind = AbsCell::Scalar;
                cell.sl = c.parse_stored();
            }
            cfg.store[loc] = std::move(cell);
            if (c.eat('}')) break;
            c.expect(',');
        }
    }
    if (c.i != text.size()) c.fail("trailing characters");
    cfg.next_loc = cfg.store.empty() ? 0 : cfg.store.rbegin()->first + 1;

    // structural sanity: node ids must be in range
    auto check_node = [&](int node, bool allow_neg) {
        if (node < 0) {
            if (!allow_neg) throw RuntimeFault("malformed state: bad node id");
            return;
        }
    };
    auto check_cont = [&](const ACont& k) {
        for (const auto& it : k) {
            switch (it.op) {
            case AKItem::Stmt:
            case AKItem::Declare:
            case AKItem::Print:
            case AKItem::Return:
            case AKItem::FieldAddr:
            case AKItem::Branch:
            case AKItem::WhileCont:
            case AKItem::AssignTo:
                if (it.node < 0 || it.node >= (int)program.stmt_by_id.size())
                    throw RuntimeFault("malformed state: statement id out of range");
                break;
            case AKItem::Expr:
            case AKItem::BinRhs:
            case AKItem::BinApply:
            case AKItem::UnApply:
            case AKItem::FieldGet:
            case AKItem::Args:
                if (it.node < 0 || it.node >= (int)program.expr_by_id.size())
                    throw RuntimeFault("malformed state: expression id out of range");
                break;
            default:
                check_node(it.node, true);
                break;
            }
        }
    };
    check_cont(cfg.k);
    for (const auto& f : cfg.lstack) {
        check_cont(f.continue_k);
        check_cont(f.break_k);
    }
    for (const auto& f : cfg.fstack) {
        check_cont(f.saved_k);
        for (const auto& lf : f.saved_lstack) {
            check_cont(lf.continue_k);
            check_cont(lf.break_k);
        }
    }
    return cfg;
}

}  // namespace nicert
