#include "nicert/lexer.hpp"

#include <cctype>
#include <unordered_set>

namespace nicert {

namespace {

const std::unordered_set<std::string> kKeywords = {
    "class", "public", "private", "protected", "static", "int", "boolean",
    "void", "if", "else", "while", "break", "continue", "return", "new",
    "true", "false", "println", "this",
};

struct Cursor {
    const std::string& s;
    size_t i = 0;
    int line = 1, col = 1;

    bool eof() const { return i >= s.size(); }
    char peek(size_t off = 0) const { return i + off < s.size() ? s[i + off] : '\0'; }
    char advance() {
        char c = s[i++];
        if (c == '\n') { line++; col = 1; } else { col++; }
        return c;
    }
    SourcePos pos() const { return {line, col}; }
};

}  // namespace

std::vector<Token> lex(const std::string& source) {
    Cursor c{source};
    std::vector<Token> out;

    auto push = [&](Token::Kind k, std::string text, SourcePos p) {
        out.push_back({k, std::move(text), p});
    };

    while (!c.eof()) {
        char ch = c.peek();
        if (std::isspace(static_cast<unsigned char>(ch))) {
            c.advance();
            continue;
        }
        SourcePos p = c.pos();

        // comments and annotations
        if (ch == '/' && c.peek(1) == '/') {
            c.advance(); c.advance();
            bool annot = c.peek() == '@';
            if (annot) c.advance();
            std::string body;
            while (!c.eof() && c.peek() != '\n') body += c.advance();
            if (annot) push(Token::Annotation, body, p);
            continue;
        }
        if (ch == '/' && c.peek(1) == '*') {
            c.advance(); c.advance();
            bool annot = c.peek() == '@';
            if (annot) c.advance();
            std::string body;
            while (!c.eof() && !(c.peek() == '*' && c.peek(1) == '/')) body += c.advance();
            if (c.eof()) throw ParseError(p, "unterminated comment");
            c.advance(); c.advance();
            if (annot) {
                // strip a trailing '@' from the  @*/  closer
                if (!body.empty() && body.back() == '@') body.pop_back();
                push(Token::Annotation, body, p);
            }
            continue;
        }

        if (std::isdigit(static_cast<unsigned char>(ch))) {
            std::string t;
            while (!c.eof() && std::isdigit(static_cast<unsigned char>(c.peek()))) t += c.advance();
            if (std::isalpha(static_cast<unsigned char>(c.peek())) || c.peek() == '_')
                throw ParseError(c.pos(), "malformed number");
            push(Token::IntLit, t, p);
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
            std::string t;
            while (!c.eof() &&
                   (std::isalnum(static_cast<unsigned char>(c.peek())) || c.peek() == '_'))
                t += c.advance();
            push(kKeywords.count(t) ? Token::Keyword : Token::Ident, t, p);
            continue;
        }

        // punctuation, longest match first
        static const char* two[] = {"==", "!=", "<=", ">=", "&&", "||", "++", "--", "+=", "-="};
        std::string pair{ch, c.peek(1)};
        bool matched = false;
        for (const char* tw : two) {
            if (pair == tw) {
                c.advance(); c.advance();
                push(Token::Punct, pair, p);
                matched = true;
                break;
            }
        }
        if (matched) continue;

        static const std::string singles = "{}();,.=<>+-*/%!";
        if (singles.find(ch) != std::string::npos) {
            c.advance();
            push(Token::Punct, std::string(1, ch), p);
            continue;
        }
        throw ParseError(p, std::string("unexpected character '") + ch + "'");
    }
    out.push_back({Token::Eof, "", c.pos()});
    return out;
}

}  // namespace nicert
