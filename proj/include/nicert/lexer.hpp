#pragma once

#include <string>
#include <vector>

#include "nicert/diagnostics.hpp"

namespace nicert {

struct Token {
    enum Kind {
        Ident,
        IntLit,
        Keyword,
        Punct,
        Annotation,  // body of a //@ or /*@ @*/ comment
        Eof
    };
    Kind kind;
    std::string text;
    SourcePos pos;
};

// Tokenizes source text. Plain comments are dropped; annotation comments
// are kept as Annotation tokens carrying their body.
std::vector<Token> lex(const std::string& source);

}  // namespace nicert
