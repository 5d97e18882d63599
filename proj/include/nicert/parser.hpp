#pragma once

#include <memory>
#include <string>

#include "nicert/ast.hpp"

namespace nicert {

// Parses, resolves and statically checks a program. Throws ParseError.
std::unique_ptr<Program> parse(const std::string& source);

// Deep copy with fresh (unassigned) ids; used for desugaring and for the
// synthesized initializer statements.
ExprPtr clone_expr(const Expr& e);

}  // namespace nicert
