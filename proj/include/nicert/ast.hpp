#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <memory>
#include <string>
#include <vector>

#include "nicert/diagnostics.hpp"
#include "nicert/labels.hpp"

namespace nicert {

using BigInt = boost::multiprecision::cpp_int;

struct Type {
    enum Kind { Int, Bool, Void, Object, Invalid } kind = Invalid;
    int class_index = -1;  // Object only

    bool is_scalar() const { return kind == Int || kind == Bool; }
    bool operator==(const Type& o) const {
        return kind == o.kind && (kind != Object || class_index == o.class_index);
    }
};

enum class BinOp { Add, Sub, Mul, Div, Mod, Lt, Gt, Le, Ge, Eq, Ne, And, Or };
enum class UnOp { Neg, Not };

const char* to_string(BinOp op);
const char* to_string(UnOp op);

struct Expr;
struct Stmt;
using ExprPtr = std::unique_ptr<Expr>;
using StmtPtr = std::unique_ptr<Stmt>;

// How a bare identifier resolved.
struct VarRef {
    enum Kind { Unresolved, Local, StaticField, ThisField } kind = Unresolved;
    int class_index = -1;
    int field_index = -1;
};

struct Expr {
    enum Kind { IntLit, BoolLit, Var, This, FieldAccess, Unary, Binary, Call, New };
    Kind kind;
    int id = -1;  // program point, assigned in creation order
    SourcePos pos;
    Type type;  // filled by the resolver

    BigInt int_value;          // IntLit
    bool bool_value = false;   // BoolLit
    std::string name;          // Var / FieldAccess member / Call method
    VarRef var;                // Var
    ExprPtr base;              // FieldAccess / instance Call receiver (null for static)
    int field_index = -1;      // FieldAccess
    UnOp un_op{};              // Unary
    BinOp bin_op{};            // Binary
    ExprPtr lhs, rhs;          // Binary
    ExprPtr operand;           // Unary
    int callee_class = -1;     // Call / New
    int callee_method = -1;    // Call (index into ClassDecl::methods)
    std::vector<ExprPtr> args; // Call / New
};

struct Stmt {
    enum Kind { Block, Declare, Assign, If, While, Break, Continue, Return, ExprStmt, Println };
    Kind kind;
    int id = -1;
    SourcePos pos;

    std::vector<StmtPtr> body;  // Block
    // Declare
    Type decl_type;
    std::string name;
    ExprPtr init;  // always present for scalar declarations (default synthesized)
    // Assign
    ExprPtr target;  // Var or FieldAccess
    ExprPtr value;
    // If / While
    ExprPtr cond;
    StmtPtr then_branch;
    StmtPtr else_branch;  // may be null
    bool branch_abrupt = false;  // If: a branch contains an abrupt statement
    StmtPtr loop_body;
    // Return
    ExprPtr ret;  // may be null
    // ExprStmt / Println
    ExprPtr expr;
};

// True iff the statement contains a break, continue or return that is not
// shielded by a nested conditional or loop.
bool contains_abrupt(const Stmt& branch);

struct Param {
    std::string name;
    Type type;
    SourcePos pos;
};

struct FieldDecl {
    std::string name;
    Type type;
    bool is_static = false;
    ExprPtr init;  // never null after parsing (defaults synthesized for scalars)
    SourcePos pos;
};

struct MethodDecl {
    std::string name;
    bool is_static = false;
    bool is_ctor = false;
    Type return_type;
    std::vector<Param> params;
    StmtPtr body;  // Block
    SourcePos pos;
};

// A label annotation attached to a class body, e.g. setLabel(balance, High).
struct LabelAnnotation {
    std::string path;  // dotted variable path as written
    Label label;
    SourcePos pos;
};

struct ClassDecl {
    std::string name;
    std::vector<FieldDecl> static_fields;
    std::vector<FieldDecl> instance_fields;
    std::vector<MethodDecl> methods;  // constructor included, flagged is_ctor
    std::vector<LabelAnnotation> annotations;
    // Synthesized `this.f = init;` assignments, one per instance field,
    // executed before any constructor body.
    std::vector<StmtPtr> field_init;
    int ctor_index = -1;  // -1: implicit no-arg constructor
    SourcePos pos;
};

struct Program {
    std::vector<ClassDecl> classes;
    int main_class = -1;
    int main_method = -1;
    // Synthesized `C.f = init;` assignments for every static field, in
    // declaration order. Run before main. static_init_class[i] is the class
    // whose scope the i-th initializer resolves in.
    std::vector<StmtPtr> static_init;
    std::vector<int> static_init_class;
    std::string source;  // original text, hashed into certificates

    // Program-point tables (owning pointers live in the trees above).
    std::vector<const Stmt*> stmt_by_id;
    std::vector<const Expr*> expr_by_id;

    const std::vector<Param>& inputs() const {
        return classes[main_class].methods[main_method].params;
    }
    int class_index(const std::string& name) const;
    const ClassDecl& cls(int i) const { return classes[i]; }
};

// Pretty-printer; parse(print(parse(s))) is a fixpoint.
std::string to_source(const Program& p);

}  // namespace nicert
