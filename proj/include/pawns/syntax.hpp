// syntax.hpp
//
// Core-language abstract syntax: statements, sharing signatures and
// function definitions.
#pragma once

#include "pawns/type.hpp"

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

namespace pawns {

enum class StatKind {
    Seq,      // s1; s2; ...
    EqVar,    // v = w
    EqDeref,  // v = *w
    DerefEq,  // *v = w
    DC,       // v = Cons w1 .. wn
    Case,     // case v { alts }
    Error,    // error
    App,      // v = f w1 .. wn
    Assign,   // *v := w
    Instype,  // v = w :: T
    IntLit,   // v = 42
    ArrayLit, // v = array w1 .. wn
    ArrayRef, // v = arrayref a i
};

const char* to_string(StatKind k);

struct Stat;

struct Alt {
    std::string cons;
    std::vector<std::string> refVars;
    std::vector<Stat> body; // executed in order
    SourcePos pos;
    int point = -1; // branch entry point, after the pattern binds
};

/// Constant operands (nullary constructors and integers written in argument
/// position) are represented as hidden variables named `%<n>:<text>`.
bool is_const_operand(const std::string& name);
std::string const_operand_text(const std::string& name);

struct Stat {
    StatKind kind = StatKind::Error;
    SourcePos pos;
    std::string target; // bound or assigned variable
    std::string source; // right-hand variable, callee, or case scrutinee
    std::string cons;   // DC constructor
    std::vector<std::string> args;
    std::vector<bool> argBangs; // App: `!` written on the argument
    bool fixedArgs = false;     // App: `(f a b) !x` form
    bool targetBang = false;    // Assign: `*!v := w`
    std::vector<Stat> body;     // Seq
    std::vector<Alt> alts;      // Case
    TypePtr annotType;          // Instype
    long long intValue = 0;     // IntLit
    std::set<std::string> bangs;
    int point = -1;     // point after the statement (the end point for Case)
    TypePtr calleeType; // App: callee type at this call, after checking
};

/// Right-hand side of a condition statement.
struct CondExpr {
    enum class Kind { Var, Abstract, Cons };
    Kind kind = Kind::Var;
    int derefs = 0;
    std::string name; // variable or constructor
    std::vector<std::string> args;
};

struct CondStmt {
    int lhsDerefs = 0;
    std::string lhs;
    CondExpr rhs;
    SourcePos pos;
};

/// One side of an explicitly written pair: variable plus raw path text.
struct CondVarComp {
    std::string var;
    std::vector<std::pair<std::string, int>> path;
};

struct CondForm {
    enum class Kind { Stmts, Explicit };
    Kind kind = Kind::Stmts;
    std::vector<CondStmt> stmts; // empty means nosharing
    std::vector<std::vector<CondVarComp>> cliques;
    SourcePos pos;

    bool is_nosharing() const { return kind == Kind::Stmts && stmts.empty(); }
};

struct Formal {
    std::string name;
    bool isMutable = false;
    TypePtr type;
};

/// Sharing and mutability information attached to a function type.
/// The first `closureCount` formals stand for closure arguments.
struct SharingSig {
    std::string key; // identifies the signature inside function types
    std::vector<Formal> formals;
    std::size_t closureCount = 0;
    std::string resultName = "ret";
    TypePtr resultType;
    CondForm pre;
    CondForm post;
    bool synthesized = false; // default signature of a written arrow type
};

/// Signature attached to an arrow type written in source: arguments and
/// result may share with abstract, nothing is mutable.
std::shared_ptr<const SharingSig> default_arrow_sig(const std::vector<TypePtr>& params,
                                                    const TypePtr& result);

struct FuncDef {
    std::string name;
    SourcePos pos;
    std::shared_ptr<SharingSig> sig;
    std::vector<Stat> body;
    std::map<std::string, TypePtr> varTypes;
    std::vector<std::set<std::string>> liveAt; // indexed by program point
    int pointCount = 0;
    int endPoint = 0;
    std::vector<SourcePos> pointPos;

    const std::string& retVar() const { return sig->resultName; }
    bool is_param(const std::string& v) const;
    bool is_mutable_param(const std::string& v) const;
    std::string point_label(int p) const { return name + ":" + std::to_string(p); }
};

struct Program {
    TypeEnv types;
    std::vector<FuncDef> funcs;

    const FuncDef* find(const std::string& name) const;
    FuncDef* find(const std::string& name);
};

bool is_abstract_var(const std::string& v);
std::string abstract_var(const TypePtr& t);

/// Infix operators on integers that behave as built-in functions.
bool is_builtin_op(const std::string& op);
TypePtr builtin_op_type(const std::string& op);

/// Assign program points: 0 is entry, every simple statement gets the point
/// after it, every case alternative an entry point and every case an end
/// point, numbered in source order.
void number_points(FuncDef& f);

/// Pretty-print in the concrete syntax accepted by the parser.
std::string print_program(const Program& p);
std::string print_type(const TypePtr& t);
std::string print_cond(const CondForm& c);

/// Depth-first visit of every statement (Seq bodies and case branches).
template <typename F>
void for_each_stat(const std::vector<Stat>& stats, F&& f) {
    for (const auto& s : stats) {
        f(s);
        if (s.kind == StatKind::Seq) for_each_stat(s.body, f);
        for (const auto& a : s.alts) for_each_stat(a.body, f);
    }
}

} // namespace pawns
