// analysis.hpp
//
// Sharing analysis: abstract execution of function bodies over alias sets,
// checking of `!` annotations, mutability declarations, abstract updates
// and declared pre/post-conditions.
#pragma once

#include "pawns/alias_set.hpp"
#include "pawns/syntax.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace pawns {

enum class DiagKind {
    MissingBang,
    AbstractUpdate,
    PreconditionViolated,
    PostconditionViolated,
    UndeclaredMutable,
    InstypeHazard,
};

const char* to_string(DiagKind k);

struct Diagnostic {
    DiagKind kind;
    std::string function;
    int point = 0;
    SourcePos pos;
    std::string message;
    std::vector<std::string> vars;  // variables involved, sorted
    std::vector<AliasSet::Pair> pairs; // offending pairs, if any

    std::string label() const { return function + ":" + std::to_string(point); }
};

struct AnalysisOptions {
    DomainMode mode = DomainMode::New;
    /// Skip closure-creation sharing for calls known to be saturated.
    bool preciseApp = false;
};

struct FunctionResult {
    std::string name;
    std::vector<AliasSet> points;  // indexed by program point
    std::vector<bool> reached;     // point visited by the analysis
    AliasSet finalSet;             // end set restricted to the interface, plus mutable history
    AliasSet allowed;              // lowered pre ∪ post
    std::vector<Diagnostic> diagnostics;
};

struct ProgramResult {
    DomainMode mode;
    std::vector<FunctionResult> functions;

    std::vector<Diagnostic> diagnostics() const;
    const FunctionResult* find(const std::string& name) const;
};

/// Analyzes the functions of one typed, liveness-annotated program.
class Analyzer {
public:
    Analyzer(const Program& program, AnalysisOptions opts);
    ~Analyzer();
    Analyzer(const Analyzer&) = delete;
    Analyzer& operator=(const Analyzer&) = delete;

    ProgramResult analyze_program();
    FunctionResult analyze_function(const FuncDef& f);

    /// Alias set denoted by a condition at the given instance of the
    /// signature. Condition locals are removed; so is the result when
    /// `isPre`. Throws TypeError on an ill-formed condition.
    const AliasSet& lower_condition(const SharingSig& sig, const CondForm& cond,
                                    const std::vector<TypePtr>& formalTypes,
                                    const TypePtr& resultType, bool isPre);

    AliasSet initial_alias_set(const FuncDef& f);

    ComponentDomain& domain();
    /// Type of a variable of f, or of an abstract variable.
    TypePtr type_of(const FuncDef& f, const std::string& var) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Convenience: analyze every function of a program.
ProgramResult analyze(const Program& program, AnalysisOptions opts = {});

} // namespace pawns
