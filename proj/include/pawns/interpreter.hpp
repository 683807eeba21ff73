// interpreter.hpp
//
// Reference interpreter for core programs over an explicit word heap, and
// the soundness oracle built on it: the concrete sharing observed at each
// program point must be covered by the analysis result for that point.
#pragma once

#include "pawns/alias_set.hpp"
#include "pawns/analysis.hpp"
#include "pawns/syntax.hpp"

#include <functional>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pawns {

/// One word. Constructors with arguments, references, arrays and closures
/// live in heap blocks; Int, nullary constructors and plain function
/// constants are unboxed.
struct Value {
    enum class Kind { Int, Con, Block, Ref, Fn, Array };
    Kind kind = Kind::Int;
    long long num = 0;
    std::string name;      // constructor (Con, Block) or function (Fn)
    std::size_t addr = 0;  // block base, or the word a Ref points at
    std::size_t len = 0;   // Block arity, Array length, Fn closure size
};

using Frame = std::map<std::string, Value>;

class RunError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class StepLimitExceeded : public RunError {
public:
    using RunError::RunError;
};

class Interpreter {
public:
    /// Called after the statement ending at `point` (and at point 0 on entry).
    using Observer = std::function<void(const FuncDef&, int point, const Frame&)>;

    explicit Interpreter(const Program& program, std::size_t stepLimit = 1000000);

    void set_observer(Observer obs) { observer_ = std::move(obs); }

    Value call(const std::string& function, const std::vector<Value>& args);

    std::size_t alloc(const std::vector<Value>& words);
    const std::vector<Value>& heap() const { return heap_; }
    std::size_t steps() const { return steps_; }

private:
    Value run_function(const FuncDef& f, const std::vector<Value>& args);
    void exec_block(const FuncDef& f, const std::vector<Stat>& ss, Frame& fr);
    void exec(const FuncDef& f, const Stat& s, Frame& fr);
    Value operand(const Frame& fr, const std::string& name) const;
    Value apply(const Value& fn, const std::vector<Value>& args);
    void observe(const FuncDef& f, int point, const Frame& fr);

    const Program& prog_;
    std::size_t stepLimit_;
    std::size_t steps_ = 0;
    std::vector<Value> heap_;
    Observer observer_;
};

/// Parse an argument literal: integers, constructor applications such as
/// `Cons 1 (Cons 2 Nil)`, `()`, `ref <lit>`, `array [<lit>, ...]` and
/// function names. Allocates in the interpreter's heap.
Value parse_value(std::string_view text, const Program& program, Interpreter& interp);
/// Split a comma-separated argument list, respecting brackets.
std::vector<std::string> split_literals(std::string_view text);

std::string show_value(const Value& v, const std::vector<Value>& heap);

/// Heap words of each component of a value of type `t`.
using Footprint = std::map<Component, std::set<std::size_t>>;
Footprint footprint(ComponentDomain& dom, const TypePtr& t, const Value& v,
                    const std::vector<Value>& heap);

/// Pairs of variable components of the frame whose words overlap,
/// including self pairs for non-empty components.
AliasSet concrete_sharing(ComponentDomain& dom, const FuncDef& f, const Frame& fr,
                          const std::vector<Value>& heap);

/// Fresh, unshared value of type `t` (after synonym expansion). Type
/// variables are instantiated to Int. Returns false for types it cannot
/// build (function types without a matching named function).
bool random_value(const Program& program, const TypePtr& t, Interpreter& interp, std::mt19937& rng,
                  int depth, Value& out);

struct SoundnessReport {
    std::size_t runs = 0;
    std::size_t runsFailed = 0;   // stopped by `error`, step limit or a bad index
    std::size_t observations = 0;
    std::size_t violations = 0;   // concrete pairs missing from the analysis
    std::size_t excused = 0;      // ... in programs with contract diagnostics
    std::vector<std::string> details;

    void merge(const SoundnessReport& o);
};

/// Runs functions of one program and compares every observation with the
/// analysis result in the given mode.
class SoundnessChecker {
public:
    SoundnessChecker(const Program& program, AnalysisOptions opts, std::size_t stepLimit = 1000000);

    /// Whether the analysis reported a pre/postcondition violation, in which
    /// case the callee assumptions may not hold and mismatches are excused.
    bool has_contract_diagnostics() const { return contractDiags_; }
    const ProgramResult& analysis() const { return result_; }
    /// Mutable access, so tests can check that a weakened result is caught.
    ProgramResult& analysis() { return result_; }

    /// Run `entry` on literal arguments.
    void run_literals(const std::string& entry, const std::vector<std::string>& args);
    /// Run `entry` on freshly generated arguments; returns false if some
    /// parameter type cannot be generated.
    bool run_random(const std::string& entry, std::mt19937& rng);

    const SoundnessReport& report() const { return report_; }

private:
    void run(Interpreter& interp, const std::string& entry, const std::vector<Value>& args);

    const Program& prog_;
    AnalysisOptions opts_;
    std::size_t stepLimit_;
    ProgramResult result_;
    ComponentDomain dom_;
    bool contractDiags_ = false;
    SoundnessReport report_;
};

} // namespace pawns
