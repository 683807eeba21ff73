// type.hpp
//
// Types of the core language and the table of user data definitions.
#pragma once

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pawns {

struct SharingSig;
struct Type;
using TypePtr = std::shared_ptr<const Type>;

struct SourcePos {
    int line = 0;
    int column = 0;
};

std::string to_string(const SourcePos& pos);

/// A core-language type. Values are immutable and shared.
///
/// Function types carry the sharing signature of the function they were
/// derived from, plus the types of any closure arguments already supplied
/// (most recently supplied first, i.e. index 0 is `Cl.1`).
struct Type {
    enum class Kind { Var, Named, Ref, Array, Fn, Meta };

    Kind kind = Kind::Named;
    std::string name;                 // Var / Named
    std::vector<TypePtr> args;        // Named arguments; Ref/Array element in args[0]
    std::vector<TypePtr> closureArgs; // Fn
    std::vector<TypePtr> params;      // Fn, remaining parameters
    TypePtr result;                   // Fn
    std::shared_ptr<const SharingSig> sig;
    int metaId = -1;

    static TypePtr var(std::string name);
    static TypePtr named(std::string name, std::vector<TypePtr> args = {});
    static TypePtr ref(TypePtr elem);
    static TypePtr array(TypePtr elem);
    static TypePtr fn(std::vector<TypePtr> closureArgs, std::vector<TypePtr> params, TypePtr result,
                      std::shared_ptr<const SharingSig> sig);
    static TypePtr meta(int id);

    static TypePtr int_type();
    static TypePtr bool_type();
    static TypePtr unit_type();

    bool is_fn() const { return kind == Kind::Fn; }
    const TypePtr& elem() const { return args.at(0); }
};

/// Canonical text of a type; equal types have equal keys.
std::string type_key(const TypePtr& t);
/// Human-readable rendering, e.g. `Ref (List Int)`.
std::string show_type(const TypePtr& t);

bool same_type(const TypePtr& a, const TypePtr& b);
bool has_type_vars(const TypePtr& t);

using TypeSubst = std::map<std::string, TypePtr>;
TypePtr substitute(const TypePtr& t, const TypeSubst& s);

struct ConstructorDef {
    std::string name;
    std::vector<TypePtr> argTypes;
};

struct DataDef {
    std::string name;
    std::vector<std::string> params;
    std::vector<ConstructorDef> constructors;
    SourcePos pos;
    bool builtin = false;
};

struct ConsInfo {
    const DataDef* data = nullptr;
    std::size_t index = 0; // position within data->constructors
    const ConstructorDef& def() const { return data->constructors[index]; }
};

class TypeError : public std::runtime_error {
public:
    TypeError(const std::string& msg, SourcePos pos = {});
    SourcePos pos;
};

/// Data definitions and type synonyms of one program (plus built-ins).
class TypeEnv {
public:
    TypeEnv();

    void add_data(DataDef def);
    void add_synonym(std::string name, std::vector<std::string> params, TypePtr body, SourcePos pos);

    const DataDef* find_data(const std::string& name) const;
    std::optional<ConsInfo> find_cons(const std::string& cons) const;
    bool is_synonym(const std::string& name) const;

    /// Expand synonyms and validate arity; throws TypeError.
    TypePtr resolve(const TypePtr& t, SourcePos pos = {}) const;

    /// Argument types of constructor `cons` at instance `owner` (a Named type).
    std::vector<TypePtr> cons_arg_types(const TypePtr& owner, const ConstructorDef& cons) const;

    const std::vector<std::string>& data_order() const { return dataOrder_; }

    struct Synonym {
        std::string name;
        std::vector<std::string> params;
        TypePtr body;
        SourcePos pos;
    };
    std::vector<Synonym> synonyms() const;

    /// Reject recursive synonyms, non-uniform recursion and unknown names.
    void validate() const;

private:
    TypePtr resolve_rec(const TypePtr& t, SourcePos pos, std::vector<std::string>& expanding) const;

    std::map<std::string, DataDef> data_;
    std::vector<std::string> dataOrder_;
    std::map<std::string, Synonym> synonyms_;
    std::vector<std::string> synonymOrder_;
    std::map<std::string, std::pair<std::string, std::size_t>> consIndex_;
};

} // namespace pawns
