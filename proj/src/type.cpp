#include "pawns/type.hpp"

#include "pawns/syntax.hpp"

#include <algorithm>
#include <set>

namespace pawns {

std::string to_string(const SourcePos& pos) {
    return std::to_string(pos.line) + ":" + std::to_string(pos.column);
}

TypeError::TypeError(const std::string& msg, SourcePos p)
    : std::runtime_error(msg), pos(p) {}

TypePtr Type::var(std::string name) {
    auto t = std::make_shared<Type>();
    t->kind = Kind::Var;
    t->name = std::move(name);
    return t;
}

TypePtr Type::named(std::string name, std::vector<TypePtr> args) {
    auto t = std::make_shared<Type>();
    t->kind = Kind::Named;
    t->name = std::move(name);
    t->args = std::move(args);
    return t;
}

TypePtr Type::ref(TypePtr elem) {
    auto t = std::make_shared<Type>();
    t->kind = Kind::Ref;
    t->args = {std::move(elem)};
    return t;
}

TypePtr Type::array(TypePtr elem) {
    auto t = std::make_shared<Type>();
    t->kind = Kind::Array;
    t->args = {std::move(elem)};
    return t;
}

TypePtr Type::fn(std::vector<TypePtr> closureArgs, std::vector<TypePtr> params, TypePtr result,
                 std::shared_ptr<const SharingSig> sig) {
    auto t = std::make_shared<Type>();
    t->kind = Kind::Fn;
    t->closureArgs = std::move(closureArgs);
    t->params = std::move(params);
    t->result = std::move(result);
    t->sig = std::move(sig);
    return t;
}

TypePtr Type::meta(int id) {
    auto t = std::make_shared<Type>();
    t->kind = Kind::Meta;
    t->metaId = id;
    return t;
}

TypePtr Type::int_type() {
    static const TypePtr t = named("Int");
    return t;
}

TypePtr Type::bool_type() {
    static const TypePtr t = named("Bool");
    return t;
}

TypePtr Type::unit_type() {
    static const TypePtr t = named("()");
    return t;
}

namespace {

bool needs_parens(const TypePtr& t) {
    switch (t->kind) {
    case Type::Kind::Named: return !t->args.empty();
    case Type::Kind::Ref:
    case Type::Kind::Array:
    case Type::Kind::Fn: return true;
    default: return false;
    }
}

std::string render(const TypePtr& t, bool withSig);

std::string render_arg(const TypePtr& t, bool withSig) {
    std::string s = render(t, withSig);
    return needs_parens(t) ? "(" + s + ")" : s;
}

std::string render(const TypePtr& t, bool withSig) {
    if (!t) return "?";
    switch (t->kind) {
    case Type::Kind::Var: return t->name;
    case Type::Kind::Meta: return "?" + std::to_string(t->metaId);
    case Type::Kind::Named: {
        std::string s = t->name;
        for (const auto& a : t->args) s += " " + render_arg(a, withSig);
        return s;
    }
    case Type::Kind::Ref: return "Ref " + render_arg(t->elem(), withSig);
    case Type::Kind::Array: return "Array " + render_arg(t->elem(), withSig);
    case Type::Kind::Fn: {
        std::string s;
        if (withSig) {
            s += "<" + (t->sig ? t->sig->key : std::string("?"));
            for (const auto& c : t->closureArgs) s += " " + render_arg(c, withSig);
            s += ">";
        }
        for (const auto& p : t->params) {
            std::string ps = render(p, withSig);
            s += (p->kind == Type::Kind::Fn ? "(" + ps + ")" : ps) + " -> ";
        }
        std::string r = render(t->result, withSig);
        s += t->result && t->result->kind == Type::Kind::Fn ? "(" + r + ")" : r;
        return s;
    }
    }
    return "?";
}

} // namespace

std::string type_key(const TypePtr& t) { return render(t, true); }
std::string show_type(const TypePtr& t) { return render(t, false); }

bool same_type(const TypePtr& a, const TypePtr& b) { return type_key(a) == type_key(b); }

bool has_type_vars(const TypePtr& t) {
    if (!t) return false;
    if (t->kind == Type::Kind::Var) return true;
    for (const auto& a : t->args)
        if (has_type_vars(a)) return true;
    for (const auto& a : t->closureArgs)
        if (has_type_vars(a)) return true;
    for (const auto& a : t->params)
        if (has_type_vars(a)) return true;
    return has_type_vars(t->result);
}

TypePtr substitute(const TypePtr& t, const TypeSubst& s) {
    if (!t) return t;
    switch (t->kind) {
    case Type::Kind::Var: {
        auto it = s.find(t->name);
        return it == s.end() ? t : it->second;
    }
    case Type::Kind::Meta: return t;
    case Type::Kind::Named: {
        if (t->args.empty()) return t;
        std::vector<TypePtr> args;
        for (const auto& a : t->args) args.push_back(substitute(a, s));
        return Type::named(t->name, std::move(args));
    }
    case Type::Kind::Ref: return Type::ref(substitute(t->elem(), s));
    case Type::Kind::Array: return Type::array(substitute(t->elem(), s));
    case Type::Kind::Fn: {
        std::vector<TypePtr> cl, ps;
        for (const auto& a : t->closureArgs) cl.push_back(substitute(a, s));
        for (const auto& a : t->params) ps.push_back(substitute(a, s));
        return Type::fn(std::move(cl), std::move(ps), substitute(t->result, s), t->sig);
    }
    }
    return t;
}

TypeEnv::TypeEnv() {
    DataDef intDef{"Int", {}, {}, {}, true};
    DataDef boolDef{"Bool", {}, {{"False", {}}, {"True", {}}}, {}, true};
    DataDef unitDef{"()", {}, {{"()", {}}}, {}, true};
    add_data(std::move(intDef));
    add_data(std::move(boolDef));
    add_data(std::move(unitDef));
}

void TypeEnv::add_data(DataDef def) {
    if (data_.count(def.name) || synonyms_.count(def.name))
        throw TypeError("duplicate definition of type " + def.name, def.pos);
    std::set<std::string> seen;
    for (std::size_t i = 0; i < def.constructors.size(); ++i) {
        const auto& c = def.constructors[i];
        if (!seen.insert(c.name).second)
            throw TypeError("duplicate constructor " + c.name + " in " + def.name, def.pos);
        if (consIndex_.count(c.name))
            throw TypeError("constructor " + c.name + " already defined", def.pos);
        consIndex_[c.name] = {def.name, i};
    }
    dataOrder_.push_back(def.name);
    std::string name = def.name;
    data_.emplace(name, std::move(def));
}

void TypeEnv::add_synonym(std::string name, std::vector<std::string> params, TypePtr body,
                          SourcePos pos) {
    if (data_.count(name) || synonyms_.count(name))
        throw TypeError("duplicate definition of type " + name, pos);
    synonymOrder_.push_back(name);
    synonyms_[name] = Synonym{name, std::move(params), std::move(body), pos};
}

std::vector<TypeEnv::Synonym> TypeEnv::synonyms() const {
    std::vector<Synonym> out;
    for (const auto& n : synonymOrder_) out.push_back(synonyms_.at(n));
    return out;
}

const DataDef* TypeEnv::find_data(const std::string& name) const {
    auto it = data_.find(name);
    return it == data_.end() ? nullptr : &it->second;
}

std::optional<ConsInfo> TypeEnv::find_cons(const std::string& cons) const {
    auto it = consIndex_.find(cons);
    if (it == consIndex_.end()) return std::nullopt;
    return ConsInfo{find_data(it->second.first), it->second.second};
}

bool TypeEnv::is_synonym(const std::string& name) const { return synonyms_.count(name) > 0; }

TypePtr TypeEnv::resolve(const TypePtr& t, SourcePos pos) const {
    std::vector<std::string> expanding;
    return resolve_rec(t, pos, expanding);
}

TypePtr TypeEnv::resolve_rec(const TypePtr& t, SourcePos pos,
                             std::vector<std::string>& expanding) const {
    if (!t) return t;
    switch (t->kind) {
    case Type::Kind::Var:
    case Type::Kind::Meta: return t;
    case Type::Kind::Ref: {
        // A synonym cycle that only passes through Ref is an infinite chain of refs.
        std::vector<std::string> inner = expanding;
        inner.push_back("#ref");
        return Type::ref(resolve_rec(t->elem(), pos, inner));
    }
    case Type::Kind::Array: {
        std::vector<std::string> inner = expanding;
        inner.push_back("#other");
        return Type::array(resolve_rec(t->elem(), pos, inner));
    }
    case Type::Kind::Fn: {
        std::vector<std::string> inner = expanding;
        inner.push_back("#other");
        std::vector<TypePtr> cl, ps;
        for (const auto& a : t->closureArgs) cl.push_back(resolve_rec(a, pos, inner));
        for (const auto& a : t->params) ps.push_back(resolve_rec(a, pos, inner));
        return Type::fn(std::move(cl), std::move(ps), resolve_rec(t->result, pos, inner), t->sig);
    }
    case Type::Kind::Named: break;
    }
    auto syn = synonyms_.find(t->name);
    if (syn != synonyms_.end()) {
        auto at = std::find(expanding.begin(), expanding.end(), t->name);
        if (at != expanding.end()) {
            bool onlyRefs = std::all_of(at + 1, expanding.end(), [&](const std::string& s) {
                return s == "#ref" || synonyms_.count(s);
            }) && std::count(at + 1, expanding.end(), std::string("#ref")) > 0;
            if (onlyRefs)
                throw TypeError("type " + t->name + " is an infinite chain of refs", pos);
            throw TypeError("recursive type synonym " + t->name, pos);
        }
        if (syn->second.params.size() != t->args.size())
            throw TypeError("type " + t->name + " expects " +
                                std::to_string(syn->second.params.size()) + " arguments",
                            pos);
        TypeSubst s;
        std::vector<std::string> argCtx = expanding;
        argCtx.push_back("#other");
        for (std::size_t i = 0; i < t->args.size(); ++i)
            s[syn->second.params[i]] = resolve_rec(t->args[i], pos, argCtx);
        expanding.push_back(t->name);
        TypePtr r = resolve_rec(substitute(syn->second.body, s), pos, expanding);
        expanding.pop_back();
        return r;
    }
    const DataDef* d = find_data(t->name);
    if (!d) throw TypeError("unknown type " + t->name, pos);
    if (d->params.size() != t->args.size())
        throw TypeError("type " + t->name + " expects " + std::to_string(d->params.size()) +
                            " arguments",
                        pos);
    if (t->args.empty()) return t;
    std::vector<TypePtr> args;
    std::vector<std::string> inner = expanding;
    inner.push_back("#other");
    for (const auto& a : t->args) args.push_back(resolve_rec(a, pos, inner));
    return Type::named(t->name, std::move(args));
}

std::vector<TypePtr> TypeEnv::cons_arg_types(const TypePtr& owner, const ConstructorDef& cons) const {
    const DataDef* d = find_data(owner->name);
    TypeSubst s;
    if (d)
        for (std::size_t i = 0; i < d->params.size() && i < owner->args.size(); ++i)
            s[d->params[i]] = owner->args[i];
    std::vector<TypePtr> out;
    for (const auto& a : cons.argTypes) out.push_back(resolve(substitute(a, s)));
    return out;
}

void TypeEnv::validate() const {
    for (const auto& [name, syn] : synonyms_) {
        std::vector<TypePtr> args;
        for (const auto& p : syn.params) args.push_back(Type::var(p));
        resolve(Type::named(name, args), syn.pos);
    }
    for (const auto& name : dataOrder_) {
        const DataDef& d = data_.at(name);
        std::set<std::string> params(d.params.begin(), d.params.end());
        for (const auto& c : d.constructors) {
            for (const auto& a : c.argTypes) {
                TypePtr r = resolve(a, d.pos);
                std::vector<TypePtr> stack{r};
                while (!stack.empty()) {
                    TypePtr x = stack.back();
                    stack.pop_back();
                    if (x->kind == Type::Kind::Var && !params.count(x->name))
                        throw TypeError("type variable " + x->name + " not bound in " + d.name,
                                        d.pos);
                    for (const auto& y : x->args) stack.push_back(y);
                    for (const auto& y : x->params) stack.push_back(y);
                    for (const auto& y : x->closureArgs) stack.push_back(y);
                    if (x->result) stack.push_back(x->result);
                }
            }
        }
        // Regularity: the set of instantiated types reachable from the
        // generic instance must be finite.
        std::vector<TypePtr> gen;
        for (const auto& p : d.params) gen.push_back(Type::var(p));
        std::vector<TypePtr> work{Type::named(d.name, gen)};
        std::set<std::string> seen{type_key(work.front())};
        while (!work.empty()) {
            TypePtr t = work.back();
            work.pop_back();
            std::vector<TypePtr> next;
            if (t->kind == Type::Kind::Named) {
                if (const DataDef* dd = find_data(t->name))
                    for (const auto& c : dd->constructors)
                        for (const auto& a : cons_arg_types(t, c)) next.push_back(a);
            } else if (t->kind == Type::Kind::Ref || t->kind == Type::Kind::Array) {
                next.push_back(t->elem());
            } else if (t->kind == Type::Kind::Fn) {
                for (const auto& a : t->closureArgs) next.push_back(a);
            }
            for (const auto& n : next) {
                std::string k = type_key(n);
                if (k.size() > 400 || seen.size() > 500)
                    throw TypeError("type " + d.name + " has non-uniform recursion", d.pos);
                if (seen.insert(k).second) work.push_back(n);
            }
        }
    }
}

} // namespace pawns
