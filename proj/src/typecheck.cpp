#include "pawns/typecheck.hpp"

#include <algorithm>
#include <cctype>

namespace pawns {

namespace {

class Unifier {
public:
    TypePtr fresh() { return Type::meta(next_++); }

    TypePtr zonk(const TypePtr& t) const {
        if (!t) return t;
        switch (t->kind) {
        case Type::Kind::Meta: {
            auto it = sub_.find(t->metaId);
            return it == sub_.end() ? t : zonk(it->second);
        }
        case Type::Kind::Var: return t;
        case Type::Kind::Named: {
            if (t->args.empty()) return t;
            std::vector<TypePtr> a;
            for (const auto& x : t->args) a.push_back(zonk(x));
            return Type::named(t->name, std::move(a));
        }
        case Type::Kind::Ref: return Type::ref(zonk(t->elem()));
        case Type::Kind::Array: return Type::array(zonk(t->elem()));
        case Type::Kind::Fn: {
            std::vector<TypePtr> cl, ps;
            for (const auto& x : t->closureArgs) cl.push_back(zonk(x));
            for (const auto& x : t->params) ps.push_back(zonk(x));
            return Type::fn(std::move(cl), std::move(ps), zonk(t->result), t->sig);
        }
        }
        return t;
    }

    // Zonk and replace unconstrained metas by `()`.
    TypePtr finish(const TypePtr& t) const { return default_metas(zonk(t)); }

    bool unify(const TypePtr& a0, const TypePtr& b0) {
        TypePtr a = zonk(a0), b = zonk(b0);
        if (a->kind == Type::Kind::Meta && b->kind == Type::Kind::Meta &&
            a->metaId == b->metaId)
            return true;
        if (a->kind == Type::Kind::Meta) return bind(a->metaId, b);
        if (b->kind == Type::Kind::Meta) return bind(b->metaId, a);
        if (a->kind != b->kind) return false;
        switch (a->kind) {
        case Type::Kind::Var: return a->name == b->name;
        case Type::Kind::Named:
            if (a->name != b->name || a->args.size() != b->args.size()) return false;
            for (std::size_t i = 0; i < a->args.size(); ++i)
                if (!unify(a->args[i], b->args[i])) return false;
            return true;
        case Type::Kind::Ref:
        case Type::Kind::Array: return unify(a->elem(), b->elem());
        case Type::Kind::Fn:
            if ((a->sig ? a->sig->key : "") != (b->sig ? b->sig->key : "")) return false;
            if (a->closureArgs.size() != b->closureArgs.size() ||
                a->params.size() != b->params.size())
                return false;
            for (std::size_t i = 0; i < a->closureArgs.size(); ++i)
                if (!unify(a->closureArgs[i], b->closureArgs[i])) return false;
            for (std::size_t i = 0; i < a->params.size(); ++i)
                if (!unify(a->params[i], b->params[i])) return false;
            return unify(a->result, b->result);
        case Type::Kind::Meta: break;
        }
        return false;
    }

    TypePtr instantiate(const TypePtr& t) {
        std::map<std::string, TypePtr> vars;
        return inst(t, vars);
    }

private:
    std::map<int, TypePtr> sub_;
    int next_ = 0;

    bool occurs(int id, const TypePtr& t) const {
        TypePtr z = zonk(t);
        if (z->kind == Type::Kind::Meta) return z->metaId == id;
        for (const auto& x : z->args)
            if (occurs(id, x)) return true;
        for (const auto& x : z->closureArgs)
            if (occurs(id, x)) return true;
        for (const auto& x : z->params)
            if (occurs(id, x)) return true;
        return z->result && occurs(id, z->result);
    }

    bool bind(int id, const TypePtr& t) {
        if (occurs(id, t)) return false;
        sub_[id] = t;
        return true;
    }

    TypePtr inst(const TypePtr& t, std::map<std::string, TypePtr>& vars) {
        switch (t->kind) {
        case Type::Kind::Var: {
            auto it = vars.find(t->name);
            if (it != vars.end()) return it->second;
            return vars[t->name] = fresh();
        }
        case Type::Kind::Meta: return t;
        case Type::Kind::Named: {
            if (t->args.empty()) return t;
            std::vector<TypePtr> a;
            for (const auto& x : t->args) a.push_back(inst(x, vars));
            return Type::named(t->name, std::move(a));
        }
        case Type::Kind::Ref: return Type::ref(inst(t->elem(), vars));
        case Type::Kind::Array: return Type::array(inst(t->elem(), vars));
        case Type::Kind::Fn: {
            std::vector<TypePtr> cl, ps;
            for (const auto& x : t->closureArgs) cl.push_back(inst(x, vars));
            for (const auto& x : t->params) ps.push_back(inst(x, vars));
            return Type::fn(std::move(cl), std::move(ps), inst(t->result, vars), t->sig);
        }
        }
        return t;
    }

    static TypePtr default_metas(const TypePtr& t) {
        switch (t->kind) {
        case Type::Kind::Meta: return Type::unit_type();
        case Type::Kind::Var: return t;
        case Type::Kind::Named: {
            if (t->args.empty()) return t;
            std::vector<TypePtr> a;
            for (const auto& x : t->args) a.push_back(default_metas(x));
            return Type::named(t->name, std::move(a));
        }
        case Type::Kind::Ref: return Type::ref(default_metas(t->elem()));
        case Type::Kind::Array: return Type::array(default_metas(t->elem()));
        case Type::Kind::Fn: {
            std::vector<TypePtr> cl, ps;
            for (const auto& x : t->closureArgs) cl.push_back(default_metas(x));
            for (const auto& x : t->params) ps.push_back(default_metas(x));
            return Type::fn(std::move(cl), std::move(ps), default_metas(t->result), t->sig);
        }
        }
        return t;
    }
};

// Bind pattern variables of `pattern` (a checked type) so that it equals `target`.
bool match_instance(const TypePtr& pattern, const TypePtr& target, TypeSubst& s) {
    if (pattern->kind == Type::Kind::Var) {
        auto it = s.find(pattern->name);
        if (it != s.end()) return same_type(it->second, target);
        s[pattern->name] = target;
        return true;
    }
    if (pattern->kind != target->kind) return false;
    switch (pattern->kind) {
    case Type::Kind::Named:
        if (pattern->name != target->name || pattern->args.size() != target->args.size())
            return false;
        for (std::size_t i = 0; i < pattern->args.size(); ++i)
            if (!match_instance(pattern->args[i], target->args[i], s)) return false;
        return true;
    case Type::Kind::Ref:
    case Type::Kind::Array: return match_instance(pattern->elem(), target->elem(), s);
    case Type::Kind::Fn:
        if (pattern->sig != target->sig && (!pattern->sig || !target->sig ||
                                            pattern->sig->key != target->sig->key))
            return false;
        if (pattern->closureArgs.size() != target->closureArgs.size() ||
            pattern->params.size() != target->params.size())
            return false;
        for (std::size_t i = 0; i < pattern->closureArgs.size(); ++i)
            if (!match_instance(pattern->closureArgs[i], target->closureArgs[i], s)) return false;
        for (std::size_t i = 0; i < pattern->params.size(); ++i)
            if (!match_instance(pattern->params[i], target->params[i], s)) return false;
        return match_instance(pattern->result, target->result, s);
    default: return false;
    }
}

bool is_int_text(const std::string& t) {
    std::size_t i = t.size() > 1 && t[0] == '-' ? 1 : 0;
    if (i == t.size()) return false;
    return std::all_of(t.begin() + static_cast<long>(i), t.end(),
                       [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

class FnChecker {
public:
    FnChecker(Program& p, FuncDef& f) : prog_(p), env_(p.types), f_(f) {}

    void run() {
        std::set<std::string> bound;
        for (const auto& fm : f_.sig->formals) {
            types_[fm.name] = fm.type;
            bound.insert(fm.name);
        }
        types_[f_.retVar()] = f_.sig->resultType;
        bool ok = check_block(f_.body, bound);
        if (ok && !bound.count(f_.retVar()))
            throw TypeError("in " + f_.name + ": result " + f_.retVar() +
                                " is not bound on every path",
                            f_.pos);
        f_.varTypes.clear();
        for (const auto& [v, t] : types_) f_.varTypes[v] = u_.finish(t);
        for (Stat* s : apps_) s->calleeType = u_.finish(s->calleeType);
    }

private:
    Program& prog_;
    const TypeEnv& env_;
    FuncDef& f_;
    Unifier u_;
    std::map<std::string, TypePtr> types_;
    std::vector<Stat*> apps_;
    int fnConsts_ = 0;

    [[noreturn]] void fail(const std::string& msg, SourcePos pos) const {
        throw TypeError("in " + f_.name + ": " + msg, pos);
    }

    void unify(const TypePtr& a, const TypePtr& b, SourcePos pos, const std::string& what) {
        if (!u_.unify(a, b))
            fail("type mismatch in " + what + ": " + show_type(u_.zonk(a)) + " vs " +
                     show_type(u_.zonk(b)),
                 pos);
    }

    TypePtr const_type(const std::string& name, SourcePos pos) {
        std::string text = const_operand_text(name);
        if (is_int_text(text)) return Type::int_type();
        if (text == "()") return Type::unit_type();
        if (std::isupper(static_cast<unsigned char>(text[0]))) {
            auto ci = env_.find_cons(text);
            if (!ci) fail("unknown constructor " + text, pos);
            if (!ci->def().argTypes.empty())
                fail("constructor " + text + " needs " +
                         std::to_string(ci->def().argTypes.size()) + " arguments",
                     pos);
            std::vector<TypePtr> args;
            for (std::size_t i = 0; i < ci->data->params.size(); ++i) args.push_back(u_.fresh());
            return Type::named(ci->data->name, std::move(args));
        }
        if (const FuncDef* g = prog_.find(text)) return u_.instantiate(function_type(*g));
        fail("unknown constant " + text, pos);
    }

    TypePtr use(const std::string& v, const std::set<std::string>& bound, SourcePos pos) {
        if (is_const_operand(v)) {
            auto it = types_.find(v);
            if (it != types_.end()) return it->second;
            return types_[v] = const_type(v, pos);
        }
        if (!bound.count(v)) {
            if (prog_.find(v)) fail("function " + v + " used where a variable is expected", pos);
            fail("variable " + v + " is not bound here", pos);
        }
        return types_.at(v);
    }

    // Replace a bare function name used as an argument by a constant operand.
    void fn_args_to_consts(std::vector<std::string>& args, const std::set<std::string>& bound) {
        for (auto& a : args)
            if (!is_const_operand(a) && !bound.count(a) && prog_.find(a))
                a = "%fn" + std::to_string(++fnConsts_) + ":" + a;
    }

    void bind(const std::string& v, const TypePtr& t, std::set<std::string>& bound,
              SourcePos pos) {
        if (is_const_operand(v)) fail("cannot bind a constant", pos);
        if (prog_.find(v)) fail("variable " + v + " has the name of a function", pos);
        if (is_abstract_var(v) || v == "abstract") fail("reserved variable name " + v, pos);
        if (f_.is_param(v)) fail("parameter " + v + " cannot be rebound", pos);
        if (bound.count(v)) fail("variable " + v + " is bound twice", pos);
        auto it = types_.find(v);
        if (it != types_.end())
            unify(it->second, t, pos, "binding of " + v);
        else
            types_[v] = t;
        bound.insert(v);
    }

    void check_bangs(const Stat& s, const std::set<std::string>& bound) {
        for (const auto& b : s.bangs)
            if (!bound.count(b)) fail("'!" + b + "' names a variable that is not in scope", s.pos);
    }

    bool check_block(std::vector<Stat>& stats, std::set<std::string>& bound) {
        for (std::size_t i = 0; i < stats.size(); ++i) {
            if (!check_stat(stats[i], bound)) {
                if (i + 1 != stats.size())
                    fail("unreachable statement after error", stats[i + 1].pos);
                return false;
            }
        }
        return true;
    }

    bool check_stat(Stat& s, std::set<std::string>& bound) {
        switch (s.kind) {
        case StatKind::Seq: return check_block(s.body, bound);
        case StatKind::Error: return false;
        case StatKind::EqVar:
            if (!bound.count(s.source) && prog_.find(s.source)) {
                s.kind = StatKind::App;
                return check_app(s, bound);
            }
            bind(s.target, use(s.source, bound, s.pos), bound, s.pos);
            break;
        case StatKind::EqDeref: {
            TypePtr elem = u_.fresh();
            unify(use(s.source, bound, s.pos), Type::ref(elem), s.pos, "dereference");
            bind(s.target, elem, bound, s.pos);
            break;
        }
        case StatKind::DerefEq:
            if (!is_const_operand(s.source) && !bound.count(s.source) && prog_.find(s.source))
                s.source = "%fn" + std::to_string(++fnConsts_) + ":" + s.source;
            bind(s.target, Type::ref(use(s.source, bound, s.pos)), bound, s.pos);
            break;
        case StatKind::IntLit: bind(s.target, Type::int_type(), bound, s.pos); break;
        case StatKind::DC: {
            auto ci = env_.find_cons(s.cons);
            if (!ci) fail("unknown constructor " + s.cons, s.pos);
            const auto& def = ci->def();
            if (def.argTypes.size() != s.args.size())
                fail("constructor " + s.cons + " expects " + std::to_string(def.argTypes.size()) +
                         " arguments, got " + std::to_string(s.args.size()),
                     s.pos);
            std::vector<TypePtr> params;
            for (std::size_t i = 0; i < ci->data->params.size(); ++i) params.push_back(u_.fresh());
            TypePtr owner = Type::named(ci->data->name, params);
            fn_args_to_consts(s.args, bound);
            auto argTypes = env_.cons_arg_types(owner, def);
            for (std::size_t i = 0; i < s.args.size(); ++i)
                unify(use(s.args[i], bound, s.pos), argTypes[i], s.pos,
                      "argument " + std::to_string(i + 1) + " of " + s.cons);
            bind(s.target, owner, bound, s.pos);
            break;
        }
        case StatKind::ArrayLit: {
            TypePtr elem = u_.fresh();
            fn_args_to_consts(s.args, bound);
            for (const auto& a : s.args) unify(use(a, bound, s.pos), elem, s.pos, "array element");
            bind(s.target, Type::array(elem), bound, s.pos);
            break;
        }
        case StatKind::ArrayRef: {
            TypePtr elem = u_.fresh();
            unify(use(s.args[0], bound, s.pos), Type::array(elem), s.pos, "arrayref");
            unify(use(s.args[1], bound, s.pos), Type::int_type(), s.pos, "array index");
            bind(s.target, Type::ref(elem), bound, s.pos);
            break;
        }
        case StatKind::Assign: {
            if (!is_const_operand(s.source) && !bound.count(s.source) && prog_.find(s.source))
                s.source = "%fn" + std::to_string(++fnConsts_) + ":" + s.source;
            TypePtr tv = use(s.target, bound, s.pos);
            unify(tv, Type::ref(use(s.source, bound, s.pos)), s.pos, "assignment");
            break;
        }
        case StatKind::Instype: {
            TypePtr annot = env_.resolve(s.annotType, s.pos);
            s.annotType = annot;
            TypePtr src = u_.zonk(use(s.source, bound, s.pos));
            TypeSubst sub;
            bool ok;
            if (src->kind == Type::Kind::Meta || has_metas(src))
                ok = u_.unify(src, annot);
            else
                ok = match_instance(src, annot, sub);
            if (!ok)
                fail("type " + show_type(annot) + " is not an instance of " + show_type(src),
                     s.pos);
            bind(s.target, annot, bound, s.pos);
            break;
        }
        case StatKind::App: return check_app(s, bound);
        case StatKind::Case: return check_case(s, bound);
        }
        check_bangs(s, bound);
        return true;
    }

    static bool has_metas(const TypePtr& t) {
        if (t->kind == Type::Kind::Meta) return true;
        for (const auto& x : t->args)
            if (has_metas(x)) return true;
        for (const auto& x : t->closureArgs)
            if (has_metas(x)) return true;
        for (const auto& x : t->params)
            if (has_metas(x)) return true;
        return t->result && has_metas(t->result);
    }

    bool check_app(Stat& s, std::set<std::string>& bound) {
        TypePtr ft;
        if (is_builtin_op(s.source) && !bound.count(s.source)) {
            ft = builtin_op_type(s.source);
        } else if (bound.count(s.source)) {
            ft = u_.zonk(types_.at(s.source));
            if (!ft->is_fn())
                fail("variable " + s.source + " of type " + show_type(ft) +
                         " is applied as a function",
                     s.pos);
        } else if (const FuncDef* g = prog_.find(s.source)) {
            ft = u_.instantiate(function_type(*g));
        } else {
            fail("unknown function " + s.source, s.pos);
        }
        std::size_t arity = ft->params.size();
        if (s.argBangs.size() < s.args.size()) s.argBangs.resize(s.args.size(), false);
        if (s.args.size() > arity) {
            if (s.fixedArgs)
                fail("too many arguments for " + s.source + " (expects " + std::to_string(arity) +
                         ")",
                     s.pos);
            for (std::size_t i = arity; i < s.args.size(); ++i) {
                if (!s.argBangs[i])
                    fail("too many arguments for " + s.source + " (expects " +
                             std::to_string(arity) + ")",
                         s.pos);
                s.bangs.insert(s.args[i]);
            }
            s.args.resize(arity);
            s.argBangs.resize(arity);
        }
        for (std::size_t i = 0; i < s.args.size(); ++i)
            if (s.argBangs[i]) s.bangs.insert(s.args[i]);
        fn_args_to_consts(s.args, bound);
        std::vector<TypePtr> argTypes;
        for (std::size_t i = 0; i < s.args.size(); ++i) {
            TypePtr at = use(s.args[i], bound, s.pos);
            unify(at, ft->params[i], s.pos,
                  "argument " + std::to_string(i + 1) + " of " + s.source);
            argTypes.push_back(at);
        }
        TypePtr result;
        if (s.args.size() == arity) {
            result = ft->result;
        } else {
            std::vector<TypePtr> cl(argTypes.rbegin(), argTypes.rend());
            cl.insert(cl.end(), ft->closureArgs.begin(), ft->closureArgs.end());
            std::vector<TypePtr> rest(ft->params.begin() + static_cast<long>(s.args.size()),
                                      ft->params.end());
            result = Type::fn(std::move(cl), std::move(rest), ft->result, ft->sig);
        }
        s.calleeType = ft;
        apps_.push_back(&s);
        check_bangs(s, bound);
        bind(s.target, result, bound, s.pos);
        return true;
    }

    bool check_case(Stat& s, std::set<std::string>& bound) {
        TypePtr tv = use(s.source, bound, s.pos);
        const DataDef* data = nullptr;
        std::set<std::string> seen;
        for (const auto& a : s.alts) {
            auto ci = env_.find_cons(a.cons);
            if (!ci) fail("unknown constructor " + a.cons, a.pos);
            if (!data) {
                data = ci->data;
                std::vector<TypePtr> params;
                for (std::size_t i = 0; i < data->params.size(); ++i) params.push_back(u_.fresh());
                unify(tv, Type::named(data->name, params), a.pos, "case on " + s.source);
            } else if (ci->data != data) {
                fail("constructor " + a.cons + " does not belong to type " + data->name, a.pos);
            }
            if (a.refVars.size() != ci->def().argTypes.size())
                fail("pattern " + a.cons + " expects " +
                         std::to_string(ci->def().argTypes.size()) + " arguments",
                     a.pos);
            seen.insert(a.cons);
        }
        for (const auto& c : data->constructors)
            if (!seen.count(c.name))
                fail("case on " + s.source + " does not cover constructor " + c.name, s.pos);
        TypePtr owner = u_.zonk(tv);
        std::optional<std::set<std::string>> joined;
        for (auto& a : s.alts) {
            auto ci = env_.find_cons(a.cons);
            auto argTypes = env_.cons_arg_types(owner, ci->def());
            std::set<std::string> inner = bound;
            for (std::size_t i = 0; i < a.refVars.size(); ++i)
                bind(a.refVars[i], Type::ref(argTypes[i]), inner, a.pos);
            if (!check_block(a.body, inner)) continue;
            if (!joined) {
                joined = inner;
            } else {
                std::set<std::string> both;
                std::set_intersection(joined->begin(), joined->end(), inner.begin(), inner.end(),
                                      std::inserter(both, both.end()));
                joined = std::move(both);
            }
        }
        if (!joined) return false;
        bound = *joined;
        return true;
    }
};

TypePtr deref_view(Unifier& u, TypePtr t, int k, SourcePos pos, const std::string& v) {
    for (int i = 0; i < k; ++i) {
        TypePtr elem = u.fresh();
        if (!u.unify(t, Type::ref(elem)))
            throw TypeError("condition dereferences " + v + " which is not a reference", pos);
        t = elem;
    }
    return t;
}

} // namespace

TypePtr function_type(const FuncDef& f) {
    std::vector<TypePtr> ps;
    for (const auto& fm : f.sig->formals) ps.push_back(fm.type);
    return Type::fn({}, std::move(ps), f.sig->resultType, f.sig);
}

std::map<std::string, TypePtr> cond_var_types(const TypeEnv& env, const SharingSig& sig,
                                              const CondForm& cond,
                                              const std::vector<TypePtr>& formalTypes,
                                              const TypePtr& resultType) {
    Unifier u;
    std::map<std::string, TypePtr> types;
    for (std::size_t i = 0; i < sig.formals.size(); ++i) types[sig.formals[i].name] = formalTypes[i];
    types[sig.resultName] = resultType;
    auto var = [&](const std::string& v) -> TypePtr {
        auto it = types.find(v);
        if (it != types.end()) return it->second;
        return types[v] = u.fresh();
    };
    for (const auto& st : cond.stmts) {
        TypePtr lhs = deref_view(u, var(st.lhs), st.lhsDerefs, st.pos, st.lhs);
        switch (st.rhs.kind) {
        case CondExpr::Kind::Abstract: break;
        case CondExpr::Kind::Var: {
            TypePtr rhs = deref_view(u, var(st.rhs.name), st.rhs.derefs, st.pos, st.rhs.name);
            if (!u.unify(lhs, rhs))
                throw TypeError("condition relates " + st.lhs + " and " + st.rhs.name +
                                    " at different types",
                                st.pos);
            break;
        }
        case CondExpr::Kind::Cons: {
            auto ci = env.find_cons(st.rhs.name);
            if (!ci) throw TypeError("unknown constructor " + st.rhs.name + " in condition", st.pos);
            if (ci->def().argTypes.size() != st.rhs.args.size())
                throw TypeError("constructor " + st.rhs.name + " expects " +
                                    std::to_string(ci->def().argTypes.size()) + " arguments",
                                st.pos);
            std::vector<TypePtr> ps;
            for (std::size_t i = 0; i < ci->data->params.size(); ++i) ps.push_back(u.fresh());
            TypePtr owner = Type::named(ci->data->name, ps);
            if (!u.unify(lhs, owner))
                throw TypeError("condition binds " + st.lhs + " to a " + ci->data->name, st.pos);
            auto argTypes = env.cons_arg_types(owner, ci->def());
            for (std::size_t i = 0; i < argTypes.size(); ++i)
                if (!u.unify(var(st.rhs.args[i]), argTypes[i]))
                    throw TypeError("condition argument " + st.rhs.args[i] + " has the wrong type",
                                    st.pos);
            break;
        }
        }
    }
    std::map<std::string, TypePtr> out;
    for (const auto& [v, t] : types) out[v] = u.finish(t);
    return out;
}

void check_types(Program& program) {
    program.types.validate();
    for (auto& f : program.funcs) {
        for (auto& fm : f.sig->formals) fm.type = program.types.resolve(fm.type, f.pos);
        f.sig->resultType = program.types.resolve(f.sig->resultType, f.pos);
        for (const auto& fm : f.sig->formals)
            if (program.find(fm.name))
                throw TypeError("in " + f.name + ": parameter " + fm.name +
                                    " has the name of a function",
                                f.pos);
    }
    for (auto& f : program.funcs) {
        FnChecker(program, f).run();
        std::vector<TypePtr> ft;
        for (const auto& fm : f.sig->formals) ft.push_back(fm.type);
        for (const CondForm* c : {&f.sig->pre, &f.sig->post}) {
            if (c->kind != CondForm::Kind::Stmts) continue;
            try {
                cond_var_types(program.types, *f.sig, *c, ft, f.sig->resultType);
            } catch (const TypeError& e) {
                throw TypeError("in " + f.name + ": " + e.what(), e.pos);
            }
            for (const auto& st : c->stmts) {
                if (c == &f.sig->pre && st.lhs == f.retVar())
                    throw TypeError("in " + f.name + ": precondition mentions the result", st.pos);
            }
        }
    }
}

} // namespace pawns
