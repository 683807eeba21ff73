#include "pawns/analysis.hpp"

#include "pawns/parser.hpp"
#include "pawns/typecheck.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace pawns {

const char* to_string(DiagKind k) {
    switch (k) {
    case DiagKind::MissingBang: return "MissingBang";
    case DiagKind::AbstractUpdate: return "AbstractUpdate";
    case DiagKind::PreconditionViolated: return "PreconditionViolated";
    case DiagKind::PostconditionViolated: return "PostconditionViolated";
    case DiagKind::UndeclaredMutable: return "UndeclaredMutable";
    case DiagKind::InstypeHazard: return "InstypeHazard";
    }
    return "?";
}

std::vector<Diagnostic> ProgramResult::diagnostics() const {
    std::vector<Diagnostic> out;
    for (const auto& f : functions) out.insert(out.end(), f.diagnostics.begin(), f.diagnostics.end());
    return out;
}

const FunctionResult* ProgramResult::find(const std::string& name) const {
    for (const auto& f : functions)
        if (f.name == name) return &f;
    return nullptr;
}

namespace {

// Images of source components in a target variable. Pairs of the source
// are copied onto the target (see mirror()).
struct Target {
    std::string var;
    std::string src;
    std::map<Component, std::vector<Component>> img;
};

using Partners = std::map<VarComp, std::vector<VarComp>>;

Partners partner_index(const AliasSet& a) {
    Partners p;
    for (const auto& [x, y] : a) {
        p[x].push_back(y);
        if (!(x == y)) p[y].push_back(x);
    }
    return p;
}

const std::vector<VarComp>& partners_of(const Partners& p, const VarComp& vc) {
    static const std::vector<VarComp> none;
    auto it = p.find(vc);
    return it == p.end() ? none : it->second;
}

} // namespace

struct Analyzer::Impl {
    const Program& prog;
    AnalysisOptions opts;
    ComponentDomain dom;
    std::map<std::string, TypePtr> abstractTypes;
    std::map<std::string, AliasSet> lowered;

    Impl(const Program& p, AnalysisOptions o) : prog(p), opts(o), dom(p.types, o.mode) {}

    std::string abstract_name(const TypePtr& t) {
        std::string n = abstract_var(t);
        abstractTypes.emplace(n, t);
        return n;
    }

    TypePtr type_of(const FuncDef& f, const std::string& v) const {
        auto it = f.varTypes.find(v);
        if (it != f.varTypes.end()) return it->second;
        auto a = abstractTypes.find(v);
        if (a != abstractTypes.end()) return a->second;
        return nullptr;
    }

    void add_self_all(AliasSet& a, const std::string& v, const TypePtr& t) {
        for (const auto& c : dom.components_of(t)) a.add_self({v, c});
    }

    const Component& comp(const TypePtr& t, int s) {
        return dom.automaton(t).states[static_cast<std::size_t>(s)].path;
    }

    int state_after(const TypePtr& t, int s, const PathStep& st) {
        return dom.automaton(t).step(s, st);
    }

    Target make_target(const std::string& var, const TypePtr& tt, int ts, const std::string& src,
                       const TypePtr& st, int ss, bool includeStart) {
        Target t{var, src, {}};
        if (ts < 0 || ss < 0) return t;
        for (const auto& [a, b] : dom.relate(tt, ts, st, ss, includeStart))
            t.img[comp(st, b)].push_back(comp(tt, a));
        return t;
    }

    // Copy the sharing of each target's source onto the target: pairs
    // between sources become pairs between images, and every other partner
    // of a source becomes a partner of the image. `skipPartner` drops
    // partners that cannot hold.
    static AliasSet mirror(const AliasSet& a0, const std::vector<Target>& ts,
                           const std::function<bool(const VarComp&)>& skipPartner = {}) {
        AliasSet out;
        auto images = [](const Target& t, const VarComp& x) -> const std::vector<Component>* {
            if (x.var != t.src) return nullptr;
            auto it = t.img.find(x.comp);
            return it == t.img.end() ? nullptr : &it->second;
        };
        auto one_way = [&](const VarComp& end, const VarComp& other) {
            for (const auto& t : ts) {
                const auto* xi = images(t, end);
                if (!xi) continue;
                bool skip = skipPartner && skipPartner(other);
                for (const auto& i : *xi) {
                    VarComp vi{t.var, i};
                    if (!skip) out.add(vi, other);
                    for (const auto& u : ts) {
                        const auto* yi = images(u, other);
                        if (!yi) continue;
                        for (const auto& j : *yi) out.add(vi, {u.var, j});
                    }
                }
            }
        };
        for (const auto& [x, y] : a0) {
            one_way(x, y);
            if (!(x == y)) one_way(y, x);
        }
        return out;
    }

    // ---- conditions ----

    const AliasSet& lower(const SharingSig& sig, const CondForm& cond,
                          const std::vector<TypePtr>& ft, const TypePtr& rt, bool isPre) {
        std::ostringstream key;
        key << static_cast<const void*>(&sig) << (isPre ? "|pre" : "|post");
        for (const auto& t : ft) key << "|" << type_key(t);
        key << "|" << type_key(rt);
        auto it = lowered.find(key.str());
        if (it != lowered.end()) return it->second;

        std::map<std::string, TypePtr> types;
        for (std::size_t i = 0; i < sig.formals.size(); ++i) types[sig.formals[i].name] = ft[i];
        types[sig.resultName] = rt;
        std::set<std::string> keep;
        for (const auto& fm : sig.formals) keep.insert(fm.name);
        if (!isPre) keep.insert(sig.resultName);

        AliasSet a;
        if (cond.kind == CondForm::Kind::Explicit) {
            for (const auto& v : keep) add_self_all(a, v, types.at(v));
            for (const auto& clique : cond.cliques) {
                std::vector<VarComp> ms;
                for (const auto& m : clique) {
                    VarComp vc;
                    TypePtr t;
                    if (is_abstract_var(m.var)) {
                        std::string inner = m.var.substr(9, m.var.size() - 10);
                        t = prog.types.resolve(parse_type(inner), cond.pos);
                        vc.var = abstract_name(t);
                        add_self_all(a, vc.var, t);
                    } else {
                        if (!keep.count(m.var))
                            throw TypeError("condition mentions " + m.var +
                                                ", which is not a parameter" +
                                                (isPre ? "" : " or the result"),
                                            cond.pos);
                        vc.var = m.var;
                        t = types.at(m.var);
                    }
                    for (const auto& [c, i] : m.path) vc.comp.push_back({c, i});
                    if (!dom.is_component(t, vc.comp))
                        throw TypeError(show_component(vc.comp) + " is not a component of " +
                                            m.var + " : " + show_type(t),
                                        cond.pos);
                    ms.push_back(std::move(vc));
                }
                for (std::size_t i = 0; i < ms.size(); ++i)
                    for (std::size_t j = i; j < ms.size(); ++j) a.add(ms[i], ms[j]);
            }
            return lowered.emplace(key.str(), std::move(a)).first->second;
        }

        types = cond_var_types(prog.types, sig, cond, ft, rt);
        for (const auto& [v, t] : types) add_self_all(a, v, t);
        std::vector<std::pair<VarComp, VarComp>> eqs;
        auto relate_views = [&](const std::string& x, const TypePtr& tx, int sx,
                                const std::string& y, const TypePtr& ty, int sy) {
            for (const auto& [p, q] : dom.relate(tx, sx, ty, sy, false))
                eqs.push_back({{x, comp(tx, p)}, {y, comp(ty, q)}});
        };
        auto view = [&](const std::string& v, int derefs, SourcePos pos) {
            TypePtr t = types.at(v);
            int s = 0;
            for (int k = 0; k < derefs; ++k) {
                s = state_after(t, s, {"Ref", 1});
                if (s < 0) throw TypeError("condition dereferences a non-reference", pos);
            }
            return s;
        };
        for (const auto& st : cond.stmts) {
            TypePtr tl = types.at(st.lhs);
            int sl = view(st.lhs, st.lhsDerefs, st.pos);
            TypePtr viewType = dom.automaton(tl).states[static_cast<std::size_t>(sl)].type;
            switch (st.rhs.kind) {
            case CondExpr::Kind::Abstract: {
                std::string av = abstract_name(viewType);
                add_self_all(a, av, viewType);
                keep.insert(av);
                relate_views(st.lhs, tl, sl, av, viewType, 0);
                break;
            }
            case CondExpr::Kind::Var: {
                TypePtr tr = types.at(st.rhs.name);
                int sr = view(st.rhs.name, st.rhs.derefs, st.pos);
                relate_views(st.lhs, tl, sl, st.rhs.name, tr, sr);
                break;
            }
            case CondExpr::Kind::Cons:
                for (std::size_t i = 0; i < st.rhs.args.size(); ++i) {
                    int si = state_after(tl, sl, {st.rhs.name, static_cast<int>(i + 1)});
                    const std::string& arg = st.rhs.args[i];
                    relate_views(st.lhs, tl, si, arg, types.at(arg), 0);
                }
                break;
            }
        }
        // Equated components denote the same words, so they share the same
        // partners. Iterate to a fixpoint.
        bool changed = true;
        while (changed) {
            changed = false;
            for (const auto& [p, q] : eqs) {
                std::size_t before = a.size();
                a.add(p, q);
                std::vector<VarComp> pp, qp;
                for (const auto& x : a.pairs_with(p)) pp.push_back(x);
                for (const auto& x : a.pairs_with(q)) qp.push_back(x);
                for (const auto& r : pp) a.add(q, r);
                for (const auto& r : qp) a.add(p, r);
                if (a.size() != before) changed = true;
            }
        }
        AliasSet kept = a.filter([&](const AliasSet::Pair& pr) {
            auto ok = [&](const VarComp& v) { return keep.count(v.var) || is_abstract_var(v.var); };
            return ok(pr.first) && ok(pr.second);
        });
        return lowered.emplace(key.str(), std::move(kept)).first->second;
    }

    std::vector<TypePtr> declared_formal_types(const FuncDef& f) const {
        std::vector<TypePtr> ft;
        for (const auto& fm : f.sig->formals) ft.push_back(fm.type);
        return ft;
    }

    AliasSet initial(const FuncDef& f) {
        AliasSet a = lower(*f.sig, f.sig->pre, declared_formal_types(f), f.sig->resultType, true);
        for (const auto& fm : f.sig->formals) add_self_all(a, fm.name, fm.type);
        return a;
    }

    // ---- statements ----

    struct FnCtx {
        const FuncDef& f;
        FunctionResult& r;
        std::map<const Stat*, std::size_t> order;
        std::vector<const Stat*> linear;
    };

    void diag(FnCtx& c, const Stat& s, DiagKind k, std::string msg, std::set<std::string> vars,
              std::vector<AliasSet::Pair> pairs = {}) {
        Diagnostic d;
        d.kind = k;
        d.function = c.f.name;
        d.point = s.point;
        d.pos = s.pos;
        d.message = std::move(msg);
        d.vars.assign(vars.begin(), vars.end());
        d.pairs = std::move(pairs);
        c.r.diagnostics.push_back(std::move(d));
    }

    static std::string join(const std::set<std::string>& vs) {
        std::string s;
        for (const auto& v : vs) s += (s.empty() ? "" : ", ") + v;
        return s;
    }

    bool live_after(const FnCtx& c, const Stat& s, const std::string& v) const {
        if (c.f.is_param(v)) return true;
        const auto& l = c.f.liveAt[static_cast<std::size_t>(s.point)];
        return l.count(v) > 0;
    }

    AliasSet run_block(FnCtx& c, const std::vector<Stat>& ss, AliasSet a) {
        for (const auto& s : ss) a = run_stat(c, s, std::move(a));
        return a;
    }

    void record(FnCtx& c, int point, const AliasSet& a) {
        auto p = static_cast<std::size_t>(point);
        if (c.r.reached[p])
            c.r.points[p].insert_all(a);
        else
            c.r.points[p] = a;
        c.r.reached[p] = true;
    }

    AliasSet run_stat(FnCtx& c, const Stat& s, AliasSet a0) {
        check_undeclared(c, s);
        AliasSet out;
        switch (s.kind) {
        case StatKind::Seq: out = run_block(c, s.body, std::move(a0)); break;
        case StatKind::Error: break;
        case StatKind::IntLit: out = std::move(a0); break;
        case StatKind::EqVar: out = eq_var(c, s, std::move(a0)); break;
        case StatKind::Instype: out = instype(c, s, std::move(a0)); break;
        case StatKind::EqDeref: out = eq_deref(c, s, std::move(a0)); break;
        case StatKind::DerefEq: out = deref_eq(c, s, std::move(a0)); break;
        case StatKind::DC: out = dc(c, s, std::move(a0)); break;
        case StatKind::ArrayLit: out = array_lit(c, s, std::move(a0)); break;
        case StatKind::ArrayRef: out = array_ref(c, s, std::move(a0)); break;
        case StatKind::Assign: out = assign(c, s, a0); break;
        case StatKind::App: out = app(c, s, a0); break;
        case StatKind::Case: out = case_(c, s, a0); break;
        }
        if (s.point >= 0) record(c, s.point, out);
        return out;
    }

    void check_undeclared(FnCtx& c, const Stat& s) {
        std::set<std::string> bad;
        for (const auto& b : s.bangs)
            if (c.f.is_param(b) && !c.f.is_mutable_param(b)) bad.insert(b);
        if (!bad.empty())
            diag(c, s, DiagKind::UndeclaredMutable,
                 "parameter " + join(bad) + " is updated but not declared mutable", bad);
    }

    TypePtr tv(const FnCtx& c, const std::string& v) const {
        TypePtr t = type_of(c.f, v);
        if (!t) throw std::logic_error("no type for " + v);
        return t;
    }

    AliasSet eq_var(FnCtx& c, const Stat& s, AliasSet a0) {
        TypePtr t = tv(c, s.target);
        auto tg = make_target(s.target, t, 0, s.source, tv(c, s.source), 0, false);
        a0.insert_all(mirror(a0, {tg}));
        return a0;
    }

    AliasSet instype(FnCtx& c, const Stat& s, AliasSet a0) {
        bool hadSharing = a0.mentions(s.source);
        AliasSet out = eq_var(c, s, std::move(a0));
        if (hadSharing) {
            std::size_t me = c.order.at(&s);
            for (std::size_t i = me + 1; i < c.linear.size(); ++i) {
                if (c.linear[i]->bangs.count(s.source)) {
                    diag(c, s, DiagKind::InstypeHazard,
                         s.source + " shares with " + s.target + " at a more general type and is "
                                    "updated later (" + c.f.point_label(c.linear[i]->point) + ")",
                         {s.source, s.target});
                    break;
                }
            }
        }
        return out;
    }

    AliasSet eq_deref(FnCtx& c, const Stat& s, AliasSet a0) {
        TypePtr t = tv(c, s.target), ts = tv(c, s.source);
        auto tg = make_target(s.target, t, 0, s.source, ts, state_after(ts, 0, {"Ref", 1}), false);
        a0.insert_all(mirror(a0, {tg}));
        return a0;
    }

    AliasSet deref_eq(FnCtx& c, const Stat& s, AliasSet a0) {
        TypePtr t = tv(c, s.target);
        int r1 = state_after(t, 0, {"Ref", 1});
        AliasSet add;
        add.add_self({s.target, comp(t, r1)});
        if (!is_const_operand(s.source)) {
            auto tg = make_target(s.target, t, r1, s.source, tv(c, s.source), 0, false);
            add.insert_all(mirror(a0, {tg}));
        }
        a0.insert_all(add);
        return a0;
    }

    AliasSet dc(FnCtx& c, const Stat& s, AliasSet a0) {
        TypePtr t = tv(c, s.target);
        std::vector<Target> ts;
        AliasSet add;
        for (std::size_t i = 0; i < s.args.size(); ++i) {
            int si = state_after(t, 0, {s.cons, static_cast<int>(i + 1)});
            add.add_self({s.target, comp(t, si)});
            if (is_const_operand(s.args[i])) continue;
            ts.push_back(make_target(s.target, t, si, s.args[i], tv(c, s.args[i]), 0, false));
        }
        add.insert_all(mirror(a0, ts));
        a0.insert_all(add);
        return a0;
    }

    AliasSet array_lit(FnCtx& c, const Stat& s, AliasSet a0) {
        TypePtr t = tv(c, s.target);
        int se = state_after(t, 0, {"Array_", 1});
        std::vector<Target> ts;
        AliasSet add;
        if (!s.args.empty()) add.add_self({s.target, comp(t, se)});
        for (const auto& arg : s.args)
            if (!is_const_operand(arg))
                ts.push_back(make_target(s.target, t, se, arg, tv(c, arg), 0, false));
        add.insert_all(mirror(a0, ts));
        a0.insert_all(add);
        return a0;
    }

    AliasSet array_ref(FnCtx& c, const Stat& s, AliasSet a0) {
        TypePtr t = tv(c, s.target), ta = tv(c, s.args[0]);
        auto tg = make_target(s.target, t, state_after(t, 0, {"Ref", 1}), s.args[0], ta,
                              state_after(ta, 0, {"Array_", 1}), true);
        a0.insert_all(mirror(a0, {tg}));
        return a0;
    }

    bool shares_with_abstract(const AliasSet& a, const std::string& v) const {
        for (const auto& [x, y] : a) {
            if (x.var == v && is_abstract_var(y.var)) return true;
            if (y.var == v && is_abstract_var(x.var)) return true;
        }
        return false;
    }

    AliasSet assign(FnCtx& c, const Stat& s, const AliasSet& a0) {
        TypePtr t = tv(c, s.target);
        VarComp word{s.target, comp(t, state_after(t, 0, {"Ref", 1}))};
        std::set<VarComp> al = a0.pairs_with(word);

        std::set<std::string> missing, abstractHit;
        for (const auto& m : al) {
            if (is_abstract_var(m.var)) {
                abstractHit.insert(m.var);
                continue;
            }
            if (!live_after(c, s, m.var)) continue;
            if (!s.bangs.count(m.var)) missing.insert(m.var);
            if (shares_with_abstract(a0, m.var)) abstractHit.insert(m.var);
        }
        if (!missing.empty())
            diag(c, s, DiagKind::MissingBang,
                 "assignment through " + s.target + " may update " + join(missing) +
                     ", which must be annotated with '!'",
                 missing);
        if (!abstractHit.empty())
            diag(c, s, DiagKind::AbstractUpdate,
                 "assignment through " + s.target + " may update abstract data (" +
                     join(abstractHit) + ")",
                 abstractHit);

        AliasSet add;
        if (!is_const_operand(s.source)) {
            TypePtr tsrc = tv(c, s.source);
            std::vector<Target> ts;
            for (const auto& m : al) {
                TypePtr tm = type_of(c.f, m.var);
                if (!tm) continue;
                int sm = dom.automaton(tm).find(m.comp);
                ts.push_back(make_target(m.var, tm, sm, s.source, tsrc, 0, false));
            }
            add = mirror(a0, ts);
        }
        AliasSet out;
        if (c.f.is_mutable_param(s.target)) {
            out = a0;
        } else {
            // The overwritten word no longer leads to the old value.
            out = a0.filter([&](const AliasSet::Pair& p) {
                auto longer = [&](const VarComp& x) {
                    return x.var == s.target && x.comp.size() > word.comp.size() &&
                           std::equal(word.comp.begin(), word.comp.end(), x.comp.begin());
                };
                bool a = longer(p.first), b = longer(p.second);
                if (!a && !b) return true;
                const VarComp& other = a ? p.second : p.first;
                return c.f.is_mutable_param(other.var) && !(a && b);
            });
        }
        out.insert_all(add);
        // A retained pair implies both of its ends may be non-empty.
        std::vector<VarComp> ends;
        for (const auto& [x, y] : out)
            if (!(x == y)) {
                ends.push_back(x);
                ends.push_back(y);
            }
        for (const auto& e : ends) out.add_self(e);
        return out;
    }

    AliasSet app(FnCtx& c, const Stat& s, const AliasSet& a0) {
        const TypePtr& ft = s.calleeType;
        const SharingSig& sig = *ft->sig;
        std::size_t K = ft->closureArgs.size();
        std::size_t N = s.args.size();
        bool saturated = N == ft->params.size();
        bool fIsVar = c.f.varTypes.count(s.source) > 0 && !is_builtin_op(s.source);
        TypePtr vt = tv(c, s.target);

        AliasSet out = a0;

        // Closure creation.
        bool shapeOk = vt->is_fn() && vt->closureArgs.size() == N + K;
        if (shapeOk) {
            for (std::size_t i = 0; i < N && shapeOk; ++i)
                if (!is_const_operand(s.args[i]) &&
                    type_key(vt->closureArgs[N - 1 - i]) != type_key(tv(c, s.args[i])))
                    shapeOk = false;
            for (std::size_t i = 0; i < K && shapeOk; ++i)
                if (type_key(vt->closureArgs[N + i]) != type_key(ft->closureArgs[i]))
                    shapeOk = false;
        }
        if (shapeOk && (!saturated || !opts.preciseApp)) {
            std::vector<Target> ts;
            AliasSet add;
            for (std::size_t i = 0; i < N; ++i) {
                int si = state_after(vt, 0, {"Cl", static_cast<int>(N - i)});
                add.add_self({s.target, comp(vt, si)});
                if (is_const_operand(s.args[i])) continue;
                ts.push_back(make_target(s.target, vt, si, s.args[i], tv(c, s.args[i]), 0, false));
            }
            if (fIsVar) {
                TypePtr tf = tv(c, s.source);
                for (std::size_t i = 1; i <= K; ++i) {
                    int sv = state_after(vt, 0, {"Cl", static_cast<int>(i + N)});
                    int sf = state_after(tf, 0, {"Cl", static_cast<int>(i)});
                    ts.push_back(make_target(s.target, vt, sv, s.source, tf, sf, true));
                }
            }
            add.insert_all(mirror(a0, ts));
            out.insert_all(add);
        }
        if (!saturated) return out;

        // Call: formal j (1-based) is closure argument Cl.(K+1-j) for j <= K,
        // and argument j-K otherwise.
        std::vector<TypePtr> formalTypes;
        for (std::size_t j = 1; j <= K; ++j) formalTypes.push_back(ft->closureArgs[K - j]);
        for (const auto& p : ft->params) formalTypes.push_back(p);
        const AliasSet& pre = lower(sig, sig.pre, formalTypes, ft->result, true);
        const AliasSet& post = lower(sig, sig.post, formalTypes, ft->result, false);

        std::map<std::string, std::size_t> formalIndex;
        for (std::size_t j = 0; j < sig.formals.size(); ++j) formalIndex[sig.formals[j].name] = j;
        auto is_mut_formal = [&](const std::string& v) {
            auto it = formalIndex.find(v);
            return it != formalIndex.end() && sig.formals[it->second].isMutable;
        };

        TypePtr tf = fIsVar ? tv(c, s.source) : nullptr;
        auto ren = [&](const VarComp& x) -> std::vector<VarComp> {
            if (is_abstract_var(x.var)) return {x};
            if (x.var == sig.resultName) return {{s.target, x.comp}};
            auto it = formalIndex.find(x.var);
            if (it == formalIndex.end()) return {};
            std::size_t j = it->second;
            if (j >= K) {
                const std::string& arg = s.args[j - K];
                if (is_const_operand(arg)) return {};
                return {{arg, x.comp}};
            }
            if (!tf) return {};
            TypePtr tw = formalTypes[j];
            int sf = state_after(tf, 0, {"Cl", static_cast<int>(K - j)});
            if (sf < 0) return {};
            int sw = dom.automaton(tw).find(x.comp);
            std::vector<VarComp> r;
            for (const auto& [p, q] : dom.relate(tf, sf, tw, 0, false))
                if (q == sw) r.push_back({s.source, comp(tf, p)});
            return r;
        };

        // Precondition: sharing among the arguments (and abstract) must be allowed.
        AliasSet renPre = pre.map(ren);
        std::set<std::string> involved;
        for (std::size_t i = 0; i < N; ++i)
            if (!is_const_operand(s.args[i])) involved.insert(s.args[i]);
        if (fIsVar) involved.insert(s.source);
        auto in_scope = [&](const VarComp& x) {
            return involved.count(x.var) > 0 || is_abstract_var(x.var);
        };
        std::vector<AliasSet::Pair> bad;
        for (const auto& p : a0) {
            if (!in_scope(p.first) || !in_scope(p.second)) continue;
            if (is_abstract_var(p.first.var) && is_abstract_var(p.second.var)) continue;
            // Self pairs only say a component may be non-empty.
            if (p.first == p.second) continue;
            if (!renPre.contains(p)) bad.push_back(p);
        }
        if (!bad.empty()) {
            std::set<std::string> vs;
            for (const auto& [x, y] : bad) {
                vs.insert(x.var);
                vs.insert(y.var);
            }
            diag(c, s, DiagKind::PreconditionViolated,
                 "sharing before the call of " + s.source + " is not allowed by its precondition",
                 vs, bad);
        }

        // Mutable arguments and the live variables they share with need '!'.
        std::set<std::string> mutActuals;
        for (std::size_t i = 0; i < N; ++i)
            if (sig.formals[K + i].isMutable && !is_const_operand(s.args[i]))
                mutActuals.insert(s.args[i]);
        std::set<std::string> missing, abstractHit;
        for (const auto& m : mutActuals) {
            if (!s.bangs.count(m)) missing.insert(m);
            for (const auto& p : a0) {
                const VarComp* other = nullptr;
                if (p.first.var == m) other = &p.second;
                else if (p.second.var == m) other = &p.first;
                if (!other || other->var == m) continue;
                if (is_abstract_var(other->var)) {
                    abstractHit.insert(m);
                    continue;
                }
                if (is_const_operand(other->var) || !live_after(c, s, other->var)) continue;
                if (!s.bangs.count(other->var)) missing.insert(other->var);
            }
        }
        if (!missing.empty())
            diag(c, s, DiagKind::MissingBang,
                 "call of " + s.source + " may update " + join(missing) +
                     ", which must be annotated with '!'",
                 missing);
        if (!abstractHit.empty())
            diag(c, s, DiagKind::AbstractUpdate,
                 "call of " + s.source + " may update " + join(abstractHit) +
                     ", which shares with abstract",
                 abstractHit);

        // Effect: declared postcondition (less the self pairs of arguments
        // that cannot change) plus the precondition sharing of mutable formals.
        AliasSet eff = post.filter([&](const AliasSet::Pair& p) {
            if (!(p.first == p.second)) return true;
            return !formalIndex.count(p.first.var) || is_mut_formal(p.first.var);
        });
        eff.insert_all(pre.filter([&](const AliasSet::Pair& p) {
            return is_mut_formal(p.first.var) || is_mut_formal(p.second.var);
        }));
        AliasSet renPost = eff.map(ren);
        out.insert_all(renPost);

        Partners idx = partner_index(a0);
        for (const auto& [x1, x2] : renPost) {
            for (const auto& x3 : partners_of(idx, x2)) out.add(x1, x3);
            for (const auto& x3 : partners_of(idx, x1)) out.add(x2, x3);
        }
        for (const auto& [m1, m2] : renPost) {
            if (!mutActuals.count(m1.var) || !mutActuals.count(m2.var)) continue;
            for (const auto& x1 : partners_of(idx, m1))
                for (const auto& x2 : partners_of(idx, m2)) out.add(x1, x2);
        }
        // Whatever aliases a component of a mutable argument also sees the
        // new sharing below that component.
        std::vector<Target> below;
        for (const auto& m : mutActuals) {
            TypePtr tm = tv(c, m);
            for (const auto& p : a0.pairs_of(m)) {
                const VarComp& mc = p.first.var == m ? p.first : p.second;
                const VarComp& al = p.first.var == m ? p.second : p.first;
                if (al.var == m || is_abstract_var(al.var) || is_const_operand(al.var)) continue;
                TypePtr ta = type_of(c.f, al.var);
                if (!ta) continue;
                below.push_back(make_target(al.var, ta, dom.automaton(ta).find(al.comp), m, tm,
                                            dom.automaton(tm).find(mc.comp), false));
            }
        }
        if (!below.empty()) out.insert_all(mirror(out.minus(a0), below));
        return out;
    }

    AliasSet case_(FnCtx& c, const Stat& s, const AliasSet& a0) {
        const std::string& v = s.source;
        TypePtr t = tv(c, s.source);
        const Automaton& au = dom.automaton(t);
        bool keepAll = c.f.is_mutable_param(v);
        std::vector<AliasSet::Pair> av = a0.pairs_of(v);
        AliasSet rest = a0.filter([&](const AliasSet::Pair& p) {
            return p.first.var != v && p.second.var != v;
        });
        AliasSet result;
        for (const auto& alt : s.alts) {
            std::set<Component> compat;
            std::vector<int> firsts;
            for (std::size_t i = 0; i < alt.refVars.size(); ++i) {
                int si = au.step(0, {alt.cons, static_cast<int>(i + 1)});
                firsts.push_back(si);
                compat.insert(au.states[static_cast<std::size_t>(si)].path);
                for (int x : dom.reachable(t, si))
                    compat.insert(au.states[static_cast<std::size_t>(x)].path);
            }
            auto incompatible = [&](const VarComp& x) {
                return x.var == v && !compat.count(x.comp);
            };
            AliasSet entry = rest;
            for (const auto& p : av)
                if (keepAll || (!incompatible(p.first) && !incompatible(p.second))) entry.add(p);
            std::vector<Target> ts;
            for (std::size_t i = 0; i < alt.refVars.size(); ++i) {
                const std::string& r = alt.refVars[i];
                TypePtr tr = tv(c, r);
                int r1 = state_after(tr, 0, {"Ref", 1});
                entry.add_self({r, comp(tr, r1)});
                ts.push_back(make_target(r, tr, r1, v, t, firsts[i], true));
            }
            AliasSet avSet;
            for (const auto& p : av) avSet.add(p);
            entry.insert_all(mirror(avSet, ts, incompatible));
            record(c, alt.point, entry);
            result.insert_all(run_block(c, alt.body, std::move(entry)));
        }
        return result;
    }

    FunctionResult analyze(const FuncDef& f) {
        FunctionResult r;
        r.name = f.name;
        r.points.assign(static_cast<std::size_t>(f.pointCount), {});
        r.reached.assign(static_cast<std::size_t>(f.pointCount), false);
        FnCtx c{f, r, {}, {}};
        for_each_stat(f.body, [&](const Stat& s) {
            c.order[&s] = c.linear.size();
            c.linear.push_back(&s);
        });
        std::vector<TypePtr> ft = declared_formal_types(f);
        AliasSet a0 = initial(f);
        r.points[0] = a0;
        r.reached[0] = true;
        AliasSet end = run_block(c, f.body, a0);

        auto iface = [&](const VarComp& x) {
            return f.is_param(x.var) || x.var == f.retVar() || is_abstract_var(x.var);
        };
        auto both_abstract = [](const AliasSet::Pair& p) {
            return is_abstract_var(p.first.var) && is_abstract_var(p.second.var);
        };
        r.finalSet = end.filter([&](const AliasSet::Pair& p) { return iface(p.first) && iface(p.second); });
        // Sharing a mutable parameter had at any point may still be visible
        // to the caller.
        for (std::size_t p = 0; p < r.points.size(); ++p) {
            if (!r.reached[p]) continue;
            for (const auto& pr : r.points[p]) {
                bool m1 = f.is_mutable_param(pr.first.var), m2 = f.is_mutable_param(pr.second.var);
                if ((m1 && iface(pr.second)) || (m2 && iface(pr.first))) {
                    r.finalSet.add(pr);
                    r.finalSet.add_self(pr.first);
                    r.finalSet.add_self(pr.second);
                }
            }
        }
        r.allowed = lower(*f.sig, f.sig->pre, ft, f.sig->resultType, true);
        r.allowed.insert_all(lower(*f.sig, f.sig->post, ft, f.sig->resultType, false));
        AliasSet extra = r.finalSet.minus(r.allowed).filter(
            [&](const AliasSet::Pair& p) { return !both_abstract(p); });
        if (!extra.empty()) {
            Diagnostic d;
            d.kind = DiagKind::PostconditionViolated;
            d.function = f.name;
            d.point = f.endPoint;
            d.pos = f.pos;
            std::set<std::string> vs;
            for (const auto& [x, y] : extra) {
                vs.insert(x.var);
                vs.insert(y.var);
                d.pairs.push_back({x, y});
            }
            d.vars.assign(vs.begin(), vs.end());
            d.message = "sharing at the end of " + f.name +
                        " is not allowed by its pre- and postconditions: " + extra.to_text();
            r.diagnostics.push_back(std::move(d));
        }
        std::stable_sort(r.diagnostics.begin(), r.diagnostics.end(),
                         [](const Diagnostic& a, const Diagnostic& b) { return a.point < b.point; });
        return r;
    }
};

Analyzer::Analyzer(const Program& program, AnalysisOptions opts)
    : impl_(std::make_unique<Impl>(program, opts)) {
    // Validate every declared condition up front.
    for (const auto& f : program.funcs) {
        std::vector<TypePtr> ft = impl_->declared_formal_types(f);
        impl_->lower(*f.sig, f.sig->pre, ft, f.sig->resultType, true);
        impl_->lower(*f.sig, f.sig->post, ft, f.sig->resultType, false);
    }
}

Analyzer::~Analyzer() = default;

ProgramResult Analyzer::analyze_program() {
    ProgramResult r;
    r.mode = impl_->opts.mode;
    for (const auto& f : impl_->prog.funcs) r.functions.push_back(impl_->analyze(f));
    return r;
}

FunctionResult Analyzer::analyze_function(const FuncDef& f) { return impl_->analyze(f); }

const AliasSet& Analyzer::lower_condition(const SharingSig& sig, const CondForm& cond,
                                          const std::vector<TypePtr>& formalTypes,
                                          const TypePtr& resultType, bool isPre) {
    return impl_->lower(sig, cond, formalTypes, resultType, isPre);
}

AliasSet Analyzer::initial_alias_set(const FuncDef& f) { return impl_->initial(f); }

ComponentDomain& Analyzer::domain() { return impl_->dom; }

TypePtr Analyzer::type_of(const FuncDef& f, const std::string& var) const {
    return impl_->type_of(f, var);
}

ProgramResult analyze(const Program& program, AnalysisOptions opts) {
    return Analyzer(program, opts).analyze_program();
}

} // namespace pawns
