#include "pawns/interpreter.hpp"

#include "pawns/typecheck.hpp"

#include <cctype>
#include <functional>

namespace pawns {

namespace {

bool is_int_text(const std::string& s) {
    std::size_t i = (!s.empty() && s[0] == '-') ? 1 : 0;
    if (i >= s.size()) return false;
    for (; i < s.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    return true;
}

Value int_value(long long n) {
    Value v;
    v.kind = Value::Kind::Int;
    v.num = n;
    return v;
}

Value con_value(std::string name) {
    Value v;
    v.kind = Value::Kind::Con;
    v.name = std::move(name);
    return v;
}

Value fn_value(std::string name, std::size_t base = 0, std::size_t k = 0) {
    Value v;
    v.kind = Value::Kind::Fn;
    v.name = std::move(name);
    v.addr = base;
    v.len = k;
    return v;
}

Value ref_value(std::size_t addr) {
    Value v;
    v.kind = Value::Kind::Ref;
    v.addr = addr;
    return v;
}

// Heap words directly held by a value.
std::vector<std::size_t> words_of(const Value& v) {
    std::vector<std::size_t> out;
    switch (v.kind) {
    case Value::Kind::Block:
    case Value::Kind::Array:
    case Value::Kind::Fn:
        for (std::size_t i = 0; i < v.len; ++i) out.push_back(v.addr + i);
        break;
    case Value::Kind::Ref: out.push_back(v.addr); break;
    default: break;
    }
    return out;
}

} // namespace

// ---- interpreter ----

Interpreter::Interpreter(const Program& program, std::size_t stepLimit)
    : prog_(program), stepLimit_(stepLimit) {}

std::size_t Interpreter::alloc(const std::vector<Value>& words) {
    std::size_t base = heap_.size();
    heap_.insert(heap_.end(), words.begin(), words.end());
    return base;
}

Value Interpreter::call(const std::string& function, const std::vector<Value>& args) {
    const FuncDef* f = prog_.find(function);
    if (!f) throw RunError("unknown function " + function);
    if (args.size() != f->sig->formals.size())
        throw RunError(function + " expects " + std::to_string(f->sig->formals.size()) +
                       " arguments, got " + std::to_string(args.size()));
    return run_function(*f, args);
}

void Interpreter::observe(const FuncDef& f, int point, const Frame& fr) {
    if (observer_) observer_(f, point, fr);
}

Value Interpreter::run_function(const FuncDef& f, const std::vector<Value>& args) {
    Frame fr;
    for (std::size_t i = 0; i < args.size(); ++i) fr[f.sig->formals[i].name] = args[i];
    observe(f, 0, fr);
    exec_block(f, f.body, fr);
    auto it = fr.find(f.retVar());
    if (it == fr.end()) throw RunError(f.name + " returned without binding " + f.retVar());
    return it->second;
}

void Interpreter::exec_block(const FuncDef& f, const std::vector<Stat>& ss, Frame& fr) {
    for (const auto& s : ss) exec(f, s, fr);
}

Value Interpreter::operand(const Frame& fr, const std::string& name) const {
    if (is_const_operand(name)) {
        std::string text = const_operand_text(name);
        if (name.rfind("%fn", 0) == 0) return fn_value(text);
        if (is_int_text(text)) return int_value(std::stoll(text));
        return con_value(text);
    }
    auto it = fr.find(name);
    if (it != fr.end()) return it->second;
    if (prog_.find(name) || is_builtin_op(name)) return fn_value(name);
    throw std::logic_error("unbound variable " + name);
}

Value Interpreter::apply(const Value& fn, const std::vector<Value>& args) {
    if (fn.kind != Value::Kind::Fn) throw std::logic_error("applying a non-function");
    std::size_t k = fn.len;
    if (is_builtin_op(fn.name)) {
        std::vector<Value> all;
        for (std::size_t j = 1; j <= k; ++j) all.push_back(heap_[fn.addr + k - j]);
        all.insert(all.end(), args.begin(), args.end());
        if (all.size() < 2) {
            std::vector<Value> words(args.rbegin(), args.rend());
            for (std::size_t i = 0; i < k; ++i) words.push_back(heap_[fn.addr + i]);
            return fn_value(fn.name, alloc(words), words.size());
        }
        long long a = all[0].num, b = all[1].num;
        const std::string& op = fn.name;
        if (op == "+") return int_value(a + b);
        if (op == "-") return int_value(a - b);
        if (op == "*") return int_value(a * b);
        bool r = op == "<=" ? a <= b : op == "<" ? a < b : op == ">=" ? a >= b : op == ">" ? a > b
                                                                                          : a == b;
        return con_value(r ? "True" : "False");
    }
    const FuncDef* g = prog_.find(fn.name);
    if (!g) throw std::logic_error("unknown function " + fn.name);
    std::size_t arity = g->sig->formals.size();
    if (k + args.size() < arity) {
        // Closure words: most recent argument first.
        std::vector<Value> words(args.rbegin(), args.rend());
        for (std::size_t i = 0; i < k; ++i) words.push_back(heap_[fn.addr + i]);
        return fn_value(fn.name, alloc(words), words.size());
    }
    if (k + args.size() > arity) throw std::logic_error("over-application of " + fn.name);
    std::vector<Value> actuals;
    for (std::size_t j = 1; j <= k; ++j) actuals.push_back(heap_[fn.addr + k - j]);
    actuals.insert(actuals.end(), args.begin(), args.end());
    return run_function(*g, actuals);
}

void Interpreter::exec(const FuncDef& f, const Stat& s, Frame& fr) {
    if (++steps_ > stepLimit_)
        throw StepLimitExceeded("step limit of " + std::to_string(stepLimit_) + " exceeded");
    switch (s.kind) {
    case StatKind::Seq: exec_block(f, s.body, fr); return;
    case StatKind::Error: throw RunError("error reached at " + f.point_label(s.point));
    case StatKind::EqVar:
    case StatKind::Instype: fr[s.target] = operand(fr, s.source); break;
    case StatKind::IntLit: fr[s.target] = int_value(s.intValue); break;
    case StatKind::EqDeref: {
        Value r = operand(fr, s.source);
        if (r.kind != Value::Kind::Ref) throw std::logic_error("dereferencing a non-reference");
        fr[s.target] = heap_[r.addr];
        break;
    }
    case StatKind::DerefEq: fr[s.target] = ref_value(alloc({operand(fr, s.source)})); break;
    case StatKind::DC: {
        if (s.args.empty()) {
            fr[s.target] = con_value(s.cons);
            break;
        }
        std::vector<Value> words;
        for (const auto& a : s.args) words.push_back(operand(fr, a));
        Value v;
        v.kind = Value::Kind::Block;
        v.name = s.cons;
        v.len = words.size();
        v.addr = alloc(words);
        fr[s.target] = v;
        break;
    }
    case StatKind::ArrayLit: {
        std::vector<Value> words;
        for (const auto& a : s.args) words.push_back(operand(fr, a));
        Value v;
        v.kind = Value::Kind::Array;
        v.len = words.size();
        v.addr = alloc(words);
        fr[s.target] = v;
        break;
    }
    case StatKind::ArrayRef: {
        Value a = operand(fr, s.args[0]);
        long long i = operand(fr, s.args[1]).num;
        if (i < 0 || static_cast<std::size_t>(i) >= a.len)
            throw RunError("array index " + std::to_string(i) + " out of range at " +
                           f.point_label(s.point));
        fr[s.target] = ref_value(a.addr + static_cast<std::size_t>(i));
        break;
    }
    case StatKind::Assign: {
        Value r = operand(fr, s.target);
        if (r.kind != Value::Kind::Ref) throw std::logic_error("assigning through a non-reference");
        heap_[r.addr] = operand(fr, s.source);
        break;
    }
    case StatKind::App: {
        std::vector<Value> args;
        for (const auto& a : s.args) args.push_back(operand(fr, a));
        Value fv = operand(fr, s.source);
        fr[s.target] = apply(fv, args);
        break;
    }
    case StatKind::Case: {
        Value v = operand(fr, s.source);
        const Alt* alt = nullptr;
        for (const auto& a : s.alts)
            if (a.cons == v.name) alt = &a;
        if (!alt) throw RunError("no alternative for " + v.name + " at " + f.point_label(s.point));
        for (std::size_t i = 0; i < alt->refVars.size(); ++i)
            fr[alt->refVars[i]] = ref_value(v.addr + i);
        observe(f, alt->point, fr);
        exec_block(f, alt->body, fr);
        break;
    }
    }
    observe(f, s.point, fr);
}

// ---- literals ----

namespace {

class LiteralParser {
public:
    LiteralParser(std::string_view text, const Program& p, Interpreter& in)
        : text_(text), prog_(p), interp_(in) {}

    Value parse() {
        Value v = value();
        skip_ws();
        if (i_ != text_.size()) fail("unexpected text");
        return v;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw std::runtime_error(msg + " in literal '" + std::string(text_) + "' at offset " +
                                 std::to_string(i_));
    }

    void skip_ws() {
        while (i_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[i_]))) ++i_;
    }

    bool at(char c) {
        skip_ws();
        return i_ < text_.size() && text_[i_] == c;
    }

    std::string word() {
        skip_ws();
        std::size_t b = i_;
        if (i_ < text_.size() && text_[i_] == '-') ++i_;
        while (i_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[i_])) || text_[i_] == '_' ||
                text_[i_] == '\''))
            ++i_;
        if (b == i_) fail("expected a value");
        return std::string(text_.substr(b, i_ - b));
    }

    bool at_atom() {
        skip_ws();
        if (i_ >= text_.size()) return false;
        char c = text_[i_];
        return c == '(' || c == '-' || std::isalnum(static_cast<unsigned char>(c));
    }

    Value value() {
        if (at('(') || at('[')) return atom();
        std::size_t save = i_;
        std::string w = word();
        if (w == "ref") return ref_value(interp_.alloc({atom()}));
        if (w == "array") {
            if (!at('[')) fail("expected '['");
            ++i_;
            std::vector<Value> words;
            while (!at(']')) {
                words.push_back(value());
                if (at(',')) ++i_;
                else if (!at(']')) fail("expected ',' or ']'");
            }
            ++i_;
            Value v;
            v.kind = Value::Kind::Array;
            v.len = words.size();
            v.addr = interp_.alloc(words);
            return v;
        }
        if (auto ci = prog_.types.find_cons(w)) {
            std::size_t n = ci->def().argTypes.size();
            if (n == 0) return con_value(w);
            std::vector<Value> words;
            for (std::size_t k = 0; k < n; ++k) {
                if (!at_atom()) fail("constructor " + w + " needs " + std::to_string(n) + " arguments");
                words.push_back(atom());
            }
            Value v;
            v.kind = Value::Kind::Block;
            v.name = w;
            v.len = n;
            v.addr = interp_.alloc(words);
            return v;
        }
        i_ = save;
        return atom();
    }

    Value atom() {
        if (at('(')) {
            ++i_;
            if (at(')')) {
                ++i_;
                return con_value("()");
            }
            Value v = value();
            if (!at(')')) fail("expected ')'");
            ++i_;
            return v;
        }
        std::string w = word();
        if (is_int_text(w)) return int_value(std::stoll(w));
        if (auto ci = prog_.types.find_cons(w)) {
            if (!ci->def().argTypes.empty()) fail("constructor " + w + " needs arguments");
            return con_value(w);
        }
        if (prog_.find(w)) return fn_value(w);
        fail("unknown name " + w);
    }

    std::string_view text_;
    std::size_t i_ = 0;
    const Program& prog_;
    Interpreter& interp_;
};

} // namespace

Value parse_value(std::string_view text, const Program& program, Interpreter& interp) {
    return LiteralParser(text, program, interp).parse();
}

std::vector<std::string> split_literals(std::string_view text) {
    auto trim = [](std::string s) {
        auto sp = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
        while (!s.empty() && sp(s.back())) s.pop_back();
        std::size_t i = 0;
        while (i < s.size() && sp(s[i])) ++i;
        return s.substr(i);
    };
    std::vector<std::string> out;
    std::string cur;
    int depth = 0;
    for (char c : text) {
        if (c == '(' || c == '[') ++depth;
        if (c == ')' || c == ']') --depth;
        if (c == ',' && depth == 0) {
            out.push_back(trim(cur));
            cur.clear();
            continue;
        }
        cur += c;
    }
    cur = trim(cur);
    if (!cur.empty() || !out.empty()) out.push_back(cur);
    return out;
}

std::string show_value(const Value& v, const std::vector<Value>& heap) {
    std::function<std::string(const Value&, int, bool)> go = [&](const Value& x, int depth,
                                                                   bool nested) -> std::string {
        if (depth > 16) return "...";
        auto wrap = [&](const std::string& s) { return nested ? "(" + s + ")" : s; };
        switch (x.kind) {
        case Value::Kind::Int: return std::to_string(x.num);
        case Value::Kind::Con: return x.name;
        case Value::Kind::Block: {
            std::string s = x.name;
            for (std::size_t i = 0; i < x.len; ++i) s += " " + go(heap[x.addr + i], depth + 1, true);
            return wrap(s);
        }
        case Value::Kind::Ref: return wrap("ref " + go(heap[x.addr], depth + 1, true));
        case Value::Kind::Array: {
            std::string s = "array [";
            for (std::size_t i = 0; i < x.len; ++i)
                s += (i ? ", " : "") + go(heap[x.addr + i], depth + 1, false);
            return wrap(s + "]");
        }
        case Value::Kind::Fn:
            return x.len ? "<" + x.name + " closure/" + std::to_string(x.len) + ">" : x.name;
        }
        return "?";
    };
    return go(v, 0, false);
}

// ---- footprints ----

Footprint footprint(ComponentDomain& dom, const TypePtr& t, const Value& v,
                    const std::vector<Value>& heap) {
    const Automaton& a = dom.automaton(t);
    Footprint fp;
    std::set<std::pair<std::size_t, int>> seen;
    std::set<std::size_t> seenOpaque;

    std::function<void(const Value&, const Component&)> untyped = [&](const Value& x,
                                                                      const Component& c) {
        for (std::size_t w : words_of(x)) {
            fp[c].insert(w);
            if (seenOpaque.insert(w).second) untyped(heap[w], c);
        }
    };
    std::function<void(const Value&, int)> walk;
    auto word = [&](std::size_t addr, int s) {
        fp[a.states[static_cast<std::size_t>(s)].path].insert(addr);
        if (seen.insert({addr, s}).second) walk(heap[addr], s);
    };
    auto need = [&](int s, const std::string& what) {
        if (s < 0)
            throw std::logic_error("value does not match type " + show_type(t) + " (" + what + ")");
        return s;
    };
    walk = [&](const Value& x, int s) {
        const TypePtr& st = a.states[static_cast<std::size_t>(s)].type;
        if (st->kind == Type::Kind::Var) {
            int opaque = need(a.step(s, {"Ref", 1}), "opaque");
            untyped(x, a.states[static_cast<std::size_t>(opaque)].path);
            return;
        }
        switch (x.kind) {
        case Value::Kind::Block:
            for (std::size_t i = 0; i < x.len; ++i)
                word(x.addr + i, need(a.step(s, {x.name, static_cast<int>(i + 1)}), x.name));
            break;
        case Value::Kind::Ref: word(x.addr, need(a.step(s, {"Ref", 1}), "Ref")); break;
        case Value::Kind::Array:
            for (std::size_t i = 0; i < x.len; ++i)
                word(x.addr + i, need(a.step(s, {"Array_", 1}), "array"));
            break;
        case Value::Kind::Fn:
            for (std::size_t i = 0; i < x.len; ++i)
                word(x.addr + i, need(a.step(s, {"Cl", static_cast<int>(i + 1)}), "closure"));
            break;
        default: break;
        }
    };
    walk(v, 0);
    return fp;
}

AliasSet concrete_sharing(ComponentDomain& dom, const FuncDef& f, const Frame& fr,
                          const std::vector<Value>& heap) {
    std::map<std::size_t, std::vector<VarComp>> owners;
    for (const auto& [var, val] : fr) {
        auto it = f.varTypes.find(var);
        if (it == f.varTypes.end()) continue;
        for (const auto& [c, addrs] : footprint(dom, it->second, val, heap))
            for (std::size_t w : addrs) owners[w].push_back({var, c});
    }
    AliasSet out;
    for (const auto& [w, vcs] : owners)
        for (std::size_t i = 0; i < vcs.size(); ++i)
            for (std::size_t j = i; j < vcs.size(); ++j) out.add(vcs[i], vcs[j]);
    return out;
}

// ---- random values ----

bool random_value(const Program& program, const TypePtr& t, Interpreter& interp, std::mt19937& rng,
                  int depth, Value& out) {
    auto pick = [&](std::size_t n) {
        return static_cast<std::size_t>(std::uniform_int_distribution<std::size_t>(0, n - 1)(rng));
    };
    switch (t->kind) {
    case Type::Kind::Var:
    case Type::Kind::Meta: out = int_value(static_cast<long long>(pick(10))); return true;
    case Type::Kind::Ref: {
        Value e;
        if (!random_value(program, t->elem(), interp, rng, depth - 1, e)) return false;
        out = ref_value(interp.alloc({e}));
        return true;
    }
    case Type::Kind::Array: {
        std::vector<Value> words(depth > 0 ? pick(4) : 0);
        for (auto& w : words)
            if (!random_value(program, t->elem(), interp, rng, depth - 1, w)) return false;
        out = Value{};
        out.kind = Value::Kind::Array;
        out.len = words.size();
        out.addr = interp.alloc(words);
        return true;
    }
    case Type::Kind::Fn: {
        if (!t->closureArgs.empty()) return false;
        std::string key = type_key(t);
        for (const auto& f : program.funcs)
            if (type_key(function_type(f)) == key) {
                out = fn_value(f.name);
                return true;
            }
        return false;
    }
    case Type::Kind::Named: break;
    }
    if (t->name == "Int") {
        out = int_value(static_cast<long long>(pick(10)));
        return true;
    }
    const DataDef* d = program.types.find_data(t->name);
    if (!d || d->constructors.empty()) return false;
    std::vector<const ConstructorDef*> choices;
    if (depth <= 0)
        for (const auto& c : d->constructors)
            if (c.argTypes.empty()) choices.push_back(&c);
    if (choices.empty())
        for (const auto& c : d->constructors) choices.push_back(&c);
    const ConstructorDef& c = *choices[pick(choices.size())];
    if (c.argTypes.empty()) {
        out = con_value(c.name);
        return true;
    }
    auto argTypes = program.types.cons_arg_types(t, c);
    std::vector<Value> words(argTypes.size());
    for (std::size_t i = 0; i < argTypes.size(); ++i)
        if (!random_value(program, program.types.resolve(argTypes[i]), interp, rng, depth - 1,
                          words[i]))
            return false;
    out = Value{};
    out.kind = Value::Kind::Block;
    out.name = c.name;
    out.len = words.size();
    out.addr = interp.alloc(words);
    return true;
}

// ---- soundness ----

void SoundnessReport::merge(const SoundnessReport& o) {
    runs += o.runs;
    runsFailed += o.runsFailed;
    observations += o.observations;
    violations += o.violations;
    excused += o.excused;
    for (const auto& d : o.details)
        if (details.size() < 50) details.push_back(d);
}

SoundnessChecker::SoundnessChecker(const Program& program, AnalysisOptions opts,
                                   std::size_t stepLimit)
    : prog_(program), opts_(opts), stepLimit_(stepLimit), result_(analyze(program, opts)),
      dom_(program.types, opts.mode) {
    for (const auto& d : result_.diagnostics())
        if (d.kind == DiagKind::PreconditionViolated || d.kind == DiagKind::PostconditionViolated)
            contractDiags_ = true;
}

void SoundnessChecker::run(Interpreter& interp, const std::string& entry,
                           const std::vector<Value>& args) {
    auto record = [&](const std::string& detail) {
        if (contractDiags_) {
            ++report_.excused;
        } else {
            ++report_.violations;
            if (report_.details.size() < 50) report_.details.push_back(detail);
        }
    };
    interp.set_observer([&](const FuncDef& f, int point, const Frame& fr) {
        ++report_.observations;
        const FunctionResult* r = result_.find(f.name);
        AliasSet concrete = concrete_sharing(dom_, f, fr, interp.heap());
        AliasSet missing = concrete.minus(r->points[static_cast<std::size_t>(point)]);
        if (!missing.empty())
            record(std::string(to_string(opts_.mode)) + " " + f.point_label(point) +
                   ": concrete sharing not predicted: " + missing.to_text());
    });
    ++report_.runs;
    try {
        interp.call(entry, args);
    } catch (const RunError&) {
        ++report_.runsFailed;
    } catch (const std::logic_error& e) {
        record(std::string(to_string(opts_.mode)) + " " + entry + ": " + e.what());
    }
    interp.set_observer(nullptr);
}

void SoundnessChecker::run_literals(const std::string& entry, const std::vector<std::string>& args) {
    Interpreter interp(prog_, stepLimit_);
    std::vector<Value> vals;
    for (const auto& a : args) vals.push_back(parse_value(a, prog_, interp));
    run(interp, entry, vals);
}

bool SoundnessChecker::run_random(const std::string& entry, std::mt19937& rng) {
    const FuncDef* f = prog_.find(entry);
    if (!f) return false;
    Interpreter interp(prog_, stepLimit_);
    std::vector<Value> vals;
    for (const auto& fm : f->sig->formals) {
        Value v;
        if (!random_value(prog_, prog_.types.resolve(fm.type), interp, rng, 3, v)) return false;
        vals.push_back(v);
    }
    run(interp, entry, vals);
    return true;
}

} // namespace pawns
