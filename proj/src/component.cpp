#include "pawns/component.hpp"

#include "pawns/syntax.hpp"

#include <cctype>
#include <deque>
#include <functional>
#include <stdexcept>

namespace pawns {

const char* to_string(DomainMode m) { return m == DomainMode::Old ? "old" : "new"; }

std::string show_component(const Component& c) {
    std::string s = "[";
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (i) s += ",";
        s += c[i].cons + "." + std::to_string(c[i].index);
    }
    return s + "]";
}

Component parse_component(const std::string& text) {
    std::size_t i = 0;
    auto ws = [&] {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    };
    ws();
    if (i >= text.size() || text[i] != '[') throw std::runtime_error("component must start with '['");
    ++i;
    Component c;
    ws();
    while (i < text.size() && text[i] != ']') {
        std::size_t dot = text.find('.', i);
        if (dot == std::string::npos) throw std::runtime_error("bad component " + text);
        std::string cons = text.substr(i, dot - i);
        while (!cons.empty() && std::isspace(static_cast<unsigned char>(cons.back()))) cons.pop_back();
        i = dot + 1;
        std::size_t d = i;
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
        if (d == i || cons.empty()) throw std::runtime_error("bad component " + text);
        c.push_back({cons, std::stoi(text.substr(d, i - d))});
        ws();
        if (i < text.size() && text[i] == ',') {
            ++i;
            ws();
        }
    }
    if (i >= text.size()) throw std::runtime_error("unterminated component " + text);
    ++i;
    ws();
    if (i != text.size()) throw std::runtime_error("unexpected text after component " + text);
    return c;
}

ComponentDomain::ComponentDomain(const TypeEnv& env, DomainMode mode) : env_(env), mode_(mode) {}

std::vector<std::pair<PathStep, TypePtr>> ComponentDomain::steps(const TypePtr& t) const {
    std::vector<std::pair<PathStep, TypePtr>> out;
    switch (t->kind) {
    case Type::Kind::Named:
        if (const DataDef* d = env_.find_data(t->name))
            for (const auto& c : d->constructors) {
                auto args = env_.cons_arg_types(t, c);
                for (std::size_t i = 0; i < args.size(); ++i)
                    out.push_back({{c.name, static_cast<int>(i + 1)}, args[i]});
            }
        break;
    case Type::Kind::Ref: out.push_back({{"Ref", 1}, t->elem()}); break;
    case Type::Kind::Array: out.push_back({{"Array_", 1}, t->elem()}); break;
    case Type::Kind::Fn:
        for (std::size_t i = 0; i < t->closureArgs.size(); ++i)
            out.push_back({{"Cl", static_cast<int>(i + 1)}, t->closureArgs[i]});
        break;
    case Type::Kind::Var:
        // An unknown type is one opaque word, as if it were Ref ().
        out.push_back({{"Ref", 1}, Type::unit_type()});
        break;
    case Type::Kind::Meta: break;
    }
    return out;
}

Automaton ComponentDomain::build(const TypePtr& t) const {
    Automaton a;
    a.root = t;
    a.states.push_back({{}, t, {}});
    a.index[{}] = 0;
    std::deque<int> work{0};
    while (!work.empty()) {
        int s = work.front();
        work.pop_front();
        // Copies: a.states may grow below.
        Component path = a.states[static_cast<std::size_t>(s)].path;
        TypePtr st = a.states[static_cast<std::size_t>(s)].type;
        std::string stKey = type_key(st);
        for (const auto& [step, argType] : steps(st)) {
            Component np;
            bool folded = false;
            if (mode_ == DomainMode::Old) {
                // Fold to the nearest-to-root ancestor of the same type.
                std::string argKey = type_key(argType);
                Component prefix;
                for (std::size_t j = 0; j <= path.size(); ++j) {
                    if (j) prefix.push_back(path[j - 1]);
                    int ps = a.find(prefix);
                    if (type_key(a.states[static_cast<std::size_t>(ps)].type) == argKey) {
                        np = prefix;
                        folded = true;
                        break;
                    }
                }
            } else {
                // Fold a repeated constructor of the same owner type back to
                // its first occurrence.
                Component prefix;
                for (std::size_t k = 0; k < path.size(); ++k) {
                    int ps = a.find(prefix);
                    if (path[k].cons == step.cons &&
                        type_key(a.states[static_cast<std::size_t>(ps)].type) == stKey) {
                        np = prefix;
                        np.push_back(step);
                        folded = true;
                        break;
                    }
                    prefix.push_back(path[k]);
                }
            }
            if (!folded) {
                np = path;
                np.push_back(step);
            }
            int target = a.find(np);
            if (target < 0) {
                target = static_cast<int>(a.states.size());
                a.states.push_back({np, argType, {}});
                a.index[np] = target;
                work.push_back(target);
            }
            a.states[static_cast<std::size_t>(s)].next.push_back({step, target});
        }
    }
    a.isComponent.assign(a.states.size(), false);
    for (const auto& st : a.states)
        for (const auto& [p, target] : st.next) a.isComponent[static_cast<std::size_t>(target)] = true;
    return a;
}

const Automaton& ComponentDomain::automaton(const TypePtr& t) {
    std::string key = type_key(t);
    auto it = automata_.find(key);
    if (it != automata_.end()) return it->second;
    return automata_.emplace(key, build(t)).first->second;
}

std::vector<Component> ComponentDomain::components_of(const TypePtr& t) {
    const Automaton& a = automaton(t);
    std::vector<Component> out;
    for (std::size_t i = 0; i < a.states.size(); ++i)
        if (a.isComponent[i]) out.push_back(a.states[i].path);
    std::sort(out.begin(), out.end());
    return out;
}

bool ComponentDomain::is_component(const TypePtr& t, const Component& c) {
    const Automaton& a = automaton(t);
    int s = a.find(c);
    return s >= 0 && a.isComponent[static_cast<std::size_t>(s)];
}

Component ComponentDomain::fc(const TypePtr& t, const Component& raw) {
    const Automaton& a = automaton(t);
    int s = 0;
    for (const auto& st : raw) {
        s = a.step(s, st);
        if (s < 0)
            throw std::runtime_error("illegal path " + show_component(raw) + " for type " +
                                     show_type(t));
    }
    return a.states[static_cast<std::size_t>(s)].path;
}

std::vector<Component> ComponentDomain::unfold_preimages(const TypePtr& t, const Component& c) {
    const Automaton& a = automaton(t);
    int target = a.find(c);
    std::vector<Component> out;
    if (target < 0) return out;
    std::vector<int> visits(a.states.size(), 0);
    Component path;
    std::function<void(int)> go = [&](int s) {
        for (const auto& [st, n] : a.states[static_cast<std::size_t>(s)].next) {
            int limit = n == target ? 2 : 1;
            if (visits[static_cast<std::size_t>(n)] >= limit) continue;
            ++visits[static_cast<std::size_t>(n)];
            path.push_back(st);
            if (n == target) out.push_back(path);
            go(n);
            path.pop_back();
            --visits[static_cast<std::size_t>(n)];
        }
    };
    visits[0] = 1;
    go(0);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::set<int> ComponentDomain::reachable(const TypePtr& t, int s) {
    const Automaton& a = automaton(t);
    std::set<int> seen;
    std::vector<int> work{s};
    while (!work.empty()) {
        int x = work.back();
        work.pop_back();
        for (const auto& [st, n] : a.states[static_cast<std::size_t>(x)].next)
            if (seen.insert(n).second) work.push_back(n);
    }
    return seen;
}

const StatePairs& ComponentDomain::relate(const TypePtr& ta, int sA, const TypePtr& tb, int sB,
                                          bool includeStart) {
    auto key = std::make_tuple(type_key(ta), sA, type_key(tb), sB, includeStart);
    auto it = relations_.find(key);
    if (it != relations_.end()) return it->second;
    const Automaton& A = automaton(ta);
    const Automaton& B = automaton(tb);
    StatePairs out;
    std::set<std::pair<int, int>> seen{{sA, sB}};
    std::vector<std::pair<int, int>> work{{sA, sB}};
    if (includeStart) out.insert({sA, sB});
    auto visit = [&](int a, int b) {
        out.insert({a, b});
        if (seen.insert({a, b}).second) work.push_back({a, b});
    };
    while (!work.empty()) {
        auto [a, b] = work.back();
        work.pop_back();
        const auto& sa = A.states[static_cast<std::size_t>(a)];
        const auto& sb = B.states[static_cast<std::size_t>(b)];
        bool varA = sa.type->kind == Type::Kind::Var;
        bool varB = sb.type->kind == Type::Kind::Var;
        if (varB && !varA) {
            int opaque = B.step(b, {"Ref", 1});
            for (int x : reachable(ta, a)) {
                out.insert({x, opaque});
            }
            continue;
        }
        if (varA && !varB) {
            int opaque = A.step(a, {"Ref", 1});
            for (int y : reachable(tb, b)) {
                out.insert({opaque, y});
            }
            continue;
        }
        for (const auto& [st, na] : sa.next) {
            int nb = B.step(b, st);
            if (nb >= 0) visit(na, nb);
        }
    }
    return relations_.emplace(key, std::move(out)).first->second;
}

std::set<int> ComponentDomain::extend(const TypePtr& owner, int s, const TypePtr& sub, int c) {
    const Automaton& a = automaton(owner);
    const TypePtr& at = a.states[static_cast<std::size_t>(s)].type;
    bool comparable = type_key(at) == type_key(sub) || at->kind == Type::Kind::Var ||
                      sub->kind == Type::Kind::Var;
    if (!comparable) return reachable(owner, s);
    std::set<int> out;
    for (const auto& [x, y] : relate(owner, s, sub, 0, false))
        if (y == c) out.insert(x);
    return out;
}

} // namespace pawns
