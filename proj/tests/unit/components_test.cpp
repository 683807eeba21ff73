#include "pawns/component.hpp"
#include "pawns/parser.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace pawns;

namespace {

// Argument types reachable in one step, computed from the data
// definitions directly.
std::vector<std::pair<PathStep, TypePtr>> raw_steps(const TypeEnv& env, const TypePtr& t) {
    std::vector<std::pair<PathStep, TypePtr>> out;
    if (t->kind == Type::Kind::Named) {
        if (const DataDef* d = env.find_data(t->name))
            for (const auto& c : d->constructors) {
                auto args = env.cons_arg_types(t, c);
                for (std::size_t i = 0; i < args.size(); ++i)
                    out.push_back({{c.name, static_cast<int>(i + 1)}, args[i]});
            }
    } else if (t->kind == Type::Kind::Ref) {
        out.push_back({{"Ref", 1}, t->elem()});
    } else if (t->kind == Type::Kind::Array) {
        out.push_back({{"Array_", 1}, t->elem()});
    } else if (t->kind == Type::Kind::Fn) {
        for (std::size_t i = 0; i < t->closureArgs.size(); ++i)
            out.push_back({{"Cl", static_cast<int>(i + 1)}, t->closureArgs[i]});
    } else if (t->kind == Type::Kind::Var) {
        out.push_back({{"Ref", 1}, Type::unit_type()});
    }
    return out;
}

TypePtr step_type(const TypeEnv& env, const TypePtr& t, const PathStep& s) {
    for (const auto& [p, at] : raw_steps(env, t))
        if (p == s) return at;
    return nullptr;
}

// Type reached by following a (folded or raw) path from the root.
TypePtr type_at(const TypeEnv& env, TypePtr t, const Component& c) {
    for (const auto& s : c) {
        t = step_type(env, t, s);
        if (!t) return nullptr;
    }
    return t;
}

// Brute-force folding, one step at a time, written against the folding
// rules rather than the automaton.
Component fold(const TypeEnv& env, DomainMode mode, const TypePtr& root, const Component& raw) {
    Component c;
    for (const auto& s : raw) {
        TypePtr cur = type_at(env, root, c);
        TypePtr next = step_type(env, cur, s);
        Component out = c;
        out.push_back(s);
        if (mode == DomainMode::Old) {
            for (std::size_t k = 0; k <= c.size(); ++k) {
                Component pre(c.begin(), c.begin() + static_cast<long>(k));
                if (type_key(type_at(env, root, pre)) == type_key(next)) {
                    out = pre;
                    break;
                }
            }
        } else {
            for (std::size_t k = 0; k < c.size(); ++k) {
                Component pre(c.begin(), c.begin() + static_cast<long>(k));
                if (c[k].cons == s.cons && type_key(type_at(env, root, pre)) == type_key(cur)) {
                    out = pre;
                    out.push_back(s);
                    break;
                }
            }
        }
        c = out;
    }
    return c;
}

void raw_paths(const TypeEnv& env, const TypePtr& t, int depth, Component& cur,
               std::vector<Component>& out) {
    if (!cur.empty()) out.push_back(cur);
    if (depth == 0) return;
    for (const auto& [s, at] : raw_steps(env, t)) {
        cur.push_back(s);
        raw_paths(env, at, depth - 1, cur, out);
        cur.pop_back();
    }
}

std::set<Component> comps(std::initializer_list<const char*> texts) {
    std::set<Component> out;
    for (const auto* t : texts) out.insert(parse_component(t));
    return out;
}

struct FixtureTypes {
    Program prog;
    std::vector<TypePtr> types;
};

FixtureTypes fixture_types(const std::string& file) {
    FixtureTypes ft{load_program_file(file), {}};
    std::set<std::string> seen;
    for (const auto& f : ft.prog.funcs)
        for (const auto& [v, t] : f.varTypes)
            if (seen.insert(type_key(t)).second) ft.types.push_back(t);
    return ft;
}

const char* kRose = "data RTrees = Nil | Cons RTree RTrees\ndata RTree = RNode Int RTrees\n";

} // namespace

TEST(Components, RoseTreeComponentsOld) {
    Program p = load_program(kRose);
    ComponentDomain dom(p.types, DomainMode::Old);
    auto trees = dom.components_of(Type::named("RTrees"));
    EXPECT_EQ(std::set<Component>(trees.begin(), trees.end()),
              comps({"[]", "[Cons.1]", "[Cons.1,RNode.1]"}));
    auto tree = dom.components_of(Type::named("RTree"));
    EXPECT_EQ(std::set<Component>(tree.begin(), tree.end()), comps({"[]", "[RNode.1]", "[RNode.2]"}));
}

TEST(Components, RoseTreeComponentsNew) {
    Program p = load_program(kRose);
    ComponentDomain dom(p.types, DomainMode::New);
    auto tree = dom.components_of(Type::named("RTree"));
    EXPECT_EQ(std::set<Component>(tree.begin(), tree.end()),
              comps({"[RNode.1]", "[RNode.2,Cons.1]", "[RNode.2]", "[RNode.2,Cons.2]"}));
    EXPECT_EQ(dom.fc(Type::named("RTree"), parse_component("[RNode.2,Cons.2,Cons.2]")),
              parse_component("[RNode.2,Cons.2]"));
    EXPECT_EQ(dom.fc(Type::named("RTree"), parse_component("[RNode.2,Cons.1,RNode.2]")),
              parse_component("[RNode.2]"));
}

TEST(Components, RoseTreePreimagesOld) {
    Program p = load_program(kRose);
    ComponentDomain dom(p.types, DomainMode::Old);
    auto pre = dom.unfold_preimages(Type::named("RTrees"), {});
    EXPECT_EQ(std::set<Component>(pre.begin(), pre.end()), comps({"[Cons.2]", "[Cons.1,RNode.2]"}));
}

TEST(Components, ListAndTreeOld) {
    Program p = load_program("data List a = Nil | Cons a (List a)\ndata Tree = TNil | Node Tree Int Tree\n");
    ComponentDomain dom(p.types, DomainMode::Old);
    auto l = dom.components_of(parse_type("List Int"));
    EXPECT_EQ(std::set<Component>(l.begin(), l.end()), comps({"[]", "[Cons.1]"}));
    auto rt = dom.components_of(parse_type("Ref Tree"));
    EXPECT_EQ(std::set<Component>(rt.begin(), rt.end()), comps({"[Ref.1]", "[Ref.1,Node.2]"}));
}

TEST(Components, IllegalPathThrows) {
    Program p = load_program(kRose);
    ComponentDomain dom(p.types, DomainMode::Old);
    EXPECT_THROW(dom.fc(Type::named("RTree"), parse_component("[Cons.1]")), std::runtime_error);
}

TEST(Components, ShowParseRoundTrip) {
    for (const auto* t : {"[]", "[Ref.1]", "[Cons.1,RNode.2]", "[Cl.3,Array_.1]"})
        EXPECT_EQ(show_component(parse_component(t)), t);
    EXPECT_THROW(parse_component("[Cons]"), std::runtime_error);
}

// Every raw path up to a bounded depth folds as the brute-force folder
// says, the folded paths are exactly the components, and the set is the
// same whatever depth bound is used beyond the point where it stabilizes.
TEST(Components, BruteForceAgreesOnFixtureTypes) {
    for (const auto& file : test::fixture_files()) {
        FixtureTypes ft = fixture_types(file);
        for (auto mode : {DomainMode::Old, DomainMode::New}) {
            ComponentDomain dom(ft.prog.types, mode);
            for (const auto& t : ft.types) {
                std::vector<Component> raws;
                Component cur;
                raw_paths(ft.prog.types, t, 7, cur, raws);
                std::set<Component> folded;
                for (const auto& r : raws) {
                    Component expect = fold(ft.prog.types, mode, t, r);
                    ASSERT_EQ(dom.fc(t, r), expect)
                        << file << " " << show_type(t) << " " << show_component(r);
                    folded.insert(expect);
                }
                auto cs = dom.components_of(t);
                EXPECT_EQ(std::set<Component>(cs.begin(), cs.end()), folded)
                    << file << " " << show_type(t) << " " << to_string(mode);
            }
        }
    }
}
