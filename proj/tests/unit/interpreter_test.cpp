#include "pawns/interpreter.hpp"
#include "pawns/parser.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace pawns;

namespace {

std::map<Component, std::set<std::size_t>> nonempty(const Footprint& fp) {
    std::map<Component, std::set<std::size_t>> out;
    for (const auto& [c, ws] : fp)
        if (!ws.empty()) out[c] = ws;
    return out;
}

const char* kRose = "data RTrees = Nil | Cons RTree RTrees\ndata RTree = RNode Int RTrees\n";

} // namespace

TEST(Interpreter, BuildsSearchTree) {
    Program p = test::fixture("bst.pcore");
    Interpreter in(p);
    Value xs = parse_value("Cons 2 (Cons 1 (Cons 3 Nil))", p, in);
    Value t = in.call("list_bst", {xs});
    EXPECT_EQ(show_value(t, in.heap()), "Node (Node TNil 1 TNil) 2 (Node TNil 3 TNil)");
}

TEST(Interpreter, ClosuresAndPartialApplication) {
    Program p = test::fixture("closure.pcore");
    Interpreter in(p);
    Value r = in.call("push_three", {parse_value("Cons 1 Nil", p, in)});
    EXPECT_EQ(show_value(r, in.heap()), "Cons 3 (Cons 1 Nil)");
    EXPECT_EQ(show_value(in.call("twice", {parse_value("4", p, in)}), in.heap()), "5");
}

TEST(Interpreter, StepLimitAndError) {
    Program p = load_program("fn spin(x: Int) -> ret: Int\n{\n    ret = spin x\n}\n"
                             "fn boom(x: Int) -> ret: Int\n{\n    error\n}\n");
    Interpreter in(p, 500);
    EXPECT_THROW(in.call("spin", {parse_value("1", p, in)}), StepLimitExceeded);
    Interpreter in2(p);
    EXPECT_THROW(in2.call("boom", {parse_value("1", p, in2)}), RunError);
}

TEST(Interpreter, LiteralSplitting) {
    EXPECT_EQ(split_literals("1, Cons 1 (Cons 2 Nil), array [1, 2]"),
              (std::vector<std::string>{"1", "Cons 1 (Cons 2 Nil)", "array [1, 2]"}));
    EXPECT_TRUE(split_literals("").empty());
}

TEST(Footprint, RoseNodeOld) {
    Program p = load_program(kRose);
    Interpreter in(p);
    ComponentDomain dom(p.types, DomainMode::Old);
    Value t = parse_value("RNode 2 Nil", p, in);
    ASSERT_EQ(t.kind, Value::Kind::Block);
    auto fp = nonempty(footprint(dom, Type::named("RTree"), t, in.heap()));
    std::map<Component, std::set<std::size_t>> expect = {
        {parse_component("[RNode.1]"), {t.addr}},
        {parse_component("[RNode.2]"), {t.addr + 1}},
    };
    EXPECT_EQ(fp, expect);
}

TEST(Footprint, IntHasNoWords) {
    Program p = load_program(kRose);
    Interpreter in(p);
    ComponentDomain dom(p.types, DomainMode::New);
    EXPECT_TRUE(nonempty(footprint(dom, Type::int_type(), parse_value("7", p, in), in.heap())).empty());
}

TEST(Footprint, CyclicListTerminates) {
    Program p = load_program("data List a = Nil | Cons a (List a)\n"
                             "fn cyc() -> ret: List Int\n{\n    n = Nil\n    c = Cons 1 n\n"
                             "    case c {\n        Cons *h *t -> {\n            *!t := c !c\n"
                             "            ret = c\n        }\n        | Nil -> ret = c\n    }\n}\n");
    Interpreter in(p);
    Value c = in.call("cyc", {});
    ComponentDomain dom(p.types, DomainMode::Old);
    auto fp = nonempty(footprint(dom, parse_type("List Int"), c, in.heap()));
    std::map<Component, std::set<std::size_t>> expect = {
        {parse_component("[]"), {c.addr + 1}},
        {parse_component("[Cons.1]"), {c.addr}},
    };
    EXPECT_EQ(fp, expect);
}

// Components of a freshly built value cover disjoint words.
TEST(Footprint, FreshValuesPartition) {
    std::mt19937 rng(11);
    for (const auto& file : test::fixture_files()) {
        Program p = load_program_file(file);
        for (auto mode : {DomainMode::Old, DomainMode::New}) {
            ComponentDomain dom(p.types, mode);
            for (const auto& f : p.funcs)
                for (const auto& fm : f.sig->formals) {
                    if (fm.type->is_fn()) continue;
                    for (int i = 0; i < 5; ++i) {
                        Interpreter in(p);
                        Value v;
                        if (!random_value(p, fm.type, in, rng, 3, v)) break;
                        std::map<std::size_t, Component> owner;
                        for (const auto& [c, ws] : footprint(dom, fm.type, v, in.heap()))
                            for (auto w : ws) {
                                auto [it, fresh] = owner.emplace(w, c);
                                EXPECT_TRUE(fresh) << file << " " << f.name << " " << fm.name << " word " << w
                                                   << " in " << show_component(it->second) << " and "
                                                   << show_component(c);
                            }
                    }
                }
        }
    }
}

TEST(ConcreteSharing, RoseSingletonMatchesDescription) {
    Program p = test::fixture("rtrees.pcore");
    Interpreter in(p);
    ComponentDomain dom(p.types, DomainMode::Old);
    AliasSet at2;
    bool seen = false;
    in.set_observer([&](const FuncDef& f, int point, const Frame& fr) {
        if (f.name == "singleton" && point == 2) {
            at2 = concrete_sharing(dom, f, fr, in.heap());
            seen = true;
        }
    });
    in.call("singleton", {});
    ASSERT_TRUE(seen);
    EXPECT_EQ(at2, AliasSet::from_text("{{t.[RNode.1], ts.[Cons.1,RNode.1]}, {t.[RNode.2], ts.[]}, "
                                       "{ts.[Cons.1]}}"));
}

// Assignment writes exactly one existing word.
TEST(ConcreteSharing, AssignTouchesOneWord) {
    Program p = test::fixture("bst.pcore");
    Interpreter in(p);
    std::map<int, std::vector<Value>> snap;
    in.set_observer([&](const FuncDef& f, int point, const Frame&) {
        if (f.name == "bst_insert_du" && (point == 5 || point == 6) && !snap.count(point))
            snap[point] = in.heap();
    });
    Value tp = parse_value("ref TNil", p, in);
    in.call("bst_insert_du", {parse_value("4", p, in), tp});
    ASSERT_TRUE(snap.count(5) && snap.count(6));
    const auto& before = snap[5];
    const auto& after = snap[6];
    ASSERT_EQ(before.size(), after.size());
    int changed = 0;
    for (std::size_t i = 0; i < before.size(); ++i) {
        const Value& a = before[i];
        const Value& b = after[i];
        if (a.kind != b.kind || a.num != b.num || a.name != b.name || a.addr != b.addr || a.len != b.len)
            ++changed;
    }
    EXPECT_EQ(changed, 1);
}

TEST(ConcreteSharing, OnlyComponentsAppear) {
    std::mt19937 rng(5);
    for (const auto& file : test::fixture_files()) {
        Program p = load_program_file(file);
        for (auto mode : {DomainMode::Old, DomainMode::New}) {
            ComponentDomain dom(p.types, mode);
            for (const auto& f : p.funcs) {
                Interpreter in(p, 20000);
                in.set_observer([&](const FuncDef& g, int, const Frame& fr) {
                    for (const auto& [x, y] : concrete_sharing(dom, g, fr, in.heap()))
                        for (const auto* e : {&x, &y}) {
                            TypePtr t = g.varTypes.at(e->var);
                            EXPECT_TRUE(dom.is_component(t, e->comp)) << show_varcomp(*e);
                        }
                });
                std::vector<Value> args;
                bool ok = true;
                for (const auto& fm : f.sig->formals) {
                    Value v;
                    if (!random_value(p, fm.type, in, rng, 3, v)) ok = false;
                    args.push_back(v);
                }
                if (!ok) continue;
                try {
                    in.call(f.name, args);
                } catch (const RunError&) {
                }
            }
        }
    }
}

TEST(Soundness, FixturesHaveNoViolations) {
    std::mt19937 rng(3);
    for (const auto& file : test::fixture_files()) {
        Program p = load_program_file(file);
        for (auto mode : {DomainMode::Old, DomainMode::New}) {
            SoundnessChecker chk(p, {mode, false}, 20000);
            for (const auto& f : p.funcs)
                for (int i = 0; i < 10; ++i)
                    if (!chk.run_random(f.name, rng)) break;
            EXPECT_EQ(chk.report().violations, 0u) << file << " " << to_string(mode);
        }
    }
}

// The oracle is not vacuous: drop one pair from the analysis and it is caught.
TEST(Soundness, WeakenedResultIsCaught) {
    Program p = test::fixture("rtrees.pcore");
    SoundnessChecker chk(p, {DomainMode::Old, false});
    auto& pts = chk.analysis().functions.at(0).points;
    pts.at(2).erase(AliasSet::make_pair({"t", parse_component("[RNode.2]")}, {"ts", parse_component("[]")}));
    chk.run_literals("singleton", {});
    EXPECT_GT(chk.report().violations, 0u);
}

TEST(Interpreter, ColoursHeadUpdate) {
    Program p = test::fixture("colours.pcore");
    Interpreter in(p);
    ComponentDomain dom(p.types, DomainMode::New);
    std::map<int, Frame> frames;
    std::map<int, std::vector<Value>> heaps;
    std::map<int, AliasSet> sharing;
    in.set_observer([&](const FuncDef& f, int point, const Frame& fr) {
        if (f.name != "recolour") return;
        frames[point] = fr;
        heaps[point] = in.heap();
        sharing[point] = concrete_sharing(dom, f, fr, in.heap());
    });
    Value r = in.call("recolour", {});
    EXPECT_EQ(show_value(r, in.heap()), "Cons Red (Cons Red Nil)");
    // Point 4 is the Cons branch entry, 6 is after the update.
    ASSERT_TRUE(frames.count(4) && frames.count(6));
    std::size_t word = frames[4].at("headp").addr;
    EXPECT_EQ(heaps[4][word].name, "Blue");
    EXPECT_EQ(heaps[6][word].name, "Red");
    EXPECT_TRUE(sharing[4].contains({"headp", parse_component("[Ref.1]")}, {"cols", parse_component("[Cons.1]")}));
}

TEST(Interpreter, DerefBindingAllocatesOneWord) {
    Program p = load_program("data List a = Nil | Cons a (List a)\n"
                             "fn mk() -> ret: Ref (List Int)\n{\n    *np = Nil\n    ret = np\n}\n");
    Interpreter in(p);
    std::size_t before = in.heap().size();
    Value r = in.call("mk", {});
    EXPECT_EQ(in.heap().size(), before + 1);
    ASSERT_EQ(r.kind, Value::Kind::Ref);
    EXPECT_EQ(in.heap()[r.addr].name, "Nil");
}

// f2 repoints v1 and v2 at fresh cells, but their old targets are left
// sharing one chain: the old middle cell of v1 now leads to v2's innermost word.
TEST(Interpreter, F2LinksOldTargets) {
    Program p = test::fixture("mutable_params.pcore");
    Interpreter in(p);
    Value v1 = parse_value("ref (ref (ref 1))", p, in);
    Value v2 = parse_value("ref (ref (ref 2))", p, in);
    std::size_t mid1 = in.heap()[v1.addr].addr;
    std::size_t mid2 = in.heap()[v2.addr].addr;
    std::size_t inner2 = in.heap()[mid2].addr;
    in.call("f2", {v1, v2});
    EXPECT_EQ(in.heap()[mid1].kind, Value::Kind::Ref);
    EXPECT_EQ(in.heap()[mid1].addr, inner2);
    EXPECT_NE(in.heap()[v1.addr].addr, mid1);
}

TEST(ConcreteSharing, DisjointValuesGiveSelfPairsOnly) {
    Program p = test::fixture("bst.pcore");
    Interpreter in(p);
    ComponentDomain dom(p.types, DomainMode::Old);
    Frame fr;
    fr["xs"] = parse_value("Cons 1 (Cons 2 Nil)", p, in);
    fr["tp"] = parse_value("ref (Node TNil 3 TNil)", p, in);
    AliasSet s = concrete_sharing(dom, *p.find("list_bst_du"), fr, in.heap());
    EXPECT_FALSE(s.empty());
    for (const auto& [x, y] : s) EXPECT_EQ(x, y);
}

TEST(Soundness, ErrorStopsTheRun) {
    Program p = load_program("fn boom(x: Int) -> ret: Int\n    pre nosharing\n    post nosharing\n{\n"
                             "    y = x\n    error\n}\n");
    SoundnessChecker chk(p, {DomainMode::New, false});
    chk.run_literals("boom", {"1"});
    EXPECT_EQ(chk.report().runsFailed, 1u);
    EXPECT_EQ(chk.report().violations, 0u);
}
