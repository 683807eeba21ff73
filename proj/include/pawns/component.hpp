// component.hpp
//
// Variable components: folded constructor-argument paths. For every type a
// finite automaton is built whose states are the folded paths and whose
// transitions are single constructor-argument steps.
#pragma once

#include "pawns/type.hpp"

#include <compare>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace pawns {

enum class DomainMode { Old, New };

const char* to_string(DomainMode m);

struct PathStep {
    std::string cons; // data constructor, or `Ref`, `Cl`, `Array_`
    int index = 1;    // 1-based argument position

    auto operator<=>(const PathStep&) const = default;
};

using Component = std::vector<PathStep>;

/// `[Cons.1,RNode.2]`
std::string show_component(const Component& c);
/// Inverse of show_component; throws std::runtime_error on bad text.
Component parse_component(const std::string& text);

/// Folding automaton for one type. State 0 is the root (the empty path).
struct Automaton {
    struct State {
        Component path;
        TypePtr type;
        std::vector<std::pair<PathStep, int>> next;
    };

    TypePtr root;
    std::vector<State> states;
    std::map<Component, int> index;
    std::vector<bool> isComponent; // reached by at least one step

    int find(const Component& c) const {
        auto it = index.find(c);
        return it == index.end() ? -1 : it->second;
    }
    int step(int s, const PathStep& st) const {
        for (const auto& [p, t] : states[static_cast<std::size_t>(s)].next)
            if (p == st) return t;
        return -1;
    }
};

/// Pairs of automaton states.
using StatePairs = std::set<std::pair<int, int>>;

class ComponentDomain {
public:
    ComponentDomain(const TypeEnv& env, DomainMode mode);

    DomainMode mode() const { return mode_; }
    const TypeEnv& env() const { return env_; }

    const Automaton& automaton(const TypePtr& t);

    /// All components of t, sorted.
    std::vector<Component> components_of(const TypePtr& t);
    bool is_component(const TypePtr& t, const Component& c);

    /// Fold a raw path; throws std::runtime_error if the path is illegal.
    Component fc(const TypePtr& t, const Component& raw);

    /// Raw non-empty paths folding to c whose state sequence (root included)
    /// visits c at most twice and every other state at most once.
    std::vector<Component> unfold_preimages(const TypePtr& t, const Component& c);

    /// Pairs (a, b) of states of A and B reached from (sA, sB) by the same
    /// non-empty step sequence (the start pair too when includeStart).
    /// A type-variable state on one side stands for everything reachable
    /// below the other side.
    const StatePairs& relate(const TypePtr& a, int sA, const TypePtr& b, int sB,
                             bool includeStart);

    /// States of t reachable from s in one or more steps.
    std::set<int> reachable(const TypePtr& t, int s);

    /// Components of `owner` obtained by appending a component c of the
    /// type at state s (c is a state of that type) and folding.
    std::set<int> extend(const TypePtr& owner, int s, const TypePtr& sub, int c);

private:
    const TypeEnv& env_;
    DomainMode mode_;
    std::map<std::string, Automaton> automata_;
    std::map<std::tuple<std::string, int, std::string, int, bool>, StatePairs> relations_;

    Automaton build(const TypePtr& t) const;
    std::vector<std::pair<PathStep, TypePtr>> steps(const TypePtr& t) const;
};

} // namespace pawns
