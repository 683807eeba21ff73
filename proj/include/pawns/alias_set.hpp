// alias_set.hpp
//
// Alias sets: symmetric sets of unordered pairs of variable components.
// A pair whose two ends are equal is a self-alias pair and records that
// the component may be non-empty.
#pragma once

#include "pawns/component.hpp"

#include <nlohmann/json_fwd.hpp>

#include <functional>
#include <set>
#include <string>
#include <vector>

namespace pawns {

struct VarComp {
    std::string var;
    Component comp;

    auto operator<=>(const VarComp&) const = default;
};

/// `xs.[Cons.1]`
std::string show_varcomp(const VarComp& vc);

class AliasSet {
public:
    using Pair = std::pair<VarComp, VarComp>; // first <= second

    AliasSet() = default;

    static Pair make_pair(VarComp a, VarComp b);

    void add(const VarComp& a, const VarComp& b);
    void add_self(const VarComp& a) { add(a, a); }
    void add(const Pair& p) { pairs_.insert(p); }
    bool contains(const VarComp& a, const VarComp& b) const;
    bool contains(const Pair& p) const { return pairs_.count(p) > 0; }

    void insert_all(const AliasSet& other);
    void erase(const Pair& p) { pairs_.erase(p); }

    /// Partners of vc, including vc itself when self-paired.
    std::set<VarComp> pairs_with(const VarComp& vc) const;
    /// Pairs with at least one end on variable v.
    std::vector<Pair> pairs_of(const std::string& v) const;

    AliasSet restrict_out(const std::set<std::string>& vars) const;
    AliasSet filter(const std::function<bool(const Pair&)>& keep) const;
    bool is_subset(const AliasSet& b) const;
    bool mentions(const std::string& v) const;
    std::set<std::string> variables() const;

    /// Pairs of `this` missing from b.
    AliasSet minus(const AliasSet& b) const;

    /// Replace every end through `f` (which may yield several images, or
    /// none to drop the pair).
    AliasSet map(const std::function<std::vector<VarComp>(const VarComp&)>& f) const;

    bool empty() const { return pairs_.empty(); }
    std::size_t size() const { return pairs_.size(); }
    auto begin() const { return pairs_.begin(); }
    auto end() const { return pairs_.end(); }
    const std::set<Pair>& pairs() const { return pairs_; }

    /// Every cross pair {x, y} comes with {x, x} and {y, y}.
    bool has_self_closure() const;

    /// Cover by cliques (each clique stands for all pairs of its members,
    /// self pairs included). Requires has_self_closure().
    std::vector<std::vector<VarComp>> cliques() const;
    /// Set-of-sets notation, e.g. `{{xs.[Cons.1], absL.[Cons.1]}, {tp.[Ref.1]}}`.
    /// Falls back to listing every pair as a clique of two when the set is
    /// not self-closed.
    std::string to_text() const;
    /// One pair per line, `a -- b`.
    std::string to_pair_lines() const;

    nlohmann::json to_json() const;
    static AliasSet from_json(const nlohmann::json& j);
    /// Expand the set-of-sets notation.
    static AliasSet from_text(const std::string& text);

    bool operator==(const AliasSet& o) const { return pairs_ == o.pairs_; }

private:
    std::set<Pair> pairs_;
};

AliasSet set_union(const AliasSet& a, const AliasSet& b);

} // namespace pawns
