#include "pawns/alias_set.hpp"

#include "pawns/parser.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <map>

namespace pawns {

std::string show_varcomp(const VarComp& vc) { return vc.var + "." + show_component(vc.comp); }

AliasSet::Pair AliasSet::make_pair(VarComp a, VarComp b) {
    if (b < a) std::swap(a, b);
    return {std::move(a), std::move(b)};
}

void AliasSet::add(const VarComp& a, const VarComp& b) { pairs_.insert(make_pair(a, b)); }

bool AliasSet::contains(const VarComp& a, const VarComp& b) const {
    return pairs_.count(make_pair(a, b)) > 0;
}

void AliasSet::insert_all(const AliasSet& other) {
    pairs_.insert(other.pairs_.begin(), other.pairs_.end());
}

std::set<VarComp> AliasSet::pairs_with(const VarComp& vc) const {
    std::set<VarComp> out;
    for (const auto& [a, b] : pairs_) {
        if (a == vc) out.insert(b);
        if (b == vc) out.insert(a);
    }
    return out;
}

std::vector<AliasSet::Pair> AliasSet::pairs_of(const std::string& v) const {
    std::vector<Pair> out;
    for (const auto& p : pairs_)
        if (p.first.var == v || p.second.var == v) out.push_back(p);
    return out;
}

AliasSet AliasSet::restrict_out(const std::set<std::string>& vars) const {
    return filter([&](const Pair& p) {
        return !vars.count(p.first.var) && !vars.count(p.second.var);
    });
}

AliasSet AliasSet::filter(const std::function<bool(const Pair&)>& keep) const {
    AliasSet out;
    for (const auto& p : pairs_)
        if (keep(p)) out.pairs_.insert(out.pairs_.end(), p);
    return out;
}

bool AliasSet::is_subset(const AliasSet& b) const {
    return std::includes(b.pairs_.begin(), b.pairs_.end(), pairs_.begin(), pairs_.end());
}

bool AliasSet::mentions(const std::string& v) const {
    for (const auto& p : pairs_)
        if (p.first.var == v || p.second.var == v) return true;
    return false;
}

std::set<std::string> AliasSet::variables() const {
    std::set<std::string> out;
    for (const auto& p : pairs_) {
        out.insert(p.first.var);
        out.insert(p.second.var);
    }
    return out;
}

AliasSet AliasSet::minus(const AliasSet& b) const {
    return filter([&](const Pair& p) { return !b.contains(p); });
}

AliasSet AliasSet::map(const std::function<std::vector<VarComp>(const VarComp&)>& f) const {
    AliasSet out;
    for (const auto& [a, b] : pairs_) {
        auto xs = f(a);
        if (xs.empty()) continue;
        auto ys = f(b);
        for (const auto& x : xs)
            for (const auto& y : ys) out.add(x, y);
    }
    return out;
}

bool AliasSet::has_self_closure() const {
    for (const auto& [a, b] : pairs_)
        if (!(a == b) && (!contains(a, a) || !contains(b, b))) return false;
    return true;
}

std::vector<std::vector<VarComp>> AliasSet::cliques() const {
    std::map<VarComp, std::set<VarComp>> adj;
    std::set<Pair> uncovered;
    for (const auto& [a, b] : pairs_) {
        if (a == b) {
            adj[a];
            continue;
        }
        adj[a].insert(b);
        adj[b].insert(a);
        uncovered.insert({a, b});
    }
    std::vector<std::vector<VarComp>> out;
    std::set<VarComp> used;
    while (!uncovered.empty()) {
        auto [a, b] = *uncovered.begin();
        std::vector<VarComp> clique{a, b};
        for (const auto& [v, ns] : adj) {
            if (v == a || v == b) continue;
            bool all = std::all_of(clique.begin(), clique.end(),
                                   [&](const VarComp& m) { return ns.count(m) > 0; });
            if (all) clique.push_back(v);
        }
        std::sort(clique.begin(), clique.end());
        for (std::size_t i = 0; i < clique.size(); ++i) {
            used.insert(clique[i]);
            for (std::size_t j = i + 1; j < clique.size(); ++j)
                uncovered.erase(make_pair(clique[i], clique[j]));
        }
        out.push_back(std::move(clique));
    }
    for (const auto& [v, ns] : adj)
        if (!used.count(v)) out.push_back({v});
    std::sort(out.begin(), out.end());
    return out;
}

std::string AliasSet::to_text() const {
    std::vector<std::vector<VarComp>> groups;
    if (has_self_closure()) {
        groups = cliques();
    } else {
        for (const auto& [a, b] : pairs_) groups.push_back(a == b ? std::vector{a} : std::vector{a, b});
    }
    std::string s = "{";
    for (std::size_t i = 0; i < groups.size(); ++i) {
        if (i) s += ", ";
        s += "{";
        for (std::size_t j = 0; j < groups[i].size(); ++j) {
            if (j) s += ", ";
            s += show_varcomp(groups[i][j]);
        }
        s += "}";
    }
    return s + "}";
}

std::string AliasSet::to_pair_lines() const {
    std::string s;
    for (const auto& [a, b] : pairs_) s += show_varcomp(a) + " -- " + show_varcomp(b) + "\n";
    return s;
}

nlohmann::json AliasSet::to_json() const {
    nlohmann::json pairs = nlohmann::json::array();
    auto vc = [](const VarComp& v) {
        nlohmann::json comp = nlohmann::json::array();
        for (const auto& st : v.comp) comp.push_back(st.cons + "." + std::to_string(st.index));
        return nlohmann::json{{"var", v.var}, {"comp", comp}};
    };
    for (const auto& [a, b] : pairs_) pairs.push_back(nlohmann::json::array({vc(a), vc(b)}));
    return nlohmann::json{{"pairs", pairs}};
}

AliasSet AliasSet::from_json(const nlohmann::json& j) {
    auto vc = [](const nlohmann::json& o) {
        VarComp v;
        v.var = o.at("var").get<std::string>();
        std::string text = "[";
        bool first = true;
        for (const auto& s : o.at("comp")) {
            if (!first) text += ",";
            first = false;
            text += s.get<std::string>();
        }
        v.comp = parse_component(text + "]");
        return v;
    };
    AliasSet out;
    for (const auto& p : j.at("pairs")) {
        if (!p.is_array() || p.size() != 2) throw std::runtime_error("pair must have two elements");
        out.add(vc(p[0]), vc(p[1]));
    }
    return out;
}

AliasSet AliasSet::from_text(const std::string& text) {
    AliasSet out;
    for (const auto& clique : parse_cliques(text)) {
        std::vector<VarComp> ms;
        for (const auto& m : clique) {
            VarComp v{m.var, {}};
            for (const auto& [c, i] : m.path) v.comp.push_back({c, i});
            ms.push_back(std::move(v));
        }
        for (std::size_t i = 0; i < ms.size(); ++i)
            for (std::size_t j = i; j < ms.size(); ++j) out.add(ms[i], ms[j]);
    }
    return out;
}

AliasSet set_union(const AliasSet& a, const AliasSet& b) {
    AliasSet out = a;
    out.insert_all(b);
    return out;
}

} // namespace pawns
