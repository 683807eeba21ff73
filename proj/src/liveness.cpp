#include "pawns/liveness.hpp"

namespace pawns {

std::set<std::string> stat_uses(const Stat& s) {
    std::set<std::string> u;
    auto add = [&](const std::string& v) {
        if (!v.empty() && !is_const_operand(v)) u.insert(v);
    };
    switch (s.kind) {
    case StatKind::EqVar:
    case StatKind::EqDeref:
    case StatKind::DerefEq:
    case StatKind::Instype:
    case StatKind::Case: add(s.source); break;
    case StatKind::Assign:
        add(s.target);
        add(s.source);
        break;
    case StatKind::App:
        if (!is_builtin_op(s.source)) add(s.source);
        for (const auto& a : s.args) add(a);
        break;
    case StatKind::DC:
    case StatKind::ArrayLit:
    case StatKind::ArrayRef:
        for (const auto& a : s.args) add(a);
        break;
    default: break;
    }
    return u;
}

namespace {

using Live = std::set<std::string>;

Live live_before(FuncDef& f, const std::vector<Stat>& stats, Live after);

// `after` is the live set after s; returns the set before s.
Live stat_before(FuncDef& f, const Stat& s, const Live& after) {
    if (s.point >= 0) f.liveAt[static_cast<std::size_t>(s.point)] = after;
    switch (s.kind) {
    case StatKind::Seq: return live_before(f, s.body, after);
    case StatKind::Error: return {};
    case StatKind::Case: {
        Live before;
        for (const auto& a : s.alts) {
            Live entry = live_before(f, a.body, after);
            f.liveAt[static_cast<std::size_t>(a.point)] = entry;
            for (const auto& r : a.refVars) entry.erase(r);
            before.insert(entry.begin(), entry.end());
        }
        before.insert(s.source);
        return before;
    }
    default: {
        Live before = after;
        if (s.kind != StatKind::Assign) before.erase(s.target);
        for (const auto& v : stat_uses(s)) before.insert(v);
        return before;
    }
    }
}

Live live_before(FuncDef& f, const std::vector<Stat>& stats, Live after) {
    for (auto it = stats.rbegin(); it != stats.rend(); ++it) after = stat_before(f, *it, after);
    return after;
}

} // namespace

void compute_liveness(FuncDef& f) {
    f.liveAt.assign(static_cast<std::size_t>(f.pointCount), {});
    Live end{f.retVar()};
    f.liveAt[0] = live_before(f, f.body, end);
    for (auto& l : f.liveAt)
        for (const auto& fm : f.sig->formals) l.insert(fm.name);
}

} // namespace pawns
