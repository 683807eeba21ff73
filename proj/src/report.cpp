#include "pawns/report.hpp"

#include <sstream>

namespace pawns {

std::string format_diagnostic(const Diagnostic& d) {
    return d.label() + " (" + to_string(d.pos) + "): " + to_string(d.kind) + ": " + d.message;
}

std::string analysis_text(const Program& program, const ProgramResult& r, ReportOptions opts) {
    std::ostringstream out;
    out << "mode: " << to_string(r.mode) << "\n";
    for (const auto& fr : r.functions) {
        const FuncDef* f = program.find(fr.name);
        out << "\nfunction " << fr.name << "\n";
        if (opts.dumpPoints) {
            for (std::size_t p = 0; p < fr.points.size(); ++p) {
                out << "  " << fr.name << ":" << p << "  ";
                out << (fr.reached[p] ? fr.points[p].to_text() : std::string("unreachable")) << "\n";
            }
        }
        out << "  final: " << fr.finalSet.to_text() << "\n";
        if (f) out << "  end point: " << f->point_label(f->endPoint) << "\n";
        if (fr.diagnostics.empty()) out << "  ok\n";
        for (const auto& d : fr.diagnostics) out << "  " << format_diagnostic(d) << "\n";
    }
    std::size_t n = r.diagnostics().size();
    out << "\n" << n << (n == 1 ? " diagnostic" : " diagnostics") << "\n";
    return out.str();
}

nlohmann::json analysis_json(const Program& program, const ProgramResult& r, ReportOptions opts) {
    nlohmann::json fns = nlohmann::json::array();
    nlohmann::json all = nlohmann::json::array();
    for (const auto& fr : r.functions) {
        const FuncDef* f = program.find(fr.name);
        nlohmann::json j;
        j["name"] = fr.name;
        if (f) j["end_point"] = f->endPoint;
        if (opts.dumpPoints) {
            nlohmann::json pts = nlohmann::json::array();
            for (std::size_t p = 0; p < fr.points.size(); ++p) {
                nlohmann::json pj;
                pj["point"] = p;
                pj["label"] = fr.name + ":" + std::to_string(p);
                pj["reached"] = static_cast<bool>(fr.reached[p]);
                pj["alias_set"] = fr.points[p].to_json();
                pts.push_back(pj);
            }
            j["points"] = pts;
        }
        j["final"] = fr.finalSet.to_json();
        nlohmann::json ds = nlohmann::json::array();
        for (const auto& d : fr.diagnostics) {
            nlohmann::json dj;
            dj["kind"] = to_string(d.kind);
            dj["function"] = d.function;
            dj["point"] = d.point;
            dj["label"] = d.label();
            dj["line"] = d.pos.line;
            dj["column"] = d.pos.column;
            dj["message"] = d.message;
            dj["vars"] = d.vars;
            AliasSet pairs;
            for (const auto& p : d.pairs) pairs.add(p);
            dj["pairs"] = pairs.to_json()["pairs"];
            ds.push_back(dj);
            all.push_back(dj);
        }
        j["diagnostics"] = ds;
        fns.push_back(j);
    }
    return {{"mode", to_string(r.mode)}, {"functions", fns}, {"diagnostics", all}};
}

std::string soundness_text(DomainMode mode, const SoundnessReport& r) {
    std::ostringstream out;
    out << "mode " << to_string(mode) << ": " << r.runs << " runs (" << r.runsFailed
        << " stopped early), " << r.observations << " observations, " << r.violations
        << " violations";
    if (r.excused) out << ", " << r.excused << " excused by contract diagnostics";
    out << "\n";
    for (const auto& d : r.details) out << "  " << d << "\n";
    return out.str();
}

nlohmann::json soundness_json(DomainMode mode, const SoundnessReport& r) {
    return {{"mode", to_string(mode)},       {"runs", r.runs},
            {"runs_failed", r.runsFailed},   {"observations", r.observations},
            {"violations", r.violations},    {"excused", r.excused},
            {"details", r.details}};
}

} // namespace pawns
