// report.hpp
//
// Text and JSON renderings of analysis results. Output order is fixed:
// functions in program order, points in numeric order, pairs sorted.
#pragma once

#include "pawns/analysis.hpp"
#include "pawns/interpreter.hpp"

#include <nlohmann/json.hpp>

#include <string>

namespace pawns {

struct ReportOptions {
    bool dumpPoints = false;
};

std::string format_diagnostic(const Diagnostic& d);

std::string analysis_text(const Program& program, const ProgramResult& r, ReportOptions opts);
nlohmann::json analysis_json(const Program& program, const ProgramResult& r, ReportOptions opts);

std::string soundness_text(DomainMode mode, const SoundnessReport& r);
nlohmann::json soundness_json(DomainMode mode, const SoundnessReport& r);

} // namespace pawns
