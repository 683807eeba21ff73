// pawns-share: sharing analysis, execution and oracle checks for .pcore files.
//
// Exit status: 0 clean, 1 diagnostics or soundness violations (or a run
// stopped by `error` / the step limit), 2 input, parse or type errors.

#include "pawns/analysis.hpp"
#include "pawns/interpreter.hpp"
#include "pawns/load.hpp"
#include "pawns/parser.hpp"
#include "pawns/report.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <random>

using namespace pawns;

namespace {

struct Config {
    std::string input;
    std::string mode = "new";
    std::string format = "text";
    bool dumpPoints = false;
    bool preciseApp = false;
    std::string entry;
    std::string args;
    std::size_t stepLimit = 1000000;
    std::size_t runs = 20;
    unsigned seed = 1;
};

AnalysisOptions analysis_options(const Config& c) {
    AnalysisOptions o;
    o.mode = c.mode == "old" ? DomainMode::Old : DomainMode::New;
    o.preciseApp = c.preciseApp;
    return o;
}

int cmd_analyze(const Config& c) {
    Program p = load_program_file(c.input);
    ProgramResult r = analyze(p, analysis_options(c));
    ReportOptions ro{c.dumpPoints};
    if (c.format == "json")
        std::cout << analysis_json(p, r, ro).dump(2) << "\n";
    else
        std::cout << analysis_text(p, r, ro);
    return r.diagnostics().empty() ? 0 : 1;
}

int cmd_run(const Config& c) {
    Program p = load_program_file(c.input);
    const FuncDef* f = p.find(c.entry);
    if (!f) throw std::runtime_error("no function named " + c.entry);
    Interpreter interp(p, c.stepLimit);
    ComponentDomain dom(p.types, analysis_options(c).mode);
    nlohmann::json trace = nlohmann::json::array();
    std::vector<std::string> lines;
    if (c.dumpPoints)
        interp.set_observer([&](const FuncDef& g, int point, const Frame& fr) {
            AliasSet s = concrete_sharing(dom, g, fr, interp.heap());
            trace.push_back({{"label", g.point_label(point)}, {"sharing", s.to_json()}});
            lines.push_back(g.point_label(point) + "  " + s.to_text());
        });
    std::vector<Value> args;
    for (const auto& lit : split_literals(c.args)) args.push_back(parse_value(lit, p, interp));
    std::string result, error;
    try {
        result = show_value(interp.call(c.entry, args), interp.heap());
    } catch (const RunError& e) {
        error = e.what();
    }
    if (c.format == "json") {
        nlohmann::json j{{"entry", c.entry}, {"steps", interp.steps()}};
        if (error.empty()) j["result"] = result;
        else j["error"] = error;
        if (c.dumpPoints) j["trace"] = trace;
        std::cout << j.dump(2) << "\n";
    } else {
        for (const auto& l : lines) std::cout << l << "\n";
        if (error.empty()) std::cout << result << "\n";
        else std::cout << "stopped: " << error << "\n";
        std::cout << "steps: " << interp.steps() << "\n";
    }
    return error.empty() ? 0 : 1;
}

int cmd_check(const Config& c) {
    Program p = load_program_file(c.input);
    AnalysisOptions o = analysis_options(c);
    SoundnessChecker checker(p, o, c.stepLimit);
    if (!c.entry.empty()) {
        if (!p.find(c.entry)) throw std::runtime_error("no function named " + c.entry);
        checker.run_literals(c.entry, split_literals(c.args));
    } else {
        std::mt19937 rng(c.seed);
        for (const auto& f : p.funcs)
            for (std::size_t i = 0; i < c.runs; ++i)
                if (!checker.run_random(f.name, rng)) break;
    }
    const SoundnessReport& r = checker.report();
    if (c.format == "json")
        std::cout << soundness_json(o.mode, r).dump(2) << "\n";
    else
        std::cout << soundness_text(o.mode, r);
    return r.violations == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sharing analysis for the Pawns core language"};
    app.require_subcommand(1);
    Config c;

    auto common = [&](CLI::App* sub) {
        sub->add_option("input", c.input, "Program file (.pcore)")->required();
        sub->add_option("--mode", c.mode, "Abstract domain")
            ->check(CLI::IsMember({"old", "new"}))
            ->capture_default_str();
        sub->add_option("--format", c.format, "Output format")
            ->check(CLI::IsMember({"text", "json"}))
            ->capture_default_str();
        sub->add_option("--step-limit", c.stepLimit, "Interpreter step budget")->capture_default_str();
        sub->add_flag("--precise-app", c.preciseApp,
                      "Skip closure sharing for calls known to be saturated");
    };

    auto* an = app.add_subcommand("analyze", "Analyze every function and report diagnostics");
    common(an);
    an->add_flag("--dump-points", c.dumpPoints, "Print the alias set at every program point");

    auto* run = app.add_subcommand("run", "Execute a function on literal arguments");
    common(run);
    run->add_option("--entry", c.entry, "Function to call")->required();
    run->add_option("--args", c.args, "Comma-separated argument literals");
    run->add_flag("--dump-points", c.dumpPoints, "Print the concrete sharing at every point reached");

    auto* chk = app.add_subcommand(
        "check-soundness",
        "Compare concrete sharing with the analysis (one run with --entry, random runs otherwise)");
    common(chk);
    chk->add_option("--entry", c.entry, "Function to call");
    chk->add_option("--args", c.args, "Comma-separated argument literals");
    chk->add_option("--runs", c.runs, "Random runs per function without --entry")->capture_default_str();
    chk->add_option("--seed", c.seed, "Random seed")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (an->parsed()) return cmd_analyze(c);
        if (run->parsed()) return cmd_run(c);
        return cmd_check(c);
    } catch (const ParseError& e) {
        std::cerr << c.input << ":" << e.what() << "\n";
    } catch (const TypeError& e) {
        std::cerr << c.input << ":" << to_string(e.pos) << ": type error: " << e.what() << "\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
    }
    return 2;
}
