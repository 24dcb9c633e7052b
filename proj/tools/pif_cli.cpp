// pif: run the perfect-inverse-filter and time-reversal-mirror protocols on
// scenario files, export Green's functions, compare reports.

#include <cstdio>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "pif/report.hpp"

namespace fs = std::filesystem;
using namespace pif;

namespace {

enum Exit : int {
    Ok = 0,
    Invalid = 2,
    NotFound = 3,
    Runtime = 4,
    ProtocolFailed = 5,
    CompareMismatch = 6,
    Nondeterministic = 7,
};

struct RunArgs {
    std::string input;
    std::optional<double> dt, eta, threshold;
    std::optional<std::string> protocol, out_dir;
    bool seedless_check = false;
};

Scenario load_input(const std::string& path) {
    if (fs::path(path).extension() == ".json") return scenario_from_report(load_report(path), path);
    return load_scenario(path);
}

fs::path output_dir(const Scenario& sc, const std::optional<std::string>& override_dir) {
    if (override_dir) return *override_dir;
    if (!sc.output_dir.empty()) return sc.output_dir;
    return fs::path("out") / sc.name;
}

int cmd_run(const RunArgs& args) {
    Scenario sc = load_input(args.input);
    if (args.dt) sc.config.stepper.dt = *args.dt;
    if (args.eta) sc.config.eta = *args.eta;
    if (args.threshold) sc.config.window.threshold = *args.threshold;
    if (args.protocol) sc.mode = parse_mode(*args.protocol);
    try {
        sc.validate();
    } catch (const ValidationError& e) {
        throw ConfigError(args.input + " (with overrides): " + e.what());
    }

    const auto result = run_scenario(sc);
    if (args.seedless_check) {
        const auto again = run_scenario(sc);
        if (again.files != result.files) {
            for (const auto& [name, body] : result.files) {
                const auto it = again.files.find(name);
                if (it == again.files.end() || it->second != body) std::cerr << "differs: " << name << "\n";
            }
            std::cerr << "determinism check failed\n";
            return Nondeterministic;
        }
        std::cout << "determinism check: " << result.files.size() << " files identical\n";
    }
    const fs::path dir = output_dir(sc, args.out_dir);
    write_files(dir, result.files);

    for (const auto& r : result.reports) {
        std::printf("%s  t1 = %.6g  tR = %.6g  fidelity = %s  max reversal error = %s  truncation = %.3g\n",
                    to_string(r.protocol), r.window.t1, r.window.tR, format_double(r.echo_fidelity).c_str(),
                    format_double(r.max_reversal_error).c_str(), r.truncation.fraction);
    }
    std::printf("wrote %zu files to %s\n", result.files.size(), dir.string().c_str());
    return Ok;
}

int cmd_greens(const std::string& input, const std::optional<std::string>& out_dir) {
    const Scenario sc = load_input(input);
    const auto files = greens_files(sc);
    const fs::path dir = output_dir(sc, out_dir);
    write_files(dir, files);
    std::printf("wrote %zu files to %s\n", files.size(), dir.string().c_str());
    return Ok;
}

int cmd_compare(const std::string& a, const std::string& b) {
    const auto ja = load_report(a);
    const auto jb = load_report(b);
    const auto res = compare_reports(ja, fs::path(a).parent_path(), jb, fs::path(b).parent_path());
    for (const auto& l : res.lines) std::cout << l << "\n";
    std::cout << (res.within ? "reports agree within tolerances\n" : "reports differ beyond tolerances\n");
    return res.within ? Ok : CompareMismatch;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Perfect inverse filter / time-reversal mirror on a tight-binding chain"};
    app.require_subcommand(1);

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "run the protocol(s) of a scenario or of a report's embedded scenario");
    run_cmd->add_option("scenario", run.input, "scenario file (.cfg) or report.json")->required();
    run_cmd->add_option("--dt", run.dt, "time step override");
    run_cmd->add_option("--eta", run.eta, "broadening override");
    run_cmd->add_option("--threshold", run.threshold, "window threshold override (fraction of peak density)");
    run_cmd->add_option("--protocol", run.protocol, "pif, trm or both")
        ->check(CLI::IsMember({"pif", "trm", "both"}));
    run_cmd->add_option("--out-dir", run.out_dir, "output directory");
    run_cmd->add_flag("--seedless-check", run.seedless_check, "run twice and require identical output");

    std::string greens_input;
    std::optional<std::string> greens_out;
    auto* greens_cmd = app.add_subcommand("greens", "export G(t) and G(eps) at the probe");
    greens_cmd->add_option("scenario", greens_input, "scenario file")->required();
    greens_cmd->add_option("--out-dir", greens_out, "output directory");

    std::string report_a, report_b;
    auto* cmp_cmd = app.add_subcommand("compare", "compare two reports");
    cmp_cmd->add_option("a", report_a, "first report.json")->required();
    cmp_cmd->add_option("b", report_b, "second report.json")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? Ok : Invalid;
    }

    try {
        if (*run_cmd) return cmd_run(run);
        if (*greens_cmd) return cmd_greens(greens_input, greens_out);
        if (*cmp_cmd) return cmd_compare(report_a, report_b);
    } catch (const ScenarioNotFound& e) {
        std::cerr << "error: " << e.what() << "\n";
        return NotFound;
    } catch (const ProtocolError& e) {
        std::cerr << "protocol error: " << e.what() << "\n";
        return ProtocolFailed;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return Invalid;
    } catch (const ValidationError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return Invalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return Runtime;
    }
    return Ok;
}
