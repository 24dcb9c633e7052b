#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "pif/metrics.hpp"
#include "pif/scenario.hpp"

namespace pif {

struct RunResult {
    std::vector<ProtocolReport> reports;
    FileSet files;                        ///< report.json, scenario.cfg and the tables
};

/// Runs the scenario's protocol mode. Output is a pure function of the scenario.
RunResult run_scenario(const Scenario& sc, bool concurrent = true);

nlohmann::json report_json(const Scenario& sc, const ChainModel<double>& model,
                           const std::vector<ProtocolReport>& reports, const FileSet& tables);

/// G(t) and G(eps) at the probe, without running a protocol.
FileSet greens_files(const Scenario& sc);

void write_files(const std::filesystem::path& dir, const FileSet& files);

/// Missing file: ScenarioNotFound. Unparsable or wrong shape: ConfigError.
nlohmann::json load_report(const std::string& path);

/// The effective scenario embedded in a report.
Scenario scenario_from_report(const nlohmann::json& report, const std::string& origin);

struct CompareOptions {
    double fidelity_tol = 1e-6;
    double window_tol = 1e-9;
    double error_tol = 1e-6;     ///< max reversal error, absolute
    double series_tol = 1e-9;    ///< probe density, max absolute delta
};

struct CompareResult {
    std::vector<std::string> lines;
    bool within = true;
};

/// Pairs protocols by name; two single-protocol reports of different
/// protocols are compared against each other. Series are read from the
/// report directories when present.
CompareResult compare_reports(const nlohmann::json& a, const std::filesystem::path& dir_a, const nlohmann::json& b,
                              const std::filesystem::path& dir_b, const CompareOptions& opt = {});

} // namespace pif
