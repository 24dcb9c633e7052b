#include "pif/report.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace pif {

using nlohmann::json;

namespace {

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double as_number(const json& j) { return j.is_number() ? j.get<double>() : std::nan(""); }

std::string tag_of(const ProtocolReport& r) { return r.protocol == Protocol::PIF ? "pif" : "trm"; }

} // namespace

json report_json(const Scenario& sc, const ChainModel<double>& model, const std::vector<ProtocolReport>& reports,
                 const FileSet& tables) {
    json out;
    out["format"] = "pif-report";
    out["version"] = 1;
    out["scenario"] = {{"name", sc.name}, {"effective", effective_scenario(sc)}};
    out["lattice"] = {{"n_sites", model.n_sites()},
                      {"probe", model.probe()},
                      {"band", {model.band_bottom(), model.band_top()}}};
    json list = json::array();
    for (const auto& r : reports) {
        const std::string tag = tag_of(r);
        json p;
        p["protocol"] = to_string(r.protocol);
        p["degenerate"] = r.degenerate;
        p["window"] = {{"t1", r.window.t1},
                       {"tR", r.window.tR},
                       {"T_rec", r.window.length()},
                       {"threshold", r.window.threshold},
                       {"peak_density", r.window.peak_density},
                       {"peak_time", r.window.peak_time}};
        p["grid"] = {{"fft_size", r.grid.fft_size}, {"dt", r.grid.dt}, {"eta", r.grid.eta}};
        if (r.grid.n_points() > 0) {
            p["grid"]["spacing"] = r.grid.spacing();
            p["grid"]["epsilon_min"] = r.grid.epsilon_min();
            p["grid"]["epsilon_max"] = r.grid.epsilon_max();
        }
        p["greens_t_max"] = r.greens_t_max;
        p["trm_c"] = r.trm_c;
        if (r.protocol == Protocol::TRM) p["trm_record_start"] = r.trm_record_start;
        p["injection"] = {{"site", r.injection.site},
                          {"t0", r.injection.t0},
                          {"dt", r.injection.dt},
                          {"samples", r.injection.size()}};
        p["truncation"] = {{"kept_energy", r.truncation.kept_energy},
                           {"discarded_energy", r.truncation.discarded_energy},
                           {"fraction", number(r.truncation.fraction)},
                           {"max_abs", r.truncation.max_abs}};
        p["echo_fidelity"] = number(r.echo_fidelity);
        p["echo_amplitude"] = number(r.echo_amplitude);
        p["initial_velocity"] = number(r.initial_velocity);
        p["echo_velocity"] = number(r.echo_velocity);
        p["max_reversal_error"] = number(r.max_reversal_error);
        p["outer_norm_start"] = r.outer_norm_start;
        p["outer_norm_injection_end"] = r.outer_norm_injection_end;
        json snaps = json::array();
        for (const auto& s : r.snapshots) snaps.push_back(s.time);
        p["snapshot_times"] = snaps;
        json files = json::object();
        for (const auto& [name, body] : tables) {
            if (name.rfind(tag + "_", 0) == 0) files[name.substr(tag.size() + 1)] = name;
        }
        p["files"] = files;
        list.push_back(p);
    }
    out["protocols"] = list;
    return out;
}

RunResult run_scenario(const Scenario& sc, bool concurrent) {
    sc.validate();
    const auto model = sc.build_model();
    const auto packet = sc.build_packet(model);
    RunResult res;
    switch (sc.mode) {
    case ProtocolMode::PIF: res.reports.push_back(run_pif(model, packet, sc.config)); break;
    case ProtocolMode::TRM: res.reports.push_back(run_trm(model, packet, sc.config)); break;
    case ProtocolMode::Both: {
        auto [pif, trm] = run_both(model, packet, sc.config, concurrent);
        res.reports.push_back(std::move(pif));
        res.reports.push_back(std::move(trm));
        break;
    }
    }
    for (const auto& r : res.reports) res.files.merge(export_figures(model, r));
    res.files["scenario.cfg"] = effective_scenario(sc);
    res.files["report.json"] = report_json(sc, model, res.reports, res.files).dump(2) + "\n";
    return res;
}

FileSet greens_files(const Scenario& sc) {
    sc.validate();
    const auto model = sc.build_model();
    const auto& cfg = sc.config;
    const double t_max = cfg.greens_t_max ? *cfg.greens_t_max : cfg.t_end;
    const double dt = cfg.stepper.dt;
    const double hbar = model.units().hbar;
    const Index n = cfg.fft_size ? *cfg.fft_size : fft_size_for(t_max, dt, cfg.grid_padding);
    const double eta = cfg.eta ? *cfg.eta : hbar / t_max;
    const auto grid = make_energy_grid(n, dt, model.band_bottom(), model.band_top(), eta, cfg.band_margin, hbar);
    const auto response = impulse_response(model, model.probe(), t_max, dt);
    const auto spectrum = to_energy(response, grid);

    FileSet files;
    files["greens_time.csv"] = greens_time_table(response);
    files["greens_energy.csv"] = greens_energy_table(spectrum);
    json meta = {{"format", "pif-greens"},
                 {"version", 1},
                 {"scenario", {{"name", sc.name}, {"effective", effective_scenario(sc)}}},
                 {"probe", model.probe()},
                 {"t_max", response.end_time()},
                 {"dt", dt},
                 {"eta", eta},
                 {"fft_size", n},
                 {"epsilon_min", grid.epsilon_min()},
                 {"epsilon_max", grid.epsilon_max()},
                 {"files", {"greens_time.csv", "greens_energy.csv"}}};
    files["greens.json"] = meta.dump(2) + "\n";
    return files;
}

void write_files(const std::filesystem::path& dir, const FileSet& files) {
    std::filesystem::create_directories(dir);
    for (const auto& [name, body] : files) {
        const auto path = dir / name;
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        f << body;
        f.close();
        if (!f) throw std::runtime_error("cannot write " + path.string());
    }
}

json load_report(const std::string& path) {
    if (!std::filesystem::is_regular_file(path)) throw ScenarioNotFound("report not found: " + path);
    std::ifstream f(path, std::ios::binary);
    json j;
    try {
        j = json::parse(f);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": not a valid report: " + e.what());
    }
    if (!j.is_object() || j.value("format", "") != "pif-report" || !j.contains("protocols") ||
        !j["protocols"].is_array() || !j.contains("scenario")) {
        throw ConfigError(path + ": not a pif report");
    }
    return j;
}

Scenario scenario_from_report(const json& report, const std::string& origin) {
    const auto& s = report.at("scenario");
    if (!s.contains("effective") || !s["effective"].is_string()) throw ConfigError(origin + ": no embedded scenario");
    return parse_scenario(s["effective"].get<std::string>(), origin + "#scenario");
}

namespace {

struct Series {
    std::vector<double> t, density;
};

std::optional<Series> read_probe_series(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) return std::nullopt;
    Series s;
    std::string line;
    std::getline(f, line);
    while (std::getline(f, line)) {
        std::istringstream is(line);
        std::string t, d;
        std::getline(is, t, ',');
        std::getline(is, d, ',');
        s.t.push_back(std::stod(t));
        s.density.push_back(std::stod(d));
    }
    return s;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

} // namespace

CompareResult compare_reports(const json& a, const std::filesystem::path& dir_a, const json& b,
                              const std::filesystem::path& dir_b, const CompareOptions& opt) {
    CompareResult res;
    auto line = [&](const std::string& s) { res.lines.push_back(s); };
    auto check = [&](const std::string& label, double x, double y, double tol) {
        const double d = std::abs(x - y);
        const bool both_nan = std::isnan(x) && std::isnan(y);
        const bool ok = both_nan || d <= tol;
        if (!ok) res.within = false;
        line("  " + label + ": " + fmt(x) + " vs " + fmt(y) + "  |delta| " + (both_nan ? std::string("0") : fmt(d)) +
             " (tol " + fmt(tol) + ")" + (ok ? "" : "  MISMATCH"));
    };

    const auto& pa = a.at("protocols");
    const auto& pb = b.at("protocols");
    std::vector<std::pair<const json*, const json*>> pairs;
    for (const auto& x : pa) {
        for (const auto& y : pb) {
            if (x.at("protocol") == y.at("protocol")) pairs.emplace_back(&x, &y);
        }
    }
    if (pairs.empty() && pa.size() == 1 && pb.size() == 1) pairs.emplace_back(&pa[0], &pb[0]);
    if (pairs.empty()) {
        res.within = false;
        line("no comparable protocols");
        return res;
    }
    if (a.at("scenario").value("effective", "") != b.at("scenario").value("effective", "")) {
        line("note: the effective scenarios differ");
    }

    for (const auto& [x, y] : pairs) {
        const std::string nx = x->at("protocol"), ny = y->at("protocol");
        line(nx == ny ? nx + ":" : nx + " (a) vs " + ny + " (b):");
        check("t1", as_number(x->at("window").at("t1")), as_number(y->at("window").at("t1")), opt.window_tol);
        check("tR", as_number(x->at("window").at("tR")), as_number(y->at("window").at("tR")), opt.window_tol);
        const double fa = as_number(x->at("echo_fidelity")), fb = as_number(y->at("echo_fidelity"));
        check("echo fidelity", fa, fb, opt.fidelity_tol);
        check("max reversal error", as_number(x->at("max_reversal_error")), as_number(y->at("max_reversal_error")),
              opt.error_tol);
        if (nx != ny && std::isfinite(fa) && std::isfinite(fb)) {
            line("  higher fidelity: " + (fa > fb ? nx : fb > fa ? ny : std::string("tie")));
        }

        const auto fx = x->value("files", json::object()), fy = y->value("files", json::object());
        if (fx.contains("probe_series.csv") && fy.contains("probe_series.csv")) {
            const auto sa = read_probe_series(dir_a / fx["probe_series.csv"].get<std::string>());
            const auto sb = read_probe_series(dir_b / fy["probe_series.csv"].get<std::string>());
            if (!sa || !sb) {
                line("  probe series: missing file, skipped");
            } else if (sa->t != sb->t) {
                res.within = false;
                line("  probe series: different time grids  MISMATCH");
            } else {
                double worst = 0;
                for (std::size_t i = 0; i < sa->density.size(); ++i) {
                    worst = std::max(worst, std::abs(sa->density[i] - sb->density[i]));
                }
                const bool ok = worst <= opt.series_tol;
                if (!ok) res.within = false;
                line("  probe density max |delta|: " + fmt(worst) + " (tol " + fmt(opt.series_tol) + ")" +
                     (ok ? "" : "  MISMATCH"));
            }
        }
    }
    return res;
}

} // namespace pif
