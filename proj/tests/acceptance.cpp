// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "pif/report.hpp"

using namespace pif;
namespace fs = std::filesystem;
using cd = std::complex<double>;

namespace {

const std::string scenario_dir = PIF_SCENARIO_DIR;
const std::string cli = PIF_CLI;

Scenario scenario(const std::string& name) { return load_scenario(scenario_dir + "/" + name + ".cfg"); }

int failures = 0;

void verdict(int id, bool pass, const std::string& detail, double seconds) {
    if (!pass) ++failures;
    std::printf("CRITERION %2d: %s  %s  [%.1fs]\n", id, pass ? "PASS" : "FAIL", detail.c_str(), seconds);
    std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

void criterion(int id, const std::function<std::pair<bool, std::string>()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    std::pair<bool, std::string> r;
    try {
        r = body();
    } catch (const std::exception& e) {
        r = {false, std::string("exception: ") + e.what()};
    }
    verdict(id, r.first, r.second, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
}

// 1. |norm - 1| < 1e-9 after 1e5 free steps of the fig2 packet at dt = 0.02.
std::pair<bool, std::string> unitarity() {
    const auto sc = scenario("fig2");
    const auto model = sc.build_model();
    const auto packet = sc.build_packet(model);
    const double dt = 0.02;
    const auto end = evolve(model, packet, StepperConfig{dt, {}}, nullptr, 1e5 * dt);
    const double dev = std::abs(norm(end) - 1.0);
    return {dev < 1e-9, fmt("|norm - 1| = %.3e after 1e5 steps (bound 1e-9)", dev)};
}

// 2. |psi_j(t)|^2 vs |J_{j-s}(2t)|^2 for t <= 50 on the free chain.
std::pair<bool, std::string> bessel_propagator() {
    const Index n = 301, s = 150;
    const auto model = build_chain<double>(n, s, PotentialProfile{});
    // CN dispersion error ~ E^3 dt^2 / 12 with E up to 4V.
    const double dt = 2.5e-4;
    WaveField<double> psi{ComplexVector<double>::Zero(n), 0.0};
    psi.amplitudes[s] = 1.0;
    const Index per_unit = static_cast<Index>(std::llround(1.0 / dt));
    double worst = 0, worst_t = 0, oracle_gap = 0;
    std::vector<StepObserver<double>> obs{[&](Index k, double t, const ComplexVector<double>& a) {
        if (k == 0 || k % per_unit != 0) return;
        const auto j = oracle::bessel_j_series(int(s), 2.0 * t);
        for (Index x = 0; x < n; ++x) {
            const double ref = j[std::size_t(std::abs(x - s))] * j[std::size_t(std::abs(x - s))];
            const double err = std::abs(std::norm(a[x]) - ref);
            if (err > worst) {
                worst = err;
                worst_t = t;
            }
        }
        // the two oracles must agree with each other
        for (int m : {0, 1, 7, 40, 99}) {
            oracle_gap = std::max(oracle_gap, std::abs(j[std::size_t(m)] - oracle::bessel_j(m, 2.0 * t)));
        }
    }};
    evolve(model, psi, StepperConfig{dt, {}}, nullptr, 50.0, obs);
    return {worst < 1e-6 && oracle_gap < 1e-12,
            fmt("max |d density| = %.3e at t = %g over t = 1..50 (bound 1e-6), dt = %g; series vs integral oracle %.1e",
                worst, worst_t, dt, oracle_gap)};
}

// 3. to_energy(impulse_response) vs the resolvent over the band interior.
std::pair<bool, std::string> greens_crosscheck() {
    std::string detail;
    bool pass = true;
    for (const std::string name : {"free", "fig4"}) {
        const auto model = scenario(name).build_model();
        const double dt = 0.005, eta = 0.1, t_max = 300.0;  // exp(-eta t_max) ~ 1e-13
        const auto g = impulse_response(model, model.probe(), t_max, dt);
        const auto grid = make_energy_grid(fft_size_for(t_max, dt, 4.0), dt, model.band_bottom(),
                                           model.band_top(), eta, 1.0, 1.0);
        const auto spec = to_energy(g, grid);
        double worst = 0, at = 0;
        Index count = 0;
        for (Index i = 0; i < spec.size(); ++i) {
            const double e = grid.energy(i);
            if (e < model.band_bottom() + 0.5 || e > model.band_top() - 0.5) continue;
            const cd ref = resolvent_element(model, model.probe(), model.probe(), cd(e, eta));
            const double rel = std::abs(spec.values[i] - ref) / std::abs(ref);
            if (rel > worst) {
                worst = rel;
                at = e;
            }
            ++count;
        }
        pass = pass && worst < 1e-3 && count > 100;
        detail += fmt("%s: max rel %.3e at eps = %.3f over %ld energies; ", name.c_str(), worst, at, long(count));
    }
    return {pass, detail + "dt = 0.005, eta = 0.1, interior = band -+ 0.5 (bound 1e-3)"};
}

// 4. Dyson identity, dense-inversion oracle.
std::pair<bool, std::string> dyson_identity() {
    std::vector<std::pair<std::string, Tridiagonal<double>>> chains;
    chains.emplace_back("3-site", free_tridiagonal<double>(3));
    {
        PotentialProfile p;
        p.segments.push_back({20, 24, 0.7});
        chains.emplace_back("50-site", build_chain<double>(50, 10, p).hamiltonian());
    }
    {
        // fig4 barrier and wall; the left padding is cut to 150 sites to keep
        // the dense inversion cheap.
        auto sc = scenario("fig4");
        sc.padding = 150;
        chains.emplace_back("fig4", sc.build_model().hamiltonian());
    }
    const cd energies[] = {{-0.5, 0.1}, {0.7, 0.05}, {2.0, 0.1}, {3.3, 0.2}, {5.0, 0.5}};
    double worst = 0;
    std::string detail;
    for (const auto& [name, h] : chains) {
        const Index n = h.size();
        const Index cut = n / 2 - (n > 3 ? 1 : 0);
        double chain_worst = 0;
        for (const cd z : energies) {
            const Eigen::MatrixXcd g = oracle::dense_resolvent(h, z);
            Tridiagonal<double> split = h;
            split.off[cut] = 0.0;
            const Eigen::MatrixXcd gbar = oracle::dense_resolvent(split, z);
            Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(n, n);
            v(cut, cut + 1) = v(cut + 1, cut) = h.off[cut];
            const double dense_res = (g - gbar - gbar * v * g).cwiseAbs().maxCoeff();
            // the library's own O(n) check, and its resolvent against the dense one
            const auto lib = dyson_check(h, cut, z, n > 50 ? std::vector<Index>{0, cut, cut + 1, n - 1}
                                                           : std::vector<Index>{});
            double col_err = 0;
            for (Index c : {Index(0), cut, n - 1}) {
                col_err = std::max(col_err, (resolvent_column(h, c, z) - g.col(c)).cwiseAbs().maxCoeff());
            }
            chain_worst = std::max({chain_worst, dense_res, lib.dyson, lib.curly, col_err});
        }
        worst = std::max(worst, chain_worst);
        detail += fmt("%s %.2e; ", name.c_str(), chain_worst);
    }
    return {worst < 1e-10, detail + "5 energies each (bound 1e-10)"};
}

// 5. LDOS sum rule on a 200-site free chain.
std::pair<bool, std::string> ldos_sum_rule() {
    const auto h = free_tridiagonal<double>(200);
    const double eta = 0.005;
    const double w = ldos_integral(h, Index(100), eta, -10.0, 14.0, 5e-4);
    const double dev = std::abs(w - 1.0);
    return {dev < 1e-3, fmt("integral = %.6f, |dev| = %.2e (bound 1e-3), eta = %g over [-10, 14]", w, dev, eta)};
}

// 6. fig4 PIF reversal error at dt = 0.02 and its refinement order.
std::pair<bool, std::string> fig4_refinement() {
    auto sc = scenario("fig4");
    const auto model = sc.build_model();
    const auto packet = sc.build_packet(model);
    // Window and spectral period from the dt = 0.02 run, held fixed.
    const auto base = run_pif(model, packet, sc.config);
    double err[3], bulk[3];
    const double dts[3] = {0.02, 0.01, 0.005};
    // diagnostic: the error where the forward cavity is fullest
    auto bulk_error = [](const ProtocolReport& r) {
        const auto it = std::max_element(r.reversal.begin(), r.reversal.end(),
                                         [](const auto& a, const auto& b) { return a.cavity_norm < b.cavity_norm; });
        return it == r.reversal.end() ? std::nan("") : it->error;
    };
    err[0] = base.max_reversal_error;
    bulk[0] = bulk_error(base);
    for (int i = 1; i < 3; ++i) {
        auto cfg = sc.config;
        cfg.stepper.dt = dts[i];
        cfg.pinned_t1 = base.window.t1;
        cfg.pinned_tR = base.window.tR;
        cfg.eta = base.grid.eta;
        cfg.fft_size = static_cast<Index>(std::llround(base.grid.period() / dts[i]));
        cfg.forward_samples = sc.config.forward_samples << i;
        const auto r = run_pif(model, packet, cfg);
        err[i] = r.max_reversal_error;
        bulk[i] = bulk_error(r);
    }
    const double order = std::log2((err[0] - err[1]) / (err[1] - err[2]));
    const bool pass = err[0] < 1e-2 && err[1] < err[0] && err[2] < err[1] && order >= 2.0;
    return {pass, fmt("max errors %.4e, %.4e, %.4e at dt = 0.02, 0.01, 0.005 (bound 1e-2 at 0.02); observed order "
                      "%.2f (bound >= 2); error at fullest cavity %.4e, %.4e, %.4e; window (%g, %g)",
                      err[0], err[1], err[2], order, bulk[0], bulk[1], bulk[2], base.window.t1, base.window.tR)};
}

} // namespace

int main() {
    std::printf("acceptance: scenarios from %s\n", scenario_dir.c_str());
    criterion(1, unitarity);
    criterion(2, bessel_propagator);
    criterion(3, greens_crosscheck);
    criterion(4, dyson_identity);
    criterion(5, ldos_sum_rule);
    criterion(6, fig4_refinement);

    // 7-9 share one run of each shipped scenario.
    std::optional<std::pair<ProtocolReport, ProtocolReport>> fig2, fig4;
    auto both = [&](const char* name) {
        const auto sc = scenario(name);
        const auto model = sc.build_model();
        return run_both(model, sc.build_packet(model), sc.config);
    };
    criterion(7, [&] {
        fig2 = both("fig2");
        const auto& p = fig2->first;
        const double rel = std::abs(p.echo_velocity + p.initial_velocity) / std::abs(p.initial_velocity);
        return std::pair{p.echo_fidelity > 0.99 && rel < 0.02,
                         fmt("fig2 PIF fidelity %.8f (bound > 0.99); velocity %.6f -> %.6f, rel mismatch %.2e "
                             "(bound 2e-2)",
                             p.echo_fidelity, p.initial_velocity, p.echo_velocity, rel)};
    });
    criterion(8, [&] {
        fig4 = both("fig4");
        const auto& [p4, t4] = *fig4;
        bool every = p4.reversal.size() == t4.reversal.size() && !p4.reversal.empty();
        Index worse = 0;
        for (std::size_t i = 0; every && i < p4.reversal.size(); ++i) {
            if (!(p4.reversal[i].error < t4.reversal[i].error)) ++worse;
        }
        every = every && worse == 0;
        if (!fig2) throw std::runtime_error("fig2 run unavailable");
        const auto& [p2, t2] = *fig2;
        const Index nR = static_cast<Index>(std::llround(p2.window.tR / p2.probe.dt));
        const RealVector<double> a = p2.probe.samples.segment(nR, nR + 1).cwiseAbs2();
        const RealVector<double> b = t2.probe.samples.segment(nR, nR + 1).cwiseAbs2();
        const double corr = shape_correlation(a, b);
        const double gap = p4.echo_fidelity - t4.echo_fidelity;
        return std::pair{gap > 0 && every && corr > 0.95,
                         fmt("fig4 fidelity PIF %.6f vs TRM %.6f (gap %.3e > 0); PIF error smaller at %zu/%zu "
                             "sampled dt; fig2 probe-density shape correlation %.5f (bound > 0.95)",
                             p4.echo_fidelity, t4.echo_fidelity, gap, p4.reversal.size() - std::size_t(worse),
                             p4.reversal.size(), corr)};
    });
    criterion(9, [&] {
        if (!fig2 || !fig4) throw std::runtime_error("scenario runs unavailable");
        std::string detail;
        bool pass = true;
        for (const auto* r : {&fig2->first, &fig4->first}) {
            pass = pass && r->outer_norm_injection_end > r->outer_norm_start;
            detail += fmt("%s outer norm %.6f -> %.6f; ", r == &fig2->first ? "fig2" : "fig4", r->outer_norm_start,
                          r->outer_norm_injection_end);
        }
        return std::pair{pass, detail + "strict increase over the PIF injection"};
    });
    criterion(10, [&] {
        const fs::path root = fs::temp_directory_path() / "pif_acceptance_determinism";
        fs::remove_all(root);
        const std::string base = cli + " run " + scenario_dir + "/fig2.cfg --out-dir ";
        for (const char* run : {"a", "b"}) {
            const std::string cmd = base + (root / run).string() + " > " + (root.string() + "_" + run + ".log");
            if (std::system(cmd.c_str()) != 0) throw std::runtime_error("cli run failed: " + cmd);
        }
        std::size_t files = 0, differ = 0;
        for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
            if (!e.is_regular_file()) continue;
            ++files;
            const auto other = root / "b" / fs::relative(e.path(), root / "a");
            auto slurp = [](const fs::path& p) {
                std::ifstream f(p, std::ios::binary);
                std::ostringstream s;
                s << f.rdbuf();
                return s.str();
            };
            if (!fs::exists(other) || slurp(e.path()) != slurp(other)) ++differ;
        }
        std::size_t files_b = 0;
        for (const auto& e : fs::recursive_directory_iterator(root / "b")) files_b += e.is_regular_file();
        fs::remove_all(root);
        return std::pair{files > 0 && differ == 0 && files == files_b,
                         fmt("%zu files, %zu differ (two `run scenarios/fig2.cfg`)", files, differ)};
    });

    std::printf("acceptance: %d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
