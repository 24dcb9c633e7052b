#include "pif/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <map>

#include "pif/metrics.hpp"

namespace pif {

const char* to_string(Protocol p) { return p == Protocol::PIF ? "PIF" : "TRM"; }

void ProtocolConfig::validate() const {
    stepper.validate();
    if (!(t_end > 0)) throw ValidationError("t_end must be positive");
    if (eta && !(*eta > 0)) throw ValidationError("eta must be positive");
    if (greens_t_max && !(*greens_t_max > 0)) throw ValidationError("greens t_max must be positive");
    if (!(grid_padding >= 1)) throw ValidationError("grid padding must be at least 1");
    if (!(band_margin >= 0)) throw ValidationError("band margin must be non-negative");
    if (!(max_truncated_energy > 0)) throw ValidationError("truncation bound must be positive");
    if (!(blowup_factor > 0)) throw ValidationError("blow-up factor must be positive");
    if (!(max_initial_cavity >= 0)) throw ValidationError("initial cavity bound must be non-negative");
    if (!std::isfinite(trm_c)) throw ValidationError("TRM volume c must be finite");
    if (forward_samples < 2) throw ValidationError("need at least 2 stored forward states");
    if (!(significance >= 0 && significance < 1)) throw ValidationError("significance must lie in [0, 1)");
    if (!(support_cutoff > 0 && support_cutoff < 1)) throw ValidationError("support cutoff must lie in (0, 1)");
    for (double t : snapshot_times) {
        if (!(t >= 0)) throw ValidationError("snapshot times must be non-negative");
    }
}

namespace {

Index grid_index(double t, double dt) { return static_cast<Index>(std::llround(t / dt)); }

void require_on_grid(double t, double dt, const char* what) {
    if (std::abs(t / dt - std::round(t / dt)) > 1e-6) {
        throw ValidationError(std::string(what) + " is not on the time grid");
    }
}

} // namespace

ForwardRun run_forward(const ChainModel<double>& model, const WaveField<double>& packet, const ProtocolConfig& cfg) {
    cfg.validate();
    detail::require_same_length(packet.size(), model.n_sites());
    if (packet.time != 0.0) throw ValidationError("the forward run starts from a packet at t = 0");

    const SiteRange cavity = cavity_region(model);
    const double cavity_amp = packet.amplitudes.segment(cavity.first, cavity.size()).cwiseAbs().maxCoeff();
    if (cavity_amp > cfg.max_initial_cavity) {
        throw ProtocolError(ProtocolFailure::InitialCavityOccupied,
                            "max cavity amplitude " + format_double(cavity_amp) + " exceeds " +
                                format_double(cfg.max_initial_cavity));
    }

    const double dt = cfg.stepper.dt;
    const Index steps = grid_index(cfg.t_end / 2, dt);
    ForwardRun fwd;
    fwd.stride = std::max<Index>(1, steps / cfg.forward_samples);
    fwd.record.site = model.probe();
    fwd.record.t0 = 0;
    fwd.record.dt = dt;
    fwd.record.samples.resize(steps + 1);
    std::vector<double> cav;

    const Index s = model.probe();
    double cav_max = -1;
    std::vector<StepObserver<double>> obs{[&](Index n, double t, const ComplexVector<double>& psi) {
        fwd.record.samples[n] = psi[s];
        const double c = psi.segment(cavity.first, cavity.size()).squaredNorm();
        if (c > cav_max) {
            cav_max = c;
            fwd.cavity_peak_time = t;
        }
        if (n % fwd.stride == 0) {
            fwd.states.push_back({psi, t});
            cav.push_back(c);
        }
    }};
    evolve(model, packet, StepperConfig{dt, {}}, nullptr, double(steps) * dt, obs);
    fwd.cavity_norm = Eigen::Map<RealVector<double>>(cav.data(), Index(cav.size()));
    return fwd;
}

WaveField<double> forward_state(const ChainModel<double>& model, const ForwardRun& fwd, const ProtocolConfig& cfg,
                                double t) {
    const double dt = cfg.stepper.dt;
    const Index n = grid_index(t, dt);
    if (n < 0 || n >= fwd.record.size()) throw ValidationError("time outside the forward run");
    const Index k = std::min<Index>(n / fwd.stride, Index(fwd.states.size()) - 1);
    const WaveField<double>& base = fwd.states[std::size_t(k)];
    return evolve(model, base, StepperConfig{dt, {}}, nullptr, base.time + double(n - k * fwd.stride) * dt);
}

RecordingWindow<double> resolve_window(const ForwardRun& fwd, const ProtocolConfig& cfg) {
    const auto& rec = fwd.record;
    RecordingWindow<double> w;
    if (cfg.pinned_t1 && cfg.pinned_tR) {
        Index peak = 0;
        const RealVector<double> dens = rec.samples.cwiseAbs2();
        w.peak_density = dens.maxCoeff(&peak);
        w.peak_time = rec.time(peak);
        w.threshold = cfg.window.threshold;
        if (!(w.peak_density > cfg.window.min_peak)) {
            throw ProtocolError(ProtocolFailure::EmptySignal, "probe density never exceeds the floor");
        }
    } else {
        w = detect_window(rec, cfg.window);
    }
    if (cfg.pinned_t1) w.t1 = *cfg.pinned_t1;
    if (cfg.pinned_tR) w.tR = *cfg.pinned_tR;
    const double dt = rec.dt;
    require_on_grid(w.t1, dt, "t1");
    require_on_grid(w.tR, dt, "tR");
    w.t1 = double(grid_index(w.t1, dt)) * dt;
    w.tR = double(grid_index(w.tR, dt)) * dt;
    if (!(w.t1 >= 0 && w.t1 < w.tR && w.tR <= rec.end_time() + 1e-9)) {
        throw ProtocolError(ProtocolFailure::WindowOutOfRange,
                            "window (" + format_double(w.t1) + ", " + format_double(w.tR) +
                                ") does not fit the forward record");
    }
    if (2 * w.tR > cfg.t_end + 1e-9) {
        throw ProtocolError(ProtocolFailure::WindowOutOfRange, "2 tR exceeds t_end");
    }
    return w;
}

EnergyGrid<double> protocol_grid(const ChainModel<double>& model, const RecordingWindow<double>& window,
                                 const ProtocolConfig& cfg) {
    const double dt = cfg.stepper.dt;
    const double hbar = model.units().hbar;
    const Index n = cfg.fft_size ? *cfg.fft_size : fft_size_for(window.length(), dt, cfg.grid_padding);
    const double eta = cfg.eta ? *cfg.eta : hbar / window.length();
    return make_energy_grid(n, dt, model.band_bottom(), model.band_top(), eta, cfg.band_margin, hbar);
}

GreensData compute_greens(const ChainModel<double>& model, const EnergyGrid<double>& grid, const ProtocolConfig& cfg) {
    GreensData g;
    const double t_max = cfg.greens_t_max ? *cfg.greens_t_max : cfg.t_end;
    g.response = impulse_response(model, model.probe(), t_max, cfg.stepper.dt);
    g.spectrum = to_energy(g.response, grid);
    return g;
}

namespace {

ProtocolReport degenerate_report(const ChainModel<double>& model, const WaveField<double>& packet,
                                 const ProtocolConfig& cfg, Protocol tag) {
    ProtocolReport r;
    r.protocol = tag;
    r.degenerate = true;
    r.trm_c = tag == Protocol::TRM ? cfg.trm_c : 0.0;
    r.echo_fidelity = std::numeric_limits<double>::quiet_NaN();
    r.injection.site = model.probe();
    r.injection.dt = cfg.stepper.dt;
    r.snapshots.push_back(packet);
    r.probe.site = model.probe();
    r.probe.dt = cfg.stepper.dt;
    return r;
}

} // namespace

ProtocolReport run_reversal(const ChainModel<double>& model, const WaveField<double>& packet, const ForwardRun& fwd,
                            const RecordingWindow<double>& window, InjectionResult<double> injection,
                            const ProtocolConfig& cfg, Protocol tag) {
    const double dt = cfg.stepper.dt;
    const double tR = window.tR;
    const Index nR = grid_index(tR, dt);
    const Index m_rec = grid_index(window.length(), dt);

    ProtocolReport rep;
    rep.protocol = tag;
    rep.window = window;
    rep.trm_c = tag == Protocol::TRM ? cfg.trm_c : 0.0;
    rep.injection = std::move(injection.schedule);
    rep.truncation = injection.truncation;

    // Forward stored states inside (t1, tR) give the reversal offsets.
    std::vector<WaveField<double>> forward_pick;
    std::map<Index, std::size_t> wanted;  // backward step -> slot
    const double cav_peak = fwd.cavity_norm.size() ? fwd.cavity_norm.maxCoeff() : 0.0;
    for (std::size_t k = 0; k < fwd.states.size(); ++k) {
        const Index n = Index(k) * fwd.stride;
        if (n >= nR || n <= nR - m_rec) continue;
        wanted[nR - n] = forward_pick.size();
        forward_pick.push_back(fwd.states[k]);
    }
    std::vector<WaveField<double>> backward_pick(forward_pick.size());

    // Snapshot instants, snapped to the grid.
    std::vector<Index> snap_steps{0, grid_index(window.t1, dt), nR, 2 * nR - grid_index(window.t1, dt), 2 * nR};
    for (double t : cfg.snapshot_times) {
        const Index n = grid_index(t, dt);
        if (n <= 2 * nR) snap_steps.push_back(n);
    }
    std::sort(snap_steps.begin(), snap_steps.end());
    snap_steps.erase(std::unique(snap_steps.begin(), snap_steps.end()), snap_steps.end());
    for (Index n : snap_steps) {
        if (n <= nR) rep.snapshots.push_back(forward_state(model, fwd, cfg, double(n) * dt));
    }

    WaveField<double> start = forward_state(model, fwd, cfg, tR);
    const SiteRange outer = outer_region(model);
    const Index s = model.probe();
    rep.outer_norm_start = norm(start, outer);

    rep.probe.site = s;
    rep.probe.t0 = 0;
    rep.probe.dt = dt;
    rep.probe.samples.resize(2 * nR + 1);
    rep.probe.samples.head(nR + 1) = fwd.record.samples.head(nR + 1);

    std::vector<StepObserver<double>> obs{[&](Index n, double t, const ComplexVector<double>& psi) {
        rep.probe.samples[nR + n] = psi[s];
        if (n == rep.injection.size()) rep.outer_norm_injection_end = psi.segment(outer.first, outer.size()).squaredNorm();
        if (auto it = wanted.find(n); it != wanted.end()) backward_pick[it->second] = {psi, t};
        if (n > 0 && std::binary_search(snap_steps.begin(), snap_steps.end(), nR + n)) {
            rep.snapshots.push_back({psi, t});
        }
    }};
    const WaveField<double> echo =
        evolve(model, start, StepperConfig{dt, s}, &rep.injection, double(2 * nR) * dt, obs);

    rep.reversal = cavity_reversal_error(model, tR, forward_pick, backward_pick);
    for (auto& r : rep.reversal) r.significant = r.cavity_norm >= cfg.significance * cav_peak;
    rep.max_reversal_error = max_significant_error(rep.reversal);

    const SiteRange support = support_of(packet, cfg.support_cutoff);
    rep.echo_fidelity = echo_fidelity(echo, packet, cfg.support_cutoff);
    rep.echo_amplitude = std::sqrt(norm(echo, support) / norm(packet, support));
    rep.initial_velocity = centroid_velocity(model, packet, support);
    rep.echo_velocity = centroid_velocity(model, echo, support);
    return rep;
}

namespace {

// The TRM mirrors only the outgoing wave: what reaches the probe once the
// cavity has started to empty.
double trm_gate(const ForwardRun& fwd, const RecordingWindow<double>& window, const ProtocolConfig& cfg) {
    if (!cfg.trm_outgoing_only) return window.t1;
    return std::clamp(fwd.cavity_peak_time, window.t1, window.tR);
}

InjectionResult<double> pif_injection(const ForwardRun& fwd, const RecordingWindow<double>& window,
                                      const EnergyGrid<double>& grid, const GreensData& greens,
                                      const ProtocolConfig& cfg) {
    const auto target = reversed_target(fwd.record, window, grid);
    const auto chi = divide(target, greens.spectrum);
    auto res = to_time(chi, window, fwd.record.site, ToTimeOptions{0.5, cfg.max_truncated_energy});
    const double limit = cfg.blowup_factor * std::sqrt(window.peak_density);
    if (!(res.truncation.max_abs <= limit)) {
        throw ProtocolError(ProtocolFailure::DeconvolutionBlowup,
                            "max |chi| = " + format_double(res.truncation.max_abs) + " exceeds " +
                                format_double(limit));
    }
    return res;
}

InjectionResult<double> trm_injection(const ForwardRun& fwd, const RecordingWindow<double>& window,
                                      const EnergyGrid<double>& grid, const ProtocolConfig& cfg) {
    ProbeRecord<double> rec = fwd.record;
    const double gate = trm_gate(fwd, window, cfg);
    rec.samples.head(std::min(rec.size(), grid_index(gate, rec.dt))).setZero();
    auto target = reversed_target(rec, window, grid);
    target.values *= cfg.trm_c;
    // No spectral correction, so no deconvolution bound: the truncation is only reported.
    return to_time(target, window, fwd.record.site,
                   ToTimeOptions{0.5, std::numeric_limits<double>::infinity()});
}

} // namespace

ProtocolReport run_pif(const ChainModel<double>& model, const WaveField<double>& packet, const ProtocolConfig& cfg) {
    cfg.validate();
    if (norm(packet) == 0.0) return degenerate_report(model, packet, cfg, Protocol::PIF);
    const ForwardRun fwd = run_forward(model, packet, cfg);
    const auto window = resolve_window(fwd, cfg);
    const auto grid = protocol_grid(model, window, cfg);
    const auto greens = compute_greens(model, grid, cfg);
    auto rep = run_reversal(model, packet, fwd, window, pif_injection(fwd, window, grid, greens, cfg), cfg,
                            Protocol::PIF);
    rep.grid = grid;
    rep.greens_t_max = greens.response.end_time();
    return rep;
}

ProtocolReport run_trm(const ChainModel<double>& model, const WaveField<double>& packet, const ProtocolConfig& cfg) {
    cfg.validate();
    if (norm(packet) == 0.0) return degenerate_report(model, packet, cfg, Protocol::TRM);
    const ForwardRun fwd = run_forward(model, packet, cfg);
    const auto window = resolve_window(fwd, cfg);
    const auto grid = protocol_grid(model, window, cfg);
    auto rep = run_reversal(model, packet, fwd, window, trm_injection(fwd, window, grid, cfg), cfg, Protocol::TRM);
    rep.grid = grid;
    rep.trm_record_start = trm_gate(fwd, window, cfg);
    return rep;
}

std::pair<ProtocolReport, ProtocolReport> run_both(const ChainModel<double>& model, const WaveField<double>& packet,
                                                   const ProtocolConfig& cfg, bool concurrent) {
    cfg.validate();
    if (norm(packet) == 0.0) {
        return {degenerate_report(model, packet, cfg, Protocol::PIF),
                degenerate_report(model, packet, cfg, Protocol::TRM)};
    }
    const ForwardRun fwd = run_forward(model, packet, cfg);
    const auto window = resolve_window(fwd, cfg);
    const auto grid = protocol_grid(model, window, cfg);

    auto pif_task = [&] {
        const auto greens = compute_greens(model, grid, cfg);
        auto rep = run_reversal(model, packet, fwd, window, pif_injection(fwd, window, grid, greens, cfg), cfg,
                                Protocol::PIF);
        rep.grid = grid;
        rep.greens_t_max = greens.response.end_time();
        return rep;
    };
    auto trm_task = [&] {
        auto rep = run_reversal(model, packet, fwd, window, trm_injection(fwd, window, grid, cfg), cfg, Protocol::TRM);
        rep.grid = grid;
        rep.trm_record_start = trm_gate(fwd, window, cfg);
        return rep;
    };
    if (!concurrent) {
        auto pif = pif_task();
        return {std::move(pif), trm_task()};
    }
    auto pif_future = std::async(std::launch::async, pif_task);
    auto trm = trm_task();
    return {pif_future.get(), std::move(trm)};
}

} // namespace pif
