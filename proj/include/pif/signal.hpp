#pragma once

#include <cmath>
#include <complex>
#include <string>

#include "pif/spectral.hpp"

namespace pif {

/// (t1, tR): the span of the probe record that carries the signal.
template <typename Real>
struct RecordingWindow {
    Real t1{0};
    Real tR{0};
    Real threshold{0};
    Real peak_density{0};
    Real peak_time{0};

    Real length() const { return tR - t1; }
};

struct WindowOptions {
    double threshold = 1e-8;   ///< fraction of the peak density
    double guard = 50.0;       ///< hbar/V the tail must stay quiet after tR
    double min_peak = 1e-12;   ///< absolute density below which nothing arrived
};

/// t1 = last sample before the peak with density < threshold * peak (record
/// start if none). tR = first sample after the peak from which the density
/// stays below threshold * peak for the whole guard interval.
template <typename Real>
RecordingWindow<Real> detect_window(const ProbeRecord<Real>& record, const WindowOptions& opt = {}) {
    if (record.size() == 0) throw ValidationError("empty probe record");
    if (!(opt.threshold > 0 && opt.threshold < 1)) throw ValidationError("window threshold must lie in (0, 1)");
    if (!(opt.guard >= 0)) throw ValidationError("window guard must be non-negative");

    const RealVector<Real> dens = record.samples.cwiseAbs2();
    Index peak = 0;
    const Real peak_density = dens.maxCoeff(&peak);
    if (!(peak_density > Real(opt.min_peak))) {
        throw ProtocolError(ProtocolFailure::EmptySignal,
                            "probe density never exceeds " + std::to_string(opt.min_peak));
    }
    const Real level = Real(opt.threshold) * peak_density;

    Index first = 0;
    for (Index n = peak - 1; n >= 0; --n) {
        if (dens[n] < level) {
            first = n;
            break;
        }
    }

    const auto guard_steps = static_cast<Index>(std::ceil(Real(opt.guard) / record.dt - Real(1e-9)));
    Index quiet_since = -1;
    Index last = -1;
    for (Index n = peak + 1; n < record.size(); ++n) {
        if (dens[n] < level) {
            if (quiet_since < 0) quiet_since = n;
            if (n - quiet_since >= guard_steps) {
                last = quiet_since;
                break;
            }
        } else {
            quiet_since = -1;
        }
    }
    if (last < 0) {
        throw ProtocolError(ProtocolFailure::NoDecay,
                            "probe density does not stay below " + std::to_string(opt.threshold) +
                                " of its peak before t = " + std::to_string(record.end_time()));
    }

    RecordingWindow<Real> w;
    w.t1 = record.time(first);
    w.tR = record.time(last);
    w.threshold = Real(opt.threshold);
    w.peak_density = peak_density;
    w.peak_time = record.time(peak);
    return w;
}

namespace detail {

template <typename Real>
Index window_steps(const RecordingWindow<Real>& window, Real dt) {
    const Real steps = window.length() / dt;
    const auto m = static_cast<Index>(std::llround(steps));
    if (m < 1 || std::abs(steps - Real(m)) > Real(1e-6)) {
        throw ProtocolError(ProtocolFailure::WindowOutOfRange, "window length is not a positive multiple of dt");
    }
    return m;
}

} // namespace detail

/// Target series conj(psi(x_s, tR - m dt)) placed at tR + m dt, m = 0 .. T_rec/dt.
template <typename Real>
ProbeRecord<Real> mirror_conjugate(const ProbeRecord<Real>& record, const RecordingWindow<Real>& window) {
    const Index m_count = detail::window_steps(window, record.dt);
    const Index end = record.index_of(window.tR);
    if (std::abs(record.time(end) - window.tR) > Real(1e-6) * record.dt || end >= record.size() ||
        end - m_count < 0) {
        throw ProtocolError(ProtocolFailure::WindowOutOfRange, "window is not inside the probe record");
    }
    ProbeRecord<Real> out;
    out.site = record.site;
    out.t0 = window.tR;
    out.dt = record.dt;
    out.samples.resize(m_count + 1);
    for (Index m = 0; m <= m_count; ++m) out.samples[m] = std::conj(record.samples[end - m]);
    return out;
}

/// Energy representation of the reversed evolution at the probe, damped from tR.
template <typename Real>
SpectralSignal<Real> reversed_target(const ProbeRecord<Real>& record, const RecordingWindow<Real>& window,
                                     const EnergyGrid<Real>& grid) {
    if (std::abs(record.dt - grid.dt) > Real(1e-12) * grid.dt) {
        throw ValidationError("record dt differs from the energy grid dt");
    }
    return damped_transform(mirror_conjugate(record, window), grid, window.tR);
}

template <typename Real>
struct TruncationReport {
    Real kept_energy{0};       ///< sum |chi|^2 dt inside the window
    Real discarded_energy{0};  ///< same, outside the window
    Real fraction{0};          ///< discarded / (kept + discarded)
    Real max_abs{0};           ///< largest kept |chi|
};

struct ToTimeOptions {
    double offset = 0.5;                ///< sample position within each step (0.5: midpoints)
    double max_truncated_energy = 1e-4; ///< bound on the discarded energy fraction
};

template <typename Real>
struct InjectionResult {
    InjectionSchedule<Real> schedule;
    TruncationReport<Real> truncation;
};

/// Back to time on [tR, tR + T_rec]; samples past the window are discarded
/// once their energy fraction is checked against the bound.
template <typename Real>
InjectionResult<Real> to_time(const SpectralSignal<Real>& spectral, const RecordingWindow<Real>& window,
                              Index site, const ToTimeOptions& opt = {}) {
    const auto& grid = spectral.grid;
    if (std::abs(spectral.t_origin - window.tR) > Real(1e-9) * std::max(Real(1), window.tR)) {
        throw ValidationError("spectral signal is not referenced to the window's tR");
    }
    const Index m_count = detail::window_steps(window, grid.dt);
    if (m_count > grid.fft_size) {
        throw ValidationError("energy grid period is shorter than the recording window");
    }
    const ComplexVector<Real> series = inverse_transform(spectral, static_cast<Real>(opt.offset));

    InjectionResult<Real> out;
    auto& tr = out.truncation;
    tr.kept_energy = series.head(m_count).squaredNorm() * grid.dt;
    tr.discarded_energy = series.tail(series.size() - m_count).squaredNorm() * grid.dt;
    const Real total = tr.kept_energy + tr.discarded_energy;
    tr.fraction = total > 0 ? tr.discarded_energy / total : Real(0);
    tr.max_abs = m_count > 0 ? series.head(m_count).cwiseAbs().maxCoeff() : Real(0);
    if (!std::isfinite(total) || tr.fraction > Real(opt.max_truncated_energy)) {
        throw ProtocolError(ProtocolFailure::TruncationEnergy,
                            "fraction " + std::to_string(static_cast<double>(tr.fraction)) +
                                " of the injection energy lies outside the window (bound " +
                                std::to_string(opt.max_truncated_energy) + ")");
    }

    auto& s = out.schedule;
    s.site = site;
    s.t0 = window.tR;
    s.dt = grid.dt;
    s.samples = series.head(m_count);
    return out;
}

} // namespace pif
