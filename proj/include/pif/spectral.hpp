#pragma once

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "pif/series.hpp"

namespace pif {

/// Energies eps_k = k * 2 pi hbar / (N dt) for k in [k_first, k_last]: the
/// DFT-conjugate grid of an N-sample period, restricted to a band of bins.
template <typename Real>
struct EnergyGrid {
    Index fft_size = 0;
    Real dt{0};
    Index k_first = 0;
    Index k_last = -1;
    Real eta{0};
    Real hbar{1};

    Index n_points() const { return k_last >= k_first ? k_last - k_first + 1 : 0; }
    Real spacing() const { return Real(2) * std::numbers::pi_v<Real> * hbar / (Real(fft_size) * dt); }
    Real energy(Index i) const { return Real(k_first + i) * spacing(); }
    Real epsilon_min() const { return energy(0); }
    Real epsilon_max() const { return energy(n_points() - 1); }
    Real period() const { return Real(fft_size) * dt; }

    void validate() const {
        if (fft_size < 1 || n_points() < 1) throw ValidationError("energy grid is empty");
        if (n_points() > fft_size) throw ValidationError("energy grid wider than its FFT period");
        if (!(dt > 0)) throw ValidationError("energy grid needs dt > 0");
        if (!(eta > 0)) throw ValidationError("broadening eta must be positive");
    }

    bool same_as(const EnergyGrid& o) const {
        return fft_size == o.fft_size && dt == o.dt && k_first == o.k_first && k_last == o.k_last &&
               eta == o.eta && hbar == o.hbar;
    }
};

/// Smallest 2^a 3^b 5^c >= n.
inline Index next_fast_size(Index n) {
    if (n <= 1) return 1;
    for (Index m = n;; ++m) {
        Index r = m;
        for (Index p : {2, 3, 5}) {
            while (r % p == 0) r /= p;
        }
        if (r == 1) return m;
    }
}

/// FFT length for a time window zero-padded by `padding`.
template <typename Real>
Index fft_size_for(Real window, Real dt, Real padding = Real(4)) {
    if (!(window > 0) || !(dt > 0) || !(padding >= 1)) {
        throw ValidationError("fft size needs positive window, dt and padding >= 1");
    }
    return next_fast_size(static_cast<Index>(std::ceil(padding * window / dt - Real(1e-9))));
}

/// Grid over [lo - margin, hi + margin] with the given FFT period.
template <typename Real>
EnergyGrid<Real> make_energy_grid(Index fft_size, Real dt, Real lo, Real hi, Real eta, Real margin = Real(1),
                                  Real hbar = Real(1)) {
    if (!(hi >= lo)) throw ValidationError("energy range is empty");
    EnergyGrid<Real> g;
    g.fft_size = fft_size;
    g.dt = dt;
    g.eta = eta;
    g.hbar = hbar;
    if (fft_size < 1 || !(dt > 0)) throw ValidationError("energy grid needs fft_size >= 1 and dt > 0");
    const Real de = g.spacing();
    g.k_first = static_cast<Index>(std::floor((lo - margin) / de));
    g.k_last = static_cast<Index>(std::ceil((hi + margin) / de));
    if (g.n_points() > fft_size) {
        throw ValidationError("time step too coarse: band does not fit below the Nyquist energy");
    }
    g.validate();
    return g;
}

/// Every bin of an N-point period, centred on zero energy.
template <typename Real>
EnergyGrid<Real> full_energy_grid(Index fft_size, Real dt, Real eta, Real hbar = Real(1)) {
    EnergyGrid<Real> g;
    g.fft_size = fft_size;
    g.dt = dt;
    g.eta = eta;
    g.hbar = hbar;
    g.k_first = -(fft_size / 2);
    g.k_last = g.k_first + fft_size - 1;
    g.validate();
    return g;
}

/// f(eps + i eta) on an EnergyGrid; the damping factor is referenced to t_origin.
template <typename Real>
struct SpectralSignal {
    EnergyGrid<Real> grid;
    Real t_origin{0};
    ComplexVector<Real> values;

    Index size() const { return values.size(); }
};

/// sum_n w_n f(t_n) exp(i eps_k t_n/hbar) exp(-eta (t_n - t_origin)/hbar) dt.
///
/// w_n = 1 except w_0 = 1/2 when `half_first` is set: for a causal response
/// that jumps at t_0 the midpoint of the jump is the correct sample there.
/// Records longer than the FFT period are folded onto it.
template <typename Real>
SpectralSignal<Real> damped_transform(const ProbeRecord<Real>& record, const EnergyGrid<Real>& grid,
                                      Real t_origin, bool half_first = false) {
    grid.validate();
    if (std::abs(record.dt - grid.dt) > Real(1e-12) * grid.dt) {
        throw ValidationError("record dt differs from the energy grid dt");
    }
    using Complex = std::complex<Real>;
    const Index N = grid.fft_size;
    std::vector<Complex> folded(static_cast<std::size_t>(N), Complex(0));
    for (Index n = 0; n < record.size(); ++n) {
        const Real age = (record.time(n) - t_origin) / grid.hbar;
        Real w = std::exp(-grid.eta * age);
        if (n == 0 && half_first) w *= Real(0.5);
        // exp(+i 2 pi k n / N) as conj of a forward FFT of the conjugate
        folded[static_cast<std::size_t>(n % N)] += std::conj(w * record.samples[n]);
    }
    Eigen::FFT<Real> fft;
    std::vector<Complex> spectrum;
    fft.fwd(spectrum, folded);

    SpectralSignal<Real> out;
    out.grid = grid;
    out.t_origin = t_origin;
    out.values.resize(grid.n_points());
    for (Index i = 0; i < grid.n_points(); ++i) {
        const Index k = grid.k_first + i;
        const Index bin = ((k % N) + N) % N;
        const Real eps = grid.energy(i);
        out.values[i] = std::conj(spectrum[static_cast<std::size_t>(bin)]) *
                        std::polar(record.dt, eps * record.t0 / grid.hbar);
    }
    return out;
}

/// Inverse of damped_transform from the grid's bins, evaluated at
/// t_m = t_origin + (m + offset) dt for m = 0 .. N-1 with the damping undone.
template <typename Real>
ComplexVector<Real> inverse_transform(const SpectralSignal<Real>& signal, Real offset = Real(0)) {
    const auto& grid = signal.grid;
    grid.validate();
    if (signal.size() != grid.n_points()) throw ValidationError("spectral values do not match their grid");
    using Complex = std::complex<Real>;
    const Index N = grid.fft_size;
    const Real shift = signal.t_origin + offset * grid.dt;
    std::vector<Complex> bins(static_cast<std::size_t>(N), Complex(0));
    for (Index i = 0; i < grid.n_points(); ++i) {
        const Index k = grid.k_first + i;
        const Index bin = ((k % N) + N) % N;
        bins[static_cast<std::size_t>(bin)] += signal.values[i] * std::polar(Real(1), -grid.energy(i) * shift / grid.hbar);
    }
    Eigen::FFT<Real> fft;
    std::vector<Complex> series;
    fft.fwd(series, bins);
    ComplexVector<Real> out(N);
    const Real scale = Real(1) / (Real(N) * grid.dt);
    for (Index m = 0; m < N; ++m) {
        const Real age = (Real(m) + offset) * grid.dt / grid.hbar;
        out[m] = series[static_cast<std::size_t>(m)] * (scale * std::exp(grid.eta * age));
    }
    return out;
}

/// Pointwise a / b; the grids must coincide.
template <typename Real>
SpectralSignal<Real> divide(const SpectralSignal<Real>& a, const SpectralSignal<Real>& b) {
    if (!a.grid.same_as(b.grid) || a.size() != b.size()) {
        throw ValidationError("spectral signals live on different energy grids");
    }
    SpectralSignal<Real> out = a;
    for (Index i = 0; i < a.size(); ++i) {
        if (b.values[i] == std::complex<Real>(0)) {
            throw NumericalError("division by an exact zero of the spectral kernel");
        }
        out.values[i] = a.values[i] / b.values[i];
    }
    return out;
}

} // namespace pif
