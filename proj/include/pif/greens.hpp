#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "pif/evolve.hpp"
#include "pif/spectral.hpp"

namespace pif {

/// G^R_ss(t_n) = -(i/hbar) <s|U(t_n)|s> for t_n = n dt, n = 0 .. round(t_max/dt).
template <typename Real>
ProbeRecord<Real> impulse_response(const Tridiagonal<Real>& h, Index site, Real t_max, Real dt,
                                   Real hbar = Real(1)) {
    if (!(t_max > 0)) throw ValidationError("impulse response needs t_max > 0");
    if (site < 0 || site >= h.size()) throw ValidationError("impulse site outside lattice");
    StepperConfig{static_cast<double>(dt), {}}.validate();

    const auto steps = static_cast<Index>(std::llround(t_max / dt));
    CrankNicolson<Real> cn(h, dt, hbar);
    ComplexVector<Real> psi = ComplexVector<Real>::Zero(h.size());
    psi[site] = Real(1);

    ProbeRecord<Real> rec;
    rec.site = site;
    rec.t0 = 0;
    rec.dt = dt;
    rec.samples.resize(steps + 1);
    const std::complex<Real> factor(0, -Real(1) / hbar);
    rec.samples[0] = factor;
    for (Index n = 1; n <= steps; ++n) {
        cn.advance(psi);
        rec.samples[n] = factor * psi[site];
    }
    return rec;
}

template <typename Real>
ProbeRecord<Real> impulse_response(const ChainModel<Real>& model, Index site, Real t_max, Real dt) {
    return impulse_response(model.hamiltonian(), site, t_max, dt, model.units().hbar);
}

/// Retarded transform of an impulse response that starts at t = 0.
template <typename Real>
SpectralSignal<Real> to_energy(const ProbeRecord<Real>& record, const EnergyGrid<Real>& grid) {
    if (record.size() == 0) throw ValidationError("empty record");
    return damped_transform(record, grid, Real(0), /*half_first=*/record.t0 == Real(0));
}

/// Column j of (z I - H)^{-1}.
template <typename Real>
ComplexVector<Real> resolvent_column(const Tridiagonal<Real>& h, Index j, std::complex<Real> z) {
    using Complex = std::complex<Real>;
    if (!(z.imag() > 0)) throw ValidationError("resolvent needs Im(z) > 0");
    const Index n = h.size();
    if (j < 0 || j >= n) throw ValidationError("resolvent index outside lattice");

    // Thomas algorithm on z - H (symmetric tridiagonal, off-diagonals -off).
    ComplexVector<Real> upper(std::max<Index>(n - 1, 0));
    ComplexVector<Real> rhs = ComplexVector<Real>::Zero(n);
    rhs[j] = Real(1);
    Complex pivot = z - h.diag[0];
    for (Index i = 0; i < n; ++i) {
        if (i > 0) {
            const Complex a = -h.off[i - 1];
            pivot = z - h.diag[i] - a * upper[i - 1];
            rhs[i] -= a * rhs[i - 1];
        }
        if (std::abs(pivot) == Real(0)) throw NumericalError("singular resolvent system");
        if (i + 1 < n) upper[i] = -h.off[i] / pivot;
        rhs[i] /= pivot;
    }
    for (Index i = n - 2; i >= 0; --i) rhs[i] -= upper[i] * rhs[i + 1];
    return rhs;
}

/// [(z I - H)^{-1}]_{ij} with z = eps + i eta.
template <typename Real>
std::complex<Real> resolvent_element(const Tridiagonal<Real>& h, Index i, Index j, std::complex<Real> z) {
    if (i < 0 || i >= h.size()) throw ValidationError("resolvent index outside lattice");
    return resolvent_column(h, j, z)[i];
}

template <typename Real>
std::complex<Real> resolvent_element(const ChainModel<Real>& model, Index i, Index j, std::complex<Real> z) {
    return resolvent_element(model.hamiltonian(), i, j, z);
}

/// Residuals of the Dyson identity across one cut bond.
template <typename Real>
struct DysonResidual {
    Real dyson{0};  ///< max |G - Gbar - Gbar V G|
    Real curly{0};  ///< max over x beyond the cut of |G_{x,b} - Gbar_{x,b+1} V G_{b,b}|
};

/// Cuts bond (b, b+1), builds the decoupled resolvent Gbar and checks
/// G = Gbar + Gbar V G on the columns in `probes` (every site when empty).
template <typename Real>
DysonResidual<Real> dyson_check(const Tridiagonal<Real>& h, Index cut, std::complex<Real> z,
                                std::vector<Index> probes = {}) {
    const Index n = h.size();
    if (cut < 0 || cut >= n - 1) {
        throw ValidationError("cut bond " + std::to_string(cut) + " is at or beyond the lattice edge");
    }
    if (probes.empty()) {
        for (Index j = 0; j < n; ++j) probes.push_back(j);
    }
    for (Index j : probes) {
        if (j < 0 || j >= n) throw ValidationError("Dyson probe site outside lattice");
    }

    Tridiagonal<Real> split = h;
    const Real coupling = h.off[cut];
    split.off[cut] = Real(0);

    const ComplexVector<Real> bar_left = resolvent_column(split, cut, z);
    const ComplexVector<Real> bar_right = resolvent_column(split, cut + 1, z);

    DysonResidual<Real> res;
    for (Index col : probes) {
        const ComplexVector<Real> g = resolvent_column(h, col, z);
        const ComplexVector<Real> gbar = resolvent_column(split, col, z);
        for (Index x = 0; x < n; ++x) {
            // Gbar is symmetric, so Gbar_{x,b} = column b at row x.
            const auto rhs = gbar[x] + bar_right[x] * coupling * g[cut] + bar_left[x] * coupling * g[cut + 1];
            res.dyson = std::max(res.dyson, std::abs(g[x] - rhs));
        }
    }
    const ComplexVector<Real> g_cut = resolvent_column(h, cut, z);
    for (Index x = cut + 1; x < n; ++x) {
        res.curly = std::max(res.curly, std::abs(g_cut[x] - bar_right[x] * coupling * g_cut[cut]));
    }
    return res;
}

template <typename Real>
DysonResidual<Real> dyson_check(const ChainModel<Real>& model, Index cut, std::complex<Real> z,
                                std::vector<Index> probes = {}) {
    return dyson_check(model.hamiltonian(), cut, z, std::move(probes));
}

/// -(1/pi) int_lo^hi Im G_ss(eps + i eta) d eps by the trapezoid rule.
template <typename Real>
Real ldos_integral(const Tridiagonal<Real>& h, Index site, Real eta, Real lo, Real hi, Real spacing) {
    if (!(hi > lo) || !(spacing > 0)) throw ValidationError("LDOS integral needs lo < hi and spacing > 0");
    const auto steps = static_cast<Index>(std::ceil((hi - lo) / spacing));
    const Real d = (hi - lo) / Real(steps);
    Real sum = 0;
    for (Index i = 0; i <= steps; ++i) {
        const Real eps = lo + Real(i) * d;
        const Real w = (i == 0 || i == steps) ? Real(0.5) : Real(1);
        sum += w * resolvent_element(h, site, site, std::complex<Real>(eps, eta)).imag();
    }
    return -sum * d / std::numbers::pi_v<Real>;
}

} // namespace pif
