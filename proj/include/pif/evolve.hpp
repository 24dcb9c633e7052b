#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include "pif/series.hpp"
#include "pif/wavefield.hpp"

namespace pif {

/// Crank-Nicolson (implicit midpoint) is the only scheme.
struct StepperConfig {
    double dt = 0.02;
    std::optional<Index> source_site;

    void validate() const {
        if (!(dt > 0.0) || dt > 0.1) {
            throw ValidationError("time step must satisfy 0 < dt <= 0.1 hbar/V, got " + std::to_string(dt));
        }
    }
};

/// Factorized (I + i dt H / 2hbar) for repeated O(n) solves.
///
/// One step solves
///   (I + i dt H/2hbar) psi' = (I - i dt H/2hbar) psi - (i dt/hbar) chi e_s
/// where chi is the source at the step midpoint.
template <typename Real>
class CrankNicolson {
public:
    using Complex = std::complex<Real>;

    CrankNicolson(const Tridiagonal<Real>& h, Real dt, Real hbar = Real(1))
        : n_(h.size()), dt_(dt), hbar_(hbar) {
        if (n_ < 1) throw ValidationError("empty Hamiltonian");
        const Complex alpha(0, dt / (Real(2) * hbar));
        diag_minus_.resize(n_);
        off_minus_.resize(std::max<Index>(n_ - 1, 0));
        lower_.resize(std::max<Index>(n_ - 1, 0));
        upper_.resize(std::max<Index>(n_ - 1, 0));
        inv_pivot_.resize(n_);
        work_.resize(n_);
        for (Index j = 0; j < n_; ++j) diag_minus_[j] = Real(1) - alpha * h.diag[j];
        for (Index j = 0; j + 1 < n_; ++j) {
            off_minus_[j] = -alpha * h.off[j];
            lower_[j] = alpha * h.off[j];
        }
        // Thomas factorization of the left-hand matrix.
        Complex pivot = Real(1) + alpha * h.diag[0];
        for (Index j = 0; j < n_; ++j) {
            if (j > 0) pivot = Real(1) + alpha * h.diag[j] - lower_[j - 1] * upper_[j - 1];
            if (std::abs(pivot) < Real(1e-300)) {
                throw NumericalError("singular Crank-Nicolson system at row " + std::to_string(j));
            }
            inv_pivot_[j] = Real(1) / pivot;
            if (j + 1 < n_) upper_[j] = lower_[j] * inv_pivot_[j];
        }
    }

    Index size() const { return n_; }
    Real dt() const { return dt_; }

    /// Advances psi by one step in place.
    void advance(ComplexVector<Real>& psi, std::optional<Complex> source = std::nullopt,
                 Index source_site = 0) {
        if (psi.size() != n_) {
            throw ValidationError("field length " + std::to_string(psi.size()) +
                                  " does not match stepper size " + std::to_string(n_));
        }
        Index s = -1;
        Complex kick(0);
        if (source && *source != Complex(0)) {
            if (source_site < 0 || source_site >= n_) {
                throw ValidationError("source site outside lattice");
            }
            s = source_site;
            kick = Complex(0, -dt_ / hbar_) * *source;
        }
        Complex* w = work_.data();
        // right-hand side (vectorizable), then the two Thomas sweeps
        work_.array() = diag_minus_.array() * psi.array();
        if (n_ > 1) {
            work_.head(n_ - 1).array() += off_minus_.array() * psi.tail(n_ - 1).array();
            work_.tail(n_ - 1).array() += off_minus_.array() * psi.head(n_ - 1).array();
        }
        if (s >= 0) w[s] += kick;
        for (Index j = 1; j < n_; ++j) w[j] -= upper_[j - 1] * w[j - 1];
        Complex* out = psi.data();
        out[n_ - 1] = w[n_ - 1] * inv_pivot_[n_ - 1];
        for (Index j = n_ - 2; j >= 0; --j) {
            out[j] = w[j] * inv_pivot_[j] - upper_[j] * out[j + 1];
        }
    }

private:
    Index n_;
    Real dt_;
    Real hbar_;
    ComplexVector<Real> diag_minus_, off_minus_;
    ComplexVector<Real> lower_, upper_, inv_pivot_;
    ComplexVector<Real> work_;
};

template <typename Real>
WaveField<Real> step(const ChainModel<Real>& model, const WaveField<Real>& field, const StepperConfig& cfg,
                     std::optional<std::type_identity_t<std::complex<Real>>> source_value = std::nullopt) {
    cfg.validate();
    if (source_value && !cfg.source_site) {
        throw ValidationError("source value given but no source site configured");
    }
    detail::require_same_length(field.size(), model.n_sites());
    CrankNicolson<Real> cn(model.hamiltonian(), static_cast<Real>(cfg.dt), model.units().hbar);
    WaveField<Real> next = field;
    cn.advance(next.amplitudes, source_value, cfg.source_site.value_or(0));
    next.time = field.time + static_cast<Real>(cfg.dt);
    return next;
}

/// Called with the completed step count, the time, and the state: once for
/// the initial state (step 0) and then after every step.
template <typename Real>
using StepObserver = std::function<void(Index, Real, const ComplexVector<Real>&)>;

/// Steps from field.time to t_end. A schedule must live on the same dt grid;
/// outside its support the source is zero.
template <typename Real>
WaveField<Real> evolve(const ChainModel<Real>& model, const WaveField<Real>& field, StepperConfig cfg,
                       const std::type_identity_t<InjectionSchedule<Real>>* schedule,
                       std::type_identity_t<Real> t_end,
                       const std::vector<std::type_identity_t<StepObserver<Real>>>& observers = {}) {
    cfg.validate();
    detail::require_same_length(field.size(), model.n_sites());
    const Real dt = static_cast<Real>(cfg.dt);
    const Real span = t_end - field.time;
    const auto steps = static_cast<Index>(std::llround(span / dt));
    if (steps < 0 || std::abs(Real(steps) * dt - span) > Real(1e-9) * std::max(Real(1), std::abs(t_end))) {
        throw ValidationError("t_end is not on the time grid of the starting field");
    }

    Index offset = 0;
    if (schedule) {
        if (std::abs(schedule->dt - dt) > Real(1e-12) * dt) {
            throw ValidationError("schedule/dt grid mismatch: schedule dt differs from stepper dt");
        }
        const Real shift = (schedule->t0 - field.time) / dt;
        offset = static_cast<Index>(std::llround(shift));
        if (std::abs(shift - Real(offset)) > Real(1e-6)) {
            throw ValidationError("schedule/dt grid mismatch: schedule start is off the stepper grid");
        }
        if (cfg.source_site && *cfg.source_site != schedule->site) {
            throw ValidationError("schedule site differs from configured source site");
        }
        cfg.source_site = schedule->site;
    }

    CrankNicolson<Real> cn(model.hamiltonian(), dt, model.units().hbar);
    WaveField<Real> state = field;
    for (const auto& obs : observers) obs(0, state.time, state.amplitudes);
    for (Index n = 0; n < steps; ++n) {
        std::optional<std::complex<Real>> source;
        if (schedule) {
            const Index m = n - offset;
            if (m >= 0 && m < schedule->size()) source = schedule->samples[m];
        }
        cn.advance(state.amplitudes, source, cfg.source_site.value_or(0));
        const Real t = field.time + Real(n + 1) * dt;
        for (const auto& obs : observers) obs(n + 1, t, state.amplitudes);
    }
    state.time = field.time + Real(steps) * dt;
    return state;
}

} // namespace pif
