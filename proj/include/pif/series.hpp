#pragma once

#include <cmath>
#include <complex>

#include "pif/lattice.hpp"

namespace pif {

/// psi(x_s, t_n) sampled at t_n = t0 + n dt, amplitude and phase.
template <typename Real>
struct ProbeRecord {
    Index site = 0;
    Real t0{0};
    Real dt{0};
    ComplexVector<Real> samples;

    Index size() const { return samples.size(); }
    Real time(Index n) const { return t0 + Real(n) * dt; }
    Real end_time() const { return size() > 0 ? time(size() - 1) : t0; }

    /// Sample index of time t; t must lie on the grid.
    Index index_of(Real t) const { return static_cast<Index>(std::llround((t - t0) / dt)); }
};

/// Source chi(x_s, t). Sample m drives the step t0 + m dt -> t0 + (m+1) dt and
/// holds the source value at that step's midpoint.
template <typename Real>
struct InjectionSchedule {
    Index site = 0;
    Real t0{0};
    Real dt{0};
    ComplexVector<Real> samples;

    Index size() const { return samples.size(); }
    Real sample_time(Index m) const { return t0 + (Real(m) + Real(0.5)) * dt; }
    Real end_time() const { return t0 + Real(size()) * dt; }
};

} // namespace pif
