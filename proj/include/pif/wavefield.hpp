#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include "pif/lattice.hpp"

namespace pif {

/// psi(x_j, t) on every site of a chain, at one instant.
template <typename Real>
struct WaveField {
    ComplexVector<Real> amplitudes;
    Real time{0};

    Index size() const { return amplitudes.size(); }
};

/// Half-open site range [first, last).
struct SiteRange {
    Index first = 0;
    Index last = 0;

    Index size() const { return last > first ? last - first : 0; }
};

template <typename Real>
SiteRange outer_region(const ChainModel<Real>& model) {
    return {0, model.probe()};
}

/// Strictly x > x_s; the probe site belongs to neither region.
template <typename Real>
SiteRange cavity_region(const ChainModel<Real>& model) {
    return {model.probe() + 1, model.n_sites()};
}

namespace detail {

inline void require_same_length(Index a, Index b) {
    if (a != b) {
        throw ValidationError("wave field lengths differ: " + std::to_string(a) + " vs " +
                              std::to_string(b));
    }
}

inline void require_range(SiteRange r, Index n) {
    if (r.first < 0 || r.last > n || r.first > r.last) {
        throw ValidationError("site range [" + std::to_string(r.first) + ", " + std::to_string(r.last) +
                              ") outside field of " + std::to_string(n) + " sites");
    }
}

} // namespace detail

template <typename Real>
std::complex<Real> overlap(const WaveField<Real>& a, const WaveField<Real>& b) {
    detail::require_same_length(a.size(), b.size());
    return a.amplitudes.dot(b.amplitudes); // conjugates the left argument
}

template <typename Real>
std::complex<Real> overlap(const WaveField<Real>& a, const WaveField<Real>& b, SiteRange region) {
    detail::require_same_length(a.size(), b.size());
    detail::require_range(region, a.size());
    return a.amplitudes.segment(region.first, region.size())
        .dot(b.amplitudes.segment(region.first, region.size()));
}

template <typename Real>
Real norm(const WaveField<Real>& field) {
    return field.amplitudes.squaredNorm();
}

template <typename Real>
Real norm(const WaveField<Real>& field, SiteRange region) {
    detail::require_range(region, field.size());
    return field.amplitudes.segment(region.first, region.size()).squaredNorm();
}

template <typename Real>
RealVector<Real> density(const WaveField<Real>& field) {
    return field.amplitudes.cwiseAbs2();
}

template <typename Real>
WaveField<Real> conjugate(const WaveField<Real>& field) {
    return {field.amplitudes.conjugate(), field.time};
}

template <typename Real>
WaveField<Real> apply_hamiltonian(const ChainModel<Real>& model, const WaveField<Real>& field) {
    return {matvec(model.hamiltonian(), field.amplitudes), field.time};
}

/// Normalized lattice Gaussian psi_j ~ exp(-(j-c)^2 / (4 sigma^2)) exp(i k0 j).
///
/// The packet is normalized by direct summation over the lattice. Throws if
/// more than 1e-12 of the untruncated packet's weight would fall outside the
/// chain.
template <typename Real>
WaveField<Real> gaussian_packet(const ChainModel<Real>& model, Real center, Real sigma, Real k0) {
    const Index n = model.n_sites();
    if (!(center >= 0 && center <= Real(n - 1))) {
        throw ValidationError("packet center outside lattice");
    }
    if (!(sigma > 0)) {
        throw ValidationError("packet width sigma must be positive");
    }
    const auto envelope2 = [&](Real j) {
        const Real d = j - center;
        return std::exp(-d * d / (Real(2) * sigma * sigma));
    };

    WaveField<Real> field;
    field.amplitudes.resize(n);
    for (Index j = 0; j < n; ++j) {
        const Real d = Real(j) - center;
        field.amplitudes[j] = std::polar(std::exp(-d * d / (Real(4) * sigma * sigma)), k0 * Real(j));
    }
    const Real inside = field.amplitudes.squaredNorm();

    // Weight the lattice would carry past each edge, summed until underflow.
    Real outside = 0;
    for (Index j = -1;; --j) {
        const Real w = envelope2(Real(j));
        outside += w;
        if (w < std::numeric_limits<Real>::min() || Real(j) < center - Real(40) * sigma - 1) break;
    }
    for (Index j = n;; ++j) {
        const Real w = envelope2(Real(j));
        outside += w;
        if (w < std::numeric_limits<Real>::min() || Real(j) > center + Real(40) * sigma + 1) break;
    }
    if (outside > Real(1e-12) * (inside + outside)) {
        throw ValidationError("gaussian packet clipped by lattice edge (lost weight fraction " +
                              std::to_string(static_cast<double>(outside / (inside + outside))) + ")");
    }
    field.amplitudes /= std::sqrt(inside);
    field.time = 0;
    return field;
}

/// <x> over a region, in sites.
template <typename Real>
Real centroid(const WaveField<Real>& field, SiteRange region) {
    detail::require_range(region, field.size());
    Real weight = 0, moment = 0;
    for (Index j = region.first; j < region.last; ++j) {
        const Real p = std::norm(field.amplitudes[j]);
        weight += p;
        moment += p * Real(j);
    }
    return weight > 0 ? moment / weight : Real(0);
}

/// Probability-current velocity (2Va/hbar) sum Im(psi_j^* psi_{j+1}) / sum |psi_j|^2
/// over the bonds inside `region`; equals d<x>/dt for a packet well inside it.
template <typename Real>
Real centroid_velocity(const ChainModel<Real>& model, const WaveField<Real>& field, SiteRange region) {
    detail::require_same_length(field.size(), model.n_sites());
    detail::require_range(region, field.size());
    Real weight = 0, current = 0;
    for (Index j = region.first; j < region.last; ++j) {
        weight += std::norm(field.amplitudes[j]);
        if (j + 1 < region.last) {
            current += std::imag(std::conj(field.amplitudes[j]) * field.amplitudes[j + 1]);
        }
    }
    const auto& u = model.units();
    return weight > 0 ? Real(2) * u.V * u.a / u.hbar * current / weight : Real(0);
}

} // namespace pif
