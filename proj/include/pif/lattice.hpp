#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "pif/errors.hpp"

namespace pif {

using Index = Eigen::Index;

template <typename Real>
using RealVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

template <typename Real>
using ComplexVector = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;

/// Natural units: hbar = a = V = 1 unless a caller chooses otherwise.
template <typename Real>
struct UnitSystem {
    Real hbar{1};
    Real a{1};
    Real V{1};

    /// Largest group velocity on the chain, 2Va/hbar.
    Real max_group_speed() const { return Real(2) * V * a / hbar; }
};

/// Symmetric tridiagonal matrix: `diag` of size n, `off` of size n-1 holding
/// H(j+1, j) = H(j, j+1).
template <typename Scalar>
struct Tridiagonal {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> diag;
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> off;

    Index size() const { return diag.size(); }
};

enum class Boundary {
    HardWall,
    /// Finite padding wall placed so far out that no reflection from it
    /// returns within the simulated window.
    OpenPadding,
};

/// Piecewise-constant U(x_j) on [first, last] (inclusive), height in units of V.
struct PotentialSegment {
    Index first = 0;
    Index last = 0;
    double height = 0.0;
};

struct PotentialProfile {
    std::vector<PotentialSegment> segments;
    Boundary left = Boundary::OpenPadding;
    Boundary right = Boundary::HardWall;
};

/// 1-D tight-binding chain. Immutable once built.
template <typename Real>
class ChainModel {
public:
    Index n_sites() const { return hamiltonian_.size(); }
    Index probe() const { return probe_; }
    const UnitSystem<Real>& units() const { return units_; }
    const PotentialProfile& profile() const { return profile_; }

    /// E_j = U(x_j) + 2V.
    const RealVector<Real>& site_energies() const { return hamiltonian_.diag; }
    Real hopping() const { return -units_.V; }
    const Tridiagonal<Real>& hamiltonian() const { return hamiltonian_; }

    Real band_bottom() const { return hamiltonian_.diag.minCoeff() - Real(2) * units_.V; }
    Real band_top() const { return hamiltonian_.diag.maxCoeff() + Real(2) * units_.V; }

    bool in_cavity(Index j) const { return j > probe_; }
    bool in_outer(Index j) const { return j < probe_; }

private:
    template <typename R>
    friend ChainModel<R> build_chain(Index, Index, const PotentialProfile&, const UnitSystem<R>&);

    Tridiagonal<Real> hamiltonian_;
    Index probe_ = 0;
    UnitSystem<Real> units_;
    PotentialProfile profile_;
};

inline void validate_profile(const PotentialProfile& profile, Index n_sites) {
    std::vector<PotentialSegment> sorted = profile.segments;
    std::sort(sorted.begin(), sorted.end(),
              [](const PotentialSegment& a, const PotentialSegment& b) { return a.first < b.first; });
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const auto& seg = sorted[i];
        if (seg.first < 0 || seg.last >= n_sites || seg.first > seg.last) {
            throw ValidationError("potential segment [" + std::to_string(seg.first) + ", " +
                                  std::to_string(seg.last) + "] outside lattice of " +
                                  std::to_string(n_sites) + " sites");
        }
        if (!std::isfinite(seg.height)) {
            throw ValidationError("potential segment height is not finite");
        }
        if (i > 0 && sorted[i - 1].last >= seg.first) {
            throw ValidationError("potential segments overlap at site " + std::to_string(seg.first));
        }
    }
}

template <typename Real = double>
ChainModel<Real> build_chain(Index n_sites, Index probe_index, const PotentialProfile& profile,
                             const UnitSystem<Real>& units = {}) {
    if (n_sites < 3) {
        throw ValidationError("chain needs at least 3 sites, got " + std::to_string(n_sites));
    }
    if (probe_index <= 0 || probe_index >= n_sites - 1) {
        throw ValidationError("probe index " + std::to_string(probe_index) +
                              " must be strictly interior to a chain of " + std::to_string(n_sites));
    }
    if (!(units.hbar > 0 && units.a > 0 && units.V > 0)) {
        throw ValidationError("unit constants must be strictly positive");
    }
    validate_profile(profile, n_sites);

    ChainModel<Real> model;
    model.units_ = units;
    model.probe_ = probe_index;
    model.profile_ = profile;
    model.hamiltonian_.diag = RealVector<Real>::Constant(n_sites, Real(2) * units.V);
    for (const auto& seg : profile.segments) {
        const Real shift = static_cast<Real>(seg.height) * units.V;
        model.hamiltonian_.diag.segment(seg.first, seg.last - seg.first + 1).array() += shift;
    }
    model.hamiltonian_.off = RealVector<Real>::Constant(n_sites - 1, -units.V);
    return model;
}

/// Uniform chain of `n` sites as a raw matrix, diagonal 2V, hopping -V.
template <typename Real = double>
Tridiagonal<Real> free_tridiagonal(Index n, Real V = Real(1)) {
    Tridiagonal<Real> h;
    h.diag = RealVector<Real>::Constant(n, Real(2) * V);
    h.off = RealVector<Real>::Constant(std::max<Index>(n - 1, 0), -V);
    return h;
}

/// (H psi)_j = E_j psi_j + off_{j-1} psi_{j-1} + off_j psi_{j+1}; hard walls at both ends.
template <typename Real, typename Derived>
ComplexVector<Real> matvec(const Tridiagonal<Real>& h, const Eigen::MatrixBase<Derived>& psi) {
    const Index n = h.size();
    if (psi.size() != n) {
        throw ValidationError("field length " + std::to_string(psi.size()) +
                              " does not match Hamiltonian size " + std::to_string(n));
    }
    ComplexVector<Real> out = h.diag.template cast<std::complex<Real>>().cwiseProduct(psi);
    if (n > 1) {
        out.head(n - 1) += h.off.template cast<std::complex<Real>>().cwiseProduct(psi.tail(n - 1));
        out.tail(n - 1) += h.off.template cast<std::complex<Real>>().cwiseProduct(psi.head(n - 1));
    }
    return out;
}

/// Sites of left padding so that a wave leaving the probe at max speed does
/// not return from the padding wall before `t_end`.
template <typename Real>
Index required_padding(const UnitSystem<Real>& units, Real t_end, Index margin = 50) {
    const Real reach = units.max_group_speed() * t_end / (Real(2) * units.a);
    return static_cast<Index>(std::ceil(reach)) + margin;
}

} // namespace pif
