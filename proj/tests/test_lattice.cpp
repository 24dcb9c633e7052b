#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "pif/wavefield.hpp"

using namespace pif;
using cd = std::complex<double>;

TEST_CASE("free chain has diagonal 2V and hopping -V") {
    auto m = build_chain<double>(10, 4, {});
    CHECK(m.n_sites() == 10);
    for (Index j = 0; j < 10; ++j) CHECK(m.site_energies()[j] == 2.0);
    for (Index j = 0; j < 9; ++j) CHECK(m.hamiltonian().off[j] == -1.0);
    CHECK(m.hopping() == -1.0);
    CHECK(m.band_bottom() == 0.0);
    CHECK(m.band_top() == 4.0);
}

TEST_CASE("barrier geometries") {
    const Index s = 300;
    SUBCASE("0.5V barrier on s+550..s+600") {
        PotentialProfile p;
        p.segments.push_back({s + 550, s + 600, 0.5});
        auto m = build_chain<double>(s + 701, s, p);
        int raised = 0;
        for (Index j = 0; j < m.n_sites(); ++j) {
            const double e = m.site_energies()[j];
            if (j >= s + 550 && j <= s + 600) {
                CHECK(e == 2.5);
                ++raised;
            } else {
                CHECK(e == 2.0);
            }
        }
        CHECK(raised == 51);
    }
    SUBCASE("0.2V barrier on s+100..s+105") {
        PotentialProfile p;
        p.segments.push_back({s + 100, s + 105, 0.2});
        auto m = build_chain<double>(s + 201, s, p);
        int raised = 0;
        for (Index j = 0; j < m.n_sites(); ++j) raised += m.site_energies()[j] == 2.2;
        CHECK(raised == 6);
    }
}

TEST_CASE("build_chain rejects bad input") {
    CHECK_THROWS_AS(build_chain<double>(2, 1, {}), ValidationError);
    CHECK_THROWS_AS(build_chain<double>(10, 0, {}), ValidationError);
    CHECK_THROWS_AS(build_chain<double>(10, 9, {}), ValidationError);
    PotentialProfile overlap;
    overlap.segments = {{2, 5, 1.0}, {5, 7, 1.0}};
    CHECK_THROWS_AS(build_chain<double>(10, 1, overlap), ValidationError);
    PotentialProfile outside;
    outside.segments = {{8, 12, 1.0}};
    CHECK_THROWS_AS(build_chain<double>(10, 1, outside), ValidationError);
    PotentialProfile negative;
    negative.segments = {{3, 4, -0.7}};
    CHECK_NOTHROW(build_chain<double>(10, 1, negative));
    CHECK_THROWS_AS(build_chain<double>(10, 3, {}, UnitSystem<double>{1, 1, 0}), ValidationError);
}

TEST_CASE("apply_hamiltonian on a delta") {
    auto m = build_chain<double>(10, 4, {});
    WaveField<double> f{ComplexVector<double>::Zero(10), 0.0};
    f.amplitudes[5] = 1.0;
    auto h = apply_hamiltonian(m, f);
    for (Index j = 0; j < 10; ++j) {
        const cd expect = j == 5 ? 2.0 : (j == 4 || j == 6 ? -1.0 : 0.0);
        CHECK(h.amplitudes[j] == expect);
    }
    WaveField<double> wrong{ComplexVector<double>::Zero(9), 0.0};
    CHECK_THROWS_AS(apply_hamiltonian(m, wrong), ValidationError);
}

TEST_CASE("two-site eigenvector") {
    auto h = free_tridiagonal<double>(2);
    ComplexVector<double> v(2);
    v << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
    auto hv = matvec(h, v);
    // hand diagonalization: [[2,-1],[-1,2]] (1,1)/sqrt2 = 1 * (1,1)/sqrt2
    CHECK(std::abs(hv[0] - v[0]) < 1e-15);
    CHECK(std::abs(hv[1] - v[1]) < 1e-15);
}

TEST_CASE("Hamiltonian is Hermitian and linear") {
    PotentialProfile p;
    p.segments = {{3, 6, 0.7}, {10, 12, -0.3}};
    auto m = build_chain<double>(20, 8, p);
    std::mt19937 rng(7);
    std::normal_distribution<double> g;
    auto random_field = [&] {
        WaveField<double> f{ComplexVector<double>(20), 0.0};
        for (auto& a : f.amplitudes) a = cd(g(rng), g(rng));
        return f;
    };
    auto phi = random_field(), psi = random_field();
    auto lhs = overlap(phi, apply_hamiltonian(m, psi));
    auto rhs = std::conj(overlap(psi, apply_hamiltonian(m, phi)));
    CHECK(std::abs(lhs - rhs) < 1e-12);

    const cd alpha(0.3, -1.2), beta(-2.0, 0.5);
    WaveField<double> combo{alpha * phi.amplitudes + beta * psi.amplitudes, 0.0};
    auto left = apply_hamiltonian(m, combo).amplitudes;
    auto right = (alpha * apply_hamiltonian(m, phi).amplitudes + beta * apply_hamiltonian(m, psi).amplitudes).eval();
    CHECK((left - right).cwiseAbs().maxCoeff() < 1e-13);

    // dense oracle agrees with the tridiagonal product
    auto dense = oracle::dense(m.hamiltonian()).cast<cd>().eval();
    CHECK((dense * psi.amplitudes - apply_hamiltonian(m, psi).amplitudes).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("spectrum inside the Gershgorin bound") {
    for (double umax : {0.0, 0.5, 3.0}) {
        PotentialProfile p;
        if (umax > 0) p.segments = {{5, 15, umax}};
        auto m = build_chain<double>(40, 3, p);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(oracle::dense(m.hamiltonian()));
        CHECK(es.eigenvalues().minCoeff() >= -2.0 - 1e-12);
        CHECK(es.eigenvalues().maxCoeff() <= umax + 4.0 + 1e-12);
    }
}

TEST_CASE("build_chain is deterministic") {
    PotentialProfile p;
    p.segments = {{5, 9, 0.25}};
    auto a = build_chain<double>(30, 2, p);
    auto b = build_chain<double>(30, 2, p);
    CHECK(a.hamiltonian().diag == b.hamiltonian().diag);
    CHECK(a.hamiltonian().off == b.hamiltonian().off);
}

TEST_CASE("padding rule") {
    CHECK(required_padding(UnitSystem<double>{}, 1000.0) == 1050);
    CHECK(required_padding(UnitSystem<double>{}, 1000.0, 0) == 1000);
}

TEST_CASE("gaussian packet") {
    auto m = build_chain<double>(2000, 1000, {});
    SUBCASE("normalized, overlap identities") {
        auto f = gaussian_packet<double>(m, 800, 50, 1.0);
        CHECK(std::abs(norm(f) - 1.0) < 1e-14);
        CHECK(std::abs(overlap(f, f) - cd(1.0)) < 1e-14);
        WaveField<double> g{cd(0, 1) * f.amplitudes, 0};
        CHECK(std::abs(overlap(f, g) - cd(0, 1)) < 1e-14);
        CHECK(f.time == 0.0);
    }
    SUBCASE("k0 = 0 has zero mean momentum") {
        auto f = gaussian_packet<double>(m, 700, 20, 0.0);
        CHECK(std::abs(centroid_velocity(m, f, SiteRange{0, 2000})) < 1e-15);
    }
    SUBCASE("well separated packets are orthogonal") {
        auto a = gaussian_packet<double>(m, 500, 10, 0.4);
        auto b = gaussian_packet<double>(m, 700, 10, 0.4);
        // direct-sum oracle of the overlap of the two real envelopes
        double direct = 0, na = 0, nb = 0;
        for (int j = 0; j < 2000; ++j) {
            const double ea = std::exp(-(j - 500.0) * (j - 500.0) / 400.0);
            const double eb = std::exp(-(j - 700.0) * (j - 700.0) / 400.0);
            direct += ea * eb;
            na += ea * ea;
            nb += eb * eb;
        }
        direct /= std::sqrt(na * nb);
        CHECK(std::abs(overlap(a, b)) < 1e-10);
        CHECK(std::abs(std::abs(overlap(a, b)) - direct) < 1e-20);
    }
    SUBCASE("conjugation inverts momentum") {
        auto a = conjugate(gaussian_packet<double>(m, 900, 30, 0.9));
        auto b = gaussian_packet<double>(m, 900, 30, -0.9);
        CHECK((a.amplitudes - b.amplitudes).cwiseAbs().maxCoeff() < 1e-15);
    }
    SUBCASE("clipping and bad parameters") {
        CHECK_THROWS_AS(gaussian_packet<double>(m, 30, 10, 1.0), ValidationError);
        CHECK_THROWS_AS(gaussian_packet<double>(m, 1980, 10, 1.0), ValidationError);
        CHECK_THROWS_AS(gaussian_packet<double>(m, 500, 0, 1.0), ValidationError);
        CHECK_THROWS_AS(gaussian_packet<double>(m, -1, 5, 1.0), ValidationError);
    }
}

TEST_CASE("region helpers") {
    auto m = build_chain<double>(10, 4, {});
    CHECK(outer_region(m).first == 0);
    CHECK(outer_region(m).last == 4);
    CHECK(cavity_region(m).first == 5);
    CHECK(cavity_region(m).last == 10);
    WaveField<double> f{ComplexVector<double>::Ones(10), 0};
    CHECK(norm(f, cavity_region(m)) == 5.0);
    CHECK(norm(f, outer_region(m)) == 4.0);
    CHECK_THROWS_AS(norm(f, SiteRange{3, 11}), ValidationError);
    WaveField<double> short_field{ComplexVector<double>::Ones(9), 0};
    CHECK_THROWS_AS(overlap(f, short_field), ValidationError);
}
