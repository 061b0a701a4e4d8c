#include <spinphoton/model.hpp>
#include <spinphoton/tomography.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace spinphoton;

namespace {

StokesVector random_physical_stokes(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    StokesVector s{n(rng), n(rng), n(rng), std::nullopt, false};
    const double scale = std::cbrt(u(rng)) / s.norm();
    return {s.hv * scale, s.da * scale, s.rl * scale, std::nullopt, false};
}

IntensitySextet random_sextet(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    IntensitySextet x;
    for (double& v : x.values) v = u(rng);
    return x;
}

CoherenceMatrix random_coherence(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    CoherenceMatrix g;
    for (int k = 0; k < 3; ++k) {
        const JonesVector j{{n(rng), n(rng)}, {n(rng), n(rng)}};
        g += 0.2 * CoherenceMatrix::outer(j);
    }
    return g;
}

} // namespace

TEST(StokesFromSextet, PureStates) {
    StokesVector s = stokes_from_sextet(IntensitySextet::from(1, 0, .5, .5, .5, .5));
    EXPECT_DOUBLE_EQ(s.hv, 1.0);
    EXPECT_DOUBLE_EQ(s.da, 0.0);
    EXPECT_DOUBLE_EQ(s.rl, 0.0);
    s = stokes_from_sextet(IntensitySextet::from(.5, .5, .5, .5, 1, 0));
    EXPECT_DOUBLE_EQ(s.hv, 0.0);
    EXPECT_DOUBLE_EQ(s.rl, 1.0);
}

TEST(StokesFromSextet, EmptyChannelIsAnError) {
    EXPECT_THROW(stokes_from_sextet(IntensitySextet::from(0, 0, .5, .5, .5, .5)), Error);
    EXPECT_THROW(stokes_from_sextet(IntensitySextet::from(1, 0, .5, .5, -.5, .2)), Error);
}

TEST(StokesFromSextet, EmptyCavityKeepsInputV) {
    const DeviceParams p = paper_device();
    const auto x = sextet_from_coherence(reflect(p, {0.0, analysis_state(Basis::V)}, GroundState::Empty).coherence);
    const StokesVector s = stokes_from_sextet(x);
    EXPECT_NEAR(s.hv, -1.0, 1e-9);
    EXPECT_NEAR(s.da, 0.0, 1e-9);
    EXPECT_NEAR(s.rl, 0.0, 1e-9);
}

TEST(SextetFromCoherence, BasicStates) {
    CoherenceMatrix h;
    h.g(0, 0) = 1.0;
    const IntensitySextet x = sextet_from_coherence(h);
    const double expect[6] = {1, 0, .5, .5, .5, .5};
    for (int k = 0; k < 6; ++k) EXPECT_NEAR(x.values[k], expect[k], 1e-15);

    CoherenceMatrix unpolarised;
    unpolarised.g(0, 0) = 0.5;
    unpolarised.g(1, 1) = 0.5;
    for (double v : sextet_from_coherence(unpolarised).values) EXPECT_NEAR(v, 0.5, 1e-15);
}

TEST(SextetFromCoherence, PairSumsAgreeWithTrace) {
    std::mt19937_64 rng(1);
    for (int i = 0; i < 500; ++i) {
        const CoherenceMatrix g = random_coherence(rng);
        const IntensitySextet x = sextet_from_coherence(g);
        EXPECT_NEAR(x.pair_sum(Basis::H), g.trace(), 1e-12);
        EXPECT_NEAR(x.pair_sum(Basis::D), g.trace(), 1e-12);
        EXPECT_NEAR(x.pair_sum(Basis::R), g.trace(), 1e-12);
    }
}

TEST(StokesFromCoherence, BasisStatesLandOnTheirAxes) {
    for (Basis b : kAllBases) {
        const StokesVector s = stokes_from_coherence(CoherenceMatrix::outer(analysis_state(b)));
        const StokesVector expect = stokes_of(b);
        EXPECT_NEAR(s.hv, expect.hv, 1e-15);
        EXPECT_NEAR(s.da, expect.da, 1e-15);
        EXPECT_NEAR(s.rl, expect.rl, 1e-15);
        EXPECT_NEAR(*s.total, 1.0, 1e-15);
    }
    CoherenceMatrix half;
    half.g(0, 0) = half.g(1, 1) = 0.5;
    EXPECT_NEAR(stokes_from_coherence(half).norm(), 0.0, 1e-15);
    EXPECT_THROW(stokes_from_coherence(CoherenceMatrix{}), Error);
}

TEST(StokesFromCoherence, VIsProportionalToRMinusL) {
    const JonesVector diff = analysis_state(Basis::R) - analysis_state(Basis::L);
    EXPECT_LT(std::abs(diff.h), 1e-15);
    EXPECT_NEAR(std::abs(diff.v), std::sqrt(2.0), 1e-15);
}

TEST(StokesFromCoherence, AgreesWithSextetRoute) {
    std::mt19937_64 rng(2);
    for (int i = 0; i < 500; ++i) {
        const CoherenceMatrix g = random_coherence(rng);
        const StokesVector a = stokes_from_coherence(g);
        const StokesVector b = stokes_from_sextet(sextet_from_coherence(g));
        EXPECT_NEAR(a.hv, b.hv, 1e-12);
        EXPECT_NEAR(a.da, b.da, 1e-12);
        EXPECT_NEAR(a.rl, b.rl, 1e-12);
    }
}

TEST(StokesFromCoherence, PureStatesHaveUnitPurity) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        const JonesVector j{{n(rng), n(rng)}, {n(rng), n(rng)}};
        EXPECT_NEAR(purity(stokes_from_coherence(CoherenceMatrix::outer(j))), 1.0, 1e-12);
    }
}

TEST(StokesFromCoherence, PurityMatchesDensityIdentity) {
    // |S| = sqrt(2 tr(rho^2) - 1), rho = G / tr G.
    std::mt19937_64 rng(4);
    for (int i = 0; i < 500; ++i) {
        const CoherenceMatrix g = random_coherence(rng);
        const Matrix2 rho = (1.0 / g.trace()) * g.g;
        const double tr_sq = (rho * rho).trace().real();
        EXPECT_NEAR(purity(stokes_from_coherence(g)), std::sqrt(2.0 * tr_sq - 1.0), 1e-10);
    }
}

TEST(Purity, Values) {
    EXPECT_DOUBLE_EQ(purity(stokes_of(Basis::H)), 1.0);
    EXPECT_DOUBLE_EQ(purity(StokesVector{}), 0.0);
    EXPECT_DOUBLE_EQ(purity({0.81, 0.0, 0.0, std::nullopt, false}), 0.81);
}

TEST(Fidelity, Values) {
    const StokesVector h = stokes_of(Basis::H);
    EXPECT_DOUBLE_EQ(fidelity(h, h), 1.0);
    EXPECT_DOUBLE_EQ(fidelity(-h, h), 0.0);
    EXPECT_NEAR(fidelity({0.81, 0.0, 0.0, std::nullopt, false}, h), 0.905, 1e-15);
    EXPECT_THROW(fidelity(h, StokesVector{0.5, 0.0, 0.0, std::nullopt, false}), Error);
}

TEST(Fidelity, ComplementaryTargetsSumToOne) {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 500; ++i) {
        const StokesVector s = random_physical_stokes(rng);
        StokesVector t = random_physical_stokes(rng);
        const double n = t.norm();
        t = {t.hv / n, t.da / n, t.rl / n, std::nullopt, false};
        EXPECT_NEAR(fidelity(s, t) + fidelity(s, -t), 1.0, 1e-12);
        EXPECT_GE(fidelity(s, t), -1e-12);
        EXPECT_LE(fidelity(s, t), 1.0 + 1e-12);
    }
}

TEST(Extrapolate, RoundTripRecoversConditional) {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 2000; ++i) {
        const IntensitySextet up = random_sextet(rng);
        const IntensitySextet cav = random_sextet(rng);
        const double p = i % 2 ? 0.47 : std::max(1e-3, u(rng));
        const IntensitySextet back = extrapolate_conditional(compose_average(cav, up, p), cav, p);
        EXPECT_TRUE(back.raw);
        for (int k = 0; k < 6; ++k) EXPECT_NEAR(back.values[k], up.values[k], 1e-12);
    }
}

TEST(Extrapolate, FixedPointAndErrors) {
    const IntensitySextet cav = IntensitySextet::from(0.1, 0.2, 0.3, 0.4, 0.5, 0.6);
    for (double p : {0.1, 0.47, 1.0}) {
        const IntensitySextet x = extrapolate_conditional(cav, cav, p);
        for (int k = 0; k < 6; ++k) EXPECT_NEAR(x.values[k], cav.values[k], 1e-15);
    }
    EXPECT_THROW(extrapolate_conditional(cav, cav, 0.0), Error);
    EXPECT_THROW(extrapolate_conditional(cav, cav, 1.5), Error);
}

TEST(Extrapolate, NegativeValuesPassThrough) {
    const IntensitySextet avg = IntensitySextet::from(0.0, 0.5, 0.25, 0.25, 0.25, 0.25);
    const IntensitySextet cav = IntensitySextet::from(0.2, 0.5, 0.35, 0.35, 0.35, 0.35);
    const IntensitySextet up = extrapolate_conditional(avg, cav, 0.5);
    EXPECT_NEAR(up[Basis::H], -0.2, 1e-15);
    EXPECT_TRUE(up.raw);
    const StokesVector s = stokes_from_sextet(up);
    EXPECT_TRUE(s.raw);
    EXPECT_GT(purity(s), 1.0); // unphysical and reported as such
}

TEST(ProjectPhysical, Values) {
    StokesVector s = project_physical({1.2, 0.0, 0.0, std::nullopt, true});
    EXPECT_DOUBLE_EQ(s.hv, 1.0);
    s = project_physical({0.3, 0.0, 0.0, std::nullopt, false});
    EXPECT_DOUBLE_EQ(s.hv, 0.3);
    s = project_physical({0.6, 0.6, 0.6, std::nullopt, true});
    const double k = 1.0 / (0.6 * std::sqrt(3.0));
    EXPECT_NEAR(s.hv, 0.6 * k, 1e-15);
    EXPECT_NEAR(s.da, 0.6 * k, 1e-15);
    EXPECT_NEAR(s.rl, 0.6 * k, 1e-15);
    EXPECT_NEAR(s.norm(), 1.0, 1e-15);
}

TEST(ProjectPhysical, NeverGrowsAndIsIdempotent) {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        const StokesVector s{n(rng), n(rng), n(rng), std::nullopt, false};
        const StokesVector p = project_physical(s);
        EXPECT_LE(p.norm(), s.norm() + 1e-15);
        EXPECT_LE(p.norm(), 1.0 + 1e-15);
        EXPECT_NEAR(p.dot(s), p.norm() * s.norm(), 1e-12); // same direction
        const StokesVector q = project_physical(p);
        EXPECT_DOUBLE_EQ(q.hv, p.hv);
        EXPECT_DOUBLE_EQ(q.da, p.da);
        EXPECT_DOUBLE_EQ(q.rl, p.rl);
    }
}

TEST(DensityMatrix, KnownStates) {
    const PolarisationDensityMatrix r = density_from_stokes(stokes_of(Basis::R));
    EXPECT_NEAR(std::abs(r.rho(0, 1)), 0.5, 1e-15);
    EXPECT_NEAR(r.rho(0, 0).real(), 0.5, 1e-15);
    // Must equal the projector onto the R Jones vector.
    const CoherenceMatrix proj = CoherenceMatrix::outer(analysis_state(Basis::R));
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) EXPECT_LT(std::abs(r.rho(a, b) - proj.g(a, b)), 1e-15);

    const PolarisationDensityMatrix mixed = density_from_stokes(StokesVector{});
    EXPECT_NEAR(mixed.rho(0, 0).real(), 0.5, 1e-15);
    EXPECT_NEAR(std::abs(mixed.rho(0, 1)), 0.0, 1e-15);
    EXPECT_THROW(density_from_stokes({1.0, 0.5, 0.0, std::nullopt, false}), Error);
}

TEST(DensityMatrix, RoundTripAndPhysicality) {
    std::mt19937_64 rng(9);
    for (int i = 0; i < 100; ++i) {
        const StokesVector s = random_physical_stokes(rng);
        const PolarisationDensityMatrix d = density_from_stokes(s);
        EXPECT_NEAR(d.rho.trace().real(), 1.0, 1e-12);
        const auto ev = CoherenceMatrix{d.rho}.eigenvalues();
        EXPECT_GE(ev[0], -1e-10);
        EXPECT_LE(ev[1], 1.0 + 1e-10);
        const StokesVector back = stokes_from_density(d);
        EXPECT_NEAR(back.hv, s.hv, 1e-12);
        EXPECT_NEAR(back.da, s.da, 1e-12);
        EXPECT_NEAR(back.rl, s.rl, 1e-12);
    }
}
