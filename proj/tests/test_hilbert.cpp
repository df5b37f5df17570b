#include "oracles.hpp"

#include <dtc/hilbert.hpp>

#include <gtest/gtest.h>

#include <sstream>

using namespace dtc;

TEST(Basis, SmallRingDimensions) {
    EXPECT_EQ(enumerate_constrained(2).dim(), 3u);
    EXPECT_EQ(enumerate_constrained(4).dim(), 7u);
    EXPECT_EQ(enumerate_constrained(6).dim(), 18u);
    const auto b2 = enumerate_constrained(2);
    EXPECT_TRUE(b2.contains(0b00));
    EXPECT_TRUE(b2.contains(0b01));
    EXPECT_TRUE(b2.contains(0b10));
    EXPECT_FALSE(b2.contains(0b11));
}

TEST(Basis, MatchesBruteForceBothBoundaries) {
    for (int L = 2; L <= 14; ++L)
        for (bool periodic : {true, false}) {
            const auto ref = oracle::constrained(L, periodic);
            const auto b = enumerate_constrained(L, periodic ? Boundary::periodic : Boundary::open);
            ASSERT_EQ(b.dim(), ref.size()) << "L=" << L << " periodic=" << periodic;
            for (std::size_t i = 0; i < ref.size(); ++i)
                EXPECT_EQ(b.config(i), ref[i]);
        }
}

TEST(Basis, LucasRecurrence) {
    EXPECT_EQ(oracle::lucas(3), 4);
    EXPECT_EQ(oracle::lucas(4), 7);
    for (int L = 3; L <= 20; ++L)
        EXPECT_EQ(static_cast<long long>(enumerate_constrained(L).dim()), oracle::lucas(L)) << L;
    EXPECT_EQ(enumerate_constrained(18).dim(), 5778u);
}

TEST(Basis, FullBasisAndLookup) {
    const auto b = full_basis(5);
    EXPECT_EQ(b.dim(), 32u);
    for (std::size_t i = 0; i < b.dim(); ++i)
        EXPECT_EQ(b.index(b.config(i)), i);
    const auto c = enumerate_constrained(8);
    EXPECT_FALSE(c.find(0b11).has_value());
    EXPECT_THROW(c.index(0b11), ModelError);
    EXPECT_THROW(Basis::constrained(1, Boundary::periodic), ModelError);
}

TEST(Basis, HashDistinguishesBases) {
    EXPECT_EQ(enumerate_constrained(8).hash(), enumerate_constrained(8).hash());
    EXPECT_NE(enumerate_constrained(8).hash(), enumerate_constrained(8, Boundary::open).hash());
    EXPECT_NE(enumerate_constrained(8).hash(), full_basis(8).hash());
}

TEST(Basis, CsvDump) {
    std::ostringstream os;
    enumerate_constrained(2).write_csv(os);
    EXPECT_EQ(os.str(), "index,bitstring\n0,00\n1,10\n2,01\n");
}

TEST(NeelStates, L4) {
    const auto b = enumerate_constrained(4);
    const auto [z2, z2p] = neel_states(b);
    EXPECT_EQ(density_wave_config(4, 2, 0), Config{0b0101}); // sites 1 and 3
    EXPECT_DOUBLE_EQ(std::abs(z2(static_cast<Eigen::Index>(b.index(0b0101)))), 1.0);
    EXPECT_DOUBLE_EQ(z2.norm(), 1.0);
    EXPECT_EQ(std::abs(z2.dot(z2p)), 0.0);
}

TEST(NeelStates, OddLengthRejected) {
    const auto b = enumerate_constrained(7);
    try {
        (void)neel_states(b);
        FAIL() << "expected an error";
    } catch (const ModelError& e) {
        EXPECT_NE(std::string(e.what()).find("no Néel state"), std::string::npos);
    }
}

TEST(NeelStates, PeriodFourPattern) {
    const auto b = enumerate_constrained(8);
    EXPECT_EQ(density_wave_config(8, 4, 0), Config{0b00010001});
    const auto z4 = density_wave_state(b, 4, 0);
    EXPECT_DOUBLE_EQ(std::abs(z4(static_cast<Eigen::Index>(b.index(0b00010001)))), 1.0);
    EXPECT_THROW(density_wave_state(enumerate_constrained(10), 4, 0), ModelError);
}

TEST(MomentumSectors, CatStatesAtL4) {
    const auto b = enumerate_constrained(4);
    const auto [z2, z2p] = neel_states(b);
    const StateVector plus = (z2 + z2p) / std::sqrt(2.0), minus = (z2 - z2p) / std::sqrt(2.0);
    const MomentumSector k0(b, MomentumSector::Momentum::zero), kpi(b, MomentumSector::Momentum::pi);
    EXPECT_NEAR((k0.unproject(k0.project(plus)) - plus).norm(), 0.0, 1e-14);
    EXPECT_NEAR(kpi.project(plus).norm(), 0.0, 1e-14);
    EXPECT_NEAR((kpi.unproject(kpi.project(minus)) - minus).norm(), 0.0, 1e-14);
    EXPECT_NEAR(k0.project(minus).norm(), 0.0, 1e-14);
}

TEST(MomentumSectors, DimensionsFromOrbitCount) {
    // brute-force orbit count: an orbit of period p contributes to momentum k = 2 pi m / L iff
    // e^{i k p} = 1, i.e. it supports p of the L momenta
    for (int L : {4, 6, 8, 10}) {
        const auto cfg = oracle::constrained(L, true);
        std::vector<int> per_k(static_cast<std::size_t>(L), 0);
        std::vector<bool> seen(std::size_t{1} << L, false);
        for (auto c : cfg) {
            if (seen[c])
                continue;
            int p = 0;
            auto x = c;
            do {
                seen[x] = true;
                x = ((x << 1) | (x >> (L - 1))) & ((std::uint64_t{1} << L) - 1);
                ++p;
            } while (x != c);
            for (int m = 0; m < L; ++m)
                if ((m * p) % L == 0)
                    ++per_k[static_cast<std::size_t>(m)];
        }
        const auto b = enumerate_constrained(L);
        EXPECT_EQ(static_cast<int>(MomentumSector(b, MomentumSector::Momentum::zero).dim()), per_k[0]) << L;
        EXPECT_EQ(static_cast<int>(MomentumSector(b, MomentumSector::Momentum::pi).dim()),
                  per_k[static_cast<std::size_t>(L / 2)])
            << L;
        int total = 0;
        for (int v : per_k)
            total += v;
        EXPECT_EQ(total, static_cast<int>(b.dim()));
    }
}

TEST(MomentumSectors, IsometryIsOrthonormal) {
    const auto b = enumerate_constrained(10);
    for (auto k : {MomentumSector::Momentum::zero, MomentumSector::Momentum::pi}) {
        const MomentumSector s(b, k);
        const Eigen::MatrixXd V(s.isometry());
        EXPECT_NEAR((V.transpose() * V - Eigen::MatrixXd::Identity(V.cols(), V.cols())).cwiseAbs().maxCoeff(), 0.0,
                    1e-13);
        EXPECT_EQ(s.parent_dim(), b.dim());
        EXPECT_EQ(s.parent_hash(), b.hash());
    }
}

TEST(Embedding, RoundTrip) {
    const auto b = enumerate_constrained(4);
    const auto [z2, z2p] = neel_states(b);
    const StateVector f = embed_state(b, z2);
    EXPECT_EQ(f.size(), 16);
    EXPECT_DOUBLE_EQ(std::abs(f(0b0101)), 1.0);
    EXPECT_EQ(embed_state(b, StateVector::Zero(7)).norm(), 0.0);

    const auto b10 = enumerate_constrained(10);
    const StateVector r = oracle::random_state(static_cast<Eigen::Index>(b10.dim()), 7);
    const StateVector e = embed_state(b10, r);
    EXPECT_NEAR(e.norm(), 1.0, 1e-14);
    EXPECT_NEAR((restrict_state(b10, e) - r).norm(), 0.0, 1e-15);
    EXPECT_THROW(embed_state(b10, StateVector::Zero(3)), ModelError);
}
