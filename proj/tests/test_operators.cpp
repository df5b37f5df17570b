#include "oracles.hpp"

#include <dtc/linalg.hpp>
#include <dtc/operators.hpp>

#include <gtest/gtest.h>

#include <numbers>
#include <sstream>

using namespace dtc;

namespace {

double max_abs(const Eigen::MatrixXcd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

StateVector vacuum(const Basis& b) { return b.basis_state(0); }

} // namespace

TEST(Pxp, TwoSiteRing) {
    const auto b = enumerate_constrained(2);
    const auto H = build_pxp(b);
    const StateVector out = H.apply(vacuum(b));
    EXPECT_DOUBLE_EQ(out(static_cast<Eigen::Index>(b.index(0b01))).real(), 1.0);
    EXPECT_DOUBLE_EQ(out(static_cast<Eigen::Index>(b.index(0b10))).real(), 1.0);
    EXPECT_DOUBLE_EQ(std::abs(out(0)), 0.0);
}

TEST(Pxp, NeelExpectationAndRowSum) {
    const auto b = enumerate_constrained(4);
    const auto H = build_pxp(b);
    const auto [z2, z2p] = neel_states(b);
    EXPECT_EQ(std::abs(H.expectation(z2)), 0.0);
    const Eigen::MatrixXcd D = H.to_dense();
    EXPECT_DOUBLE_EQ(D.col(static_cast<Eigen::Index>(b.index(0))).cwiseAbs().sum(), 4.0);
}

TEST(Pxp, MatchesKroneckerOracle) {
    for (int L : {4, 6, 8, 10}) {
        const auto b = enumerate_constrained(L);
        const auto cfg = oracle::constrained(L, true);
        const Eigen::MatrixXcd ref = oracle::restrict(oracle::pxp_full(L), cfg);
        EXPECT_LT(max_abs(build_pxp(b).to_dense() - ref), 1e-14) << L;
    }
}

TEST(Pxp, OpenChainHermitianAndTranslationInvariantRing) {
    const auto open = enumerate_constrained(9, Boundary::open);
    EXPECT_LT(build_pxp(open).hermiticity_defect(), 1e-15);
    const auto b = enumerate_constrained(10);
    const Eigen::MatrixXcd H = build_pxp(b).to_dense(), T = build_translation(b).to_dense();
    EXPECT_LT(max_abs(T * H - H * T), 1e-14);
}

TEST(Number, Examples) {
    const auto b = enumerate_constrained(8);
    const auto N = build_number(b);
    const auto [z2, z2p] = neel_states(b);
    EXPECT_LT((N.apply(z2) - 4.0 * z2).norm(), 1e-15);
    EXPECT_EQ(N.apply(vacuum(b)).norm(), 0.0);
    EXPECT_DOUBLE_EQ(build_number(enumerate_constrained(4)).diagonal_entries().real().maxCoeff(), 2.0);
}

TEST(Imbalance, Examples) {
    const auto b = enumerate_constrained(8);
    const auto I = build_imbalance(b), Iu = build_imbalance(b, false);
    const auto [z2, z2p] = neel_states(b);
    EXPECT_LT((I.apply(z2) - z2).norm(), 1e-15);
    EXPECT_LT((I.apply(z2p) + z2p).norm(), 1e-15);
    EXPECT_LT(max_abs(Iu.to_dense() - 4.0 * I.to_dense()), 1e-14);
}

TEST(Imbalance, SiteDensitiesSum) {
    const auto b = enumerate_constrained(8);
    Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(b.dim()), static_cast<Eigen::Index>(b.dim()));
    for (int i = 1; i <= 8; ++i)
        sum += build_site_density(b, i).to_dense();
    EXPECT_LT(max_abs(sum - build_number(b).to_dense()), 1e-15);
    EXPECT_THROW(build_site_density(b, 0), ModelError);
}

TEST(NextNearest, Examples) {
    const auto b = enumerate_constrained(8);
    const double V2 = 0.3;
    const auto dH = build_nnn_perturbation(b, V2);
    const auto [z2, z2p] = neel_states(b);
    EXPECT_LT((dH.apply(z2) - V2 * 4.0 * z2).norm(), 1e-15);
    EXPECT_EQ(dH.apply(vacuum(b)).norm(), 0.0);
    EXPECT_EQ(max_abs(build_nnn_perturbation(b, 0.0).to_dense()), 0.0);
}

TEST(Deformation, Coefficients) {
    const DeformationParams p;
    EXPECT_NEAR(p.h(2), 0.051, 1e-15);
    EXPECT_EQ(p.h(1), 0.0);
    EXPECT_EQ(p.h(9), 0.0);
    EXPECT_NEAR(p.h(3), 0.051 / 5.0, 1e-15); // phi^2 - phi^-2 = sqrt5
}

TEST(Deformation, UndeformedLimit) {
    const auto b = enumerate_constrained(10);
    const DeformationParams p{0.0, 8};
    auto [plus, minus] = build_deformed_ladders(b, p);
    EXPECT_LT(max_abs((plus + minus).to_dense() - build_pxp(b).to_dense()), 1e-15);
    EXPECT_LT(max_abs(build_deformed_pxp(b, p).to_dense() - build_pxp(b).to_dense()), 1e-15);
}

TEST(Deformation, MatchesPauliOracle) {
    // H+ = sum over even sites of P s+ P dress + sum over odd sites of P s- P dress
    const int L = 10;
    const DeformationParams p{0.051, 3};
    const auto b = enumerate_constrained(L);
    const Eigen::Index D = Eigen::Index{1} << L;
    const Eigen::Matrix2cd up = (Eigen::Matrix2cd() << 0, 0, 1, 0).finished(); // |1><0|
    const Eigen::Matrix2cd down = up.adjoint();
    const Eigen::Matrix2cd sz = (Eigen::Matrix2cd() << 1, 0, 0, -1).finished();
    Eigen::MatrixXcd Hp = Eigen::MatrixXcd::Zero(D, D);
    for (int i = 0; i < L; ++i) {
        Eigen::MatrixXcd dress = Eigen::MatrixXcd::Identity(D, D);
        for (int d = 2; d <= p.n_max; ++d)
            dress += p.h(d) * (oracle::site_op(sz, (i - d + L) % L, L) + oracle::site_op(sz, (i + d) % L, L));
        const Eigen::MatrixXcd flip = oracle::site_op(i % 2 == 1 ? up : down, i, L);
        Hp += oracle::site_op(oracle::proj0(), (i + L - 1) % L, L) * flip * oracle::site_op(oracle::proj0(), (i + 1) % L, L) *
              dress;
    }
    const auto cfg = oracle::constrained(L, true);
    auto [plus, minus] = build_deformed_ladders(b, p);
    EXPECT_LT(max_abs(plus.to_dense() - oracle::restrict(Hp, cfg)), 1e-14);
    EXPECT_LT(max_abs(minus.to_dense() - oracle::restrict(Eigen::MatrixXcd(Hp.adjoint()), cfg)), 1e-14);
}

TEST(Deformation, LadderCarriesNeelToPartner) {
    const int L = 8;
    const auto b = enumerate_constrained(L);
    auto [plus, minus] = build_deformed_ladders(b);
    const auto [z2, z2p] = neel_states(b);
    StateVector v = z2;
    for (int k = 0; k < L; ++k)
        v = plus.apply(v);
    ASSERT_GT(v.norm(), 0.0);
    v.normalize();
    // the chain ends on the partner Neel state
    EXPECT_GT(std::norm(z2p.dot(v)), 0.99);
    EXPECT_LT(plus.apply(plus.apply(v)).norm(), 1e-12 * plus.apply(z2).norm() + 1e-12);
}

TEST(Deformation, ChiralAndPairedSpectrum) {
    const auto b = enumerate_constrained(8);
    const Eigen::MatrixXcd H = build_deformed_pxp(b).to_dense();
    const Eigen::MatrixXcd C = build_particle_hole(b).to_dense();
    EXPECT_LT(max_abs(C * H * C + H), 1e-12);
    const Eigen::VectorXd e = linalg::eigvalsh(H);
    const auto n = e.size();
    for (Eigen::Index i = 0; i < n; ++i)
        EXPECT_NEAR(e(i), -e(n - 1 - i), 1e-12);
}

TEST(Rydberg, FreeSpins) {
    const auto b = full_basis(6);
    const auto H = build_rydberg(b, RydbergParams{1.0, 0.0, 0.0, 0.0});
    EXPECT_NEAR(linalg::eigvalsh(H.to_dense())(0), -3.0, 1e-12);
}

TEST(Rydberg, NeelDiagonalAndPauliOracle) {
    const auto b = full_basis(4);
    const RydbergParams p;
    const auto H = build_rydberg(b, p);
    const Config z2 = density_wave_config(4, 2, 0);
    // two excitations, no nearest pair, two next-nearest bonds on the ring (1-3 and 3-1)
    EXPECT_NEAR(H.to_dense()(static_cast<Eigen::Index>(z2), static_cast<Eigen::Index>(z2)).real(),
                -2.0 * p.delta + 2.0 * p.V2, 1e-15);
    for (int L : {4, 6, 8}) {
        const auto bl = full_basis(L);
        EXPECT_LT(max_abs(build_rydberg(bl, p).to_dense() - oracle::rydberg_full(L, p.Omega, p.V1, p.V2, p.delta)),
                  1e-13)
            << L;
    }
}

TEST(Rydberg, StrongBlockadeApproachesPxp) {
    const int L = 8;
    const RydbergParams p{1.0, 1e3, 0.0, 0.0};
    const Eigen::VectorXd ryd = linalg::eigvalsh(build_rydberg(full_basis(L), p).to_dense());
    const Eigen::VectorXd pxp = linalg::eigvalsh(Eigen::MatrixXcd(0.5 * build_pxp(enumerate_constrained(L)).to_dense()));
    for (Eigen::Index i = 0; i < pxp.size(); ++i)
        EXPECT_NEAR(ryd(i), pxp(i), 5e-3) << i;
}

TEST(Kick, DiagonalPhases) {
    const auto b = enumerate_constrained(8);
    const auto N = build_number(b);
    const Eigen::Index d = static_cast<Eigen::Index>(b.dim());
    EXPECT_LT(max_abs(exp_diag_phase(N, 0.0).to_dense() - Eigen::MatrixXcd::Identity(d, d)), 1e-15);
    EXPECT_LT(max_abs(exp_diag_phase(N, std::numbers::pi).to_dense() - build_particle_hole(b).to_dense()), 1e-14);
    EXPECT_LT(max_abs(exp_diag_phase(N, 2 * std::numbers::pi).to_dense() - Eigen::MatrixXcd::Identity(d, d)), 1e-14);
    EXPECT_THROW(exp_diag_phase(build_pxp(b), 1.0), ModelError);
}

TEST(Ising, BondSumIdentity) {
    // exact on the blockaded ring: sum s_i s_{i+1} = L - 4N
    for (int L = 4; L <= 14; ++L) {
        const auto b = enumerate_constrained(L);
        const Eigen::VectorXcd zz = build_zz_bond_sum(b).diagonal_entries();
        const Eigen::VectorXcd n = build_number(b).diagonal_entries();
        EXPECT_LT((n - (L / 4.0 - 0.25 * zz.array()).matrix()).cwiseAbs().maxCoeff(), 1e-12) << L;
    }
}

TEST(Sectors, ProjectionCommutesWithHamiltonian) {
    const auto b = enumerate_constrained(10);
    const auto H = build_pxp(b);
    Eigen::VectorXd all(static_cast<Eigen::Index>(0));
    std::vector<double> e;
    const Eigen::VectorXd full = linalg::eigvalsh(H.to_dense());
    for (auto k : {MomentumSector::Momentum::zero, MomentumSector::Momentum::pi}) {
        const MomentumSector s(b, k);
        const Eigen::VectorXd ek = linalg::eigvalsh(project_operator(s, H));
        // every sector level is a level of the full matrix
        for (Eigen::Index i = 0; i < ek.size(); ++i)
            EXPECT_LT((full.array() - ek(i)).abs().minCoeff(), 1e-10);
    }
    EXPECT_THROW(project_operator(MomentumSector(b, MomentumSector::Momentum::zero), build_pxp(enumerate_constrained(8))),
                 ModelError);
}

TEST(OperatorMatrix, TripletExport) {
    const auto b = enumerate_constrained(2);
    std::ostringstream os;
    build_pxp(b).write_triplets(os);
    const std::string s = os.str();
    EXPECT_EQ(s.rfind("# dim 3 basis_hash ", 0), 0u);
    EXPECT_NE(s.find("1 0 1 0"), std::string::npos);
}
