#include "oracles.hpp"

#include <dtc/observables.hpp>

#include <gtest/gtest.h>

#include <numbers>
#include <sstream>

using namespace dtc;

namespace {

constexpr double pi = std::numbers::pi;

std::vector<double> alternating(std::size_t n) {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i)
        x[i] = i % 2 ? -1.0 : 1.0;
    return x;
}

} // namespace

TEST(Entropy, ProductStateIsZero) {
    const auto b = enumerate_constrained(8);
    const auto [z2, z2p] = neel_states(b);
    EXPECT_NEAR(entanglement_entropy(b, z2), 0.0, 1e-12);
}

TEST(Entropy, CatStateIsLn2) {
    const auto b = enumerate_constrained(8);
    const auto [z2, z2p] = neel_states(b);
    const StateVector cat = (z2 + z2p) / std::sqrt(2.0);
    EXPECT_NEAR(entanglement_entropy(b, cat), std::log(2.0), 1e-12);
    EXPECT_NEAR(oracle::entropy(embed_state(b, cat), 8, 4), std::log(2.0), 1e-12);
}

TEST(Entropy, AgreesWithSvdOracleOnEveryCut) {
    const auto b = enumerate_constrained(10, Boundary::open);
    const StateVector r = oracle::random_state(static_cast<Eigen::Index>(b.dim()), 11);
    const StateVector full = embed_state(b, r);
    for (int cut = 1; cut < 10; ++cut)
        EXPECT_NEAR(entanglement_entropy(b, r, cut), oracle::entropy(full, 10, cut), 1e-10) << cut;
    EXPECT_EQ(entanglement_entropy(b, r, 0), 0.0);
    EXPECT_THROW(entanglement_entropy(b, r, 11), ModelError);
}

TEST(Entropy, RandomStateNearPageValue) {
    const auto b = full_basis(8);
    double s = 0.0;
    const int samples = 20;
    for (int k = 0; k < samples; ++k)
        s += entanglement_entropy(b, oracle::random_state(256, 100 + static_cast<std::uint64_t>(k)));
    s /= samples;
    EXPECT_NEAR(s, 4.0 * std::log(2.0) - 0.5, 0.05);
}

TEST(Subharmonic, AlternatingSeriesScoresOne) {
    for (std::size_t n : {4u, 10u, 400u})
        EXPECT_NEAR(subharmonic_weight(alternating(n), 0.7), 1.0, 1e-12) << n;
}

TEST(Subharmonic, ConstantSeriesScoresZero) {
    EXPECT_NEAR(subharmonic_weight(std::vector<double>(50, 0.3), 1.0), 0.0, 1e-15);
    EXPECT_THROW(subharmonic_weight(std::vector<double>(3, 0.3), 1.0), ModelError);
}

TEST(Subharmonic, PeriodFourSeries) {
    std::vector<double> x(400);
    for (std::size_t n = 0; n < x.size(); ++n)
        x[n] = std::cos(pi * static_cast<double>(n) / 2);
    const double t1 = 1.3;
    EXPECT_NEAR(subharmonic_weight(x, t1), 0.0, 1e-12);
    // the weight splits evenly between +- omega_d/4
    EXPECT_NEAR(subharmonic_weight(x, t1, pi / (2 * t1)), 0.5, 1e-12);
    EXPECT_NEAR(subharmonic_weight(x, t1, 3 * pi / (2 * t1)), 0.5, 1e-12);
}

TEST(Subharmonic, SpectrumIsNormalized) {
    std::vector<double> x(64);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    for (auto& v : x)
        v = g(rng);
    const auto s = subharmonic_spectrum(x, 0.5);
    double total = 0.0;
    for (double a : s.amplitudes) {
        EXPECT_GE(a, 0.0);
        total += a;
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
    // FFT bins against the direct sum
    for (std::size_t k = 0; k < x.size(); ++k)
        EXPECT_NEAR(s.amplitudes[k], subharmonic_weight(x, 0.5, s.omegas[k]), 1e-12) << k;
    EXPECT_NEAR(band_weight(x, 0.5, pi, 100.0), 1.0, 1e-12);
    EXPECT_NEAR(band_weight(alternating(64), 0.5, pi / 0.5, 0.1 * pi / 0.5), 1.0, 1e-12);
}

TEST(Fidelity, Examples) {
    const auto b = enumerate_constrained(8);
    const auto [z2, z2p] = neel_states(b);
    EXPECT_DOUBLE_EQ(revival_fidelity(z2, z2), 1.0);
    EXPECT_EQ(revival_fidelity(z2, z2p), 0.0);
    EXPECT_THROW(revival_fidelity(z2, StateVector::Zero(3)), ModelError);
}

TEST(Ghz, Examples) {
    const auto b = enumerate_constrained(8);
    const auto [z2, z2p] = neel_states(b);
    for (double phi : {0.0, 0.4, 2.0, pi}) {
        const StateVector cat = (z2 + std::polar(1.0, phi) * z2p) / std::sqrt(2.0);
        EXPECT_NEAR(ghz_fidelity(b, cat), 1.0, 1e-14);
    }
    EXPECT_NEAR(ghz_fidelity(b, z2), 0.5, 1e-15);
    EXPECT_EQ(ghz_fidelity(b, b.basis_state(0)), 0.0);
}

TEST(Qfi, Examples) {
    for (int L : {8, 10}) {
        const auto b = full_basis(L);
        const StateVector z2 = density_wave_state(b, 2, 0), z2p = density_wave_state(b, 2, 1);
        EXPECT_NEAR(quantum_fisher_information(b, (z2 + z2p) / std::sqrt(2.0)), double(L * L), 1e-10);
        EXPECT_NEAR(quantum_fisher_information(b, z2), 0.0, 1e-12);
        EXPECT_NEAR(quantum_fisher_information(b, b.basis_state(0)), 0.0, 1e-12);
    }
}

TEST(Qfi, PhaseInvariance) {
    const auto b = enumerate_constrained(10);
    const StateVector r = oracle::random_state(static_cast<Eigen::Index>(b.dim()), 12);
    EXPECT_NEAR(quantum_fisher_information(b, r), quantum_fisher_information(b, Complex(0.0, 1.0) * r), 1e-12);
}

TEST(TimeAverage, Examples) {
    const std::vector<double> t{0.0, 1.0, 2.0, 4.0};
    EXPECT_DOUBLE_EQ(time_averaged(t, std::vector<double>(4, 0.7)), 0.7);
    EXPECT_DOUBLE_EQ(time_averaged(t, std::vector<double>{0.0, 0.5, 1.0, 2.0}), 1.0);
    EXPECT_THROW(time_averaged(t, std::vector<double>{1.0}), ModelError);
}

TEST(TimeAverage, EchoEntropyVanishes) {
    DriveSpec s;
    s.tau = 1.7;
    s.n_periods = 20;
    const Model m = make_model(10, s);
    const auto [z2, z2p] = neel_states(*m.basis);
    const auto rec = run_drive(FloquetDrive(m, s), z2, {entropy_observable("S_ent", m.basis)}, Sampling::stroboscopic(2));
    EXPECT_NEAR(time_averaged_entropy(rec), 0.0, 1e-10);
}

TEST(Correlator, StaticNeelState) {
    const auto b = enumerate_constrained(8);
    const auto [z2, z2p] = neel_states(b);
    const Eigen::Index d = static_cast<Eigen::Index>(b.dim());
    const auto C = spatiotemporal_correlator(b, z2, Eigen::MatrixXcd(Eigen::MatrixXcd::Identity(d, d)), 2);
    EXPECT_NEAR(std::abs(C.pi_zero() - 0.5), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(C.at(0, 0) - 0.5), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(C.pi_pi()), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(C.at(1, 0)), 0.0, 1e-14);
}

TEST(Correlator, NeelExchangeMovesWeightToPiPi) {
    const auto b = enumerate_constrained(8);
    const auto [z2, z2p] = neel_states(b);
    const Eigen::Index d = static_cast<Eigen::Index>(b.dim());
    Eigen::MatrixXcd U = Eigen::MatrixXcd::Identity(d, d);
    const auto i = static_cast<Eigen::Index>(b.index(density_wave_config(8, 2, 0)));
    const auto j = static_cast<Eigen::Index>(b.index(density_wave_config(8, 2, 1)));
    U(i, i) = U(j, j) = 0.0;
    U(i, j) = U(j, i) = 1.0;
    for (int n_T : {2, 10}) {
        const auto C = spatiotemporal_correlator(b, z2, U, n_T);
        EXPECT_NEAR(std::abs(C.pi_pi()), 0.5, 1e-14);
        EXPECT_NEAR(std::abs(C.pi_zero()), 0.0, 1e-14);
    }
}

TEST(Correlator, RandomStateHasNoOrder) {
    DriveSpec s;
    s.hamiltonian = HamiltonianKind::rydberg;
    s.theta = 0.9 * pi;
    s.tau = 4.6;
    const Model m = make_model(12, s);
    const FloquetDrive drive(m, s);
    const StateVector r = oracle::random_state(static_cast<Eigen::Index>(m.basis->dim()), 13);
    const auto C = spatiotemporal_correlator(
        *m.basis, r, [&](const StateVector& v) { return drive.step_inverse(v); }, 8);
    EXPECT_LT(std::abs(C.pi_zero()), 0.05);
    EXPECT_LT(std::abs(C.pi_pi()), 0.05);
}

TEST(Correlator, CsvLayout) {
    const auto b = enumerate_constrained(4);
    const auto [z2, z2p] = neel_states(b);
    const auto C = spatiotemporal_correlator(b, z2, Eigen::MatrixXcd(Eigen::MatrixXcd::Identity(7, 7)), 2);
    std::ostringstream os;
    C.write_csv(os);
    const std::string s = os.str();
    EXPECT_EQ(s.rfind("q,omega,re,im,abs\n", 0), 0u);
    EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 1 + 4 * 2);
}

TEST(DominantFrequency, FindsPlantedTone) {
    std::vector<double> x(300);
    for (std::size_t n = 0; n < x.size(); ++n)
        x[n] = std::cos(2 * pi * static_cast<double>(n) / 23.0);
    const auto p = dominant_frequency(x);
    ASSERT_TRUE(p.has_value());
    EXPECT_NEAR(p->period, 23.0, 0.2);
    EXPECT_GT(p->power, 3 * p->median_power);
    EXPECT_FALSE(dominant_frequency(std::vector<double>(40, 1.0)).has_value());
}
