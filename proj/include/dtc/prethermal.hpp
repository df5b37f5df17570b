#ifndef DTC_PRETHERMAL_HPP
#define DTC_PRETHERMAL_HPP

// Emergent Z2 operator X_tau = C e^{-i tau H}, the first-order effective Hamiltonian
// H_F1 = -(N + X^dag N X)/2, quasi-energy pairing, ground doublets and drive timescales.
//
// Everything is built densely, either on the whole basis or inside the k = 0 and k = pi
// momentum sectors. Both sectors together hold the Neel states and the cats, which is all
// the pairing and splitting analyses look at.

#include <dtc/dynamics.hpp>
#include <dtc/error.hpp>
#include <dtc/hilbert.hpp>
#include <dtc/linalg.hpp>
#include <dtc/observables.hpp>
#include <dtc/operators.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

namespace dtc {

/// X_tau, H_F1 and U_F1 on one working space (the whole basis or one momentum sector).
struct EffectiveModel {
    std::shared_ptr<const Basis> basis;
    std::shared_ptr<const MomentumSector> sector; // null: whole basis
    double tau = 0.0;
    double epsilon = 0.0;
    Eigen::MatrixXcd X;
    Eigen::MatrixXcd H_F1;
    Eigen::MatrixXcd U_F1;
    double involution_defect = 0.0; // max |X^2 - 1|
    double symmetry_defect = 0.0;   // max |[H_F1, X]|

    Eigen::Index dim() const { return X.rows(); }
    double momentum() const {
        return sector ? sector->k() : std::numeric_limits<double>::quiet_NaN();
    }
    StateVector to_working(const StateVector& psi) const { return sector ? sector->project(psi) : psi; }
    StateVector from_working(const StateVector& phi) const { return sector ? sector->unproject(phi) : phi; }
};

namespace detail {

inline EffectiveModel assemble_effective(const Eigen::MatrixXcd& H, const Eigen::MatrixXcd& N, double tau,
                                         double epsilon) {
    EffectiveModel m;
    m.tau = tau;
    m.epsilon = epsilon;
    const auto hs = linalg::eigh(H);
    const auto ns = linalg::eigh(N);
    const Eigen::MatrixXcd C = linalg::spectral_function(ns, [](double n) {
        return std::exp(Complex(0.0, -std::numbers::pi * std::round(n)));
    });
    m.X = C * linalg::spectral_function(hs, [tau](double e) { return std::exp(Complex(0.0, -tau * e)); });
    m.H_F1 = -0.5 * (N + m.X.adjoint() * N * m.X);
    m.H_F1 = 0.5 * (m.H_F1 + m.H_F1.adjoint()).eval();
    const auto fs = linalg::eigh(m.H_F1);
    m.U_F1 = linalg::spectral_function(fs, [epsilon](double e) { return std::exp(Complex(0.0, -epsilon * e)); }) * m.X;
    const auto n = m.X.rows();
    m.involution_defect = linalg::max_abs(m.X * m.X - Eigen::MatrixXcd::Identity(n, n));
    m.symmetry_defect = linalg::max_abs(m.H_F1 * m.X - m.X * m.H_F1);
    return m;
}

} // namespace detail

/// Whole-basis effective model. Dense: keep to a few thousand states.
inline EffectiveModel build_effective_model(std::shared_ptr<const Basis> basis, const OperatorMatrix& H,
                                            const OperatorMatrix& N, double tau, double epsilon) {
    if (!(tau > 0.0))
        throw ModelError("tau must be positive");
    EffectiveModel m = detail::assemble_effective(H.to_dense(), N.to_dense(), tau, epsilon);
    m.basis = std::move(basis);
    return m;
}

/// Effective model restricted to one momentum sector of a periodic basis.
inline EffectiveModel build_effective_model(std::shared_ptr<const Basis> basis,
                                            std::shared_ptr<const MomentumSector> sector, const OperatorMatrix& H,
                                            const OperatorMatrix& N, double tau, double epsilon) {
    if (!(tau > 0.0))
        throw ModelError("tau must be positive");
    EffectiveModel m =
        detail::assemble_effective(project_operator(*sector, H), project_operator(*sector, N), tau, epsilon);
    m.basis = std::move(basis);
    m.sector = std::move(sector);
    return m;
}

/// One block (whole basis) or the k = 0 and k = pi blocks of a model.
inline std::vector<EffectiveModel> build_effective_blocks(const Model& model, double tau, double epsilon,
                                                          bool use_sectors = true) {
    std::vector<EffectiveModel> out;
    if (!use_sectors) {
        out.push_back(build_effective_model(model.basis, model.H, model.N, tau, epsilon));
        return out;
    }
    for (auto k : {MomentumSector::Momentum::zero, MomentumSector::Momentum::pi}) {
        auto sector = std::make_shared<const MomentumSector>(*model.basis, k);
        out.push_back(build_effective_model(model.basis, std::move(sector), model.H, model.N, tau, epsilon));
    }
    return out;
}

/// Quasi-energies of U_F1 with overlaps on a reference state.
struct PairingReport {
    double tau = 0.0;
    std::vector<double> quasi_energies; // in (-pi, pi]
    std::vector<double> overlaps;
    double top_pair_gap = 0.0; // folded to [0, pi]

    double overlap_sum() const { return std::accumulate(overlaps.begin(), overlaps.end(), 0.0); }

    /// Combined weight of the two largest overlaps.
    double top_pair_weight() const {
        std::vector<double> o = overlaps;
        if (o.size() < 2)
            return std::accumulate(o.begin(), o.end(), 0.0);
        std::partial_sort(o.begin(), o.begin() + 2, o.end(), std::greater<>());
        return o[0] + o[1];
    }

    void write_csv(std::ostream& os, bool header = true) const {
        if (header)
            os << "tau,quasi_energy,overlap\n";
        os << std::setprecision(12);
        for (std::size_t i = 0; i < quasi_energies.size(); ++i)
            os << tau << ',' << quasi_energies[i] << ',' << overlaps[i] << '\n';
    }
};

/// Diagonalize U_F1 in every block (Schur form of a unitary is diagonal, so the Schur vectors
/// are eigenvectors) and report eigenphases with overlaps on `reference` (whole-basis vector).
inline PairingReport pairing_report(const std::vector<EffectiveModel>& blocks, const StateVector& reference) {
    if (blocks.empty())
        throw ModelError("no effective-model blocks");
    PairingReport r;
    r.tau = blocks.front().tau;
    for (const auto& b : blocks) {
        Eigen::ComplexSchur<Eigen::MatrixXcd> schur(b.U_F1);
        if (schur.info() != Eigen::Success)
            throw NumericalError("Schur decomposition of U_F1 failed");
        const Eigen::VectorXcd ref = b.to_working(reference);
        const Eigen::VectorXcd proj = schur.matrixU().adjoint() * ref;
        for (Eigen::Index i = 0; i < b.dim(); ++i) {
            r.quasi_energies.push_back(linalg::wrap_phase(std::arg(schur.matrixT()(i, i))));
            r.overlaps.push_back(std::norm(proj(i)));
        }
    }
    std::vector<std::size_t> order(r.overlaps.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (r.overlaps[a] != r.overlaps[b])
            return r.overlaps[a] > r.overlaps[b];
        return r.quasi_energies[a] < r.quasi_energies[b];
    });
    if (order.size() >= 2)
        r.top_pair_gap = linalg::phase_distance(r.quasi_energies[order[0]], r.quasi_energies[order[1]]);
    return r;
}

/// One pairing report per tau at fixed epsilon, reference |Z2>.
inline std::vector<PairingReport> pairing_scan(const Model& model, std::span<const double> taus, double epsilon,
                                               bool use_sectors = true) {
    const StateVector z2 = density_wave_state(*model.basis, 2, 0);
    std::vector<PairingReport> out;
    for (double tau : taus)
        out.push_back(pairing_report(build_effective_blocks(model, tau, epsilon, use_sectors), z2));
    return out;
}

/// An H_F1 level with its quantum numbers.
struct Level {
    double energy = 0.0;
    double momentum = 0.0; // NaN on the whole basis
    double x_label = 0.0;  // Re <v|X|v>; +-1 when X is an involution
    std::size_t block = 0;
    StateVector vector; // working-space coordinates of its block
};

enum class DoubletSelection { lowest, cat_overlap };

struct GroundManifold {
    std::vector<Level> levels; // ascending energy
    std::size_t first = 0, second = 1;
    double delta_E = 0.0;     // doublet splitting
    double gap = 0.0;         // distance to the next level
    double cat_overlap = 0.0; // min over (|Z2> +- |Z2'>)/sqrt2 of its weight in the doublet
};

/// Levels of H_F1 over all blocks, multiplets rotated to X eigenvectors.
///
/// `lowest`: the doublet is the two lowest levels, gap = E2 - E0. `cat_overlap`: the two levels
/// carrying most cat weight (needed when X is not an involution and the low end of H_F1 is made
/// of states the Neel dynamics never reaches); gap = distance from the doublet to the nearest other
/// level.
inline GroundManifold ground_manifold(const std::vector<EffectiveModel>& blocks,
                                      DoubletSelection selection = DoubletSelection::lowest) {
    GroundManifold g;
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
        const auto& b = blocks[bi];
        const auto es = linalg::eigh(b.H_F1);
        Eigen::MatrixXcd V = es.vectors;
        const auto n = es.values.size();
        for (Eigen::Index i = 0; i < n;) {
            Eigen::Index j = i + 1;
            while (j < n && std::abs(es.values(j) - es.values(i)) <= 1e-10 * std::max(1.0, std::abs(es.values(i))))
                ++j;
            if (j - i > 1) {
                const Eigen::MatrixXcd sub = V.middleCols(i, j - i);
                Eigen::ComplexSchur<Eigen::MatrixXcd> schur(sub.adjoint() * b.X * sub);
                V.middleCols(i, j - i) = sub * schur.matrixU();
            }
            i = j;
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            Level l;
            l.energy = es.values(i);
            l.momentum = b.momentum();
            l.vector = V.col(i);
            l.x_label = l.vector.dot(b.X * l.vector).real();
            l.block = bi;
            g.levels.push_back(std::move(l));
        }
    }
    std::stable_sort(g.levels.begin(), g.levels.end(), [](const Level& a, const Level& b) { return a.energy < b.energy; });
    if (g.levels.size() < 2)
        throw ModelError("ground manifold needs at least two levels");

    const Basis& basis = *blocks.front().basis;
    const StateVector z2 = density_wave_state(basis, 2, 0), z2p = density_wave_state(basis, 2, 1);
    const StateVector cats[2] = {(z2 + z2p) / std::sqrt(2.0), (z2 - z2p) / std::sqrt(2.0)};
    auto weight = [&](const Level& l, const StateVector& cat) {
        return std::norm(blocks[l.block].to_working(cat).dot(l.vector));
    };

    if (selection == DoubletSelection::lowest) {
        g.first = 0;
        g.second = 1;
    } else {
        std::vector<std::size_t> order(g.levels.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::vector<double> w(g.levels.size());
        for (std::size_t i = 0; i < w.size(); ++i)
            w[i] = weight(g.levels[i], cats[0]) + weight(g.levels[i], cats[1]);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return w[a] > w[b]; });
        g.first = std::min(order[0], order[1]);
        g.second = std::max(order[0], order[1]);
    }
    const double e0 = g.levels[g.first].energy, e1 = g.levels[g.second].energy;
    g.delta_E = e1 - e0;
    if (selection == DoubletSelection::lowest) {
        g.gap = g.levels.size() > 2 ? g.levels[2].energy - e0 : std::numeric_limits<double>::infinity();
    } else {
        g.gap = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < g.levels.size(); ++i)
            if (i != g.first && i != g.second)
                g.gap = std::min({g.gap, std::abs(g.levels[i].energy - e0), std::abs(g.levels[i].energy - e1)});
    }
    g.cat_overlap = 1.0;
    for (const auto& cat : cats)
        g.cat_overlap = std::min(g.cat_overlap, weight(g.levels[g.first], cat) + weight(g.levels[g.second], cat));
    return g;
}

/// Least-squares line through (L, ln delta_E).
struct SplittingFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 1.0;
    double residual = 0.0; // sum of squared residuals
    std::vector<int> sizes;
    std::vector<double> splittings;
    std::vector<int> excluded; // delta_E under the 1e-13 floor
};

inline SplittingFit fit_splitting(std::span<const int> sizes, std::span<const double> splittings) {
    if (sizes.size() != splittings.size())
        throw ModelError("sizes and splittings differ in length");
    SplittingFit f;
    std::vector<double> x, y;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        if (!(splittings[i] >= 1e-13)) {
            f.excluded.push_back(sizes[i]);
            continue;
        }
        f.sizes.push_back(sizes[i]);
        f.splittings.push_back(splittings[i]);
        x.push_back(sizes[i]);
        y.push_back(std::log(splittings[i]));
    }
    if (x.size() < 2)
        throw NumericalError("splitting fit needs two sizes above the numerical floor");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0)
        throw NumericalError("splitting fit needs distinct sizes");
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (f.intercept + f.slope * x[i]);
        f.residual += r * r;
    }
    f.r2 = syy > 0.0 ? 1.0 - f.residual / syy : 1.0;
    return f;
}

/// Ground-doublet splitting of H_F1 at each L (sector mode), fitted on a log scale.
/// `make` builds the model for a given L.
template <class MakeModel>
SplittingFit splitting_scaling(std::span<const int> sizes, double tau, MakeModel&& make,
                               DoubletSelection selection = DoubletSelection::lowest) {
    std::vector<double> split;
    for (int L : sizes) {
        if (L % 2 != 0)
            throw ModelError("splitting scaling needs even L");
        const Model m = make(L);
        // H_F1 does not depend on epsilon; any value will do
        split.push_back(ground_manifold(build_effective_blocks(m, tau, 0.0), selection).delta_E);
    }
    return fit_splitting(sizes, split);
}

/// Exact one-period Floquet operator restricted to one working space.
struct FloquetBlock {
    std::shared_ptr<const MomentumSector> sector; // null: whole basis
    Eigen::MatrixXcd U;

    StateVector to_working(const StateVector& psi) const { return sector ? sector->project(psi) : psi; }
};

namespace detail {

inline Eigen::MatrixXcd exp_hermitian(const Eigen::MatrixXcd& H, double t) {
    return linalg::spectral_function(linalg::eigh(H), [t](double e) { return std::exp(Complex(0.0, -t * e)); });
}

inline Eigen::MatrixXcd period_unitary(const Eigen::MatrixXcd& H, const Eigen::MatrixXcd& N, const DriveSpec& spec) {
    if (spec.pulse == PulseShape::delta)
        return exp_hermitian(N, spec.theta) * exp_hermitian(H, spec.tau);
    const double a = spec.amplitude == AmplitudeMode::raw ? spec.theta : spec.theta / spec.pulse_width;
    const Eigen::MatrixXcd half = exp_hermitian(H + a * N, spec.pulse_width / 2);
    return half * exp_hermitian(H, spec.tau - spec.pulse_width) * half;
}

} // namespace detail

/// U_F of `spec` in the k = 0 and k = pi sectors (or on the whole basis).
inline std::vector<FloquetBlock> floquet_blocks(const Model& model, const DriveSpec& spec, bool use_sectors = true) {
    spec.validate();
    std::vector<FloquetBlock> out;
    if (!use_sectors) {
        out.push_back({nullptr, detail::period_unitary(model.H.to_dense(), model.N.to_dense(), spec)});
        return out;
    }
    for (auto k : {MomentumSector::Momentum::zero, MomentumSector::Momentum::pi}) {
        auto sector = std::make_shared<const MomentumSector>(*model.basis, k);
        Eigen::MatrixXcd U =
            detail::period_unitary(project_operator(*sector, model.H), project_operator(*sector, model.N), spec);
        out.push_back({std::move(sector), std::move(U)});
    }
    return out;
}

/// The pi-paired Floquet eigenstates carrying most |Z2> weight.
///
/// Their quasi-energies differ by pi + splitting; in the frame rotating with the kick this is
/// the doublet splitting to all orders in epsilon. delta_E = splitting / tau, so
/// pi / (2 delta_E) is the time for |Z2> to turn into a cat-like superposition.
struct FloquetDoublet {
    PairingReport spectrum;
    double splitting = 0.0; // rad per period
    double delta_E = 0.0;
    double weight = 0.0; // combined |Z2> overlap of the pair
};

inline FloquetDoublet floquet_doublet(const std::vector<FloquetBlock>& blocks, const Basis& basis, double tau) {
    const StateVector z2 = density_wave_state(basis, 2, 0);
    FloquetDoublet d;
    d.spectrum.tau = tau;
    for (const auto& b : blocks) {
        Eigen::ComplexSchur<Eigen::MatrixXcd> schur(b.U);
        if (schur.info() != Eigen::Success)
            throw NumericalError("Schur decomposition of U_F failed");
        const Eigen::VectorXcd proj = schur.matrixU().adjoint() * b.to_working(z2);
        for (Eigen::Index i = 0; i < b.U.rows(); ++i) {
            d.spectrum.quasi_energies.push_back(linalg::wrap_phase(std::arg(schur.matrixT()(i, i))));
            d.spectrum.overlaps.push_back(std::norm(proj(i)));
        }
    }
    const auto& ov = d.spectrum.overlaps;
    if (ov.size() < 2)
        throw ModelError("Floquet doublet needs two states");
    std::vector<std::size_t> order(ov.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::partial_sort(order.begin(), order.begin() + 2, order.end(),
                      [&](std::size_t a, std::size_t b) { return ov[a] > ov[b]; });
    const double gap =
        linalg::phase_distance(d.spectrum.quasi_energies[order[0]], d.spectrum.quasi_energies[order[1]]);
    d.spectrum.top_pair_gap = gap;
    d.splitting = std::numbers::pi - gap;
    d.delta_E = d.splitting / tau;
    d.weight = ov[order[0]] + ov[order[1]];
    return d;
}

inline FloquetDoublet floquet_doublet(const Model& model, const DriveSpec& spec, bool use_sectors = true) {
    return floquet_doublet(floquet_blocks(model, spec, use_sectors), *model.basis, spec.tau);
}

/// Emergent timescales of a stroboscopic fidelity series F_n.
struct TimescaleReport {
    double T_s = 0.0;
    std::optional<double> T_b;
    double T_g = std::numeric_limits<double>::infinity();
    std::optional<double> T_g_dyn;
    double delta_E = 0.0; // physical units: |epsilon| dE(H_F1) / tau
    double gap = 0.0;     // same units
    double beat_power_ratio = 0.0;
};

/// Beat period of the even-period series F_{2n}, in samples of that series.
inline std::optional<double> beat_period(std::span<const double> even, double* power_ratio = nullptr) {
    const auto peak = dominant_frequency(even, 4, 3.0);
    if (!peak)
        return std::nullopt;
    if (power_ratio)
        *power_ratio = peak->power / std::max(peak->median_power, 1e-300);
    return peak->period;
}

/// First time F_{2n} drops below F_{2n+1}, linearly interpolated on the double-period grid
/// t = 2 n tau.
inline std::optional<double> crossing_time(std::span<const double> F, double tau) {
    std::vector<double> d;
    for (std::size_t n = 0; 2 * n + 1 < F.size(); ++n)
        d.push_back(F[2 * n] - F[2 * n + 1]);
    for (std::size_t n = 1; n < d.size(); ++n)
        if (d[n - 1] >= 0.0 && d[n] < 0.0) {
            const double frac = d[n - 1] / (d[n - 1] - d[n]);
            return 2.0 * tau * (static_cast<double>(n - 1) + frac);
        }
    return std::nullopt;
}

/// T_s = 2 tau; T_b from the F_{2n} spectrum; T_g = pi / (2 delta_E) with delta_E in physical
/// units; T_g_dyn from the F_{2n} / F_{2n+1} crossing.
inline TimescaleReport extract_timescales(std::span<const double> F, double tau, double delta_E, double gap) {
    TimescaleReport r;
    r.T_s = 2.0 * tau;
    std::vector<double> even;
    for (std::size_t n = 0; 2 * n < F.size(); ++n)
        even.push_back(F[2 * n]);
    if (auto p = beat_period(even, &r.beat_power_ratio))
        r.T_b = *p * 2.0 * tau;
    r.delta_E = delta_E;
    r.gap = gap;
    if (r.delta_E > 0.0)
        r.T_g = std::numbers::pi / (2.0 * r.delta_E);
    r.T_g_dyn = crossing_time(F, tau);
    return r;
}

/// First-order splitting: delta_E = |epsilon| dE(H_F1) / tau.
inline TimescaleReport extract_timescales(std::span<const double> F, double tau, double epsilon,
                                          const GroundManifold& ground) {
    return extract_timescales(F, tau, std::abs(epsilon) * ground.delta_E / tau, std::abs(epsilon) * ground.gap / tau);
}

/// Splitting from the exact Floquet doublet; the gap is left at zero.
inline TimescaleReport extract_timescales(std::span<const double> F, double tau, const FloquetDoublet& d) {
    return extract_timescales(F, tau, std::abs(d.delta_E), 0.0);
}

/// Stroboscopic imbalance response at one kick angle.
struct BeatPoint {
    double theta = 0.0;
    double f2 = 0.0;          // weight at omega_d / 2
    double band_weight = 0.0; // weight within the band around omega_d / 2
    std::optional<double> beat; // cycles per period of (-1)^n I_n
    double beat_power_ratio = 0.0;
};

/// Drive |Z2> for spec.n_periods at each theta and record the subharmonic response and the
/// beat frequency of the demodulated imbalance.
inline std::vector<BeatPoint> beat_line_scan(const Model& model, DriveSpec spec, std::span<const double> thetas,
                                             double band = 0.1) {
    const StateVector z2 = density_wave_state(*model.basis, 2, 0);
    const OperatorMatrix I = build_imbalance(*model.basis);
    std::vector<BeatPoint> out;
    for (double th : thetas) {
        spec.theta = th;
        const FloquetDrive drive(model, spec);
        const TrajectoryRecord rec = run_drive(drive, z2, {expectation_observable("I", I)});
        std::vector<double> x(rec.series[0].begin() + 1, rec.series[0].end());
        BeatPoint p;
        p.theta = th;
        p.f2 = subharmonic_weight(x, spec.tau);
        p.band_weight = band_weight(x, spec.tau, std::numbers::pi / spec.tau, band * std::numbers::pi / spec.tau);
        for (std::size_t n = 1; n < x.size(); n += 2)
            x[n] = -x[n];
        if (auto peak = dominant_frequency(x)) {
            p.beat = peak->frequency;
            p.beat_power_ratio = peak->power / std::max(peak->median_power, 1e-300);
        }
        out.push_back(p);
    }
    return out;
}

/// nu = a |theta - theta0| fitted in the L1 sense (robust to stray spectral peaks).
struct VFit {
    double theta0 = 0.0;
    double slope = 0.0;
    double cost = 0.0; // mean absolute residual
};

inline VFit fit_v_shape(std::span<const double> theta, std::span<const double> nu, std::size_t grid = 2001) {
    if (theta.size() != nu.size() || theta.size() < 3)
        throw ModelError("V fit needs at least three points");
    const auto [lo, hi] = std::minmax_element(theta.begin(), theta.end());
    VFit best;
    best.cost = std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < grid; ++g) {
        const double t0 = *lo + (*hi - *lo) * static_cast<double>(g) / static_cast<double>(grid - 1);
        // weighted median of nu_i / |theta_i - t0| with weights |theta_i - t0| minimizes the L1 cost in a
        std::vector<std::pair<double, double>> r;
        for (std::size_t i = 0; i < theta.size(); ++i) {
            const double d = std::abs(theta[i] - t0);
            if (d > 0.0)
                r.emplace_back(nu[i] / d, d);
        }
        if (r.empty())
            continue;
        std::sort(r.begin(), r.end());
        double total = 0.0;
        for (const auto& [q, w] : r)
            total += w;
        double acc = 0.0, a = r.back().first;
        for (const auto& [q, w] : r) {
            acc += w;
            if (acc >= total / 2) {
                a = q;
                break;
            }
        }
        double cost = 0.0;
        for (std::size_t i = 0; i < theta.size(); ++i)
            cost += std::abs(nu[i] - a * std::abs(theta[i] - t0));
        cost /= static_cast<double>(theta.size());
        if (cost < best.cost)
            best = {t0, a, cost};
    }
    return best;
}

} // namespace dtc

#endif // DTC_PRETHERMAL_HPP
