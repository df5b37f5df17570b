#ifndef DTC_SCARS_HPP
#define DTC_SCARS_HPP

// Forward-scattering (FSA) subspace of the deformed ladders: L+1 orthonormal vectors from |Z2>
// to |Z2'>, collective spin matrices on it and Bloch-sphere trajectories.

#include <dtc/dynamics.hpp>
#include <dtc/error.hpp>
#include <dtc/hilbert.hpp>
#include <dtc/linalg.hpp>
#include <dtc/operators.hpp>

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <iomanip>
#include <memory>
#include <optional>
#include <ostream>
#include <vector>

namespace dtc {

enum class SxNormalization {
    calibrated, // scale chosen so the spectrum best matches -L/2..L/2
    literal     // 1 / (2 tau_r) with a user-supplied tau_r
};

/// Span of |Z2>, H+|Z2>, ..., |Z2'> with spin-L/2 matrices Sz, Sx, Sy in that basis.
/// The projector is K = V V^dagger.
class ScarSubspace {
public:
    ScarSubspace(std::shared_ptr<const Basis> basis, Eigen::MatrixXcd vectors, Eigen::MatrixXcd sz,
                 Eigen::MatrixXcd ladder_sum, double sx_scale)
        : basis_(std::move(basis)), V_(std::move(vectors)), Sz_(std::move(sz)), A_(std::move(ladder_sum)),
          scale_(sx_scale) {
        Sx_ = scale_ * A_;
        Sy_ = Complex(0.0, 1.0) * (Sx_ * Sz_ - Sz_ * Sx_);
    }

    const Basis& basis() const noexcept { return *basis_; }
    int sites() const noexcept { return basis_->sites(); }
    double spin() const noexcept { return basis_->sites() / 2.0; }
    Eigen::Index size() const noexcept { return V_.cols(); }
    const Eigen::MatrixXcd& vectors() const noexcept { return V_; }
    const Eigen::MatrixXcd& Sz() const noexcept { return Sz_; }
    const Eigen::MatrixXcd& Sx() const noexcept { return Sx_; }
    const Eigen::MatrixXcd& Sy() const noexcept { return Sy_; }
    /// V^dagger (H+ + H-) V before scaling.
    const Eigen::MatrixXcd& ladder_sum() const noexcept { return A_; }
    double sx_scale() const noexcept { return scale_; }

    Eigen::VectorXcd coordinates(const StateVector& psi) const { return V_.adjoint() * psi; }
    StateVector project(const StateVector& psi) const { return V_ * coordinates(psi); }
    /// Whole-basis matrix of K M K for a subspace matrix M.
    Eigen::MatrixXcd sandwiched(const Eigen::MatrixXcd& m) const { return V_ * m * V_.adjoint(); }

    Eigen::MatrixXcd S_plus() const { return Sx_ + Complex(0.0, 1.0) * Sy_; }
    Eigen::MatrixXcd S_minus() const { return Sx_ - Complex(0.0, 1.0) * Sy_; }

    /// (<Sx>, <Sy>, <Sz>) / (L/2) through the sandwiched operators.
    std::array<double, 3> bloch_vector(const StateVector& psi) const {
        const Eigen::VectorXcd a = coordinates(psi);
        const double s = spin();
        return {a.dot(Sx_ * a).real() / s, a.dot(Sy_ * a).real() / s, a.dot(Sz_ * a).real() / s};
    }

    /// max | K [Sz, S+-] K -+ K S+- K | over the whole basis, larger of the two signs.
    double closure_residual() const {
        const Eigen::MatrixXcd sp = S_plus(), sm = S_minus();
        const Eigen::MatrixXcd rp = Sz_ * sp - sp * Sz_ - sp;
        const Eigen::MatrixXcd rm = Sz_ * sm - sm * Sz_ + sm;
        return std::max(linalg::max_abs(sandwiched(rp)), linalg::max_abs(sandwiched(rm)));
    }

    /// max | [S+, S-] - 2 Sz | inside the subspace; zero only for an exact spin representation.
    double casimir_defect() const {
        const Eigen::MatrixXcd sp = S_plus(), sm = S_minus();
        return linalg::max_abs(sp * sm - sm * sp - 2.0 * Sz_);
    }

    /// Largest deviation of the sorted Sx spectrum from -L/2, ..., L/2.
    double sx_spectrum_defect() const {
        const Eigen::VectorXd ev = linalg::eigvalsh(Sx_);
        double worst = 0.0;
        for (Eigen::Index i = 0; i < ev.size(); ++i)
            worst = std::max(worst, std::abs(ev(i) - (static_cast<double>(i) - spin())));
        return worst;
    }

private:
    std::shared_ptr<const Basis> basis_;
    Eigen::MatrixXcd V_;
    Eigen::MatrixXcd Sz_, A_, Sx_, Sy_;
    double scale_;
};

/// v0 = |Z2>, v_{k+1} ~ H+ v_k, modified Gram-Schmidt (two passes) against all earlier vectors.
inline ScarSubspace build_scar_subspace(std::shared_ptr<const Basis> basis, const DeformationParams& p = {},
                                        SxNormalization norm = SxNormalization::calibrated, double tau_r = 0.0) {
    const Basis& b = *basis;
    if (b.kind() != BasisKind::constrained)
        throw ModelError("scar subspace lives in the blockaded space");
    const int L = b.sites();
    auto [plus, minus] = build_deformed_ladders(b, p);
    const auto n = static_cast<Eigen::Index>(b.dim());
    Eigen::MatrixXcd V(n, L + 1);
    V.col(0) = density_wave_state(b, 2, 0);
    for (int k = 1; k <= L; ++k) {
        StateVector w = plus.apply(V.col(k - 1));
        for (int pass = 0; pass < 2; ++pass)
            for (int j = 0; j < k; ++j)
                w -= V.col(j) * V.col(j).dot(w);
        const double nrm = w.norm();
        if (nrm < 1e-12)
            throw NumericalError("FSA chain terminated early", nrm);
        V.col(k) = w / nrm;
    }
    const OperatorMatrix stag = build_imbalance(b, false);
    Eigen::MatrixXcd sz(L + 1, L + 1);
    for (int k = 0; k <= L; ++k)
        sz.col(k) = V.adjoint() * stag.apply(V.col(k));
    Eigen::MatrixXcd A(L + 1, L + 1);
    for (int k = 0; k <= L; ++k)
        A.col(k) = V.adjoint() * (plus.apply(V.col(k)) + minus.apply(V.col(k)));
    A = (0.5 * (A + A.adjoint())).eval();

    double scale = 1.0;
    if (norm == SxNormalization::literal) {
        if (!(tau_r > 0.0))
            throw ModelError("literal Sx normalization needs tau_r > 0");
        scale = 1.0 / (2.0 * tau_r);
    } else {
        const Eigen::VectorXd ev = linalg::eigvalsh(A);
        double num = 0.0, den = 0.0;
        for (Eigen::Index i = 0; i < ev.size(); ++i) {
            num += ev(i) * (static_cast<double>(i) - L / 2.0);
            den += ev(i) * ev(i);
        }
        if (den <= 0.0)
            throw NumericalError("ladder sum vanishes on the FSA subspace");
        scale = num / den;
    }
    return ScarSubspace(std::move(basis), std::move(V), std::move(sz), std::move(A), scale);
}

struct BlochPoint {
    double t = 0.0;
    double x = 0.0, y = 0.0, z = 0.0;
    int period = 0; // completed drive periods

    double radius() const { return std::sqrt(x * x + y * y + z * z); }
};

inline std::vector<BlochPoint> bloch_trajectory(const FloquetDrive& drive, const StateVector& psi0,
                                                const ScarSubspace& s, Sampling sampling = Sampling::stroboscopic()) {
    Observable ox{"x", [&](const StateVector& v) { return s.bloch_vector(v)[0]; }};
    Observable oy{"y", [&](const StateVector& v) { return s.bloch_vector(v)[1]; }};
    Observable oz{"z", [&](const StateVector& v) { return s.bloch_vector(v)[2]; }};
    const TrajectoryRecord rec = run_drive(drive, psi0, {ox, oy, oz}, sampling);
    std::vector<BlochPoint> out;
    for (std::size_t i = 0; i < rec.size(); ++i)
        out.push_back({rec.times[i], rec.series[0][i], rec.series[1][i], rec.series[2][i], rec.periods[i]});
    return out;
}

inline void write_bloch_csv(std::ostream& os, const std::vector<BlochPoint>& pts) {
    os << "t,x,y,z,parity_of_period\n" << std::setprecision(12);
    for (const auto& p : pts)
        os << p.t << ',' << p.x << ',' << p.y << ',' << p.z << ',' << (p.period % 2) << '\n';
}

/// Even-power model of K N K on the FSA chain.
struct NumberProjection {
    double c0 = 0.0, c2 = 0.0, c4 = 0.0;
    std::optional<double> c6;
    double residual = 0.0;         // max |fit - diagonal|
    double offdiagonal = 0.0;      // max off-diagonal entry of V^dag N V
    std::vector<double> diagonal;  // <v_k|N|v_k>
};

/// Least-squares fit of <v_k|N|v_k> to c0 + c2 m^2/L + c4 m^4/L^3 (+ c6 m^6/L^5), m = L/2 - k.
inline NumberProjection project_number_operator(const ScarSubspace& s, const OperatorMatrix& N,
                                                bool with_sixth = false) {
    const int L = s.sites();
    const auto& V = s.vectors();
    Eigen::MatrixXcd P(L + 1, L + 1);
    for (int k = 0; k <= L; ++k)
        P.col(k) = V.adjoint() * N.apply(V.col(k));
    NumberProjection out;
    for (int i = 0; i <= L; ++i)
        for (int j = 0; j <= L; ++j)
            if (i != j)
                out.offdiagonal = std::max(out.offdiagonal, std::abs(P(i, j)));
    const int terms = with_sixth ? 4 : 3;
    Eigen::MatrixXd A(L + 1, terms);
    Eigen::VectorXd y(L + 1);
    for (int k = 0; k <= L; ++k) {
        const double m = L / 2.0 - k;
        y(k) = P(k, k).real();
        out.diagonal.push_back(y(k));
        A(k, 0) = 1.0;
        A(k, 1) = m * m / L;
        A(k, 2) = std::pow(m, 4) / std::pow(L, 3);
        if (with_sixth)
            A(k, 3) = std::pow(m, 6) / std::pow(L, 5);
    }
    const Eigen::VectorXd c = A.colPivHouseholderQr().solve(y);
    out.c0 = c(0);
    out.c2 = c(1);
    out.c4 = c(2);
    if (with_sixth)
        out.c6 = c(3);
    out.residual = (A * c - y).cwiseAbs().maxCoeff();
    return out;
}

} // namespace dtc

#endif // DTC_SCARS_HPP
