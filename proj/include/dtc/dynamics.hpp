#ifndef DTC_DYNAMICS_HPP
#define DTC_DYNAMICS_HPP

// Time evolution under static Hamiltonians and kicked / finite-width Floquet drives.

#include <dtc/error.hpp>
#include <dtc/hilbert.hpp>
#include <dtc/linalg.hpp>
#include <dtc/operators.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <iomanip>
#include <memory>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace dtc {

enum class PropagatorMode { automatic, dense, krylov };

struct KrylovOptions {
    int max_dim = 40;
    double tolerance = 1e-9; // per substep
    int max_substeps = 100000;
};

/// e^{-iHt} for a Hermitian H.
///
/// Dense mode diagonalizes H once and reuses the spectrum for every t. Krylov mode runs a
/// Lanczos subspace exponential with adaptive substeps. `automatic` picks dense up to
/// `dense_limit` basis states.
class Propagator {
public:
    static constexpr std::size_t default_dense_limit = 1100;

    explicit Propagator(OperatorMatrix H, PropagatorMode mode = PropagatorMode::automatic,
                        std::size_t dense_limit = default_dense_limit, KrylovOptions krylov = {})
        : H_(std::move(H)), krylov_(krylov) {
        if (!H_.hermitian())
            throw ModelError("propagator needs a Hermitian generator");
        if (mode == PropagatorMode::automatic)
            mode = H_.dim() <= dense_limit ? PropagatorMode::dense : PropagatorMode::krylov;
        mode_ = mode;
        if (mode_ == PropagatorMode::dense) {
            if (H_.is_real()) {
                auto es = linalg::eigh(H_.to_dense_real());
                values_ = std::move(es.values);
                real_vectors_ = std::move(es.vectors);
                real_ = true;
            } else {
                auto es = linalg::eigh(H_.to_dense());
                values_ = std::move(es.values);
                complex_vectors_ = std::move(es.vectors);
                real_ = false;
            }
        } else if (!H_.is_sparse()) {
            H_ = OperatorMatrix(OperatorMatrix::Sparse(H_.dense().sparseView()), H_.basis_hash(), true);
        }
    }

    PropagatorMode mode() const noexcept { return mode_; }
    const OperatorMatrix& hamiltonian() const noexcept { return H_; }
    std::size_t dim() const { return H_.dim(); }

    /// Spectrum (dense mode only).
    const Eigen::VectorXd& eigenvalues() const {
        require_dense();
        return values_;
    }

    /// Coefficients of psi in the eigenbasis (dense mode only).
    Eigen::VectorXcd to_eigenbasis(const StateVector& psi) const {
        require_dense();
        if (real_)
            return mixed_product_transposed(psi);
        return complex_vectors_.adjoint() * psi;
    }

    StateVector from_eigenbasis(const Eigen::VectorXcd& c) const {
        require_dense();
        if (real_)
            return mixed_product(c);
        return complex_vectors_ * c;
    }

    StateVector evolve(const StateVector& psi, double t) const {
        if (static_cast<std::size_t>(psi.size()) != dim())
            throw ModelError("state dimension does not match Hamiltonian");
        if (t == 0.0)
            return psi;
        if (mode_ == PropagatorMode::dense) {
            Eigen::VectorXcd c = to_eigenbasis(psi);
            for (Eigen::Index i = 0; i < c.size(); ++i)
                c(i) *= std::exp(Complex(0.0, -values_(i) * t));
            return from_eigenbasis(c);
        }
        return krylov_evolve(psi, t);
    }

    /// Dense e^{-iHt} (dense mode only).
    Eigen::MatrixXcd unitary(double t) const {
        require_dense();
        Eigen::VectorXcd d(values_.size());
        for (Eigen::Index i = 0; i < d.size(); ++i)
            d(i) = std::exp(Complex(0.0, -values_(i) * t));
        if (real_) {
            const Eigen::MatrixXd& v = real_vectors_;
            Eigen::MatrixXd re = v * d.real().asDiagonal() * v.transpose();
            Eigen::MatrixXd im = v * d.imag().asDiagonal() * v.transpose();
            Eigen::MatrixXcd u(re.rows(), re.cols());
            u.real() = re;
            u.imag() = im;
            return u;
        }
        return complex_vectors_ * d.asDiagonal() * complex_vectors_.adjoint();
    }

private:
    void require_dense() const {
        if (mode_ != PropagatorMode::dense)
            throw ModelError("operation needs a dense-mode propagator");
    }

    // V^T psi with V real, psi complex: one real GEMM on the (re, im) pair.
    Eigen::VectorXcd mixed_product_transposed(const StateVector& psi) const {
        const auto n = psi.size();
        Eigen::Map<const Eigen::MatrixXd> p(reinterpret_cast<const double*>(psi.data()), 2, n);
        Eigen::MatrixXd r = p * real_vectors_;
        Eigen::VectorXcd out(r.cols());
        Eigen::Map<Eigen::MatrixXd>(reinterpret_cast<double*>(out.data()), 2, r.cols()) = r;
        return out;
    }

    StateVector mixed_product(const Eigen::VectorXcd& c) const {
        const auto n = c.size();
        Eigen::Map<const Eigen::MatrixXd> p(reinterpret_cast<const double*>(c.data()), 2, n);
        Eigen::MatrixXd r = p * real_vectors_.transpose();
        StateVector out(r.cols());
        Eigen::Map<Eigen::MatrixXd>(reinterpret_cast<double*>(out.data()), 2, r.cols()) = r;
        return out;
    }

    StateVector krylov_evolve(StateVector psi, double t) const {
        const double total = std::abs(t);
        const double sign = t < 0 ? -1.0 : 1.0;
        double done = 0.0;
        double dt = total;
        int substeps = 0;
        while (done < total) {
            dt = std::min(dt, total - done);
            double err = 0.0;
            StateVector next = lanczos_step(psi, sign * dt, err);
            if (err > krylov_.tolerance && dt > total * 1e-12) {
                dt *= 0.5;
                if (++substeps > krylov_.max_substeps)
                    throw NumericalError("Krylov propagation did not converge", err);
                continue;
            }
            psi = std::move(next);
            done += dt;
            if (++substeps > krylov_.max_substeps)
                throw NumericalError("Krylov propagation did not converge", err);
            if (err < krylov_.tolerance * 1e-3)
                dt *= 2.0;
        }
        return psi;
    }

    // One Lanczos exponential step; err is the standard a-posteriori estimate
    // beta_{m} |[e^{-iT dt} e_1]_{m}|, scaled by the initial norm. The subspace grows until
    // the estimate drops below a tenth of the tolerance or max_dim is reached.
    StateVector lanczos_step(const StateVector& psi, double dt, double& err) const {
        const auto& H = H_.sparse();
        const double beta0 = psi.norm();
        if (beta0 == 0.0) {
            err = 0.0;
            return psi;
        }
        const int m_max = std::min<int>(krylov_.max_dim, static_cast<int>(dim()));
        std::vector<StateVector> v;
        v.reserve(static_cast<std::size_t>(m_max));
        v.push_back(psi / beta0);
        std::vector<double> alpha, beta;
        Eigen::VectorXcd y;
        auto small_exp = [&](double b_next) {
            const int k = static_cast<int>(alpha.size());
            Eigen::MatrixXd T = Eigen::MatrixXd::Zero(k, k);
            for (int i = 0; i < k; ++i) {
                T(i, i) = alpha[static_cast<std::size_t>(i)];
                if (i + 1 < k)
                    T(i, i + 1) = T(i + 1, i) = beta[static_cast<std::size_t>(i)];
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
            Eigen::VectorXcd phases(k);
            for (int i = 0; i < k; ++i)
                phases(i) = std::exp(Complex(0.0, -es.eigenvalues()(i) * dt));
            const Eigen::MatrixXd& Q = es.eigenvectors();
            y = Q.cast<Complex>() * (phases.cwiseProduct(Q.row(0).transpose().cast<Complex>()));
            return beta0 * b_next * std::abs(y(k - 1));
        };
        for (int m = 0; m < m_max; ++m) {
            StateVector w = H * v.back();
            const double a = v.back().dot(w).real();
            alpha.push_back(a);
            // full reorthogonalization (twice) keeps the basis orthonormal at this size
            for (int pass = 0; pass < 2; ++pass)
                for (const auto& q : v)
                    w -= q * q.dot(w);
            double b = w.norm();
            if (b < 1e-13 * (1.0 + std::abs(a)))
                b = 0.0; // invariant subspace: exact
            const int k = m + 1;
            if (b == 0.0 || k == m_max || (k >= 4 && k % 2 == 0)) {
                err = small_exp(b);
                if (b == 0.0 || k == m_max || err < 0.1 * krylov_.tolerance)
                    break;
            }
            beta.push_back(b);
            v.push_back(w / b);
        }
        StateVector out = StateVector::Zero(psi.size());
        for (Eigen::Index i = 0; i < y.size(); ++i)
            out += v[static_cast<std::size_t>(i)] * y(i);
        return out * beta0;
    }

    OperatorMatrix H_;
    KrylovOptions krylov_;
    PropagatorMode mode_ = PropagatorMode::dense;
    bool real_ = true;
    Eigen::VectorXd values_;
    Eigen::MatrixXd real_vectors_;
    Eigen::MatrixXcd complex_vectors_;
};

inline StateVector evolve_static(const OperatorMatrix& H, const StateVector& psi, double t,
                                 PropagatorMode mode = PropagatorMode::automatic) {
    return Propagator(H, mode).evolve(psi, t);
}

enum class HamiltonianKind { pxp, deformed_pxp, pxp_nnn, rydberg };
enum class PulseShape { delta, finite_width };
enum class AmplitudeMode { raw, calibrated };

inline const char* to_string(HamiltonianKind k) {
    switch (k) {
    case HamiltonianKind::pxp: return "pxp";
    case HamiltonianKind::deformed_pxp: return "deformed-pxp";
    case HamiltonianKind::pxp_nnn: return "pxp+nnn";
    case HamiltonianKind::rydberg: return "rydberg";
    }
    return "?";
}

/// Full description of one drive protocol.
struct DriveSpec {
    HamiltonianKind hamiltonian = HamiltonianKind::pxp;
    double theta = std::numbers::pi;
    double tau = 1.0;
    PulseShape pulse = PulseShape::delta;
    double pulse_width = 0.0;
    AmplitudeMode amplitude = AmplitudeMode::calibrated;
    int n_periods = 0;
    DeformationParams deformation{};
    RydbergParams rydberg{};
    double nnn_V2 = 0.0;

    void validate() const {
        if (!(tau > 0.0))
            throw ModelError("drive period must be positive");
        if (pulse == PulseShape::finite_width && !(pulse_width > 0.0 && pulse_width < tau))
            throw ModelError("finite-width pulse needs 0 < pulse_width < tau");
        if (n_periods < 0)
            throw ModelError("n_periods must be non-negative");
    }

    /// Comment lines echoed at the top of CSV output.
    std::string describe() const {
        std::ostringstream os;
        os << std::setprecision(12);
        os << "# hamiltonian=" << to_string(hamiltonian) << " theta=" << theta << " tau=" << tau
           << " pulse=" << (pulse == PulseShape::delta ? "delta" : "finite-width");
        if (pulse == PulseShape::finite_width)
            os << " pulse_width=" << pulse_width << " amplitude=" << (amplitude == AmplitudeMode::raw ? "raw" : "calibrated");
        os << " n_periods=" << n_periods << '\n';
        if (hamiltonian == HamiltonianKind::deformed_pxp)
            os << "# h0=" << deformation.h0 << " n_max=" << deformation.n_max << '\n';
        if (hamiltonian == HamiltonianKind::pxp_nnn)
            os << "# V2=" << nnn_V2 << '\n';
        if (hamiltonian == HamiltonianKind::rydberg)
            os << "# Omega=" << rydberg.Omega << " V1=" << rydberg.V1 << " V2=" << rydberg.V2
               << " delta=" << rydberg.delta << '\n';
        return os.str();
    }
};

/// Basis plus the static Hamiltonian and kick operator N for one drive choice.
/// PXP variants live in the blockaded space; the Rydberg chain uses the full 2^L space.
struct Model {
    std::shared_ptr<const Basis> basis;
    OperatorMatrix H;
    OperatorMatrix N;
};

inline Model make_model(int L, const DriveSpec& spec, Boundary boundary = Boundary::periodic) {
    Model m;
    if (spec.hamiltonian == HamiltonianKind::rydberg) {
        m.basis = std::make_shared<const Basis>(Basis::full(L, boundary));
        m.H = build_rydberg(*m.basis, spec.rydberg);
    } else {
        m.basis = std::make_shared<const Basis>(Basis::constrained(L, boundary));
        switch (spec.hamiltonian) {
        case HamiltonianKind::pxp: m.H = build_pxp(*m.basis); break;
        case HamiltonianKind::deformed_pxp: m.H = build_deformed_pxp(*m.basis, spec.deformation); break;
        case HamiltonianKind::pxp_nnn:
            m.H = build_pxp(*m.basis) + build_nnn_perturbation(*m.basis, spec.nnn_V2);
            break;
        default: break;
        }
    }
    m.N = build_number(*m.basis);
    return m;
}

/// One-period Floquet map for a DriveSpec over a fixed Model.
///
/// Delta pulses: psi -> e^{-i theta N} e^{-i tau H} psi (kick after the static segment).
/// Finite width: H + aN for tau_p/2, H for tau - tau_p, H + aN for tau_p/2, with a = theta
/// (raw) or theta/tau_p (calibrated, integrated kick area theta).
class FloquetDrive {
public:
    FloquetDrive(const Model& model, const DriveSpec& spec, PropagatorMode mode = PropagatorMode::automatic)
        : spec_(spec), basis_(model.basis), N_(model.N) {
        spec_.validate();
        const Eigen::VectorXcd n = model.N.diagonal_entries();
        kick_ = n.unaryExpr([&](Complex x) { return std::exp(Complex(0.0, -spec_.theta) * x); });
        static_ = std::make_shared<Propagator>(model.H, mode);
        if (spec_.pulse == PulseShape::finite_width) {
            const double a = spec_.amplitude == AmplitudeMode::raw ? spec_.theta : spec_.theta / spec_.pulse_width;
            pulsed_ = std::make_shared<Propagator>(model.H + model.N.scaled(a), mode);
        }
    }

    const DriveSpec& spec() const noexcept { return spec_; }
    const Basis& basis() const noexcept { return *basis_; }
    const Propagator& static_propagator() const noexcept { return *static_; }

    StateVector step(const StateVector& psi) const {
        if (spec_.pulse == PulseShape::delta)
            return kick_.cwiseProduct(static_->evolve(psi, spec_.tau));
        StateVector s = pulsed_->evolve(psi, spec_.pulse_width / 2);
        s = static_->evolve(s, spec_.tau - spec_.pulse_width);
        return pulsed_->evolve(s, spec_.pulse_width / 2);
    }

    StateVector step_inverse(const StateVector& psi) const {
        if (spec_.pulse == PulseShape::delta)
            return static_->evolve(kick_.conjugate().cwiseProduct(psi), -spec_.tau);
        StateVector s = pulsed_->evolve(psi, -spec_.pulse_width / 2);
        s = static_->evolve(s, -(spec_.tau - spec_.pulse_width));
        return pulsed_->evolve(s, -spec_.pulse_width / 2);
    }

    /// One period sampled at `substeps` evenly spaced points of the static segment; the last
    /// sample is the end of the period. `emit(dt_from_period_start, state)`.
    template <class Emit>
    StateVector step_sampled(const StateVector& psi, int substeps, Emit&& emit) const {
        if (substeps <= 1) {
            StateVector out = step(psi);
            emit(spec_.tau, out);
            return out;
        }
        StateVector s = psi;
        double offset = 0.0;
        double segment = spec_.tau;
        if (spec_.pulse == PulseShape::finite_width) {
            s = pulsed_->evolve(s, spec_.pulse_width / 2);
            offset = spec_.pulse_width / 2;
            segment = spec_.tau - spec_.pulse_width;
        }
        const double dt = segment / substeps;
        for (int j = 1; j < substeps; ++j) {
            s = static_->evolve(s, dt);
            emit(offset + j * dt, s);
        }
        s = static_->evolve(s, dt);
        if (spec_.pulse == PulseShape::delta)
            s = kick_.cwiseProduct(s);
        else
            s = pulsed_->evolve(s, spec_.pulse_width / 2);
        emit(spec_.tau, s);
        return s;
    }

    /// Dense one-period unitary (dense-mode propagators only).
    Eigen::MatrixXcd unitary() const {
        if (spec_.pulse == PulseShape::delta)
            return kick_.asDiagonal() * static_->unitary(spec_.tau);
        const Eigen::MatrixXcd half = pulsed_->unitary(spec_.pulse_width / 2);
        return half * static_->unitary(spec_.tau - spec_.pulse_width) * half;
    }

private:
    DriveSpec spec_;
    std::shared_ptr<const Basis> basis_;
    OperatorMatrix N_;
    Eigen::VectorXcd kick_;
    std::shared_ptr<Propagator> static_;
    std::shared_ptr<Propagator> pulsed_;
};

inline StateVector floquet_step(const Model& model, const DriveSpec& spec, const StateVector& psi) {
    return FloquetDrive(model, spec).step(psi);
}

/// A named scalar evaluated on a state.
struct Observable {
    std::string name;
    std::function<double(const StateVector&)> eval;
};

inline Observable expectation_observable(std::string name, OperatorMatrix op) {
    return {std::move(name), [op = std::move(op)](const StateVector& psi) { return op.expectation(psi).real(); }};
}

inline Observable fidelity_observable(std::string name, StateVector reference) {
    return {std::move(name), [ref = std::move(reference)](const StateVector& psi) { return std::norm(ref.dot(psi)); }};
}

struct Sampling {
    enum class Kind { stroboscopic, micromotion };
    Kind kind = Kind::stroboscopic;
    int every = 1;     // stroboscopic: record every `every` periods
    int substeps = 20; // micromotion: samples per period

    static Sampling stroboscopic(int every = 1) { return {Kind::stroboscopic, every, 1}; }
    static Sampling micromotion(int substeps = 20) { return {Kind::micromotion, 1, substeps}; }
};

/// Sampled observable series along a drive.
struct TrajectoryRecord {
    std::vector<double> times;
    std::vector<int> periods; // completed periods at each sample
    std::vector<std::string> names;
    std::vector<std::vector<double>> series; // one per observable
    std::vector<StateVector> states;         // filled only when requested
    std::string header;                      // DriveSpec echo

    std::size_t size() const noexcept { return times.size(); }

    const std::vector<double>& column(const std::string& name) const {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == name)
                return series[i];
        throw ModelError("no observable named " + name);
    }

    void write_csv(std::ostream& os) const {
        os << header;
        os << "t";
        for (const auto& n : names)
            os << ',' << n;
        os << '\n' << std::setprecision(12);
        for (std::size_t r = 0; r < times.size(); ++r) {
            os << times[r];
            for (const auto& s : series)
                os << ',' << s[r];
            os << '\n';
        }
    }
};

inline TrajectoryRecord run_drive(const FloquetDrive& drive, const StateVector& psi0,
                                  const std::vector<Observable>& observables,
                                  Sampling sampling = Sampling::stroboscopic(), bool keep_states = false) {
    TrajectoryRecord rec;
    rec.header = drive.spec().describe();
    for (const auto& o : observables)
        rec.names.push_back(o.name);
    rec.series.resize(observables.size());
    auto record = [&](double t, int period, const StateVector& s) {
        rec.times.push_back(t);
        rec.periods.push_back(period);
        for (std::size_t i = 0; i < observables.size(); ++i)
            rec.series[i].push_back(observables[i].eval(s));
        if (keep_states)
            rec.states.push_back(s);
    };
    const double tau = drive.spec().tau;
    StateVector psi = psi0;
    record(0.0, 0, psi);
    const int every = std::max(1, sampling.every);
    for (int n = 0; n < drive.spec().n_periods; ++n) {
        if (sampling.kind == Sampling::Kind::micromotion) {
            psi = drive.step_sampled(psi, sampling.substeps, [&](double dt, const StateVector& s) {
                const bool end = dt >= tau;
                record(n * tau + dt, end ? n + 1 : n, s);
            });
        } else {
            psi = drive.step(psi);
            if ((n + 1) % every == 0)
                record((n + 1) * tau, n + 1, psi);
        }
    }
    return rec;
}

struct RevivalOptions {
    double t_min = 1.0;
    double step = 4.74 / 200.0; // tau_r guess / 200
    double threshold = 0.1;
    int revivals = 4;           // peaks averaged; 1 returns the first maximum itself
};

/// Revival period of |<psi0| e^{-iHt} |psi0>|^2.
///
/// Samples the fidelity on a uniform grid, locates local maxima above `threshold` after
/// `t_min`, refines each by a parabola through the neighbouring samples and returns t_k / k
/// for the k-th revival (k = `revivals`, or the last one found before t_max). Maxima closer
/// than half the first revival time to the previous one are side lobes; the higher of the two
/// is kept. The first maximum alone is biased late by the early-time transient of imperfect
/// scars; averaging over a few revivals recovers the oscillation period.
inline double calibrate_tau_r(const Propagator& H, const StateVector& psi0, double t_max, RevivalOptions opt = {}) {
    const double h = opt.step;
    const auto wanted = static_cast<std::size_t>(std::max(1, opt.revivals));
    std::vector<double> f{1.0};
    std::vector<double> peaks, heights;
    StateVector psi = psi0;
    const int n = static_cast<int>(std::ceil(t_max / h));
    for (int i = 1; i <= n; ++i) {
        const double t = i * h;
        if (peaks.size() >= wanted && t > peaks.back() + 0.5 * peaks.front())
            break;
        psi = H.evolve(psi, h);
        f.push_back(std::norm(psi0.dot(psi)));
        if (i < 2)
            continue;
        const double t_mid = (i - 1) * h;
        const double a = f[static_cast<std::size_t>(i - 2)], b = f[static_cast<std::size_t>(i - 1)],
                     c = f[static_cast<std::size_t>(i)];
        if (!(t_mid > opt.t_min && b >= a && b > c && b >= opt.threshold))
            continue;
        const double denom = a - 2 * b + c;
        const double shift = denom != 0.0 ? 0.5 * (a - c) / denom : 0.0;
        const double tp = t_mid + shift * h;
        if (!peaks.empty() && tp - peaks.back() < 0.5 * peaks.front()) {
            if (b > heights.back()) {
                if (peaks.size() == 1) // the reference spacing itself moves
                    peaks.front() = tp;
                peaks.back() = tp;
                heights.back() = b;
            }
            continue;
        }
        peaks.push_back(tp);
        heights.push_back(b);
    }
    if (peaks.empty())
        throw NumericalError("no revival detected");
    return peaks.back() / static_cast<double>(peaks.size());
}

inline double calibrate_tau_r(const OperatorMatrix& H, const StateVector& psi0, double t_max, RevivalOptions opt = {}) {
    return calibrate_tau_r(Propagator(H), psi0, t_max, opt);
}

} // namespace dtc

#endif // DTC_DYNAMICS_HPP
