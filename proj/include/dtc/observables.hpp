#ifndef DTC_OBSERVABLES_HPP
#define DTC_OBSERVABLES_HPP

// Scalar diagnostics of states and time series.

#include <dtc/dynamics.hpp>
#include <dtc/error.hpp>
#include <dtc/hilbert.hpp>
#include <dtc/linalg.hpp>
#include <dtc/operators.hpp>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

namespace dtc {

/// Von Neumann entropy (nats) of sites 1..cut. cut defaults to L/2.
inline double entanglement_entropy(const Basis& basis, const StateVector& psi, int cut = -1) {
    const int L = basis.sites();
    if (cut < 0)
        cut = L / 2;
    if (cut == 0 || cut == L)
        return 0.0;
    if (cut > L)
        throw ModelError("cut beyond chain length");
    const StateVector full = embed_state(basis, psi);
    const Eigen::Index rows = Eigen::Index{1} << cut;
    const Eigen::Index cols = Eigen::Index{1} << (L - cut);
    // full index = a + 2^cut b with a the first `cut` sites: column-major (a, b).
    Eigen::Map<const Eigen::MatrixXcd> m(full.data(), rows, cols);
    const Eigen::MatrixXcd rho = rows <= cols ? Eigen::MatrixXcd(m * m.adjoint()) : Eigen::MatrixXcd(m.adjoint() * m);
    const Eigen::VectorXd p = linalg::eigvalsh(rho);
    double s = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i)
        if (p(i) > 1e-15)
            s -= p(i) * std::log(p(i));
    return s;
}

/// Observable wrapper for run_drive.
inline Observable entropy_observable(std::string name, std::shared_ptr<const Basis> basis, int cut = -1) {
    return {std::move(name), [basis = std::move(basis), cut](const StateVector& psi) {
                return entanglement_entropy(*basis, psi, cut);
            }};
}

namespace detail {

inline double mean(std::span<const double> x) {
    double m = 0.0;
    for (double v : x)
        m += v;
    return x.empty() ? 0.0 : m / static_cast<double>(x.size());
}

// |DFT|^2 of the mean-subtracted series zero-padded to M samples, bins 0..M-1
inline std::vector<double> centered_power(std::span<const double> x, std::size_t M) {
    const double m = mean(x);
    std::vector<double> in(M, 0.0);
    for (std::size_t t = 0; t < x.size(); ++t)
        in[t] = x[t] - m;
    std::vector<Complex> out;
    Eigen::FFT<double> fft;
    fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
    fft.fwd(out, in);
    std::vector<double> power(M);
    for (std::size_t k = 0; k < out.size(); ++k)
        power[k] = std::norm(out[k]);
    // real input: mirror the upper half
    for (std::size_t k = out.size(); k < M; ++k)
        power[k] = power[M - k];
    return power;
}

} // namespace detail

/// Normalized spectral weight of a uniformly sampled series at angular frequency omega.
///
/// f2(omega) = dw |t1 sum_n e^{i omega t_n} (x_n - mean)|^2 / (t1 sum_n (x_n - mean)^2)
/// with t_n = n t1, dw = 1/T and T = (number of samples) t1. A perfectly alternating series
/// of even length scores exactly 1 at omega = pi/t1. Zero-variance input gives 0.
inline double subharmonic_weight(std::span<const double> x, double t1, double omega) {
    if (x.size() < 4)
        throw ModelError("subharmonic weight needs at least 4 samples");
    const double m = detail::mean(x);
    Complex s{};
    double var = 0.0;
    for (std::size_t n = 0; n < x.size(); ++n) {
        const double d = x[n] - m;
        s += std::polar(d, omega * t1 * static_cast<double>(n));
        var += d * d;
    }
    if (var <= 1e-300)
        return 0.0;
    const double T = static_cast<double>(x.size()) * t1;
    return (1.0 / T) * std::norm(t1 * s) / (t1 * var);
}

/// Default evaluation at half the drive frequency, omega = pi / t1 for stroboscopic samples.
inline double subharmonic_weight(std::span<const double> x, double t1) {
    return subharmonic_weight(x, t1, std::numbers::pi / t1);
}

/// Normalized weights f2 on the DFT grid omega_k = 2 pi k / T, k = 0..M-1.
struct SpectralSeries {
    std::vector<double> omegas;
    std::vector<double> amplitudes;
    double T = 0.0;
    double t1 = 0.0;
};

inline SpectralSeries subharmonic_spectrum(std::span<const double> x, double t1) {
    if (x.size() < 4)
        throw ModelError("subharmonic weight needs at least 4 samples");
    SpectralSeries out;
    out.t1 = t1;
    out.T = static_cast<double>(x.size()) * t1;
    const double m = detail::mean(x);
    double var = 0.0;
    for (double v : x)
        var += (v - m) * (v - m);
    const std::vector<double> power = detail::centered_power(x, x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        out.omegas.push_back(2.0 * std::numbers::pi * static_cast<double>(k) / out.T);
        out.amplitudes.push_back(var <= 1e-300 ? 0.0 : power[k] / (static_cast<double>(x.size()) * var));
    }
    return out;
}

/// Sum of the normalized weights f2(omega_k) over DFT bins with |omega_k - center| <= half_width.
/// All bins together sum to one for a non-constant series.
inline double band_weight(std::span<const double> x, double t1, double center, double half_width) {
    const SpectralSeries s = subharmonic_spectrum(x, t1);
    double w = 0.0;
    for (std::size_t k = 0; k < s.omegas.size(); ++k)
        if (std::abs(s.omegas[k] - center) <= half_width)
            w += s.amplitudes[k];
    return w;
}

inline double revival_fidelity(const StateVector& psi0, const StateVector& psi) {
    if (psi0.size() != psi.size())
        throw ModelError("states live on different bases");
    return std::norm(psi0.dot(psi));
}

/// Phase-insensitive GHZ fidelity 1/2 (|c0|^2 + |c1|^2 + 2|c0* c1|) with c0, c1 the
/// amplitudes on |Z2> and |Z2'>.
inline double ghz_fidelity(const Basis& basis, const StateVector& psi) {
    const int L = basis.sites();
    const Complex c0 = psi(static_cast<Eigen::Index>(basis.index(density_wave_config(L, 2, 0))));
    const Complex c1 = psi(static_cast<Eigen::Index>(basis.index(density_wave_config(L, 2, 1))));
    return 0.5 * (std::norm(c0) + std::norm(c1) + 2.0 * std::abs(std::conj(c0) * c1));
}

/// Pure-state QFI for generator A: 4 (<A^2> - <A>^2).
inline double quantum_fisher_information(const StateVector& psi, const OperatorMatrix& A) {
    const StateVector a_psi = A.apply(psi);
    const double mean = psi.dot(a_psi).real();
    const double second = a_psi.squaredNorm();
    return std::max(0.0, 4.0 * (second - mean * mean));
}

/// QFI with the unnormalized staggered density sum_odd n - sum_even n.
inline double quantum_fisher_information(const Basis& basis, const StateVector& psi) {
    return quantum_fisher_information(psi, build_imbalance(basis, false));
}

/// Trapezoidal time average of `values` over the sampled window.
inline double time_averaged(std::span<const double> times, std::span<const double> values) {
    if (times.size() != values.size() || times.empty())
        throw ModelError("time average needs matching non-empty series");
    if (times.size() == 1)
        return values[0];
    double acc = 0.0;
    for (std::size_t i = 1; i < times.size(); ++i)
        acc += 0.5 * (values[i] + values[i - 1]) * (times[i] - times[i - 1]);
    return acc / (times.back() - times.front());
}

inline double time_averaged_entropy(const TrajectoryRecord& rec, const std::string& column = "S_ent") {
    return time_averaged(rec.times, rec.column(column));
}

/// Stroboscopic density-density correlator on the (q, omega) grid
/// q = 2 pi m / L, omega = 2 pi p / n_T.
struct CorrelatorGrid {
    int L = 0;
    int n_T = 0;
    std::vector<double> qs;
    std::vector<double> omegas;
    Eigen::MatrixXcd values; // rows: q index, cols: omega index

    Complex at(int m, int p) const {
        return values(((m % L) + L) % L, ((p % n_T) + n_T) % n_T);
    }

    /// Value at (pi, pi); needs even L and even n_T.
    Complex pi_pi() const { return at(L / 2, n_T / 2); }
    Complex pi_zero() const { return at(L / 2, 0); }

    double median_abs() const {
        std::vector<double> a;
        for (Eigen::Index i = 0; i < values.size(); ++i)
            a.push_back(std::abs(values.data()[i]));
        std::nth_element(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(a.size() / 2), a.end());
        return a[a.size() / 2];
    }

    void write_csv(std::ostream& os) const {
        os << "q,omega,re,im,abs\n" << std::setprecision(12);
        for (int m = 0; m < L; ++m)
            for (int p = 0; p < n_T; ++p) {
                const Complex v = values(m, p);
                os << qs[static_cast<std::size_t>(m)] << ',' << omegas[static_cast<std::size_t>(p)] << ','
                   << v.real() << ',' << v.imag() << ',' << std::abs(v) << '\n';
            }
    }
};

/// C(q, w) = 1/(n_T L) sum_{n=1}^{n_T} sum_{j=1}^{L} e^{i(n w + j q)} <psi0| n_i U^n n_{i+j} U^{-n} |psi0>.
///
/// Uses <psi0| n_i U^n n_{i+j} U^{-n} |psi0> = <U^{-n} n_i psi0| n_{i+j} |U^{-n} psi0>, so only
/// two states are propagated. `inverse_step` applies U^{-1}. With average_sites the reference
/// site i runs over the chain instead of being fixed to site 1.
inline CorrelatorGrid spatiotemporal_correlator(const Basis& basis, const StateVector& psi0,
                                                const std::function<StateVector(const StateVector&)>& inverse_step,
                                                int n_T, bool average_sites = false) {
    const int L = basis.sites();
    if (n_T < 1)
        throw ModelError("correlator needs n_T >= 1");
    std::vector<Eigen::VectorXd> density(static_cast<std::size_t>(L));
    for (int s = 0; s < L; ++s)
        density[static_cast<std::size_t>(s)] = build_site_density(basis, s + 1).diagonal_entries().real();

    Eigen::MatrixXcd corr = Eigen::MatrixXcd::Zero(n_T, L); // (n-1, j-1)
    const int n_ref = average_sites ? L : 1;
    for (int i = 0; i < n_ref; ++i) {
        StateVector a = density[static_cast<std::size_t>(i)].cast<Complex>().cwiseProduct(psi0);
        StateVector b = psi0;
        for (int n = 1; n <= n_T; ++n) {
            a = inverse_step(a);
            b = inverse_step(b);
            for (int j = 1; j <= L; ++j) {
                const auto& d = density[static_cast<std::size_t>((i + j) % L)];
                corr(n - 1, j - 1) += a.dot(d.cast<Complex>().cwiseProduct(b));
            }
        }
    }
    corr /= static_cast<double>(n_ref);

    CorrelatorGrid g;
    g.L = L;
    g.n_T = n_T;
    g.values = Eigen::MatrixXcd::Zero(L, n_T);
    for (int m = 0; m < L; ++m)
        g.qs.push_back(2.0 * std::numbers::pi * m / L);
    for (int p = 0; p < n_T; ++p)
        g.omegas.push_back(2.0 * std::numbers::pi * p / n_T);
    for (int m = 0; m < L; ++m)
        for (int p = 0; p < n_T; ++p) {
            Complex acc{};
            for (int n = 1; n <= n_T; ++n)
                for (int j = 1; j <= L; ++j)
                    acc += std::polar(1.0, n * g.omegas[static_cast<std::size_t>(p)] + j * g.qs[static_cast<std::size_t>(m)]) *
                           corr(n - 1, j - 1);
            g.values(m, p) = acc / static_cast<double>(n_T * L);
        }
    return g;
}

inline CorrelatorGrid spatiotemporal_correlator(const Basis& basis, const StateVector& psi0, const Eigen::MatrixXcd& U,
                                                int n_T, bool average_sites = false) {
    const Eigen::MatrixXcd u_inv = U.adjoint();
    return spatiotemporal_correlator(
        basis, psi0, [&u_inv](const StateVector& s) { return StateVector(u_inv * s); }, n_T, average_sites);
}

/// Dominant non-zero frequency of a uniformly sampled series.
struct SpectralPeak {
    double frequency = 0.0; // cycles per sample
    double period = 0.0;    // samples
    double power = 0.0;
    double median_power = 0.0;
};

/// Zero-padded DFT (factor `padding`) of the mean-subtracted series; the highest bin above
/// the zero-frequency lobe is refined by a parabola through log-power. Returns nothing when
/// the peak is below `noise_factor` times the median power of the padded spectrum.
inline std::optional<SpectralPeak> dominant_frequency(std::span<const double> x, int padding = 4,
                                                      double noise_factor = 3.0) {
    const std::size_t n = x.size();
    if (n < 4)
        return std::nullopt;
    const std::size_t M = n * static_cast<std::size_t>(std::max(1, padding));
    const std::size_t half = M / 2;
    std::vector<double> power = detail::centered_power(x, M);
    power.resize(half + 1);
    // Skip the main lobe around zero frequency: first `padding` bins.
    const std::size_t k0 = static_cast<std::size_t>(std::max(1, padding));
    if (k0 >= half)
        return std::nullopt;
    std::size_t best = k0;
    for (std::size_t k = k0; k < half; ++k)
        if (power[k] > power[best])
            best = k;
    std::vector<double> sorted(power.begin() + 1, power.end());
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2), sorted.end());
    const double median = sorted[sorted.size() / 2];
    if (!(power[best] >= noise_factor * median) || power[best] <= 0.0)
        return std::nullopt;
    double shift = 0.0;
    if (best > 0 && best < half) {
        const double a = std::log(power[best - 1] + 1e-300), b = std::log(power[best]),
                     c = std::log(power[best + 1] + 1e-300);
        const double denom = a - 2 * b + c;
        if (denom < 0.0)
            shift = std::clamp(0.5 * (a - c) / denom, -0.5, 0.5);
    }
    SpectralPeak p;
    p.frequency = (static_cast<double>(best) + shift) / static_cast<double>(M);
    p.period = 1.0 / p.frequency;
    p.power = power[best];
    p.median_power = median;
    return p;
}

} // namespace dtc

#endif // DTC_OBSERVABLES_HPP
