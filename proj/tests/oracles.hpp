// Brute-force reference implementations. Nothing here calls into the library proper;
// everything works on raw bitstrings over the full 2^L space.
#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

namespace oracle {

using cd = std::complex<double>;

inline bool bit(std::uint64_t c, int i) { return (c >> i) & 1U; }

inline bool allowed(std::uint64_t c, int L, bool periodic) {
    for (int i = 0; i + 1 < L; ++i)
        if (bit(c, i) && bit(c, i + 1))
            return false;
    if (periodic && L > 2 && bit(c, 0) && bit(c, L - 1))
        return false;
    if (periodic && L == 2 && bit(c, 0) && bit(c, 1))
        return false;
    return true;
}

inline std::vector<std::uint64_t> constrained(int L, bool periodic) {
    std::vector<std::uint64_t> out;
    for (std::uint64_t c = 0; c < (std::uint64_t{1} << L); ++c)
        if (allowed(c, L, periodic))
            out.push_back(c);
    return out;
}

inline long long lucas(int n) {
    long long a = 2, b = 1; // L_0, L_1
    for (int i = 0; i < n; ++i) {
        const long long t = a + b;
        a = b;
        b = t;
    }
    return a;
}

// single-site Pauli operators embedded by Kronecker products; site i is bit i
inline Eigen::MatrixXcd site_op(const Eigen::Matrix2cd& m, int i, int L) {
    const Eigen::Index D = Eigen::Index{1} << L;
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(D, D);
    for (Eigen::Index a = 0; a < D; ++a)
        for (int s = 0; s < 2; ++s) {
            const int ai = static_cast<int>((a >> i) & 1);
            const cd v = m(s, ai);
            if (v != cd(0))
                out((a & ~(Eigen::Index{1} << i)) | (Eigen::Index(s) << i), a) += v;
        }
    return out;
}

inline Eigen::Matrix2cd sx() { return (Eigen::Matrix2cd() << 0, 1, 1, 0).finished(); }
inline Eigen::Matrix2cd proj0() { return (Eigen::Matrix2cd() << 1, 0, 0, 0).finished(); }
inline Eigen::Matrix2cd nocc() { return (Eigen::Matrix2cd() << 0, 0, 0, 1).finished(); }

// P X P on the full space, periodic ring
inline Eigen::MatrixXcd pxp_full(int L) {
    const Eigen::Index D = Eigen::Index{1} << L;
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(D, D);
    for (int i = 0; i < L; ++i)
        H += site_op(proj0(), (i + L - 1) % L, L) * site_op(sx(), i, L) * site_op(proj0(), (i + 1) % L, L);
    return H;
}

// restriction of a full-space operator to a list of configurations
inline Eigen::MatrixXcd restrict(const Eigen::MatrixXcd& M, const std::vector<std::uint64_t>& cfg) {
    const auto n = static_cast<Eigen::Index>(cfg.size());
    Eigen::MatrixXcd out(n, n);
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b)
            out(a, b) = M(static_cast<Eigen::Index>(cfg[a]), static_cast<Eigen::Index>(cfg[b]));
    return out;
}

// Rydberg chain built from Pauli strings: Omega/2 sum X - delta sum n + V1 sum n n+1 + V2 sum n n+2
inline Eigen::MatrixXcd rydberg_full(int L, double Omega, double V1, double V2, double delta) {
    const Eigen::Index D = Eigen::Index{1} << L;
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(D, D);
    for (int i = 0; i < L; ++i) {
        H += 0.5 * Omega * site_op(sx(), i, L);
        H -= delta * site_op(nocc(), i, L);
        H += V1 * site_op(nocc(), i, L) * site_op(nocc(), (i + 1) % L, L);
        H += V2 * site_op(nocc(), i, L) * site_op(nocc(), (i + 2) % L, L);
    }
    return H;
}

inline Eigen::MatrixXcd expmi(const Eigen::MatrixXcd& H, double t) {
    return (cd(0.0, -t) * H).exp();
}

inline Eigen::VectorXcd random_state(Eigen::Index n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    Eigen::VectorXcd v(n);
    for (Eigen::Index i = 0; i < n; ++i)
        v(i) = cd(g(rng), g(rng));
    return v.normalized();
}

// von Neumann entropy of the left `cut` sites (bits 0..cut-1) from a full-space vector
inline double entropy(const Eigen::VectorXcd& psi, int L, int cut) {
    const Eigen::Index dl = Eigen::Index{1} << cut, dr = Eigen::Index{1} << (L - cut);
    Eigen::MatrixXcd M(dl, dr);
    for (Eigen::Index a = 0; a < psi.size(); ++a)
        M(a % dl, a / dl) = psi(a);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
    double S = 0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
        const double p = svd.singularValues()(i) * svd.singularValues()(i);
        if (p > 1e-300)
            S -= p * std::log(p);
    }
    return S;
}

} // namespace oracle
