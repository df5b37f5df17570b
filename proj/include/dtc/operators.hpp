#ifndef DTC_OPERATORS_HPP
#define DTC_OPERATORS_HPP

// Hamiltonians and static operators over a Basis.
//
// Sign convention: sigma^z = 1 - 2n, so sigma^z|ground> = +|ground>.

#include <dtc/error.hpp>
#include <dtc/hilbert.hpp>
#include <dtc/linalg.hpp>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <complex>
#include <cstdint>
#include <iomanip>
#include <ostream>
#include <utility>
#include <variant>
#include <vector>

namespace dtc {

/// Matrix over a basis, held either as a row-major sparse matrix or a dense matrix.
class OperatorMatrix {
public:
    using Sparse = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;
    using Dense = Eigen::MatrixXcd;

    OperatorMatrix() = default;

    OperatorMatrix(Sparse m, std::uint64_t basis_hash, bool hermitian)
        : storage_(std::move(m)), basis_hash_(basis_hash), hermitian_(hermitian) {
        check_square();
    }

    OperatorMatrix(Dense m, std::uint64_t basis_hash, bool hermitian)
        : storage_(std::move(m)), basis_hash_(basis_hash), hermitian_(hermitian) {
        check_square();
    }

    static OperatorMatrix from_triplets(std::size_t dim, const std::vector<Eigen::Triplet<Complex>>& trips,
                                        std::uint64_t basis_hash, bool hermitian) {
        Sparse m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
        m.setFromTriplets(trips.begin(), trips.end());
        m.makeCompressed();
        return {std::move(m), basis_hash, hermitian};
    }

    static OperatorMatrix diagonal(const Eigen::VectorXcd& d, std::uint64_t basis_hash, bool hermitian) {
        std::vector<Eigen::Triplet<Complex>> trips;
        trips.reserve(static_cast<std::size_t>(d.size()));
        for (Eigen::Index i = 0; i < d.size(); ++i)
            if (d(i) != Complex{})
                trips.emplace_back(i, i, d(i));
        return from_triplets(static_cast<std::size_t>(d.size()), trips, basis_hash, hermitian);
    }

    bool is_sparse() const noexcept { return std::holds_alternative<Sparse>(storage_); }
    const Sparse& sparse() const { return std::get<Sparse>(storage_); }
    const Dense& dense() const { return std::get<Dense>(storage_); }

    std::size_t dim() const {
        return static_cast<std::size_t>(is_sparse() ? sparse().rows() : dense().rows());
    }
    bool hermitian() const noexcept { return hermitian_; }
    std::uint64_t basis_hash() const noexcept { return basis_hash_; }

    Dense to_dense() const { return is_sparse() ? Dense(sparse()) : dense(); }

    /// Real part as a dense matrix; throws if any imaginary part exceeds tol.
    Eigen::MatrixXd to_dense_real(double tol = 1e-14) const {
        Dense d = to_dense();
        if (linalg::max_abs(d.imag()) > tol)
            throw ModelError("operator has a non-negligible imaginary part");
        return d.real();
    }

    bool is_real(double tol = 1e-14) const {
        if (is_sparse()) {
            for (Eigen::Index k = 0; k < sparse().outerSize(); ++k)
                for (Sparse::InnerIterator it(sparse(), k); it; ++it)
                    if (std::abs(it.value().imag()) > tol)
                        return false;
            return true;
        }
        return linalg::max_abs(dense().imag()) <= tol;
    }

    bool is_diagonal() const {
        if (is_sparse()) {
            for (Eigen::Index k = 0; k < sparse().outerSize(); ++k)
                for (Sparse::InnerIterator it(sparse(), k); it; ++it)
                    if (it.row() != it.col() && it.value() != Complex{})
                        return false;
            return true;
        }
        const Dense& d = dense();
        for (Eigen::Index j = 0; j < d.cols(); ++j)
            for (Eigen::Index i = 0; i < d.rows(); ++i)
                if (i != j && d(i, j) != Complex{})
                    return false;
        return true;
    }

    Eigen::VectorXcd diagonal_entries() const {
        if (is_sparse())
            return Eigen::VectorXcd(sparse().diagonal());
        return dense().diagonal();
    }

    StateVector apply(const StateVector& psi) const {
        if (static_cast<std::size_t>(psi.size()) != dim())
            throw ModelError("state dimension does not match operator");
        if (is_sparse())
            return sparse() * psi;
        return dense() * psi;
    }

    Complex expectation(const StateVector& psi) const { return psi.dot(apply(psi)); }

    /// max |M - M^dagger|.
    double hermiticity_defect() const {
        if (is_sparse()) {
            Sparse adj = sparse().adjoint();
            Sparse diff = sparse() - adj;
            double m = 0.0;
            for (Eigen::Index k = 0; k < diff.outerSize(); ++k)
                for (Sparse::InnerIterator it(diff, k); it; ++it)
                    m = std::max(m, std::abs(it.value()));
            return m;
        }
        return linalg::max_abs(dense() - dense().adjoint());
    }

    OperatorMatrix scaled(Complex s) const {
        if (is_sparse())
            return {Sparse(s * sparse()), basis_hash_, hermitian_ && s.imag() == 0.0};
        return {Dense(s * dense()), basis_hash_, hermitian_ && s.imag() == 0.0};
    }

    friend OperatorMatrix operator+(const OperatorMatrix& a, const OperatorMatrix& b) {
        check_compatible(a, b);
        const bool herm = a.hermitian_ && b.hermitian_;
        if (a.is_sparse() && b.is_sparse())
            return {Sparse(a.sparse() + b.sparse()), a.basis_hash_, herm};
        return {Dense(a.to_dense() + b.to_dense()), a.basis_hash_, herm};
    }

    friend OperatorMatrix operator*(const OperatorMatrix& a, const OperatorMatrix& b) {
        check_compatible(a, b);
        if (a.is_sparse() && b.is_sparse())
            return {Sparse(a.sparse() * b.sparse()), a.basis_hash_, false};
        return {Dense(a.to_dense() * b.to_dense()), a.basis_hash_, false};
    }

    /// Matrix export: a header with the dimension and basis hash, then `row col re im` lines.
    void write_triplets(std::ostream& os) const {
        os << "# dim " << dim() << " basis_hash " << std::hex << basis_hash_ << std::dec << '\n';
        os << std::setprecision(17);
        auto emit = [&os](Eigen::Index r, Eigen::Index c, Complex v) {
            os << r << ' ' << c << ' ' << v.real() << ' ' << v.imag() << '\n';
        };
        if (is_sparse()) {
            for (Eigen::Index k = 0; k < sparse().outerSize(); ++k)
                for (Sparse::InnerIterator it(sparse(), k); it; ++it)
                    emit(it.row(), it.col(), it.value());
        } else {
            for (Eigen::Index i = 0; i < dense().rows(); ++i)
                for (Eigen::Index j = 0; j < dense().cols(); ++j)
                    if (dense()(i, j) != Complex{})
                        emit(i, j, dense()(i, j));
        }
    }

private:
    void check_square() const {
        const bool ok = is_sparse() ? sparse().rows() == sparse().cols() : dense().rows() == dense().cols();
        if (!ok)
            throw ModelError("operator matrix must be square");
    }

    static void check_compatible(const OperatorMatrix& a, const OperatorMatrix& b) {
        if (a.dim() != b.dim() || a.basis_hash_ != b.basis_hash_)
            throw ModelError("operators live on different bases");
    }

    std::variant<Sparse, Dense> storage_;
    std::uint64_t basis_hash_ = 0;
    bool hermitian_ = false;
};

/// Quasi-local deformation of the PXP ladder operators that makes the scar algebra
/// (numerically) exact. h_d = h0 (phi^(d-1) - phi^-(d-1))^-2 for d = 2..n_max.
struct DeformationParams {
    double h0 = 0.051;
    int n_max = 8;

    static constexpr double phi = 1.6180339887498948482; // golden ratio

    double h(int d) const {
        if (d < 2 || d > n_max)
            return 0.0;
        const double x = std::pow(phi, d - 1) - std::pow(phi, -(d - 1));
        return h0 / (x * x);
    }
};

/// Rydberg chain parameters in units of the Rabi frequency.
struct RydbergParams {
    double Omega = 1.0;
    double V1 = 10.0;
    double V2 = 10.0 / 64.0;
    double delta = 10.0 / 64.0;

    /// Defaults tied to V1: V2 = V1/2^6, delta = V2.
    static RydbergParams with_blockade(double V1, double Omega = 1.0) {
        return {Omega, V1, V1 / 64.0, V1 / 64.0};
    }
};

namespace detail {

inline int wrap_site(int s, int L) { return ((s % L) + L) % L; }

/// Both neighbours of `bit` in the ground state; open chains treat missing neighbours as ground.
inline bool neighbours_empty(Config c, int bit, int L, Boundary b) {
    const bool left_in = b == Boundary::periodic || bit > 0;
    const bool right_in = b == Boundary::periodic || bit < L - 1;
    const bool left = left_in && bits::occupied(c, wrap_site(bit - 1, L));
    const bool right = right_in && bits::occupied(c, wrap_site(bit + 1, L));
    return !left && !right;
}

inline double sigma_z(Config c, int bit) { return bits::occupied(c, bit) ? -1.0 : 1.0; }

inline void require_periodic(const Basis& basis, const char* what) {
    if (basis.boundary() != Boundary::periodic)
        throw ModelError(std::string(what) + " requires a periodic chain");
}

inline void require_even(const Basis& basis, const char* what) {
    if (basis.sites() % 2 != 0)
        throw ModelError(std::string(what) + " requires even L");
}

template <class F>
OperatorMatrix diagonal_operator(const Basis& basis, F&& entry) {
    Eigen::VectorXcd d(static_cast<Eigen::Index>(basis.dim()));
    for (std::size_t i = 0; i < basis.dim(); ++i)
        d(static_cast<Eigen::Index>(i)) = entry(basis.config(i));
    return OperatorMatrix::diagonal(d, basis.hash(), true);
}

} // namespace detail

/// H_PXP = sum_i P_{i-1} sigma^x_i P_{i+1}.
inline OperatorMatrix build_pxp(const Basis& basis) {
    const int L = basis.sites();
    std::vector<Eigen::Triplet<Complex>> trips;
    for (std::size_t j = 0; j < basis.dim(); ++j) {
        const Config c = basis.config(j);
        for (int b = 0; b < L; ++b) {
            if (!detail::neighbours_empty(c, b, L, basis.boundary()))
                continue;
            const Config flipped = c ^ (Config{1} << b);
            if (auto i = basis.find(flipped))
                trips.emplace_back(static_cast<Eigen::Index>(*i), static_cast<Eigen::Index>(j), 1.0);
        }
    }
    return OperatorMatrix::from_triplets(basis.dim(), trips, basis.hash(), true);
}

/// N = sum_i n_i.
inline OperatorMatrix build_number(const Basis& basis) {
    return detail::diagonal_operator(basis, [](Config c) { return static_cast<double>(bits::popcount(c)); });
}

/// sum_odd n - sum_even n, times 2/L when normalized (the imbalance I, in [-1, 1]).
inline OperatorMatrix build_imbalance(const Basis& basis, bool normalized = true) {
    detail::require_even(basis, "imbalance");
    const int L = basis.sites();
    const double scale = normalized ? 2.0 / L : 1.0;
    return detail::diagonal_operator(basis, [L, scale](Config c) {
        int s = 0;
        for (int b = 0; b < L; ++b)
            if (bits::occupied(c, b))
                s += (b % 2 == 0) ? 1 : -1;
        return scale * s;
    });
}

/// Single-site density n_site (1-indexed site).
inline OperatorMatrix build_site_density(const Basis& basis, int site) {
    if (site < 1 || site > basis.sites())
        throw ModelError("site " + std::to_string(site) + " outside 1.." + std::to_string(basis.sites()));
    const int bit = detail::wrap_site(site - 1, basis.sites());
    return detail::diagonal_operator(basis, [bit](Config c) { return bits::occupied(c, bit) ? 1.0 : 0.0; });
}

/// delta H = V2 sum_i n_i n_{i+2} (cyclic).
inline OperatorMatrix build_nnn_perturbation(const Basis& basis, double V2) {
    detail::require_periodic(basis, "next-nearest-neighbour term");
    const int L = basis.sites();
    return detail::diagonal_operator(basis, [L, V2](Config c) {
        int count = 0;
        for (int b = 0; b < L; ++b)
            if (bits::occupied(c, b) && bits::occupied(c, detail::wrap_site(b + 2, L)))
                ++count;
        return V2 * count;
    });
}

/// sum_i sigma^z_i sigma^z_{i+1} (cyclic), with sigma^z = 1 - 2n.
inline OperatorMatrix build_zz_bond_sum(const Basis& basis) {
    detail::require_periodic(basis, "bond sum");
    const int L = basis.sites();
    return detail::diagonal_operator(basis, [L](Config c) {
        double s = 0.0;
        for (int b = 0; b < L; ++b)
            s += detail::sigma_z(c, b) * detail::sigma_z(c, detail::wrap_site(b + 1, L));
        return s;
    });
}

/// Deformed ladder operators (H+, H-).
///
/// H+ raises even sites (bits 1,3,..) and lowers odd sites (bits 0,2,..), each flip dressed by
/// 1 + sum_{d=2}^{n_max} h_d (sigma^z_{i-d} + sigma^z_{i+d}) evaluated before the flip.
/// Distances are taken cyclically, so on rings with 2d >= L a site can appear twice or
/// coincide with the flipped site. H- = (H+)^dagger.
inline std::pair<OperatorMatrix, OperatorMatrix> build_deformed_ladders(const Basis& basis,
                                                                        const DeformationParams& p = {}) {
    detail::require_periodic(basis, "deformed ladder");
    detail::require_even(basis, "deformed ladder");
    const int L = basis.sites();
    std::vector<Eigen::Triplet<Complex>> trips;
    for (std::size_t j = 0; j < basis.dim(); ++j) {
        const Config c = basis.config(j);
        for (int b = 0; b < L; ++b) {
            if (!detail::neighbours_empty(c, b, L, basis.boundary()))
                continue;
            const bool occ = bits::occupied(c, b);
            // odd bit (even site): raise; even bit (odd site): lower.
            const bool allowed = (b % 2 == 1) ? !occ : occ;
            if (!allowed)
                continue;
            double dress = 1.0;
            for (int d = 2; d <= p.n_max; ++d) {
                const double hd = p.h(d);
                dress += hd * (detail::sigma_z(c, detail::wrap_site(b - d, L)) +
                               detail::sigma_z(c, detail::wrap_site(b + d, L)));
            }
            const Config flipped = c ^ (Config{1} << b);
            if (auto i = basis.find(flipped))
                trips.emplace_back(static_cast<Eigen::Index>(*i), static_cast<Eigen::Index>(j), dress);
        }
    }
    OperatorMatrix plus = OperatorMatrix::from_triplets(basis.dim(), trips, basis.hash(), false);
    OperatorMatrix minus(OperatorMatrix::Sparse(plus.sparse().adjoint()), basis.hash(), false);
    return {std::move(plus), std::move(minus)};
}

/// H~_PXP = H~+ + H~-.
inline OperatorMatrix build_deformed_pxp(const Basis& basis, const DeformationParams& p = {}) {
    auto [plus, minus] = build_deformed_ladders(basis, p);
    OperatorMatrix sum = plus + minus;
    return {OperatorMatrix::Sparse(sum.sparse()), basis.hash(), true};
}

/// H_Ry = (Omega/2) sum sigma^x - delta N + sum (V1 n_i n_{i+1} + V2 n_i n_{i+2}).
inline OperatorMatrix build_rydberg(const Basis& basis, const RydbergParams& p = {}) {
    const int L = basis.sites();
    const bool periodic = basis.boundary() == Boundary::periodic;
    std::vector<Eigen::Triplet<Complex>> trips;
    for (std::size_t j = 0; j < basis.dim(); ++j) {
        const Config c = basis.config(j);
        double diag = -p.delta * bits::popcount(c);
        for (int b = 0; b < L; ++b) {
            if (!bits::occupied(c, b))
                continue;
            if ((periodic || b + 1 < L) && bits::occupied(c, detail::wrap_site(b + 1, L)) && L > 1)
                diag += p.V1;
            if ((periodic || b + 2 < L) && bits::occupied(c, detail::wrap_site(b + 2, L)) && L > 2)
                diag += p.V2;
        }
        if (diag != 0.0)
            trips.emplace_back(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j), diag);
        if (p.Omega != 0.0) {
            for (int b = 0; b < L; ++b) {
                if (auto i = basis.find(c ^ (Config{1} << b)))
                    trips.emplace_back(static_cast<Eigen::Index>(*i), static_cast<Eigen::Index>(j), p.Omega / 2);
            }
        }
    }
    return OperatorMatrix::from_triplets(basis.dim(), trips, basis.hash(), true);
}

/// Diagonal unitary with entries e^{-i angle d_j}.
inline OperatorMatrix exp_diag_phase(const OperatorMatrix& op, double angle) {
    if (!op.is_diagonal())
        throw ModelError("exp_diag_phase needs a diagonal operator");
    Eigen::VectorXcd d = op.diagonal_entries();
    for (Eigen::Index i = 0; i < d.size(); ++i)
        d(i) = std::exp(Complex(0.0, -angle) * d(i));
    std::vector<Eigen::Triplet<Complex>> trips;
    for (Eigen::Index i = 0; i < d.size(); ++i)
        trips.emplace_back(i, i, d(i));
    return OperatorMatrix::from_triplets(static_cast<std::size_t>(d.size()), trips, op.basis_hash(), false);
}

/// Particle-hole operator C = prod sigma^z = e^{-i pi N}.
inline OperatorMatrix build_particle_hole(const Basis& basis) {
    return detail::diagonal_operator(basis, [](Config c) { return (bits::popcount(c) % 2 == 0) ? 1.0 : -1.0; });
}

/// One-site translation T as a permutation matrix (T|c> = |translate(c)>).
inline OperatorMatrix build_translation(const Basis& basis) {
    detail::require_periodic(basis, "translation");
    std::vector<Eigen::Triplet<Complex>> trips;
    for (std::size_t j = 0; j < basis.dim(); ++j) {
        const std::size_t i = basis.index(bits::translate(basis.config(j), basis.sites()));
        trips.emplace_back(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j), 1.0);
    }
    return OperatorMatrix::from_triplets(basis.dim(), trips, basis.hash(), false);
}

/// Sector matrix B^T M B for a translation-invariant operator.
inline Eigen::MatrixXcd project_operator(const MomentumSector& sector, const OperatorMatrix& op) {
    if (op.dim() != sector.parent_dim() || op.basis_hash() != sector.parent_hash())
        throw ModelError("operator and sector live on different bases");
    const Eigen::SparseMatrix<Complex> b = sector.isometry().cast<Complex>();
    if (op.is_sparse()) {
        Eigen::SparseMatrix<Complex> m = op.sparse();
        return Eigen::MatrixXcd(b.transpose() * m * b);
    }
    return b.transpose() * op.dense() * b;
}

} // namespace dtc

#endif // DTC_OPERATORS_HPP
