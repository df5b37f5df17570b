#ifndef DTC_HILBERT_HPP
#define DTC_HILBERT_HPP

// Basis enumeration for L-site chains.
//
// Site convention (used by every module): site 1 is bit 0, site i is bit i-1.
// "Odd sites" are bits 0, 2, 4, ... and |Z2> has those excited.
// A set bit means the site is in the excited (Rydberg) state.

#include <dtc/error.hpp>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace dtc {

using Complex = std::complex<double>;
using StateVector = Eigen::VectorXcd;
using Config = std::uint64_t;

enum class Boundary { periodic, open };
enum class BasisKind { constrained, full };

inline constexpr int max_sites = 30;

namespace bits {

inline Config mask(int L) { return (Config{1} << L) - 1; }

inline bool occupied(Config c, int bit) { return (c >> bit) & 1U; }

inline int popcount(Config c) { return std::popcount(c); }

/// Translate by one site: the excitation on site i moves to site i+1 (cyclic).
inline Config translate(Config c, int L) {
    return ((c << 1) | (c >> (L - 1))) & mask(L);
}

/// No two adjacent sites excited. The wrap-around pair counts only for periodic chains.
inline bool blockade_valid(Config c, int L, Boundary b) {
    if (c & (c >> 1))
        return false;
    if (b == Boundary::periodic && L > 1 && occupied(c, 0) && occupied(c, L - 1))
        return false;
    return true;
}

/// Sites written left to right, site 1 first.
inline std::string to_string(Config c, int L) {
    std::string s(static_cast<std::size_t>(L), '0');
    for (int i = 0; i < L; ++i)
        if (occupied(c, i))
            s[static_cast<std::size_t>(i)] = '1';
    return s;
}

} // namespace bits

/// Ordered set of configurations of an L-site chain with an index map.
/// Configs are sorted ascending by integer value; the index is the position in that list.
class Basis {
public:
    static Basis constrained(int L, Boundary boundary) {
        check_sites(L);
        if (L < 2)
            throw ModelError("constrained basis needs L >= 2");
        Basis b(L, boundary, BasisKind::constrained);
        const Config n = Config{1} << L;
        for (Config c = 0; c < n; ++c)
            if (bits::blockade_valid(c, L, boundary))
                b.configs_.push_back(c);
        b.finish();
        return b;
    }

    static Basis full(int L, Boundary boundary = Boundary::periodic) {
        check_sites(L);
        if (L > 24)
            throw ModelError("full basis limited to L <= 24");
        Basis b(L, boundary, BasisKind::full);
        const Config n = Config{1} << L;
        b.configs_.resize(n);
        for (Config c = 0; c < n; ++c)
            b.configs_[c] = c;
        b.finish();
        return b;
    }

    int sites() const noexcept { return L_; }
    Boundary boundary() const noexcept { return boundary_; }
    BasisKind kind() const noexcept { return kind_; }
    std::size_t dim() const noexcept { return configs_.size(); }
    Config config(std::size_t i) const { return configs_[i]; }
    std::span<const Config> configs() const noexcept { return configs_; }
    std::uint64_t hash() const noexcept { return hash_; }

    std::optional<std::size_t> find(Config c) const {
        if (kind_ == BasisKind::full)
            return c <= bits::mask(L_) ? std::optional<std::size_t>(c) : std::nullopt;
        auto it = std::lower_bound(configs_.begin(), configs_.end(), c);
        if (it == configs_.end() || *it != c)
            return std::nullopt;
        return static_cast<std::size_t>(it - configs_.begin());
    }

    std::size_t index(Config c) const {
        auto i = find(c);
        if (!i)
            throw ModelError("configuration " + bits::to_string(c, L_) + " not in basis");
        return *i;
    }

    bool contains(Config c) const { return find(c).has_value(); }

    StateVector basis_state(Config c) const {
        StateVector v = StateVector::Zero(static_cast<Eigen::Index>(dim()));
        v(static_cast<Eigen::Index>(index(c))) = 1.0;
        return v;
    }

    /// CSV dump `index,bitstring`.
    void write_csv(std::ostream& os) const {
        os << "index,bitstring\n";
        for (std::size_t i = 0; i < configs_.size(); ++i)
            os << i << ',' << bits::to_string(configs_[i], L_) << '\n';
    }

    friend bool operator==(const Basis& a, const Basis& b) {
        return a.L_ == b.L_ && a.boundary_ == b.boundary_ && a.kind_ == b.kind_ && a.hash_ == b.hash_;
    }

private:
    Basis(int L, Boundary b, BasisKind k) : L_(L), boundary_(b), kind_(k) {}

    static void check_sites(int L) {
        if (L < 1 || L > max_sites)
            throw ModelError("site count out of range: " + std::to_string(L));
    }

    void finish() {
        // FNV-1a over (L, boundary, configs); stable across runs.
        std::uint64_t h = 1469598103934665603ULL;
        auto mix = [&h](std::uint64_t x) {
            for (int k = 0; k < 8; ++k) {
                h ^= (x >> (8 * k)) & 0xFFU;
                h *= 1099511628211ULL;
            }
        };
        mix(static_cast<std::uint64_t>(L_));
        mix(boundary_ == Boundary::periodic ? 1 : 0);
        mix(kind_ == BasisKind::full ? 1 : 0);
        for (Config c : configs_)
            mix(c);
        hash_ = h;
    }

    int L_;
    Boundary boundary_;
    BasisKind kind_;
    std::vector<Config> configs_;
    std::uint64_t hash_ = 0;
};

inline Basis enumerate_constrained(int L, Boundary boundary = Boundary::periodic) {
    return Basis::constrained(L, boundary);
}

inline Basis full_basis(int L, Boundary boundary = Boundary::periodic) {
    return Basis::full(L, boundary);
}

/// Configuration with sites 1, 1+p, 1+2p, ... excited. p=2 is |Z2>, p=4 is |Z4>.
inline Config density_wave_config(int L, int period, int shift = 0) {
    if (period < 2 || L % period != 0)
        throw ModelError("no period-" + std::to_string(period) + " pattern state on L=" + std::to_string(L));
    Config c = 0;
    for (int i = 0; i < L; i += period)
        c |= Config{1} << ((i + shift) % L);
    return c;
}

inline StateVector density_wave_state(const Basis& basis, int period, int shift = 0) {
    return basis.basis_state(density_wave_config(basis.sites(), period, shift));
}

/// |Z2> (odd sites excited) and |Z2'> (even sites excited).
inline std::pair<StateVector, StateVector> neel_states(const Basis& basis) {
    if (basis.sites() % 2 != 0)
        throw ModelError("no Néel state for odd L=" + std::to_string(basis.sites()));
    return {density_wave_state(basis, 2, 0), density_wave_state(basis, 2, 1)};
}

/// Copy amplitudes into the 2^L product basis.
inline StateVector embed_state(const Basis& basis, const StateVector& psi) {
    if (static_cast<std::size_t>(psi.size()) != basis.dim())
        throw ModelError("state dimension does not match basis");
    if (basis.kind() == BasisKind::full)
        return psi;
    StateVector out = StateVector::Zero(Eigen::Index{1} << basis.sites());
    for (std::size_t i = 0; i < basis.dim(); ++i)
        out(static_cast<Eigen::Index>(basis.config(i))) = psi(static_cast<Eigen::Index>(i));
    return out;
}

/// Inverse of embed_state; amplitude outside the basis is dropped.
inline StateVector restrict_state(const Basis& basis, const StateVector& full) {
    if (full.size() != (Eigen::Index{1} << basis.sites()))
        throw ModelError("full-space state has wrong dimension");
    StateVector out(static_cast<Eigen::Index>(basis.dim()));
    for (std::size_t i = 0; i < basis.dim(); ++i)
        out(static_cast<Eigen::Index>(i)) = full(static_cast<Eigen::Index>(basis.config(i)));
    return out;
}

/// Translation-symmetry sector for momentum 0 or pi.
///
/// Each orbit representative r (minimal member of its translation orbit, period R) gives
/// the normalized vector R^{-1/2} sum_j e^{-ikj} T^j |r>. For k=pi the orbit must have even
/// period; orbits that cannot carry the momentum are dropped. The coefficients are real for
/// both supported momenta, so the isometry is stored as a real sparse matrix.
class MomentumSector {
public:
    enum class Momentum { zero, pi };

    MomentumSector(const Basis& basis, Momentum k) : k_(k), parent_dim_(basis.dim()), parent_hash_(basis.hash()) {
        if (basis.boundary() != Boundary::periodic)
            throw ModelError("momentum sectors need a periodic chain");
        const int L = basis.sites();
        std::vector<char> seen(basis.dim(), 0);
        std::vector<Eigen::Triplet<double>> trips;
        Eigen::Index col = 0;
        for (std::size_t i = 0; i < basis.dim(); ++i) {
            if (seen[i])
                continue;
            std::vector<Config> orbit;
            Config c = basis.config(i);
            Config start = c;
            do {
                orbit.push_back(c);
                seen[basis.index(c)] = 1;
                c = bits::translate(c, L);
            } while (c != start);
            const int period = static_cast<int>(orbit.size());
            if (k == Momentum::pi && period % 2 != 0)
                continue;
            // orbit[0] is the smallest member because configs are visited in ascending order.
            const double norm = 1.0 / std::sqrt(static_cast<double>(period));
            for (int j = 0; j < period; ++j) {
                const double phase = (k == Momentum::pi && (j % 2 != 0)) ? -1.0 : 1.0;
                trips.emplace_back(static_cast<Eigen::Index>(basis.index(orbit[static_cast<std::size_t>(j)])), col,
                                   phase * norm);
            }
            representatives_.push_back(orbit.front());
            orbit_sizes_.push_back(period);
            ++col;
        }
        isometry_.resize(static_cast<Eigen::Index>(basis.dim()), col);
        isometry_.setFromTriplets(trips.begin(), trips.end());
        isometry_.makeCompressed();
    }

    Momentum momentum() const noexcept { return k_; }
    double k() const noexcept { return k_ == Momentum::zero ? 0.0 : std::numbers::pi; }
    std::size_t dim() const noexcept { return representatives_.size(); }
    std::size_t parent_dim() const noexcept { return parent_dim_; }
    std::uint64_t parent_hash() const noexcept { return parent_hash_; }
    std::span<const Config> representatives() const noexcept { return representatives_; }
    std::span<const int> orbit_sizes() const noexcept { return orbit_sizes_; }

    /// Columns are the symmetry-adapted vectors in the parent basis.
    const Eigen::SparseMatrix<double>& isometry() const noexcept { return isometry_; }

    StateVector project(const StateVector& psi) const { return isometry_.transpose() * psi; }
    StateVector unproject(const StateVector& phi) const { return isometry_ * phi; }

private:
    Momentum k_;
    std::size_t parent_dim_;
    std::uint64_t parent_hash_;
    std::vector<Config> representatives_;
    std::vector<int> orbit_sizes_;
    Eigen::SparseMatrix<double> isometry_;
};

inline MomentumSector build_momentum_sector(const Basis& basis, MomentumSector::Momentum k) {
    return MomentumSector(basis, k);
}

} // namespace dtc

#endif // DTC_HILBERT_HPP
