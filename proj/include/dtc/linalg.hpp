#ifndef DTC_LINALG_HPP
#define DTC_LINALG_HPP

// Dense Hermitian eigensolvers and small helpers shared by the dynamics and spectral modules.

#include <dtc/error.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

namespace dtc::linalg {

template <class Matrix>
struct Eigensystem {
    Eigen::VectorXd values; // ascending
    Matrix vectors;         // columns
};

template <class Matrix>
Eigensystem<Matrix> eigh(const Matrix& a) {
    Eigensystem<Matrix> out;
    if (a.rows() == 0)
        return out;
    Eigen::SelfAdjointEigenSolver<Matrix> es(a);
    if (es.info() != Eigen::Success)
        throw NumericalError("Hermitian eigensolver did not converge");
    out.values = es.eigenvalues();
    out.vectors = es.eigenvectors();
    return out;
}

template <class Matrix>
Eigen::VectorXd eigvalsh(const Matrix& a) {
    if (a.rows() == 0)
        return {};
    Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw NumericalError("Hermitian eigensolver did not converge");
    return es.eigenvalues();
}

/// Largest absolute entry; the elementwise max norm used by every operator-identity check.
template <class Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

/// V diag(f(lambda)) V^dagger for a Hermitian eigensystem.
template <class Matrix, class F>
Eigen::MatrixXcd spectral_function(const Eigensystem<Matrix>& es, F&& f) {
    Eigen::VectorXcd d(es.values.size());
    for (Eigen::Index i = 0; i < d.size(); ++i)
        d(i) = f(es.values(i));
    const Eigen::MatrixXcd v = es.vectors.template cast<std::complex<double>>();
    return v * d.asDiagonal() * v.adjoint();
}

/// Wrap a phase into (-pi, pi].
inline double wrap_phase(double phi) {
    constexpr double two_pi = 2.0 * 3.14159265358979323846;
    phi = std::fmod(phi, two_pi);
    if (phi <= -two_pi / 2)
        phi += two_pi;
    if (phi > two_pi / 2)
        phi -= two_pi;
    return phi;
}

/// Distance between two phases on the circle, in [0, pi].
inline double phase_distance(double a, double b) {
    return std::abs(wrap_phase(a - b));
}

} // namespace dtc::linalg

#endif // DTC_LINALG_HPP
