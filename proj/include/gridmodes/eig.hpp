#pragma once

// Dense complex eigendecomposition with paired left/right eigenvector
// matrices. Right vectors come from the QR-iteration solver; the left matrix
// is the LU inverse of the right one, so T * L = I holds by construction and
// the residual of Y * L - L * diag(lambda) is the single quality metric.

#include "gridmodes/types.hpp"

#include <string>
#include <vector>

namespace gridmodes {

struct EigDecomposition {
    VecX values;
    MatX right; // columns are right eigenvectors, unit norm
    MatX left;  // rows are left eigenvectors, scaled so left * right = I
    double vector_rcond = 1.0; // reciprocal condition estimate of the right matrix
    bool defective_warning = false;
};

/// Full spectrum of a finite square complex matrix. Throws
/// eig.no_convergence when the QR iteration fails; sets defective_warning
/// when the eigenvector matrix condition exceeds 1e8.
inline EigDecomposition eig_complex(const MatX& m) {
    if (!m.allFinite())
        throw Error("eig.invalid", "matrix has non-finite entries");
    Eigen::ComplexEigenSolver<MatX> solver(m, /*computeEigenvectors=*/true);
    if (solver.info() != Eigen::Success)
        throw Error("eig.no_convergence", "complex QR iteration did not converge");
    EigDecomposition d;
    d.values = solver.eigenvalues();
    d.right = solver.eigenvectors();
    Eigen::PartialPivLU<MatX> lu(d.right);
    d.vector_rcond = lu.rcond();
    d.defective_warning = !(d.vector_rcond > 1e-8);
    d.left = lu.inverse();
    return d;
}

/// Modal decomposition of an admittance matrix: eigenvalues, their modal
/// impedances, and the paired eigenvector matrices.
struct ModalDecomposition {
    VecX lambda_y;  // admittance eigenvalues, S
    VecX lambda_z;  // modal impedances 1/lambda_y, Ohm
    MatX right;     // L
    MatX left;      // T, with T * L = I
    bool near_singular = false; // some |lambda_y| underflows relative to the spectrum
    bool defective_warning = false;

    int size() const { return static_cast<int>(lambda_y.size()); }
};

inline ModalDecomposition decompose_admittance(const MatX& y_t) {
    EigDecomposition d = eig_complex(y_t);
    ModalDecomposition md;
    md.lambda_y = d.values;
    md.right = d.right;
    md.left = d.left;
    md.defective_warning = d.defective_warning;
    md.lambda_z.resize(d.values.size());
    const double scale = d.values.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < d.values.size(); ++i) {
        const double mag = std::abs(d.values(i));
        if (mag <= 1e-14 * scale || mag == 0.0) {
            md.near_singular = true;
            md.lambda_z(i) = cplx(std::numeric_limits<double>::infinity(), 0.0);
        } else {
            md.lambda_z(i) = 1.0 / d.values(i);
        }
    }
    return md;
}

/// Per-bus participation weights of one mode: |L_{k,i} * T_{i,k}| summed over
/// the bus's (q, d) rows and normalized to unit sum.
inline std::vector<double> participation(const ModalDecomposition& d, int mode) {
    const int n = d.size() / 2;
    std::vector<double> w(static_cast<size_t>(n), 0.0);
    double total = 0.0;
    for (int b = 0; b < n; ++b) {
        for (int r = 0; r < 2; ++r) {
            const int k = 2 * b + r;
            const double p = std::abs(d.right(k, mode) * d.left(mode, k));
            w[static_cast<size_t>(b)] += p;
            total += p;
        }
    }
    if (total > 0.0)
        for (auto& x : w) x /= total;
    return w;
}

} // namespace gridmodes
