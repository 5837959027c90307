// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "iasim/errors.hpp"

namespace iasim {

/// Dense complex matrix, the storage type for channels, precoders and combiners.
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using cplx = std::complex<double>;

namespace numkit {

// Small dense complex-matrix kernel. Every factorization is post-checked by
// its caller-visible residual contract; outputs are deterministic on one
// platform, with eigen/singular-vector phase fixed so the largest-magnitude
// entry of each vector is real and non-negative.

struct HermitianEig {
  RVector eigenvalues;  // ascending
  CMatrix eigenvectors;
};

struct GeneralEig {
  CVector eigenvalues;  // ascending by (|lambda|, arg lambda)
  CMatrix eigenvectors;
};

struct Svd {
  CMatrix u;              // full, unitary
  RVector singular_values;  // descending, non-negative
  CMatrix v;              // full, unitary
};

/// Eigendecomposition of a Hermitian matrix (checked to 1e-10 elementwise).
HermitianEig hermitian_eig(const CMatrix& a);

/// Eigendecomposition of a general square matrix, deterministic ordering.
/// Needed by the closed-form alignment chain, whose round-trip map is not Hermitian.
GeneralEig general_eig(const CMatrix& a);

/// Orthonormal basis (d columns) spanning the first d columns of a.
/// Throws DegenerateInput if those columns have rank below d.
CMatrix orthonormalize(const CMatrix& a, Eigen::Index d);

/// Solves a x = b; throws SingularMatrix when the condition estimate exceeds 1e12.
CMatrix solve(const CMatrix& a, const CMatrix& b);

/// Full singular value decomposition, a = u * diag(s) * v^*.
Svd svd(const CMatrix& a);

/// Rotates each column so its largest-magnitude entry is real non-negative.
void fix_column_phases(CMatrix& m);

/// Hermitian PSD square root via eigendecomposition (negative dust clamped to 0).
CMatrix hermitian_sqrt(const CMatrix& a);

/// log2 det of a Hermitian positive definite matrix via Cholesky.
double log2_det_hpd(const CMatrix& a);

/// max |a - a^*| elementwise; 0 for the empty matrix.
double hermitian_defect(const CMatrix& a);

/// Frobenius distance between the column-span projectors of two orthonormal bases.
double projector_distance(const CMatrix& q1, const CMatrix& q2);

/// Throws ContractViolation if any entry is NaN or infinite.
void require_finite(const CMatrix& a, const char* what);

}  // namespace numkit
}  // namespace iasim
