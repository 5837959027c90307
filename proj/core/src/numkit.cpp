// SPDX-License-Identifier: Apache-2.0

#include "iasim/numkit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace iasim::numkit {

namespace {
constexpr double kHermitianTol = 1e-10;
constexpr double kRcondFloor = 1e-12;  // condition estimate guard: cond <= 1e12
}  // namespace

void require_finite(const CMatrix& a, const char* what) {
  if (!a.allFinite()) {
    throw ContractViolation(std::string(what) + ": non-finite entries");
  }
}

double hermitian_defect(const CMatrix& a) {
  if (a.size() == 0) return 0.0;
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

void fix_column_phases(CMatrix& m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    Eigen::Index k = 0;
    double best = -1.0;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      const double mag = std::abs(m(r, c));
      if (mag > best) {
        best = mag;
        k = r;
      }
    }
    if (best > 0.0) {
      const cplx phase = m(k, c) / best;
      m.col(c) *= std::conj(phase);
    }
  }
}

HermitianEig hermitian_eig(const CMatrix& a) {
  require_finite(a, "hermitian_eig");
  if (a.rows() != a.cols()) {
    throw ContractViolation("hermitian_eig: matrix must be square");
  }
  if (hermitian_defect(a) > kHermitianTol) {
    throw ContractViolation("hermitian_eig: input not Hermitian within 1e-10");
  }
  const CMatrix sym = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(sym);
  if (es.info() != Eigen::Success) {
    throw NumericalFailure("hermitian_eig: eigensolver did not converge");
  }
  HermitianEig out;
  out.eigenvalues = es.eigenvalues();  // ascending by Eigen's convention
  out.eigenvectors = es.eigenvectors();
  fix_column_phases(out.eigenvectors);
  return out;
}

GeneralEig general_eig(const CMatrix& a) {
  require_finite(a, "general_eig");
  if (a.rows() != a.cols()) {
    throw ContractViolation("general_eig: matrix must be square");
  }
  Eigen::ComplexEigenSolver<CMatrix> es(a, /*computeEigenvectors=*/true);
  if (es.info() != Eigen::Success) {
    throw NumericalFailure("general_eig: eigensolver did not converge");
  }
  const Eigen::Index n = a.rows();
  std::vector<Eigen::Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  const CVector& vals = es.eigenvalues();
  std::sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
    const double mi = std::abs(vals[i]), mj = std::abs(vals[j]);
    if (mi != mj) return mi < mj;
    return std::arg(vals[i]) < std::arg(vals[j]);
  });
  GeneralEig out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.eigenvalues[k] = vals[order[static_cast<size_t>(k)]];
    out.eigenvectors.col(k) = es.eigenvectors().col(order[static_cast<size_t>(k)]);
    out.eigenvectors.col(k).normalize();
  }
  fix_column_phases(out.eigenvectors);
  return out;
}

CMatrix orthonormalize(const CMatrix& a, Eigen::Index d) {
  require_finite(a, "orthonormalize");
  if (d < 1 || a.cols() < d) {
    throw ContractViolation("orthonormalize: need at least d columns");
  }
  if (a.rows() < d) {
    throw ContractViolation("orthonormalize: rank cannot reach d with fewer than d rows");
  }
  const CMatrix block = a.leftCols(d);
  Eigen::HouseholderQR<CMatrix> qr(block);
  const CMatrix r = qr.matrixQR().topRows(d).triangularView<Eigen::Upper>();
  const double scale = std::max(1.0, block.norm());
  for (Eigen::Index k = 0; k < d; ++k) {
    if (std::abs(r(k, k)) <= 1e-12 * scale) {
      throw DegenerateInput("orthonormalize: rank below requested column count");
    }
  }
  CMatrix q = qr.householderQ() * CMatrix::Identity(a.rows(), d);
  fix_column_phases(q);
  return q;
}

CMatrix solve(const CMatrix& a, const CMatrix& b) {
  require_finite(a, "solve");
  require_finite(b, "solve");
  if (a.rows() != a.cols()) {
    throw ContractViolation("solve: coefficient matrix must be square");
  }
  if (a.rows() != b.rows()) {
    throw ContractViolation("solve: right-hand side row count mismatch");
  }
  Eigen::PartialPivLU<CMatrix> lu(a);
  // rcond() alone misreports exactly singular inputs (a zero pivot derails the
  // norm estimator), so the pivot ratio is checked as well.
  const auto pivots = lu.matrixLU().diagonal().cwiseAbs().eval();
  const double pivot_min = pivots.minCoeff();
  const double pivot_max = pivots.maxCoeff();
  if (!(pivot_min > 0.0) || pivot_min <= pivot_max * kRcondFloor ||
      !(lu.rcond() > kRcondFloor)) {
    throw SingularMatrix("solve: matrix singular or condition estimate above 1e12");
  }
  return lu.solve(b);
}

Svd svd(const CMatrix& a) {
  require_finite(a, "svd");
  Eigen::JacobiSVD<CMatrix> dec(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Svd out;
  out.u = dec.matrixU();
  out.singular_values = dec.singularValues();
  out.v = dec.matrixV();
  // Phase is fixed on U; each V column absorbs the matching rotation so that
  // u * diag(s) * v^* is unchanged.
  const Eigen::Index k = std::min(a.rows(), a.cols());
  for (Eigen::Index c = 0; c < out.u.cols(); ++c) {
    Eigen::Index idx = 0;
    double best = -1.0;
    for (Eigen::Index r = 0; r < out.u.rows(); ++r) {
      const double mag = std::abs(out.u(r, c));
      if (mag > best) {
        best = mag;
        idx = r;
      }
    }
    if (best <= 0.0) continue;
    const cplx phase = std::conj(out.u(idx, c) / best);
    out.u.col(c) *= phase;
    if (c < k && c < out.v.cols()) {
      out.v.col(c) *= phase;
    }
  }
  return out;
}

CMatrix hermitian_sqrt(const CMatrix& a) {
  const HermitianEig eig = hermitian_eig(a);
  RVector s = eig.eigenvalues;
  const double floor_tol = -1e-10 * std::max(1.0, s.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s[i] < floor_tol) {
      throw ContractViolation("hermitian_sqrt: matrix not positive semidefinite");
    }
    s[i] = std::sqrt(std::max(0.0, s[i]));
  }
  return eig.eigenvectors * s.asDiagonal() * eig.eigenvectors.adjoint();
}

double log2_det_hpd(const CMatrix& a) {
  Eigen::LLT<CMatrix> llt(a);
  if (llt.info() != Eigen::Success) {
    throw NumericalFailure("log2_det_hpd: matrix not positive definite");
  }
  double acc = 0.0;
  const auto& l = llt.matrixLLT();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    acc += std::log2(std::real(l(i, i)));
  }
  return 2.0 * acc;
}

double projector_distance(const CMatrix& q1, const CMatrix& q2) {
  const CMatrix p1 = q1 * q1.adjoint();
  const CMatrix p2 = q2 * q2.adjoint();
  return (p1 - p2).norm();
}

}  // namespace iasim::numkit
