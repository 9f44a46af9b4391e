#include "secdf/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "secdf/error.hpp"

namespace secdf {

namespace {

double off_diagonal_norm(const Matrix& a) {
  double sum = 0.0;
  const auto n = a.rows();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j) sum += a(i, j) * a(i, j);
  return std::sqrt(sum);
}

}  // namespace

Vector symmetric_eigenvalues(const Matrix& m, double tol) {
  if (m.rows() != m.cols())
    throw Error(ErrorCode::DimensionMismatch, "eigenvalues of a non-square matrix");
  const auto n = m.rows();
  Matrix a = 0.5 * (m + m.transpose());
  // Stop well below tol so the diagonal is accurate to tol in absolute terms.
  const double stop = tol * 1e-3;
  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps && off_diagonal_norm(a) > stop; ++sweep) {
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
      }
    }
  }
  Vector ev = a.diagonal();
  std::sort(ev.data(), ev.data() + ev.size());
  return ev;
}

double min_eigenvalue(const Matrix& m, double tol) {
  if (m.size() == 1) return m(0, 0);
  return symmetric_eigenvalues(m, tol)(0);
}

double max_eigenvalue(const Matrix& m, double tol) {
  if (m.size() == 1) return m(0, 0);
  Vector ev = symmetric_eigenvalues(m, tol);
  return ev(ev.size() - 1);
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  if (m.size() == 1) return std::abs(m(0, 0));
  Matrix gram = m.rows() <= m.cols() ? Matrix(m * m.transpose()) : Matrix(m.transpose() * m);
  return std::sqrt(std::max(0.0, max_eigenvalue(gram)));
}

double spectral_radius(const Eigen::Matrix2d& m) {
  const double tr = m.trace();
  const double det = m.determinant();
  const double disc = tr * tr / 4.0 - det;
  if (disc >= 0.0) {
    const double r = std::sqrt(disc);
    return std::max(std::abs(tr / 2.0 + r), std::abs(tr / 2.0 - r));
  }
  // complex pair, modulus squared equals the determinant
  return std::sqrt(det);
}

int numerical_rank(const Matrix& m, double tol) {
  if (m.size() == 0) return 0;
  Matrix gram = m.transpose() * m;
  Vector ev = symmetric_eigenvalues(gram, tol);
  const double scale = std::max(1.0, ev(ev.size() - 1));
  int rank = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev(i) > tol * scale) ++rank;
  return rank;
}

}  // namespace secdf
