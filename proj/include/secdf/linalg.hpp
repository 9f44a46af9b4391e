#pragma once

#include <Eigen/Dense>

namespace secdf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

inline constexpr double kTolEig = 1e-10;
inline constexpr double kTolNorm = 1e-12;
inline constexpr double kTolSchur = 1e-9;

// Eigenvalues of a symmetric matrix in ascending order, by cyclic Jacobi
// rotations. Only the lower triangle is trusted to mirror the upper one.
Vector symmetric_eigenvalues(const Matrix& m, double tol = kTolEig);

double min_eigenvalue(const Matrix& m, double tol = kTolEig);
double max_eigenvalue(const Matrix& m, double tol = kTolEig);

// Largest singular value, from whichever Gram matrix is smaller.
double spectral_norm(const Matrix& m);

// Spectral radius of a real 2x2 matrix (closed form, complex pairs handled).
double spectral_radius(const Eigen::Matrix2d& m);

// Numerical rank via eigenvalues of the Gram matrix.
int numerical_rank(const Matrix& m, double tol = kTolEig);

}  // namespace secdf
