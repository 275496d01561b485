#pragma once

// Dense finite-dimensional linear algebra: the substrate for every semigroup
// and evolution-system computation in the library.

#include <Eigen/Dense>

namespace evolver {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Largest state dimension accepted anywhere in the library.
inline constexpr Eigen::Index kMaxDim = 256;

/// Throws invalid-input unless `m` is square, 1 <= dim <= kMaxDim and finite.
void require_square(const Matrix& m, const char* what);
/// Throws invalid-input unless every entry is finite.
void require_finite(const Vector& v, const char* what);

/// exp(t*M) by scaling and squaring with a degree-13 Padé kernel.
Matrix mat_exp(const Matrix& m, double t = 1.0);

/// Spectral norm ||M||_2 (largest singular value).
double operator_norm(const Matrix& m);

/// Operator norm induced by <x,y>_G = x^T G y, G symmetric positive definite.
double operator_norm(const Matrix& m, const Matrix& metric);

/// Norm of x in the metric G: sqrt(x^T G x).
double metric_norm(const Vector& x, const Matrix& metric);

/// Throws invalid-metric unless G is symmetric positive definite.
void require_spd(const Matrix& metric);

/// Resolvent (mu I - M)^{-1}. Throws singular-resolvent when the
/// 2-norm condition number of mu I - M exceeds 1e12.
Matrix resolvent(const Matrix& m, double mu);

}  // namespace evolver
