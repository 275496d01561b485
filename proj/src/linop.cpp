#include "evolver/linop.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "evolver/error.hpp"

namespace evolver {

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() < 1) {
    fail(ErrorKind::kInvalidInput, std::string(what) + " must be a non-empty square matrix");
  }
  if (m.rows() > kMaxDim) {
    fail(ErrorKind::kResourceGuard,
         std::string(what) + " dimension " + std::to_string(m.rows()) + " exceeds cap " +
             std::to_string(kMaxDim));
  }
  if (!m.allFinite()) fail(ErrorKind::kInvalidInput, std::string(what) + " has non-finite entries");
}

void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) fail(ErrorKind::kInvalidInput, std::string(what) + " has non-finite entries");
}

namespace {

// Degree-13 Padé coefficients and the 1-norm bound below which the
// approximant is accurate to unit roundoff (Higham 2005).
constexpr double kPade13[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                              1187353796428800.0,  129060195264000.0,   10559470521600.0,
                              670442572800.0,      33522128640.0,       1323241920.0,
                              40840800.0,          960960.0,            16380.0,
                              182.0,               1.0};
constexpr double kTheta13 = 5.371920351148152;

}  // namespace

Matrix mat_exp(const Matrix& m, double t) {
  require_square(m, "mat_exp argument");
  if (!(t >= 0.0) || !std::isfinite(t)) fail(ErrorKind::kInvalidInput, "mat_exp requires finite t >= 0");
  const Eigen::Index d = m.rows();
  Matrix a = t * m;
  if (a.isZero(0.0)) return Matrix::Identity(d, d);
  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > kTheta13) {
    squarings = static_cast<int>(std::ceil(std::log2(norm1 / kTheta13)));
    a /= std::ldexp(1.0, squarings);
  }
  const Matrix id = Matrix::Identity(d, d);
  const Matrix a2 = a * a;
  const Matrix a4 = a2 * a2;
  const Matrix a6 = a4 * a2;
  const double* b = kPade13;
  const Matrix u_inner = a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 +
                         b[3] * a2 + b[1] * id;
  const Matrix u = a * u_inner;
  const Matrix v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 +
                   b[2] * a2 + b[0] * id;
  Matrix r = (v - u).partialPivLu().solve(v + u);
  for (int i = 0; i < squarings; ++i) r = r * r;
  return r;
}

double operator_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  if (!m.allFinite()) fail(ErrorKind::kInvalidInput, "operator_norm argument has non-finite entries");
  // sigma_max^2 = lambda_max(M^T M); the Gram matrix is always square.
  const Matrix gram = m.transpose() * m;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, eig.eigenvalues().maxCoeff()));
}

void require_spd(const Matrix& metric) {
  if (metric.rows() != metric.cols() || metric.rows() < 1 || !metric.allFinite()) {
    fail(ErrorKind::kInvalidMetric, "metric must be a finite non-empty square matrix");
  }
  const double scale = std::max(1.0, metric.cwiseAbs().maxCoeff());
  if ((metric - metric.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    fail(ErrorKind::kInvalidMetric, "metric is not symmetric");
  }
  Eigen::LLT<Matrix> llt(metric);
  if (llt.info() != Eigen::Success) fail(ErrorKind::kInvalidMetric, "metric is not positive definite");
}

double operator_norm(const Matrix& m, const Matrix& metric) {
  require_spd(metric);
  if (metric.rows() != m.rows() || m.rows() != m.cols()) {
    fail(ErrorKind::kDimensionMismatch, "metric and operator dimensions differ");
  }
  // With G = L L^T and y = L^T x, ||M x||_G / ||x||_G = ||L^T M L^{-T} y|| / ||y||.
  Eigen::LLT<Matrix> llt(metric);
  const Matrix lt = llt.matrixU();
  const Matrix congruent = lt * m * lt.triangularView<Eigen::Upper>().solve(
                                        Matrix::Identity(m.rows(), m.cols()));
  return operator_norm(congruent);
}

double metric_norm(const Vector& x, const Matrix& metric) {
  return std::sqrt(std::max(0.0, x.dot(metric * x)));
}

Matrix resolvent(const Matrix& m, double mu) {
  require_square(m, "resolvent argument");
  const Eigen::Index d = m.rows();
  const Matrix shifted = mu * Matrix::Identity(d, d) - m;
  Eigen::JacobiSVD<Matrix> svd(shifted);
  const auto& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  if (!(smin > 0.0) || sv(0) / smin > 1e12) {
    fail(ErrorKind::kSingularResolvent,
         "mu = " + std::to_string(mu) + " is (numerically) an eigenvalue; condition number " +
             (smin > 0.0 ? std::to_string(sv(0) / smin) : std::string("inf")));
  }
  return shifted.partialPivLu().solve(Matrix::Identity(d, d));
}

}  // namespace evolver
