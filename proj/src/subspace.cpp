#include "swctrl/subspace.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace swctrl {
namespace {

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

Index numerical_rank(const Vector& sigma, double rank_tol, double scale) {
  if (sigma.size() == 0) return 0;
  const double cutoff = rank_tol * std::max(sigma(0), scale);
  Index r = 0;
  while (r < sigma.size() && sigma(r) > cutoff) ++r;
  return r;
}

Subspace kernel_scaled(const Matrix& m, double rank_tol, double scale) {
  const Index n = m.cols();
  if (m.rows() == 0) return Subspace::full(n);
  if (n == 0) return Subspace::zero(0);
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
  const Index r = numerical_rank(svd.singularValues(), rank_tol, scale);
  if (r == n) return Subspace::zero(n);
  return Subspace::from_orthonormal(svd.matrixV().rightCols(n - r));
}

Subspace preimage_scaled(const Matrix& a, const Subspace& s, double rank_tol,
                         double scale) {
  if (a.rows() != s.ambient_dim())
    throw std::invalid_argument("preimage: operator rows do not match subspace");
  return kernel_scaled(complement_projector(s) * a, rank_tol, scale);
}

}  // namespace

Subspace Subspace::zero(Index ambient_dim) { return Subspace(Matrix(ambient_dim, 0)); }

Subspace Subspace::full(Index ambient_dim) {
  return Subspace(Matrix::Identity(ambient_dim, ambient_dim));
}

Subspace Subspace::from_orthonormal(Matrix basis) {
  if (basis.cols() > basis.rows())
    throw std::invalid_argument("Subspace: more basis vectors than ambient dimension");
  if (basis.cols() > 0) {
    const double defect =
        (basis.transpose() * basis - Matrix::Identity(basis.cols(), basis.cols()))
            .cwiseAbs()
            .maxCoeff();
    if (defect > 1e-12)
      throw std::invalid_argument("Subspace: basis is not orthonormal (defect " +
                                  std::to_string(defect) + ")");
  }
  return Subspace(std::move(basis));
}

Subspace column_span(const Matrix& columns, double rank_tol, double scale) {
  const Index n = columns.rows();
  if (columns.cols() == 0) return Subspace::zero(n);
  Eigen::JacobiSVD<Matrix> svd(columns, Eigen::ComputeFullU);
  const Index r = numerical_rank(svd.singularValues(), rank_tol, scale);
  if (r == 0) return Subspace::zero(n);
  return Subspace::from_orthonormal(svd.matrixU().leftCols(r));
}

Subspace orthonormalize(std::span<const Vector> vectors, Index ambient_dim,
                        double rank_tol) {
  Matrix stacked(ambient_dim, static_cast<Index>(vectors.size()));
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].size() != ambient_dim)
      throw std::invalid_argument("orthonormalize: vector " + std::to_string(i) +
                                  " has dimension " +
                                  std::to_string(vectors[i].size()) + ", expected " +
                                  std::to_string(ambient_dim));
    stacked.col(static_cast<Index>(i)) = vectors[i];
  }
  return column_span(stacked, rank_tol);
}

Subspace kernel(const Matrix& m, double rank_tol, double scale) {
  return kernel_scaled(m, rank_tol, scale);
}

Subspace image(const Matrix& m, double rank_tol, double scale) {
  return column_span(m, rank_tol, scale);
}

Subspace sum(const Subspace& a, const Subspace& b, double rank_tol) {
  if (a.ambient_dim() != b.ambient_dim())
    throw std::invalid_argument("sum: ambient dimensions differ");
  Matrix stacked(a.ambient_dim(), a.dim() + b.dim());
  stacked << a.basis(), b.basis();
  return column_span(stacked, rank_tol, 1.0);
}

Subspace intersect(const Subspace& a, const Subspace& b, double rank_tol) {
  if (a.ambient_dim() != b.ambient_dim())
    throw std::invalid_argument("intersect: ambient dimensions differ");
  const Index n = a.ambient_dim();
  Matrix stacked(2 * n, n);
  stacked << complement_projector(a), complement_projector(b);
  return kernel_scaled(stacked, rank_tol, 1.0);
}

Subspace preimage(const Matrix& a, const Subspace& s, double rank_tol) {
  if (a.rows() != a.cols()) throw std::invalid_argument("preimage: operator not square");
  return preimage_scaled(a, s, rank_tol, spectral_norm(a));
}

Matrix projector(const Subspace& s) { return s.basis() * s.basis().transpose(); }

Matrix complement_projector(const Subspace& s) {
  return Matrix::Identity(s.ambient_dim(), s.ambient_dim()) - projector(s);
}

double projector_distance(const Subspace& a, const Subspace& b) {
  if (a.ambient_dim() != b.ambient_dim())
    throw std::invalid_argument("projector_distance: ambient dimensions differ");
  return (projector(a) - projector(b)).norm();
}

bool same_subspace(const Subspace& a, const Subspace& b, double tol) {
  return a.ambient_dim() == b.ambient_dim() && projector_distance(a, b) < tol;
}

bool contains(const Subspace& outer, const Subspace& inner, double tol) {
  const Matrix pi = projector(inner);
  return (projector(outer) * pi - pi).norm() <= tol;
}

namespace {

double operator_scale(const Matrix& a, std::span<const Matrix> family) {
  double scale = std::max(1.0, spectral_norm(a));
  for (const auto& c : family) scale = std::max(scale, spectral_norm(c));
  return scale;
}

Subspace family_image(std::span<const Matrix> family, Index n, double rank_tol,
                      double scale) {
  Index cols = 0;
  for (const auto& c : family) cols += c.cols();
  Matrix stacked(n, cols);
  Index at = 0;
  for (const auto& c : family) {
    stacked.middleCols(at, c.cols()) = c;
    at += c.cols();
  }
  return column_span(stacked, rank_tol, scale);
}

}  // namespace

Subspace largest_invariant_subspace(const Matrix& a, std::span<const Matrix> family,
                                    const Subspace& within, double rank_tol,
                                    std::vector<Index>* dims) {
  const Index n = within.ambient_dim();
  if (a.rows() != n || a.cols() != n)
    throw std::invalid_argument("largest_invariant_subspace: operator is " +
                                std::to_string(a.rows()) + "x" +
                                std::to_string(a.cols()) + ", ambient dimension " +
                                std::to_string(n));
  for (const auto& c : family)
    if (c.rows() != n)
      throw std::invalid_argument("largest_invariant_subspace: family member has " +
                                  std::to_string(c.rows()) + " rows, expected " +
                                  std::to_string(n));

  const double scale = operator_scale(a, family);
  const Subspace injected = family_image(family, n, rank_tol, scale);

  Subspace v = within;
  if (dims) dims->assign(1, v.dim());
  for (Index pass = 0; pass <= n && !v.is_zero(); ++pass) {
    const Subspace target = sum(v, injected, rank_tol);
    Subspace next = intersect(v, preimage_scaled(a, target, rank_tol, scale), rank_tol);
    if (dims) dims->push_back(next.dim());
    const bool stable = next.dim() == v.dim();
    v = std::move(next);
    if (stable) break;
  }
  return v;
}

double invariance_defect(const Matrix& a, std::span<const Matrix> family,
                         const Subspace& v, double rank_tol) {
  const double scale = operator_scale(a, family);
  const Subspace target =
      sum(v, family_image(family, v.ambient_dim(), rank_tol, scale), rank_tol);
  return (complement_projector(target) * a * projector(v)).norm();
}

}  // namespace swctrl
