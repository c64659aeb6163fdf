#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace swctrl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Relative singular-value cutoff used throughout the subspace algebra.
inline constexpr double kRankTol = 1e-10;
/// Two subspaces are equal when their projectors differ by less than this
/// (Frobenius norm).
inline constexpr double kSubspaceEqualTol = 1e-8;

/// Linear subspace of R^n stored as an orthonormal basis (n x dim). The zero
/// subspace has an empty (n x 0) basis.
class Subspace {
 public:
  static Subspace zero(Index ambient_dim);
  static Subspace full(Index ambient_dim);
  /// Wraps columns that are already orthonormal to 1e-12; throws otherwise.
  static Subspace from_orthonormal(Matrix basis);

  Index ambient_dim() const { return basis_.rows(); }
  Index dim() const { return basis_.cols(); }
  bool is_zero() const { return basis_.cols() == 0; }
  const Matrix& basis() const { return basis_; }

 private:
  explicit Subspace(Matrix basis) : basis_(std::move(basis)) {}
  Matrix basis_;
};

/// Span of the given vectors. Directions with singular value at or below
/// rank_tol * sigma_max are discarded.
Subspace orthonormalize(std::span<const Vector> vectors, Index ambient_dim,
                        double rank_tol = kRankTol);

/// Column space of `columns`, with the cutoff rank_tol * max(sigma_max, scale).
Subspace column_span(const Matrix& columns, double rank_tol = kRankTol,
                     double scale = 0.0);

/// Null space of m, cutoff rank_tol * max(sigma_max, scale).
Subspace kernel(const Matrix& m, double rank_tol = kRankTol, double scale = 0.0);
Subspace image(const Matrix& m, double rank_tol = kRankTol, double scale = 0.0);

Subspace sum(const Subspace& a, const Subspace& b, double rank_tol = kRankTol);
/// Kernel of the stacked complementary projectors [I - P_a; I - P_b].
Subspace intersect(const Subspace& a, const Subspace& b,
                   double rank_tol = kRankTol);
/// {x : a * x in s} = kernel((I - P_s) a).
Subspace preimage(const Matrix& a, const Subspace& s, double rank_tol = kRankTol);

Matrix projector(const Subspace& s);
Matrix complement_projector(const Subspace& s);

/// ||P_a - P_b||_F.
double projector_distance(const Subspace& a, const Subspace& b);
bool same_subspace(const Subspace& a, const Subspace& b,
                   double tol = kSubspaceEqualTol);
/// True when inner is contained in outer (P_outer P_inner = P_inner to tol).
bool contains(const Subspace& outer, const Subspace& inner, double tol = 1e-10);

/// Largest V inside `within` with a*V contained in V + sum_i Im(family_i).
///
/// Fixed-point iteration V_0 = within,
/// V_{j+1} = V_j  intersect  preimage(a, V_j + sum_i Im(family_i)),
/// stopping at the first j where the dimension stops dropping (so at most
/// ambient_dim + 1 passes). When `dims` is given it receives dim(V_j) for
/// every iterate.
Subspace largest_invariant_subspace(const Matrix& a, std::span<const Matrix> family,
                                    const Subspace& within,
                                    double rank_tol = kRankTol,
                                    std::vector<Index>* dims = nullptr);

/// Residual ||(I - P_{V + sum Im}) a P_V||_F of the invariance condition.
double invariance_defect(const Matrix& a, std::span<const Matrix> family,
                         const Subspace& v, double rank_tol = kRankTol);

}  // namespace swctrl
