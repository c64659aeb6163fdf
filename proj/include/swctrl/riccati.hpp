#pragma once

#include "swctrl/switch_model.hpp"

#include <iosfwd>
#include <set>
#include <span>
#include <utility>
#include <vector>

namespace swctrl {

/// Dynamics used after the last admissible jump. `gramian` keeps the drift
/// K A^T + A K - cost; `zero` pins the top level to 0.
enum class LevelMMode { gramian, zero };

const char* to_string(LevelMMode mode);
/// Throws InputError for anything other than "gramian" / "zero".
LevelMMode parse_level_M_mode(std::string_view text);

struct RiccatiParams {
  double epsilon = 1e-2;
  /// Per-mode symmetric PSD running cost (N x N).
  std::vector<Matrix> cost;
  int grid_steps = 2000;
  LevelMMode level_M_mode = LevelMMode::gramian;

  /// Cost B(g) B(g)^T for every mode.
  static RiccatiParams control_cost(const SwitchSystem& system, double epsilon,
                                    int grid_steps = 2000,
                                    LevelMMode mode = LevelMMode::gramian);
};

/// Throws InputError when epsilon <= 0, grid_steps < 100, or a cost block is
/// not symmetric PSD to 1e-10.
void validate(const SwitchSystem& system, const RiccatiParams& params);

/// Test hooks for solve(). Every (level, mode) listed in `zero_next_level`
/// sees K(level + 1, .) = 0 in its right-hand side.
struct SolveHooks {
  std::set<std::pair<int, Index>> zero_next_level;
};

/// K(n, g, t_j) on the uniform grid t_j = j T / L, for n = 0..M.
class RiccatiSolution {
 public:
  RiccatiSolution(RiccatiParams params, int M, Index num_modes, double T,
                  std::vector<Matrix> values);

  const RiccatiParams& params() const { return params_; }
  int M() const { return M_; }
  Index num_modes() const { return modes_; }
  int grid_steps() const { return params_.grid_steps; }
  double T() const { return T_; }
  double time(int j) const { return T_ * j / params_.grid_steps; }
  /// Index of the grid point nearest to t (clamped to [0, L]).
  int nearest_index(double t) const;

  const Matrix& K(int level, Index gamma, int j) const;
  /// Jump part H(n, g, th, t_j) = K(n + 1, th, t_j) - K(n, g, t_j), n < M.
  Matrix H(int level, Index gamma, Index theta, int j) const;

 private:
  RiccatiParams params_;
  int M_;
  Index modes_;
  double T_;
  std::vector<Matrix> values_;  // ((level * modes) + gamma) * (L + 1) + j
};

/// Right-hand side dK/dt of the (level, gamma) equation. For level < M:
///   K A^T + A K - cost + lambda sum_th Q(g,th) [f^T g f - (K_next(th) - K)]
/// with f = (C(g,th) + I) K - K_next(th), g = (eps I + K_next(th))^-1.
/// For level == M: the gramian drift, or zero. `K_next` is indexed by mode.
/// Throws NumericalError if eps I + K_next(th) is not positive definite.
Matrix level_rhs(const SwitchSystem& system, const RiccatiParams& params, int level,
                 Index gamma, const Matrix& K_here, std::span<const Matrix> K_next);

/// Coefficients of the canonical one-matrix Riccati form of a level < M
/// equation, plus two consistency residuals against level_rhs.
struct CanonicalCoeffs {
  Matrix a;
  /// As displayed: cost + eps sum_th Q r^-1 K_next.
  Matrix Pi;
  std::vector<Matrix> b;
  std::vector<Matrix> r;
  Vector nu;
  /// Sum_th nu(th) b(th) r(th)^-1 b(th)^T.
  Matrix quadratic_weight;
  /// p a + a^T p - Pi + p W p at p = eps I + K_here, and its Frobenius
  /// distance to level_rhs (archived, not expected to vanish).
  Matrix quadratic_rhs;
  double residual_shifted = 0.0;
  /// Same form at p = K_here with Pi scaled by lambda: vanishes identically.
  double residual_identity = 0.0;
};

CanonicalCoeffs canonical_coeffs(const SwitchSystem& system, const RiccatiParams& params,
                                 int level, Index gamma, const Matrix& K_here,
                                 std::span<const Matrix> K_next);

/// Integrates all (level, mode) equations together, backward from K(., ., T) = 0,
/// with fixed-step classical RK4 on grid_steps steps. Throws NumericalError on
/// a PSD violation below -1e-6 or on non-finite values.
RiccatiSolution solve(const SwitchSystem& system, const RiccatiParams& params,
                      const SolveHooks& hooks = {});

/// K(0, gamma0, t = 0).
Matrix K0(const RiccatiSolution& solution, Index gamma0);

/// CSV with header `t,level,mode,i,j,K_ij`, one row per entry per grid point.
void write_csv(std::ostream& out, const SwitchSystem& system,
               const RiccatiSolution& solution);

}  // namespace swctrl
