#pragma once

// Per-sample kernels shared by the serial and OpenMP estimators.

#include "swctrl/simulator.hpp"

#include <array>
#include <vector>

namespace swctrl::detail {

/// Mode-indexed coefficient tables, built once per estimator call.
struct ModelTables {
  explicit ModelTables(const SwitchSystem& system);

  const SwitchSystem& system;
  /// [g][0]: A(g) (no compensator); [g][1]: A(g) - lambda sum Q C.
  std::vector<std::array<Matrix, 2>> primal_drift;
  std::vector<Matrix> minus_AT;
  /// lambda(g) Q(g,th) (I + C(g,th)^T) for every edge (g, th).
  std::vector<std::vector<std::pair<Index, Matrix>>> dual_weights;
  /// I + C(g, th), indexed g * p + th.
  std::vector<Matrix> jump_map;
  std::vector<Matrix> range_projector;
  std::vector<Matrix> BT;

  const Matrix& jump(Index g, Index th) const {
    return jump_map[static_cast<std::size_t>(g * system.num_modes() + th)];
  }
};

double dual_cost(const ModelTables& tables, const Vector& y0, const DualPolicy& policy,
                 const ModePath& path, int grid_steps);

double duality_residual(const ModelTables& tables, const Vector& x0, const Vector& y0,
                        const PrimalPolicy& primal, const DualPolicy& dual,
                        const ModePath& path, int grid_steps);

Vector primal_terminal(const ModelTables& tables, const Vector& x0,
                       const PrimalPolicy& policy, const ModePath& path, int grid_steps);

void require_samples(std::size_t n_samples);

}  // namespace swctrl::detail
