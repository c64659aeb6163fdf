#include "swctrl/simulator.hpp"

#include "sim_kernels.hpp"

namespace swctrl::serial {

Estimate mc_cost_dual(const SwitchSystem& system, const Vector& y0, const DualPolicy& policy,
                      std::size_t n_samples, std::uint64_t base_seed, int grid_steps) {
  detail::require_samples(n_samples);
  const detail::ModelTables tables(system);
  std::vector<double> values(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const auto path = sample_mode_path(system, sample_seed(base_seed, i));
    values[i] = detail::dual_cost(tables, y0, policy, path, grid_steps);
  }
  return summarize(values);
}

Estimate duality_check(const SwitchSystem& system, const Vector& x0, const Vector& y0,
                       const PrimalPolicy& primal, const DualPolicy& dual,
                       std::size_t n_samples, std::uint64_t base_seed, int grid_steps) {
  detail::require_samples(n_samples);
  const detail::ModelTables tables(system);
  std::vector<double> values(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const auto path = sample_mode_path(system, sample_seed(base_seed, i));
    values[i] = detail::duality_residual(tables, x0, y0, primal, dual, path, grid_steps);
  }
  return summarize(values);
}

std::vector<Vector> primal_terminal_states(const SwitchSystem& system, const Vector& x0,
                                           const PrimalPolicy& policy,
                                           std::size_t n_samples, std::uint64_t base_seed,
                                           int grid_steps) {
  const detail::ModelTables tables(system);
  std::vector<Vector> out;
  out.reserve(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const auto path = sample_mode_path(system, sample_seed(base_seed, i));
    out.push_back(detail::primal_terminal(tables, x0, policy, path, grid_steps));
  }
  return out;
}

}  // namespace swctrl::serial
