#include "swctrl/simulator.hpp"

#include "sim_kernels.hpp"

#include <exception>

namespace swctrl {
namespace {

/// Runs body(i) for every sample in parallel; the first captured exception
/// (by sample index) is rethrown after the loop.
template <class Body>
void for_each_sample(std::size_t n_samples, Body&& body) {
  std::vector<std::exception_ptr> failures(n_samples);
  const auto count = static_cast<long long>(n_samples);
#pragma omp parallel for schedule(dynamic, 64)
  for (long long i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      failures[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& failure : failures)
    if (failure) std::rethrow_exception(failure);
}

}  // namespace

Estimate mc_cost_dual(const SwitchSystem& system, const Vector& y0, const DualPolicy& policy,
                      std::size_t n_samples, std::uint64_t base_seed, int grid_steps) {
  detail::require_samples(n_samples);
  const detail::ModelTables tables(system);
  std::vector<double> values(n_samples);
  for_each_sample(n_samples, [&](std::size_t i) {
    const auto path = sample_mode_path(system, sample_seed(base_seed, i));
    values[i] = detail::dual_cost(tables, y0, policy, path, grid_steps);
  });
  return summarize(values);
}

Estimate duality_check(const SwitchSystem& system, const Vector& x0, const Vector& y0,
                       const PrimalPolicy& primal, const DualPolicy& dual,
                       std::size_t n_samples, std::uint64_t base_seed, int grid_steps) {
  detail::require_samples(n_samples);
  const detail::ModelTables tables(system);
  std::vector<double> values(n_samples);
  for_each_sample(n_samples, [&](std::size_t i) {
    const auto path = sample_mode_path(system, sample_seed(base_seed, i));
    values[i] = detail::duality_residual(tables, x0, y0, primal, dual, path, grid_steps);
  });
  return summarize(values);
}

std::vector<Vector> primal_terminal_states(const SwitchSystem& system, const Vector& x0,
                                           const PrimalPolicy& policy,
                                           std::size_t n_samples, std::uint64_t base_seed,
                                           int grid_steps) {
  const detail::ModelTables tables(system);
  std::vector<Vector> out(n_samples);
  for_each_sample(n_samples, [&](std::size_t i) {
    const auto path = sample_mode_path(system, sample_seed(base_seed, i));
    out[i] = detail::primal_terminal(tables, x0, policy, path, grid_steps);
  });
  return out;
}

}  // namespace swctrl
