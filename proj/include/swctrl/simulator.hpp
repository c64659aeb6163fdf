#pragma once

#include "swctrl/riccati.hpp"
#include "swctrl/switch_model.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

namespace swctrl {

/// Open- or closed-loop control for the primal system: writes u (length d)
/// for time t, mode history e and current state x.
using PrimalPolicy =
    std::function<void(double t, const ModeTrajectory& e, const Vector& x, Vector& u)>;

/// Control for the dual system: writes v (N x p), column th holding the jump
/// amplitude v(th) used if the next jump lands in mode th. Evaluated with
/// the pre-jump state.
using DualPolicy =
    std::function<void(double t, const ModeTrajectory& e, const Vector& y, Matrix& v)>;

/// Jump times and post-jump modes of one realization of the mode process.
struct ModePath {
  Index gamma0 = 0;
  std::vector<double> jump_times;
  std::vector<Index> modes;

  int jumps() const { return static_cast<int>(jump_times.size()); }
  /// Mode in force at time t (right-continuous).
  Index mode_at(double t) const;
};

/// Per-sample seed derived from a base seed and the sample index (splitmix64),
/// so that serial and parallel runs see the same streams.
std::uint64_t sample_seed(std::uint64_t base_seed, std::uint64_t index);

/// Exponential clocks with rate lambda(current mode), targets from Q; stops
/// after M jumps or once the next clock rings past T.
ModePath sample_mode_path(const SwitchSystem& system, std::uint64_t seed);

struct SamplePath {
  std::uint64_t seed = 0;
  ModePath modes;
  /// Snapshot times; a jump time appears twice (pre- and post-jump state).
  std::vector<double> times;
  std::vector<Index> mode_index;
  std::vector<Vector> states;
  std::vector<Vector> pre_jump;
  std::vector<Vector> post_jump;
  Vector terminal;
};

/// Primal state between jumps at level n:
///   x' = A(g) x + B(g) u - [n < M] lambda(g) sum_th Q(g,th) C(g,th) x,
/// and x <- (I + C(g-, th)) x- at a jump. Steps are split at jump times;
/// grid_steps is the number of RK4 steps on [0, T].
SamplePath simulate_primal(const SwitchSystem& system, const Vector& x0,
                           const PrimalPolicy& policy, const ModePath& path,
                           int grid_steps = 2000);
SamplePath simulate_primal(const SwitchSystem& system, const Vector& x0,
                           const PrimalPolicy& policy, std::uint64_t seed,
                           int grid_steps = 2000);

/// Dual state between jumps:
///   y' = -A(g)^T y - [n < M] lambda(g) sum_th Q(g,th) (I + C(g,th)^T) v(th),
/// and y <- y- + v(th) at a jump to th.
SamplePath simulate_dual(const SwitchSystem& system, const Vector& y0,
                         const DualPolicy& policy, const ModePath& path,
                         int grid_steps = 2000);
SamplePath simulate_dual(const SwitchSystem& system, const Vector& y0,
                         const DualPolicy& policy, std::uint64_t seed,
                         int grid_steps = 2000);

/// int_0^T |Pi_{(ker B(G_t)^T)^perp} Y_t|^2 dt along one path.
double dual_cost_sample(const SwitchSystem& system, const Vector& y0,
                        const DualPolicy& policy, const ModePath& path, int grid_steps);

/// <X_T, Y_T> - <x0, y0> - int_0^T <u_t, B(G_t)^T Y_t> dt, with X and Y
/// driven by the same mode path.
double duality_residual_sample(const SwitchSystem& system, const Vector& x0,
                               const Vector& y0, const PrimalPolicy& primal,
                               const DualPolicy& dual, const ModePath& path,
                               int grid_steps);

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

/// Pairwise-summed mean and standard error; independent of evaluation order.
Estimate summarize(std::span<const double> values);
double pairwise_sum(std::span<const double> values);

/// Monte-Carlo estimators, OpenMP-parallel over samples. Sample i uses
/// sample_seed(base_seed, i).
Estimate mc_cost_dual(const SwitchSystem& system, const Vector& y0,
                      const DualPolicy& policy, std::size_t n_samples,
                      std::uint64_t base_seed, int grid_steps = 2000);
Estimate duality_check(const SwitchSystem& system, const Vector& x0, const Vector& y0,
                       const PrimalPolicy& primal, const DualPolicy& dual,
                       std::size_t n_samples, std::uint64_t base_seed,
                       int grid_steps = 2000);
/// Terminal primal states of n_samples paths (parallel).
std::vector<Vector> primal_terminal_states(const SwitchSystem& system, const Vector& x0,
                                           const PrimalPolicy& policy,
                                           std::size_t n_samples,
                                           std::uint64_t base_seed, int grid_steps = 2000);

/// Single-threaded reference versions of the estimators above; results are
/// bitwise identical to the parallel ones.
namespace serial {
Estimate mc_cost_dual(const SwitchSystem& system, const Vector& y0,
                      const DualPolicy& policy, std::size_t n_samples,
                      std::uint64_t base_seed, int grid_steps = 2000);
Estimate duality_check(const SwitchSystem& system, const Vector& x0, const Vector& y0,
                       const PrimalPolicy& primal, const DualPolicy& dual,
                       std::size_t n_samples, std::uint64_t base_seed,
                       int grid_steps = 2000);
std::vector<Vector> primal_terminal_states(const SwitchSystem& system, const Vector& x0,
                                           const PrimalPolicy& policy,
                                           std::size_t n_samples,
                                           std::uint64_t base_seed, int grid_steps = 2000);
}  // namespace serial

// ---------------------------------------------------------------------------
// Control synthesis

/// Deterministic open-loop null control of x' = A_eff x + B u on [0, T]:
///   G_T = int_0^T e^{A_eff (T-s)} B B^T e^{A_eff^T (T-s)} ds   (composite Simpson)
///   u(t) = -B^T e^{A_eff^T (T-t)} G_T^-1 e^{A_eff T} x0.
struct GramianControl {
  Matrix gramian;
  double condition = 0.0;
  Matrix A_eff;
  Matrix B;
  double T = 0.0;
  /// G_T^-1 e^{A_eff T} x0.
  Vector weight;

  Vector control(double t) const;
  /// The open-loop control before the first jump, zero afterwards.
  PrimalPolicy pre_jump_policy() const;

 private:
  friend GramianControl gramian_control(const Matrix&, const Matrix&, double,
                                        const Vector&, int);
  /// Costate e^{A_eff^T (T - t)} weight on a uniform table, for cubic
  /// Hermite interpolation.
  std::vector<Vector> table_;
};

/// Throws NumericalError when G_T is numerically singular (condition > 1e12).
GramianControl gramian_control(const Matrix& A_eff, const Matrix& B, double T,
                               const Vector& x0, int quad_steps = 2000);

/// Pre-first-jump drift of the primal system from gamma0:
/// A(g0) - lambda(g0) sum_th Q(g0,th) C(g0,th).
Matrix pre_jump_drift(const SwitchSystem& system);

/// Optimal feedback of the regularized dual problem:
///   v(th) = (eps I + K(n+1,th,t))^-1 [(C(g,th) + I) K(n,g,t) - K(n+1,th,t)] y-
/// looked up at the nearest grid time of the solution.
DualPolicy riccati_feedback_policy(const SwitchSystem& system,
                                   const RiccatiSolution& solution);

/// Two-phase burst policy driving the dual state from y0 to zero by time
/// 2 * eps_burst before the first jump:
///   v(th) = -P y + w(t),  P = projector onto Im B(g0),
/// with w in ker B^T constant on [0, e) and on [e, 2e), chosen in closed form
/// so that Y(2e) = 0; v = 0 afterwards and after the first jump. The
/// feedback part puts every post-jump state in ker B^T. The simulated Y(2e)
/// vanishes to RK4 accuracy when e and 2e are grid nodes.
/// Throws NumericalError when Y(2e) = 0 is not reachable this way.
struct BurstPolicy {
  double eps_burst = 0.0;
  Vector w_first;
  Vector w_second;
  Matrix range_projector;
  DualPolicy policy;
};
BurstPolicy burst_null_policy(const SwitchSystem& system, const Vector& y0,
                              double eps_burst);

/// u = F(g) x and v(th) = G(g, th) y with i.i.d. N(0, scale^2) entries.
std::pair<PrimalPolicy, DualPolicy> random_linear_policies(const SwitchSystem& system,
                                                           std::uint64_t seed,
                                                           double scale = 1.0);

/// CSV with header `sample,t,mode,x_1..x_N`.
void write_paths_csv(std::ostream& out, const SwitchSystem& system,
                     std::span<const SamplePath> paths);

}  // namespace swctrl
