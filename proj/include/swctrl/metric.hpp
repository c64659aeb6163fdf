#pragma once

#include "swctrl/riccati.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <vector>

namespace swctrl {

/// Regularization levels for the eps -> 0 limit: strictly decreasing,
/// positive, at least three values, the last one <= 1e-5.
class EpsilonSchedule {
 public:
  explicit EpsilonSchedule(std::vector<double> values);
  /// 1e-1, 1e-2, ..., 1e-6.
  static EpsilonSchedule standard();

  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> values_;
};

enum class ExactVerdict { exact, not_exact, inconclusive };
const char* to_string(ExactVerdict v);

struct VerdictThresholds {
  /// Default 1e-4 (1 + trace(k0) / N).
  std::optional<double> delta_pd;
  double stagnation = 1e-2;
  /// Minimal per-decade relative drop of lambda_min counted as "vanishing".
  double decay_per_decade = 0.3;
};

struct K0Diagnostics {
  std::vector<double> epsilons;
  std::vector<Matrix> K0;
  /// Ascending eigenvalues of each K0^eps.
  std::vector<Vector> eigen;
  /// ||K0^{eps_i} - K0^{eps_{i+1}}||_2.
  std::vector<double> deltas;
  Matrix k0;
  ExactVerdict verdict = ExactVerdict::inconclusive;
  double delta_pd = 0.0;
  double stagnation = 0.0;
  LevelMMode level_M_mode = LevelMMode::gramian;
  int grid_steps = 0;
};

/// Runs the Riccati solver with cost B B^T for every eps in the schedule
/// (independent runs, executed in parallel) and assembles the diagnostics.
/// k0 is K0 at the smallest eps.
K0Diagnostics k0_estimate(const SwitchSystem& system, const EpsilonSchedule& schedule,
                          int grid_steps = 2000,
                          LevelMMode level_M_mode = LevelMMode::gramian,
                          const VerdictThresholds& thresholds = {});

/// sqrt(max(0, y^T k0 y)).
double metric(const K0Diagnostics& diag, const Vector& y);

/// exact: lambda_min(k0) > delta_pd and the last delta <= stagnation (1 + ||k0||).
/// not_exact: some K0^eps is numerically singular, or lambda_min(K0^eps)
/// drops by at least 30% per decade of eps over the last three schedule points.
/// inconclusive: otherwise, or when K0^eps fails to decrease with eps.
ExactVerdict verdict(const K0Diagnostics& diag, double delta_pd, double stagnation,
                     double decay_per_decade = 0.3);

double default_delta_pd(const Matrix& k0);

/// {"epsilons", "eigenvalues", "k0", "verdict", ...}.
nlohmann::json to_json(const K0Diagnostics& diag);

}  // namespace swctrl
