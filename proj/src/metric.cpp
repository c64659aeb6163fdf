#include "swctrl/metric.hpp"

#include "swctrl/errors.hpp"

#include <cmath>
#include <exception>

namespace swctrl {
namespace {

Vector sorted_eigenvalues(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m, Eigen::EigenvaluesOnly);
  return eig.eigenvalues();  // ascending
}

double spectral_norm_sym(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return sorted_eigenvalues(m).cwiseAbs().maxCoeff();
}

}  // namespace

EpsilonSchedule::EpsilonSchedule(std::vector<double> values) : values_(std::move(values)) {
  if (values_.size() < 3)
    throw InputError("eps-schedule", "at least three epsilon values are required");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!(values_[i] > 0.0) || !std::isfinite(values_[i]))
      throw InputError("eps-schedule", "epsilon values must be positive");
    if (i > 0 && !(values_[i] < values_[i - 1]))
      throw InputError("eps-schedule", "epsilon values must be strictly decreasing");
  }
  if (values_.back() > 1e-5)
    throw InputError("eps-schedule", "the smallest epsilon must be <= 1e-5");
}

EpsilonSchedule EpsilonSchedule::standard() {
  return EpsilonSchedule({1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6});
}

const char* to_string(ExactVerdict v) {
  switch (v) {
    case ExactVerdict::exact: return "exact";
    case ExactVerdict::not_exact: return "not_exact";
    case ExactVerdict::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

double default_delta_pd(const Matrix& k0) {
  return 1e-4 * (1.0 + k0.trace() / static_cast<double>(k0.rows()));
}

K0Diagnostics k0_estimate(const SwitchSystem& system, const EpsilonSchedule& schedule,
                          int grid_steps, LevelMMode level_M_mode,
                          const VerdictThresholds& thresholds) {
  const auto& eps = schedule.values();
  const auto count = static_cast<int>(eps.size());
  K0Diagnostics diag;
  diag.epsilons = eps;
  diag.K0.resize(eps.size());
  diag.level_M_mode = level_M_mode;
  diag.grid_steps = grid_steps;

  std::vector<std::exception_ptr> failures(eps.size());
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < count; ++i) {
    const auto at = static_cast<std::size_t>(i);
    try {
      const auto params =
          RiccatiParams::control_cost(system, eps[at], grid_steps, level_M_mode);
      diag.K0[at] = K0(solve(system, params), system.gamma0());
    } catch (...) {
      failures[at] = std::current_exception();
    }
  }
  for (const auto& failure : failures)
    if (failure) std::rethrow_exception(failure);

  for (const auto& k : diag.K0) diag.eigen.push_back(sorted_eigenvalues(k));
  for (std::size_t i = 0; i + 1 < diag.K0.size(); ++i)
    diag.deltas.push_back(spectral_norm_sym(diag.K0[i] - diag.K0[i + 1]));
  diag.k0 = diag.K0.back();
  diag.delta_pd = thresholds.delta_pd.value_or(default_delta_pd(diag.k0));
  diag.stagnation = thresholds.stagnation;
  diag.verdict =
      verdict(diag, diag.delta_pd, diag.stagnation, thresholds.decay_per_decade);
  return diag;
}

double metric(const K0Diagnostics& diag, const Vector& y) {
  if (y.size() != diag.k0.rows())
    throw InputError("y", "expected a vector of dimension " + std::to_string(diag.k0.rows()));
  return std::sqrt(std::max(0.0, y.dot(diag.k0 * y)));
}

ExactVerdict verdict(const K0Diagnostics& diag, double delta_pd, double stagnation,
                     double decay_per_decade) {
  const std::size_t count = diag.K0.size();
  if (count == 0) return ExactVerdict::inconclusive;

  // K0^eps must not increase as eps decreases.
  for (std::size_t i = 0; i + 1 < count; ++i) {
    const Matrix drop = diag.K0[i] - diag.K0[i + 1];
    const double scale = 1.0 + spectral_norm_sym(diag.K0[i]);
    if (sorted_eigenvalues(drop)(0) < -1e-7 * scale) return ExactVerdict::inconclusive;
  }

  const double k0_norm = spectral_norm_sym(diag.k0);
  const double lambda_min = sorted_eigenvalues(diag.k0)(0);
  const bool settled =
      diag.deltas.empty() || diag.deltas.back() <= stagnation * (1.0 + k0_norm);
  if (lambda_min > delta_pd && settled) return ExactVerdict::exact;

  // k0 <= K0^eps, so a singular K0^eps at any eps already rules out a norm.
  for (std::size_t i = 0; i < count; ++i) {
    const double floor = 1e-12 * (1.0 + spectral_norm_sym(diag.K0[i]));
    if (sorted_eigenvalues(diag.K0[i])(0) <= floor) return ExactVerdict::not_exact;
  }

  if (count >= 3) {
    bool vanishing = true;
    for (std::size_t i = count - 3; i + 1 < count; ++i) {
      const double before = sorted_eigenvalues(diag.K0[i])(0);
      const double after = sorted_eigenvalues(diag.K0[i + 1])(0);
      const double decades = std::log10(diag.epsilons[i] / diag.epsilons[i + 1]);
      const double ratio = std::pow(after / before, 1.0 / decades);
      if (!(ratio <= 1.0 - decay_per_decade)) vanishing = false;
    }
    if (vanishing) return ExactVerdict::not_exact;
  }
  return ExactVerdict::inconclusive;
}

nlohmann::json to_json(const K0Diagnostics& diag) {
  using nlohmann::json;
  auto matrix = [](const Matrix& m) {
    json rows = json::array();
    for (Index i = 0; i < m.rows(); ++i) {
      json row = json::array();
      for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
      rows.push_back(std::move(row));
    }
    return rows;
  };
  json eigen = json::array();
  for (const auto& e : diag.eigen) eigen.push_back(std::vector<double>(e.begin(), e.end()));
  json K0s = json::array();
  for (const auto& k : diag.K0) K0s.push_back(matrix(k));
  return json{{"epsilons", diag.epsilons},
              {"eigenvalues", eigen},
              {"K0", K0s},
              {"deltas", diag.deltas},
              {"k0", matrix(diag.k0)},
              {"verdict", to_string(diag.verdict)},
              {"thresholds", {{"delta_pd", diag.delta_pd}, {"stagnation", diag.stagnation}}},
              {"level_M_mode", to_string(diag.level_M_mode)},
              {"grid_steps", diag.grid_steps}};
}

}  // namespace swctrl
