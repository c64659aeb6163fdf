#pragma once

// JSON sections of the run report.

#include "swctrl/invariance.hpp"
#include "swctrl/metric.hpp"
#include "swctrl/riccati.hpp"
#include "swctrl/simulator.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>

namespace swctrl::cli {

inline constexpr const char* kToolName = "swctrl";
inline constexpr const char* kToolVersion = "0.4.0";

/// FNV-1a over the canonical serialization of the system.
std::uint64_t system_hash(const SwitchSystem& system);
std::string hex(std::uint64_t value);

nlohmann::json matrix_json(const Matrix& m);
nlohmann::json vector_json(const Vector& v);

nlohmann::json system_section(const SwitchSystem& system, const std::string& source,
                              const nlohmann::json& overrides);

nlohmann::json invariance_section(const SwitchSystem& system, const VLadder& ladder,
                                  bool approx_null, const SufficiencyReport& sufficiency);

/// K0, spectrum over the grid, and the canonical-form residuals at t = 0.
nlohmann::json riccati_section(const SwitchSystem& system, const RiccatiSolution& solution);

struct SimulationSummary {
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  int grid_steps = 0;
  Vector x0;
  Vector y0;
  Estimate duality;
  std::uint64_t policy_seed = 0;
  double feedback_epsilon = 0.0;
  Vector feedback_y0;
  Estimate feedback_cost;
  double riccati_form = 0.0;
  bool gramian_skipped = false;
  Matrix gramian;
  double gramian_condition = 0.0;
  double max_terminal_norm = 0.0;
};

nlohmann::json simulation_section(const SimulationSummary& summary);

}  // namespace swctrl::cli
