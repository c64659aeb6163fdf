#include "report.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>

namespace swctrl::cli {

using nlohmann::json;

std::uint64_t system_hash(const SwitchSystem& system) {
  const std::string text = serialize_system(system).dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_json(const Vector& v) { return std::vector<double>(v.begin(), v.end()); }

json system_section(const SwitchSystem& system, const std::string& source,
                    const json& overrides) {
  json lambda = json::object();
  for (Index g = 0; g < system.num_modes(); ++g) lambda[system.mode_name(g)] = system.lambda(g);
  return json{{"hash", hex(system_hash(system))},
              {"source", source},
              {"overrides", overrides},
              {"summary",
               {{"N", system.N()},
                {"d", system.d()},
                {"modes", system.modes()},
                {"lambda", lambda},
                {"M", system.M()},
                {"T", system.T()},
                {"gamma0", system.mode_name(system.gamma0())},
                {"B_mode_independent", system.B_mode_independent()}}},
              {"document", serialize_system(system)}};
}

json invariance_section(const SwitchSystem& system, const VLadder& ladder, bool approx_null,
                        const SufficiencyReport& sufficiency) {
  json levels = json::array();
  for (int n = 0; n <= ladder.M(); ++n) {
    json modes = json::object();
    for (Index g = 0; g < ladder.num_modes(); ++g) {
      const auto& v = ladder.at(n, g);
      modes[system.mode_name(g)] = {{"dim", v.dim()}, {"basis", matrix_json(v.basis())}};
    }
    levels.push_back({{"level", n}, {"modes", modes}});
  }
  json per_mode = json::object();
  for (Index g = 0; g < system.num_modes(); ++g) {
    const auto& v = sufficiency.per_mode[static_cast<std::size_t>(g)];
    per_mode[system.mode_name(g)] = {{"dim", v.dim()}, {"basis", matrix_json(v.basis())}};
  }
  return json{{"v_ladder", levels},
              {"approx_null_controllable", approx_null},
              {"gamma0_subspace_dim", ladder.at(0, system.gamma0()).dim()},
              {"approx_ctrl_sufficient",
               {{"verdict", to_string(sufficiency.verdict)}, {"per_mode", per_mode}}}};
}

json riccati_section(const SwitchSystem& system, const RiccatiSolution& solution) {
  const auto& params = solution.params();
  const Matrix k = K0(solution, system.gamma0());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(k, Eigen::EigenvaluesOnly);

  double min_eigen = std::numeric_limits<double>::infinity();
  for (int n = 0; n <= solution.M(); ++n)
    for (Index g = 0; g < solution.num_modes(); ++g)
      for (int j = 0; j <= solution.grid_steps(); ++j) {
        Eigen::SelfAdjointEigenSolver<Matrix> e(solution.K(n, g, j), Eigen::EigenvaluesOnly);
        min_eigen = std::min(min_eigen, e.eigenvalues()(0));
      }

  double identity = 0.0, shifted = 0.0;
  for (int n = 0; n < solution.M(); ++n)
    for (Index g = 0; g < solution.num_modes(); ++g) {
      std::vector<Matrix> next;
      for (Index th = 0; th < solution.num_modes(); ++th) next.push_back(solution.K(n + 1, th, 0));
      const auto c = canonical_coeffs(system, params, n, g, solution.K(n, g, 0), next);
      identity = std::max(identity, c.residual_identity);
      shifted = std::max(shifted, c.residual_shifted);
    }

  return json{{"epsilon", params.epsilon},
              {"grid_steps", params.grid_steps},
              {"level_M_mode", to_string(params.level_M_mode)},
              {"K0", matrix_json(k)},
              {"K0_eigenvalues", vector_json(eig.eigenvalues())},
              {"min_eigenvalue_over_grid", min_eigen},
              {"canonical_residual_t0", {{"identity", identity}, {"shifted", shifted}}}};
}

json simulation_section(const SimulationSummary& s) {
  json gramian;
  if (s.gramian_skipped) {
    gramian = {{"skipped", true}};
  } else {
    gramian = {{"skipped", false},
               {"x0", vector_json(s.x0)},
               {"gramian", matrix_json(s.gramian)},
               {"condition", s.gramian_condition},
               {"max_terminal_norm", s.max_terminal_norm}};
  }
  return json{{"samples", s.samples},
              {"seed", s.seed},
              {"grid_steps", s.grid_steps},
              {"duality",
               {{"x0", vector_json(s.x0)},
                {"y0", vector_json(s.y0)},
                {"policy", "random_linear"},
                {"policy_seed", s.policy_seed},
                {"residual", s.duality.mean},
                {"std_error", s.duality.std_error}}},
              {"feedback_cost",
               {{"epsilon", s.feedback_epsilon},
                {"y0", vector_json(s.feedback_y0)},
                {"mean", s.feedback_cost.mean},
                {"std_error", s.feedback_cost.std_error},
                {"riccati_form", s.riccati_form}}},
              {"gramian_control", gramian}};
}

}  // namespace swctrl::cli
