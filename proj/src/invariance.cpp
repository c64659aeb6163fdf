#include "swctrl/invariance.hpp"

#include "swctrl/errors.hpp"

namespace swctrl {
namespace {

Subspace kernel_of_BT(const SwitchSystem& system, double rank_tol) {
  if (!system.B_mode_independent())
    throw InputError("B", "invariance analysis requires a mode-independent B");
  return kernel(system.B(0).transpose(), rank_tol);
}

}  // namespace

VLadder::VLadder(int M, Index num_modes, std::vector<Subspace> entries)
    : M_(M), modes_(num_modes), entries_(std::move(entries)) {}

const Subspace& VLadder::at(int level, Index gamma) const {
  return entries_.at(static_cast<std::size_t>(level * modes_ + gamma));
}

VLadder v_ladder(const SwitchSystem& system, double rank_tol) {
  const Subspace kerBT = kernel_of_BT(system, rank_tol);
  const Index p = system.num_modes();
  const Index n = system.N();
  const int M = system.M();

  std::vector<Subspace> entries(static_cast<std::size_t>((M + 1) * p), kerBT);
  auto slot = [p](int level, Index g) { return static_cast<std::size_t>(level * p + g); };

  for (int level = M - 1; level >= 0; --level) {
    for (Index g = 0; g < p; ++g) {
      std::vector<Matrix> family;
      for (Index th = 0; th < p; ++th) {
        if (!system.edge(g, th)) continue;
        family.push_back((system.C(g, th).transpose() + Matrix::Identity(n, n)) *
                         projector(entries[slot(level + 1, th)]));
      }
      entries[slot(level, g)] =
          largest_invariant_subspace(cal_A_star(system, g), family, kerBT, rank_tol);
    }
  }
  return VLadder(M, p, std::move(entries));
}

bool approx_null_verdict(const SwitchSystem& system, double rank_tol) {
  return approx_null_verdict(system, v_ladder(system, rank_tol));
}

bool approx_null_verdict(const SwitchSystem& system, const VLadder& ladder) {
  return ladder.at(0, system.gamma0()).is_zero();
}

SufficiencyReport approx_ctrl_sufficient(const SwitchSystem& system, double rank_tol) {
  const Subspace kerBT = kernel_of_BT(system, rank_tol);
  const Matrix pi = projector(kerBT);
  const Index n = system.N();

  SufficiencyReport report{Sufficiency::holds, {}};
  for (Index g = 0; g < system.num_modes(); ++g) {
    std::vector<Matrix> family;
    for (Index th = 0; th < system.num_modes(); ++th)
      if (system.edge(g, th))
        family.push_back((system.C(g, th).transpose() + Matrix::Identity(n, n)) * pi);
    report.per_mode.push_back(
        largest_invariant_subspace(cal_A_star(system, g), family, kerBT, rank_tol));
    if (!report.per_mode.back().is_zero()) report.verdict = Sufficiency::inconclusive;
  }
  return report;
}

const char* to_string(Sufficiency s) {
  return s == Sufficiency::holds ? "holds" : "inconclusive";
}

}  // namespace swctrl
