#pragma once

#include "swctrl/subspace.hpp"
#include "swctrl/switch_model.hpp"

#include <vector>

namespace swctrl {

/// The family V(n, g), n = 0..M, of largest invariant subspaces of ker B^T.
class VLadder {
 public:
  VLadder(int M, Index num_modes, std::vector<Subspace> entries);

  int M() const { return M_; }
  Index num_modes() const { return modes_; }
  const Subspace& at(int level, Index gamma) const;

 private:
  int M_;
  Index modes_;
  std::vector<Subspace> entries_;  // level-major
};

/// Builds the ladder by descending recursion from V(M, g) = ker B^T.
/// Requires a mode-independent B (throws InputError otherwise).
VLadder v_ladder(const SwitchSystem& system, double rank_tol = kRankTol);

/// Approximate null-controllability from gamma0: V(0, gamma0) = {0}.
bool approx_null_verdict(const SwitchSystem& system, double rank_tol = kRankTol);
bool approx_null_verdict(const SwitchSystem& system, const VLadder& ladder);

enum class Sufficiency { holds, inconclusive };

struct SufficiencyReport {
  Sufficiency verdict;
  /// Per mode: largest invariant subspace of ker B^T with the family built
  /// from Pi_{ker B^T}. `holds` iff all are {0}.
  std::vector<Subspace> per_mode;
};

/// Sufficient test for approximate (full) controllability. `inconclusive`
/// does not mean the system fails to be approximately controllable.
SufficiencyReport approx_ctrl_sufficient(const SwitchSystem& system,
                                         double rank_tol = kRankTol);

const char* to_string(Sufficiency s);

}  // namespace swctrl
