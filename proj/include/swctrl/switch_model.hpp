#pragma once

#include "swctrl/subspace.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace swctrl {

/// Transition probabilities at or below this are treated as absent edges.
inline constexpr double kEdgeTol = 1e-14;

/// Unvalidated model description, as read from a config document. Matrices
/// are indexed by mode position in `modes`.
struct SystemSpec {
  Index N = 0;
  Index d = 0;
  std::vector<std::string> modes;
  std::vector<double> lambda;
  Matrix Q;
  std::vector<Matrix> A;
  std::vector<Matrix> B;
  std::map<std::pair<Index, Index>, Matrix> C;
  int M = 1;
  double T = 1.0;
  std::string gamma0;
};

/// Finite-mode piecewise-linear switch system
///   dX = [A(G) X + B(G) u] dt + int C(G-, th) X- q~(dt, dth)
/// driven by a pure-jump mode process with rates lambda and kernel Q, capped
/// at M jumps on the horizon [0, T]. Immutable once constructed.
class SwitchSystem {
 public:
  /// Validates every invariant; throws InputError naming the offending field.
  explicit SwitchSystem(SystemSpec spec);

  Index N() const { return spec_.N; }
  Index d() const { return spec_.d; }
  Index num_modes() const { return static_cast<Index>(spec_.modes.size()); }
  const std::vector<std::string>& modes() const { return spec_.modes; }
  const std::string& mode_name(Index gamma) const;
  /// Throws InputError for unknown labels.
  Index mode_index(std::string_view label) const;

  double lambda(Index gamma) const { return spec_.lambda.at(check(gamma)); }
  double Q(Index gamma, Index theta) const { return spec_.Q(check(gamma), check(theta)); }
  const Matrix& Q() const { return spec_.Q; }
  bool edge(Index gamma, Index theta) const { return Q(gamma, theta) > kEdgeTol; }

  const Matrix& A(Index gamma) const { return spec_.A.at(check(gamma)); }
  const Matrix& B(Index gamma) const { return spec_.B.at(check(gamma)); }
  /// C(gamma, theta); the zero matrix when the pair was not given.
  const Matrix& C(Index gamma, Index theta) const;
  const std::map<std::pair<Index, Index>, Matrix>& C_entries() const { return spec_.C; }

  /// True when every mode carries the same B.
  bool B_mode_independent() const;

  int M() const { return spec_.M; }
  double T() const { return spec_.T; }
  Index gamma0() const { return gamma0_; }

  const SystemSpec& spec() const { return spec_; }

  SwitchSystem with_gamma0(std::string_view label) const;
  SwitchSystem with_horizon(double T) const;
  SwitchSystem with_jump_cap(int M) const;
  SwitchSystem with_uniform_rate(double lambda) const;

  friend bool operator==(const SwitchSystem& a, const SwitchSystem& b);

 private:
  Index check(Index gamma) const;

  SystemSpec spec_;
  Index gamma0_ = 0;
  Matrix zero_;
};

/// Builds a SwitchSystem from a config document (see README for the schema).
SwitchSystem parse_system(const nlohmann::json& document);
SwitchSystem parse_system_text(std::string_view text);
nlohmann::json serialize_system(const SwitchSystem& system);

/// Effective dual drift A(g)^T - lambda(g) sum_th Q(g,th) (C(g,th)^T + I).
Matrix cal_A_star(const SwitchSystem& system, Index gamma);

/// Jump rates toward each mode at the given level and time: lambda(g) Q(g, .)
/// while level < M and t <= T, zero afterwards (the process is absorbed).
Vector jump_intensity(const SwitchSystem& system, int level, Index gamma, double t);

struct Mark {
  double time;
  Index mode;
};

/// Realized mode history ((0, g0), (t1, g1), ..., (tn, gn)).
class ModeTrajectory {
 public:
  ModeTrajectory(Index gamma0, int jump_cap);

  int level() const { return static_cast<int>(marks_.size()) - 1; }
  int jump_cap() const { return cap_; }
  double last_time() const { return marks_.back().time; }
  Index current_mode() const { return marks_.back().mode; }
  const std::vector<Mark>& marks() const { return marks_; }

  /// Appends (t, gamma); requires t > last_time() and level() < jump_cap().
  ModeTrajectory concat(double t, Index gamma) const;
  /// In-place variant of concat with the same checks.
  void push(double t, Index gamma);

 private:
  std::vector<Mark> marks_;
  int cap_;
};

}  // namespace swctrl
