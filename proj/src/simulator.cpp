#include "swctrl/simulator.hpp"

#include "sim_kernels.hpp"
#include "swctrl/errors.hpp"
#include "swctrl/subspace.hpp"

#include <cmath>
#include <ostream>
#include <random>
#include <sstream>

namespace swctrl {

Index ModePath::mode_at(double t) const {
  Index mode = gamma0;
  for (std::size_t k = 0; k < jump_times.size() && jump_times[k] <= t; ++k) mode = modes[k];
  return mode;
}

std::uint64_t sample_seed(std::uint64_t base_seed, std::uint64_t index) {
  std::uint64_t z = base_seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

ModePath sample_mode_path(const SwitchSystem& system, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  // Open interval (0, 1): a zero clock would collide with the previous mark.
  const auto uniform = [&rng] { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; };

  ModePath path;
  path.gamma0 = system.gamma0();
  Index mode = path.gamma0;
  double t = 0.0;
  for (int k = 0; k < system.M(); ++k) {
    const double rate = system.lambda(mode);
    if (rate <= 0.0) break;
    t += -std::log1p(-uniform()) / rate;
    if (t > system.T()) break;
    const double pick = uniform() * system.Q().row(mode).sum();
    double acc = 0.0;
    Index target = -1;
    for (Index th = 0; th < system.num_modes(); ++th) {
      if (!system.edge(mode, th)) continue;
      acc += system.Q(mode, th);
      target = th;
      if (pick < acc) break;
    }
    path.jump_times.push_back(t);
    path.modes.push_back(target);
    mode = target;
  }
  return path;
}

// ---------------------------------------------------------------------------

namespace detail {

ModelTables::ModelTables(const SwitchSystem& sys) : system(sys) {
  const Index p = sys.num_modes();
  const Index n = sys.N();
  const Matrix I = Matrix::Identity(n, n);
  for (Index g = 0; g < p; ++g) {
    Matrix compensated = sys.A(g);
    std::vector<std::pair<Index, Matrix>> weights;
    for (Index th = 0; th < p; ++th) {
      jump_map.push_back(I + sys.C(g, th));
      if (!sys.edge(g, th)) continue;
      const double nu = sys.lambda(g) * sys.Q(g, th);
      compensated -= nu * sys.C(g, th);
      if (nu != 0.0) weights.emplace_back(th, nu * (I + sys.C(g, th).transpose()));
    }
    primal_drift.push_back({sys.A(g), compensated});
    minus_AT.push_back(-sys.A(g).transpose());
    dual_weights.push_back(std::move(weights));
    range_projector.push_back(projector(image(sys.B(g))));
    BT.push_back(sys.B(g).transpose());
  }
}

namespace {

/// Event-exact fixed-step RK4 along one mode path. The uniform grid
/// t_j = j T / L is refined by the jump times; `jump` is applied with the
/// pre-jump trajectory before the new mark is appended.
template <class Rhs, class Jump, class Observe>
void integrate(const SwitchSystem& system, const ModePath& path, Vector& z, int L,
               Rhs&& rhs, Jump&& jump, Observe&& observe) {
  const double T = system.T();
  const double tiny = 1e-12 * T;
  const auto node_time = [&](int j) { return T * j / L; };

  ModeTrajectory e(path.gamma0, system.M());
  Vector k1(z.size()), k2(z.size()), k3(z.size()), k4(z.size()), stage(z.size());
  double t = 0.0;
  int node = 1;
  observe(t, e, z);
  for (int seg = 0; seg <= path.jumps(); ++seg) {
    const bool jumps_here = seg < path.jumps();
    const double end = jumps_here ? path.jump_times[static_cast<std::size_t>(seg)] : T;
    while (t < end) {
      while (node <= L && node_time(node) <= t + tiny) ++node;
      const double target = (node <= L && node_time(node) < end - tiny) ? node_time(node) : end;
      const double dt = target - t;
      // End stages are evaluated one ulp inside the step, so controls that
      // switch at a grid node are sampled from the correct side.
      rhs(std::nextafter(t, target), e, z, k1);
      stage = z + (0.5 * dt) * k1;
      rhs(t + 0.5 * dt, e, stage, k2);
      stage = z + (0.5 * dt) * k2;
      rhs(t + 0.5 * dt, e, stage, k3);
      stage = z + dt * k3;
      rhs(std::nextafter(target, t), e, stage, k4);
      z += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      t = target;
      observe(t, e, z);
    }
    if (!z.allFinite()) {
      std::ostringstream msg;
      msg << "simulated state is not finite at t = " << t;
      throw NumericalError(msg.str());
    }
    if (jumps_here) {
      const Index to = path.modes[static_cast<std::size_t>(seg)];
      jump(t, e, to, z);
      e.push(t, to);
      observe(t, e, z);
    }
  }
}

struct NoObserver {
  void operator()(double, const ModeTrajectory&, const Vector&) const {}
};

bool compensated(const ModeTrajectory& e) { return e.level() < e.jump_cap(); }

/// Shared dual pieces: drift and jump of y stored at z.segment(offset, N).
struct DualParts {
  const ModelTables& tables;
  const DualPolicy& policy;
  Index offset;
  Vector y;
  Matrix v;

  DualParts(const ModelTables& t, const DualPolicy& p, Index off)
      : tables(t), policy(p), offset(off), y(t.system.N()),
        v(t.system.N(), t.system.num_modes()) {}

  void drift(double t, const ModeTrajectory& e, const Vector& z, Vector& dz) {
    const Index n = tables.system.N();
    const Index g = e.current_mode();
    y = z.segment(offset, n);
    dz.segment(offset, n).noalias() = tables.minus_AT[static_cast<std::size_t>(g)] * y;
    if (!compensated(e)) return;
    const auto& weights = tables.dual_weights[static_cast<std::size_t>(g)];
    if (weights.empty()) return;
    policy(t, e, y, v);
    for (const auto& [th, w] : weights) dz.segment(offset, n).noalias() -= w * v.col(th);
  }

  void jump(double t, const ModeTrajectory& e, Index to, Vector& z) {
    const Index n = tables.system.N();
    y = z.segment(offset, n);
    policy(t, e, y, v);
    z.segment(offset, n) += v.col(to);
  }
};

struct PrimalParts {
  const ModelTables& tables;
  const PrimalPolicy& policy;
  Vector x;
  Vector u;
  Vector scratch;

  PrimalParts(const ModelTables& t, const PrimalPolicy& p)
      : tables(t), policy(p), x(t.system.N()), u(t.system.d()), scratch(t.system.N()) {}

  void drift(double t, const ModeTrajectory& e, const Vector& z, Vector& dz) {
    const Index n = tables.system.N();
    const auto g = static_cast<std::size_t>(e.current_mode());
    x = z.head(n);
    u.setZero();
    policy(t, e, x, u);
    dz.head(n).noalias() = tables.primal_drift[g][compensated(e) ? 1 : 0] * x;
    dz.head(n).noalias() += tables.system.B(e.current_mode()) * u;
  }

  void jump(const ModeTrajectory& e, Index to, Vector& z) {
    const Index n = tables.system.N();
    scratch.noalias() = tables.jump(e.current_mode(), to) * z.head(n);
    z.head(n) = scratch;
  }
};

}  // namespace

double dual_cost(const ModelTables& tables, const Vector& y0, const DualPolicy& policy,
                 const ModePath& path, int grid_steps) {
  const Index n = tables.system.N();
  DualParts dual(tables, policy, 0);
  Vector projected(n);
  Vector z = Vector::Zero(n + 1);
  z.head(n) = y0;
  integrate(
      tables.system, path, z, grid_steps,
      [&](double t, const ModeTrajectory& e, const Vector& s, Vector& ds) {
        dual.drift(t, e, s, ds);
        projected.noalias() =
            tables.range_projector[static_cast<std::size_t>(e.current_mode())] * s.head(n);
        ds(n) = projected.squaredNorm();
      },
      [&](double t, const ModeTrajectory& e, Index to, Vector& s) { dual.jump(t, e, to, s); },
      NoObserver{});
  return z(n);
}

double duality_residual(const ModelTables& tables, const Vector& x0, const Vector& y0,
                        const PrimalPolicy& primal, const DualPolicy& dual_policy,
                        const ModePath& path, int grid_steps) {
  const Index n = tables.system.N();
  PrimalParts prim(tables, primal);
  DualParts dual(tables, dual_policy, n);
  Vector bty(tables.system.d());
  Vector z = Vector::Zero(2 * n + 1);
  z.head(n) = x0;
  z.segment(n, n) = y0;
  integrate(
      tables.system, path, z, grid_steps,
      [&](double t, const ModeTrajectory& e, const Vector& s, Vector& ds) {
        prim.drift(t, e, s, ds);
        dual.drift(t, e, s, ds);
        bty.noalias() = tables.BT[static_cast<std::size_t>(e.current_mode())] * s.segment(n, n);
        ds(2 * n) = prim.u.dot(bty);
      },
      [&](double t, const ModeTrajectory& e, Index to, Vector& s) {
        dual.jump(t, e, to, s);
        prim.jump(e, to, s);
      },
      NoObserver{});
  return z.head(n).dot(z.segment(n, n)) - x0.dot(y0) - z(2 * n);
}

Vector primal_terminal(const ModelTables& tables, const Vector& x0,
                       const PrimalPolicy& policy, const ModePath& path, int grid_steps) {
  PrimalParts prim(tables, policy);
  Vector z = x0;
  integrate(
      tables.system, path, z, grid_steps,
      [&](double t, const ModeTrajectory& e, const Vector& s, Vector& ds) {
        prim.drift(t, e, s, ds);
      },
      [&](double, const ModeTrajectory& e, Index to, Vector& s) { prim.jump(e, to, s); },
      NoObserver{});
  return z;
}

void require_samples(std::size_t n_samples) {
  if (n_samples < 100) throw InputError("samples", "at least 100 samples are required");
}

}  // namespace detail

// ---------------------------------------------------------------------------

namespace {

void check_dim(const Vector& v, Index n, const char* field) {
  if (v.size() != n)
    throw InputError(field, "expected a vector of dimension " + std::to_string(n));
}

/// Records snapshots of z.head(N) plus jump pre/post states.
struct Recorder {
  SamplePath& out;
  Index n;
  int last_level = 0;

  void operator()(double t, const ModeTrajectory& e, const Vector& z) {
    if (e.level() != last_level) {
      out.post_jump.push_back(z.head(n));
      last_level = e.level();
    }
    out.times.push_back(t);
    out.mode_index.push_back(e.current_mode());
    out.states.push_back(z.head(n));
  }
};

}  // namespace

SamplePath simulate_primal(const SwitchSystem& system, const Vector& x0,
                           const PrimalPolicy& policy, const ModePath& path,
                           int grid_steps) {
  check_dim(x0, system.N(), "x0");
  const detail::ModelTables tables(system);
  detail::PrimalParts prim(tables, policy);
  SamplePath out;
  out.modes = path;
  Vector z = x0;
  detail::integrate(
      system, path, z, grid_steps,
      [&](double t, const ModeTrajectory& e, const Vector& s, Vector& ds) {
        prim.drift(t, e, s, ds);
      },
      [&](double, const ModeTrajectory& e, Index to, Vector& s) {
        out.pre_jump.push_back(s);
        prim.jump(e, to, s);
      },
      Recorder{out, system.N()});
  out.terminal = z;
  return out;
}

SamplePath simulate_primal(const SwitchSystem& system, const Vector& x0,
                           const PrimalPolicy& policy, std::uint64_t seed, int grid_steps) {
  SamplePath out =
      simulate_primal(system, x0, policy, sample_mode_path(system, seed), grid_steps);
  out.seed = seed;
  return out;
}

SamplePath simulate_dual(const SwitchSystem& system, const Vector& y0,
                         const DualPolicy& policy, const ModePath& path, int grid_steps) {
  check_dim(y0, system.N(), "y0");
  const detail::ModelTables tables(system);
  detail::DualParts dual(tables, policy, 0);
  SamplePath out;
  out.modes = path;
  Vector z = y0;
  detail::integrate(
      system, path, z, grid_steps,
      [&](double t, const ModeTrajectory& e, const Vector& s, Vector& ds) {
        dual.drift(t, e, s, ds);
      },
      [&](double t, const ModeTrajectory& e, Index to, Vector& s) {
        out.pre_jump.push_back(s);
        dual.jump(t, e, to, s);
      },
      Recorder{out, system.N()});
  out.terminal = z;
  return out;
}

SamplePath simulate_dual(const SwitchSystem& system, const Vector& y0,
                         const DualPolicy& policy, std::uint64_t seed, int grid_steps) {
  SamplePath out = simulate_dual(system, y0, policy, sample_mode_path(system, seed), grid_steps);
  out.seed = seed;
  return out;
}

double dual_cost_sample(const SwitchSystem& system, const Vector& y0,
                        const DualPolicy& policy, const ModePath& path, int grid_steps) {
  check_dim(y0, system.N(), "y0");
  return detail::dual_cost(detail::ModelTables(system), y0, policy, path, grid_steps);
}

double duality_residual_sample(const SwitchSystem& system, const Vector& x0,
                               const Vector& y0, const PrimalPolicy& primal,
                               const DualPolicy& dual, const ModePath& path,
                               int grid_steps) {
  check_dim(x0, system.N(), "x0");
  check_dim(y0, system.N(), "y0");
  return detail::duality_residual(detail::ModelTables(system), x0, y0, primal, dual, path,
                                  grid_steps);
}

// ---------------------------------------------------------------------------

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

Estimate summarize(std::span<const double> values) {
  Estimate est;
  est.samples = values.size();
  if (values.empty()) return est;
  const auto n = static_cast<double>(values.size());
  est.mean = pairwise_sum(values) / n;
  if (values.size() > 1) {
    std::vector<double> sq(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
      sq[i] = (values[i] - est.mean) * (values[i] - est.mean);
    est.std_error = std::sqrt(pairwise_sum(sq) / (n - 1.0) / n);
  }
  return est;
}

void write_paths_csv(std::ostream& out, const SwitchSystem& system,
                     std::span<const SamplePath> paths) {
  out << "sample,t,mode";
  for (Index i = 0; i < system.N(); ++i) out << ",x_" << i + 1;
  out << '\n';
  const auto old_precision = out.precision(17);
  for (std::size_t s = 0; s < paths.size(); ++s) {
    const auto& path = paths[s];
    for (std::size_t k = 0; k < path.times.size(); ++k) {
      out << s << ',' << path.times[k] << ',' << system.mode_name(path.mode_index[k]);
      for (Index i = 0; i < system.N(); ++i) out << ',' << path.states[k](i);
      out << '\n';
    }
  }
  out.precision(old_precision);
}

}  // namespace swctrl
