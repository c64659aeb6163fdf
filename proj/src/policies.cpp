#include "swctrl/simulator.hpp"

#include "swctrl/errors.hpp"
#include "swctrl/matrix_exp.hpp"
#include "swctrl/subspace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <random>

namespace swctrl {

// ---------------------------------------------------------------------------
// Gramian control

GramianControl gramian_control(const Matrix& A_eff, const Matrix& B, double T,
                               const Vector& x0, int quad_steps) {
  const Index n = A_eff.rows();
  if (A_eff.cols() != n) throw InputError("A_eff", "must be square");
  if (B.rows() != n) throw InputError("B", "row count must match A_eff");
  if (x0.size() != n) throw InputError("x0", "dimension mismatch");
  if (!(T > 0.0)) throw InputError("T", "must be positive");
  if (quad_steps < 2) throw InputError("quad_steps", "at least two panels are required");
  if (quad_steps % 2 != 0) ++quad_steps;

  GramianControl out;
  out.A_eff = A_eff;
  out.B = B;
  out.T = T;

  // G = int_0^T E(tau) B B^T E(tau)^T d tau with E(tau) = e^{A_eff tau}.
  const double h = T / quad_steps;
  const Matrix step = matrix_exp(A_eff, h);
  const Matrix BBt = B * B.transpose();
  Matrix E = Matrix::Identity(n, n);
  Matrix G = Matrix::Zero(n, n);
  for (int k = 0; k <= quad_steps; ++k) {
    const double w = (k == 0 || k == quad_steps) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    G += w * (E * BBt * E.transpose());
    E = E * step;
  }
  G *= h / 3.0;
  out.gramian = 0.5 * (G + G.transpose());

  Eigen::JacobiSVD<Matrix> svd(out.gramian);
  const auto& sv = svd.singularValues();
  const double smin = sv.size() ? sv(sv.size() - 1) : 0.0;
  out.condition = smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
  if (!(out.condition <= 1e12))
    throw NumericalError("controllability Gramian is numerically singular (condition " +
                         std::to_string(out.condition) + ")");
  out.weight = out.gramian.ldlt().solve(matrix_exp(A_eff, T) * x0);

  // Costate c(t) = e^{A_eff^T (T - t)} weight, tabulated backward from t = T.
  const int nodes = quad_steps;
  const Matrix back = matrix_exp(A_eff.transpose(), T / nodes);
  out.table_.assign(static_cast<std::size_t>(nodes) + 1, Vector());
  out.table_.back() = out.weight;
  for (int k = nodes; k > 0; --k)
    out.table_[static_cast<std::size_t>(k - 1)] = back * out.table_[static_cast<std::size_t>(k)];
  return out;
}

Vector GramianControl::control(double t) const {
  if (t < 0.0 || t > T) return Vector::Zero(B.cols());
  const int nodes = static_cast<int>(table_.size()) - 1;
  const double h = T / nodes;
  const int k = std::min(static_cast<int>(t / h), nodes - 1);
  const double s = (t - k * h) / h;
  const Vector& c0 = table_[static_cast<std::size_t>(k)];
  const Vector& c1 = table_[static_cast<std::size_t>(k) + 1];
  // Cubic Hermite with c' = -A_eff^T c.
  const Vector d0 = -h * (A_eff.transpose() * c0);
  const Vector d1 = -h * (A_eff.transpose() * c1);
  const double s2 = s * s, s3 = s2 * s;
  const Vector c = (2 * s3 - 3 * s2 + 1) * c0 + (s3 - 2 * s2 + s) * d0 +
                   (-2 * s3 + 3 * s2) * c1 + (s3 - s2) * d1;
  return -(B.transpose() * c);
}

PrimalPolicy GramianControl::pre_jump_policy() const {
  auto self = std::make_shared<const GramianControl>(*this);
  return [self](double t, const ModeTrajectory& e, const Vector&, Vector& u) {
    if (e.level() > 0) {
      u.setZero();
      return;
    }
    u = self->control(t);
  };
}

Matrix pre_jump_drift(const SwitchSystem& system) {
  const Index g = system.gamma0();
  Matrix drift = system.A(g);
  for (Index th = 0; th < system.num_modes(); ++th)
    if (system.edge(g, th)) drift -= system.lambda(g) * system.Q(g, th) * system.C(g, th);
  return drift;
}

// ---------------------------------------------------------------------------
// Riccati feedback

DualPolicy riccati_feedback_policy(const SwitchSystem& system,
                                   const RiccatiSolution& solution) {
  const Index p = system.num_modes();
  const Index n = system.N();
  const int M = solution.M();
  const int L = solution.grid_steps();
  const double eps = solution.params().epsilon;
  const Matrix I = Matrix::Identity(n, n);

  struct Table {
    double T;
    Index p;
    int L;
    std::vector<Matrix> gains;  // ((level * p + g) * p + th) * (L + 1) + j
    std::vector<char> active;   // (level * p + g) * p + th
  };
  auto table = std::make_shared<Table>();
  table->T = solution.T();
  table->p = p;
  table->L = L;
  table->gains.resize(static_cast<std::size_t>(M * p * p * (L + 1)));
  table->active.assign(static_cast<std::size_t>(M * p * p), 0);
  for (int level = 0; level < M; ++level)
    for (Index g = 0; g < p; ++g)
      for (Index th = 0; th < p; ++th) {
        if (!system.edge(g, th)) continue;
        const auto base = static_cast<std::size_t>((level * p + g) * p + th);
        table->active[base] = 1;
        for (int j = 0; j <= L; ++j) {
          const Matrix& Kn = solution.K(level + 1, th, j);
          const Matrix f = (system.C(g, th) + I) * solution.K(level, g, j) - Kn;
          table->gains[base * static_cast<std::size_t>(L + 1) + static_cast<std::size_t>(j)] =
              (eps * I + Kn).llt().solve(f);
        }
      }

  return [table, M](double t, const ModeTrajectory& e, const Vector& y, Matrix& v) {
    v.setZero();
    const int level = e.level();
    if (level >= M) return;
    const double at = std::round(t / table->T * table->L);
    const int j = static_cast<int>(std::clamp(at, 0.0, static_cast<double>(table->L)));
    const Index g = e.current_mode();
    for (Index th = 0; th < table->p; ++th) {
      const auto base = static_cast<std::size_t>((level * table->p + g) * table->p + th);
      if (!table->active[base]) continue;
      v.col(th).noalias() =
          table->gains[base * static_cast<std::size_t>(table->L + 1) + static_cast<std::size_t>(j)] * y;
    }
  };
}

// ---------------------------------------------------------------------------
// Burst policy

BurstPolicy burst_null_policy(const SwitchSystem& system, const Vector& y0, double eps_burst) {
  if (!(eps_burst > 0.0) || 2.0 * eps_burst > system.T())
    throw InputError("eps_burst", "must lie in (0, T/2]");
  if (y0.size() != system.N()) throw InputError("y0", "dimension mismatch");
  const Index g = system.gamma0();
  const Index n = system.N();
  const Matrix I = Matrix::Identity(n, n);

  BurstPolicy out;
  out.eps_burst = eps_burst;
  out.range_projector = projector(image(system.B(g)));
  const Matrix U = kernel(system.B(g).transpose()).basis();

  // With v(th) = -P y + w for every th, before the first jump:
  //   y' = F y - W w,  F = -A^T + W P,  W = sum_th lambda Q (I + C^T).
  Matrix W = Matrix::Zero(n, n);
  for (Index th = 0; th < system.num_modes(); ++th)
    if (system.edge(g, th))
      W += system.lambda(g) * system.Q(g, th) * (I + system.C(g, th).transpose());
  const Matrix F = -system.A(g).transpose() + W * out.range_projector;
  const Matrix psi2 = integrated_exp(F, eps_burst);
  const Matrix psi1 = matrix_exp(F, eps_burst) * psi2;
  const Vector target = matrix_exp(F, 2.0 * eps_burst) * y0;

  out.w_first = Vector::Zero(n);
  out.w_second = Vector::Zero(n);
  if (U.cols() > 0) {
    Matrix sys(n, 2 * U.cols());
    sys << psi1 * W * U, psi2 * W * U;
    const Vector c = sys.completeOrthogonalDecomposition().solve(target);
    out.w_first = U * c.head(U.cols());
    out.w_second = U * c.tail(U.cols());
  }
  const Vector reached = target - psi1 * W * out.w_first - psi2 * W * out.w_second;
  if (reached.norm() > 1e-10 * (1.0 + y0.norm()))
    throw NumericalError("burst policy cannot drive y0 to zero (residual " +
                         std::to_string(reached.norm()) + ")");

  auto data = std::make_shared<BurstPolicy>(out);
  out.policy = [data](double t, const ModeTrajectory& e, const Vector& y, Matrix& v) {
    if (e.level() > 0 || t >= 2.0 * data->eps_burst) {
      v.setZero();
      return;
    }
    const Vector& w = t < data->eps_burst ? data->w_first : data->w_second;
    v.col(0).noalias() = -data->range_projector * y;
    v.col(0) += w;
    for (Index th = 1; th < v.cols(); ++th) v.col(th) = v.col(0);
  };
  return out;
}

// ---------------------------------------------------------------------------

std::pair<PrimalPolicy, DualPolicy> random_linear_policies(const SwitchSystem& system,
                                                           std::uint64_t seed, double scale) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, scale);
  const Index p = system.num_modes();
  auto F = std::make_shared<std::vector<Matrix>>();
  auto G = std::make_shared<std::vector<Matrix>>();
  for (Index g = 0; g < p; ++g) {
    Matrix f(system.d(), system.N());
    for (Index k = 0; k < f.size(); ++k) f.data()[k] = normal(rng);
    F->push_back(f);
  }
  for (Index k = 0; k < p * p; ++k) {
    Matrix m(system.N(), system.N());
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
    G->push_back(m);
  }
  PrimalPolicy primal = [F](double, const ModeTrajectory& e, const Vector& x, Vector& u) {
    u.noalias() = (*F)[static_cast<std::size_t>(e.current_mode())] * x;
  };
  DualPolicy dual = [G, p](double, const ModeTrajectory& e, const Vector& y, Matrix& v) {
    const Index g = e.current_mode();
    for (Index th = 0; th < p; ++th)
      v.col(th).noalias() = (*G)[static_cast<std::size_t>(g * p + th)] * y;
  };
  return {primal, dual};
}

}  // namespace swctrl
