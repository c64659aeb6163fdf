#include "swctrl/riccati.hpp"

#include "swctrl/errors.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

namespace swctrl {
namespace {

void symmetrize(Matrix& m) { m = 0.5 * (m + m.transpose()).eval(); }

Matrix identity(Index n) { return Matrix::Identity(n, n); }

Eigen::LLT<Matrix> regularized_factor(const Matrix& K_next, double epsilon, int level,
                                      Index gamma, Index theta) {
  const Index n = K_next.rows();
  Eigen::LLT<Matrix> llt(epsilon * identity(n) + K_next);
  if (llt.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "eps I + K(" << level + 1 << ", mode " << theta
        << ") is not positive definite in the equation of (level " << level << ", mode "
        << gamma << "); the next level lost semi-definiteness";
    throw NumericalError(msg.str());
  }
  return llt;
}

}  // namespace

const char* to_string(LevelMMode mode) {
  return mode == LevelMMode::gramian ? "gramian" : "zero";
}

LevelMMode parse_level_M_mode(std::string_view text) {
  if (text == "gramian") return LevelMMode::gramian;
  if (text == "zero") return LevelMMode::zero;
  throw InputError("level-M-mode", "expected 'gramian' or 'zero', got '" +
                                       std::string(text) + "'");
}

RiccatiParams RiccatiParams::control_cost(const SwitchSystem& system, double epsilon,
                                          int grid_steps, LevelMMode mode) {
  RiccatiParams params;
  params.epsilon = epsilon;
  params.grid_steps = grid_steps;
  params.level_M_mode = mode;
  for (Index g = 0; g < system.num_modes(); ++g)
    params.cost.push_back(system.B(g) * system.B(g).transpose());
  return params;
}

void validate(const SwitchSystem& system, const RiccatiParams& params) {
  if (!(params.epsilon > 0.0) || !std::isfinite(params.epsilon))
    throw InputError("epsilon", "must be a finite positive number");
  if (params.grid_steps < 100) throw InputError("grid-steps", "must be at least 100");
  if (static_cast<Index>(params.cost.size()) != system.num_modes())
    throw InputError("cost", "expected one cost matrix per mode");
  for (Index g = 0; g < system.num_modes(); ++g) {
    const Matrix& c = params.cost[static_cast<std::size_t>(g)];
    const std::string field = "cost." + system.mode_name(g);
    if (c.rows() != system.N() || c.cols() != system.N())
      throw InputError(field, "expected an N x N matrix");
    if ((c - c.transpose()).cwiseAbs().maxCoeff() > 1e-10)
      throw InputError(field, "cost matrix is not symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> eig(c, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-10)
      throw InputError(field, "cost matrix is not positive semi-definite");
  }
}

// ---------------------------------------------------------------------------

RiccatiSolution::RiccatiSolution(RiccatiParams params, int M, Index num_modes, double T,
                                 std::vector<Matrix> values)
    : params_(std::move(params)), M_(M), modes_(num_modes), T_(T),
      values_(std::move(values)) {}

int RiccatiSolution::nearest_index(double t) const {
  const int L = params_.grid_steps;
  const long j = std::lround(t / T_ * L);
  return static_cast<int>(std::clamp<long>(j, 0, L));
}

const Matrix& RiccatiSolution::K(int level, Index gamma, int j) const {
  const auto stride = static_cast<std::size_t>(params_.grid_steps + 1);
  return values_.at(static_cast<std::size_t>(level * modes_ + gamma) * stride +
                    static_cast<std::size_t>(j));
}

Matrix RiccatiSolution::H(int level, Index gamma, Index theta, int j) const {
  if (level >= M_) throw std::out_of_range("RiccatiSolution::H: level must be < M");
  return K(level + 1, theta, j) - K(level, gamma, j);
}

// ---------------------------------------------------------------------------

Matrix level_rhs(const SwitchSystem& system, const RiccatiParams& params, int level,
                 Index gamma, const Matrix& K_here, std::span<const Matrix> K_next) {
  const Index n = system.N();
  const Matrix& A = system.A(gamma);
  const Matrix& cost = params.cost[static_cast<std::size_t>(gamma)];

  if (level >= system.M()) {
    if (params.level_M_mode == LevelMMode::zero) return Matrix::Zero(n, n);
    Matrix out = K_here * A.transpose() + A * K_here - cost;
    symmetrize(out);
    return out;
  }

  Matrix out = K_here * A.transpose() + A * K_here - cost;
  const double rate = system.lambda(gamma);
  if (rate != 0.0) {
    for (Index th = 0; th < system.num_modes(); ++th) {
      if (!system.edge(gamma, th)) continue;
      const Matrix& Kn = K_next[static_cast<std::size_t>(th)];
      const auto llt = regularized_factor(Kn, params.epsilon, level, gamma, th);
      const Matrix f = (system.C(gamma, th) + identity(n)) * K_here - Kn;
      out += rate * system.Q(gamma, th) * (f.transpose() * llt.solve(f) - (Kn - K_here));
    }
  }
  symmetrize(out);
  return out;
}

CanonicalCoeffs canonical_coeffs(const SwitchSystem& system, const RiccatiParams& params,
                                 int level, Index gamma, const Matrix& K_here,
                                 std::span<const Matrix> K_next) {
  if (level >= system.M())
    throw std::invalid_argument("canonical_coeffs: defined for levels below M only");
  const Index n = system.N();
  const Index p = system.num_modes();
  const double eps = params.epsilon;
  const double rate = system.lambda(gamma);
  const Matrix& cost = params.cost[static_cast<std::size_t>(gamma)];

  CanonicalCoeffs out;
  out.nu = Vector::Zero(p);
  Matrix drift_shift = 0.5 * identity(n);
  Matrix jump_cost = Matrix::Zero(n, n);
  out.quadratic_weight = Matrix::Zero(n, n);
  for (Index th = 0; th < p; ++th) {
    const Matrix& Kn = K_next[static_cast<std::size_t>(th)];
    const Matrix b = system.C(gamma, th).transpose() + identity(n);
    const Matrix r = eps * identity(n) + Kn;
    out.b.push_back(b);
    out.r.push_back(r);
    const double q = system.Q(gamma, th);
    out.nu(th) = rate * q;
    if (!system.edge(gamma, th)) continue;
    const auto llt = regularized_factor(Kn, eps, level, gamma, th);
    const Matrix r_inv = llt.solve(identity(n));
    drift_shift += q * (system.C(gamma, th).transpose() - eps * b * r_inv);
    jump_cost += q * r_inv * Kn;
    out.quadratic_weight += out.nu(th) * b * r_inv * b.transpose();
  }
  out.a = system.A(gamma).transpose() - rate * drift_shift;
  out.Pi = cost + eps * jump_cost;

  const auto assemble = [&](const Matrix& p_mat, const Matrix& pi) {
    Matrix rhs = p_mat * out.a + out.a.transpose() * p_mat - pi +
                 p_mat * out.quadratic_weight * p_mat;
    symmetrize(rhs);
    return rhs;
  };
  const Matrix reference = level_rhs(system, params, level, gamma, K_here, K_next);
  out.quadratic_rhs = assemble(eps * identity(n) + K_here, out.Pi);
  out.residual_shifted = (out.quadratic_rhs - reference).norm();
  const Matrix pi_scaled = cost + eps * rate * jump_cost;
  out.residual_identity = (assemble(K_here, pi_scaled) - reference).norm();
  return out;
}

// ---------------------------------------------------------------------------

namespace {

/// All (level, mode) blocks stacked level-major.
using Blocks = std::vector<Matrix>;

class CoupledSystem {
 public:
  CoupledSystem(const SwitchSystem& system, const RiccatiParams& params,
                const SolveHooks& hooks)
      : system_(system), params_(params), hooks_(hooks),
        p_(system.num_modes()), zeros_(static_cast<std::size_t>(p_),
                                       Matrix::Zero(system.N(), system.N())) {}

  std::size_t size() const { return static_cast<std::size_t>((system_.M() + 1) * p_); }

  void rhs(const Blocks& K, Blocks& dK) const {
    const int M = system_.M();
    std::vector<Matrix> next(static_cast<std::size_t>(p_));
    for (int level = M; level >= 0; --level) {
      if (level < M)
        for (Index th = 0; th < p_; ++th) next[static_cast<std::size_t>(th)] = K[slot(level + 1, th)];
      for (Index g = 0; g < p_; ++g) {
        const bool forced = hooks_.zero_next_level.contains({level, g});
        dK[slot(level, g)] = level_rhs(system_, params_, level, g, K[slot(level, g)],
                                       forced ? std::span<const Matrix>(zeros_)
                                              : std::span<const Matrix>(next));
      }
    }
  }

  std::size_t slot(int level, Index g) const {
    return static_cast<std::size_t>(level * p_ + g);
  }

 private:
  const SwitchSystem& system_;
  const RiccatiParams& params_;
  const SolveHooks& hooks_;
  Index p_;
  std::vector<Matrix> zeros_;
};

void check_step(const Blocks& K, const SwitchSystem& system, double t) {
  const Index p = system.num_modes();
  for (std::size_t s = 0; s < K.size(); ++s) {
    const int level = static_cast<int>(static_cast<Index>(s) / p);
    const Index g = static_cast<Index>(s) % p;
    if (!K[s].allFinite()) {
      std::ostringstream msg;
      msg << "Riccati solution blew up at t = " << t << " (level " << level << ", mode '"
          << system.mode_name(g) << "')";
      throw NumericalError(msg.str());
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(K[s], Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues()(0);
    if (lo < -1e-6) {
      std::ostringstream msg;
      msg << "Riccati solution left the PSD cone at t = " << t << " (level " << level
          << ", mode '" << system.mode_name(g) << "', min eigenvalue " << lo << ")";
      throw NumericalError(msg.str());
    }
  }
}

}  // namespace

RiccatiSolution solve(const SwitchSystem& system, const RiccatiParams& params,
                      const SolveHooks& hooks) {
  validate(system, params);
  const int L = params.grid_steps;
  const double h = system.T() / L;
  const Index n = system.N();
  const CoupledSystem coupled(system, params, hooks);
  const std::size_t blocks = coupled.size();
  const auto stride = static_cast<std::size_t>(L + 1);

  std::vector<Matrix> values(blocks * stride);
  Blocks K(blocks, Matrix::Zero(n, n));
  Blocks k1(blocks), k2(blocks), k3(blocks), k4(blocks), stage(blocks);
  auto record = [&](int j) {
    for (std::size_t s = 0; s < blocks; ++s) values[s * stride + static_cast<std::size_t>(j)] = K[s];
  };
  auto advance = [&](const Blocks& from, const Blocks& slope, double dt) {
    for (std::size_t s = 0; s < blocks; ++s) {
      stage[s] = from[s] - dt * slope[s];
      symmetrize(stage[s]);
    }
  };

  record(L);
  for (int j = L; j > 0; --j) {
    coupled.rhs(K, k1);
    advance(K, k1, 0.5 * h);
    coupled.rhs(stage, k2);
    advance(K, k2, 0.5 * h);
    coupled.rhs(stage, k3);
    advance(K, k3, h);
    coupled.rhs(stage, k4);
    for (std::size_t s = 0; s < blocks; ++s) {
      K[s] -= (h / 6.0) * (k1[s] + 2.0 * k2[s] + 2.0 * k3[s] + k4[s]);
      symmetrize(K[s]);
    }
    check_step(K, system, h * (j - 1));
    record(j - 1);
  }
  return RiccatiSolution(params, system.M(), system.num_modes(), system.T(),
                         std::move(values));
}

Matrix K0(const RiccatiSolution& solution, Index gamma0) {
  if (gamma0 < 0 || gamma0 >= solution.num_modes())
    throw InputError("gamma0", "unknown mode index " + std::to_string(gamma0));
  return solution.K(0, gamma0, 0);
}

void write_csv(std::ostream& out, const SwitchSystem& system,
               const RiccatiSolution& solution) {
  out << "t,level,mode,i,j,K_ij\n";
  const auto old_precision = out.precision(17);
  const Index n = system.N();
  for (int step = 0; step <= solution.grid_steps(); ++step) {
    const double t = solution.time(step);
    for (int level = 0; level <= solution.M(); ++level)
      for (Index g = 0; g < solution.num_modes(); ++g) {
        const Matrix& k = solution.K(level, g, step);
        for (Index i = 0; i < n; ++i)
          for (Index j = 0; j < n; ++j)
            out << t << ',' << level << ',' << system.mode_name(g) << ',' << i << ','
                << j << ',' << k(i, j) << '\n';
      }
  }
  out.precision(old_precision);
}

}  // namespace swctrl
