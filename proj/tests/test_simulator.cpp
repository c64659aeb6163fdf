#include "swctrl/errors.hpp"
#include "swctrl/fixtures.hpp"
#include "swctrl/matrix_exp.hpp"
#include "swctrl/metric.hpp"
#include "swctrl/simulator.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace swctrl;
using swctrl::testing::mat;
using swctrl::testing::vec;

namespace {

const PrimalPolicy kNoControl = [](double, const ModeTrajectory&, const Vector&, Vector& u) {
  u.setZero();
};
const DualPolicy kNoJumpControl = [](double, const ModeTrajectory&, const Vector&, Matrix& v) {
  v.setZero();
};

/// v(th) = (0, (-1)^g): keeps Y = (0, mode) on the on/off example.
const DualPolicy kStationary = [](double, const ModeTrajectory& e, const Vector&, Matrix& v) {
  v.setZero();
  v.row(1).setConstant(e.current_mode() == 0 ? 1.0 : -1.0);
};

ModePath no_jumps(Index gamma0) { return ModePath{gamma0, {}, {}}; }

/// Modes a -> b with C(a, b) = c I and rate lambda.
SwitchSystem scaled_jump_system(double lambda, double c) {
  SystemSpec spec;
  spec.N = 2;
  spec.d = 1;
  spec.modes = {"a", "b"};
  spec.lambda = {lambda, 0.0};
  spec.Q = mat({{0, 1}, {0, 0}});
  spec.A = {mat({{0.2, 1}, {-1, 0.1}}), Matrix::Zero(2, 2)};
  spec.B = {mat({{1}, {0}}), mat({{1}, {0}})};
  spec.C[{0, 1}] = c * Matrix::Identity(2, 2);
  spec.M = 1;
  spec.T = 1.0;
  spec.gamma0 = "a";
  return SwitchSystem(spec);
}

}  // namespace

// ---------------------------------------------------------------------------
// Mode process

TEST(SampleModePath, ZeroRateNeverJumps) {
  const auto s = swctrl::testing::single_mode(Matrix::Zero(2, 2), mat({{1}, {0}}), 3);
  for (std::uint64_t seed = 0; seed < 100; ++seed) EXPECT_EQ(sample_mode_path(s, seed).jumps(), 0);
}

TEST(SampleModePath, ForcedFirstTarget) {
  const auto s = fixture("exp-3-3");
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    const auto path = sample_mode_path(s, seed);
    if (path.jumps() > 0) EXPECT_EQ(path.modes[0], 1);
  }
}

TEST(SampleModePath, CapHorizonAndOrdering) {
  for (const auto& name : fixture_names()) {
    const auto s = fixture(name).with_uniform_rate(4.0);
    for (std::uint64_t seed = 0; seed < 2000; ++seed) {
      const auto path = sample_mode_path(s, sample_seed(1, seed));
      ASSERT_LE(path.jumps(), s.M());
      for (int k = 0; k < path.jumps(); ++k) {
        ASSERT_LE(path.jump_times[k], s.T());
        ASSERT_GT(path.jump_times[k], k ? path.jump_times[k - 1] : 0.0);
        ASSERT_TRUE(s.edge(k ? path.modes[k - 1] : s.gamma0(), path.modes[k]));
      }
    }
  }
}

TEST(SampleModePath, ExponentialClockKolmogorovSmirnov) {
  // Long horizon so that censoring at T is negligible on the tested range.
  const auto s = fixture("exp-3-3").with_horizon(40.0).with_jump_cap(1);
  const std::size_t n = 100000;
  std::vector<double> first(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto path = sample_mode_path(s, sample_seed(2024, i));
    first[i] = path.jumps() ? path.jump_times[0] : INFINITY;
  }
  std::sort(first.begin(), first.end());
  double ks = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double cdf = 1.0 - std::exp(-first[i]);
    ks = std::max({ks, cdf - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - cdf});
  }
  EXPECT_LT(ks, 1.628 / std::sqrt(static_cast<double>(n)));
}

TEST(SampleModePath, CompensatedMeasureHasMeanZero) {
  // phi(t, th) = (1 + th) cos(3t); compensator lambda Q 1{level < M} dt.
  const auto s = fixture("exp-3-4");
  const std::size_t n = 100000;
  std::vector<double> values(n);
  const auto antiderivative = [](double t) { return std::sin(3.0 * t) / 3.0; };
  for (std::size_t i = 0; i < n; ++i) {
    const auto path = sample_mode_path(s, sample_seed(99, i));
    double jumps = 0.0, compensator = 0.0, t = 0.0;
    Index mode = path.gamma0;
    for (int k = 0; k <= path.jumps(); ++k) {
      const double end = k < path.jumps() ? path.jump_times[k] : s.T();
      if (k < s.M())
        for (Index th = 0; th < s.num_modes(); ++th)
          compensator += s.lambda(mode) * s.Q(mode, th) * (1.0 + th) *
                         (antiderivative(end) - antiderivative(t));
      if (k < path.jumps()) {
        mode = path.modes[k];
        jumps += (1.0 + mode) * std::cos(3.0 * end);
      }
      t = end;
    }
    values[i] = jumps - compensator;
  }
  const auto est = summarize(values);
  EXPECT_LT(std::abs(est.mean), 3.0 * est.std_error);
}

TEST(SampleModePath, SeedsAreReproducible) {
  const auto s = fixture("exp-3-4");
  const auto a = sample_mode_path(s, 42);
  const auto b = sample_mode_path(s, 42);
  EXPECT_EQ(a.jump_times, b.jump_times);
  EXPECT_EQ(a.modes, b.modes);
  EXPECT_NE(sample_seed(1, 0), sample_seed(1, 1));
  EXPECT_NE(sample_seed(1, 0), sample_seed(2, 0));
}

// ---------------------------------------------------------------------------
// Primal and dual flows

TEST(SimulatePrimal, EquilibriumDirection) {
  const auto s = fixture("exp-3-3");
  const auto path = simulate_primal(s, vec({0, 1}), kNoControl, no_jumps(0));
  EXPECT_LT((path.terminal - vec({0, 1})).norm(), 1e-15);
}

TEST(SimulatePrimal, MultiplicativeWipeOut) {
  const auto s = fixture("exp-3-4");
  const ModePath path{0, {0.4}, {1}};
  const auto out = simulate_primal(s, vec({0.3, -2}), kNoControl, path);
  ASSERT_EQ(out.post_jump.size(), 1u);
  EXPECT_EQ(out.post_jump[0].norm(), 0.0);
  EXPECT_EQ(out.terminal.norm(), 0.0);
}

TEST(SimulatePrimal, CompensatedDriftBeforeFirstJump) {
  const double lambda = 1.7, c = 0.6;
  const auto s = scaled_jump_system(lambda, c);
  const Vector x0 = vec({1, -0.5});
  const ModePath path{0, {0.73}, {1}};
  const auto out = simulate_primal(s, x0, kNoControl, path);
  const Matrix drift = s.A(0) - lambda * c * Matrix::Identity(2, 2);
  for (std::size_t k = 0; k < out.times.size(); ++k) {
    if (out.times[k] >= 0.73) break;
    EXPECT_LT((out.states[k] - matrix_exp(drift, out.times[k]) * x0).norm(), 1e-8);
  }
  ASSERT_EQ(out.pre_jump.size(), 1u);
  EXPECT_LT((out.pre_jump[0] - matrix_exp(drift, 0.73) * x0).norm(), 1e-8);
}

TEST(SimulatePrimal, JumpTimesAreGridPoints) {
  const auto s = fixture("exp-3-4");
  const ModePath path{0, {0.123456789}, {1}};
  const auto out = simulate_primal(s, vec({1, 1}), kNoControl, path, 100);
  EXPECT_EQ(std::count(out.times.begin(), out.times.end(), 0.123456789), 2);
  EXPECT_EQ(out.times.front(), 0.0);
  EXPECT_EQ(out.times.back(), s.T());
}

TEST(SimulateDual, FreeFlowMatchesExponential) {
  const Matrix A = mat({{0.2, 1}, {-1, 0.1}});
  const auto s = swctrl::testing::single_mode(A, mat({{1}, {0}}));
  const Vector y0 = vec({0.4, 1.1});
  const auto out = simulate_dual(s, y0, kNoJumpControl, no_jumps(0));
  for (std::size_t k = 0; k < out.times.size(); k += 97)
    EXPECT_LT((out.states[k] - matrix_exp(-A.transpose(), out.times[k]) * y0).norm(), 1e-8);
}

TEST(SimulateDual, StationarySolution) {
  const auto s = fixture("exp-3-4");
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto out = simulate_dual(s, Vector::Zero(2), kStationary, sample_seed(5, seed));
    for (std::size_t k = 0; k < out.times.size(); ++k) {
      const Vector expected = vec({0, static_cast<double>(out.mode_index[k])});
      ASSERT_LT((out.states[k] - expected).norm(), 1e-8);
    }
  }
}

TEST(SimulateDual, ZeroStaysZero) {
  const auto s = fixture("exp-3-4");
  const auto out = simulate_dual(s, Vector::Zero(2), kNoJumpControl, std::uint64_t{3});
  for (const auto& y : out.states) EXPECT_EQ(y.norm(), 0.0);
}

TEST(Simulate, JumpRuleIsExact) {
  const auto s = fixture("exp-3-4").with_uniform_rate(3.0);
  const auto [primal, dual] = random_linear_policies(s, 17, 0.8);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto path = sample_mode_path(s, sample_seed(8, seed));
    const auto px = simulate_primal(s, vec({1, 2}), primal, path);
    const auto py = simulate_dual(s, vec({-1, 0.5}), dual, path);
    ModeTrajectory e(path.gamma0, s.M());
    Matrix v(2, 2);
    for (int k = 0; k < path.jumps(); ++k) {
      const Index from = e.current_mode();
      const Index to = path.modes[k];
      const Vector expected_x = (Matrix::Identity(2, 2) + s.C(from, to)) * px.pre_jump[k];
      EXPECT_TRUE(px.post_jump[k] == expected_x);
      dual(path.jump_times[k], e, py.pre_jump[k], v);
      const Vector expected_y = py.pre_jump[k] + v.col(to);
      EXPECT_TRUE(py.post_jump[k] == expected_y);
      e.push(path.jump_times[k], to);
    }
  }
}

TEST(Simulate, IdenticalSeedsIdenticalPaths) {
  const auto s = fixture("exp-3-4");
  const auto [primal, dual] = random_linear_policies(s, 1);
  const auto a = simulate_primal(s, vec({1, 1}), primal, std::uint64_t{77});
  const auto b = simulate_primal(s, vec({1, 1}), primal, std::uint64_t{77});
  ASSERT_EQ(a.states.size(), b.states.size());
  for (std::size_t k = 0; k < a.states.size(); ++k) ASSERT_TRUE(a.states[k] == b.states[k]);
  EXPECT_EQ(a.seed, 77u);
}

TEST(Simulate, BlowUpIsNumericalError) {
  const auto s = swctrl::testing::single_mode(mat({{1e12, 0}, {0, 0}}), mat({{1}, {0}}));
  EXPECT_THROW(simulate_primal(s, vec({1, 0}), kNoControl, no_jumps(0), 10), NumericalError);
}

// ---------------------------------------------------------------------------
// Matrix exponential

TEST(MatrixExp, Examples) {
  EXPECT_EQ(matrix_exp(Matrix::Zero(3, 3), 2.0), Matrix::Identity(3, 3));
  for (double t : {0.1, 1.0, 3.0}) {
    const Matrix expected = std::exp(t) * mat({{1, 0}, {t, 1}});
    EXPECT_LT((matrix_exp(mat({{1, 0}, {1, 1}}), t) - expected).norm(), 1e-12 * expected.norm());
  }
  const Matrix d = mat({{-2, 0, 0}, {0, 0.5, 0}, {0, 0, 4}});
  const Matrix e = matrix_exp(d, 1.0);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(e(i, i) / std::exp(d(i, i)), 1.0, 1e-12);
  EXPECT_EQ(e(0, 1), 0.0);
}

TEST(MatrixExp, IntegratedExponential) {
  const Matrix m = mat({{1, 0}, {1, 1}});
  const double s = 0.7;
  // int_0^s e^t [[1,0],[t,1]] dt.
  const double a = std::exp(s) - 1.0;
  const double b = (s - 1.0) * std::exp(s) + 1.0;
  EXPECT_LT((integrated_exp(m, s) - mat({{a, 0}, {b, a}})).norm(), 1e-13);
}

// ---------------------------------------------------------------------------
// Control synthesis

TEST(GramianControl, OnOffPreJumpGramian) {
  const auto s = fixture("exp-3-4");
  const Matrix drift = pre_jump_drift(s);
  EXPECT_LT((drift - mat({{1, 0}, {1, 1}})).norm(), 1e-15);
  const auto g = gramian_control(drift, s.B(0), 1.0, vec({1, 1}));
  EXPECT_LT((g.gramian - mat({{3.19453, 2.09726}, {2.09726, 1.59726}})).cwiseAbs().maxCoeff(), 1e-5);
  EXPECT_GT(g.condition, 1.0);
}

TEST(GramianControl, StaticSquareB) {
  const Matrix B = mat({{1, 2}, {0, 1}});
  const auto g = gramian_control(Matrix::Zero(2, 2), B, 2.5, vec({1, 0}));
  EXPECT_LT((g.gramian - 2.5 * B * B.transpose()).norm(), 1e-12);
}

TEST(GramianControl, SteersToZero) {
  const auto s = fixture("exp-3-4");
  const Vector x0 = vec({1, 1});
  const auto g = gramian_control(pre_jump_drift(s), s.B(0), s.T(), x0);
  const auto out = simulate_primal(s, x0, g.pre_jump_policy(), no_jumps(0));
  EXPECT_LT(out.terminal.norm(), 1e-8 * x0.norm());
}

TEST(GramianControl, SingularThrows) {
  EXPECT_THROW(gramian_control(Matrix::Zero(2, 2), mat({{1}, {0}}), 1.0, vec({1, 1})),
               NumericalError);
}

TEST(RiccatiFeedback, ZeroSolutionGivesZeroControl) {
  auto spec = fixture("exp-3-4").spec();
  spec.B.assign(2, Matrix::Zero(2, 1));
  const SwitchSystem s(spec);
  const auto policy = riccati_feedback_policy(s, solve(s, RiccatiParams::control_cost(s, 0.1, 100)));
  Matrix v = Matrix::Ones(2, 2);
  policy(0.3, ModeTrajectory(0, 2), vec({1, 2}), v);
  EXPECT_EQ(v.norm(), 0.0);
}

TEST(RiccatiFeedback, OnOffGain) {
  const auto s = fixture("exp-3-4");
  const double eps = 1e-2;
  const auto sol = solve(s, RiccatiParams::control_cost(s, eps, 200));
  const auto policy = riccati_feedback_policy(s, sol);
  const Vector y = vec({0.7, -0.3});
  Matrix v(2, 2);
  const int j = 60;
  policy(sol.time(j), ModeTrajectory(0, 2), y, v);
  const Matrix& K1 = sol.K(1, 1, j);
  const Vector expected = -(eps * Matrix::Identity(2, 2) + K1).llt().solve(K1 * y);
  EXPECT_LT((v.col(1) - expected).norm(), 1e-12);
  EXPECT_EQ(v.col(0).norm(), 0.0);
  policy(sol.time(j), ModeTrajectory(0, 2), Vector::Zero(2), v);
  EXPECT_EQ(v.norm(), 0.0);
}

// ---------------------------------------------------------------------------
// Estimators

TEST(McCostDual, StationaryPolicyHasNoCost) {
  const auto s = fixture("exp-3-4");
  const auto est = mc_cost_dual(s, Vector::Zero(2), kStationary, 200, 1, 500);
  EXPECT_LE(est.mean, 1e-10);
}

TEST(McCostDual, DeterministicOracle) {
  const Matrix A = mat({{0.2, 1}, {-1, 0.1}});
  const Matrix B = mat({{1}, {0.5}});
  const auto s = swctrl::testing::single_mode(A, B);
  const Vector y0 = vec({0.4, 1.1});
  const auto est = mc_cost_dual(s, y0, kNoJumpControl, 100, 1);
  // |Pi_{Im B} y|^2 = |B^T y|^2 / |B|^2 for a single column.
  const int panels = 4000;
  double oracle = 0.0;
  for (int k = 0; k <= panels; ++k) {
    const double w = (k == 0 || k == panels) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    const Vector y = matrix_exp(-A.transpose(), static_cast<double>(k) / panels) * y0;
    oracle += w * std::pow(B.col(0).dot(y), 2) / B.squaredNorm();
  }
  oracle /= 3.0 * panels;
  EXPECT_NEAR(est.mean, oracle, 1e-6);
}

TEST(McCostDual, BurstPolicyVanishes) {
  const auto s = fixture("exp-3-3");
  const Vector y0 = vec({0, 1});
  const auto burst = burst_null_policy(s, y0, 0.05);
  EXPECT_LT(mc_cost_dual(s, y0, burst.policy, 2000, 3).mean, 0.05);
  // Y(2e) = 0 on paths without an early jump.
  const auto out = simulate_dual(s, y0, burst.policy, no_jumps(0));
  EXPECT_LT(out.terminal.norm(), 1e-9);
}

TEST(McCostDual, RequiresSamples) {
  const auto s = fixture("exp-3-4");
  EXPECT_THROW(mc_cost_dual(s, Vector::Zero(2), kNoJumpControl, 99, 1), InputError);
}

TEST(DualityCheck, DeterministicCases) {
  const auto s = swctrl::testing::single_mode(mat({{0.2, 1}, {-1, 0.1}}), mat({{1}, {0}}));
  const auto est = duality_check(s, vec({1, 2}), vec({-0.5, 0.3}), kNoControl, kNoJumpControl, 100, 2);
  EXPECT_LE(std::abs(est.mean), 1e-8);
  const auto s34 = fixture("exp-3-4");
  const auto [primal, dual] = random_linear_policies(s34, 3);
  const auto zero = duality_check(s34, vec({1, 2}), Vector::Zero(2), primal, kNoJumpControl, 100, 2);
  EXPECT_EQ(zero.mean, 0.0);
  EXPECT_EQ(zero.std_error, 0.0);
}

TEST(DualityCheck, RandomPoliciesStatistical) {
  const auto s = fixture("exp-3-4");
  const auto [primal, dual] = random_linear_policies(s, 21);
  const auto est = duality_check(s, vec({1, -1}), vec({0.5, 2}), primal, dual, 5000, 4, 200);
  EXPECT_LE(std::abs(est.mean), 3.0 * est.std_error);
  EXPECT_GT(est.std_error, 0.0);
}

TEST(RiccatiFeedback, CostBelowRiccatiForm) {
  for (const auto& name : {"exp-3-4", "exp-3-3"}) {
    const auto s = fixture(name);
    const auto sol = solve(s, RiccatiParams::control_cost(s, 1e-2, 500));
    const Vector y0 = vec({1, 0.5});
    const auto est = mc_cost_dual(s, y0, riccati_feedback_policy(s, sol), 2000, 6, 500);
    EXPECT_LE(est.mean, y0.dot(K0(sol, s.gamma0()) * y0) + 3.0 * est.std_error) << name;
  }
}

TEST(Estimators, SerialMatchesParallelBitwise) {
  const auto s = fixture("exp-3-4");
  const auto [primal, dual] = random_linear_policies(s, 5);
  const Vector x0 = vec({1, 2}), y0 = vec({-1, 1});
  const auto a = duality_check(s, x0, y0, primal, dual, 400, 12, 100);
  const auto b = serial::duality_check(s, x0, y0, primal, dual, 400, 12, 100);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.std_error, b.std_error);
  const auto c = mc_cost_dual(s, y0, dual, 300, 4, 100);
  const auto d = serial::mc_cost_dual(s, y0, dual, 300, 4, 100);
  EXPECT_EQ(c.mean, d.mean);
  const auto xs = primal_terminal_states(s, x0, primal, 150, 2, 100);
  const auto ys = serial::primal_terminal_states(s, x0, primal, 150, 2, 100);
  for (std::size_t i = 0; i < xs.size(); ++i) ASSERT_TRUE(xs[i] == ys[i]);
}

TEST(Estimators, PairwiseSummary) {
  std::vector<double> values(1000);
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = static_cast<double>(i % 10);
  const auto est = summarize(values);
  EXPECT_DOUBLE_EQ(est.mean, 4.5);
  EXPECT_NEAR(est.std_error, std::sqrt(8.25 * 1000.0 / 999.0 / 1000.0), 1e-12);
  EXPECT_EQ(pairwise_sum(values), 4500.0);
}

TEST(PathsCsv, Header) {
  const auto s = fixture("exp-3-4");
  std::vector<SamplePath> paths = {simulate_primal(s, vec({1, 1}), kNoControl, no_jumps(0), 100)};
  std::ostringstream out;
  write_paths_csv(out, s, paths);
  const std::string text = out.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "sample,t,mode,x_1,x_2");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1 + 101);
}
