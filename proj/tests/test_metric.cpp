#include "swctrl/errors.hpp"
#include "swctrl/fixtures.hpp"
#include "swctrl/invariance.hpp"
#include "swctrl/metric.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

using namespace swctrl;
using swctrl::testing::mat;
using swctrl::testing::vec;

namespace {

double min_eig(const Matrix& m) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(m, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

/// Diagnostics are shared across tests; each fixture/mode pair is solved once.
const K0Diagnostics& diagnostics(const std::string& name, const std::string& gamma0) {
  static std::map<std::string, K0Diagnostics> cache;
  const std::string key = name + "/" + gamma0;
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(key, k0_estimate(fixture(name).with_gamma0(gamma0),
                                        EpsilonSchedule::standard()))
             .first;
  return it->second;
}

K0Diagnostics synthetic(std::vector<double> eps, std::vector<Matrix> k) {
  K0Diagnostics d;
  d.epsilons = std::move(eps);
  d.K0 = std::move(k);
  for (std::size_t i = 0; i + 1 < d.K0.size(); ++i)
    d.deltas.push_back((d.K0[i] - d.K0[i + 1]).operatorNorm());
  d.k0 = d.K0.back();
  return d;
}

}  // namespace

TEST(EpsilonSchedule, Validation) {
  EXPECT_EQ(EpsilonSchedule::standard().values().size(), 6u);
  EXPECT_THROW(EpsilonSchedule({1e-1, 1e-6}), InputError);
  EXPECT_THROW(EpsilonSchedule({1e-1, 1e-2, 1e-3}), InputError);
  EXPECT_THROW(EpsilonSchedule({1e-1, 1e-1, 1e-6}), InputError);
  EXPECT_THROW(EpsilonSchedule({1e-1, -1e-2, 1e-6}), InputError);
  EXPECT_NO_THROW(EpsilonSchedule({1e-2, 1e-4, 1e-5}));
}

TEST(K0Estimate, OnOffIsExact) {
  const auto& d = diagnostics("exp-3-4", "0");
  EXPECT_GE(d.eigen.back()(0), 0.0422 - 0.005);
  EXPECT_EQ(d.verdict, ExactVerdict::exact);
  EXPECT_EQ(d.K0.size(), 6u);
  EXPECT_EQ(d.deltas.size(), 5u);
}

TEST(K0Estimate, ThreeModeIsNotExact) {
  const auto& d = diagnostics("exp-3-3", "e1");
  const Vector e2 = vec({0, 1});
  EXPECT_LE(e2.dot(d.k0 * e2), 1e-2);
  EXPECT_LE(metric(d, e2), 0.1);
  EXPECT_EQ(d.verdict, ExactVerdict::not_exact);
}

TEST(K0Estimate, TrivialGramian) {
  const auto s = swctrl::testing::single_mode(Matrix::Zero(2, 2), Matrix::Identity(2, 2));
  const auto d = k0_estimate(s, EpsilonSchedule::standard(), 400);
  EXPECT_LT((d.k0 - Matrix::Identity(2, 2)).norm(), 1e-10);
  EXPECT_EQ(d.verdict, ExactVerdict::exact);
}

TEST(Metric, Examples) {
  const auto s = swctrl::testing::single_mode(Matrix::Zero(2, 2), Matrix::Identity(2, 2), 1, 2.0);
  const auto d = k0_estimate(s, EpsilonSchedule::standard(), 400);
  EXPECT_EQ(metric(d, Vector::Zero(2)), 0.0);
  const Vector y = vec({3, -4});
  EXPECT_NEAR(metric(d, y), std::sqrt(2.0) * 5.0, 1e-9);
  EXPECT_THROW(metric(d, Vector::Zero(3)), InputError);
}

TEST(Verdict, ZeroCostIsNotExact) {
  auto spec = fixture("exp-3-4").spec();
  spec.B.assign(2, Matrix::Zero(2, 1));
  const auto d = k0_estimate(SwitchSystem(spec), EpsilonSchedule::standard(), 200);
  EXPECT_EQ(d.k0.norm(), 0.0);
  EXPECT_EQ(d.verdict, ExactVerdict::not_exact);
}

TEST(Verdict, SyntheticCases) {
  const std::vector<double> eps = {1e-3, 1e-4, 1e-5, 1e-6};
  const Matrix I = Matrix::Identity(2, 2);
  // Settled and positive.
  auto d = synthetic(eps, {1.2 * I, 1.01 * I, 1.001 * I, I});
  EXPECT_EQ(verdict(d, 1e-4, 1e-2), ExactVerdict::exact);
  // Smallest eigenvalue shrinking tenfold per decade.
  d = synthetic(eps, {mat({{1, 0}, {0, 1e-1}}), mat({{1, 0}, {0, 1e-2}}),
                      mat({{1, 0}, {0, 1e-3}}), mat({{1, 0}, {0, 1e-4}})});
  EXPECT_EQ(verdict(d, 1e-3, 1e-2), ExactVerdict::not_exact);
  // Slow decay, not yet settled.
  d = synthetic(eps, {mat({{1, 0}, {0, 0.5}}), mat({{1, 0}, {0, 0.45}}),
                      mat({{1, 0}, {0, 0.40}}), mat({{1, 0}, {0, 0.36}})});
  EXPECT_EQ(verdict(d, 0.5, 1e-2), ExactVerdict::inconclusive);
  // Increasing as eps decreases.
  d = synthetic(eps, {I, I, 1.5 * I, 1.5 * I});
  EXPECT_EQ(verdict(d, 1e-4, 1e-2), ExactVerdict::inconclusive);
  EXPECT_STREQ(to_string(ExactVerdict::not_exact), "not_exact");
}

TEST(K0Estimate, EpsilonMonotonicity) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal;
  const std::vector<std::pair<std::string, std::string>> cases = {
      {"exp-3-4", "0"}, {"exp-3-4", "1"}, {"exp-3-3", "e1"}, {"exp-3-3", "e2"},
      {"exp-3-4-final", "e1"}};
  for (const auto& [name, g0] : cases) {
    const auto& d = diagnostics(name, g0);
    for (int trial = 0; trial < 20; ++trial) {
      const Vector y = vec({normal(rng), normal(rng)});
      for (std::size_t i = 0; i + 1 < d.K0.size(); ++i)
        EXPECT_GE(y.dot(d.K0[i] * y), y.dot(d.K0[i + 1] * y) - 1e-7) << name << " " << g0;
    }
    EXPECT_LT((d.k0 - d.k0.transpose()).norm(), 1e-12);
    EXPECT_GE(min_eig(d.k0), -1e-8);
  }
}

TEST(Metric, SeminormProperties) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> normal;
  for (const auto& [name, g0] : {std::pair{"exp-3-4", "0"}, std::pair{"exp-3-3", "e1"}}) {
    const auto& d = diagnostics(name, g0);
    for (int trial = 0; trial < 100; ++trial) {
      const Vector y = vec({normal(rng), normal(rng)});
      const Vector z = vec({normal(rng), normal(rng)});
      const double a = normal(rng);
      EXPECT_NEAR(metric(d, a * y), std::abs(a) * metric(d, y), 1e-10);
      EXPECT_LE(metric(d, y + z), metric(d, y) + metric(d, z) + 1e-10);
    }
  }
}

TEST(Metric, ApproximateFailureGivesDegenerateDirection) {
  const std::vector<std::pair<std::string, std::string>> cases = {
      {"exp-3-4", "1"}, {"exp-3-3", "e2"}, {"exp-3-3", "e3"}};
  for (const auto& [name, g0] : cases) {
    ASSERT_FALSE(approx_null_verdict(fixture(name).with_gamma0(g0)));
    const auto& d = diagnostics(name, g0);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(d.k0);
    const Vector y = eig.eigenvectors().col(0);
    EXPECT_LE(metric(d, y), 1e-2) << name << " " << g0;
  }
}

TEST(K0Diagnostics, JsonFragment) {
  const auto& d = diagnostics("exp-3-4", "0");
  const auto j = to_json(d);
  for (const char* key : {"epsilons", "eigenvalues", "k0", "verdict", "K0", "deltas", "thresholds"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j["verdict"], "exact");
  EXPECT_EQ(j["eigenvalues"].size(), 6u);
}
