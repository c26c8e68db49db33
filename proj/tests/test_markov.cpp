#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace prn;
using namespace prn::testing;

namespace {

const Dense kTwoBit{{.67, 0, .33, 0}, {.21, .46, .11, .22}, {0, 0, 1, 0}, {0, 0, .32, .68}};
const Dense kTwoBitPerturbed{{.75, 0, .25, 0}, {.28, .47, 0, .25}, {0, 0, 1, 0}, {0, 0, .28, .72}};
const Dense kTphi{{0, .544, .456, 0}, {0, .337, 0, .663}, {.113, .448, .439, 0}, {0, .011, 0, .989}};
const Dense kTx3{{0, 0, .5, .5, 0}, {1, 0, 0, 0, 0}, {0, 1, 0, 0, 0}, {.5, 0, 0, 0, .5}, {0, 0, 0, 0, 1}};

StochasticMatrix from_dense(const Dense& d) {
  const auto n = static_cast<Eigen::Index>(d.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = d[i][j];
  std::vector<std::string> order;
  for (Eigen::Index i = 0; i < n; ++i) order.push_back("s" + std::to_string(i));
  return StochasticMatrix(order, m);
}

StochasticMatrix tphi_from_x2() {
  return restrict_to(transition_matrix(load("near-x2.prn")), {4, 5, 6, 7});
}

}  // namespace

TEST(TransitionMatrix, TwoBitGolden) {
  EXPECT_LT(max_diff(dense(transition_matrix(load("two-bit.prn"))), kTwoBit), 1e-12);
}

TEST(TransitionMatrix, TwoBitPerturbedGolden) {
  EXPECT_LT(max_diff(dense(transition_matrix(load("two-bit-perturbed.prn"))), kTwoBitPerturbed), 1e-12);
}

TEST(TransitionMatrix, NearPairReconstructions) {
  const Dense diff{{0, .005, -.005, 0}, {0, .001, 0, -.001}, {-.002, -.003, .005, 0}, {0, .002, 0, -.002}};
  Dense t1 = kTphi;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) t1[i][j] += diff[i][j];
  EXPECT_LT(max_diff(dense(transition_matrix(load("near-x1.prn"))), t1), 1e-12);
  EXPECT_LT(max_diff(dense(tphi_from_x2()), kTphi), 1e-12);
}

TEST(TransitionMatrix, MatchesNaiveSumOnRandomNetworks) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    const auto net = random_network(rng, 7, 5);
    EXPECT_LT(max_diff(dense(transition_matrix(net)), naive_matrix(net)), 1e-12);
  }
}

TEST(StochasticMatrix, RejectsNonStochasticInput) {
  EXPECT_THROW(from_dense({{.5, .4}, {0, 1}}), InvalidArgument);
  EXPECT_THROW(from_dense({{1.5, -.5}, {0, 1}}), InvalidArgument);
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(2, 2);
  EXPECT_THROW(StochasticMatrix({"a"}, m), InvalidArgument);
}

TEST(MatrixPower, MatchesRepeatedMultiplication) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    const auto net = random_network(rng, 6, 4);
    const auto t = transition_matrix(net);
    for (int n : {1, 2, 3, 7, 16}) EXPECT_LT(max_diff(dense(matrix_power(t, n)), naive_power(dense(t), n)), 1e-12);
  }
  EXPECT_THROW(matrix_power(from_dense(kTx3), 0), InvalidArgument);
}

TEST(MatrixDistance, ExamplesAndMismatch) {
  EXPECT_NEAR(matrix_distance(from_dense(kTwoBitPerturbed), from_dense(kTwoBit)), .11, 1e-12);
  EXPECT_THROW(matrix_distance(from_dense(kTwoBitPerturbed), from_dense(kTx3)), InvalidArgument);
}

TEST(Permute, ReordersRowsAndColumns) {
  const auto t = from_dense(kTwoBit);
  const auto p = permute(t, {3, 2, 1, 0});
  EXPECT_DOUBLE_EQ(p(0, 1), t(3, 2));
  EXPECT_EQ(p.order().front(), "s3");
  EXPECT_THROW(permute(t, {0, 0, 1, 2}), InvalidArgument);
}

TEST(RecurrentClasses, TwoBitHasSingleAbsorbingState) {
  const auto classes = recurrent_classes(transition_matrix(load("two-bit.prn")));
  ASSERT_EQ(classes.size(), 1u);
  EXPECT_EQ(classes[0], (std::vector<StateIndex>{2}));
}

TEST(RecurrentClasses, MatchReachabilityOracle) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 300; ++i) {
    const auto net = random_network(rng, 8, 3);
    const auto t = transition_matrix(net);
    EXPECT_EQ(recurrent_classes(t), recurrent_class_oracle(dense(t)));
  }
}

TEST(SteadyState, TwoBitConcentratesOnAbsorbingState) {
  const auto pi = steady_state(transition_matrix(load("two-bit.prn")));
  EXPECT_NEAR(pi.weights(2), 1.0, 1e-10);
  EXPECT_NEAR(pi.weights.sum(), 1.0, 1e-12);
}

TEST(SteadyState, NearPairPrintedValues) {
  const auto pi_phi = steady_state(tphi_from_x2());
  const std::vector<double> expected_phi{0, .01632, 0, .98368};
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(pi_phi.weights(i), expected_phi[i], 5e-5);
  const auto pi1 = steady_state(transition_matrix(load("near-x1.prn")));
  const std::vector<double> expected_1{0, .01926, 0, .98074};
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(pi1.weights(i), expected_1[i], 5e-5);
  EXPECT_LT((pi1.weights - pi_phi.weights).cwiseAbs().maxCoeff(), .004);
}

TEST(SteadyState, PeriodicChainX3) {
  const auto pi = steady_state(from_dense(kTx3));
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(pi.weights(i), 0.0, 1e-10);
  EXPECT_NEAR(pi.weights(4), 1.0, 1e-10);
}

TEST(SteadyState, PureCycleUsesLazyIteration) {
  const auto pi = steady_state(from_dense({{0, 1, 0}, {0, 0, 1}, {1, 0, 0}}));
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(pi.weights(i), 1.0 / 3.0, 1e-10);
}

TEST(SteadyState, MatchesLinearSolveOracle) {
  std::mt19937_64 rng(13);
  int checked = 0;
  for (int i = 0; i < 400 && checked < 150; ++i) {
    const auto net = random_network(rng, 6, 4);
    const auto t = transition_matrix(net);
    if (recurrent_classes(t).size() != 1) {
      EXPECT_THROW(steady_state(t), InvalidArgument);
      continue;
    }
    ++checked;
    const auto pi = steady_state(t);
    const auto oracle = solve_stationary(dense(t));
    for (std::size_t k = 0; k < oracle.size(); ++k) EXPECT_NEAR(pi.weights(static_cast<Eigen::Index>(k)), oracle[k], 1e-8);
    EXPECT_LT((pi.weights.transpose() * t.entries() - pi.weights.transpose()).cwiseAbs().maxCoeff(), 1e-10);
  }
  EXPECT_GT(checked, 50);
}

TEST(SteadyState, TwoRecurrentClassesIsAnError) {
  EXPECT_THROW(steady_state(from_dense({{1, 0}, {0, 1}})), InvalidArgument);
}

TEST(PowerBound, NearPairInstance) {
  const auto t1 = transition_matrix(load("near-x1.prn"));
  const auto tphi = tphi_from_x2();
  const auto report = verify_power_bound(t1, tphi, .005, 50);
  EXPECT_TRUE(report.verdict);
  EXPECT_NEAR(report.epsilon_observed, .005, 1e-12);
  ASSERT_EQ(report.per_power.size(), 50u);
  EXPECT_LE(report.per_power[1].max_abs, .003);
  EXPECT_LE(report.per_power[2].max_abs, .004);
  ASSERT_TRUE(report.stationary_distance);
  EXPECT_LT(*report.stationary_distance, .004);
  EXPECT_TRUE(report.row_sum_zero);
}

TEST(PowerBound, PerPowerMaximaMatchNaivePowers) {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 40; ++i) {
    const auto a = random_network(rng, 5, 3);
    NetworkData d = a.data();
    for (auto& fn : d.functions) fn.prob = 1.0 / static_cast<double>(d.functions.size());
    const auto ta = transition_matrix(a), tb = transition_matrix(Prn(d));
    const auto report = verify_power_bound(ta, tb, 1.0, 6);
    for (int n = 1; n <= 6; ++n)
      EXPECT_NEAR(report.per_power[n - 1].max_abs, max_diff(naive_power(dense(ta), n), naive_power(dense(tb), n)),
                  1e-12);
  }
}

TEST(TdmcSimilarity, NearPairPairIsSimilar) {
  const auto report = tdmc_similarity(transition_matrix(load("near-x1.prn")), tphi_from_x2(), .005, 10);
  EXPECT_TRUE(report.verdict);
  for (const auto& p : report.per_power) EXPECT_TRUE(p.support_equal);
}

TEST(TdmcSimilarity, TwoBitPerturbedFailsOnSupport) {
  const auto report =
      tdmc_similarity(transition_matrix(load("two-bit-perturbed.prn")), transition_matrix(load("two-bit.prn")), .11, 3);
  EXPECT_FALSE(report.verdict);
  EXPECT_FALSE(report.per_power.front().support_equal);
}

TEST(TdmcSimilarity, EpsilonTooSmallFails) {
  const auto report = tdmc_similarity(transition_matrix(load("near-x1.prn")), tphi_from_x2(), .004, 3);
  EXPECT_FALSE(report.verdict);
}

TEST(RestrictTo, RequiresClosedSubset) {
  const auto t = transition_matrix(load("three-bit.prn"));
  const auto x3 = restrict_to(t, {3, 4, 5, 6, 7});
  EXPECT_LT(max_diff(dense(x3), kTx3), 1e-15);
  EXPECT_THROW(restrict_to(t, {1, 2}), InvalidArgument);
}
