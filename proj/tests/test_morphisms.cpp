#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "support.hpp"

using namespace prn;
using namespace prn::testing;

TEST(StateMaps, BasicOperations) {
  const StateMap a{{1, 2, 0}, 3};
  EXPECT_TRUE(is_bijective(a));
  EXPECT_TRUE(is_injective(a));
  const auto inv = inverse(a);
  ASSERT_TRUE(inv);
  EXPECT_EQ(compose(a, *inv), identity_map(3));
  EXPECT_EQ(compose(a, a).image, (std::vector<StateIndex>{2, 0, 1}));
  const StateMap b{{0, 0, 1}, 2};
  EXPECT_FALSE(is_injective(b));
  EXPECT_FALSE(inverse(b));
  EXPECT_EQ(image_set(b), (std::vector<StateIndex>{0, 1}));
}

TEST(CheckHomomorphism, TwoBitPerturbedIdentityEpsilon) {
  const auto x1 = load("two-bit-perturbed.prn");
  const auto xbar = load("two-bit.prn");
  const auto cert = check_homomorphism(x1, xbar, identity_map(4));
  ASSERT_TRUE(cert.holds());
  EXPECT_NEAR(*cert.epsilon, .11, 1e-12);
  EXPECT_NEAR(*cert.full_distance, .11, 1e-12);
  EXPECT_FALSE(cert.is_isomorphism);
  EXPECT_EQ(*cert.correspondence, (std::vector<std::size_t>{0, 1, 2}));
}

TEST(CheckHomomorphism, ReverseDirectionFailsCondition1) {
  // f4 = (1,0) of the full network has no counterpart in X1.
  const auto cert = check_homomorphism(load("two-bit.prn"), load("two-bit-perturbed.prn"), identity_map(4));
  EXPECT_FALSE(cert.holds_condition1);
  ASSERT_TRUE(cert.counterexample);
  EXPECT_EQ(cert.counterexample->function, 3u);
  EXPECT_FALSE(cert.epsilon);
}

TEST(CheckHomomorphism, NearPairInclusion) {
  const auto x1 = load("near-x1.prn");
  const auto x2 = load("near-x2.prn");
  const auto cert = check_homomorphism(x1, x2, std::vector<StateIndex>{4, 5, 6, 7});
  ASSERT_TRUE(cert.holds());
  EXPECT_NEAR(*cert.epsilon, .005, 1e-12);
}

TEST(CheckHomomorphism, FdsIsomorphism) {
  const auto x = load("fds-x.prn");
  const auto y = load("fds-y.prn");
  const auto cert = check_homomorphism(x, y, std::vector<StateIndex>{2, 0, 3, 1});
  ASSERT_TRUE(cert.holds());
  EXPECT_TRUE(cert.bijective);
  EXPECT_TRUE(cert.is_isomorphism);
  EXPECT_EQ(*cert.epsilon, 0.0);
  // Identity is not even a homomorphism between the two.
  EXPECT_FALSE(check_homomorphism(x, y, identity_map(4)).holds());
}

TEST(CheckHomomorphism, FdsInclusionOfSubsystem) {
  // Z = {(0,0), (1,0)} with f1 restricted; f1(1,0) = (0,0).
  NetworkData z;
  z.name = "z";
  z.states = {"(0,0)", "(1,0)"};
  z.functions = {{"f1", {0, 0}, 1.0}};
  const auto cert = check_homomorphism(Prn(z), load("fds-x.prn"), std::vector<StateIndex>{0, 2});
  ASSERT_TRUE(cert.holds());
  EXPECT_EQ(*cert.epsilon, 0.0);
}

TEST(CheckHomomorphism, ConstantMapA1A2ToA1A3) {
  const auto cert = check_homomorphism(load("a1a2.prn"), load("a1a3.prn"), std::vector<StateIndex>{0, 0, 0, 0});
  EXPECT_TRUE(cert.holds());
}

TEST(CheckHomomorphism, RejectsMapOfWrongShape) {
  const auto a = load("two-bit.prn");
  EXPECT_THROW(check_homomorphism(a, a, StateMap{{0, 1, 2}, 4}), InvalidArgument);
  EXPECT_THROW(check_homomorphism(a, a, StateMap{{0, 1, 2, 7}, 4}), InvalidArgument);
}

TEST(CheckHomomorphism, AgreesWithLiteralOracle) {
  std::mt19937_64 rng(23);
  std::size_t holds = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const auto a = random_network(rng, 3, 3, "a");
    const auto b = random_network(rng, 3, 3, "b");
    const HomomorphismChecker checker(a, b);
    for (const auto& map : all_maps(a.size(), b.size())) {
      const auto cert = checker.certify(StateMap{map, b.size()});
      const auto oracle = hom_oracle(a, b, map);
      ASSERT_EQ(cert.holds(), oracle.holds);
      if (!oracle.holds) continue;
      ++holds;
      EXPECT_NEAR(*cert.epsilon, oracle.epsilon, 1e-12);
      EXPECT_NEAR(*cert.full_distance, oracle.full, 1e-12);
      if (is_injective(cert.state_map)) EXPECT_NEAR(*cert.epsilon, *cert.full_distance, 1e-15);
    }
  }
  EXPECT_GT(holds, 100u);
}

TEST(Enumerate, MatchesBruteForce) {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 150; ++trial) {
    const auto a = random_network(rng, 4, 2, "a");
    const auto b = random_network(rng, 4, 2, "b");
    std::vector<std::vector<StateIndex>> expected;
    for (const auto& map : all_maps(a.size(), b.size()))
      if (hom_oracle(a, b, map).holds) expected.push_back(map);
    std::vector<std::vector<StateIndex>> got;
    for (const auto& cert : enumerate_homomorphisms(a, b)) got.push_back(cert.state_map.image);
    ASSERT_EQ(got, expected);
  }
}

TEST(Enumerate, ParallelAndSerialAgree) {
  std::mt19937_64 rng(31);
  const auto a = random_network(rng, 7, 2, "a");
  const auto b = random_network(rng, 7, 2, "b");
  EnumerateOptions serial, parallel;
  serial.threads = 1;
  parallel.threads = 4;
  const auto s = enumerate_homomorphisms(a, b, serial);
  const auto p = enumerate_homomorphisms(a, b, parallel);
  ASSERT_EQ(s.size(), p.size());
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_EQ(s[i].state_map, p[i].state_map);
}

TEST(Enumerate, A1A2ToA1A3) {
  const auto a = load("a1a2.prn");
  const auto b = load("a1a3.prn");
  EnumerateOptions bij;
  bij.bijective_only = true;
  EXPECT_EQ(candidate_count(4, 4, false, true), 24u);
  EXPECT_TRUE(enumerate_homomorphisms(a, b, bij).empty());
  const auto all = enumerate_homomorphisms(a, b);
  bool constant = false;
  for (const auto& cert : all)
    if (cert.state_map.image == std::vector<StateIndex>{0, 0, 0, 0}) constant = true;
  EXPECT_TRUE(constant);
}

TEST(Enumerate, CapacityAndEpsilonFilters) {
  const auto a = load("two-bit.prn");
  EnumerateOptions capped;
  capped.cap = 100;
  EXPECT_THROW(enumerate_homomorphisms(a, a, capped), CapacityError);
  EXPECT_EQ(candidate_count(30, 30, false, false), std::numeric_limits<std::size_t>::max());

  EnumerateOptions tight;
  tight.max_epsilon = 0.0;
  for (const auto& cert : enumerate_homomorphisms(a, a, tight)) EXPECT_LE(*cert.epsilon, kCompareSlack);
}

TEST(Enumerate, ExactBijectiveInverseEqualsIsomorphisms) {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = random_network(rng, 4, 3, "a");
    // b: a relabelled copy, sometimes perturbed.
    std::vector<StateIndex> perm(a.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    NetworkData d = a.data();
    for (auto& fn : d.functions) {
      std::vector<StateIndex> t(fn.table.size());
      for (std::size_t u = 0; u < t.size(); ++u) t[perm[u]] = perm[fn.table[u]];
      fn.table = t;
    }
    if (trial % 3 == 0) d.functions.front().table.front() = 0;
    const Prn b(d);

    EnumerateOptions exact;
    exact.bijective_only = true;
    exact.require_inverse_hom = true;
    exact.max_epsilon = 0.0;
    std::vector<std::vector<StateIndex>> enumerated;
    for (const auto& cert : enumerate_homomorphisms(a, b, exact)) enumerated.push_back(cert.state_map.image);

    std::vector<std::vector<StateIndex>> isos;
    for (const auto& cert : enumerate_homomorphisms(a, b))
      if (cert.is_isomorphism) isos.push_back(cert.state_map.image);
    EXPECT_EQ(enumerated, isos);
    if (trial % 3 != 0) EXPECT_FALSE(isos.empty());
  }
}

TEST(Compose, EpsilonBoundOnRandomChains) {
  std::mt19937_64 rng(41);
  std::size_t composed = 0;
  for (int trial = 0; trial < 400 && composed < 200; ++trial) {
    const auto a = random_network(rng, 3, 2, "a");
    const auto b = random_network(rng, 3, 2, "b");
    const auto c = random_network(rng, 3, 2, "c");
    const auto ab = enumerate_homomorphisms(a, b);
    const auto bc = enumerate_homomorphisms(b, c);
    for (std::size_t i = 0; i < ab.size() && i < 3; ++i)
      for (std::size_t j = 0; j < bc.size() && j < 3; ++j) {
        const auto r = compose_morphisms(a, b, c, ab[i], bc[j]);
        ASSERT_TRUE(r.certificate.holds());
        EXPECT_EQ(r.certificate.state_map, compose(ab[i].state_map, bc[j].state_map));
        ++composed;
        if (is_injective(ab[i].state_map) && is_injective(bc[j].state_map)) EXPECT_TRUE(r.bound_holds);
      }
  }
  EXPECT_GT(composed, 50u);
}

TEST(Projection, IdempotenceAndHomomorphism) {
  const auto x2 = load("near-x2.prn");
  // (x,y,z) -> (x,y,1): states 0..3 map onto 4..7.
  const StateMap pi{{4, 5, 6, 7, 4, 5, 6, 7}, 8};
  const auto check = is_projection(x2, pi);
  EXPECT_TRUE(check.idempotent);
  EXPECT_FALSE(check.certificate.holds());
  EXPECT_FALSE(check.is_projection);

  const StateMap not_idempotent{{1, 0, 2, 3, 4, 5, 6, 7}, 8};
  EXPECT_FALSE(is_projection(x2, not_idempotent).idempotent);
}
