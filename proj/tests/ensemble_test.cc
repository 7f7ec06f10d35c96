// langid/ensemble_test.cc

// Copyright 2026  The langid authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <tuple>

#include "langid/ensemble.h"

namespace langid {
namespace {

std::vector<double> OracleFuse(const std::vector<std::vector<double>> &ps) {
  std::vector<double> s(ps[0].size(), 0.0), out(s.size());
  for (const auto &p : ps)
    for (size_t c = 0; c < p.size(); ++c) s[c] += p[c];
  double z = 0.0;
  for (double v : s) z += std::exp(v);
  for (size_t c = 0; c < s.size(); ++c) out[c] = std::exp(s[c]) / z;
  return out;
}

// Noisy member: p_en drawn around the truth with member-specific quality.
TrialScores Member(const std::vector<int> &labels, double quality, Rng &rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  TrialScores s;
  for (size_t i = 0; i < labels.size(); ++i) {
    const double logit = (labels[i] == 0 ? quality : -quality) + n(rng);
    const double p = 1.0 / (1.0 + std::exp(-logit));
    s.trials.push_back({"u" + std::to_string(i), {p, 1.0 - p}, labels[i]});
  }
  return s;
}

EnsemblePool RandomPool(int n_members, int n_utts, uint64_t seed) {
  Rng rng(seed);
  std::vector<int> labels;
  for (int i = 0; i < n_utts; ++i) labels.push_back(i % 2);
  std::uniform_real_distribution<double> q(0.2, 1.5);
  EnsemblePool pool;
  for (int m = 0; m < n_members; ++m) {
    pool.ids.push_back("m" + std::to_string(m));
    pool.members.push_back(Member(labels, q(rng), rng));
  }
  return pool;
}

TEST(Fuse, OpposedMembersCancel) {
  auto f = FuseProbs({{0.9, 0.1}, {0.1, 0.9}});
  EXPECT_NEAR(f[0], 0.5, 1e-12);
  EXPECT_NEAR(f[1], 0.5, 1e-12);
}

TEST(Fuse, AgreeingMembers) {
  auto f = FuseProbs({{0.9, 0.1}, {0.6, 0.4}});
  EXPECT_NEAR(f[0], 0.731059, 1e-6);
  EXPECT_NEAR(f[1], 0.268941, 1e-6);
}

TEST(Fuse, MeanRule) {
  auto f = FuseProbs({{0.9, 0.1}, {0.6, 0.4}}, FusionRule::kMean);
  EXPECT_NEAR(f[0], 0.75, 1e-12);
}

TEST(Fuse, PropertiesOnRandomInputs) {
  Rng rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    const int m = 1 + trial % 6;
    std::vector<std::vector<double>> ps;
    for (int i = 0; i < m; ++i) {
      const double p = u(rng);
      ps.push_back({p, 1.0 - p});
    }
    auto f = FuseProbs(ps);
    EXPECT_NEAR(f[0] + f[1], 1.0, 1e-12);
    auto want = OracleFuse(ps);
    EXPECT_NEAR(f[0], want[0], 1e-12);
    std::reverse(ps.begin(), ps.end());
    EXPECT_NEAR(FuseProbs(ps)[0], f[0], 1e-12);
    bool agree = true;
    for (auto &p : ps) agree = agree && ArgMax(p) == ArgMax(ps[0]) && p[0] != p[1];
    if (agree) {
      EXPECT_EQ(ArgMax(f), ArgMax(ps[0]));
    }
  }
}

TEST(Fuse, ThreeClasses) {
  auto f = FuseProbs({{0.2, 0.5, 0.3}, {0.1, 0.1, 0.8}});
  auto want = OracleFuse({{0.2, 0.5, 0.3}, {0.1, 0.1, 0.8}});
  for (int c = 0; c < 3; ++c) EXPECT_NEAR(f[c], want[c], 1e-12);
}

TEST(EnsembleProbs, MisalignedMembersFail) {
  Rng rng(1);
  TrialScores a = Member({0, 1, 0}, 1.0, rng);
  TrialScores b = a;
  std::swap(b.trials[0], b.trials[1]);
  EXPECT_THROW(EnsembleProbs({a, b}), Error);
  TrialScores c = a;
  c.trials.pop_back();
  EXPECT_THROW(EnsembleProbs({a, c}), Error);
  TrialScores d = a;
  d.trials[0].label = 1;
  EXPECT_THROW(EnsembleProbs({a, d}), Error);
  EXPECT_THROW(EnsembleProbs({}), Error);
}

TEST(SubsetSearch, MatchesBruteForce) {
  for (uint64_t seed : {11u, 12u, 13u}) {
    EnsemblePool pool = RandomPool(5, 60, seed);
    // Brute force: (eer, size, ids) lexicographic minimum.
    std::tuple<double, size_t, std::vector<std::string>> best{2.0, 0, {}};
    std::vector<int> best_members;
    for (int mask = 1; mask < 32; ++mask) {
      std::vector<int> mem;
      std::vector<std::string> ids;
      for (int i = 0; i < 5; ++i)
        if (mask >> i & 1) {
          mem.push_back(i);
          ids.push_back(pool.ids[i]);
        }
      std::vector<double> pos, neg;
      for (size_t u = 0; u < pool.members[0].trials.size(); ++u) {
        std::vector<std::vector<double>> ps;
        for (int i : mem) ps.push_back(pool.members[i].trials[u].probs);
        const double p = OracleFuse(ps)[0];
        (pool.members[0].trials[u].label == 0 ? pos : neg).push_back(p);
      }
      std::tuple<double, size_t, std::vector<std::string>> key{ComputeEer(pos, neg), mem.size(),
                                                               ids};
      if (key < best) {
        best = key;
        best_members = mem;
      }
    }
    SubsetResult r = SubsetSearch(pool);
    EXPECT_EQ(r.members, best_members) << seed;
    EXPECT_NEAR(r.eer, std::get<0>(best), 1e-9) << seed;
    for (int i = 0; i < 5; ++i) EXPECT_LE(r.eer, EvaluateSubset(pool, {i}).eer);
  }
}

TEST(SubsetSearch, PoolOfOne) {
  EnsemblePool pool = RandomPool(1, 40, 4);
  SubsetResult r = SubsetSearch(pool);
  EXPECT_EQ(r.members, std::vector<int>{0});
  EXPECT_NEAR(r.eer, Eer(pool.members[0]), 1e-12);
  // A single member passes through the softmax; ranking is unchanged.
  for (size_t u = 0; u < r.fused.trials.size(); ++u)
    EXPECT_EQ(ArgMax(r.fused.trials[u].probs), ArgMax(pool.members[0].trials[u].probs));
}

TEST(SubsetSearch, LargePoolNeedsGreedy) {
  EnsemblePool pool = RandomPool(16, 40, 5);
  EXPECT_THROW(SubsetSearch(pool), Error);
  SubsetResult r = SubsetSearch(pool, true);
  ASSERT_FALSE(r.members.empty());
  EXPECT_TRUE(std::is_sorted(r.members.begin(), r.members.end()));
  for (int i = 0; i < 16; ++i) EXPECT_LE(r.eer, EvaluateSubset(pool, {i}).eer);
}

TEST(SubsetSearch, EmptyPoolFails) {
  EXPECT_THROW(SubsetSearch(EnsemblePool{}), Error);
}

}  // namespace
}  // namespace langid
