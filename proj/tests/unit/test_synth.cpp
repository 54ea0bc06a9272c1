#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "../support/oracles.hpp"
#include "../support/temp_dir.hpp"
#include "regionflow/errors.hpp"
#include "regionflow/synth.hpp"

using namespace regionflow;

namespace {

// Pair-counting form: 2 (ad - bc) / ((a + b)(b + d) + (a + c)(c + d)).
double pair_count_ari(const std::vector<int>& x, const std::vector<int>& y) {
  double a = 0, b = 0, c = 0, d = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const bool sx = x[i] == x[j], sy = y[i] == y[j];
      (sx && sy ? a : sx ? b : sy ? c : d) += 1;
    }
  const double denom = (a + b) * (b + d) + (a + c) * (c + d);
  return denom == 0.0 ? 1.0 : 2 * (a * d - b * c) / denom;
}

}  // namespace

TEST_SUITE("synth") {
  TEST_CASE("4x4 lattice with four 2x2 blocks") {
    SynthConfig cfg;
    cfg.lattice_size = 4;
    cfg.planted_communities = 4;
    cfg.seed = 1;
    SynthNetwork s = generate(cfg);
    CHECK(s.network.size() == 16);
    CHECK(s.planted.k() == 4);
    for (const auto& members : s.planted.members()) {
      REQUIRE(members.size() == 4);
      std::set<int> rows, cols;
      for (int v : members) rows.insert(v / 4), cols.insert(v % 4);
      CHECK(rows.size() == 2);
      CHECK(cols.size() == 2);
      CHECK(oracle::induces_connected(s.network.adjacency, members));
    }
    std::set<int> degrees;
    for (int i = 0; i < 16; ++i) degrees.insert(static_cast<int>(s.network.adjacency.row(i).sum()));
    CHECK(degrees == std::set<int>{2, 3, 4});
    CHECK(s.network.adjacency == oracle::lattice(4, 4));
  }

  TEST_CASE("zero inter-block rate leaves blocks disconnected in flow") {
    SynthConfig cfg;
    cfg.lattice_size = 6;
    cfg.planted_communities = 4;
    cfg.lambda_out = 0.0;
    SynthNetwork s = generate(cfg);
    for (int i = 0; i < 36; ++i)
      for (int j = 0; j < 36; ++j)
        if (s.planted.label(i) != s.planted.label(j)) REQUIRE(s.network.flows(i, j) == 0.0);
  }

  TEST_CASE("flows are symmetric and confined to the reach") {
    SynthConfig cfg;
    cfg.lattice_size = 8;
    SynthNetwork s = generate(cfg);
    CHECK(s.network.flows == s.network.flows.transpose());
    auto hops = oracle::floyd_warshall(s.network.adjacency);
    for (int i = 0; i < 64; ++i)
      for (int j = 0; j < 64; ++j)
        if (hops[i][j] > kSynthFlowReach || i == j) REQUIRE(s.network.flows(i, j) == 0.0);
  }

  TEST_CASE("same seed gives the same network") {
    SynthConfig cfg;
    cfg.seed = 77;
    SynthNetwork a = generate(cfg), b = generate(cfg);
    CHECK(a.network.flows == b.network.flows);
    CHECK(a.network.attributes == b.network.attributes);
    CHECK(a.network.node_ids == b.network.node_ids);
    CHECK(a.planted == b.planted);
    cfg.seed = 78;
    CHECK(generate(cfg).network.flows != a.network.flows);
  }

  TEST_CASE("intra-block flow mean matches the Poisson rate") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      SynthConfig cfg;
      cfg.lattice_size = 10;
      cfg.seed = seed;
      SynthNetwork s = generate(cfg);
      auto hops = oracle::floyd_warshall(s.network.adjacency);
      double sum = 0.0, count = 0.0;
      for (int i = 0; i < 100; ++i)
        for (int j = i + 1; j < 100; ++j)
          if (hops[i][j] <= kSynthFlowReach && s.planted.label(i) == s.planted.label(j)) sum += s.network.flows(i, j), ++count;
      const double mean = sum / count, se = std::sqrt(cfg.lambda_in / count);
      CHECK(std::abs(mean - cfg.lambda_in) <= 3 * se);
    }
  }

  TEST_CASE("attributes lie in the unit interval and separate blocks") {
    SynthConfig cfg;
    cfg.lattice_size = 10;
    cfg.noise_sd = 0.05;
    SynthNetwork s = generate(cfg);
    CHECK(s.network.attributes.minCoeff() >= 0.0);
    CHECK(s.network.attributes.maxCoeff() <= 1.0);
    CHECK(s.network.attributes.cols() == cfg.feature_dim);
  }

  TEST_CASE("rectangular lattices and tiling errors") {
    SynthConfig cfg;
    cfg.lattice_size = 4;
    cfg.lattice_cols = 6;
    cfg.planted_communities = 6;
    SynthNetwork s = generate(cfg);
    CHECK(s.network.size() == 24);
    CHECK(s.planted.k() == 6);
    for (const auto& members : s.planted.members()) CHECK(oracle::induces_connected(s.network.adjacency, members));
    cfg.lattice_cols = 0;
    cfg.planted_communities = 7;
    CHECK_THROWS_AS(generate(cfg), ValidationError);
    cfg.planted_communities = 4;
    cfg.noise_sd = -1;
    CHECK_THROWS_AS(generate(cfg), ValidationError);
  }

  TEST_CASE("saved directory reloads with planted labels") {
    testing_support::TempDir dir;
    SynthConfig cfg;
    cfg.lattice_size = 3;
    cfg.planted_communities = 1;
    SynthNetwork s = generate(cfg);
    save_synth(dir.path(), s);
    SpatialNetwork back = load_network(dir.path());
    CHECK(back.node_ids == s.network.node_ids);
    CHECK(back.flows == s.network.flows);
    CHECK(load_partition(dir / "planted.csv", back.node_ids) == s.planted);
  }
}

TEST_SUITE("adjusted rand index") {
  TEST_CASE("reference values") {
    std::vector<int> a{1, 1, 2, 2, 3, 3};
    CHECK(adjusted_rand_index(a, a) == 1.0);
    CHECK(adjusted_rand_index(a, std::vector<int>(6, 4)) == doctest::Approx(0.0));
    CHECK(adjusted_rand_index(a, {3, 3, 1, 1, 2, 2}) == 1.0);
    CHECK_THROWS_AS(adjusted_rand_index(a, {1, 2}), ValidationError);
  }

  TEST_CASE("pair-counting oracle, symmetry and relabelling") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 300; ++trial) {
      const int n = 2 + trial % 30;
      auto x = oracle::random_labels(n, 1 + trial % 5, rng), y = oracle::random_labels(n, 1 + trial % 4, rng);
      const double ari = adjusted_rand_index(x, y);
      REQUIRE(ari == doctest::Approx(pair_count_ari(x, y)).epsilon(1e-12));
      REQUIRE(ari == doctest::Approx(adjusted_rand_index(y, x)).epsilon(1e-14));
      auto relabelled = y;
      for (auto& v : relabelled) v = 100 - v;
      REQUIRE(adjusted_rand_index(x, relabelled) == doctest::Approx(ari).epsilon(1e-14));
      REQUIRE(ari <= 1.0 + 1e-12);
    }
  }
}

TEST_SUITE("random contiguous partition") {
  TEST_CASE("communities are connected and cover the graph") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 100; ++trial) {
      const int n = 3 + trial % 30;
      Matrix adj = oracle::random_adjacency(n, rng, 0.1);
      const int k = 1 + static_cast<int>(rng() % n);
      Partition p = random_contiguous_partition(adj, k, trial);
      REQUIRE(p.k() == k);
      for (const auto& members : p.members()) REQUIRE(oracle::induces_connected(adj, members));
      REQUIRE(random_contiguous_partition(adj, k, trial) == p);
    }
  }

  TEST_CASE("errors") {
    Matrix adj = Matrix::Zero(3, 3);
    CHECK_THROWS_AS(random_contiguous_partition(adj, 2, 0), InfeasibleError);
    CHECK(random_contiguous_partition(adj, 3, 0).k() == 3);
    CHECK_THROWS_AS(random_contiguous_partition(adj, 4, 0), ValidationError);
  }
}
