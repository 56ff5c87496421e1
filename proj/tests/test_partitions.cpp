#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "efcp/errors.hpp"
#include "efcp/partitions.hpp"
#include "test_util.hpp"

using namespace efcp;
using efcp::testing::all_partition_matrices;
using efcp::testing::random_coloring;
using efcp::testing::random_partition_matrix;

TEST_CASE("coloring text form") {
  const Coloring x = Coloring::parse("1122", 2);
  CHECK(x.n() == 4);
  CHECK(x[0] == 0);
  CHECK(x[3] == 1);
  CHECK(x.to_string() == "1122");
  CHECK(x.counts() == std::vector<int>{2, 2});
  CHECK(Coloring::parse("19ag", 16).to_string() == "19ag");
  CHECK_THROWS_AS(Coloring::parse("13", 2), InvalidInput);
  CHECK_THROWS_AS(Coloring::parse("1x", 16), InvalidInput);
}

TEST_CASE("classes round trip") {
  std::mt19937_64 gen(1);
  for (int rep = 0; rep < 50; ++rep) {
    const Coloring x = random_coloring(7, 3, gen);
    const auto cls = x.classes();
    CHECK(Coloring::from_classes(cls) == x);
  }
}

TEST_CASE("coloring index round trip") {
  for (std::size_t i = 0; i < 81; ++i) CHECK(coloring_index(coloring_at(i, 4, 3)) == i);
  CHECK(coloring_index(Coloring::parse("2111", 2)) == 1);
}

TEST_CASE("monoid laws, exhaustive n = 2, k = 2") {
  const auto all = all_partition_matrices(2, 2);
  REQUIRE(all.size() == 16);
  const auto id = PartitionMatrix::identity(2, 2);
  for (const auto& a : all) {
    CHECK(id * a == a);
    CHECK(a * id == a);
    for (const auto& b : all)
      for (const auto& c : all) REQUIRE((a * b) * c == a * (b * c));
  }
}

TEST_CASE("action compatibility, exhaustive n = 2, k = 2") {
  const auto all = all_partition_matrices(2, 2);
  const auto id = PartitionMatrix::identity(2, 2);
  for (std::size_t xi = 0; xi < 4; ++xi) {
    const Coloring x = coloring_at(xi, 2, 2);
    CHECK(act(id, x) == x);
    for (const auto& a : all)
      for (const auto& b : all) REQUIRE(act(a * b, x) == act(a, act(b, x)));
  }
}

TEST_CASE("monoid laws and action, randomized") {
  std::mt19937_64 gen(7);
  for (int rep = 0; rep < 2000; ++rep) {
    const int n = 1 + static_cast<int>(gen() % 8);
    const int k = 1 + static_cast<int>(gen() % 4);
    const auto a = random_partition_matrix(n, k, gen);
    const auto b = random_partition_matrix(n, k, gen);
    const auto c = random_partition_matrix(n, k, gen);
    const auto x = random_coloring(n, k, gen);
    REQUIRE((a * b) * c == a * (b * c));
    REQUIRE(act(a * b, x) == act(a, act(b, x)));
    // Every column of a product is again a labeled partition.
    const auto ab = a * b;
    for (int j = 0; j < k; ++j) {
      Subset u(static_cast<std::size_t>(n));
      for (int r = 0; r < k; ++r) {
        REQUIRE((u & ab.cell(r, j)).none());
        u |= ab.cell(r, j);
      }
      REQUIRE(u.all());
    }
  }
}

TEST_CASE("transport matrix reaches any target") {
  std::mt19937_64 gen(3);
  for (int rep = 0; rep < 200; ++rep) {
    const auto x = random_coloring(6, 3, gen);
    const auto y = random_coloring(6, 3, gen);
    CHECK(act(transport_matrix(x, y), x) == y);
  }
}

TEST_CASE("cyclic shift adds mod k") {
  std::mt19937_64 gen(5);
  for (int rep = 0; rep < 100; ++rep) {
    const auto x = random_coloring(5, 4, gen);
    const auto y = random_coloring(5, 4, gen);
    CHECK(act(cyclic_shift_matrix(x), y) == add_mod_k(y, x));
  }
}

TEST_CASE("projection ignores labels") {
  std::mt19937_64 gen(11);
  std::vector<int> perm{0, 1, 2};
  for (int rep = 0; rep < 50; ++rep) {
    const auto x = random_coloring(6, 3, gen);
    do {
      CHECK(project(relabel(x, perm)) == project(x));
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  const auto p = project(Coloring::parse("2211", 2));
  CHECK(p.block_count() == 2);
  CHECK(p.blocks() == std::vector<std::vector<int>>{{0, 1}, {2, 3}});
  CHECK(project(Coloring::parse("222", 3)).block_count() == 1);
}

TEST_CASE("partition matrix JSON round trip") {
  std::mt19937_64 gen(13);
  for (int rep = 0; rep < 20; ++rep) {
    const auto m = random_partition_matrix(5, 3, gen);
    CHECK(partition_matrix_from_json(to_json(m)) == m);
  }
  CHECK_THROWS_AS(partition_matrix_from_json(nlohmann::json::parse("[[[1],[]],[[],[2]]]")),
                  InvalidInput);
}

TEST_CASE("matrix columns must partition [n]") {
  std::vector<Subset> cells(4, Subset(3));
  cells[0].set(0);
  cells[2].set(1);  // site 2 missing from column 0
  cells[1].set();
  CHECK_THROWS_AS(PartitionMatrix(3, 2, cells), InvalidInput);
}
