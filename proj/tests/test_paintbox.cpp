#include <doctest.h>

#include <cmath>

#include "efcp/errors.hpp"
#include "efcp/law_config.hpp"
#include "efcp/paintbox.hpp"
#include "test_util.hpp"

using namespace efcp;
using nlohmann::json;

namespace {

bool json_close(const json& a, const json& b) {
  if (a.is_number() && b.is_number()) return std::abs(a.get<double>() - b.get<double>()) < 1e-14;
  if (a.type() != b.type() || a.size() != b.size()) return false;
  if (a.is_array()) {
    for (std::size_t i = 0; i < a.size(); ++i)
      if (!json_close(a[i], b[i])) return false;
    return true;
  }
  if (a.is_object()) {
    for (const auto& [key, v] : a.items())
      if (!b.contains(key) || !json_close(v, b[key])) return false;
    return true;
  }
  return a == b;
}

}  // namespace

TEST_CASE("stochastic matrix validation") {
  CHECK_NOTHROW(StochasticMatrix::from_columns({{0.5, 0.5}, {0.2, 0.8}}));
  CHECK_NOTHROW(StochasticMatrix::from_columns({{0.5, 0.5 + 5e-10}, {0.2, 0.8}}));
  CHECK_THROWS_AS(StochasticMatrix::from_columns({{0.5, 0.6}, {0.2, 0.8}}), InvalidInput);
  CHECK_THROWS_AS(StochasticMatrix::from_columns({{1.5, -0.5}, {0.2, 0.8}}), InvalidInput);
  CHECK_THROWS_AS(StochasticMatrix::from_columns({{1.0}, {0.2, 0.8}}), InvalidInput);
  const auto p = StochasticMatrix::permutation(std::vector<int>{1, 2, 0});
  CHECK(p(1, 0) == 1.0);
  CHECK(p(0, 2) == 1.0);
}

TEST_CASE("sampled matrices are column stochastic") {
  const std::vector<PaintboxLaw> laws{
      PaintboxLaw::self_similar({0.3, 1.0, 2.0}),
      PaintboxLaw::dirichlet_columns({{1, 2, 3}, {0.1, 0.1, 0.1}, {5, 5, 5}}),
      PaintboxLaw::uniform_permutations(3), lazy_permutations(3, 0.4)};
  RngStream rng(1, 0);
  for (const auto& law : laws)
    for (int i = 0; i < 500; ++i) {
      const auto s = law.sample(rng);
      for (int c = 0; c < 3; ++c) {
        double total = 0.0;
        for (int r = 0; r < 3; ++r) {
          REQUIRE(s(r, c) >= 0.0);
          total += s(r, c);
        }
        REQUIRE(total == doctest::Approx(1.0).epsilon(1e-12));
      }
    }
}

TEST_CASE("dirichlet column means") {
  const auto law = PaintboxLaw::self_similar({2.0, 1.0});
  RngStream rng(2, 0);
  const int draws = 40000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < draws; ++i) {
    const double v = law.sample(rng)(0, 1);
    sum += v;
    sq += v * v;
  }
  const double mean = sum / draws;
  const double sd = std::sqrt(sq / draws - mean * mean);
  CHECK(std::abs(mean - 2.0 / 3.0) < 5.0 * sd / std::sqrt(double(draws)));
  // Var of Beta(2, 1) is 1/18.
  CHECK(sd * sd == doctest::Approx(1.0 / 18.0).epsilon(0.05));
}

TEST_CASE("sample_M_given_S marginals, chi-square") {
  const auto s = StochasticMatrix::from_columns({{0.2, 0.3, 0.5}, {0.6, 0.3, 0.1}, {0.1, 0.1, 0.8}});
  RngStream rng(3, 0);
  const int n = 3, draws = 20000;
  std::vector<std::vector<std::vector<int>>> count(
      n, std::vector<std::vector<int>>(3, std::vector<int>(3, 0)));
  for (int d = 0; d < draws; ++d) {
    const auto m = sample_M_given_S(s, n, rng);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < 3; ++j) ++count[i][j][m.row_of(i, j)];
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < 3; ++j) {
      double chi2 = 0.0;
      for (int r = 0; r < 3; ++r) {
        const double e = draws * s(r, j);
        chi2 += (count[i][j][r] - e) * (count[i][j][r] - e) / e;
      }
      // 2 degrees of freedom; P(chi2 > 25) < 4e-6.
      CHECK(chi2 < 25.0);
    }
}

TEST_CASE("partition matrix probabilities sum to one") {
  const auto s = StochasticMatrix::from_columns({{0.3, 0.7}, {0.9, 0.1}});
  double total = 0.0;
  for (const auto& m : efcp::testing::all_partition_matrices(3, 2))
    total += partition_matrix_probability(s, m);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("reproducible sampling") {
  const auto law = PaintboxLaw::self_similar({1.0, 1.0, 1.0});
  RngStream a(9, 4), b(9, 4), c(9, 5);
  for (int i = 0; i < 20; ++i) {
    const auto sa = law.sample(a);
    CHECK(sa == law.sample(b));
    CHECK_FALSE(sa == law.sample(c));
  }
}

TEST_CASE("philox known answer") {
  // Random123 known-answer vectors for Philox4x32-10.
  const auto z = RngStream::philox_block({0, 0, 0, 0}, {0, 0});
  CHECK(z == std::array<std::uint32_t, 4>{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  const auto f = RngStream::philox_block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                         {0xffffffffu, 0xffffffffu});
  CHECK(f == std::array<std::uint32_t, 4>{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
}

TEST_CASE("atomic weights") {
  const auto s = StochasticMatrix::identity(2);
  CHECK_NOTHROW(PaintboxLaw::atomic({s, s}, {0.5, 0.5 + 1e-10}));
  CHECK_THROWS_AS(PaintboxLaw::atomic({s, s}, {0.5, 0.6}), InvalidInput);
  CHECK_THROWS_AS(PaintboxLaw::atomic({s, StochasticMatrix::identity(3)}, {0.5, 0.5}),
                  InvalidInput);
  const auto sup = PaintboxLaw::atomic({s, s}, {0.25, 0.75}).finite_support();
  REQUIRE(sup);
  CHECK(sup->size() == 2);
}

TEST_CASE("row-column exchangeability") {
  CHECK(is_rce(PaintboxLaw::uniform_permutations(3)).verdict == Verdict::yes);
  CHECK(is_rce(PaintboxLaw::self_similar({1.0, 1.0})).verdict == Verdict::yes);
  CHECK(is_rce(PaintboxLaw::self_similar({1.0, 2.0})).verdict == Verdict::no);
  CHECK(is_rce(PaintboxLaw::dirichlet_columns({{1, 2}, {2, 1}})).verdict == Verdict::no);
  CHECK(is_rce(lazy_permutations(4, 0.3)).verdict == Verdict::yes);
  const auto s = StochasticMatrix::from_columns({{0.9, 0.1}, {0.2, 0.8}});
  const auto asym = PaintboxLaw::point_mass(s);
  const auto r = is_rce(asym);
  CHECK(r.verdict == Verdict::no);
  CHECK_FALSE(r.certificate.empty());
  CHECK(is_rce(rce_closure(s)).verdict == Verdict::yes);
  std::mt19937_64 gen(4);
  CHECK(is_rce(rce_closure(efcp::testing::random_stochastic(3, gen))).verdict == Verdict::yes);
  const auto mix = PaintboxLaw::mixture(
      {PaintboxLaw::self_similar({1.0, 1.0}), PaintboxLaw::dirichlet_columns({{1, 2}, {2, 1}})},
      {0.5, 0.5});
  CHECK(is_rce(mix).verdict == Verdict::unknown);
}

TEST_CASE("density hypothesis table") {
  CHECK(PaintboxLaw::self_similar({1.0, 1.0}).has_lp_density());
  CHECK(PaintboxLaw::dirichlet_columns({{1, 2}, {2, 1}}).has_lp_density());
  CHECK_FALSE(PaintboxLaw::uniform_permutations(2).has_lp_density());
  CHECK_FALSE(PaintboxLaw::point_mass(StochasticMatrix::uniform(2)).has_lp_density());
}

TEST_CASE("law JSON round trip and diagnostics") {
  const std::vector<json> specs{
      json::parse(R"({"kind": "point_mass", "columns": [[0.8, 0.2], [0.3, 0.7]]})"),
      json::parse(R"({"kind": "atomic", "atoms": [{"weight": 0.5, "columns": [[1, 0], [0, 1]]},
                    {"weight": 0.5, "columns": [[0.5, 0.5], [0.5, 0.5]]}]})"),
      json::parse(R"({"kind": "dirichlet_columns", "alphas": [[1, 2], [2, 1]]})"),
      json::parse(R"({"kind": "self_similar", "alpha": [1, 1, 1]})"),
      json::parse(R"({"kind": "permutation_mix", "perms": [{"perm": [2, 1], "weight": 1}]})"),
      json::parse(R"({"kind": "permutation_mix", "uniform": true, "k": 3})"),
      json::parse(R"({"kind": "mixture", "components": [
                    {"weight": 0.5, "law": {"kind": "self_similar", "alpha": [1, 1]}},
                    {"weight": 0.5, "law": {"kind": "permutation_mix", "uniform": true, "k": 2}}]})")};
  for (const auto& j : specs) {
    const auto law = law_from_json(j);
    const auto again = law_from_json(law_to_json(law));
    CHECK(json_close(law_to_json(again), law_to_json(law)));
  }
  try {
    law_from_json(json::parse(
        R"({"kind": "atomic", "atoms": [{"weight": -1, "columns": [[1, 0], [0, 1]]}]})"));
    FAIL("expected InvalidInput");
  } catch (const InvalidInput& e) {
    CHECK(std::string(e.what()).find("law.atoms[0].weight") != std::string::npos);
  }
  CHECK_THROWS_AS(law_from_json(json::parse(R"({"kind": "nope"})")), InvalidInput);
  CHECK_THROWS_AS(law_from_json(json::parse(R"({"kind": "self_similar", "alpha": [1, 0]})")),
                  InvalidInput);
}
