#include <doctest.h>

#include <cmath>

#include "efcp/ehrenfest.hpp"
#include "efcp/errors.hpp"
#include "efcp/numerics.hpp"

using namespace efcp;

TEST_CASE("standard chain: stationary law is Binomial(n, 1/2)") {
  const auto p = EhrenfestParams::make_standard(30);
  const auto w = ehrenfest_stationary_weights(p);
  REQUIRE(w.size() == 31);
  for (int x = 0; x <= 30; ++x)
    CHECK(w[x] == doctest::Approx(std::exp(log_binomial_pmf(30, x, 0.5))).epsilon(1e-12));
}

TEST_CASE("stationary law is invariant") {
  for (const auto& p : {EhrenfestParams{40, 0.25, false}, EhrenfestParams{16, 0.5, false},
                        EhrenfestParams{12, 0.9, false}}) {
    const auto pi = ehrenfest_stationary_weights(p);
    double total = 0.0;
    for (double v : pi) total += v;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    // From W_0 = 0 the law converges to pi.
    const auto late = ehrenfest_weight_law(p, 400);
    CHECK(tv_vectors(late, pi) < 1e-12);
  }
}

TEST_CASE("single-site route through the refreshed count") {
  for (int n : {8, 33, 100}) {
    const auto p = EhrenfestParams::make_standard(n);
    for (int t : {0, 1, 5, n, 3 * n}) {
      CHECK(ehrenfest_tv_via_unrefreshed(p, t).value ==
            doctest::Approx(ehrenfest_tv_exact(p, t).value).epsilon(1e-11));
    }
  }
  CHECK_THROWS_AS(ehrenfest_tv_via_unrefreshed({20, 0.25, false}, 3), InvalidInput);
}

TEST_CASE("refreshed count law") {
  const EhrenfestParams p{50, 0.2, false};
  for (int t : {0, 1, 4, 12}) {
    const auto law = unrefreshed_law(p, t);
    double mean = 0.0, total = 0.0;
    for (std::size_t r = 0; r < law.size(); ++r) {
      mean += r * law[r];
      total += law[r];
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mean == doctest::Approx(50.0 * std::pow(0.8, t)).epsilon(1e-10));
    // P(R_t > 0) bounds the distance (coupling inequality).
    CHECK(ehrenfest_tv_exact(p, t).value <= 1.0 - law[0] + 1e-12);
  }
}

TEST_CASE("exact weight law agrees with simulation") {
  const EhrenfestParams p{30, 0.2, false};
  const int t = 4, reps = 20000;
  const auto law = ehrenfest_weight_law(p, t);
  double mean = 0.0, var = 0.0;
  for (std::size_t w = 0; w < law.size(); ++w) mean += w * law[w];
  for (std::size_t w = 0; w < law.size(); ++w) var += (w - mean) * (w - mean) * law[w];
  double sim = 0.0;
  for (int r = 0; r < reps; ++r) {
    const auto run = run_ehrenfest(p, Coloring::constant(30, 2, 0), {t, 3, static_cast<std::uint64_t>(r), t, false});
    sim += run.final_state().counts()[1];
  }
  sim /= reps;
  CHECK(std::abs(sim - mean) < 5.0 * std::sqrt(var / reps));
}

TEST_CASE("closed-form bounds") {
  const EhrenfestParams p{64, 1.0 / 16, false};
  for (int t = 0; t <= 400; t += 7)
    CHECK(ehrenfest_tv_exact(p, t).value < ehrenfest_upper_bound(p, t));
  const auto b = ehrenfest_bounds(p, 10.0, 1.0);
  CHECK(b.upper == doctest::Approx(64.0 * std::pow(1.0 - 4.0 / 64, 10.0)));
  CHECK(b.upper_time == doctest::Approx(8.0 * std::log(64.0) + 16.0));
  CHECK(b.upper_at_upper_time == doctest::Approx(std::exp(-1.0) / 8.0));
  REQUIRE(b.lower);
  CHECK(*b.lower == doctest::Approx(1.0 - 8.0 * std::exp(-1.0)));
  CHECK_THROWS_AS(ehrenfest_lower_bound({64, 0.75, false}, 1.0), Refusal);
  CHECK_FALSE(ehrenfest_bounds({64, 0.75, false}, 1.0, 1.0).lower);
}

TEST_CASE("log log schedule") {
  CHECK_THROWS_AS(loglog_alpha(2), InvalidInput);
  for (int n : {16, 256, 4096}) {
    const double alpha = loglog_alpha(n);
    CHECK(alpha == doctest::Approx(1.0 - std::exp(-std::log(n) / std::log(std::log(n)))));
    const EhrenfestParams p{n, alpha, false};
    for (double beta : {0.5, 1.0, 2.0}) {
      const double t = loglog_time(n, beta);
      // With the unrounded alpha n the bound is n^{-beta}; flooring alpha n
      // can only raise it.
      CHECK(n * std::pow(1.0 - alpha, t) == doctest::Approx(std::pow(n, -beta)).epsilon(1e-9));
      CHECK(ehrenfest_tv_exact(p, static_cast<int>(std::ceil(t))).value <=
            ehrenfest_upper_bound(p, std::ceil(t)));
    }
  }
}

TEST_CASE("curve is nonincreasing") {
  const auto c = ehrenfest_tv_curve(EhrenfestParams::make_standard(128), 2000);
  REQUIRE(c.size() == 2001);
  CHECK(c[0] == doctest::Approx(1.0));
  for (std::size_t t = 1; t < c.size(); ++t) CHECK(c[t] <= c[t - 1] + 1e-14);
}
