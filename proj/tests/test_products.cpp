#include <doctest.h>

#include <cmath>

#include "efcp/chains.hpp"
#include "efcp/products.hpp"
#include "test_util.hpp"

using namespace efcp;

TEST_CASE("Helmert basis") {
  for (int k = 2; k <= 6; ++k) {
    const auto h = helmert_basis(k);
    CHECK((h.transpose() * h - Eigen::MatrixXd::Identity(k - 1, k - 1)).norm() < 1e-14);
    CHECK((Eigen::VectorXd::Ones(k).transpose() * h).norm() < 1e-14);
  }
}

TEST_CASE("restriction to V is at most a contraction") {
  std::mt19937_64 gen(1);
  for (int rep = 0; rep < 200; ++rep) {
    const int k = 2 + rep % 4;
    const auto s = efcp::testing::random_stochastic(k, gen, 0.0);
    CHECK(top_singular_on_V(s) <= 1.0 + 1e-10);
  }
  CHECK(top_singular_on_V(StochasticMatrix::identity(3)) == doctest::Approx(1.0));
  CHECK(top_singular_on_V(StochasticMatrix::uniform(3)) < 1e-14);
}

TEST_CASE("simplex diameter shrinks along products") {
  const auto law = PaintboxLaw::self_similar({0.5, 0.5, 0.5});
  const auto seq = sample_paintbox_sequence(law, 60, 4);
  StochasticMatrix q = StochasticMatrix::identity(3);
  double prev = simplex_diameter(q);
  CHECK(prev == doctest::Approx(std::sqrt(2.0)));
  for (const auto& s : seq) {
    q = s * q;
    const double d = simplex_diameter(q);
    CHECK(d <= prev + 1e-15);
    prev = d;
  }
}

TEST_CASE("point mass exponents match the eigenvalues") {
  const auto s = StochasticMatrix::from_columns({{0.8, 0.2}, {0.3, 0.7}});
  const auto est = estimate_lyapunov(PaintboxLaw::point_mass(s), {2000, 2, 0, 0});
  CHECK(est.lambda1 == doctest::Approx(std::abs(0.8 + 0.7 - 1.0)).epsilon(1e-9));
  CHECK(est.kappa_hat == doctest::Approx(std::log(0.5)).epsilon(1e-12));
}

TEST_CASE("sum of log factors equals log det on V") {
  // S preserves V and fixes the quotient by 1, so det(S|V) = det(S). A
  // direct determinant of a long product loses every digit to cancellation,
  // so long paths are checked against the sum of per-step determinants.
  const auto law = PaintboxLaw::self_similar({1.0, 1.0, 1.0, 1.0});
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto seq = sample_paintbox_sequence(law, 300, seed);
    ProductState st(4);
    double per_step = 0.0;
    for (const auto& s : seq) {
      st.step(s);
      per_step += std::log(std::abs(s.matrix().determinant()));
    }
    double sum = 0.0;
    for (double v : st.log_r_sums()) sum += v;
    CHECK(sum == doctest::Approx(per_step).epsilon(1e-10));
  }
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto seq = sample_paintbox_sequence(law, 3, seed);
    ProductState st(4);
    Eigen::MatrixXd q = Eigen::MatrixXd::Identity(4, 4);
    for (const auto& s : seq) {
      st.step(s);
      q = s.matrix() * q;
    }
    const auto h = helmert_basis(4);
    const double direct = std::log(std::abs((h.transpose() * q * h).determinant()));
    double sum = 0.0;
    for (double v : st.log_r_sums()) sum += v;
    CHECK(sum == doctest::Approx(direct).epsilon(1e-10));
  }
}

TEST_CASE("rank-one factor collapses the frame") {
  ProductState st(3);
  st.step(StochasticMatrix::uniform(3));
  CHECK(st.degenerate());
  for (double v : st.log_r_sums()) CHECK(std::isinf(v));
  const auto est = estimate_lyapunov(PaintboxLaw::point_mass(StochasticMatrix::uniform(3)),
                                     {50, 2, 0, 0});
  CHECK(est.lambda1 == 0.0);
  CHECK(std::find(est.flags.begin(), est.flags.end(), "super_exponential_collapse") !=
        est.flags.end());
}

TEST_CASE("bump weights") {
  const auto w = bump_weights(100);
  double total = 0.0;
  for (double v : w) {
    CHECK(v >= 0.0);
    total += v;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(w[49] > w[0]);
}

TEST_CASE("dirichlet paths collapse") {
  const auto law = PaintboxLaw::self_similar({1.0, 1.0});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto seq = sample_paintbox_sequence(law, 500, seed);
    StochasticMatrix q = StochasticMatrix::identity(2);
    for (const auto& s : seq) q = s * q;
    CHECK(std::pow(simplex_diameter(q), 1.0 / 500) < 1.0);
  }
  const auto rep = collapse_diagnostic(law);
  CHECK(rep.verdict() == "yes");
  CHECK(rep.first_m >= 1);
  const auto id = collapse_diagnostic(PaintboxLaw::point_mass(StochasticMatrix::identity(2)));
  CHECK(id.verdict() == "undetermined");
  const auto perm = collapse_diagnostic(PaintboxLaw::uniform_permutations(3));
  CHECK(perm.verdict() == "undetermined");
}

TEST_CASE("lyapunov trace and determinism") {
  const auto law = PaintboxLaw::self_similar({1.0, 1.0, 1.0});
  const auto a = estimate_lyapunov(law, {300, 4, 5, 50});
  const auto b = estimate_lyapunov(law, {300, 4, 5, 50});
  CHECK(a.lambda1 == b.lambda1);
  CHECK(a.trace.size() == 6);
  CHECK(a.lambda1 > 0.0);
  CHECK(a.lambda1 < 1.0);
  CHECK(a.spectrum.size() == 2);
  CHECK(a.spectrum[0] >= a.spectrum[1]);
}
