// Acceptance suite: one PASS/FAIL line per criterion.
//
// Usage: efcp_acceptance [criterion numbers...]   (default: all)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>

#include "efcp/chains.hpp"
#include "efcp/ehrenfest.hpp"
#include "efcp/mixing.hpp"
#include "efcp/paintbox.hpp"
#include "efcp/partitions.hpp"
#include "efcp/products.hpp"
#include "efcp/projections.hpp"
#include "efcp/tv_exact.hpp"
#include "efcp/tv_mc.hpp"
#include "test_util.hpp"
#include "tv_oracles.hpp"

using namespace efcp;
using efcp::testing::random_coloring;
using efcp::testing::random_partition_matrix;
using efcp::testing::random_stochastic;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

std::size_t power(int k, int n) {
  std::size_t p = 1;
  for (int i = 0; i < n; ++i) p *= static_cast<std::size_t>(k);
  return p;
}

// --------------------------------------------------------------------- 1

Outcome construction_equivalence() {
  std::mt19937_64 gen(101);
  double worst = 0.0;
  long checks = 0;
  for (int k = 2; k <= 3; ++k)
    for (int n = 1; n <= 4; ++n) {
      const int laws = 3;
      std::vector<StochasticMatrix> atoms;
      std::vector<double> first_weight;
      for (int l = 0; l < laws; ++l) {
        atoms.push_back(random_stochastic(k, gen, 0.0));
        atoms.push_back(random_stochastic(k, gen, 0.0));
        first_weight.push_back(std::uniform_real_distribution<double>(0.1, 0.9)(gen));
      }
      // One-step kernels of the matrix construction, by enumerating every
      // partition matrix M with its probability mu_S(M).
      const std::size_t states = power(k, n);
      std::vector<Coloring> cs;
      for (std::size_t x = 0; x < states; ++x) cs.push_back(coloring_at(x, n, k));
      std::vector<Eigen::MatrixXd> kernel(atoms.size(), Eigen::MatrixXd::Zero(states, states));
      std::vector<std::size_t> idx(static_cast<std::size_t>(k), 0);
      while (true) {
        std::vector<Coloring> cols;
        for (auto i : idx) cols.push_back(cs[i]);
        const auto m = PartitionMatrix::from_columns(cols);
        std::vector<double> pr(atoms.size());
        for (std::size_t a = 0; a < atoms.size(); ++a) pr[a] = partition_matrix_probability(atoms[a], m);
        for (std::size_t x = 0; x < states; ++x) {
          const std::size_t y = coloring_index(act(m, cs[x]));
          for (std::size_t a = 0; a < atoms.size(); ++a) kernel[a](y, x) += pr[a];
        }
        std::size_t j = 0;
        while (j < idx.size() && ++idx[j] == states) idx[j++] = 0;
        if (j == idx.size()) break;
      }
      for (int l = 0; l < laws; ++l) {
        const std::vector<double> w{first_weight[l], 1.0 - first_weight[l]};
        for (std::size_t x0 = 0; x0 < states; ++x0)
          for (int steps = 0; steps <= 3; ++steps) {
            Eigen::VectorXd mix_matrix = Eigen::VectorXd::Zero(states);
            Eigen::VectorXd mix_joint = Eigen::VectorXd::Zero(states);
            for (std::size_t seq = 0; seq < power(2, steps); ++seq) {
              Eigen::VectorXd dist = Eigen::VectorXd::Zero(states);
              dist(x0) = 1.0;
              Eigen::MatrixXd q = Eigen::MatrixXd::Identity(k, k);
              double weight = 1.0;
              for (int t = 0; t < steps; ++t) {
                const std::size_t a = (seq >> t) & 1u;
                dist = kernel[2 * l + a] * dist;
                q = atoms[2 * l + a].matrix() * q;
                weight *= w[a];
              }
              // Joint law given the paintboxes: prod_i Q_m(y_i, x0_i).
              Eigen::VectorXd joint(states);
              for (std::size_t y = 0; y < states; ++y) {
                double p = 1.0;
                for (int i = 0; i < n; ++i) p *= q(cs[y][i], cs[x0][i]);
                joint(y) = p;
              }
              worst = std::max(worst, (dist - joint).cwiseAbs().maxCoeff());
              mix_matrix += weight * dist;
              mix_joint += weight * joint;
              ++checks;
            }
            worst = std::max(worst, (mix_matrix - mix_joint).cwiseAbs().maxCoeff());
          }
      }
    }
  return {worst <= 1e-12, std::to_string(checks) + " conditional laws, max deviation " + fmt(worst)};
}

// --------------------------------------------------------------------- 2

Outcome monoid_suite() {
  long failures = 0, checks = 0;
  const auto all = efcp::testing::all_partition_matrices(2, 2);
  const auto id = PartitionMatrix::identity(2, 2);
  for (const auto& a : all) {
    failures += !(id * a == a) + !(a * id == a);
    for (std::size_t x = 0; x < 4; ++x) failures += !(act(id, coloring_at(x, 2, 2)) == coloring_at(x, 2, 2));
    for (const auto& b : all) {
      for (std::size_t x = 0; x < 4; ++x) {
        const auto c = coloring_at(x, 2, 2);
        failures += !(act(a * b, c) == act(a, act(b, c)));
      }
      for (const auto& c : all) {
        failures += !((a * b) * c == a * (b * c));
        ++checks;
      }
    }
  }
  std::mt19937_64 gen(202);
  for (int rep = 0; rep < 10000; ++rep) {
    const int n = 1 + static_cast<int>(gen() % 8);
    const int k = 1 + static_cast<int>(gen() % 4);
    const auto a = random_partition_matrix(n, k, gen);
    const auto b = random_partition_matrix(n, k, gen);
    const auto c = random_partition_matrix(n, k, gen);
    const auto x = random_coloring(n, k, gen);
    const auto idn = PartitionMatrix::identity(n, k);
    failures += !((a * b) * c == a * (b * c));
    failures += !(idn * a == a) + !(a * idn == a);
    failures += !(act(idn, x) == x);
    failures += !(act(a * b, x) == act(a, act(b, x)));
    ++checks;
  }
  return {failures == 0, std::to_string(checks) + " instances, " + std::to_string(failures) + " failures"};
}

// --------------------------------------------------------------------- 3

std::vector<double> random_probs(int k, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> d(0.01, 1.0);
  std::vector<double> p(static_cast<std::size_t>(k));
  double t = 0.0;
  for (auto& v : p) t += (v = d(gen));
  for (auto& v : p) v /= t;
  return p;
}

Outcome tv_oracles() {
  std::mt19937_64 gen(303);
  double worst = 0.0;
  int instances = 0;
  for (int k = 2; k <= kMaxColors; ++k)
    for (int n = 1; power(k, n) <= 4096; ++n) {
      for (int rep = 0; rep < 3; ++rep) {
        // Random block sizes; on the last repetition the laws share all
        // blocks but one.
        ProductMultinomialLaw p, q;
        int left = n;
        while (left > 0) {
          const int s = 1 + static_cast<int>(gen() % static_cast<unsigned>(left));
          p.blocks.push_back({s, random_probs(k, gen)});
          q.blocks.push_back(rep == 2 ? p.blocks.back() : MultinomialBlock{s, random_probs(k, gen)});
          left -= s;
        }
        if (rep == 2) q.blocks.front().probs = random_probs(k, gen);
        const double brute = tv_vectors(efcp::testing::full_law(p), efcp::testing::full_law(q));
        worst = std::max(worst, std::abs(tv_exact_product_multinomial(p, q).value - brute));
        ++instances;
      }
      // Two-atom mixture laws of the chain.
      const auto law = PaintboxLaw::atomic(
          {random_stochastic(k, gen, 0.01), random_stochastic(k, gen, 0.01)}, {0.3, 0.7});
      const auto x0 = random_coloring(n, k, gen);
      const auto x1 = random_coloring(n, k, gen);
      for (int m = 0; m <= 2; ++m) {
        const double brute = tv_vectors(efcp::testing::full_chain_law(law, x0, m),
                                        efcp::testing::full_chain_law(law, x1, m));
        worst = std::max(worst, std::abs(tv_exact_atomic(law, x0, x1, m).value - brute));
        ++instances;
      }
    }
  return {worst <= 1e-10,
          std::to_string(instances) + " instances with k^n <= 4096, max deviation " + fmt(worst)};
}

// --------------------------------------------------------------------- 4

double second_eigen_modulus(const StochasticMatrix& s) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(s.matrix());
  std::vector<double> mod;
  for (int i = 0; i < s.k(); ++i) mod.push_back(std::abs(es.eigenvalues()(i)));
  std::sort(mod.rbegin(), mod.rend());
  return mod[1];
}

Outcome lyapunov_point_masses() {
  std::mt19937_64 gen(404);
  double worst = 0.0, worst_trace = 0.0;
  for (int i = 0; i < 20; ++i) {
    const int k = 2 + i % 3;
    const auto s = random_stochastic(k, gen, 0.0);
    const auto est = estimate_lyapunov(PaintboxLaw::point_mass(s), {10000, 1, 0, 0});
    worst = std::max(worst, std::abs(est.lambda1 - second_eigen_modulus(s)));
    if (k == 2) worst_trace = std::max(worst_trace, std::abs(est.lambda1 - std::abs(s(0, 0) + s(1, 1) - 1.0)));
  }
  return {worst <= 1e-6 && worst_trace <= 1e-6,
          "20 matrices, max |lambda1 - eigen oracle| " + fmt(worst) + ", k = 2 max |lambda1 - |tr - 1|| " +
              fmt(worst_trace)};
}

// --------------------------------------------------------------------- 5

Outcome spectrum_determinant() {
  // Pathwise exponents of the QR walk, log_r_sums / m, against the product of
  // per-step determinants; det(S|V) = det(S) because S fixes the quotient by
  // the ones direction.
  double worst = 0.0, worst_short = 0.0;
  for (int path = 0; path < 100; ++path) {
    const int k = 2 + path % 4;
    const int m = 200;
    const auto law = PaintboxLaw::self_similar(std::vector<double>(static_cast<std::size_t>(k), 1.0));
    const auto seq = sample_paintbox_sequence(law, m, 505, static_cast<std::uint64_t>(path));
    ProductState st(k);
    double log_det = 0.0;
    Eigen::MatrixXd q = Eigen::MatrixXd::Identity(k, k);
    for (int t = 0; t < m; ++t) {
      st.step(seq[t]);
      log_det += std::log(std::abs(seq[t].matrix().determinant()));
      if (t < 4) q = seq[t].matrix() * q;
      if (t == 3) {
        double s4 = 0.0;
        for (double v : st.log_r_sums()) s4 += v;
        worst_short = std::max(worst_short, std::abs(std::exp(s4) / std::abs(q.determinant()) - 1.0));
      }
    }
    double sum_exponents = 0.0;
    for (double v : st.log_r_sums()) sum_exponents += v / m;
    worst = std::max(worst, std::abs(std::expm1(sum_exponents * m - log_det)));
  }
  return {worst <= 1e-8 && worst_short <= 1e-8,
          "100 paths of 200 steps, max relative deviation " + fmt(worst) + " (direct det on 4-step prefixes " +
              fmt(worst_short) + ")"};
}

// --------------------------------------------------------------------- 6

Outcome ehrenfest_bounds_check() {
  long checks = 0, failures = 0;
  std::string note;
  for (int n : {64, 256})
    for (double alpha : {1.0 / 16, 1.0 / 4}) {
      const EhrenfestParams p{n, alpha, false};
      const double t_top = ehrenfest_upper_time(p, 3.0);
      const int t_max = static_cast<int>(std::ceil(2.0 * t_top));
      const auto curve = ehrenfest_tv_curve(p, t_max);
      for (int t = 0; t <= t_max; ++t) {
        ++checks;
        if (!(curve[t] < ehrenfest_upper_bound(p, t))) ++failures;
      }
      for (double beta : {1.0, 2.0, 3.0}) {
        // The chain moves at integer times; the bound at real t also holds
        // at ceil(t) because n (1 - a/n)^t is decreasing.
        const int t = static_cast<int>(std::ceil(ehrenfest_upper_time(p, beta)));
        const double bound = std::exp(-beta) / std::sqrt(double(n));
        ++checks;
        if (!(curve[t] < bound)) {
          ++failures;
          note += " n=" + std::to_string(n) + " alpha=" + fmt(alpha) + " beta=" + fmt(beta);
        }
      }
    }
  return {failures == 0, std::to_string(checks) + " strict inequalities, " + std::to_string(failures) + " failures" + note};
}

// --------------------------------------------------------------------- 7

Outcome standard_ehrenfest_bracket() {
  const int n = 512;
  const auto p = EhrenfestParams::make_standard(n);
  const double scale = n * std::log(double(n));
  // TV is nonincreasing in t, so floor for the early claim and ceil for the
  // late one are the readings most favorable to the criterion.
  const int early = static_cast<int>(std::floor(0.4 * scale));
  const int late = static_cast<int>(std::ceil(0.6 * scale));
  const double tv_early = ehrenfest_tv_exact(p, early).value;
  const double tv_late = ehrenfest_tv_exact(p, late).value;
  // Cross-check through the refreshed-count route.
  const double alt_early = ehrenfest_tv_via_unrefreshed(p, early).value;
  const double alt_late = ehrenfest_tv_via_unrefreshed(p, late).value;
  const bool agree = std::abs(alt_early - tv_early) < 1e-10 && std::abs(alt_late - tv_late) < 1e-10;
  return {tv_early > 0.9 && tv_late < 0.1 && agree,
          "TV(" + std::to_string(early) + ") = " + fmt(tv_early) + " (need > 0.9), TV(" + std::to_string(late) +
              ") = " + fmt(tv_late) + " (need < 0.1); second route agrees: " + (agree ? "yes" : "no")};
}

// --------------------------------------------------------------------- 8

Outcome cutoff_slopes(double& seconds_budget_note) {
  std::vector<int> grid;
  for (int e = 6; e <= 12; ++e) grid.push_back(1 << e);
  CutoffOptions co;
  co.mixing.replicates = 10000;
  const auto t0 = std::chrono::steady_clock::now();
  const auto rep = cutoff_experiment(PaintboxLaw::self_similar({1.0, 1.0}), grid, 0.25, co);
  seconds_budget_note = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::string windows;
  for (const auto& r : rep.rows) windows += " " + fmt(r.window_ratio, 3);
  const bool fast = seconds_budget_note < 1800.0;
  return {rep.slope_late_ok && rep.slope_early_ok && rep.window_decreasing && fast,
          "theta_hat " + fmt(rep.theta_hat) + " (lambda1_hat " + fmt(rep.lyapunov.lambda1) + "), slope(0.25) " +
              fmt(rep.fit_late.slope) + " [" + fmt(rep.fit_late.slope_ci_lo) + ", " + fmt(rep.fit_late.slope_ci_hi) +
              "], slope(0.75) " + fmt(rep.fit_early.slope) + " [" + fmt(rep.fit_early.slope_ci_lo) + ", " +
              fmt(rep.fit_early.slope_ci_hi) + "], window ratios" + windows};
}

// --------------------------------------------------------------------- 9

Outcome log_scaling() {
  const auto law = PaintboxLaw::atomic({StochasticMatrix::from_columns({{0.9, 0.1}, {0.2, 0.8}}),
                                        StochasticMatrix::from_columns({{0.7, 0.3}, {0.1, 0.9}})},
                                       {0.5, 0.5});
  MixingOptions mo;
  mo.replicates = 10000;
  std::vector<double> x, y;
  std::string ts;
  for (int e = 6; e <= 12; ++e) {
    const int n = 1 << e;
    const auto r = mixing_time(law, n, 0.25, MixingMethod::sandwich, mo);
    if (!r.t_mix) return {false, "no certified t_mix at n = " + std::to_string(n)};
    x.push_back(std::log(double(n)));
    y.push_back(*r.t_mix);
    ts += " " + std::to_string(*r.t_mix);
  }
  // t = a + b log n + c (log n)^2; c tested against 0 with a t test on the
  // residual variance.
  const int rows = static_cast<int>(x.size());
  Eigen::MatrixXd a(rows, 3);
  Eigen::VectorXd b(rows);
  for (int i = 0; i < rows; ++i) {
    a(i, 0) = 1.0;
    a(i, 1) = x[i];
    a(i, 2) = x[i] * x[i];
    b(i) = y[i];
  }
  const Eigen::VectorXd coef = a.colPivHouseholderQr().solve(b);
  const double rss = (a * coef - b).squaredNorm();
  const int dof = rows - 3;
  const Eigen::MatrixXd cov = (a.transpose() * a).inverse() * (rss / dof);
  const double se_c = std::sqrt(cov(2, 2));
  const double t_crit = boost::math::quantile(boost::math::complement(boost::math::students_t(dof), 0.025));
  const double t_stat = se_c > 0.0 ? std::abs(coef(2)) / se_c : (coef(2) == 0.0 ? 0.0 : INFINITY);
  double c_max = 0.0;
  for (int i = 0; i < rows; ++i) c_max = std::max(c_max, y[i] / x[i]);
  return {t_stat < t_crit,
          "t_mix(0.25) over n = 2^6..2^12:" + ts + "; quadratic coefficient " + fmt(coef(2)) + ", |t| = " +
              fmt(t_stat) + " < " + fmt(t_crit) + "; t_mix <= " + fmt(c_max) + " log n"};
}

// -------------------------------------------------------------------- 10

Outcome rank_one_mixing() {
  const auto law = PaintboxLaw::atomic({StochasticMatrix::uniform(2), StochasticMatrix::identity(2)}, {0.5, 0.5});
  MixingOptions mo;
  mo.replicates = 10000;
  std::set<int> values;
  std::string ts;
  for (int e = 4; e <= 10; ++e) {
    const auto r = mixing_time(law, 1 << e, 0.25, MixingMethod::sandwich, mo);
    if (!r.t_mix) return {false, "no certified t_mix at n = " + std::to_string(1 << e)};
    values.insert(*r.t_mix);
    ts += " " + std::to_string(*r.t_mix);
  }
  return {values.size() == 1, "t_mix(0.25) over n = 2^4..2^10:" + ts};
}

// -------------------------------------------------------------------- 11

Outcome projection_equivalence() {
  std::mt19937_64 gen(1111);
  int instances = 0, mismatches = 0, not_monotone = 0;
  for (int k = 2; k <= 5; ++k) {
    std::vector<PaintboxLaw> laws{lazy_permutations(k, 0.2), lazy_permutations(k, 0.7)};
    laws.push_back(rce_closure(random_stochastic(k, gen, 0.0)));
    for (const auto& law : laws)
      for (int n = 2; power(k, n) <= 1024; ++n) {
        const auto rep = projected_mixing_equivalence(law, n, {0.5, 0.25});
        ++instances;
        mismatches += !rep.equal;
        not_monotone += !rep.monotone;
      }
  }
  return {mismatches == 0 && not_monotone == 0,
          std::to_string(instances) + " RCE instances (k = 2..5), " + std::to_string(mismatches) +
              " mixing-time mismatches, " + std::to_string(not_monotone) + " pushforward violations"};
}

// -------------------------------------------------------------------- 12

Outcome trend_suite() {
  // Two coordinates at 1/2 +- gap / 2, inside [delta, 1 - delta].
  auto tv_at = [](int n, double gap) {
    const ProductMultinomialLaw p{{{n, {0.5 - gap / 2, 0.5 + gap / 2}}}};
    const ProductMultinomialLaw q{{{n, {0.5 + gap / 2, 0.5 - gap / 2}}}};
    return tv_exact_product_multinomial(p, q).value;
  };
  std::vector<double> near, far;
  for (int n : {100, 1000, 10000}) {
    near.push_back(tv_at(n, std::pow(n, -0.6)));
    far.push_back(tv_at(n, std::pow(n, -0.4)));
  }
  const bool near_trend = near[0] > near[1] && near[1] > near[2];
  const bool far_trend = far[0] < far[1] && far[1] < far[2];
  const bool near_end = near[2] <= 0.05;
  const bool far_end = far[2] >= 0.95;
  return {near_trend && far_trend && near_end && far_end,
          "gap n^-0.6: " + fmt(near[0]) + ", " + fmt(near[1]) + ", " + fmt(near[2]) + " (decreasing " +
              (near_trend ? "yes" : "no") + ", within 0.05 of 0 " + (near_end ? "yes" : "no") + "); gap n^-0.4: " +
              fmt(far[0]) + ", " + fmt(far[1]) + ", " + fmt(far[2]) + " (increasing " + (far_trend ? "yes" : "no") +
              ", within 0.05 of 1 " + (far_end ? "yes" : "no") + ")"};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
  double cutoff_seconds = 0.0;
  struct Criterion {
    int id;
    std::string name;
    double limit_seconds;  // 0: no runtime requirement
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "construction equivalence", 10, construction_equivalence},
      {2, "monoid and action suite", 0, monoid_suite},
      {3, "TV oracle equivalence", 60, tv_oracles},
      {4, "Lyapunov exponents of point masses", 0, lyapunov_point_masses},
      {5, "spectrum-determinant identity", 0, spectrum_determinant},
      {6, "Ehrenfest exact bounds", 120, ehrenfest_bounds_check},
      {7, "standard Ehrenfest cutoff bracket", 120, standard_ehrenfest_bracket},
      {8, "cutoff slope", 1800, [&] { return cutoff_slopes(cutoff_seconds); }},
      {9, "O(log n) scaling", 600, log_scaling},
      {10, "rank-one O(1) mixing", 0, rank_one_mixing},
      {11, "projection equivalence", 0, projection_equivalence},
      {12, "multiTV / bigBernoulliTV trends", 0, trend_suite}};
  int failed = 0;
  for (const auto& c : criteria) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool pass = o.pass;
    if (c.limit_seconds > 0 && secs >= c.limit_seconds) {
      pass = false;
      o.detail += "; runtime limit " + fmt(c.limit_seconds) + " s exceeded";
    }
    std::printf("%s %2d %s: %s [%.1f s]\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !pass;
  }
  return failed == 0 ? 0 : 1;
}
