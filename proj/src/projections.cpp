#include "efcp/projections.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "efcp/errors.hpp"
#include "efcp/tv_exact.hpp"

namespace efcp {

namespace {

std::size_t state_count(int n, int k) {
  const double states = std::pow(static_cast<double>(k), n);
  if (states > kProjectionStateBudget)
    throw BudgetExceeded("exact labeled chain: k^n states", states, kProjectionStateBudget);
  return static_cast<std::size_t>(std::llround(states));
}

std::vector<std::pair<StochasticMatrix, double>> support_of(const PaintboxLaw& law) {
  auto s = law.finite_support();
  if (!s) throw InvalidInput("exact labeled chain needs a law with finite support");
  return *s;
}

double tv(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  return tv_vectors(std::span<const double>(p.data(), static_cast<std::size_t>(p.size())),
                    std::span<const double>(q.data(), static_cast<std::size_t>(q.size())));
}

}  // namespace

ProjectedRun project_run(const ChainRun& run) {
  ProjectedRun out;
  out.base = run;
  for (const auto& [t, x] : run.trajectory) out.trajectory.emplace_back(t, project(x));
  if (run.law) {
    const auto r = is_rce(*run.law);
    out.markov = r.verdict == Verdict::yes;
    if (!out.markov)
      out.note = "driving law is not known to be RCE (" + to_string(r.verdict) +
                 "); the projection need not be Markov, diagnostic only";
  } else {
    out.note = "run has no paintbox law; projection is diagnostic only";
  }
  return out;
}

Eigen::VectorXd labeled_step(const std::vector<std::pair<StochasticMatrix, double>>& atoms, int n,
                             const Eigen::VectorXd& dist) {
  if (atoms.empty()) throw InvalidInput("labeled step: empty support");
  const int k = atoms.front().first.k();
  const auto total = static_cast<std::size_t>(dist.size());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(dist.size());
  std::vector<double> in_c(static_cast<std::size_t>(k));
  for (const auto& [s, w] : atoms) {
    Eigen::VectorXd v = dist;
    std::size_t stride = 1;
    for (int site = 0; site < n; ++site) {
      Eigen::VectorXd next(v.size());
      const std::size_t block = stride * static_cast<std::size_t>(k);
      for (std::size_t base = 0; base < total; base += block)
        for (std::size_t j = 0; j < stride; ++j) {
          for (int c = 0; c < k; ++c)
            in_c[static_cast<std::size_t>(c)] =
                v(static_cast<Eigen::Index>(base + static_cast<std::size_t>(c) * stride + j));
          for (int r = 0; r < k; ++r) {
            double acc = 0.0;
            for (int c = 0; c < k; ++c) acc += s(r, c) * in_c[static_cast<std::size_t>(c)];
            next(static_cast<Eigen::Index>(base + static_cast<std::size_t>(r) * stride + j)) = acc;
          }
        }
      v = std::move(next);
      stride = block;
    }
    out += w * v;
  }
  return out;
}

Eigen::MatrixXd labeled_kernel(const PaintboxLaw& law, int n) {
  const std::size_t states = state_count(n, law.k());
  const auto atoms = support_of(law);
  Eigen::MatrixXd p(static_cast<Eigen::Index>(states), static_cast<Eigen::Index>(states));
  for (std::size_t x = 0; x < states; ++x) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(states));
    e(static_cast<Eigen::Index>(x)) = 1.0;
    p.col(static_cast<Eigen::Index>(x)) = labeled_step(atoms, n, e);
  }
  return p;
}

Eigen::VectorXd labeled_stationary(const PaintboxLaw& law, int n) {
  const Eigen::MatrixXd p = labeled_kernel(law, n);
  const Eigen::Index s = p.rows();
  Eigen::MatrixXd a = p - Eigen::MatrixXd::Identity(s, s);
  a.row(s - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(s);
  b(s - 1) = 1.0;
  Eigen::VectorXd pi = a.partialPivLu().solve(b);
  if (!pi.allFinite() || (p * pi - pi).lpNorm<1>() > 1e-9 || pi.minCoeff() < -1e-12)
    throw Refusal("labeled chain has no unique stationary law");
  pi = pi.cwiseMax(0.0);
  return pi / pi.sum();
}

ProjectionMap projection_map(int n, int k) {
  const std::size_t states = state_count(n, k);
  ProjectionMap map;
  std::map<UnlabeledPartition, int> index;
  for (std::size_t x = 0; x < states; ++x) {
    auto part = project(coloring_at(x, n, k));
    auto [it, fresh] = index.emplace(part, static_cast<int>(map.partitions.size()));
    if (fresh) map.partitions.push_back(std::move(part));
    map.of_state.push_back(it->second);
  }
  return map;
}

Eigen::VectorXd push_forward(const ProjectionMap& map, const Eigen::VectorXd& dist) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(map.partitions.size()));
  for (std::size_t x = 0; x < map.of_state.size(); ++x)
    out(map.of_state[x]) += dist(static_cast<Eigen::Index>(x));
  return out;
}

double falling_factorial(int k, int r) {
  double v = 1.0;
  for (int i = 0; i < r; ++i) v *= k - i;
  return v;
}

double rce_kernel_identity_defect(const PaintboxLaw& law, int n) {
  const int k = law.k();
  const Eigen::MatrixXd p = labeled_kernel(law, n);
  const ProjectionMap map = projection_map(n, k);
  double worst = 0.0;
  for (Eigen::Index x = 0; x < p.cols(); ++x) {
    const Eigen::VectorXd q = push_forward(map, p.col(x));
    for (Eigen::Index y = 0; y < p.rows(); ++y) {
      const int b = map.of_state[static_cast<std::size_t>(y)];
      const int blocks = map.partitions[static_cast<std::size_t>(b)].block_count();
      worst = std::max(worst, std::abs(q(b) - falling_factorial(k, blocks) * p(y, x)));
    }
  }
  return worst;
}

ProjectionEquivalence projected_mixing_equivalence(const PaintboxLaw& law, int n,
                                                   const std::vector<double>& epsilons,
                                                   int m_max) {
  ProjectionEquivalence rep;
  rep.n = n;
  rep.k = law.k();
  rep.epsilons = epsilons;
  rep.rce = is_rce(law);
  if (rep.rce.verdict != Verdict::yes)
    throw Refusal("projected mixing times are compared only for RCE laws; is_rce: " +
                  to_string(rep.rce.verdict) + " (" + rep.rce.certificate + ")");
  if (n < 1) throw InvalidInput("n must be positive");
  for (double e : epsilons)
    if (!(e > 0.0 && e < 1.0)) throw InvalidInput("epsilon must be in (0, 1)");
  const int k = law.k();
  const auto atoms = support_of(law);
  const Eigen::VectorXd pi = labeled_stationary(law, n);
  const ProjectionMap map = projection_map(n, k);
  const Eigen::VectorXd pi_y = push_forward(map, pi);

  std::vector<Eigen::VectorXd> dists;
  for (const auto& counts : compositions(n, k)) {
    std::vector<std::uint8_t> word;
    for (int c = 0; c < k; ++c)
      word.insert(word.end(), static_cast<std::size_t>(counts[static_cast<std::size_t>(c)]),
                  static_cast<std::uint8_t>(c));
    Eigen::VectorXd d = Eigen::VectorXd::Zero(pi.size());
    d(static_cast<Eigen::Index>(coloring_index(Coloring(k, word)))) = 1.0;
    dists.push_back(std::move(d));
  }

  const double eps_min = epsilons.empty() ? 0.0 : *std::min_element(epsilons.begin(), epsilons.end());
  rep.t_labeled.assign(epsilons.size(), std::nullopt);
  rep.t_projected.assign(epsilons.size(), std::nullopt);
  for (int m = 0; m <= m_max; ++m) {
    if (m > 0)
      for (auto& d : dists) d = labeled_step(atoms, n, d);
    double tx = 0.0;
    double ty = 0.0;
    for (const auto& d : dists) {
      tx = std::max(tx, tv(d, pi));
      ty = std::max(ty, tv(push_forward(map, d), pi_y));
    }
    rep.labeled_tv.push_back(tx);
    rep.projected_tv.push_back(ty);
    if (m >= 1)
      for (std::size_t e = 0; e < epsilons.size(); ++e) {
        if (!rep.t_labeled[e] && tx < epsilons[e]) rep.t_labeled[e] = m;
        if (!rep.t_projected[e] && ty < epsilons[e]) rep.t_projected[e] = m;
      }
    if (m >= 1 && tx < eps_min && ty < eps_min) break;
  }
  rep.equal = rep.t_labeled == rep.t_projected &&
              std::all_of(rep.t_labeled.begin(), rep.t_labeled.end(),
                          [](const auto& t) { return t.has_value(); });
  rep.monotone = true;
  for (std::size_t m = 0; m < rep.labeled_tv.size(); ++m)
    if (rep.projected_tv[m] > rep.labeled_tv[m] + 1e-12) rep.monotone = false;
  return rep;
}

}  // namespace efcp
