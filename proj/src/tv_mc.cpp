#include "efcp/tv_mc.hpp"

#include <algorithm>
#include <cmath>

#include "efcp/errors.hpp"
#include "efcp/numerics.hpp"
#include "efcp/parallel.hpp"

namespace efcp {

namespace {

TVEstimate summarize(const std::vector<double>& values, TVKind kind) {
  TVEstimate est;
  est.kind = kind;
  est.replicates = static_cast<int>(values.size());
  if (values.empty()) return est;
  CompensatedSum s;
  for (double v : values) s += v;
  const double n = static_cast<double>(values.size());
  const double mean = s.value() / n;
  if (values.size() > 1) {
    CompensatedSum ss;
    for (double v : values) ss += (v - mean) * (v - mean);
    est.mc_std_error = std::sqrt(ss.value() / (n - 1.0) / n);
  }
  est.value = std::clamp(mean, 0.0, 1.0);
  return est;
}

StochasticMatrix product_at(const PaintboxLaw& law, int m, std::uint64_t seed, std::uint64_t r) {
  RngStream rng(seed, r);
  StochasticMatrix q = StochasticMatrix::identity(law.k());
  for (int t = 0; t < m; ++t) q = law.sample(rng) * q;
  return q;
}

// Binomial(n, p) pmf on a window holding all but a negligible tail.
struct WindowPmf {
  int lo = 0;
  std::vector<double> pmf;
  int hi() const { return lo + static_cast<int>(pmf.size()) - 1; }
  double at(int x) const {
    return x < lo || x > hi() ? 0.0 : pmf[static_cast<std::size_t>(x - lo)];
  }
};

WindowPmf window_pmf(int n, double p) {
  const double mean = n * p;
  const double sd = std::sqrt(n * p * (1.0 - p));
  WindowPmf w;
  w.lo = std::max(0, static_cast<int>(std::floor(mean - 10.0 * sd - 1.0)));
  const int hi = std::min(n, static_cast<int>(std::ceil(mean + 10.0 * sd + 1.0)));
  for (int x = w.lo; x <= hi; ++x) w.pmf.push_back(std::exp(log_binomial_pmf(n, x, p)));
  return w;
}

struct Candidate {
  int i;
  int j;
  int color;
};

void require_design(const Coloring& x0, const Coloring& x0_tilde, int k) {
  if (x0.n() != x0_tilde.n() || x0.k() != k || x0_tilde.k() != k)
    throw InvalidInput("lower bound: initial states disagree with the law on n or k");
  const BlockDesign d = make_block_design(x0.n(), k);
  if (!(d.x0 == x0 && d.x0_tilde == x0_tilde))
    throw Refusal("lower bound needs the paired block design as initial states");
}

}  // namespace

BlockDesign make_block_design(int n, int k) {
  if (k < 2 || k > kMaxColors) throw InvalidInput("block design: k must be in [2, 16]");
  const int blocks = k * (k - 1);
  const int n_prime = n / (2 * blocks);
  if (n_prime < 1)
    throw InvalidInput("block design: n must be at least 2k(k-1) = " +
                       std::to_string(2 * blocks));
  BlockDesign d;
  d.n = n;
  d.k = k;
  d.n_prime = n_prime;
  std::vector<std::uint8_t> a(static_cast<std::size_t>(n), 0);
  std::vector<std::uint8_t> b(static_cast<std::size_t>(n), 0);
  int site = 0;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      if (i == j) continue;
      d.pairs.emplace_back(i, j);
      d.block_start.push_back(site);
      for (int s = 0; s < 2 * n_prime; ++s, ++site) {
        a[static_cast<std::size_t>(site)] = static_cast<std::uint8_t>(i);
        b[static_cast<std::size_t>(site)] = static_cast<std::uint8_t>(s < n_prime ? i : j);
      }
    }
  d.x0 = Coloring(k, std::move(a));
  d.x0_tilde = Coloring(k, std::move(b));
  return d;
}

std::vector<TVEstimate> tv_upper_mc_profile(const PaintboxLaw& law, const Coloring& x0,
                                            const Coloring& x0_tilde, const std::vector<int>& ms,
                                            const McOptions& opts) {
  if (opts.replicates < 1) throw InvalidInput("replicates must be >= 1");
  if (law.k() != x0.k()) throw InvalidInput("law and initial states disagree on k");
  if (!std::is_sorted(ms.begin(), ms.end()) || (!ms.empty() && ms.front() < 0))
    throw InvalidInput("step list must be nonnegative and sorted");
  const auto reps = static_cast<std::size_t>(opts.replicates);
  std::vector<std::vector<double>> vals(ms.size(), std::vector<double>(reps, 0.0));
  if (x0 == x0_tilde) {
    std::vector<TVEstimate> out;
    for (std::size_t i = 0; i < ms.size(); ++i) out.push_back(summarize(vals[i], TVKind::upper_bound));
    return out;
  }
  parallel_for(reps, [&](std::size_t r) {
    RngStream rng(opts.seed, r);
    StochasticMatrix q = StochasticMatrix::identity(law.k());
    int t = 0;
    for (std::size_t idx = 0; idx < ms.size(); ++idx) {
      for (; t < ms[idx]; ++t) q = law.sample(rng) * q;
      vals[idx][r] = tv_exact_conditional(q, x0, x0_tilde, opts.budget).value;
    }
  });
  std::vector<TVEstimate> out;
  for (const auto& v : vals) out.push_back(summarize(v, TVKind::upper_bound));
  return out;
}

TVEstimate tv_upper_mc(const PaintboxLaw& law, const Coloring& x0, const Coloring& x0_tilde,
                       int m, const McOptions& opts) {
  return tv_upper_mc_profile(law, x0, x0_tilde, {m}, opts).front();
}

TVEstimate tv_lower_mc(const PaintboxLaw& law, const Coloring& x0, const Coloring& x0_tilde,
                       int m, const McOptions& opts) {
  const int k = law.k();
  require_design(x0, x0_tilde, k);
  if (m < 0) throw InvalidInput("m must be nonnegative");
  if (opts.replicates < 4) throw InvalidInput("lower bound needs at least 4 replicates");
  const int np = make_block_design(x0.n(), k).n_prime;
  const std::size_t side = static_cast<std::size_t>(np) + 1;

  std::vector<Candidate> candidates;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      if (i == j) continue;
      // For k = 2 the count of color 2 is determined by the count of color 1.
      for (int c = 0; c < (k == 2 ? 1 : k); ++c) candidates.push_back({i, j, c});
    }

  const auto reps = static_cast<std::size_t>(opts.replicates);
  std::vector<StochasticMatrix> products(reps, StochasticMatrix::identity(k));
  parallel_for(reps, [&](std::size_t r) { products[r] = product_at(law, m, opts.seed, r); });
  std::vector<std::size_t> even, odd;
  for (std::size_t r = 0; r < reps; ++r) (r % 2 == 0 ? even : odd).push_back(r);

  // Selection half: plug-in laws of (U, V) for every candidate.
  double best_tv = -1.0;
  std::size_t best = 0;
  std::vector<std::uint8_t> best_set;
  for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
    const Candidate& cand = candidates[ci];
    std::vector<WindowPmf> pa(even.size()), pb(even.size());
    parallel_for(even.size(), [&](std::size_t e) {
      const auto& q = products[even[e]];
      pa[e] = window_pmf(np, q(cand.color, cand.i));
      pb[e] = window_pmf(np, q(cand.color, cand.j));
    });
    std::vector<double> p(side * side, 0.0), pt(side * side, 0.0);
    parallel_for(side, [&](std::size_t u) {
      const int ui = static_cast<int>(u);
      for (std::size_t e = 0; e < even.size(); ++e) {
        const double wu = pa[e].at(ui);
        if (wu == 0.0) continue;
        for (std::size_t x = 0; x < pa[e].pmf.size(); ++x)
          p[u * side + static_cast<std::size_t>(pa[e].lo) + x] += wu * pa[e].pmf[x];
        for (std::size_t x = 0; x < pb[e].pmf.size(); ++x)
          pt[u * side + static_cast<std::size_t>(pb[e].lo) + x] += wu * pb[e].pmf[x];
      }
    });
    CompensatedSum tv;
    std::vector<std::uint8_t> set(side * side, 0);
    for (std::size_t x = 0; x < side * side; ++x)
      if (pt[x] > p[x]) {
        set[x] = 1;
        tv += (pt[x] - p[x]) / static_cast<double>(even.size());
      }
    if (tv.value() > best_tv) {
      best_tv = tv.value();
      best = ci;
      best_set = std::move(set);
    }
  }

  // Evaluation half: unbiased estimate of P~(A) - P(A).
  const Candidate& cand = candidates[best];
  std::vector<double> vals(odd.size(), 0.0);
  parallel_for(odd.size(), [&](std::size_t o) {
    const auto& q = products[odd[o]];
    const WindowPmf a = window_pmf(np, q(cand.color, cand.i));
    const WindowPmf b = window_pmf(np, q(cand.color, cand.j));
    const int lo = std::min(a.lo, b.lo);
    const int hi = std::max(a.hi(), b.hi());
    CompensatedSum acc;
    for (std::size_t x = 0; x < a.pmf.size(); ++x) {
      const auto u = static_cast<std::size_t>(a.lo) + x;
      double row = 0.0;
      for (int v = lo; v <= hi; ++v)
        if (best_set[u * side + static_cast<std::size_t>(v)]) row += b.at(v) - a.at(v);
      acc += a.pmf[x] * row;
    }
    vals[o] = acc.value();
  });
  TVEstimate est = summarize(vals, TVKind::lower_bound);
  CompensatedSum s;
  for (double v : vals) s += v;
  const double mean = s.value() / static_cast<double>(vals.size());
  est.value = std::clamp(mean - 3.0 * est.mc_std_error, 0.0, 1.0);
  est.replicates = opts.replicates;
  return est;
}

}  // namespace efcp
