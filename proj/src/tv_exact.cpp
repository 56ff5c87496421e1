#include "efcp/tv_exact.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "efcp/errors.hpp"
#include "efcp/numerics.hpp"

namespace efcp {

namespace {

// log C(n, x) for x = 0..n from a per-thread table of log factorials.
const std::vector<double>& log_binomial_row(int n) {
  thread_local std::vector<double> log_fact{0.0};
  thread_local std::vector<double> row;
  while (static_cast<int>(log_fact.size()) <= n)
    log_fact.push_back(std::lgamma(static_cast<double>(log_fact.size()) + 1.0));
  row.resize(static_cast<std::size_t>(n + 1));
  for (int x = 0; x <= n; ++x)
    row[static_cast<std::size_t>(x)] = log_fact[static_cast<std::size_t>(n)] -
                                       log_fact[static_cast<std::size_t>(x)] -
                                       log_fact[static_cast<std::size_t>(n - x)];
  return row;
}

// log P(Bin(n, p) = x) for x = 0..n.
std::vector<double> log_binomial_pmfs(int n, double p) {
  const auto& lc = log_binomial_row(n);
  std::vector<double> out(static_cast<std::size_t>(n + 1));
  const double lp = p > 0.0 ? std::log(p) : kNegInfinity;
  const double lq = p < 1.0 ? std::log1p(-p) : kNegInfinity;
  for (int x = 0; x <= n; ++x) {
    double v = lc[static_cast<std::size_t>(x)];
    if (x > 0) v += x * lp;
    if (x < n) v += (n - x) * lq;
    out[static_cast<std::size_t>(x)] = v;
  }
  return out;
}

struct PairBlock {
  int size;
  std::vector<double> p;
  std::vector<double> q;
};

void check_probs(std::span<const double> v, const char* what) {
  double total = 0.0;
  for (double x : v) {
    if (!(x >= 0.0) || !std::isfinite(x))
      throw InvalidInput(std::string(what) + ": cell probabilities must be nonnegative");
    total += x;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw InvalidInput(std::string(what) + ": cell probabilities must sum to 1");
}

// Drop blocks on which the laws agree and merge blocks with the same pair.
std::vector<PairBlock> informative_blocks(const ProductMultinomialLaw& p,
                                          const ProductMultinomialLaw& q) {
  std::vector<PairBlock> out;
  for (std::size_t b = 0; b < p.blocks.size(); ++b) {
    const auto& pb = p.blocks[b];
    const auto& qb = q.blocks[b];
    if (pb.size == 0 || pb.probs == qb.probs) continue;
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const PairBlock& e) { return e.p == pb.probs && e.q == qb.probs; });
    if (it == out.end())
      out.push_back({pb.size, pb.probs, qb.probs});
    else
      it->size += pb.size;
  }
  return out;
}

void check_budget(double required, double budget, const char* what) {
  if (required > budget) throw BudgetExceeded(what, required, budget);
}

// log P(block counts) under p and q for every composition of one block.
struct BlockTable {
  std::vector<double> lp;
  std::vector<double> lq;
};

BlockTable block_table(const PairBlock& b, int k) {
  BlockTable t;
  for (const auto& c : compositions(b.size, k)) {
    t.lp.push_back(log_multinomial_pmf(c, b.p));
    t.lq.push_back(log_multinomial_pmf(c, b.q));
  }
  return t;
}

// Sum over all count points of (P - Q)_+, enumerating every block.
double positive_part_full(const std::vector<BlockTable>& tables) {
  CompensatedSum acc;
  const std::size_t nb = tables.size();
  std::vector<std::size_t> idx(nb, 0);
  for (;;) {
    double lp = 0.0;
    double lq = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
      lp += tables[b].lp[idx[b]];
      lq += tables[b].lq[idx[b]];
    }
    acc += positive_part_exp_diff(lp, lq);
    std::size_t b = 0;
    while (b < nb && ++idx[b] == tables[b].lp.size()) idx[b++] = 0;
    if (b == nb) break;
  }
  return acc.value();
}

struct BinomialTail {
  int n;
  double a;
  double b;
  std::vector<double> la, lb;          // log pmfs
  std::vector<double> pa, pb;          // pmfs
  std::vector<double> below_a, below_b;  // P(X < x), x = 0..n+1
  std::vector<double> above_a, above_b;  // P(X >= x), x = 0..n+1
};

BinomialTail make_tail(int n, double a, double b) {
  BinomialTail t{n, a, b, log_binomial_pmfs(n, a), log_binomial_pmfs(n, b), {}, {}, {}, {}, {}, {}};
  for (int x = 0; x <= n; ++x) {
    t.pa.push_back(std::exp(t.la[static_cast<std::size_t>(x)]));
    t.pb.push_back(std::exp(t.lb[static_cast<std::size_t>(x)]));
  }
  auto prefix = [&](const std::vector<double>& pmf, std::vector<double>& below,
                    std::vector<double>& above) {
    below.assign(static_cast<std::size_t>(n + 2), 0.0);
    above.assign(static_cast<std::size_t>(n + 2), 0.0);
    CompensatedSum s;
    for (int x = 0; x <= n; ++x) {
      below[static_cast<std::size_t>(x)] = s.value();
      s += pmf[static_cast<std::size_t>(x)];
    }
    below[static_cast<std::size_t>(n + 1)] = s.value();
    CompensatedSum u;
    for (int x = n; x >= 0; --x) {
      u += pmf[static_cast<std::size_t>(x)];
      above[static_cast<std::size_t>(x)] = u.value();
    }
  };
  prefix(t.pa, t.below_a, t.above_a);
  prefix(t.pb, t.below_b, t.above_b);
  return t;
}

// (P pa(x) - Q pb(x))_+ summed over x, given log P and log Q of the rest.
double binomial_positive_part(const BinomialTail& t, double lp, double lq) {
  if (lp == kNegInfinity) return 0.0;
  if (lq == kNegInfinity) return std::exp(lp);
  const double shift = lp - lq;
  // Decided in log space: the pmfs underflow in the far tails, which would
  // break the monotonicity the search relies on.
  auto wins = [&](int x) {
    if (x > t.n) return false;
    const double la = t.la[static_cast<std::size_t>(x)];
    const double lb = t.lb[static_cast<std::size_t>(x)];
    if (la == kNegInfinity) return false;
    if (lb == kNegInfinity) return true;
    return shift + la - lb > 0.0;
  };
  const double P = std::exp(lp);
  const double Q = std::exp(lq);
  if (t.a > t.b) {
    // Ratio increasing in x: the winning set is {x >= lo}.
    int lo = 0;
    int hi = t.n + 1;
    while (lo < hi) {
      const int mid = (lo + hi) / 2;
      if (wins(mid))
        hi = mid;
      else
        lo = mid + 1;
    }
    const auto i = static_cast<std::size_t>(lo);
    return std::max(0.0, P * t.above_a[i] - Q * t.above_b[i]);
  }
  // Ratio decreasing: the winning set is {x < hi}.
  int lo = 0;
  int hi = t.n + 1;
  while (lo < hi) {
    const int mid = (lo + hi) / 2;
    if (!wins(mid))
      hi = mid;
    else
      lo = mid + 1;
  }
  const auto i = static_cast<std::size_t>(lo);
  return std::max(0.0, P * t.below_a[i] - Q * t.below_b[i]);
}

double positive_part_binary(std::vector<PairBlock> blocks, double budget) {
  auto largest = std::max_element(blocks.begin(), blocks.end(),
                                  [](const PairBlock& x, const PairBlock& y) {
                                    return x.size < y.size;
                                  });
  const PairBlock last = *largest;
  blocks.erase(largest);
  double points = 1.0;
  for (const auto& b : blocks) points *= b.size + 1.0;
  check_budget(points, budget, "exact TV: count statistic too large");

  const BinomialTail tail = make_tail(last.size, last.p[0], last.q[0]);
  std::vector<BlockTable> tables;
  for (const auto& b : blocks) {
    BlockTable t{log_binomial_pmfs(b.size, b.p[0]), log_binomial_pmfs(b.size, b.q[0])};
    std::reverse(t.lp.begin(), t.lp.end());
    std::reverse(t.lq.begin(), t.lq.end());
    tables.push_back(std::move(t));
  }
  CompensatedSum acc;
  const std::size_t nb = tables.size();
  std::vector<std::size_t> idx(nb, 0);
  for (;;) {
    double lp = 0.0;
    double lq = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
      lp += tables[b].lp[idx[b]];
      lq += tables[b].lq[idx[b]];
    }
    acc += binomial_positive_part(tail, lp, lq);
    std::size_t b = 0;
    while (b < nb && ++idx[b] == tables[b].lp.size()) idx[b++] = 0;
    if (b == nb) break;
  }
  return acc.value();
}

std::map<std::pair<int, int>, int> cell_sizes(const Coloring& x0, const Coloring& x0_tilde) {
  if (x0.n() != x0_tilde.n() || x0.k() != x0_tilde.k())
    throw InvalidInput("initial states disagree on n or k");
  std::map<std::pair<int, int>, int> cells;
  for (int i = 0; i < x0.n(); ++i) ++cells[{x0[i], x0_tilde[i]}];
  return cells;
}

std::vector<std::int64_t> matrix_key(const StochasticMatrix& s) {
  std::vector<std::int64_t> key;
  key.reserve(static_cast<std::size_t>(s.k() * s.k()));
  for (int c = 0; c < s.k(); ++c)
    for (int r = 0; r < s.k(); ++r) key.push_back(std::llround(s(r, c) * 1e12));
  return key;
}

}  // namespace

std::string to_string(TVKind kind) {
  switch (kind) {
    case TVKind::exact:
      return "exact";
    case TVKind::upper_bound:
      return "upper_bound";
    case TVKind::lower_bound:
      return "lower_bound";
  }
  return "exact";
}

void ProductMultinomialLaw::validate() const {
  const int kk = k();
  for (const auto& b : blocks) {
    if (b.size < 0) throw InvalidInput("product multinomial: negative block size");
    if (static_cast<int>(b.probs.size()) != kk || kk < 1)
      throw InvalidInput("product multinomial: blocks disagree on k");
    check_probs(b.probs, "product multinomial");
  }
}

std::vector<std::vector<int>> compositions(int n, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> c(static_cast<std::size_t>(k), 0);
  // Lexicographic over (c_0, ..., c_{k-1}) with c_{k-1} = n - rest.
  auto rec = [&](auto&& self, int pos, int left) -> void {
    if (pos == k - 1) {
      c[static_cast<std::size_t>(pos)] = left;
      out.push_back(c);
      return;
    }
    for (int v = 0; v <= left; ++v) {
      c[static_cast<std::size_t>(pos)] = v;
      self(self, pos + 1, left - v);
    }
  };
  rec(rec, 0, n);
  return out;
}

double composition_count(int n, int k) {
  return std::round(std::exp(std::lgamma(n + k) - std::lgamma(n + 1.0) - std::lgamma(k)));
}

double log_multinomial_pmf(std::span<const int> counts, std::span<const double> probs) {
  int n = 0;
  double v = 0.0;
  for (std::size_t j = 0; j < counts.size(); ++j) {
    n += counts[j];
    v += xlogy(counts[j], probs[j]) - std::lgamma(counts[j] + 1.0);
  }
  return v + std::lgamma(n + 1.0);
}

TVEstimate tv_exact_product_multinomial(const ProductMultinomialLaw& p,
                                        const ProductMultinomialLaw& q, double budget) {
  p.validate();
  q.validate();
  if (p.blocks.size() != q.blocks.size() || p.k() != q.k())
    throw InvalidInput("product multinomial TV: mismatched block structure");
  for (std::size_t b = 0; b < p.blocks.size(); ++b)
    if (p.blocks[b].size != q.blocks[b].size)
      throw InvalidInput("product multinomial TV: mismatched block sizes");

  auto blocks = informative_blocks(p, q);
  TVEstimate est;
  if (blocks.empty()) return est;
  const int k = p.k();
  double value = 0.0;
  if (k == 2) {
    value = positive_part_binary(std::move(blocks), budget);
  } else {
    double points = 1.0;
    for (const auto& b : blocks) points *= composition_count(b.size, k);
    check_budget(points, budget, "exact TV: count statistic too large");
    std::vector<BlockTable> tables;
    for (const auto& b : blocks) tables.push_back(block_table(b, k));
    value = positive_part_full(tables);
  }
  est.value = std::clamp(value, 0.0, 1.0);
  return est;
}

std::pair<ProductMultinomialLaw, ProductMultinomialLaw> conditional_laws(
    const StochasticMatrix& qm, const Coloring& x0, const Coloring& x0_tilde) {
  if (qm.k() != x0.k()) throw InvalidInput("conditional TV: matrix and states disagree on k");
  const auto cols = columns_of(qm);
  ProductMultinomialLaw p;
  ProductMultinomialLaw q;
  for (const auto& [pair, size] : cell_sizes(x0, x0_tilde)) {
    p.blocks.push_back({size, cols[static_cast<std::size_t>(pair.first)]});
    q.blocks.push_back({size, cols[static_cast<std::size_t>(pair.second)]});
  }
  return {std::move(p), std::move(q)};
}

TVEstimate tv_exact_conditional(const StochasticMatrix& qm, const Coloring& x0,
                                const Coloring& x0_tilde, double budget) {
  const auto [p, q] = conditional_laws(qm, x0, x0_tilde);
  return tv_exact_product_multinomial(p, q, budget);
}

std::vector<std::pair<StochasticMatrix, double>> atomic_products(const PaintboxLaw& law, int m,
                                                                 double budget) {
  const auto support = law.finite_support();
  if (!support) throw InvalidInput("exact atomic TV needs a law with finite support");
  if (m < 0) throw InvalidInput("m must be nonnegative");
  std::vector<std::pair<StochasticMatrix, double>> current{
      {StochasticMatrix::identity(law.k()), 1.0}};
  for (int t = 0; t < m; ++t) {
    std::vector<std::pair<StochasticMatrix, double>> next;
    std::map<std::vector<std::int64_t>, std::size_t> index;
    for (const auto& [q, w] : current)
      for (const auto& [s, ws] : *support) {
        if (ws == 0.0) continue;
        StochasticMatrix prod = s * q;
        auto key = matrix_key(prod);
        auto it = index.find(key);
        if (it == index.end()) {
          index.emplace(std::move(key), next.size());
          next.emplace_back(std::move(prod), w * ws);
        } else {
          next[it->second].second += w * ws;
        }
      }
    check_budget(static_cast<double>(next.size()), budget,
                 "exact atomic TV: too many distinct paintbox products");
    current = std::move(next);
  }
  return current;
}

TVEstimate tv_exact_atomic(const PaintboxLaw& law, const Coloring& x0, const Coloring& x0_tilde,
                           int m, double budget) {
  if (law.k() != x0.k()) throw InvalidInput("exact atomic TV: law and states disagree on k");
  const int k = law.k();
  const auto cells = cell_sizes(x0, x0_tilde);
  double points = 1.0;
  for (const auto& [pair, size] : cells) points *= composition_count(size, k);
  check_budget(points, budget, "exact atomic TV: count statistic too large");
  const auto products = atomic_products(law, m, budget / points);

  const std::size_t na = products.size();
  std::vector<double> weights;
  for (const auto& pr : products) weights.push_back(pr.second);
  std::vector<std::vector<std::vector<double>>> product_cols;
  for (const auto& pr : products) product_cols.push_back(columns_of(pr.first));
  // tables[c][point][a]
  std::vector<std::vector<std::vector<double>>> tp, tq;
  for (const auto& [pair, size] : cells) {
    auto& cp = tp.emplace_back();
    auto& cq = tq.emplace_back();
    for (const auto& comp : compositions(size, k)) {
      auto& rp = cp.emplace_back(na);
      auto& rq = cq.emplace_back(na);
      for (std::size_t a = 0; a < na; ++a) {
        const auto& cols = product_cols[a];
        rp[a] = log_multinomial_pmf(comp, cols[static_cast<std::size_t>(pair.first)]);
        rq[a] = log_multinomial_pmf(comp, cols[static_cast<std::size_t>(pair.second)]);
      }
    }
  }
  const std::size_t nc = tp.size();
  std::vector<std::size_t> idx(nc, 0);
  CompensatedSum acc;
  std::vector<double> lp(na), lq(na);
  for (;;) {
    std::fill(lp.begin(), lp.end(), 0.0);
    std::fill(lq.begin(), lq.end(), 0.0);
    for (std::size_t c = 0; c < nc; ++c)
      for (std::size_t a = 0; a < na; ++a) {
        lp[a] += tp[c][idx[c]][a];
        lq[a] += tq[c][idx[c]][a];
      }
    CompensatedSum P, Q;
    for (std::size_t a = 0; a < na; ++a) {
      P += weights[a] * std::exp(lp[a]);
      Q += weights[a] * std::exp(lq[a]);
    }
    acc += std::max(0.0, P.value() - Q.value());
    std::size_t c = 0;
    while (c < nc && ++idx[c] == tp[c].size()) idx[c++] = 0;
    if (c == nc) break;
  }
  TVEstimate est;
  est.value = std::clamp(acc.value(), 0.0, 1.0);
  return est;
}

double tv_vectors(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw InvalidInput("TV: vectors of different lengths");
  CompensatedSum acc;
  for (std::size_t i = 0; i < p.size(); ++i) acc += std::abs(p[i] - q[i]);
  return 0.5 * acc.value();
}

LikelihoodCertificate tv_likelihood_bound(std::span<const double> p, std::span<const double> q,
                                          double eps) {
  if (p.size() != q.size()) throw InvalidInput("likelihood bound: supports differ in size");
  if (!(eps > 0.0)) throw InvalidInput("likelihood bound: eps must be positive");
  CompensatedSum nu_b;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (q[i] == 0.0) continue;  // contributes nothing to q(B) whether or not p > 0
    if (std::abs(p[i] / q[i] - 1.0) > eps) nu_b += q[i];
  }
  LikelihoodCertificate c;
  c.nu_of_B = nu_b.value();
  c.certified = c.nu_of_B < eps;
  if (c.certified) c.bound = 2.0 * eps;
  return c;
}

}  // namespace efcp
