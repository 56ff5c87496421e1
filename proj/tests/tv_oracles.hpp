#pragma once

// Brute-force oracles over the full configuration space [k]^n.

#include <cmath>
#include <vector>

#include "efcp/paintbox.hpp"
#include "efcp/partitions.hpp"
#include "efcp/tv_exact.hpp"

namespace efcp::testing {

inline std::vector<double> full_law(const ProductMultinomialLaw& p) {
  int n = 0;
  std::vector<const std::vector<double>*> site_probs;
  for (const auto& b : p.blocks)
    for (int i = 0; i < b.size; ++i) {
      site_probs.push_back(&b.probs);
      ++n;
    }
  const int k = p.k();
  std::size_t total = 1;
  for (int i = 0; i < n; ++i) total *= static_cast<std::size_t>(k);
  std::vector<double> out(total);
  for (std::size_t x = 0; x < total; ++x) {
    double pr = 1.0;
    std::size_t rest = x;
    for (int i = 0; i < n; ++i) {
      pr *= (*site_probs[static_cast<std::size_t>(i)])[rest % static_cast<std::size_t>(k)];
      rest /= static_cast<std::size_t>(k);
    }
    out[x] = pr;
  }
  return out;
}

/// Law of X_m over [k]^n, mixing the product measure prod_i Q(., x0_i) over
/// all paintbox sequences of a finite-support law.
inline std::vector<double> full_chain_law(const PaintboxLaw& law, const Coloring& x0, int m) {
  const auto support = *law.finite_support();
  std::vector<std::pair<StochasticMatrix, double>> products{
      {StochasticMatrix::identity(law.k()), 1.0}};
  for (int t = 0; t < m; ++t) {
    std::vector<std::pair<StochasticMatrix, double>> next;
    for (const auto& [q, w] : products)
      for (const auto& [s, v] : support) next.emplace_back(s * q, w * v);
    products = std::move(next);
  }
  const int n = x0.n(), k = law.k();
  std::size_t total = 1;
  for (int i = 0; i < n; ++i) total *= static_cast<std::size_t>(k);
  std::vector<double> out(total, 0.0);
  for (std::size_t x = 0; x < total; ++x) {
    const Coloring y = coloring_at(x, n, k);
    for (const auto& [q, w] : products) {
      double pr = w;
      for (int i = 0; i < n; ++i) pr *= q(y[i], x0[i]);
      out[x] += pr;
    }
  }
  return out;
}

}  // namespace efcp::testing
