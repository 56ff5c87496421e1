#pragma once

// Exact total variation on sufficient count statistics.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "efcp/paintbox.hpp"
#include "efcp/partitions.hpp"

namespace efcp {

enum class TVKind { exact, upper_bound, lower_bound };
std::string to_string(TVKind kind);

struct TVEstimate {
  double value = 0.0;
  TVKind kind = TVKind::exact;
  double mc_std_error = 0.0;
  int replicates = 0;
};

/// n sites with i.i.d. colors drawn from probs.
struct MultinomialBlock {
  int size = 0;
  std::vector<double> probs;
};

/// Independent blocks; the first blocks[0].size sites are i.i.d.
/// multinomial(blocks[0].probs), and so on.
struct ProductMultinomialLaw {
  std::vector<MultinomialBlock> blocks;
  int k() const { return blocks.empty() ? 0 : static_cast<int>(blocks.front().probs.size()); }
  void validate() const;
};

/// Default cap on the number of count-statistic points enumerated.
inline constexpr double kDefaultTVBudget = 5e7;

/// Blocks where the two laws agree are dropped and blocks with equal
/// (p, q) pairs are merged. For k = 2 every block but the largest is
/// enumerated; on the largest the likelihood ratio is monotone, so the
/// positive part is a tail sum. Otherwise all count vectors are enumerated.
TVEstimate tv_exact_product_multinomial(const ProductMultinomialLaw& p,
                                        const ProductMultinomialLaw& q,
                                        double budget = kDefaultTVBudget);

/// Sites grouped by the pair (x0[i], x0_tilde[i]); the conditional law of
/// X_m given the paintboxes is product-multinomial over these cells with
/// the columns of qm.
TVEstimate tv_exact_conditional(const StochasticMatrix& qm, const Coloring& x0,
                                const Coloring& x0_tilde, double budget = kDefaultTVBudget);

/// Conditional laws at the two initial states, as product-multinomials.
std::pair<ProductMultinomialLaw, ProductMultinomialLaw> conditional_laws(
    const StochasticMatrix& qm, const Coloring& x0, const Coloring& x0_tilde);

/// Mixture over all R^m paintbox sequences (identical products merged),
/// compared on the per-cell count statistic. Throws BudgetExceeded when
/// (distinct products) x (statistic points) exceeds budget.
TVEstimate tv_exact_atomic(const PaintboxLaw& law, const Coloring& x0, const Coloring& x0_tilde,
                           int m, double budget = kDefaultTVBudget);

/// Distinct products S_m ... S_1 with their weights.
std::vector<std::pair<StochasticMatrix, double>> atomic_products(const PaintboxLaw& law, int m,
                                                                 double budget);

struct LikelihoodCertificate {
  bool certified = false;
  double nu_of_B = 0.0;  // q(B_eps)
  double bound = 1.0;    // 2 eps when certified
};

/// B_eps = {x : |p(x)/q(x) - 1| > eps} (points with q = 0 < p belong to
/// B_eps). When q(B_eps) < eps, TV(p, q) < 2 eps.
LikelihoodCertificate tv_likelihood_bound(std::span<const double> p, std::span<const double> q,
                                          double eps);

/// Half L1 distance between two probability vectors.
double tv_vectors(std::span<const double> p, std::span<const double> q);

/// All count vectors of length k summing to n, lexicographic.
std::vector<std::vector<int>> compositions(int n, int k);
double composition_count(int n, int k);
/// log multinomial probability of counts under probs.
double log_multinomial_pmf(std::span<const int> counts, std::span<const double> probs);

}  // namespace efcp
