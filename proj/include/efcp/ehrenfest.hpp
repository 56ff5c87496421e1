#pragma once

// Exact distances and closed-form bounds for the Ehrenfest(alpha) chain.
//
// The chain is exchangeable in the sites, so from the all-ones state the
// law of X_t is uniform given the number W_t of sites of color 2, and the
// distance to stationarity equals the distance between laws of W_t. One
// step draws h ~ Hypergeometric(n, W, a) refreshed sites of color 2 among
// the a = floor(alpha n) refreshed ones, then W' = W - h + a or W - h with
// probability 1/2 each.

#include <optional>
#include <vector>

#include "efcp/chains.hpp"
#include "efcp/tv_exact.hpp"

namespace efcp {

/// Largest n accepted by the exact computations.
inline constexpr int kEhrenfestMaxN = 4096;

/// Stationary law of W, index w = 0..n. For a = 1 this is Binomial(n, 1/2);
/// for a >= 2 refreshed sites share a color and the law is wider.
std::vector<double> ehrenfest_stationary_weights(const EhrenfestParams& params);

/// Law of W_t started from W_0 = 0 (the all-ones state).
std::vector<double> ehrenfest_weight_law(const EhrenfestParams& params, int t);

/// Exact TV between X_t from all-ones and the stationary law.
TVEstimate ehrenfest_tv_exact(const EhrenfestParams& params, int t);

/// Exact TV at every t = 0..t_max.
std::vector<double> ehrenfest_tv_curve(const EhrenfestParams& params, int t_max);

/// Law of R_t, the number of sites outside A_1 u ... u A_t, evolved by
/// P(R' = r - h | R = r) = C(r, h) C(n - r, a - h) / C(n, a).
std::vector<double> unrefreshed_law(const EhrenfestParams& params, int t);

/// For a = 1 only: TV through the refreshed count, W_t given R_t = r being
/// Binomial(n - r, 1/2) against the stationary Binomial(n, 1/2).
TVEstimate ehrenfest_tv_via_unrefreshed(const EhrenfestParams& params, int t);

/// n (1 - a/n)^t, also valid for real t.
double ehrenfest_upper_bound(const EhrenfestParams& params, double t);

/// t = (n / 2a) log n + beta n / a.
double ehrenfest_upper_time(const EhrenfestParams& params, double beta);

/// t = (n / 2a) log n - beta n / a.
double ehrenfest_lower_time(const EhrenfestParams& params, double beta);

/// 1 - 8 exp(-2 beta + 1) at ehrenfest_lower_time(beta). Refused for
/// alpha > 1/2.
double ehrenfest_lower_bound(const EhrenfestParams& params, double beta);

struct EhrenfestBounds {
  double t = 0.0;
  double upper = 0.0;  // n (1 - a/n)^t
  double beta = 0.0;
  double upper_time = 0.0;
  double upper_at_upper_time = 0.0;  // n^{-1/2} e^{-beta}
  std::optional<double> lower_time;
  std::optional<double> lower;
};

/// Upper bound at t and both beta-indexed forms; the lower bound is left
/// empty when alpha > 1/2.
EhrenfestBounds ehrenfest_bounds(const EhrenfestParams& params, double t, double beta);

/// alpha_n = 1 - exp(-log n / log log n).
double loglog_alpha(int n);
/// (1 + beta) log log n.
double loglog_time(int n, double beta);

}  // namespace efcp
