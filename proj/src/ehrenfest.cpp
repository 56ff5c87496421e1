#include "efcp/ehrenfest.hpp"

#include <algorithm>
#include <cmath>

#include "efcp/errors.hpp"
#include "efcp/numerics.hpp"

namespace efcp {

namespace {

void check_size(const EhrenfestParams& params) {
  params.validate();
  if (params.n > kEhrenfestMaxN)
    throw BudgetExceeded("exact Ehrenfest computation: n too large", params.n, kEhrenfestMaxN);
}

double log_hypergeometric(int n, int successes, int draws, int h) {
  return log_binomial_coefficient(successes, h) + log_binomial_coefficient(n - successes, draws - h) -
         log_binomial_coefficient(n, draws);
}

// Sparse rows: for each w, the hypergeometric law of h.
struct WeightKernel {
  int n;
  int a;
  std::vector<int> h_lo;
  std::vector<std::vector<double>> h_prob;

  WeightKernel(int n_, int a_) : n(n_), a(a_) {
    for (int w = 0; w <= n; ++w) {
      const int lo = std::max(0, a - (n - w));
      const int hi = std::min(a, w);
      h_lo.push_back(lo);
      auto& row = h_prob.emplace_back();
      for (int h = lo; h <= hi; ++h) row.push_back(std::exp(log_hypergeometric(n, w, a, h)));
    }
  }

  std::vector<double> apply(const std::vector<double>& p) const {
    std::vector<double> out(static_cast<std::size_t>(n + 1), 0.0);
    for (int w = 0; w <= n; ++w) {
      const double pw = p[static_cast<std::size_t>(w)];
      if (pw == 0.0) continue;
      const auto& row = h_prob[static_cast<std::size_t>(w)];
      for (std::size_t i = 0; i < row.size(); ++i) {
        const int h = h_lo[static_cast<std::size_t>(w)] + static_cast<int>(i);
        const double mass = 0.5 * pw * row[i];
        out[static_cast<std::size_t>(w - h + a)] += mass;
        out[static_cast<std::size_t>(w - h)] += mass;
      }
    }
    return out;
  }
};

std::vector<double> binomial_half(int n) {
  std::vector<double> out;
  for (int w = 0; w <= n; ++w) out.push_back(std::exp(log_binomial_pmf(n, w, 0.5)));
  return out;
}

std::vector<double> start_law(int n) {
  std::vector<double> p(static_cast<std::size_t>(n + 1), 0.0);
  p[0] = 1.0;
  return p;
}

}  // namespace

std::vector<double> ehrenfest_stationary_weights(const EhrenfestParams& params) {
  check_size(params);
  const int n = params.n;
  const int a = params.refresh_size();
  if (a == 1) return binomial_half(n);
  // Power iteration from W = 0. The coupling bound n (1 - a/n)^t controls
  // the error, so iterate until it drops below 1e-16.
  const WeightKernel kernel(n, a);
  std::vector<double> p = start_law(n);
  if (a == n) {
    p = kernel.apply(p);
    return p;
  }
  const double steps = std::ceil(std::log(n * 1e16) / -std::log1p(-static_cast<double>(a) / n));
  for (long t = 0; t < static_cast<long>(steps); ++t) p = kernel.apply(p);
  return p;
}

std::vector<double> ehrenfest_weight_law(const EhrenfestParams& params, int t) {
  check_size(params);
  if (t < 0) throw InvalidInput("ehrenfest: t must be nonnegative");
  const WeightKernel kernel(params.n, params.refresh_size());
  std::vector<double> p = start_law(params.n);
  for (int s = 0; s < t; ++s) p = kernel.apply(p);
  return p;
}

std::vector<double> ehrenfest_tv_curve(const EhrenfestParams& params, int t_max) {
  check_size(params);
  if (t_max < 0) throw InvalidInput("ehrenfest: t must be nonnegative");
  const auto pi = ehrenfest_stationary_weights(params);
  const WeightKernel kernel(params.n, params.refresh_size());
  std::vector<double> p = start_law(params.n);
  std::vector<double> out;
  for (int t = 0; t <= t_max; ++t) {
    out.push_back(std::clamp(tv_vectors(p, pi), 0.0, 1.0));
    if (t < t_max) p = kernel.apply(p);
  }
  return out;
}

TVEstimate ehrenfest_tv_exact(const EhrenfestParams& params, int t) {
  TVEstimate est;
  est.value = ehrenfest_tv_curve(params, t).back();
  return est;
}

std::vector<double> unrefreshed_law(const EhrenfestParams& params, int t) {
  check_size(params);
  if (t < 0) throw InvalidInput("ehrenfest: t must be nonnegative");
  const int n = params.n;
  const int a = params.refresh_size();
  std::vector<double> p(static_cast<std::size_t>(n + 1), 0.0);
  p[static_cast<std::size_t>(n)] = 1.0;
  for (int s = 0; s < t; ++s) {
    std::vector<double> next(p.size(), 0.0);
    for (int r = 0; r <= n; ++r) {
      const double pr = p[static_cast<std::size_t>(r)];
      if (pr == 0.0) continue;
      for (int h = std::max(0, a - (n - r)); h <= std::min(a, r); ++h)
        next[static_cast<std::size_t>(r - h)] += pr * std::exp(log_hypergeometric(n, r, a, h));
    }
    p = std::move(next);
  }
  return p;
}

TVEstimate ehrenfest_tv_via_unrefreshed(const EhrenfestParams& params, int t) {
  if (params.refresh_size() != 1)
    throw InvalidInput("refreshed-count route needs floor(alpha n) = 1");
  const int n = params.n;
  const auto r_law = unrefreshed_law(params, t);
  std::vector<double> w(static_cast<std::size_t>(n + 1), 0.0);
  for (int r = 0; r <= n; ++r) {
    const double pr = r_law[static_cast<std::size_t>(r)];
    if (pr == 0.0) continue;
    for (int x = 0; x <= n - r; ++x)
      w[static_cast<std::size_t>(x)] += pr * std::exp(log_binomial_pmf(n - r, x, 0.5));
  }
  TVEstimate est;
  est.value = std::clamp(tv_vectors(w, binomial_half(n)), 0.0, 1.0);
  return est;
}

double ehrenfest_upper_bound(const EhrenfestParams& params, double t) {
  params.validate();
  const double n = params.n;
  return n * std::pow(1.0 - params.refresh_size() / n, t);
}

double ehrenfest_upper_time(const EhrenfestParams& params, double beta) {
  params.validate();
  const double n = params.n;
  const double a = params.refresh_size();
  return n / (2.0 * a) * std::log(n) + beta * n / a;
}

double ehrenfest_lower_time(const EhrenfestParams& params, double beta) {
  params.validate();
  const double n = params.n;
  const double a = params.refresh_size();
  return n / (2.0 * a) * std::log(n) - beta * n / a;
}

double ehrenfest_lower_bound(const EhrenfestParams& params, double beta) {
  params.validate();
  const double alpha = params.standard ? 1.0 / params.n : params.alpha;
  if (alpha > 0.5) throw Refusal("Ehrenfest lower bound holds only for alpha in (0, 1/2]");
  return 1.0 - 8.0 * std::exp(-2.0 * beta + 1.0);
}

EhrenfestBounds ehrenfest_bounds(const EhrenfestParams& params, double t, double beta) {
  EhrenfestBounds b;
  b.t = t;
  b.beta = beta;
  b.upper = ehrenfest_upper_bound(params, t);
  b.upper_time = ehrenfest_upper_time(params, beta);
  b.upper_at_upper_time = std::exp(-beta) / std::sqrt(static_cast<double>(params.n));
  const double alpha = params.standard ? 1.0 / params.n : params.alpha;
  if (alpha <= 0.5) {
    b.lower_time = ehrenfest_lower_time(params, beta);
    b.lower = ehrenfest_lower_bound(params, beta);
  }
  return b;
}

double loglog_alpha(int n) {
  if (n < 3) throw InvalidInput("log log n schedule needs n >= 3");
  const double l = std::log(static_cast<double>(n));
  return 1.0 - std::exp(-l / std::log(l));
}

double loglog_time(int n, double beta) {
  if (n < 3) throw InvalidInput("log log n schedule needs n >= 3");
  return (1.0 + beta) * std::log(std::log(static_cast<double>(n)));
}

}  // namespace efcp
