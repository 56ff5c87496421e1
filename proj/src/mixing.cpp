#include "efcp/mixing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <boost/math/distributions/students_t.hpp>

#include "efcp/errors.hpp"

namespace efcp {

namespace {

bool certified_below(const MixingPoint& p, double eps, MixingMethod method) {
  if (method == MixingMethod::exact_atomic) return p.upper.value < eps;
  return p.upper.value + 3.0 * p.upper.mc_std_error < eps;
}

std::vector<MixingPoint> distance_curve(const PaintboxLaw& law, const BlockDesign& d,
                                        double eps_min, MixingMethod method,
                                        const MixingOptions& opts) {
  std::vector<MixingPoint> curve;
  if (method == MixingMethod::exact_atomic) {
    for (int m = 0; m <= opts.m_max; ++m) {
      MixingPoint p;
      p.m = m;
      p.upper = tv_exact_atomic(law, d.x0, d.x0_tilde, m, opts.budget);
      curve.push_back(p);
      if (p.upper.value < eps_min) break;
    }
    return curve;
  }
  McOptions mc{opts.replicates, opts.seed, opts.budget};
  int cap = std::min(16, opts.m_max);
  for (;;) {
    std::vector<int> ms(static_cast<std::size_t>(cap) + 1);
    for (int m = 0; m <= cap; ++m) ms[static_cast<std::size_t>(m)] = m;
    const auto est = tv_upper_mc_profile(law, d.x0, d.x0_tilde, ms, mc);
    curve.clear();
    for (int m = 0; m <= cap; ++m) {
      MixingPoint p;
      p.m = m;
      p.upper = est[static_cast<std::size_t>(m)];
      curve.push_back(p);
    }
    const bool done = std::any_of(curve.begin(), curve.end(), [&](const MixingPoint& p) {
      return certified_below(p, eps_min, method);
    });
    if (done || cap >= opts.m_max) break;
    cap = std::min(2 * cap, opts.m_max);
  }
  // Trim after the first point certified below every requested epsilon.
  for (std::size_t i = 0; i < curve.size(); ++i)
    if (certified_below(curve[i], eps_min, method)) {
      curve.resize(i + 1);
      break;
    }
  return curve;
}

}  // namespace

std::string to_string(MixingMethod m) {
  return m == MixingMethod::exact_atomic ? "exact_atomic" : "sandwich";
}

MixingMethod parse_mixing_method(const std::string& s) {
  if (s == "exact_atomic") return MixingMethod::exact_atomic;
  if (s == "sandwich") return MixingMethod::sandwich;
  throw InvalidInput("method must be \"exact_atomic\" or \"sandwich\", got \"" + s + "\"");
}

std::vector<MixingResult> mixing_times(const PaintboxLaw& law, int n,
                                       const std::vector<double>& epsilons, MixingMethod method,
                                       const MixingOptions& opts) {
  if (epsilons.empty()) throw InvalidInput("mixing time: no epsilon given");
  for (double e : epsilons)
    if (!(e > 0.0 && e < 1.0)) throw InvalidInput("mixing time: epsilon must be in (0, 1)");
  if (opts.m_max < 1) throw InvalidInput("mixing time: m_max must be >= 1");
  if (method == MixingMethod::sandwich && opts.replicates < 4)
    throw InvalidInput("mixing time: need at least 4 replicates");
  const BlockDesign d = make_block_design(n, law.k());
  if (opts.require_collapse) {
    const auto rep = collapse_diagnostic(law, opts.collapse_m_max, opts.collapse_replicates,
                                         opts.seed);
    if (!rep.collapse)
      throw Refusal("collapse not observed within m <= " + std::to_string(opts.collapse_m_max) +
                    "; ergodicity is not established, so mixing times are undefined");
  }

  const double eps_min = *std::min_element(epsilons.begin(), epsilons.end());
  std::vector<MixingPoint> curve = distance_curve(law, d, eps_min, method, opts);
  std::map<int, TVEstimate> lowers;
  McOptions mc{opts.replicates, opts.seed, opts.budget};
  auto lower_at = [&](int m) -> const TVEstimate& {
    auto it = lowers.find(m);
    if (it == lowers.end())
      it = lowers.emplace(m, tv_lower_mc(law, d.x0, d.x0_tilde, m, mc)).first;
    return it->second;
  };

  std::vector<MixingResult> out;
  for (double eps : epsilons) {
    MixingResult r;
    r.n = n;
    r.epsilon = eps;
    r.method = method;
    for (const auto& p : curve)
      if (certified_below(p, eps, method)) {
        r.t_mix = p.m;
        break;
      }
    for (std::size_t i = 1; i < curve.size(); ++i) {
      const double a = curve[i - 1].upper.value;
      const double b = curve[i].upper.value;
      if (b < eps) {
        r.crossing = (a > b) ? curve[i - 1].m + (a - eps) / (a - b) : double(curve[i].m);
        break;
      }
    }
    r.inconclusive = !r.t_mix.has_value();
    if (method == MixingMethod::exact_atomic) {
      if (r.t_mix) {
        r.bracket_lo = *r.t_mix;
        r.bracket_hi = r.t_mix;
        r.bracket_closed = true;
      }
    } else {
      r.bracket_hi = r.t_mix;
      const int top = r.t_mix ? *r.t_mix - 1 : curve.back().m;
      r.bracket_lo = 1;
      if (opts.lower_bounds) {
        for (int m = top; m >= 0; --m)
          if (lower_at(m).value >= eps) {
            r.bracket_lo = m + 1;
            break;
          }
      }
      r.bracket_closed = r.t_mix && r.bracket_lo == *r.t_mix;
    }
    out.push_back(std::move(r));
  }
  for (auto& r : out) {
    r.curve = curve;
    for (auto& p : r.curve) {
      auto it = lowers.find(p.m);
      if (it != lowers.end()) p.lower = it->second;
    }
  }
  return out;
}

MixingResult mixing_time(const PaintboxLaw& law, int n, double epsilon, MixingMethod method,
                         const MixingOptions& opts) {
  return mixing_times(law, n, {epsilon}, method, opts).front();
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 3)
    throw InvalidInput("line fit needs at least 3 points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw InvalidInput("line fit: all x values equal");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - f.intercept - f.slope * x[i];
    sse += e * e;
  }
  f.slope_std_error = std::sqrt(sse / (n - 2.0) / sxx);
  const boost::math::students_t dist(n - 2.0);
  const double q = boost::math::quantile(dist, 0.975);
  f.slope_ci_lo = f.slope - q * f.slope_std_error;
  f.slope_ci_hi = f.slope + q * f.slope_std_error;
  return f;
}

CutoffReport cutoff_experiment(const PaintboxLaw& law, const std::vector<int>& n_grid,
                               double epsilon, const CutoffOptions& opts) {
  if (!law.has_lp_density())
    throw Refusal("cutoff needs a paintbox law with an L^p density (dirichlet_columns or "
                  "self_similar); law kind is " + law.kind_name());
  if (n_grid.size() < 3) throw InvalidInput("cutoff: need at least 3 values of n");
  if (!(epsilon > 0.0 && epsilon < 1.0) || epsilon == 0.5)
    throw InvalidInput("cutoff: epsilon must be in (0, 1) and different from 1/2");
  CutoffReport rep;
  rep.epsilon = std::min(epsilon, 1.0 - epsilon);
  rep.lyapunov = estimate_lyapunov(law, opts.lyapunov);
  if (!(rep.lyapunov.lambda1 > 0.0 && rep.lyapunov.lambda1 < 1.0))
    throw Refusal("cutoff: estimated lambda1 is not in (0, 1)");
  rep.theta_hat = -1.0 / (2.0 * std::log(rep.lyapunov.lambda1));

  MixingOptions mo = opts.mixing;
  std::vector<double> x, late, early;
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    const int n = n_grid[i];
    mo.require_collapse = opts.mixing.require_collapse && i == 0;
    auto res = mixing_times(law, n, {rep.epsilon, 1.0 - rep.epsilon}, MixingMethod::sandwich, mo);
    CutoffRow row;
    row.n = n;
    row.late = std::move(res[0]);
    row.early = std::move(res[1]);
    const double log_n = std::log(static_cast<double>(n));
    const double tl = row.late.crossing.value_or(std::numeric_limits<double>::quiet_NaN());
    const double te = row.early.crossing.value_or(std::numeric_limits<double>::quiet_NaN());
    row.window_ratio = (tl - te) / log_n;
    x.push_back(log_n);
    late.push_back(tl);
    early.push_back(te);
    rep.rows.push_back(std::move(row));
  }
  rep.fit_late = fit_line(x, late);
  rep.fit_early = fit_line(x, early);
  rep.slope_late_ok = std::abs(rep.fit_late.slope / rep.theta_hat - 1.0) <= opts.slope_tolerance;
  rep.slope_early_ok = std::abs(rep.fit_early.slope / rep.theta_hat - 1.0) <= opts.slope_tolerance;
  rep.window_decreasing = true;
  for (std::size_t i = rep.rows.size() / 2 + 1; i < rep.rows.size(); ++i)
    if (!(rep.rows[i].window_ratio < rep.rows[i - 1].window_ratio)) rep.window_decreasing = false;
  return rep;
}

}  // namespace efcp
