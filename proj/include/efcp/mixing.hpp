#pragma once

// Mixing times from the pairwise distance on the block design, and the
// cutoff experiment.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "efcp/paintbox.hpp"
#include "efcp/products.hpp"
#include "efcp/tv_mc.hpp"

namespace efcp {

enum class MixingMethod { exact_atomic, sandwich };
std::string to_string(MixingMethod m);
MixingMethod parse_mixing_method(const std::string& s);

struct MixingOptions {
  int replicates = 10000;
  int m_max = 256;
  std::uint64_t seed = 0;
  double budget = kDefaultTVBudget;
  /// Run collapse_diagnostic first and refuse when it is not "yes".
  bool require_collapse = true;
  int collapse_m_max = 32;
  int collapse_replicates = 256;
  /// Compute MC lower bounds to close the bracket (sandwich only).
  bool lower_bounds = true;
};

struct MixingPoint {
  int m = 0;
  TVEstimate upper;  // exact value for exact_atomic
  std::optional<TVEstimate> lower;
};

struct MixingResult {
  int n = 0;
  double epsilon = 0.0;
  MixingMethod method = MixingMethod::sandwich;
  std::vector<MixingPoint> curve;
  /// Smallest m whose certified distance is below epsilon.
  std::optional<int> t_mix;
  /// The mixing time of the pairwise distance lies in [bracket_lo, bracket_hi].
  int bracket_lo = 1;
  std::optional<int> bracket_hi;
  bool bracket_closed = false;
  /// No certified crossing within m_max.
  bool inconclusive = false;
  /// Where the (upper-bound mean or exact) curve crosses epsilon, by linear
  /// interpolation between consecutive integers.
  std::optional<double> crossing;
};

/// d(m) is the distance between the chains started at the two states of
/// make_block_design(n, k). exact_atomic: exact, certified when d(m) < eps.
/// sandwich: MC upper bound, certified when upper + 3 sigma < eps; MC lower
/// bounds below t_mix give the lower end of the bracket.
std::vector<MixingResult> mixing_times(const PaintboxLaw& law, int n,
                                       const std::vector<double>& epsilons, MixingMethod method,
                                       const MixingOptions& opts);
MixingResult mixing_time(const PaintboxLaw& law, int n, double epsilon, MixingMethod method,
                         const MixingOptions& opts);

struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double slope_std_error = 0.0;
  double slope_ci_lo = 0.0;
  double slope_ci_hi = 0.0;
};
/// Ordinary least squares with a 95% t interval on the slope.
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct CutoffOptions {
  MixingOptions mixing;
  LyapunovOptions lyapunov{2000, 64, 0, 0};
  double slope_tolerance = 0.25;
};

struct CutoffRow {
  int n = 0;
  MixingResult early;  // at 1 - eps (the larger epsilon)
  MixingResult late;   // at eps
  double window_ratio = 0.0;
};

struct CutoffReport {
  double epsilon = 0.0;
  LyapunovEstimate lyapunov;
  double theta_hat = 0.0;
  std::vector<CutoffRow> rows;
  LinearFit fit_late;   // crossing of eps against log n
  LinearFit fit_early;  // crossing of 1 - eps against log n
  bool slope_late_ok = false;
  bool slope_early_ok = false;
  /// Window ratio strictly decreasing over the upper half of the grid.
  bool window_decreasing = false;
};

/// Requires a law with an L^p density (Dirichlet families); refuses others.
CutoffReport cutoff_experiment(const PaintboxLaw& law, const std::vector<int>& n_grid,
                               double epsilon, const CutoffOptions& opts);

}  // namespace efcp
