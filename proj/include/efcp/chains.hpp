#pragma once

// Simulators: the CP_n(mu_Sigma) chain by partition matrices and by
// independent coordinates, the induced chain on the simplex, Ehrenfest(alpha)
// and the group-action chain.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "efcp/paintbox.hpp"
#include "efcp/partitions.hpp"

namespace efcp {

struct RunOptions {
  int steps = 0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  /// Keep every thin-th state (plus the initial and final ones).
  int thin = 1;
  bool record_paintbox = false;
};

struct ChainRun {
  std::optional<PaintboxLaw> law;
  Coloring x0;
  int steps = 0;
  std::uint64_t seed = 0;
  /// (step, state) pairs; the first entry is (0, x0).
  std::vector<std::pair<int, Coloring>> trajectory;
  std::vector<StochasticMatrix> paintbox_trace;
  /// Ehrenfest runs only: number of never-refreshed sites after each step,
  /// index t holds R_t (R_0 = n).
  std::vector<int> unrefreshed;

  const Coloring& final_state() const { return trajectory.back().second; }
};

/// Per step: S_t ~ Sigma, M_t ~ mu_{S_t}, X_t = M_t X_{t-1}. S and M draw
/// from separate streams, so an injected paintbox sequence leaves the M
/// draws unchanged.
ChainRun run_efcp_matrix(const PaintboxLaw& law, const Coloring& x0, const RunOptions& opts);
ChainRun run_efcp_matrix(std::span<const StochasticMatrix> paintboxes, const Coloring& x0,
                         const RunOptions& opts);

/// Per step: S_t ~ Sigma, then each site independently moves from color c to
/// color r with probability S_t(r, c).
ChainRun run_efcp_coordinate(const PaintboxLaw& law, const Coloring& x0, const RunOptions& opts);
ChainRun run_efcp_coordinate(std::span<const StochasticMatrix> paintboxes, const Coloring& x0,
                             const RunOptions& opts);

/// Draws S_1..S_steps from the paintbox stream of (seed, stream).
std::vector<StochasticMatrix> sample_paintbox_sequence(const PaintboxLaw& law, int steps,
                                                       std::uint64_t seed,
                                                       std::uint64_t stream = 0);

/// A point of the simplex; validated on construction.
struct SimplexPoint {
  explicit SimplexPoint(std::vector<double> coords);
  int k() const noexcept { return static_cast<int>(coords.size()); }
  std::vector<double> coords;
};

/// Y_0 = y0, Y_m = S_m Y_{m-1}; returns Y_0..Y_steps.
std::vector<SimplexPoint> run_induced_simplex(const PaintboxLaw& law, const SimplexPoint& y0,
                                              const RunOptions& opts);

struct EhrenfestParams {
  int n = 0;
  double alpha = 0.0;
  /// Standard chain: one site per step (alpha = 1/n).
  bool standard = false;

  static EhrenfestParams make_standard(int n) { return {n, 1.0 / n, true}; }
  /// floor(alpha n), guarded against rounding just below an integer.
  int refresh_size() const;
  void validate() const;
};

/// M(A, I): sites in A go to row I in every column, the rest stay put.
PartitionMatrix ehrenfest_matrix(int n, std::span<const int> refreshed, int color);

/// k = 2. Per step a uniform refresh_size()-subset A and a fair coin I;
/// X_t = M(A, I) X_{t-1}. Two runs with the same seed and stream share the
/// (A, I) sequence whatever their initial states.
ChainRun run_ehrenfest(const EhrenfestParams& params, const Coloring& x0, const RunOptions& opts);

/// lambda must satisfy lambda(j) = lambda(k - j + 1) > 0 (1-based).
void check_symmetric_increment_law(std::span<const double> lambda);

/// Per step L_t has i.i.d. lambda coordinates (color j is the shift j - 1)
/// and X_t = M_{L_t} X_{t-1}, which adds L_t coordinatewise mod k.
ChainRun run_group_chain(std::span<const double> lambda, const Coloring& x0,
                         const RunOptions& opts);

}  // namespace efcp
