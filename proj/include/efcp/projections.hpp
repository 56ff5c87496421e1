#pragma once

// Projected (unlabeled) chains and exact comparison of labeled and
// projected mixing times.

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "efcp/chains.hpp"
#include "efcp/paintbox.hpp"

namespace efcp {

struct ProjectedRun {
  ChainRun base;
  std::vector<std::pair<int, UnlabeledPartition>> trajectory;
  /// True when the driving law is RCE, so the projection is a Markov chain.
  bool markov = false;
  std::string note;
};

/// Pointwise projection. Runs without an RCE law are still projected but
/// flagged as diagnostic only.
ProjectedRun project_run(const ChainRun& run);

/// Largest k^n accepted by the exact labeled computations.
inline constexpr double kProjectionStateBudget = 4096;

/// One step of the labeled chain applied to a distribution over [k]^n
/// (indexed by coloring_index): sum over atoms of w * S^{(x)n}.
Eigen::VectorXd labeled_step(const std::vector<std::pair<StochasticMatrix, double>>& atoms, int n,
                             const Eigen::VectorXd& dist);

/// Dense labeled kernel, column x holds the law of X_1 given X_0 = x.
Eigen::MatrixXd labeled_kernel(const PaintboxLaw& law, int n);

/// Stationary law of the labeled chain (unique when the kernel is ergodic).
Eigen::VectorXd labeled_stationary(const PaintboxLaw& law, int n);

/// Index of every unlabeled partition reachable as a projection of [k]^n,
/// and the map from coloring index to partition index.
struct ProjectionMap {
  std::vector<UnlabeledPartition> partitions;
  std::vector<int> of_state;
};
ProjectionMap projection_map(int n, int k);

Eigen::VectorXd push_forward(const ProjectionMap& map, const Eigen::VectorXd& dist);

/// k (k-1) ... (k-r+1).
double falling_factorial(int k, int r);

/// max over x, y of |Q(proj x, proj y) - k^{(r)} P(x, y)|, r the number of
/// blocks of proj y, Q the pushforward kernel. Zero for RCE laws.
double rce_kernel_identity_defect(const PaintboxLaw& law, int n);

struct ProjectionEquivalence {
  int n = 0;
  int k = 0;
  RceResult rce;
  std::vector<double> epsilons;
  /// Index m: max over initial states of the TV to stationarity.
  std::vector<double> labeled_tv;
  std::vector<double> projected_tv;
  std::vector<std::optional<int>> t_labeled;
  std::vector<std::optional<int>> t_projected;
  bool equal = false;
  /// projected_tv <= labeled_tv at every m.
  bool monotone = false;
};

/// Exact t_X(eps) and t_Y(eps), mixing time being the least m >= 1 with
/// max_{x0} TV < eps. Initial states range over one coloring per count
/// vector, which suffices because the laws are exchangeable in the sites.
/// Refused unless is_rce(law) is yes.
ProjectionEquivalence projected_mixing_equivalence(const PaintboxLaw& law, int n,
                                                   const std::vector<double>& epsilons,
                                                   int m_max = 1000);

}  // namespace efcp
