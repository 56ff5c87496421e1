#pragma once

// Monte Carlo bounds on the total variation between the chains started at
// two initial states, driven by the same paintbox law.

#include <cstdint>
#include <vector>

#include "efcp/paintbox.hpp"
#include "efcp/partitions.hpp"
#include "efcp/tv_exact.hpp"

namespace efcp {

/// Paired initial states built from k(k-1) blocks of 2n' sites, one per
/// ordered color pair (i, j), i != j. In block (i, j) the first state is i
/// throughout; the second is i on the first n' sites and j on the last n'.
/// The n - 2k(k-1)n' leftover sites have color 1 in both.
struct BlockDesign {
  int n = 0;
  int k = 0;
  int n_prime = 0;
  Coloring x0;
  Coloring x0_tilde;
  /// Ordered pairs (i, j) and the first site of each block.
  std::vector<std::pair<int, int>> pairs;
  std::vector<int> block_start;
};

/// n' = floor(n / (2k(k-1))); rejects n' = 0.
BlockDesign make_block_design(int n, int k);

struct McOptions {
  int replicates = 10000;
  std::uint64_t seed = 0;
  double budget = kDefaultTVBudget;
};

/// Mean over paintbox paths of the exact conditional TV at step m. By the
/// mixture lemma this bounds the unconditional TV from above. Replicate r
/// uses stream r.
TVEstimate tv_upper_mc(const PaintboxLaw& law, const Coloring& x0, const Coloring& x0_tilde,
                       int m, const McOptions& opts);

/// tv_upper_mc at every m in ms, evaluated along shared paths.
std::vector<TVEstimate> tv_upper_mc_profile(const PaintboxLaw& law, const Coloring& x0,
                                            const Coloring& x0_tilde, const std::vector<int>& ms,
                                            const McOptions& opts);

/// Lower bound from a projection of the count statistic: for one block
/// (i, j) and color c, the counts (U, V) of color c in the two halves.
/// Even replicates estimate both mixture laws of (U, V) for every candidate
/// (block, color), pick the candidate with the largest plug-in TV and fix
/// A = {second law > first law}. Odd replicates estimate the difference of
/// the probabilities of A without bias. The reported value is
/// max(0, mean - 3 sigma). The initial states must be the block design.
TVEstimate tv_lower_mc(const PaintboxLaw& law, const Coloring& x0, const Coloring& x0_tilde,
                       int m, const McOptions& opts);

}  // namespace efcp
