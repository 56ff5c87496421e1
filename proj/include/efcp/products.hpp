#pragma once

// Random products Q_m = S_m ... S_1, their restriction to the subspace V
// orthogonal to the all-ones vector, and Lyapunov exponents on V.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "efcp/paintbox.hpp"

namespace efcp {

/// Helmert basis of V: k x (k-1), orthonormal columns orthogonal to 1.
Eigen::MatrixXd helmert_basis(int k);

/// H^T q H, the (k-1) x (k-1) matrix of q|V in the Helmert basis.
Eigen::MatrixXd restrict_to_V(const StochasticMatrix& q);

/// Singular values of q|V, descending.
Eigen::VectorXd singular_values_on_V(const StochasticMatrix& q);
double top_singular_on_V(const StochasticMatrix& q);

/// Euclidean diameter of q(simplex), attained at a pair of vertices.
double simplex_diameter(const StochasticMatrix& q);

/// Running product with a QR-renormalized frame of V.
///
/// The frame lives in R^k coordinates. Each step maps it by s, removes the
/// component along 1 that rounding introduces, and re-orthonormalizes by
/// modified Gram-Schmidt with one reorthogonalization pass. A slot whose
/// diagonal factor falls below 1e-12 has collapsed: it leaves the frame and
/// its log sum becomes -inf.
class ProductState {
 public:
  explicit ProductState(int k);

  void step(const StochasticMatrix& s);

  int k() const noexcept { return static_cast<int>(q_.rows()); }
  int m() const noexcept { return m_; }
  /// Q_m, renormalized column-wise after every product.
  const Eigen::MatrixXd& q() const noexcept { return q_; }
  /// Orthonormal columns spanning the surviving image directions.
  const Eigen::MatrixXd& frame() const noexcept { return frame_; }
  /// Per-slot sums of log diagonal factors; -inf for collapsed slots.
  const std::vector<double>& log_r_sums() const noexcept { return log_r_sums_; }
  /// log of the diagonal factors of the last step (-inf where collapsed).
  const std::vector<double>& last_log_r() const noexcept { return last_log_r_; }
  bool degenerate() const noexcept { return degenerate_; }

 private:
  Eigen::MatrixXd q_;
  Eigen::MatrixXd frame_;
  std::vector<int> slots_;  // slot index of each frame column
  std::vector<double> log_r_sums_;
  std::vector<double> last_log_r_;
  int m_ = 0;
  bool degenerate_ = false;
};

/// log |det(s|V)|, floored at -700. floor_hit reports whether the floor applied.
double log_abs_det_on_V(const StochasticMatrix& s, bool* floor_hit = nullptr);

struct LyapunovEstimate {
  double lambda1 = 0.0;
  /// exp of the per-direction exponents, descending.
  std::vector<double> spectrum;
  /// Per-direction log exponents, descending (may be -inf).
  std::vector<double> exponents;
  double kappa_hat = 0.0;
  double kappa_std_error = 0.0;
  int m = 0;
  int replicates = 0;
  /// Standard error of lambda1 across replicates (delta method from the log).
  double std_error = 0.0;
  double log_std_error = 0.0;
  std::vector<std::string> flags;
  /// Running plain exponent estimates log_r_sums / t of replicate 0, one row
  /// per recorded step (empty unless requested).
  std::vector<std::pair<int, std::vector<double>>> trace;
};

struct LyapunovOptions {
  int m = 1000;
  int replicates = 16;
  std::uint64_t seed = 0;
  /// Record the running estimate of replicate 0 every trace_every steps (0: off).
  int trace_every = 0;
};

/// Per replicate, a QR walk of m steps. The per-direction exponent of a
/// path is a weighted average of its log diagonal increments, with the
/// smooth bump weight exp(-1/(s(1-s))) over s = t/(m+1); this discards the
/// transient of the frame and converges much faster than log_r_sums/m when
/// the increments are quasi-periodic. kappa_hat is the plain mean of
/// log|det(S|V)| over all draws.
LyapunovEstimate estimate_lyapunov(const PaintboxLaw& law, const LyapunovOptions& opts);

/// Normalized bump weights w_1..w_m.
std::vector<double> bump_weights(int m);

struct CollapseReport {
  int m_max = 0;
  int replicates = 0;
  double delta = 0.0;
  /// Index m-1: fraction of paths with top singular value of Q_m|V < 1 - delta.
  std::vector<double> p_contracting;
  /// Index m-1: fraction of paths with every entry of Q_m positive.
  std::vector<double> p_positive;
  bool collapse = false;
  int first_m = 0;  // first m at which either event was seen (0 if never)
  /// "yes" or "undetermined".
  std::string verdict() const { return collapse ? "yes" : "undetermined"; }
};

CollapseReport collapse_diagnostic(const PaintboxLaw& law, int m_max = 32, int replicates = 256,
                                   std::uint64_t seed = 0, double delta = 1e-6);

}  // namespace efcp
