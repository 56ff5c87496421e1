#pragma once

// Paintbox laws: distributions over k x k column-stochastic matrices, and
// the random partition matrices they direct.

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "efcp/partitions.hpp"
#include "efcp/rng.hpp"

namespace efcp {

/// k x k matrix with nonnegative entries and unit column sums. Entry (r, c)
/// is the probability that a site of color c is repainted with color r.
class StochasticMatrix {
 public:
  /// Accepts columns summing to 1 within 1e-9 and renormalizes them, so the
  /// stored columns sum to 1 within rounding.
  explicit StochasticMatrix(Eigen::MatrixXd entries);

  static StochasticMatrix identity(int k);
  static StochasticMatrix uniform(int k);
  static StochasticMatrix permutation(std::span<const int> perm);
  static StochasticMatrix from_columns(const std::vector<std::vector<double>>& columns);

  int k() const noexcept { return static_cast<int>(m_.rows()); }
  double operator()(int row, int col) const { return m_(row, col); }
  const Eigen::MatrixXd& matrix() const noexcept { return m_; }
  Eigen::VectorXd column(int col) const { return m_.col(col); }

  /// Matrix product; (a * b) applies b first.
  friend StochasticMatrix operator*(const StochasticMatrix& a, const StochasticMatrix& b);

  friend bool operator==(const StochasticMatrix& a, const StochasticMatrix& b) {
    return a.m_ == b.m_;
  }

 private:
  struct Trusted {};
  StochasticMatrix(Eigen::MatrixXd entries, Trusted) : m_(std::move(entries)) {}

  Eigen::MatrixXd m_;
};

bool approx_equal(const StochasticMatrix& a, const StochasticMatrix& b, double tol);
std::vector<std::vector<double>> columns_of(const StochasticMatrix& s);

class PaintboxLaw;

/// Finitely many matrices with weights.
struct AtomicLaw {
  std::vector<StochasticMatrix> atoms;
  std::vector<double> weights;
};

/// Columns independent, column j ~ Dirichlet(alphas[j]).
struct DirichletColumnsLaw {
  std::vector<std::vector<double>> alphas;
};

/// Columns i.i.d. Dirichlet(alpha).
struct SelfSimilarLaw {
  std::vector<double> alpha;
};

/// Weights over permutation matrices; perms[i][c] is the row receiving color c.
struct PermutationMixLaw {
  std::vector<std::vector<int>> perms;
  std::vector<double> weights;
};

struct PointMassLaw {
  StochasticMatrix matrix;
};

/// Weighted mixture of other laws.
struct MixtureLaw {
  std::vector<PaintboxLaw> components;
  std::vector<double> weights;
};

/// A distribution Sigma over k x k column-stochastic matrices. Immutable.
class PaintboxLaw {
 public:
  using Spec = std::variant<AtomicLaw, DirichletColumnsLaw, SelfSimilarLaw, PermutationMixLaw,
                            PointMassLaw, MixtureLaw>;

  static PaintboxLaw atomic(std::vector<StochasticMatrix> atoms, std::vector<double> weights);
  static PaintboxLaw dirichlet_columns(std::vector<std::vector<double>> alphas);
  static PaintboxLaw self_similar(std::vector<double> alpha);
  static PaintboxLaw permutation_mix(std::vector<std::vector<int>> perms,
                                     std::vector<double> weights);
  /// Uniform weights over all k! permutation matrices.
  static PaintboxLaw uniform_permutations(int k);
  static PaintboxLaw point_mass(StochasticMatrix s);
  static PaintboxLaw mixture(std::vector<PaintboxLaw> components, std::vector<double> weights);

  int k() const noexcept { return k_; }
  const Spec& spec() const noexcept { return *spec_; }
  /// "atomic", "dirichlet_columns", "self_similar", "permutation_mix",
  /// "point_mass" or "mixture".
  std::string kind_name() const;

  /// One draw S ~ Sigma.
  StochasticMatrix sample(RngStream& rng) const;

  /// The support with weights when it is finite (atomic, point mass,
  /// permutation mix, and mixtures of those); nullopt otherwise.
  std::optional<std::vector<std::pair<StochasticMatrix, double>>> finite_support() const;

  /// True for the families whose law has a Lebesgue density of class L^p,
  /// p > 1, on the product of simplices: DirichletColumns and SelfSimilar
  /// (all parameters are positive by construction). Other families report
  /// false; mixtures report true only if every component does.
  bool has_lp_density() const;

 private:
  PaintboxLaw(int k, Spec spec) : k_(k), spec_(std::make_shared<const Spec>(std::move(spec))) {}

  int k_;
  std::shared_ptr<const Spec> spec_;
};

StochasticMatrix sample_S(const PaintboxLaw& law, RngStream& rng);

/// M ~ mu_S: columns independent; in column j each site goes to row r with
/// probability s(r, j).
PartitionMatrix sample_M_given_S(const StochasticMatrix& s, int n, RngStream& rng);

/// Exact mu_S(M).
double partition_matrix_probability(const StochasticMatrix& s, const PartitionMatrix& m);

enum class Verdict { yes, no, unknown };
std::string to_string(Verdict v);

struct RceResult {
  Verdict verdict;
  std::string certificate;
};

/// Row-column exchangeability, decided from the law's structure.
RceResult is_rce(const PaintboxLaw& law);

/// Uniform law over the orbit of s under independent row and column
/// permutations; row-column exchangeable by construction.
PaintboxLaw rce_closure(const StochasticMatrix& s);

/// Uniform law over the k! matrices (1 - c) P + c J / k, P a permutation.
PaintboxLaw lazy_permutations(int k, double c);

std::vector<std::vector<int>> all_permutations(int k);

/// Gamma-normalized Dirichlet draw.
std::vector<double> sample_dirichlet(std::span<const double> alpha, RngStream& rng);

}  // namespace efcp
