#include "efcp/paintbox.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "efcp/errors.hpp"

namespace efcp {

namespace {

constexpr double kWeightTolerance = 1e-9;
constexpr double kAtomMatchTolerance = 1e-12;

std::vector<double> normalized_weights(std::vector<double> w, const char* what) {
  if (w.empty()) throw InvalidInput(std::string(what) + ": no weights");
  double total = 0.0;
  for (double x : w) {
    if (!(x >= 0.0) || !std::isfinite(x))
      throw InvalidInput(std::string(what) + ": weights must be finite and nonnegative");
    total += x;
  }
  if (std::abs(total - 1.0) > kWeightTolerance)
    throw InvalidInput(std::string(what) + ": weights sum to " + std::to_string(total) +
                       ", expected 1");
  for (double& x : w) x /= total;
  return w;
}

void check_alpha(std::span<const double> alpha, int k, const char* what) {
  if (static_cast<int>(alpha.size()) != k)
    throw InvalidInput(std::string(what) + ": Dirichlet parameter vector must have length k");
  for (double a : alpha)
    if (!(a > 0.0) || !std::isfinite(a))
      throw InvalidInput(std::string(what) + ": Dirichlet parameters must be positive");
}

std::size_t weighted_choice(std::span<const double> weights, RngStream& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) return i;
  }
  // Rounding left u above the last partial sum; take the last positive weight.
  for (std::size_t i = weights.size(); i-- > 0;)
    if (weights[i] > 0.0) return i;
  return weights.size() - 1;
}

void check_permutation(std::span<const int> perm) {
  std::vector<bool> seen(perm.size(), false);
  for (int p : perm) {
    if (p < 0 || p >= static_cast<int>(perm.size()) || seen[static_cast<std::size_t>(p)])
      throw InvalidInput("not a permutation");
    seen[static_cast<std::size_t>(p)] = true;
  }
}

bool constant_vector(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

// Merge approximately equal atoms, summing their weights.
std::vector<std::pair<StochasticMatrix, double>> merge_atoms(
    const std::vector<std::pair<StochasticMatrix, double>>& atoms) {
  std::vector<std::pair<StochasticMatrix, double>> out;
  for (const auto& [s, w] : atoms) {
    auto it = std::find_if(out.begin(), out.end(), [&](const auto& e) {
      return approx_equal(e.first, s, kAtomMatchTolerance);
    });
    if (it == out.end())
      out.emplace_back(s, w);
    else
      it->second += w;
  }
  return out;
}

std::string describe_transposition(bool rows, int i) {
  std::ostringstream os;
  os << (rows ? "row" : "column") << " transposition (" << i + 1 << ' ' << i + 2 << ')';
  return os.str();
}

RceResult rce_of_support(const std::vector<std::pair<StochasticMatrix, double>>& support, int k) {
  const auto merged = merge_atoms(support);
  // Adjacent transpositions generate the symmetric group, so invariance under
  // them is invariance under every row and column permutation.
  for (int pass = 0; pass < 2; ++pass) {
    const bool rows = pass == 0;
    for (int i = 0; i + 1 < k; ++i) {
      for (std::size_t a = 0; a < merged.size(); ++a) {
        Eigen::MatrixXd image = merged[a].first.matrix();
        if (rows)
          image.row(i).swap(image.row(i + 1));
        else
          image.col(i).swap(image.col(i + 1));
        const StochasticMatrix img{image};
        auto it = std::find_if(merged.begin(), merged.end(), [&](const auto& e) {
          return approx_equal(e.first, img, kAtomMatchTolerance);
        });
        if (it == merged.end())
          return {Verdict::no, describe_transposition(rows, i) + " maps atom " +
                                   std::to_string(a + 1) + " outside the support"};
        if (std::abs(it->second - merged[a].second) > kWeightTolerance)
          return {Verdict::no, describe_transposition(rows, i) + " maps atom " +
                                   std::to_string(a + 1) + " to an atom of different weight"};
      }
    }
  }
  return {Verdict::yes, "support of " + std::to_string(merged.size()) +
                            " atoms is invariant, with weights, under all adjacent row and "
                            "column transpositions"};
}

}  // namespace

// -------------------------------------------------------- StochasticMatrix

StochasticMatrix::StochasticMatrix(Eigen::MatrixXd entries) : m_(std::move(entries)) {
  if (m_.rows() != m_.cols() || m_.rows() < 1 || m_.rows() > kMaxColors)
    throw InvalidInput("stochastic matrix must be k x k with 1 <= k <= " +
                       std::to_string(kMaxColors));
  for (Eigen::Index c = 0; c < m_.cols(); ++c) {
    double sum = 0.0;
    for (Eigen::Index r = 0; r < m_.rows(); ++r) {
      double& x = m_(r, c);
      if (!std::isfinite(x) || x < -1e-12)
        throw InvalidInput("stochastic matrix entries must be nonnegative");
      if (x < 0.0) x = 0.0;
      sum += x;
    }
    if (std::abs(sum - 1.0) > kWeightTolerance)
      throw InvalidInput("column " + std::to_string(c + 1) + " sums to " + std::to_string(sum));
    m_.col(c) /= sum;
  }
}

StochasticMatrix StochasticMatrix::identity(int k) {
  return StochasticMatrix(Eigen::MatrixXd::Identity(k, k));
}

StochasticMatrix StochasticMatrix::uniform(int k) {
  return StochasticMatrix(Eigen::MatrixXd::Constant(k, k, 1.0 / k));
}

StochasticMatrix StochasticMatrix::permutation(std::span<const int> perm) {
  check_permutation(perm);
  const auto k = static_cast<Eigen::Index>(perm.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index c = 0; c < k; ++c) m(perm[static_cast<std::size_t>(c)], c) = 1.0;
  return StochasticMatrix(std::move(m));
}

StochasticMatrix StochasticMatrix::from_columns(const std::vector<std::vector<double>>& columns) {
  const auto k = static_cast<Eigen::Index>(columns.size());
  if (k == 0) throw InvalidInput("stochastic matrix needs at least one column");
  Eigen::MatrixXd m(k, k);
  for (Eigen::Index c = 0; c < k; ++c) {
    if (static_cast<Eigen::Index>(columns[static_cast<std::size_t>(c)].size()) != k)
      throw InvalidInput("stochastic matrix must be square");
    for (Eigen::Index r = 0; r < k; ++r)
      m(r, c) = columns[static_cast<std::size_t>(c)][static_cast<std::size_t>(r)];
  }
  return StochasticMatrix(std::move(m));
}

StochasticMatrix operator*(const StochasticMatrix& a, const StochasticMatrix& b) {
  if (a.k() != b.k()) throw InvalidInput("stochastic matrix product: dimension mismatch");
  Eigen::MatrixXd p = a.m_ * b.m_;
  for (Eigen::Index c = 0; c < p.cols(); ++c) p.col(c) /= p.col(c).sum();
  return StochasticMatrix(std::move(p), StochasticMatrix::Trusted{});
}

bool approx_equal(const StochasticMatrix& a, const StochasticMatrix& b, double tol) {
  return a.k() == b.k() && (a.matrix() - b.matrix()).cwiseAbs().maxCoeff() <= tol;
}

std::vector<std::vector<double>> columns_of(const StochasticMatrix& s) {
  std::vector<std::vector<double>> out(static_cast<std::size_t>(s.k()));
  for (int c = 0; c < s.k(); ++c)
    for (int r = 0; r < s.k(); ++r) out[static_cast<std::size_t>(c)].push_back(s(r, c));
  return out;
}

// ------------------------------------------------------------- PaintboxLaw

PaintboxLaw PaintboxLaw::atomic(std::vector<StochasticMatrix> atoms, std::vector<double> weights) {
  if (atoms.empty() || atoms.size() != weights.size())
    throw InvalidInput("atomic law: need one weight per atom");
  const int k = atoms.front().k();
  for (const auto& a : atoms)
    if (a.k() != k) throw InvalidInput("atomic law: atoms of different sizes");
  weights = normalized_weights(std::move(weights), "atomic law");
  return PaintboxLaw(k, AtomicLaw{std::move(atoms), std::move(weights)});
}

PaintboxLaw PaintboxLaw::dirichlet_columns(std::vector<std::vector<double>> alphas) {
  const int k = static_cast<int>(alphas.size());
  if (k < 1 || k > kMaxColors) throw InvalidInput("dirichlet_columns: need 1..16 columns");
  for (const auto& a : alphas) check_alpha(a, k, "dirichlet_columns");
  return PaintboxLaw(k, DirichletColumnsLaw{std::move(alphas)});
}

PaintboxLaw PaintboxLaw::self_similar(std::vector<double> alpha) {
  const int k = static_cast<int>(alpha.size());
  if (k < 1 || k > kMaxColors) throw InvalidInput("self_similar: need 1..16 parameters");
  check_alpha(alpha, k, "self_similar");
  return PaintboxLaw(k, SelfSimilarLaw{std::move(alpha)});
}

PaintboxLaw PaintboxLaw::permutation_mix(std::vector<std::vector<int>> perms,
                                         std::vector<double> weights) {
  if (perms.empty() || perms.size() != weights.size())
    throw InvalidInput("permutation_mix: need one weight per permutation");
  const int k = static_cast<int>(perms.front().size());
  if (k < 1 || k > kMaxColors) throw InvalidInput("permutation_mix: bad k");
  for (const auto& p : perms) {
    if (static_cast<int>(p.size()) != k)
      throw InvalidInput("permutation_mix: permutations of different sizes");
    check_permutation(p);
  }
  weights = normalized_weights(std::move(weights), "permutation_mix");
  return PaintboxLaw(k, PermutationMixLaw{std::move(perms), std::move(weights)});
}

PaintboxLaw PaintboxLaw::uniform_permutations(int k) {
  if (k < 1 || k > 8) throw InvalidInput("uniform_permutations: k must be in [1, 8]");
  auto perms = all_permutations(k);
  std::vector<double> w(perms.size(), 1.0 / static_cast<double>(perms.size()));
  return permutation_mix(std::move(perms), std::move(w));
}

PaintboxLaw PaintboxLaw::point_mass(StochasticMatrix s) {
  const int k = s.k();
  return PaintboxLaw(k, PointMassLaw{std::move(s)});
}

PaintboxLaw PaintboxLaw::mixture(std::vector<PaintboxLaw> components, std::vector<double> weights) {
  if (components.empty() || components.size() != weights.size())
    throw InvalidInput("mixture: need one weight per component");
  const int k = components.front().k();
  for (const auto& c : components)
    if (c.k() != k) throw InvalidInput("mixture: components of different sizes");
  weights = normalized_weights(std::move(weights), "mixture");
  return PaintboxLaw(k, MixtureLaw{std::move(components), std::move(weights)});
}

std::string PaintboxLaw::kind_name() const {
  struct Visitor {
    std::string operator()(const AtomicLaw&) const { return "atomic"; }
    std::string operator()(const DirichletColumnsLaw&) const { return "dirichlet_columns"; }
    std::string operator()(const SelfSimilarLaw&) const { return "self_similar"; }
    std::string operator()(const PermutationMixLaw&) const { return "permutation_mix"; }
    std::string operator()(const PointMassLaw&) const { return "point_mass"; }
    std::string operator()(const MixtureLaw&) const { return "mixture"; }
  };
  return std::visit(Visitor{}, *spec_);
}

std::vector<double> sample_dirichlet(std::span<const double> alpha, RngStream& rng) {
  std::vector<double> out(alpha.size());
  for (;;) {
    double total = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
      std::gamma_distribution<double> gamma(alpha[i], 1.0);
      out[i] = gamma(rng);
      total += out[i];
    }
    // All components underflowing is possible only for tiny parameters.
    if (total > 0.0) {
      for (double& x : out) x /= total;
      return out;
    }
  }
}

StochasticMatrix PaintboxLaw::sample(RngStream& rng) const {
  const int k = k_;
  struct Visitor {
    RngStream& rng;
    int k;
    StochasticMatrix operator()(const AtomicLaw& l) const {
      return l.atoms[weighted_choice(l.weights, rng)];
    }
    StochasticMatrix operator()(const DirichletColumnsLaw& l) const {
      Eigen::MatrixXd m(k, k);
      for (int c = 0; c < k; ++c) {
        const auto col = sample_dirichlet(l.alphas[static_cast<std::size_t>(c)], rng);
        for (int r = 0; r < k; ++r) m(r, c) = col[static_cast<std::size_t>(r)];
      }
      return StochasticMatrix(std::move(m));
    }
    StochasticMatrix operator()(const SelfSimilarLaw& l) const {
      Eigen::MatrixXd m(k, k);
      for (int c = 0; c < k; ++c) {
        const auto col = sample_dirichlet(l.alpha, rng);
        for (int r = 0; r < k; ++r) m(r, c) = col[static_cast<std::size_t>(r)];
      }
      return StochasticMatrix(std::move(m));
    }
    StochasticMatrix operator()(const PermutationMixLaw& l) const {
      return StochasticMatrix::permutation(l.perms[weighted_choice(l.weights, rng)]);
    }
    StochasticMatrix operator()(const PointMassLaw& l) const { return l.matrix; }
    StochasticMatrix operator()(const MixtureLaw& l) const {
      return l.components[weighted_choice(l.weights, rng)].sample(rng);
    }
  };
  return std::visit(Visitor{rng, k}, *spec_);
}

std::optional<std::vector<std::pair<StochasticMatrix, double>>> PaintboxLaw::finite_support()
    const {
  using Support = std::vector<std::pair<StochasticMatrix, double>>;
  struct Visitor {
    std::optional<Support> operator()(const AtomicLaw& l) const {
      Support s;
      for (std::size_t i = 0; i < l.atoms.size(); ++i) s.emplace_back(l.atoms[i], l.weights[i]);
      return s;
    }
    std::optional<Support> operator()(const DirichletColumnsLaw&) const { return std::nullopt; }
    std::optional<Support> operator()(const SelfSimilarLaw&) const { return std::nullopt; }
    std::optional<Support> operator()(const PermutationMixLaw& l) const {
      Support s;
      for (std::size_t i = 0; i < l.perms.size(); ++i)
        s.emplace_back(StochasticMatrix::permutation(l.perms[i]), l.weights[i]);
      return s;
    }
    std::optional<Support> operator()(const PointMassLaw& l) const {
      return Support{{l.matrix, 1.0}};
    }
    std::optional<Support> operator()(const MixtureLaw& l) const {
      Support s;
      for (std::size_t i = 0; i < l.components.size(); ++i) {
        auto part = l.components[i].finite_support();
        if (!part) return std::nullopt;
        for (auto& [m, w] : *part) s.emplace_back(std::move(m), w * l.weights[i]);
      }
      return s;
    }
  };
  return std::visit(Visitor{}, *spec_);
}

bool PaintboxLaw::has_lp_density() const {
  if (std::holds_alternative<DirichletColumnsLaw>(*spec_) ||
      std::holds_alternative<SelfSimilarLaw>(*spec_))
    return true;
  if (const auto* mix = std::get_if<MixtureLaw>(spec_.get()))
    return std::all_of(mix->components.begin(), mix->components.end(),
                       [](const PaintboxLaw& c) { return c.has_lp_density(); });
  return false;
}

StochasticMatrix sample_S(const PaintboxLaw& law, RngStream& rng) { return law.sample(rng); }

PartitionMatrix sample_M_given_S(const StochasticMatrix& s, int n, RngStream& rng) {
  const int k = s.k();
  std::vector<Coloring> cols;
  cols.reserve(static_cast<std::size_t>(k));
  std::vector<double> cdf(static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) {
    double acc = 0.0;
    int last_positive = 0;
    for (int r = 0; r < k; ++r) {
      acc += s(r, c);
      cdf[static_cast<std::size_t>(r)] = acc;
      if (s(r, c) > 0.0) last_positive = r;
    }
    std::vector<std::uint8_t> word(static_cast<std::size_t>(n));
    for (auto& w : word) {
      const double u = rng.uniform();
      int r = 0;
      while (r < k - 1 && !(u < cdf[static_cast<std::size_t>(r)])) ++r;
      // Rounding in the last partial sum must not pick a zero-probability row.
      if (s(r, c) == 0.0) r = last_positive;
      w = static_cast<std::uint8_t>(r);
    }
    cols.emplace_back(k, std::move(word));
  }
  return PartitionMatrix::from_columns(cols);
}

double partition_matrix_probability(const StochasticMatrix& s, const PartitionMatrix& m) {
  if (s.k() != m.k()) throw InvalidInput("mu_S: dimension mismatch");
  double p = 1.0;
  for (int c = 0; c < m.k(); ++c)
    for (int i = 0; i < m.n(); ++i) p *= s(m.row_of(i, c), c);
  return p;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::yes:
      return "yes";
    case Verdict::no:
      return "no";
    case Verdict::unknown:
      return "unknown";
  }
  return "unknown";
}

RceResult is_rce(const PaintboxLaw& law) {
  const int k = law.k();
  const auto& spec = law.spec();
  if (const auto* d = std::get_if<SelfSimilarLaw>(&spec)) {
    if (constant_vector(d->alpha))
      return {Verdict::yes, "i.i.d. columns with a symmetric Dirichlet law"};
    return {Verdict::no, "Dirichlet parameter vector is not constant, so permuting rows changes "
                         "the column law"};
  }
  if (const auto* d = std::get_if<DirichletColumnsLaw>(&spec)) {
    for (const auto& a : d->alphas)
      if (a != d->alphas.front())
        return {Verdict::no, "columns have different Dirichlet laws, so permuting columns changes "
                             "the law"};
    if (!constant_vector(d->alphas.front()))
      return {Verdict::no, "Dirichlet parameter vector is not constant, so permuting rows "
                           "changes the column law"};
    return {Verdict::yes, "i.i.d. columns with a symmetric Dirichlet law"};
  }
  if (const auto* mix = std::get_if<MixtureLaw>(&spec)) {
    for (const auto& c : mix->components)
      if (is_rce(c).verdict != Verdict::yes)
        return {Verdict::unknown, "mixture with a component that is not RCE; a mixture can be "
                                  "exchangeable without its components being so"};
    return {Verdict::yes, "every mixture component is RCE"};
  }
  return rce_of_support(*law.finite_support(), k);
}

std::vector<std::vector<int>> all_permutations(int k) {
  std::vector<int> p(static_cast<std::size_t>(k));
  std::iota(p.begin(), p.end(), 0);
  std::vector<std::vector<int>> out;
  do {
    out.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

PaintboxLaw rce_closure(const StochasticMatrix& s) {
  const int k = s.k();
  if (k > 5) throw InvalidInput("rce_closure: k! squared atoms is too many for k > 5");
  const auto perms = all_permutations(k);
  std::vector<std::pair<StochasticMatrix, double>> images;
  const double w = 1.0 / static_cast<double>(perms.size() * perms.size());
  for (const auto& rp : perms)
    for (const auto& cp : perms) {
      Eigen::MatrixXd m(k, k);
      for (int r = 0; r < k; ++r)
        for (int c = 0; c < k; ++c)
          m(rp[static_cast<std::size_t>(r)], cp[static_cast<std::size_t>(c)]) = s(r, c);
      images.emplace_back(StochasticMatrix(std::move(m)), w);
    }
  auto merged = merge_atoms(images);
  std::vector<StochasticMatrix> atoms;
  std::vector<double> weights;
  for (auto& [m, wt] : merged) {
    atoms.push_back(std::move(m));
    weights.push_back(wt);
  }
  return PaintboxLaw::atomic(std::move(atoms), std::move(weights));
}

PaintboxLaw lazy_permutations(int k, double c) {
  if (!(c >= 0.0 && c <= 1.0)) throw InvalidInput("lazy_permutations: c must be in [0, 1]");
  const auto perms = all_permutations(k);
  std::vector<StochasticMatrix> atoms;
  for (const auto& p : perms)
    atoms.emplace_back((1.0 - c) * StochasticMatrix::permutation(p).matrix() +
                       Eigen::MatrixXd::Constant(k, k, c / k));
  std::vector<double> w(perms.size(), 1.0 / static_cast<double>(perms.size()));
  return PaintboxLaw::atomic(std::move(atoms), std::move(w));
}

}  // namespace efcp
