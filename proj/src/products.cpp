#include "efcp/products.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "efcp/errors.hpp"
#include "efcp/parallel.hpp"

namespace efcp {

namespace {

constexpr double kCollapseTolerance = 1e-12;
constexpr double kLogDetFloor = -700.0;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require_k_at_least_2(int k, const char* what) {
  if (k < 2) throw InvalidInput(std::string(what) + ": needs k >= 2 (V is trivial for k = 1)");
}

}  // namespace

Eigen::MatrixXd helmert_basis(int k) {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(k, std::max(k - 1, 0));
  for (int j = 1; j < k; ++j) {
    const double norm = std::sqrt(static_cast<double>(j) * (j + 1));
    for (int i = 0; i < j; ++i) h(i, j - 1) = 1.0 / norm;
    h(j, j - 1) = -static_cast<double>(j) / norm;
  }
  return h;
}

Eigen::MatrixXd restrict_to_V(const StochasticMatrix& q) {
  const Eigen::MatrixXd h = helmert_basis(q.k());
  return h.transpose() * q.matrix() * h;
}

Eigen::VectorXd singular_values_on_V(const StochasticMatrix& q) {
  if (q.k() < 2) return Eigen::VectorXd(0);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(restrict_to_V(q));
  return svd.singularValues();
}

double top_singular_on_V(const StochasticMatrix& q) {
  const auto sv = singular_values_on_V(q);
  return sv.size() == 0 ? 0.0 : sv(0);
}

double simplex_diameter(const StochasticMatrix& q) {
  double best = 0.0;
  for (int i = 0; i < q.k(); ++i)
    for (int j = i + 1; j < q.k(); ++j)
      best = std::max(best, (q.matrix().col(i) - q.matrix().col(j)).norm());
  return best;
}

double log_abs_det_on_V(const StochasticMatrix& s, bool* floor_hit) {
  const double d = std::abs(restrict_to_V(s).determinant());
  double v = d > 0.0 ? std::log(d) : kNegInf;
  const bool hit = v < kLogDetFloor;
  if (hit) v = kLogDetFloor;
  if (floor_hit) *floor_hit = hit;
  return v;
}

// ----------------------------------------------------------- ProductState

ProductState::ProductState(int k)
    : q_(Eigen::MatrixXd::Identity(k, k)),
      frame_(helmert_basis(k)),
      slots_(static_cast<std::size_t>(std::max(k - 1, 0))),
      log_r_sums_(static_cast<std::size_t>(std::max(k - 1, 0)), 0.0),
      last_log_r_(static_cast<std::size_t>(std::max(k - 1, 0)), 0.0) {
  require_k_at_least_2(k, "product state");
  std::iota(slots_.begin(), slots_.end(), 0);
}

void ProductState::step(const StochasticMatrix& s) {
  if (s.k() != k()) throw InvalidInput("product step: dimension mismatch");
  q_ = s.matrix() * q_;
  for (Eigen::Index c = 0; c < q_.cols(); ++c) q_.col(c) /= q_.col(c).sum();
  ++m_;

  std::fill(last_log_r_.begin(), last_log_r_.end(), kNegInf);
  Eigen::MatrixXd image = s.matrix() * frame_;
  std::vector<int> kept_slots;
  Eigen::MatrixXd kept(image.rows(), image.cols());
  int kept_count = 0;
  for (Eigen::Index c = 0; c < image.cols(); ++c) {
    Eigen::VectorXd v = image.col(c);
    v.array() -= v.mean();
    double r = 0.0;
    for (int pass = 0; pass < 2; ++pass) {
      for (int p = 0; p < kept_count; ++p) {
        const double proj = kept.col(p).dot(v);
        v -= proj * kept.col(p);
      }
      v.array() -= v.mean();
    }
    r = v.norm();
    const int slot = slots_[static_cast<std::size_t>(c)];
    if (r < kCollapseTolerance) {
      log_r_sums_[static_cast<std::size_t>(slot)] = kNegInf;
      degenerate_ = true;
      continue;
    }
    kept.col(kept_count++) = v / r;
    kept_slots.push_back(slot);
    const double lr = std::log(r);
    last_log_r_[static_cast<std::size_t>(slot)] = lr;
    log_r_sums_[static_cast<std::size_t>(slot)] += lr;
  }
  frame_ = kept.leftCols(kept_count);
  slots_ = std::move(kept_slots);
}

// ------------------------------------------------------------- Lyapunov

std::vector<double> bump_weights(int m) {
  std::vector<double> w(static_cast<std::size_t>(std::max(m, 0)));
  double total = 0.0;
  for (int t = 1; t <= m; ++t) {
    const double s = static_cast<double>(t) / (m + 1);
    const double v = std::exp(-1.0 / (s * (1.0 - s)));
    w[static_cast<std::size_t>(t - 1)] = v;
    total += v;
  }
  for (double& v : w) v /= total;
  return w;
}

LyapunovEstimate estimate_lyapunov(const PaintboxLaw& law, const LyapunovOptions& opts) {
  const int k = law.k();
  require_k_at_least_2(k, "lyapunov");
  if (opts.m < 1) throw InvalidInput("lyapunov: m must be >= 1");
  if (opts.replicates < 1) throw InvalidInput("lyapunov: replicates must be >= 1");
  const int d = k - 1;
  const auto weights = bump_weights(opts.m);

  struct PathResult {
    std::vector<double> exponents;
    double kappa_sum = 0.0;
    bool floor_hit = false;
    std::vector<std::pair<int, std::vector<double>>> trace;
  };
  std::vector<PathResult> paths(static_cast<std::size_t>(opts.replicates));

  parallel_for(paths.size(), [&](std::size_t r) {
    RngStream rng(opts.seed, r);
    ProductState state(k);
    PathResult& out = paths[r];
    out.exponents.assign(static_cast<std::size_t>(d), 0.0);
    for (int t = 1; t <= opts.m; ++t) {
      const StochasticMatrix s = law.sample(rng);
      bool hit = false;
      out.kappa_sum += log_abs_det_on_V(s, &hit);
      out.floor_hit = out.floor_hit || hit;
      state.step(s);
      const double w = weights[static_cast<std::size_t>(t - 1)];
      for (int j = 0; j < d; ++j) {
        const double inc = state.last_log_r()[static_cast<std::size_t>(j)];
        double& e = out.exponents[static_cast<std::size_t>(j)];
        if (inc == kNegInf)
          e = kNegInf;
        else if (e != kNegInf)
          e += w * inc;
      }
      if (r == 0 && opts.trace_every > 0 && (t % opts.trace_every == 0 || t == opts.m)) {
        std::vector<double> row(static_cast<std::size_t>(d));
        for (int j = 0; j < d; ++j)
          row[static_cast<std::size_t>(j)] = state.log_r_sums()[static_cast<std::size_t>(j)] / t;
        out.trace.emplace_back(t, std::move(row));
      }
    }
    std::sort(out.exponents.begin(), out.exponents.end(), std::greater<>());
  });

  LyapunovEstimate est;
  est.m = opts.m;
  est.replicates = opts.replicates;
  est.trace = std::move(paths.front().trace);
  const auto reps = static_cast<double>(opts.replicates);

  est.exponents.assign(static_cast<std::size_t>(d), 0.0);
  bool collapsed_top = false;
  bool floor_hit = false;
  double kappa_total = 0.0;
  std::vector<double> kappa_means;
  for (const auto& p : paths) {
    for (int j = 0; j < d; ++j) est.exponents[static_cast<std::size_t>(j)] += p.exponents[static_cast<std::size_t>(j)];
    collapsed_top = collapsed_top || p.exponents.front() == kNegInf;
    floor_hit = floor_hit || p.floor_hit;
    kappa_total += p.kappa_sum;
    kappa_means.push_back(p.kappa_sum / opts.m);
  }
  for (double& e : est.exponents) e /= reps;
  for (double e : est.exponents) est.spectrum.push_back(std::exp(e));
  est.lambda1 = est.spectrum.front();
  est.kappa_hat = kappa_total / (reps * opts.m);

  if (opts.replicates > 1) {
    if (!collapsed_top) {
      double ss = 0.0;
      for (const auto& p : paths) {
        const double dev = p.exponents.front() - est.exponents.front();
        ss += dev * dev;
      }
      est.log_std_error = std::sqrt(ss / (reps - 1.0) / reps);
      est.std_error = est.lambda1 * est.log_std_error;
    }
    double ss = 0.0;
    for (double v : kappa_means) ss += (v - est.kappa_hat) * (v - est.kappa_hat);
    est.kappa_std_error = std::sqrt(ss / (reps - 1.0) / reps);
  }
  if (collapsed_top) est.flags.emplace_back("super_exponential_collapse");
  else if (std::any_of(est.exponents.begin(), est.exponents.end(),
                       [](double e) { return e == kNegInf; }))
    est.flags.emplace_back("partial_rank_collapse");
  if (floor_hit) est.flags.emplace_back("log_det_floor_hit");
  return est;
}

// ------------------------------------------------------------- collapse

CollapseReport collapse_diagnostic(const PaintboxLaw& law, int m_max, int replicates,
                                   std::uint64_t seed, double delta) {
  const int k = law.k();
  require_k_at_least_2(k, "collapse diagnostic");
  if (m_max < 1 || replicates < 1)
    throw InvalidInput("collapse diagnostic: m_max and replicates must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidInput("collapse diagnostic: delta in (0, 1)");

  std::vector<std::vector<std::uint8_t>> contracting(static_cast<std::size_t>(replicates));
  std::vector<std::vector<std::uint8_t>> positive(static_cast<std::size_t>(replicates));
  parallel_for(static_cast<std::size_t>(replicates), [&](std::size_t r) {
    RngStream rng(seed, r);
    StochasticMatrix q = StochasticMatrix::identity(k);
    for (int m = 1; m <= m_max; ++m) {
      q = law.sample(rng) * q;
      contracting[r].push_back(top_singular_on_V(q) < 1.0 - delta);
      positive[r].push_back((q.matrix().array() > 0.0).all());
    }
  });

  CollapseReport rep;
  rep.m_max = m_max;
  rep.replicates = replicates;
  rep.delta = delta;
  for (int m = 0; m < m_max; ++m) {
    int c = 0;
    int p = 0;
    for (int r = 0; r < replicates; ++r) {
      c += contracting[static_cast<std::size_t>(r)][static_cast<std::size_t>(m)];
      p += positive[static_cast<std::size_t>(r)][static_cast<std::size_t>(m)];
    }
    rep.p_contracting.push_back(static_cast<double>(c) / replicates);
    rep.p_positive.push_back(static_cast<double>(p) / replicates);
    if (!rep.collapse && (c > 0 || p > 0)) {
      rep.collapse = true;
      rep.first_m = m + 1;
    }
  }
  return rep;
}

}  // namespace efcp
