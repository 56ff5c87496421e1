#include "efcp/chains.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "efcp/errors.hpp"

namespace efcp {

namespace {

std::uint64_t paintbox_stream(std::uint64_t stream) { return 2 * stream; }
std::uint64_t site_stream(std::uint64_t stream) { return 2 * stream + 1; }

void check_options(const RunOptions& opts) {
  if (opts.steps < 0) throw InvalidInput("steps must be nonnegative");
  if (opts.thin < 1) throw InvalidInput("thin must be >= 1");
}

bool keep(int t, const RunOptions& opts) { return t % opts.thin == 0 || t == opts.steps; }

ChainRun start_run(const Coloring& x0, const RunOptions& opts) {
  check_options(opts);
  ChainRun run;
  run.x0 = x0;
  run.steps = opts.steps;
  run.seed = opts.seed;
  run.trajectory.emplace_back(0, x0);
  return run;
}

// Index of the row chosen by uniform u against the cumulative column.
int pick(const std::vector<double>& cdf, const std::vector<double>& col, double u) {
  const int k = static_cast<int>(cdf.size());
  int r = 0;
  while (r < k - 1 && !(u < cdf[static_cast<std::size_t>(r)])) ++r;
  if (col[static_cast<std::size_t>(r)] == 0.0) {
    while (r > 0 && col[static_cast<std::size_t>(r)] == 0.0) --r;
  }
  return r;
}

template <class Next>
ChainRun run_with(const Coloring& x0, const RunOptions& opts, const PaintboxLaw* law,
                  std::span<const StochasticMatrix> injected, Next next) {
  if (law == nullptr && static_cast<int>(injected.size()) < opts.steps)
    throw InvalidInput("injected paintbox sequence shorter than the number of steps");
  ChainRun run = start_run(x0, opts);
  if (law) run.law = *law;
  RngStream s_rng(opts.seed, paintbox_stream(opts.stream));
  RngStream m_rng(opts.seed, site_stream(opts.stream));
  Coloring x = x0;
  for (int t = 1; t <= opts.steps; ++t) {
    const StochasticMatrix s =
        law ? law->sample(s_rng) : injected[static_cast<std::size_t>(t - 1)];
    if (s.k() != x.k()) throw InvalidInput("paintbox and coloring disagree on k");
    x = next(s, x, m_rng);
    if (opts.record_paintbox) run.paintbox_trace.push_back(s);
    if (keep(t, opts)) run.trajectory.emplace_back(t, x);
  }
  return run;
}

Coloring matrix_step(const StochasticMatrix& s, const Coloring& x, RngStream& rng) {
  return act(sample_M_given_S(s, x.n(), rng), x);
}

Coloring coordinate_step(const StochasticMatrix& s, const Coloring& x, RngStream& rng) {
  const int k = s.k();
  std::vector<std::vector<double>> cdf(static_cast<std::size_t>(k));
  const auto cols = columns_of(s);
  for (int c = 0; c < k; ++c) {
    auto& v = cdf[static_cast<std::size_t>(c)];
    v.resize(static_cast<std::size_t>(k));
    std::partial_sum(cols[static_cast<std::size_t>(c)].begin(),
                     cols[static_cast<std::size_t>(c)].end(), v.begin());
  }
  std::vector<std::uint8_t> word(static_cast<std::size_t>(x.n()));
  for (int i = 0; i < x.n(); ++i) {
    const auto c = static_cast<std::size_t>(x[i]);
    word[static_cast<std::size_t>(i)] =
        static_cast<std::uint8_t>(pick(cdf[c], cols[c], rng.uniform()));
  }
  return Coloring(k, std::move(word));
}

}  // namespace

ChainRun run_efcp_matrix(const PaintboxLaw& law, const Coloring& x0, const RunOptions& opts) {
  if (law.k() != x0.k()) throw InvalidInput("law and initial state disagree on k");
  return run_with(x0, opts, &law, {}, matrix_step);
}

ChainRun run_efcp_matrix(std::span<const StochasticMatrix> paintboxes, const Coloring& x0,
                         const RunOptions& opts) {
  return run_with(x0, opts, nullptr, paintboxes, matrix_step);
}

ChainRun run_efcp_coordinate(const PaintboxLaw& law, const Coloring& x0, const RunOptions& opts) {
  if (law.k() != x0.k()) throw InvalidInput("law and initial state disagree on k");
  return run_with(x0, opts, &law, {}, coordinate_step);
}

ChainRun run_efcp_coordinate(std::span<const StochasticMatrix> paintboxes, const Coloring& x0,
                             const RunOptions& opts) {
  return run_with(x0, opts, nullptr, paintboxes, coordinate_step);
}

std::vector<StochasticMatrix> sample_paintbox_sequence(const PaintboxLaw& law, int steps,
                                                       std::uint64_t seed,
                                                       std::uint64_t stream) {
  RngStream rng(seed, paintbox_stream(stream));
  std::vector<StochasticMatrix> out;
  out.reserve(static_cast<std::size_t>(std::max(steps, 0)));
  for (int t = 0; t < steps; ++t) out.push_back(law.sample(rng));
  return out;
}

// ------------------------------------------------------------- simplex

SimplexPoint::SimplexPoint(std::vector<double> c) : coords(std::move(c)) {
  if (coords.empty()) throw InvalidInput("simplex point needs at least one coordinate");
  double total = 0.0;
  for (double v : coords) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw InvalidInput("simplex point coordinates must be nonnegative");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw InvalidInput("simplex point coordinates must sum to 1");
}

std::vector<SimplexPoint> run_induced_simplex(const PaintboxLaw& law, const SimplexPoint& y0,
                                              const RunOptions& opts) {
  check_options(opts);
  if (law.k() != y0.k()) throw InvalidInput("law and simplex point disagree on k");
  RngStream rng(opts.seed, paintbox_stream(opts.stream));
  std::vector<SimplexPoint> out{y0};
  Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(y0.coords.data(), y0.k());
  for (int t = 1; t <= opts.steps; ++t) {
    y = law.sample(rng).matrix() * y;
    y = y.cwiseMax(0.0);
    y /= y.sum();
    if (keep(t, opts)) out.emplace_back(std::vector<double>(y.data(), y.data() + y.size()));
  }
  return out;
}

// ----------------------------------------------------------- Ehrenfest

int EhrenfestParams::refresh_size() const {
  if (standard) return 1;
  return static_cast<int>(std::floor(alpha * n + 1e-9));
}

void EhrenfestParams::validate() const {
  if (n < 1) throw InvalidInput("ehrenfest: n must be positive");
  if (!standard && !(alpha > 0.0 && alpha < 1.0))
    throw InvalidInput("ehrenfest: alpha must be in (0, 1)");
  const int a = refresh_size();
  if (a < 1) throw InvalidInput("ehrenfest: floor(alpha n) must be >= 1");
  if (a > n) throw InvalidInput("ehrenfest: floor(alpha n) exceeds n");
}

PartitionMatrix ehrenfest_matrix(int n, std::span<const int> refreshed, int color) {
  if (color < 0 || color > 1) throw InvalidInput("ehrenfest matrix: color must be 0 or 1");
  std::vector<std::uint8_t> in_a(static_cast<std::size_t>(n), 0);
  for (int i : refreshed) {
    if (i < 0 || i >= n) throw InvalidInput("ehrenfest matrix: site out of range");
    in_a[static_cast<std::size_t>(i)] = 1;
  }
  std::vector<Coloring> cols;
  for (int j = 0; j < 2; ++j) {
    std::vector<std::uint8_t> word(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      word[static_cast<std::size_t>(i)] =
          static_cast<std::uint8_t>(in_a[static_cast<std::size_t>(i)] ? color : j);
    cols.emplace_back(2, std::move(word));
  }
  return PartitionMatrix::from_columns(cols);
}

ChainRun run_ehrenfest(const EhrenfestParams& params, const Coloring& x0, const RunOptions& opts) {
  params.validate();
  if (x0.k() != 2 || x0.n() != params.n)
    throw InvalidInput("ehrenfest: initial state must be a 2-coloring of [n]");
  ChainRun run = start_run(x0, opts);
  const int n = params.n;
  const int a = params.refresh_size();
  RngStream rng(opts.seed, opts.stream);
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::uint8_t> word(x0.word().begin(), x0.word().end());
  std::vector<std::uint8_t> touched(static_cast<std::size_t>(n), 0);
  int unrefreshed = n;
  run.unrefreshed.push_back(n);
  for (int t = 1; t <= opts.steps; ++t) {
    // Partial Fisher-Yates: the first a entries become a uniform a-subset.
    for (int i = 0; i < a; ++i) {
      const int j = std::uniform_int_distribution<int>(i, n - 1)(rng);
      std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }
    const auto color = static_cast<std::uint8_t>(rng() & 1u);
    for (int i = 0; i < a; ++i) {
      const auto site = static_cast<std::size_t>(order[static_cast<std::size_t>(i)]);
      word[site] = color;
      if (!touched[site]) {
        touched[site] = 1;
        --unrefreshed;
      }
    }
    run.unrefreshed.push_back(unrefreshed);
    if (keep(t, opts)) run.trajectory.emplace_back(t, Coloring(2, word));
  }
  return run;
}

// --------------------------------------------------------------- group

void check_symmetric_increment_law(std::span<const double> lambda) {
  const auto k = lambda.size();
  if (k < 1 || k > static_cast<std::size_t>(kMaxColors))
    throw InvalidInput("group chain: lambda must have 1..16 entries");
  double total = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    if (!(lambda[j] > 0.0))
      throw InvalidInput("group chain: lambda(" + std::to_string(j + 1) +
                         ") must be positive");
    if (std::abs(lambda[j] - lambda[k - 1 - j]) > 1e-12)
      throw InvalidInput("group chain: lambda must satisfy lambda(j) = lambda(k-j+1); lambda(" +
                         std::to_string(j + 1) + ") != lambda(" + std::to_string(k - j) + ")");
    total += lambda[j];
  }
  if (std::abs(total - 1.0) > 1e-9) throw InvalidInput("group chain: lambda must sum to 1");
}

ChainRun run_group_chain(std::span<const double> lambda, const Coloring& x0,
                         const RunOptions& opts) {
  check_symmetric_increment_law(lambda);
  const int k = static_cast<int>(lambda.size());
  if (x0.k() != k) throw InvalidInput("group chain: lambda and initial state disagree on k");
  ChainRun run = start_run(x0, opts);
  RngStream rng(opts.seed, opts.stream);
  std::vector<double> cdf(lambda.size());
  std::partial_sum(lambda.begin(), lambda.end(), cdf.begin());
  const std::vector<double> col(lambda.begin(), lambda.end());
  Coloring x = x0;
  for (int t = 1; t <= opts.steps; ++t) {
    std::vector<std::uint8_t> inc(static_cast<std::size_t>(x.n()));
    for (auto& c : inc) c = static_cast<std::uint8_t>(pick(cdf, col, rng.uniform()));
    x = act(cyclic_shift_matrix(Coloring(k, std::move(inc))), x);
    if (keep(t, opts)) run.trajectory.emplace_back(t, x);
  }
  return run;
}

}  // namespace efcp
