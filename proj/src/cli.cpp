#include "efcp/cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "efcp/chains.hpp"
#include "efcp/ehrenfest.hpp"
#include "efcp/errors.hpp"
#include "efcp/law_config.hpp"
#include "efcp/mixing.hpp"
#include "efcp/products.hpp"
#include "efcp/projections.hpp"
#include "efcp/tv_exact.hpp"
#include "efcp/tv_mc.hpp"

namespace efcp {

using nlohmann::json;

// ------------------------------------------------------ ExperimentConfig

ExperimentConfig::ExperimentConfig(json values) : values_(std::move(values)) {
  if (!values_.is_object()) throw InvalidInput("config: expected a JSON object");
}

int ExperimentConfig::get_int(const std::string& key, int fallback, int min_value) {
  if (!values_.contains(key)) values_[key] = fallback;
  const json& v = values_[key];
  if (!v.is_number_integer())
    throw InvalidInput("config." + key + ": expected an integer");
  const auto x = v.get<long long>();
  if (x < min_value || x > std::numeric_limits<int>::max())
    throw InvalidInput("config." + key + ": must be >= " + std::to_string(min_value));
  return static_cast<int>(x);
}

std::uint64_t ExperimentConfig::get_seed() {
  if (!values_.contains("seed")) values_["seed"] = 0;
  const json& v = values_["seed"];
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0))
    throw InvalidInput("config.seed: expected a nonnegative integer");
  return v.get<std::uint64_t>();
}

double ExperimentConfig::get_double(const std::string& key, double fallback) {
  if (!values_.contains(key)) values_[key] = fallback;
  const json& v = values_[key];
  if (!v.is_number() || !std::isfinite(v.get<double>()))
    throw InvalidInput("config." + key + ": expected a number");
  return v.get<double>();
}

bool ExperimentConfig::get_bool(const std::string& key, bool fallback) {
  if (!values_.contains(key)) values_[key] = fallback;
  const json& v = values_[key];
  if (!v.is_boolean()) throw InvalidInput("config." + key + ": expected true or false");
  return v.get<bool>();
}

std::string ExperimentConfig::get_string(const std::string& key, const std::string& fallback) {
  if (!values_.contains(key)) values_[key] = fallback;
  const json& v = values_[key];
  if (!v.is_string()) throw InvalidInput("config." + key + ": expected a string");
  return v.get<std::string>();
}

std::vector<double> ExperimentConfig::get_doubles(const std::string& key,
                                                  std::vector<double> fallback) {
  if (!values_.contains(key)) values_[key] = fallback;
  json& v = values_[key];
  if (v.is_number()) v = json::array({v});
  if (!v.is_array() || v.empty()) throw InvalidInput("config." + key + ": expected a list of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw InvalidInput("config." + key + ": expected a list of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

std::vector<int> ExperimentConfig::get_ints(const std::string& key, std::vector<int> fallback,
                                            int min_value) {
  if (!values_.contains(key)) values_[key] = fallback;
  json& v = values_[key];
  if (v.is_number_integer()) v = json::array({v});
  if (!v.is_array() || v.empty())
    throw InvalidInput("config." + key + ": expected a list of integers");
  std::vector<int> out;
  for (const auto& e : v) {
    if (!e.is_number_integer() || e.get<long long>() < min_value ||
        e.get<long long>() > std::numeric_limits<int>::max())
      throw InvalidInput("config." + key + ": expected integers >= " + std::to_string(min_value));
    out.push_back(e.get<int>());
  }
  return out;
}

const json& ExperimentConfig::law() const {
  if (!values_.contains("law")) throw InvalidInput("config.law: missing (use --law or --config)");
  return values_.at("law");
}

namespace {

// ------------------------------------------------------------- helpers

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json tv_json(const TVEstimate& e) {
  return {{"value", e.value},
          {"kind", to_string(e.kind)},
          {"std_error", e.mc_std_error},
          {"replicates", e.replicates}};
}

json optional_int(const std::optional<int>& v) { return v ? json(*v) : json(nullptr); }
json optional_double(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json read_json_file(const std::string& path, const std::string& what) {
  std::ifstream in(path);
  if (!in) throw InvalidInput(what + ": cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InvalidInput(what + ": " + path + " is not valid JSON: " + e.what());
  }
}

Coloring initial_state(ExperimentConfig& cfg, int n, int k) {
  const std::string x0 = cfg.get_string("x0", std::string(static_cast<std::size_t>(n), '1'));
  if (static_cast<int>(x0.size()) != n)
    throw InvalidInput("config.x0: expected " + std::to_string(n) + " color digits");
  try {
    return Coloring::parse(x0, k);
  } catch (const InvalidInput& e) {
    throw InvalidInput(std::string("config.x0: ") + e.what());
  }
}

struct Outcome {
  json result;
  std::string csv;
  int exit_code = kExitOk;
};

using Handler = std::function<Outcome(ExperimentConfig&)>;

// ------------------------------------------------------------- commands

Outcome cmd_simulate(ExperimentConfig& cfg) {
  const PaintboxLaw law = law_from_json(cfg.law());
  const int n = cfg.get_int("n", 16, 1);
  RunOptions opts;
  opts.steps = cfg.get_int("steps", 10, 0);
  opts.thin = cfg.get_int("thin", 1, 1);
  opts.seed = cfg.get_seed();
  opts.record_paintbox = cfg.get_bool("record_paintbox", false);
  const std::string construction = cfg.get_string("construction", "matrix");
  const Coloring x0 = initial_state(cfg, n, law.k());
  ChainRun run;
  if (construction == "matrix")
    run = run_efcp_matrix(law, x0, opts);
  else if (construction == "coordinate")
    run = run_efcp_coordinate(law, x0, opts);
  else
    throw InvalidInput("config.construction: expected \"matrix\" or \"coordinate\"");

  Outcome o;
  json traj = json::array();
  std::ostringstream csv;
  csv << "step,coloring\n";
  for (const auto& [t, x] : run.trajectory) {
    traj.push_back({{"step", t}, {"state", x.to_string()}, {"counts", x.counts()}});
    csv << t << ',' << x.to_string() << '\n';
  }
  o.result = {{"n", n},
              {"k", law.k()},
              {"steps", opts.steps},
              {"construction", construction},
              {"final_state", run.final_state().to_string()},
              {"trajectory", traj}};
  if (opts.record_paintbox) {
    json trace = json::array();
    for (const auto& s : run.paintbox_trace) trace.push_back(to_json(s));
    o.result["paintbox_trace"] = trace;
  }
  o.csv = csv.str();
  return o;
}

Outcome cmd_lyapunov(ExperimentConfig& cfg) {
  const PaintboxLaw law = law_from_json(cfg.law());
  LyapunovOptions opts;
  opts.m = cfg.get_int("m", 1000, 1);
  opts.replicates = cfg.get_int("replicates", 16, 1);
  opts.trace_every = cfg.get_int("trace_every", 0, 0);
  opts.seed = cfg.get_seed();
  const auto est = estimate_lyapunov(law, opts);
  Outcome o;
  json exps = json::array();
  for (double e : est.exponents) exps.push_back(finite_or_null(e));
  o.result = {{"lambda1", est.lambda1},
              {"spectrum", est.spectrum},
              {"log_exponents", exps},
              {"kappa_hat", est.kappa_hat},
              {"kappa_std_error", est.kappa_std_error},
              {"std_error", est.std_error},
              {"log_std_error", est.log_std_error},
              {"m", est.m},
              {"replicates", est.replicates},
              {"flags", est.flags},
              {"kind", "estimate"}};
  std::ostringstream csv;
  csv << "step";
  for (int j = 1; j < law.k(); ++j) csv << ",log_exponent_" << j;
  csv << '\n';
  for (const auto& [t, row] : est.trace) {
    csv << t;
    for (double v : row) csv << ',' << num(v);
    csv << '\n';
  }
  o.csv = csv.str();
  return o;
}

Outcome cmd_collapse(ExperimentConfig& cfg) {
  const PaintboxLaw law = law_from_json(cfg.law());
  const int m_max = cfg.get_int("m_max", 32, 1);
  const int reps = cfg.get_int("replicates", 256, 1);
  const double delta = cfg.get_double("delta", 1e-6);
  const auto rep = collapse_diagnostic(law, m_max, reps, cfg.get_seed(), delta);
  Outcome o;
  o.result = {{"collapse", rep.verdict()},
              {"first_m", rep.first_m == 0 ? json(nullptr) : json(rep.first_m)},
              {"p_contracting", rep.p_contracting},
              {"p_positive", rep.p_positive},
              {"delta", rep.delta},
              {"m_max", rep.m_max},
              {"replicates", rep.replicates}};
  std::ostringstream csv;
  csv << "m,p_contracting,p_positive\n";
  for (int m = 0; m < m_max; ++m)
    csv << m + 1 << ',' << num(rep.p_contracting[static_cast<std::size_t>(m)]) << ','
        << num(rep.p_positive[static_cast<std::size_t>(m)]) << '\n';
  o.csv = csv.str();
  return o;
}

json design_json(const BlockDesign& d) {
  return {{"n_prime", d.n_prime}, {"x0", d.x0.to_string()}, {"x0_tilde", d.x0_tilde.to_string()}};
}

std::string tv_csv_header() { return "n,m,tv_value,kind,std_error,replicates,seed\n"; }

std::string tv_csv_row(int n, int m, const TVEstimate& e, std::uint64_t seed) {
  std::ostringstream s;
  s << n << ',' << m << ',' << num(e.value) << ',' << to_string(e.kind) << ','
    << num(e.mc_std_error) << ',' << e.replicates << ',' << seed << '\n';
  return s.str();
}

Outcome cmd_tv(ExperimentConfig& cfg) {
  const PaintboxLaw law = law_from_json(cfg.law());
  const int n = cfg.get_int("n", 16, 2);
  auto ms = cfg.get_ints("m", {1}, 0);
  std::sort(ms.begin(), ms.end());
  const std::string method = cfg.get_string("method", "upper_mc");
  McOptions mc;
  mc.replicates = cfg.get_int("replicates", 10000, 1);
  mc.budget = cfg.get_double("budget", kDefaultTVBudget);
  mc.seed = cfg.get_seed();
  const BlockDesign d = make_block_design(n, law.k());
  std::vector<TVEstimate> est;
  if (method == "exact_atomic") {
    for (int m : ms) est.push_back(tv_exact_atomic(law, d.x0, d.x0_tilde, m, mc.budget));
  } else if (method == "upper_mc") {
    est = tv_upper_mc_profile(law, d.x0, d.x0_tilde, ms, mc);
  } else if (method == "lower_mc") {
    for (int m : ms) est.push_back(tv_lower_mc(law, d.x0, d.x0_tilde, m, mc));
  } else {
    throw InvalidInput("config.method: expected exact_atomic, upper_mc or lower_mc");
  }
  Outcome o;
  json rows = json::array();
  std::string csv = tv_csv_header();
  for (std::size_t i = 0; i < ms.size(); ++i) {
    json r = tv_json(est[i]);
    r["m"] = ms[i];
    rows.push_back(r);
    csv += tv_csv_row(n, ms[i], est[i], mc.seed);
  }
  o.result = {{"n", n}, {"design", design_json(d)}, {"rows", rows}};
  o.csv = csv;
  return o;
}

MixingOptions mixing_options(ExperimentConfig& cfg, int default_m_max) {
  MixingOptions mo;
  mo.replicates = cfg.get_int("replicates", 10000, 4);
  mo.m_max = cfg.get_int("m_max", default_m_max, 1);
  mo.budget = cfg.get_double("budget", kDefaultTVBudget);
  mo.lower_bounds = cfg.get_bool("lower_bounds", true);
  mo.seed = cfg.get_seed();
  return mo;
}

json mixing_json(const MixingResult& r) {
  json curve = json::array();
  for (const auto& p : r.curve) {
    json e = {{"m", p.m}, {"upper", tv_json(p.upper)}};
    e["lower"] = p.lower ? tv_json(*p.lower) : json(nullptr);
    curve.push_back(e);
  }
  return {{"n", r.n},
          {"epsilon", r.epsilon},
          {"method", to_string(r.method)},
          {"t_mix", optional_int(r.t_mix)},
          {"bracket", {r.bracket_lo, optional_int(r.bracket_hi)}},
          {"bracket_closed", r.bracket_closed},
          {"inconclusive", r.inconclusive},
          {"crossing", optional_double(r.crossing)},
          {"curve", curve}};
}

std::string mixing_csv(const MixingResult& r, std::uint64_t seed) {
  std::string csv;
  for (const auto& p : r.curve) {
    csv += tv_csv_row(r.n, p.m, p.upper, seed);
    if (p.lower) csv += tv_csv_row(r.n, p.m, *p.lower, seed);
  }
  return csv;
}

Outcome cmd_mixing_time(ExperimentConfig& cfg) {
  const PaintboxLaw law = law_from_json(cfg.law());
  const int n = cfg.get_int("n", 64, 2);
  const auto eps = cfg.get_doubles("epsilon", {0.25});
  const MixingMethod method = parse_mixing_method(cfg.get_string("method", "sandwich"));
  const MixingOptions mo = mixing_options(cfg, 256);
  const auto results = mixing_times(law, n, eps, method, mo);
  Outcome o;
  json rows = json::array();
  for (const auto& r : results) {
    rows.push_back(mixing_json(r));
    if (r.inconclusive) o.exit_code = kExitInconclusive;
  }
  o.result = {{"distance", "pairwise distance between the block-design initial states"},
              {"results", rows}};
  o.csv = tv_csv_header() + mixing_csv(results.front(), mo.seed);
  return o;
}

Outcome cmd_cutoff(ExperimentConfig& cfg) {
  const PaintboxLaw law = law_from_json(cfg.law());
  const auto grid = cfg.get_ints("n_grid", {64, 128, 256, 512, 1024, 2048, 4096}, 2);
  const double eps = cfg.get_double("epsilon", 0.25);
  CutoffOptions co;
  co.mixing = mixing_options(cfg, 64);
  co.lyapunov.m = cfg.get_int("lyapunov_m", 2000, 1);
  co.lyapunov.replicates = cfg.get_int("lyapunov_replicates", 64, 2);
  co.lyapunov.seed = co.mixing.seed;
  co.slope_tolerance = cfg.get_double("slope_tolerance", 0.25);
  const auto rep = cutoff_experiment(law, grid, eps, co);
  Outcome o;
  json rows = json::array();
  std::string csv = tv_csv_header();
  for (const auto& r : rep.rows) {
    rows.push_back({{"n", r.n},
                    {"late", mixing_json(r.late)},
                    {"early", mixing_json(r.early)},
                    {"window_ratio", finite_or_null(r.window_ratio)}});
    if (r.late.inconclusive || r.early.inconclusive) o.exit_code = kExitInconclusive;
    csv += mixing_csv(r.late, co.mixing.seed);
  }
  auto fit = [](const LinearFit& f) {
    return json{{"slope", f.slope},
                {"intercept", f.intercept},
                {"slope_std_error", f.slope_std_error},
                {"slope_ci95", {f.slope_ci_lo, f.slope_ci_hi}}};
  };
  o.result = {
      {"epsilon", rep.epsilon},
      {"lambda1_hat", rep.lyapunov.lambda1},
      {"lambda1_std_error", rep.lyapunov.std_error},
      {"theta_hat", rep.theta_hat},
      {"rows", rows},
      {"fit_t_mix_epsilon", fit(rep.fit_late)},
      {"fit_t_mix_one_minus_epsilon", fit(rep.fit_early)},
      {"assertions",
       {{"slope_epsilon_within_tolerance_of_theta", rep.slope_late_ok},
        {"slope_one_minus_epsilon_within_tolerance_of_theta", rep.slope_early_ok},
        {"window_ratio_strictly_decreasing_upper_half", rep.window_decreasing}}},
      {"note",
       "slopes are fitted to interpolated crossings of the MC upper-bound curve of the pairwise "
       "distance; the pairwise distance brackets the distance to stationarity within a factor 2 "
       "in epsilon, which shifts crossings but not the log n slope"}};
  o.csv = csv;
  return o;
}

Outcome cmd_ehrenfest(ExperimentConfig& cfg) {
  EhrenfestParams p;
  p.n = cfg.get_int("n", 64, 1);
  p.standard = cfg.get_bool("standard", false);
  const bool loglog = cfg.get_bool("loglog", false);
  if (loglog) {
    p.alpha = loglog_alpha(p.n);
    cfg.get_double("alpha", p.alpha);
  } else if (!p.standard) {
    if (!cfg.has("alpha")) throw InvalidInput("config.alpha: required unless standard is set");
    p.alpha = cfg.get_double("alpha", 0.0);
  } else {
    p.alpha = 1.0 / p.n;
  }
  p.validate();
  const bool exact = cfg.get_bool("exact", false);
  const int a = p.refresh_size();
  const int default_t_max =
      static_cast<int>(std::ceil(static_cast<double>(p.n) / a * std::log(static_cast<double>(p.n))));
  const int t_max = cfg.get_int("t_max", std::max(default_t_max, 1), 0);
  const auto betas = cfg.get_doubles("beta", {1.0, 2.0, 3.0});
  const std::string format = cfg.get_string("format", exact ? "csv" : "json");

  Outcome o;
  std::vector<double> curve;
  if (exact) curve = ehrenfest_tv_curve(p, t_max);
  // TV is nonincreasing in t: upper bounds are compared at ceil(t), lower
  // bounds at floor(t).
  auto exact_at = [&](double t, bool round_up) -> json {
    if (!exact) return nullptr;
    const double r = round_up ? std::ceil(t - 1e-9) : std::floor(t + 1e-9);
    return ehrenfest_tv_exact(p, std::max(0, static_cast<int>(r))).value;
  };
  json bounds = json::array();
  for (double beta : betas) {
    const auto b = ehrenfest_bounds(p, 0.0, beta);
    json e = {{"beta", beta},
              {"upper_time", b.upper_time},
              {"upper_bound_at_upper_time", ehrenfest_upper_bound(p, b.upper_time)},
              {"closed_form_at_upper_time", b.upper_at_upper_time},
              {"exact_tv_at_upper_time", exact_at(b.upper_time, true)}};
    if (b.lower) {
      e["lower_time"] = *b.lower_time;
      e["lower_bound"] = *b.lower;
      e["exact_tv_at_lower_time"] = *b.lower_time >= 0.0 ? exact_at(*b.lower_time, false) : json(nullptr);
    } else {
      e["lower_bound"] = nullptr;
      e["lower_bound_note"] = "refused: the lower bound holds only for alpha in (0, 1/2]";
    }
    if (loglog) {
      const double t = loglog_time(p.n, beta);
      e["loglog_time"] = t;
      e["loglog_upper_bound"] = ehrenfest_upper_bound(p, t);
      e["loglog_closed_form"] = std::pow(static_cast<double>(p.n), -beta);
    }
    bounds.push_back(e);
  }
  json rows = json::array();
  std::ostringstream csv;
  csv << "t,tv_value,kind,upper_bound\n";
  for (std::size_t t = 0; t < curve.size(); ++t) {
    const double ub = ehrenfest_upper_bound(p, static_cast<double>(t));
    rows.push_back({{"t", t}, {"tv_value", curve[t]}, {"kind", "exact"}, {"upper_bound", ub}});
    csv << t << ',' << num(curve[t]) << ",exact," << num(ub) << '\n';
  }
  o.result = {{"n", p.n},
              {"alpha", p.alpha},
              {"refresh_size", a},
              {"cutoff_time", static_cast<double>(p.n) / (2.0 * a) * std::log(static_cast<double>(p.n))},
              {"bounds", bounds},
              {"curve", rows}};
  if (format == "csv")
    o.csv = csv.str();
  else if (format != "json")
    throw InvalidInput("config.format: expected \"json\" or \"csv\"");
  else if (exact)
    o.csv = csv.str();
  return o;
}

Outcome cmd_project(ExperimentConfig& cfg) {
  const PaintboxLaw law = law_from_json(cfg.law());
  const int n = cfg.get_int("n", 4, 1);
  const std::string mode = cfg.get_string("mode", "equivalence");
  Outcome o;
  if (mode == "trajectory") {
    RunOptions opts;
    opts.steps = cfg.get_int("steps", 10, 0);
    opts.seed = cfg.get_seed();
    const Coloring x0 = initial_state(cfg, n, law.k());
    const auto pr = project_run(run_efcp_matrix(law, x0, opts));
    json traj = json::array();
    std::ostringstream csv;
    csv << "step,coloring,blocks\n";
    for (std::size_t i = 0; i < pr.trajectory.size(); ++i) {
      const auto& [t, y] = pr.trajectory[i];
      const json blocks = to_json(y);
      traj.push_back({{"step", t}, {"state", pr.base.trajectory[i].second.to_string()}, {"blocks", blocks}});
      csv << t << ',' << pr.base.trajectory[i].second.to_string() << ",\"" << blocks.dump() << "\"\n";
    }
    o.result = {{"markov", pr.markov}, {"note", pr.note}, {"trajectory", traj}};
    o.csv = csv.str();
    return o;
  }
  if (mode != "equivalence")
    throw InvalidInput("config.mode: expected \"equivalence\" or \"trajectory\"");
  const auto eps = cfg.get_doubles("epsilon", {0.5, 0.25});
  const int m_max = cfg.get_int("m_max", 1000, 1);
  const auto rep = projected_mixing_equivalence(law, n, eps, m_max);
  json tx = json::array(), ty = json::array();
  for (std::size_t e = 0; e < eps.size(); ++e) {
    tx.push_back(optional_int(rep.t_labeled[e]));
    ty.push_back(optional_int(rep.t_projected[e]));
  }
  std::ostringstream csv;
  csv << "m,labeled_tv,projected_tv\n";
  for (std::size_t m = 0; m < rep.labeled_tv.size(); ++m)
    csv << m << ',' << num(rep.labeled_tv[m]) << ',' << num(rep.projected_tv[m]) << '\n';
  o.result = {{"rce", {{"verdict", to_string(rep.rce.verdict)}, {"certificate", rep.rce.certificate}}},
              {"n", rep.n},
              {"k", rep.k},
              {"epsilon", eps},
              {"t_labeled", tx},
              {"t_projected", ty},
              {"equal", rep.equal},
              {"projected_below_labeled", rep.monotone},
              {"labeled_tv", rep.labeled_tv},
              {"projected_tv", rep.projected_tv},
              {"kind", "exact"}};
  o.csv = csv.str();
  return o;
}

// --------------------------------------------------------------- flags

enum class FlagType { integer, number, boolean, string, int_list, number_list };

struct FlagSpec {
  std::string flag;
  std::string key;
  FlagType type;
  std::string help;
};

const std::vector<FlagSpec>& command_flags(const std::string& cmd) {
  static const std::map<std::string, std::vector<FlagSpec>> table = {
      {"simulate",
       {{"n", "n", FlagType::integer, "number of sites"},
        {"steps", "steps", FlagType::integer, "number of steps"},
        {"thin", "thin", FlagType::integer, "keep every thin-th state"},
        {"x0", "x0", FlagType::string, "initial coloring as color digits"},
        {"construction", "construction", FlagType::string, "matrix or coordinate"},
        {"record-paintbox", "record_paintbox", FlagType::boolean, "emit the paintbox sequence"}}},
      {"lyapunov",
       {{"m", "m", FlagType::integer, "steps per replicate"},
        {"replicates", "replicates", FlagType::integer, "independent paths"},
        {"trace-every", "trace_every", FlagType::integer, "CSV trace interval (0 = off)"}}},
      {"collapse",
       {{"m-max", "m_max", FlagType::integer, "largest product length"},
        {"replicates", "replicates", FlagType::integer, "independent paths"},
        {"delta", "delta", FlagType::number, "contraction margin"}}},
      {"tv",
       {{"n", "n", FlagType::integer, "number of sites"},
        {"m", "m", FlagType::int_list, "steps, comma separated"},
        {"method", "method", FlagType::string, "exact_atomic, upper_mc or lower_mc"},
        {"replicates", "replicates", FlagType::integer, "Monte Carlo replicates"},
        {"budget", "budget", FlagType::number, "enumeration budget"}}},
      {"mixing-time",
       {{"n", "n", FlagType::integer, "number of sites"},
        {"epsilon", "epsilon", FlagType::number_list, "thresholds, comma separated"},
        {"method", "method", FlagType::string, "exact_atomic or sandwich"},
        {"replicates", "replicates", FlagType::integer, "Monte Carlo replicates"},
        {"m-max", "m_max", FlagType::integer, "largest m searched"},
        {"budget", "budget", FlagType::number, "enumeration budget"},
        {"no-lower", "lower_bounds", FlagType::boolean, "skip MC lower bounds"}}},
      {"cutoff",
       {{"n-grid", "n_grid", FlagType::int_list, "values of n, comma separated"},
        {"epsilon", "epsilon", FlagType::number, "threshold (its complement is also used)"},
        {"replicates", "replicates", FlagType::integer, "Monte Carlo replicates"},
        {"m-max", "m_max", FlagType::integer, "largest m searched"},
        {"lyapunov-m", "lyapunov_m", FlagType::integer, "Lyapunov steps"},
        {"lyapunov-replicates", "lyapunov_replicates", FlagType::integer, "Lyapunov paths"},
        {"no-lower", "lower_bounds", FlagType::boolean, "skip MC lower bounds"}}},
      {"ehrenfest",
       {{"n", "n", FlagType::integer, "number of sites"},
        {"alpha", "alpha", FlagType::number, "refreshed fraction"},
        {"standard", "standard", FlagType::boolean, "one site per step"},
        {"loglog", "loglog", FlagType::boolean, "alpha_n = 1 - exp(-log n / log log n)"},
        {"exact", "exact", FlagType::boolean, "exact TV curve"},
        {"t-max", "t_max", FlagType::integer, "last step of the curve"},
        {"beta", "beta", FlagType::number_list, "beta values, comma separated"},
        {"format", "format", FlagType::string, "json or csv on standard output"}}},
      {"project",
       {{"n", "n", FlagType::integer, "number of sites"},
        {"mode", "mode", FlagType::string, "equivalence or trajectory"},
        {"epsilon", "epsilon", FlagType::number_list, "thresholds, comma separated"},
        {"m-max", "m_max", FlagType::integer, "largest m searched"},
        {"steps", "steps", FlagType::integer, "trajectory length"},
        {"x0", "x0", FlagType::string, "initial coloring"}}}};
  return table.at(cmd);
}

json convert_flag(const FlagSpec& f, const std::string& raw) {
  auto fail = [&]() -> json {
    throw InvalidInput("--" + f.flag + ": cannot parse \"" + raw + "\"");
  };
  auto parse_int = [&](const std::string& s) -> long long {
    long long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) fail();
    return v;
  };
  auto parse_num = [&](const std::string& s) -> double {
    try {
      std::size_t pos = 0;
      const double v = std::stod(s, &pos);
      if (pos != s.size()) fail();
      return v;
    } catch (const std::logic_error&) {
      fail();
    }
    return 0.0;
  };
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    return out;
  };
  switch (f.type) {
    case FlagType::integer:
      return parse_int(raw);
    case FlagType::number:
      return parse_num(raw);
    case FlagType::string:
      return raw;
    case FlagType::int_list: {
      json a = json::array();
      for (const auto& s : split(raw)) a.push_back(parse_int(s));
      return a;
    }
    case FlagType::number_list: {
      json a = json::array();
      for (const auto& s : split(raw)) a.push_back(parse_num(s));
      return a;
    }
    case FlagType::boolean:
      break;
  }
  return fail();
}

const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> h = {
      {"simulate", cmd_simulate},   {"lyapunov", cmd_lyapunov},
      {"collapse", cmd_collapse},   {"tv", cmd_tv},
      {"mixing-time", cmd_mixing_time}, {"cutoff", cmd_cutoff},
      {"ehrenfest", cmd_ehrenfest}, {"project", cmd_project}};
  return h;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw InvalidInput("cannot write " + path);
  f << text;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exchangeable cut-and-paste chain laboratory", "efcp"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", "efcp " + std::to_string(kSchemaVersion));

  struct Common {
    std::string config, law, out, csv;
    std::optional<std::uint64_t> seed;
  };
  std::map<std::string, Common> common;
  std::map<std::string, std::map<std::string, std::string>> raw;
  std::map<std::string, std::map<std::string, bool>> bools;
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, handler] : handlers()) {
    auto* sub = app.add_subcommand(name);
    subs[name] = sub;
    Common& c = common[name];
    sub->add_option("--config", c.config, "JSON experiment config");
    sub->add_option("--law", c.law, "paintbox law: JSON file or inline JSON object");
    sub->add_option("--seed", c.seed, "random seed");
    sub->add_option("--out", c.out, "write the JSON report here instead of standard output");
    sub->add_option("--csv", c.csv, "also write CSV output here");
    for (const auto& f : command_flags(name)) {
      if (f.type == FlagType::boolean)
        sub->add_flag("--" + f.flag, bools[name][f.key], f.help);
      else
        sub->add_option("--" + f.flag, raw[name][f.key], f.help);
    }
  }

  std::vector<std::string> argv_store{"efcp"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : argv_store) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion& e) {
    out << e.what() << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    json report = {{"schema_version", kSchemaVersion},
                   {"error", {{"kind", "invalid_input"}, {"message", e.what()}}}};
    out << report.dump(2) << '\n';
    err << "efcp: " << e.what() << '\n';
    return kExitInvalid;
  }

  std::string cmd;
  for (const auto& [name, sub] : subs)
    if (sub->parsed()) cmd = name;
  CLI::App* sub = subs.at(cmd);
  const Common& c = common.at(cmd);

  auto emit_error = [&](const std::string& kind, const std::string& message, json extra) {
    json report = {{"schema_version", kSchemaVersion},
                   {"command", cmd},
                   {"error", {{"kind", kind}, {"message", message}}}};
    for (auto& [k, v] : extra.items()) report["error"][k] = v;
    if (!c.out.empty()) {
      try {
        write_text(c.out, report.dump(2) + "\n");
      } catch (const std::exception&) {
      }
    }
    out << report.dump(2) << '\n';
    err << "efcp " << cmd << ": " << message << '\n';
  };

  try {
    json values = json::object();
    if (!c.config.empty()) values = read_json_file(c.config, "config");
    if (!values.is_object()) throw InvalidInput("config: expected a JSON object");
    if (!c.law.empty()) {
      if (c.law.front() == '{') {
        try {
          values["law"] = json::parse(c.law);
        } catch (const json::exception& e) {
          throw InvalidInput(std::string("--law: invalid JSON: ") + e.what());
        }
      } else {
        values["law"] = read_json_file(c.law, "--law");
      }
    }
    if (c.seed) values["seed"] = *c.seed;
    for (const auto& f : command_flags(cmd)) {
      if (sub->count("--" + f.flag) == 0) continue;
      if (f.type == FlagType::boolean)
        values[f.key] = f.flag.rfind("no-", 0) == 0 ? false : true;
      else
        values[f.key] = convert_flag(f, raw[cmd][f.key]);
    }
    ExperimentConfig cfg(std::move(values));
    Outcome o = handlers().at(cmd)(cfg);
    cfg.get_seed();
    json report = {{"schema_version", kSchemaVersion},
                   {"command", cmd},
                   {"config", cfg.resolved()},
                   {"result", o.result},
                   {"exit_code", o.exit_code}};
    if (o.exit_code == kExitInconclusive)
      report["reason"] = "inconclusive: Monte Carlo bands too wide to certify at these replicates";
    const std::string text = report.dump(2) + "\n";
    const bool csv_stdout = cfg.resolved().value("format", std::string("json")) == "csv";
    if (!c.out.empty()) write_text(c.out, text);
    if (!c.csv.empty()) write_text(c.csv, o.csv);
    if (csv_stdout)
      out << o.csv;
    else if (c.out.empty())
      out << text;
    return o.exit_code;
  } catch (const BudgetExceeded& e) {
    emit_error("budget_exceeded", e.what(), {{"required", e.required()}, {"budget", e.budget()}});
    return kExitRefused;
  } catch (const Refusal& e) {
    emit_error("refusal", e.what(), json::object());
    return kExitRefused;
  } catch (const InvalidInput& e) {
    emit_error("invalid_input", e.what(), json::object());
    return kExitInvalid;
  }
}

}  // namespace efcp
