#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "ridgelearn/errors.hpp"
#include "ridgelearn/l1.hpp"
#include "ridgelearn/oracle.hpp"
#include "ridgelearn/random.hpp"
#include "ridgelearn/recovery.hpp"
#include "ridgelearn/sampling.hpp"

namespace ridgelearn {

// ---------------------------------------------------------------------------
// Configuration

enum class ExperimentKind { phase_diagram, error_curve, recover };

struct SuccessCriterion {
  enum class Kind { active_set, subspace_error, sign_error };
  Kind kind = Kind::active_set;
  double threshold = 0.0;

  static SuccessCriterion parse(const std::string& text) {
    if (text == "active-set") return {Kind::active_set, 0.0};
    auto with_threshold = [&](const std::string& prefix, Kind kind) -> std::optional<SuccessCriterion> {
      if (text.rfind(prefix, 0) != 0) return std::nullopt;
      const std::string rest = text.substr(prefix.size());
      std::size_t pos = 0;
      double t = 0.0;
      try {
        t = std::stod(rest, &pos);
      } catch (const std::logic_error&) {
        throw ConfigError("success: bad threshold in '" + text + "'");
      }
      if (pos != rest.size() || !(t > 0.0)) throw ConfigError("success: threshold must be a positive number");
      return SuccessCriterion{kind, t};
    };
    if (auto c = with_threshold("subspace-error:", Kind::subspace_error)) return *c;
    if (auto c = with_threshold("sign-error:", Kind::sign_error)) return *c;
    throw ConfigError("success: expected active-set, subspace-error:<t> or sign-error:<t>");
  }

  std::string to_string() const {
    switch (kind) {
      case Kind::active_set: return "active-set";
      case Kind::subspace_error: return "subspace-error:" + nlohmann::json(threshold).dump();
      case Kind::sign_error: return "sign-error:" + nlohmann::json(threshold).dump();
    }
    return "";
  }
};

/// Decoder tolerance: equality, calibrated to the noise level, or fixed.
struct ResidualPolicy {
  enum class Kind { equality, noise, fixed };
  Kind kind = Kind::noise;
  double value = 0.0;

  /// Expected norm of the noise in one column of Y: the differences of two
  /// independent draws, divided by epsilon.
  std::optional<double> eta(const NoiseSpec& noise, std::size_t m_Phi, double epsilon) const {
    switch (kind) {
      case Kind::equality: return std::nullopt;
      case Kind::fixed: return value;
      case Kind::noise: {
        if (noise.kind == NoiseKind::none || noise.level == 0.0) return std::nullopt;
        const double var = noise.kind == NoiseKind::gaussian ? 1.0 : 1.0 / 3.0;
        return noise.level * std::sqrt(2.0 * var * static_cast<double>(m_Phi)) / epsilon;
      }
    }
    return std::nullopt;
  }
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::phase_diagram;
  std::string model;
  std::size_t d = 0;
  std::size_t k = 0;
  std::size_t support = 4;
  std::optional<double> bar_eps;
  std::vector<std::size_t> m_X;
  std::vector<std::size_t> m_Phi;
  double epsilon = 0.1;
  NoiseKind noise_kind = NoiseKind::gaussian;
  std::vector<double> noise_levels{0.0};
  std::size_t trials = 20;
  std::uint64_t seed = 0;
  SuccessCriterion success;
  std::string output_dir = "out";
  ResidualPolicy residual;
  double opt_tol = 1e-9;
  std::size_t max_iters = 20000;
  L1Algorithm algorithm = L1Algorithm::homotopy;
  std::size_t n_test = 1000;
  bool record_timing = false;
  std::size_t threads = 1;

  void validate() const {
    if (model.empty()) throw ConfigError("model is required");
    if (d < 1) throw ConfigError("d must be positive");
    if (m_X.empty() || m_Phi.empty() || noise_levels.empty()) throw ConfigError("m_X, m_Phi and noise levels must be non-empty");
    for (auto v : m_X) if (v < 1) throw ConfigError("m_X values must be positive");
    for (auto v : m_Phi) if (v < 1) throw ConfigError("m_Phi values must be positive");
    for (double v : noise_levels) if (!(v >= 0.0)) throw ConfigError("noise levels must be non-negative");
    if (trials < 1) throw ConfigError("trials must be at least 1");
    if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
    if (!(opt_tol > 0.0) || max_iters < 1) throw ConfigError("solver settings out of range");
    if (n_test < 1) throw ConfigError("n_test must be positive");
  }

  ModelRequest model_request() const {
    return ModelRequest{model, d, k, derive_stream(seed, {"model"}).next_u64(), bar_eps, support};
  }
};

namespace detail {

inline void reject_unknown(const nlohmann::json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <class T>
T get_as(const nlohmann::json& j, const std::string& key) {
  // The json library converts -3 to a huge unsigned value without complaint.
  auto check_unsigned = [&](const nlohmann::json& v) {
    if (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0) throw ConfigError("bad value for '" + key + "': expected a non-negative integer");
  };
  if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
    if (j.contains(key)) check_unsigned(j.at(key));
  } else if constexpr (std::is_same_v<T, std::vector<std::size_t>>) {
    if (j.contains(key) && j.at(key).is_array())
      for (const auto& v : j.at(key)) check_unsigned(v);
  }
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("bad value for '" + key + "': " + e.what());
  }
}

}  // namespace detail

inline ExperimentConfig parse_config(const nlohmann::json& j) {
  using detail::get_as;
  detail::reject_unknown(j,
                         {"experiment", "model", "d", "k", "support", "bar_eps", "m_X", "m_Phi", "epsilon", "noise",
                          "trials", "seed", "success", "output_dir", "solver", "n_test", "record_timing", "threads"},
                         "config");
  ExperimentConfig c;
  if (j.contains("experiment")) {
    const auto e = get_as<std::string>(j, "experiment");
    if (e == "phase_diagram") c.experiment = ExperimentKind::phase_diagram;
    else if (e == "error_curve") c.experiment = ExperimentKind::error_curve;
    else if (e == "recover") c.experiment = ExperimentKind::recover;
    else throw ConfigError("experiment must be phase_diagram, error_curve or recover");
  }
  if (!j.contains("model") || !j.contains("d") || !j.contains("m_X") || !j.contains("m_Phi")) {
    throw ConfigError("config requires model, d, m_X and m_Phi");
  }
  c.model = get_as<std::string>(j, "model");
  c.d = get_as<std::size_t>(j, "d");
  if (j.contains("k")) c.k = get_as<std::size_t>(j, "k");
  if (j.contains("support")) c.support = get_as<std::size_t>(j, "support");
  if (j.contains("bar_eps")) c.bar_eps = get_as<double>(j, "bar_eps");
  c.m_X = get_as<std::vector<std::size_t>>(j, "m_X");
  c.m_Phi = get_as<std::vector<std::size_t>>(j, "m_Phi");
  if (j.contains("epsilon")) c.epsilon = get_as<double>(j, "epsilon");
  if (j.contains("noise")) {
    const auto& n = j.at("noise");
    detail::reject_unknown(n, {"kind", "levels"}, "noise");
    if (n.contains("kind")) {
      const auto kind = get_as<std::string>(n, "kind");
      if (kind == "gaussian") c.noise_kind = NoiseKind::gaussian;
      else if (kind == "bounded") c.noise_kind = NoiseKind::bounded;
      else if (kind == "none") c.noise_kind = NoiseKind::none;
      else throw ConfigError("noise.kind must be gaussian, bounded or none");
    }
    if (n.contains("levels")) c.noise_levels = get_as<std::vector<double>>(n, "levels");
  }
  if (c.noise_kind == NoiseKind::none) c.noise_levels = {0.0};
  if (j.contains("trials")) c.trials = get_as<std::size_t>(j, "trials");
  if (j.contains("seed")) c.seed = get_as<std::uint64_t>(j, "seed");
  if (j.contains("success")) c.success = SuccessCriterion::parse(get_as<std::string>(j, "success"));
  if (j.contains("output_dir")) c.output_dir = get_as<std::string>(j, "output_dir");
  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    detail::reject_unknown(s, {"residual_tol", "opt_tol", "max_iters", "algorithm"}, "solver");
    if (s.contains("residual_tol")) {
      const auto& r = s.at("residual_tol");
      if (r.is_string()) {
        const auto v = r.get<std::string>();
        if (v == "noise") c.residual.kind = ResidualPolicy::Kind::noise;
        else if (v == "equality") c.residual.kind = ResidualPolicy::Kind::equality;
        else throw ConfigError("solver.residual_tol must be \"noise\", \"equality\" or a number");
      } else if (r.is_number()) {
        c.residual = {ResidualPolicy::Kind::fixed, r.get<double>()};
        if (!(c.residual.value >= 0.0)) throw ConfigError("solver.residual_tol must be non-negative");
      } else {
        throw ConfigError("solver.residual_tol must be \"noise\", \"equality\" or a number");
      }
    }
    if (s.contains("opt_tol")) c.opt_tol = get_as<double>(s, "opt_tol");
    if (s.contains("max_iters")) c.max_iters = get_as<std::size_t>(s, "max_iters");
    if (s.contains("algorithm")) {
      const auto a = get_as<std::string>(s, "algorithm");
      if (a == "homotopy") c.algorithm = L1Algorithm::homotopy;
      else if (a == "primal_dual") c.algorithm = L1Algorithm::primal_dual;
      else throw ConfigError("solver.algorithm must be homotopy or primal_dual");
    }
  }
  if (j.contains("n_test")) c.n_test = get_as<std::size_t>(j, "n_test");
  if (j.contains("record_timing")) c.record_timing = get_as<bool>(j, "record_timing");
  if (j.contains("threads")) c.threads = get_as<std::size_t>(j, "threads");
  c.validate();
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

inline nlohmann::json to_json(const ExperimentConfig& c) {
  const char* kinds[] = {"phase_diagram", "error_curve", "recover"};
  const char* noise[] = {"none", "gaussian", "bounded"};
  nlohmann::json solver = {{"opt_tol", c.opt_tol},
                           {"max_iters", c.max_iters},
                           {"algorithm", c.algorithm == L1Algorithm::homotopy ? "homotopy" : "primal_dual"}};
  switch (c.residual.kind) {
    case ResidualPolicy::Kind::equality: solver["residual_tol"] = "equality"; break;
    case ResidualPolicy::Kind::noise: solver["residual_tol"] = "noise"; break;
    case ResidualPolicy::Kind::fixed: solver["residual_tol"] = c.residual.value; break;
  }
  nlohmann::json j = {{"experiment", kinds[static_cast<int>(c.experiment)]},
                      {"model", c.model},
                      {"d", c.d},
                      {"k", c.k},
                      {"support", c.support},
                      {"m_X", c.m_X},
                      {"m_Phi", c.m_Phi},
                      {"epsilon", c.epsilon},
                      {"noise", {{"kind", noise[static_cast<int>(c.noise_kind)]}, {"levels", c.noise_levels}}},
                      {"trials", c.trials},
                      {"seed", c.seed},
                      {"success", c.success.to_string()},
                      {"output_dir", c.output_dir},
                      {"solver", solver},
                      {"n_test", c.n_test},
                      {"record_timing", c.record_timing}};
  if (c.bar_eps) j["bar_eps"] = *c.bar_eps;
  return j;
}

// ---------------------------------------------------------------------------
// Work pool

/// Runs body(i) for i in [0, n) on `threads` workers. Each index is handled
/// exactly once; callers write results into preallocated slots.
inline void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& body) {
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(n, 1));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            body(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

// ---------------------------------------------------------------------------
// Trials

struct TrialContext {
  std::size_t ix = 0, ip = 0, inu = 0, trial = 0;
};

/// Seeds for one trial. Sample points and directions do not depend on the
/// noise level, so every noise level sees the same geometry.
inline SamplingPlan trial_plan(const ExperimentConfig& c, const TrialContext& t) {
  return SamplingPlan{c.m_X[t.ix], c.m_Phi[t.ip], c.epsilon,
                      derive_stream(c.seed, {"trial", t.ix, t.ip, t.trial}).next_u64()};
}

inline RidgeOracle trial_oracle(const RidgeOracle& base, const ExperimentConfig& c, const TrialContext& t) {
  return base.with_noise({c.noise_kind, c.noise_levels[t.inu]},
                         derive_stream(c.seed, {"noise", t.ix, t.ip, t.inu, t.trial}));
}

inline SolveSettings trial_settings(const ExperimentConfig& c, const RidgeOracle& oracle, const SamplingPlan& plan) {
  SolveSettings s;
  s.residual_tol = c.residual.eta(oracle.noise(), plan.m_Phi, plan.epsilon);
  s.opt_tol = c.opt_tol;
  s.max_iters = c.max_iters;
  s.algorithm = c.algorithm;
  return s;
}

struct TrialOutcome {
  bool success = false;
  std::uint64_t queries = 0;
  double seconds = 0.0;
};

inline TrialOutcome run_trial(const RidgeOracle& base, const ExperimentConfig& c, const TrialContext& t) {
  RidgeOracle oracle = trial_oracle(base, c, t);
  const SamplingPlan plan = trial_plan(c, t);
  const SolveSettings settings = trial_settings(c, oracle, plan);
  const std::size_t k = oracle.spec().k;
  TrialOutcome out;
  const auto start = std::chrono::steady_clock::now();
  try {
    switch (c.success.kind) {
      case SuccessCriterion::Kind::active_set: {
        const GradientSketch sk = build_sketch(oracle, plan, settings);
        const auto truth = oracle.active_coordinates();
        out.success = identify_active_coordinates(sk, truth.size()) == truth;
        break;
      }
      case SuccessCriterion::Kind::subspace_error: {
        const KResult r = algorithm2(oracle, k, plan, settings);
        out.success = subspace_error(r.A_hat, oracle.A()) <= c.success.threshold;
        break;
      }
      case SuccessCriterion::Kind::sign_error: {
        const K1Result r = algorithm1(oracle, plan, settings);
        out.success = sign_aligned_error(r.a_hat, oracle.A().row(0)) <= c.success.threshold;
        break;
      }
    }
  } catch (const DegenerateSignal&) {
    out.success = false;
  } catch (const SketchFailure&) {
    out.success = false;
  } catch (const NumericalFailure&) {
    out.success = false;
  }
  out.queries = oracle.query_count();
  if (c.record_timing) out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

// ---------------------------------------------------------------------------
// Phase diagram

struct CellRecord {
  std::size_t m_X = 0;
  std::size_t m_Phi = 0;
  double nu = 0.0;
  std::size_t trials = 0;
  std::size_t successes = 0;
  double rate = 0.0;
  double mean_queries = 0.0;
  double mean_seconds = 0.0;
};

struct GridResult {
  std::vector<std::size_t> m_X;
  std::vector<std::size_t> m_Phi;
  std::vector<double> nu;
  std::vector<CellRecord> cells;  // ordered by (nu, m_Phi, m_X) indices
  nlohmann::json config;
  std::uint64_t seed = 0;

  const CellRecord& cell(std::size_t inu, std::size_t ip, std::size_t ix) const {
    return cells[(inu * m_Phi.size() + ip) * m_X.size() + ix];
  }
};

inline GridResult run_phase_diagram(const ExperimentConfig& c) {
  c.validate();
  const RidgeOracle base = make_model(c.model_request());
  const std::size_t nx = c.m_X.size(), np = c.m_Phi.size(), nn = c.noise_levels.size();
  const std::size_t cells = nx * np * nn;
  std::vector<TrialOutcome> outcomes(cells * c.trials);
  parallel_for(outcomes.size(), c.threads, [&](std::size_t idx) {
    const std::size_t cell = idx / c.trials;
    TrialContext t;
    t.trial = idx % c.trials;
    t.ix = cell % nx;
    t.ip = (cell / nx) % np;
    t.inu = cell / (nx * np);
    outcomes[idx] = run_trial(base, c, t);
  });
  GridResult g{c.m_X, c.m_Phi, c.noise_levels, {}, to_json(c), c.seed};
  for (std::size_t cell = 0; cell < cells; ++cell) {
    CellRecord r;
    r.m_X = c.m_X[cell % nx];
    r.m_Phi = c.m_Phi[(cell / nx) % np];
    r.nu = c.noise_levels[cell / (nx * np)];
    r.trials = c.trials;
    double q = 0.0, s = 0.0;
    for (std::size_t t = 0; t < c.trials; ++t) {
      const TrialOutcome& o = outcomes[cell * c.trials + t];
      r.successes += o.success ? 1 : 0;
      q += static_cast<double>(o.queries);
      s += o.seconds;
    }
    r.rate = static_cast<double>(r.successes) / static_cast<double>(r.trials);
    r.mean_queries = q / static_cast<double>(r.trials);
    r.mean_seconds = s / static_cast<double>(r.trials);
    g.cells.push_back(r);
  }
  return g;
}

inline std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline std::string grid_csv(const GridResult& g) {
  std::string out = "mX,mPhi,nu,trials,successes,rate,mean_queries,mean_seconds\n";
  for (const CellRecord& r : g.cells) {
    out += std::to_string(r.m_X) + ',' + std::to_string(r.m_Phi) + ',' + format_number(r.nu) + ',' +
           std::to_string(r.trials) + ',' + std::to_string(r.successes) + ',' + format_number(r.rate) + ',' +
           format_number(r.mean_queries) + ',' + format_number(r.mean_seconds) + '\n';
  }
  return out;
}

/// Binary PGM: one pixel per cell, gray = round(255 (1 - rate)), rows are
/// m_Phi ascending top to bottom, columns m_X ascending left to right. Several
/// noise levels are laid out as panels side by side in config order.
inline std::string grid_pgm(const GridResult& g) {
  const std::size_t nx = g.m_X.size(), np = g.m_Phi.size(), nn = g.nu.size();
  std::vector<std::size_t> xo(nx), po(np);
  std::iota(xo.begin(), xo.end(), 0);
  std::iota(po.begin(), po.end(), 0);
  std::stable_sort(xo.begin(), xo.end(), [&](auto a, auto b) { return g.m_X[a] < g.m_X[b]; });
  std::stable_sort(po.begin(), po.end(), [&](auto a, auto b) { return g.m_Phi[a] < g.m_Phi[b]; });
  std::string out = "P5 " + std::to_string(nx * nn) + ' ' + std::to_string(np) + " 255\n";
  for (std::size_t ip : po) {
    for (std::size_t inu = 0; inu < nn; ++inu) {
      for (std::size_t ix : xo) {
        const double rate = g.cell(inu, ip, ix).rate;
        out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * (1.0 - rate)))));
      }
    }
  }
  return out;
}

inline void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

inline void emit_heatmap(const GridResult& g, const std::filesystem::path& path) { write_file(path, grid_pgm(g)); }

inline nlohmann::json to_json(const GridResult& g) {
  nlohmann::json cells = nlohmann::json::array();
  for (const CellRecord& r : g.cells) {
    cells.push_back({{"m_X", r.m_X},
                     {"m_Phi", r.m_Phi},
                     {"nu", r.nu},
                     {"trials", r.trials},
                     {"successes", r.successes},
                     {"rate", r.rate},
                     {"mean_queries", r.mean_queries},
                     {"mean_seconds", r.mean_seconds}});
  }
  return {{"config", g.config}, {"seed", g.seed}, {"cells", cells}};
}

// ---------------------------------------------------------------------------
// Error curves

/// max over n_test probes of |f(x) - f^(x)|, using two queries per probe.
/// Probes are uniform in the unit ball (or cube) and nested in n_test for a
/// fixed stream, so the estimate never decreases when n_test grows. This is
/// a lower bound on the sup norm.
inline double estimate_sup_error(const DenseMatrix& A_hat, RidgeOracle& oracle, std::size_t n_test, Stream stream) {
  if (n_test < 1) throw InvalidArgument("estimate_sup_error: n_test must be positive");
  const std::size_t d = oracle.spec().d;
  const auto probes = oracle.domain().kind == Domain::Kind::ball ? sample_ball(d, n_test, 1.0, stream)
                                                                 : sample_cube(d, n_test, stream);
  double worst = 0.0;
  for (const Vector& x : probes) {
    const double f = oracle.evaluate(x);
    worst = std::max(worst, std::abs(f - surrogate_evaluate(A_hat, oracle, x)));
  }
  return worst;
}

struct CurveRow {
  std::size_t m_X = 0;
  std::size_t m_Phi = 0;
  double nu = 0.0;
  std::size_t trials = 0;
  std::size_t failures = 0;  // degenerate or undecodable trials
  double median_error = 0.0;
  double median_sup_error = 0.0;
  double median_indicator = 0.0;
};

/// Per (m_X, m_Phi, nu): medians over trials of the direction error
/// (sign-aligned for k = 1, subspace error otherwise), the estimated sup
/// error of the surrogate and the a posteriori indicator. Failed trials
/// contribute error 2 (sign-aligned) or sqrt(2k), the largest possible values.
inline std::vector<CurveRow> run_error_curve(const ExperimentConfig& c) {
  c.validate();
  const RidgeOracle base = make_model(c.model_request());
  const std::size_t k = base.spec().k;
  const std::size_t nx = c.m_X.size(), np = c.m_Phi.size(), nn = c.noise_levels.size();
  struct Sample {
    bool failed = false;
    double error = 0.0, sup = 0.0, indicator = 0.0;
  };
  std::vector<Sample> samples(nx * np * nn * c.trials);
  parallel_for(samples.size(), c.threads, [&](std::size_t idx) {
    const std::size_t cell = idx / c.trials;
    TrialContext t{cell % nx, (cell / nx) % np, cell / (nx * np), idx % c.trials};
    RidgeOracle oracle = trial_oracle(base, c, t);
    const SamplingPlan plan = trial_plan(c, t);
    const SolveSettings settings = trial_settings(c, oracle, plan);
    Sample& s = samples[idx];
    try {
      DenseMatrix A_hat;
      if (k == 1) {
        const K1Result r = algorithm1(oracle, plan, settings);
        s.error = sign_aligned_error(r.a_hat, base.A().row(0));
        s.indicator = r.indicator;
        A_hat = DenseMatrix(1, r.a_hat.size(), r.a_hat);
      } else {
        const KResult r = algorithm2(oracle, k, plan, settings);
        s.error = subspace_error(r.A_hat, base.A());
        s.indicator = r.indicator;
        A_hat = r.A_hat;
      }
      RidgeOracle truth = base.clone(Stream(0));
      s.sup = estimate_sup_error(A_hat, truth, c.n_test, derive_stream(c.seed, {"probe", t.ix, t.ip, t.trial}));
    } catch (const DegenerateSignal&) {
      s.failed = true;
    } catch (const SketchFailure&) {
      s.failed = true;
    }
    if (s.failed) {
      s.error = k == 1 ? 2.0 : std::sqrt(2.0 * static_cast<double>(k));
      s.sup = std::numeric_limits<double>::infinity();
      s.indicator = std::numeric_limits<double>::infinity();
    }
  });
  std::vector<CurveRow> rows;
  for (std::size_t cell = 0; cell < nx * np * nn; ++cell) {
    CurveRow r{c.m_X[cell % nx], c.m_Phi[(cell / nx) % np], c.noise_levels[cell / (nx * np)], c.trials};
    Vector e, s, ind;
    for (std::size_t t = 0; t < c.trials; ++t) {
      const Sample& x = samples[cell * c.trials + t];
      r.failures += x.failed ? 1 : 0;
      e.push_back(x.error);
      s.push_back(x.sup);
      ind.push_back(x.indicator);
    }
    r.median_error = median(e);
    r.median_sup_error = median(s);
    r.median_indicator = median(ind);
    rows.push_back(r);
  }
  return rows;
}

inline std::string curve_csv(const std::vector<CurveRow>& rows) {
  std::string out = "mX,mPhi,nu,trials,failures,median_error,median_sup_error,median_indicator\n";
  for (const CurveRow& r : rows) {
    out += std::to_string(r.m_X) + ',' + std::to_string(r.m_Phi) + ',' + format_number(r.nu) + ',' +
           std::to_string(r.trials) + ',' + std::to_string(r.failures) + ',' + format_number(r.median_error) + ',' +
           format_number(r.median_sup_error) + ',' + format_number(r.median_indicator) + '\n';
  }
  return out;
}

/// Writes the artifacts of one experiment into `dir`.
inline nlohmann::json run_experiment(const ExperimentConfig& c, const std::filesystem::path& dir) {
  switch (c.experiment) {
    case ExperimentKind::phase_diagram: {
      const GridResult g = run_phase_diagram(c);
      write_file(dir / "grid.csv", grid_csv(g));
      emit_heatmap(g, dir / "grid.pgm");
      const nlohmann::json j = to_json(g);
      write_file(dir / "result.json", j.dump(2) + "\n");
      return j;
    }
    case ExperimentKind::error_curve: {
      const auto rows = run_error_curve(c);
      write_file(dir / "curve.csv", curve_csv(rows));
      nlohmann::json out = {{"config", to_json(c)}, {"seed", c.seed}, {"rows", nlohmann::json::array()}};
      for (const CurveRow& r : rows) {
        out["rows"].push_back({{"m_X", r.m_X},
                               {"m_Phi", r.m_Phi},
                               {"nu", r.nu},
                               {"trials", r.trials},
                               {"failures", r.failures},
                               {"median_error", r.median_error},
                               {"median_sup_error", std::isfinite(r.median_sup_error) ? nlohmann::json(r.median_sup_error) : nlohmann::json(nullptr)},
                               {"median_indicator", std::isfinite(r.median_indicator) ? nlohmann::json(r.median_indicator) : nlohmann::json(nullptr)}});
      }
      write_file(dir / "result.json", out.dump(2) + "\n");
      return out;
    }
    case ExperimentKind::recover: {
      const RidgeOracle base = make_model(c.model_request());
      const TrialContext t{};
      RidgeOracle oracle = trial_oracle(base, c, t);
      const SamplingPlan plan = trial_plan(c, t);
      const SolveSettings settings = trial_settings(c, oracle, plan);
      nlohmann::json out;
      if (base.spec().k == 1) {
        const K1Result r = algorithm1(oracle, plan, settings);
        out = to_json(r, plan);
        out["sign_aligned_error"] = sign_aligned_error(r.a_hat, base.A().row(0));
      } else {
        const KResult r = algorithm2(oracle, base.spec().k, plan, settings);
        out = to_json(r, plan);
        out["subspace_error"] = subspace_error(r.A_hat, base.A());
      }
      out["model"] = c.model;
      write_file(dir / "result.json", out.dump(2) + "\n");
      return out;
    }
  }
  return {};
}

}  // namespace ridgelearn
