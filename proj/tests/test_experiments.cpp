#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "ridgelearn/experiments.hpp"

using namespace ridgelearn;
using nlohmann::json;

namespace {

json small_grid() {
  return json::parse(R"({
    "experiment": "phase_diagram", "model": "figure2", "d": 60,
    "m_X": [4, 12], "m_Phi": [20, 40], "epsilon": 0.1,
    "noise": {"kind": "gaussian", "levels": [0.1, 0.001]},
    "trials": 3, "seed": 77, "success": "active-set"
  })");
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("ridgelearn_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST(parse_config, defaults_and_values) {
  const ExperimentConfig c = parse_config(small_grid());
  EXPECT_EQ(c.model, "figure2");
  EXPECT_EQ(c.d, 60u);
  EXPECT_EQ(c.m_X, (std::vector<std::size_t>{4, 12}));
  EXPECT_EQ(c.noise_levels, (std::vector<double>{0.1, 0.001}));
  EXPECT_EQ(c.success.kind, SuccessCriterion::Kind::active_set);
  EXPECT_EQ(c.residual.kind, ResidualPolicy::Kind::noise);
  EXPECT_EQ(c.opt_tol, 1e-9);
  EXPECT_EQ(c.max_iters, 20000u);
  EXPECT_FALSE(c.record_timing);
}

TEST(parse_config, rejects_unknown_keys_everywhere) {
  json j = small_grid();
  j["colour"] = 1;
  EXPECT_THROW(parse_config(j), ConfigError);
  j = small_grid();
  j["noise"]["sigma"] = 1;
  EXPECT_THROW(parse_config(j), ConfigError);
  j = small_grid();
  j["solver"] = {{"tolerance", 1}};
  EXPECT_THROW(parse_config(j), ConfigError);
}

TEST(parse_config, rejects_bad_values) {
  const std::pair<const char*, json> bad[] = {
      {"d", -3},         {"d", "ten"},        {"m_X", json::array()}, {"trials", 0},
      {"epsilon", -0.1}, {"success", "best"}, {"success", "subspace-error:x"},
      {"experiment", "other"}};
  for (const auto& [key, value] : bad) {
    json j = small_grid();
    j[key] = value;
    EXPECT_THROW(parse_config(j), ConfigError) << key << " = " << value.dump();
  }
  json j = small_grid();
  j.erase("model");
  EXPECT_THROW(parse_config(j), ConfigError);
  j = small_grid();
  j["noise"]["kind"] = "pink";
  EXPECT_THROW(parse_config(j), ConfigError);
  j = small_grid();
  j["solver"] = {{"residual_tol", -1.0}};
  EXPECT_THROW(parse_config(j), ConfigError);
  EXPECT_THROW(parse_config(json::array()), ConfigError);
}

TEST(parse_config, solver_and_success_forms) {
  json j = small_grid();
  j["success"] = "subspace-error:0.25";
  j["solver"] = {{"residual_tol", 0.5}, {"algorithm", "primal_dual"}, {"max_iters", 10}};
  const ExperimentConfig c = parse_config(j);
  EXPECT_EQ(c.success.kind, SuccessCriterion::Kind::subspace_error);
  EXPECT_EQ(c.success.threshold, 0.25);
  EXPECT_EQ(c.residual.kind, ResidualPolicy::Kind::fixed);
  EXPECT_EQ(c.residual.value, 0.5);
  EXPECT_EQ(c.algorithm, L1Algorithm::primal_dual);
  j["solver"] = {{"residual_tol", "equality"}};
  EXPECT_EQ(parse_config(j).residual.kind, ResidualPolicy::Kind::equality);
}

TEST(parse_config, json_round_trip) {
  json j = small_grid();
  j["success"] = "sign-error:0.1";
  j["bar_eps"] = 0.2;
  const ExperimentConfig c = parse_config(j);
  EXPECT_EQ(to_json(parse_config(to_json(c))), to_json(c));
}

TEST(load_config, missing_and_malformed_files) {
  EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigError);
  const auto dir = scratch("malformed");
  write_file(dir / "bad.json", "{ not json");
  EXPECT_THROW(load_config(dir / "bad.json"), ConfigError);
}

TEST(residual_policy, eta) {
  ResidualPolicy p;
  EXPECT_FALSE(p.eta({NoiseKind::none, 0.0}, 100, 0.1));
  EXPECT_NEAR(*p.eta({NoiseKind::gaussian, 0.01}, 200, 0.1), 0.01 * std::sqrt(400.0) / 0.1, 1e-12);
  EXPECT_NEAR(*p.eta({NoiseKind::bounded, 0.03}, 150, 0.1), 0.03 * std::sqrt(100.0) / 0.1, 1e-12);
  EXPECT_FALSE(ResidualPolicy{ResidualPolicy::Kind::equality}.eta({NoiseKind::gaussian, 0.1}, 10, 0.1));
  EXPECT_EQ(*ResidualPolicy({ResidualPolicy::Kind::fixed, 0.7}).eta({}, 10, 0.1), 0.7);
}

TEST(trials, common_geometry_across_noise_levels) {
  const ExperimentConfig c = parse_config(small_grid());
  const SamplingPlan a = trial_plan(c, {1, 0, 0, 2});
  const SamplingPlan b = trial_plan(c, {1, 0, 1, 2});
  EXPECT_EQ(a.seed, b.seed);
  EXPECT_NE(a.seed, trial_plan(c, {1, 0, 0, 1}).seed);
  EXPECT_NE(a.seed, trial_plan(c, {0, 0, 0, 2}).seed);
}

TEST(trials, queries_match_budget) {
  const ExperimentConfig c = parse_config(small_grid());
  const RidgeOracle base = make_model(c.model_request());
  const TrialOutcome t = run_trial(base, c, {1, 1, 0, 0});
  EXPECT_EQ(t.queries, 12u * 41u);
}

TEST(parallel_for, covers_every_index_and_rethrows) {
  std::vector<std::atomic<int>> hits(100);
  parallel_for(100, 4, [&](std::size_t i) { ++hits[i]; });
  for (auto& h : hits) EXPECT_EQ(h.load(), 1);
  EXPECT_THROW(parallel_for(10, 3,
                            [](std::size_t i) {
                              if (i == 7) throw NumericalFailure("boom");
                            }),
               NumericalFailure);
}

TEST(phase_diagram, reproducible_and_thread_independent) {
  ExperimentConfig c = parse_config(small_grid());
  c.threads = 1;
  const GridResult a = run_phase_diagram(c);
  c.threads = 3;
  const GridResult b = run_phase_diagram(c);
  EXPECT_EQ(grid_csv(a), grid_csv(b));
  EXPECT_EQ(grid_pgm(a), grid_pgm(b));
  ASSERT_EQ(a.cells.size(), 8u);
  for (const CellRecord& r : a.cells) {
    EXPECT_EQ(r.trials, 3u);
    EXPECT_EQ(r.mean_queries, static_cast<double>(r.m_X * (r.m_Phi + 1)));
    EXPECT_EQ(r.mean_seconds, 0.0);
  }
  c.seed = 78;
  EXPECT_NE(grid_csv(run_phase_diagram(c)), grid_csv(a));
}

TEST(grid_output, csv_and_pgm_bytes) {
  GridResult g;
  g.m_X = {6, 12};
  g.m_Phi = {40, 20};
  g.nu = {0.1};
  // Cell order is (nu, m_Phi, m_X) in config order.
  const double rates[] = {0.0, 0.5, 1.0, 0.2};
  for (std::size_t ip = 0; ip < 2; ++ip)
    for (std::size_t ix = 0; ix < 2; ++ix) {
      const double r = rates[ip * 2 + ix];
      g.cells.push_back({g.m_X[ix], g.m_Phi[ip], 0.1, 10, static_cast<std::size_t>(r * 10), r,
                         static_cast<double>(g.m_X[ix] * (g.m_Phi[ip] + 1)), 0.0});
    }
  EXPECT_EQ(grid_csv(g),
            "mX,mPhi,nu,trials,successes,rate,mean_queries,mean_seconds\n"
            "6,40,0.1,10,0,0,246,0\n"
            "12,40,0.1,10,5,0.5,492,0\n"
            "6,20,0.1,10,10,1,126,0\n"
            "12,20,0.1,10,2,0.2,252,0\n");
  // Rows m_Phi ascending (20 then 40), gray = round(255 (1 - rate)).
  const std::string expected = std::string("P5 2 2 255\n") + static_cast<char>(0) + static_cast<char>(204) +
                               static_cast<char>(255) + static_cast<char>(128);
  EXPECT_EQ(grid_pgm(g), expected);
}

TEST(grid_output, noise_levels_are_side_by_side_panels) {
  GridResult g;
  g.m_X = {6};
  g.m_Phi = {20};
  g.nu = {0.1, 0.01};
  g.cells = {{6, 20, 0.1, 1, 0, 0.0, 0, 0}, {6, 20, 0.01, 1, 1, 1.0, 0, 0}};
  EXPECT_EQ(grid_pgm(g), std::string("P5 2 1 255\n") + static_cast<char>(255) + static_cast<char>(0));
}

TEST(run_experiment, writes_artifacts) {
  const auto dir = scratch("artifacts");
  const ExperimentConfig c = parse_config(small_grid());
  run_experiment(c, dir);
  const std::string csv = slurp(dir / "grid.csv");
  EXPECT_EQ(csv.rfind("mX,mPhi,nu,", 0), 0u);
  EXPECT_EQ(slurp(dir / "grid.pgm").rfind("P5 4 2 255\n", 0), 0u);
  const json result = json::parse(slurp(dir / "result.json"));
  EXPECT_EQ(result["seed"].get<std::uint64_t>(), 77u);
  EXPECT_EQ(result["cells"].size(), 8u);
  run_experiment(c, dir);
  EXPECT_EQ(slurp(dir / "grid.csv"), csv);
}

TEST(run_experiment, io_failure) {
  const auto dir = scratch("blocked");
  write_file(dir / "file", "");
  EXPECT_THROW(run_experiment(parse_config(small_grid()), dir / "file" / "sub"), IoError);
}

TEST(error_curve, rows_and_failures) {
  json j = json::parse(R"({
    "experiment": "error_curve", "model": "cubic:sparse4", "d": 150,
    "m_X": [5], "m_Phi": [30, 60], "noise": {"kind": "none"},
    "trials": 4, "seed": 5, "n_test": 50, "solver": {"residual_tol": "equality"}
  })");
  const auto rows = run_error_curve(parse_config(j));
  ASSERT_EQ(rows.size(), 2u);
  for (const CurveRow& r : rows) {
    EXPECT_EQ(r.trials, 4u);
    EXPECT_EQ(r.failures, 0u);
    EXPECT_GE(r.median_error, 0.0);
    EXPECT_LE(r.median_error, 2.0);
    EXPECT_TRUE(std::isfinite(r.median_sup_error));
  }
  EXPECT_EQ(curve_csv(rows).rfind("mX,mPhi,nu,trials,failures,median_error,", 0), 0u);

  j["model"] = "cap";
  j["m_Phi"] = {30};
  const auto cap = run_error_curve(parse_config(j));
  EXPECT_EQ(cap[0].failures, 4u);
  EXPECT_EQ(cap[0].median_error, 2.0);
}

TEST(estimate_sup_error, nested_probes) {
  RidgeOracle o = make_model({"sin-square", 50, 0, 3});
  DenseMatrix off = o.A();
  off(0, 0) += 0.1;
  const double small = estimate_sup_error(off, o, 100, Stream(9));
  const double large = estimate_sup_error(off, o, 400, Stream(9));
  EXPECT_LE(small, large);
  EXPECT_LE(estimate_sup_error(o.A(), o, 100, Stream(9)), 1e-14);
}

TEST(recover, single_run_json) {
  const auto dir = scratch("recover");
  json j = json::parse(R"({
    "experiment": "recover", "model": "linear:sparse4", "d": 80,
    "m_X": [3], "m_Phi": [30], "noise": {"kind": "none"}, "seed": 11
  })");
  const json out = run_experiment(parse_config(j), dir);
  EXPECT_EQ(out["queries_used"].get<std::uint64_t>(), 3u * 31u);
  EXPECT_LE(out["sign_aligned_error"].get<double>(), 1e-6);
}
