// ridgelearn: run recovery experiments and evaluate analytic quantities.

#include <cstdio>
#include <iostream>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "ridgelearn/ridgelearn.hpp"

namespace {

using namespace ridgelearn;

constexpr int kConfigError = 2;
constexpr int kIoError = 3;

struct AnalyzeArgs {
  std::vector<double> positional;
  BoundParams params;
};

/// Positional numbers plus optional key=value overrides of the bound constants.
AnalyzeArgs parse_analyze_args(const std::vector<std::string>& raw) {
  AnalyzeArgs out;
  std::map<std::string, double*> keys{{"q", &out.params.q},           {"C1", &out.params.C1},
                                      {"C2", &out.params.C2},         {"alpha", &out.params.alpha},
                                      {"s", &out.params.s},           {"Cprime", &out.params.Cprime},
                                      {"c1prime", &out.params.c1prime}, {"delta", &out.params.delta}};
  for (const std::string& a : raw) {
    const auto eq = a.find('=');
    try {
      if (eq == std::string::npos) {
        out.positional.push_back(std::stod(a));
      } else {
        auto it = keys.find(a.substr(0, eq));
        if (it == keys.end()) throw ConfigError("unknown parameter '" + a.substr(0, eq) + "'");
        *it->second = std::stod(a.substr(eq + 1));
      }
    } catch (const std::logic_error&) {
      throw ConfigError("not a number: '" + a + "'");
    }
  }
  return out;
}

std::size_t as_size(double v, const char* name) {
  if (!(v >= 0.0) || v != std::floor(v)) throw ConfigError(std::string(name) + " must be a non-negative integer");
  return static_cast<std::size_t>(v);
}

void need(const AnalyzeArgs& a, std::size_t n, const char* usage) {
  if (a.positional.size() != n) throw ConfigError(std::string("usage: ridgelearn analyze ") + usage);
}

std::string fmt(double v) { return format_number(v); }

/// Prints "inputs...,value" as one CSV line with a header.
int analyze(const std::string& op, const std::vector<std::string>& raw) {
  const AnalyzeArgs a = parse_analyze_args(raw);
  const auto& p = a.positional;
  auto poly = [](double M) { return [M](double y) { return std::pow(y, M); }; };
  if (op == "moment") {
    need(a, 2, "moment <ell> <d>");
    std::cout << "ell,d,value\n" << fmt(p[0]) << ',' << fmt(p[1]) << ','
              << fmt(moment(static_cast<unsigned>(as_size(p[0], "ell")), as_size(p[1], "d"))) << '\n';
  } else if (op == "density") {
    if (p.size() < 3) throw ConfigError("usage: ridgelearn analyze density <k> <d> <y_1> ... <y_k>");
    const Vector y(p.begin() + 2, p.end());
    std::cout << "k,d,norm_y,value\n" << fmt(p[0]) << ',' << fmt(p[1]) << ',' << fmt(norm2(y)) << ','
              << fmt(pushforward_density(as_size(p[0], "k"), as_size(p[1], "d"), y)) << '\n';
  } else if (op == "alpha-k1") {
    need(a, 2, "alpha-k1 <M> <d>   (g'(y) = y^M)");
    std::cout << "M,d,value\n" << fmt(p[0]) << ',' << fmt(p[1]) << ',' << fmt(alpha_k1(poly(p[0]), as_size(p[1], "d")))
              << '\n';
  } else if (op == "alpha-radial") {
    need(a, 3, "alpha-radial <M> <k> <d>   (g0'(r) = r^M)");
    std::cout << "M,k,d,value\n" << fmt(p[0]) << ',' << fmt(p[1]) << ',' << fmt(p[2]) << ','
              << fmt(alpha_radial(poly(p[0]), as_size(p[1], "k"), as_size(p[2], "d"))) << '\n';
  } else if (op == "concentration") {
    need(a, 3, "concentration <k> <d> <eps>");
    const std::size_t k = as_size(p[0], "k"), d = as_size(p[1], "d");
    std::cout << "k,d,eps,lower_bound,quadrature\n" << k << ',' << d << ',' << fmt(p[2]) << ','
              << fmt(concentration_lower_bound(k, d, p[2])) << ',' << fmt(ball_mass(k, d, p[2])) << '\n';
  } else if (op == "nu1") {
    need(a, 3, "nu1 <m_Phi> <d> <epsilon> [q=.. Cprime=..]");
    std::cout << "m_Phi,d,epsilon,value\n" << fmt(p[0]) << ',' << fmt(p[1]) << ',' << fmt(p[2]) << ','
              << fmt(nu1(as_size(p[0], "m_Phi"), as_size(p[1], "d"), p[2], a.params)) << '\n';
  } else if (op == "nu2") {
    need(a, 4, "nu2 <m_Phi> <d> <epsilon> <k> [q=.. Cprime=..]");
    std::cout << "m_Phi,d,epsilon,k,value\n" << fmt(p[0]) << ',' << fmt(p[1]) << ',' << fmt(p[2]) << ',' << fmt(p[3])
              << ',' << fmt(nu2(as_size(p[0], "m_Phi"), as_size(p[1], "d"), p[2], as_size(p[3], "k"), a.params))
              << '\n';
  } else if (op == "success-k1" || op == "success-k") {
    need(a, 4, "success-k1|success-k <m_Phi> <m_X> <d> <k> [alpha=.. s=.. C2=.. c1prime=..]");
    const auto which = op == "success-k1" ? ProbabilityCase::k1 : ProbabilityCase::kgeq1;
    std::cout << "m_Phi,m_X,d,k,value\n" << fmt(p[0]) << ',' << fmt(p[1]) << ',' << fmt(p[2]) << ',' << fmt(p[3])
              << ','
              << fmt(success_probability(which, as_size(p[0], "m_Phi"), as_size(p[1], "m_X"), as_size(p[2], "d"),
                                         as_size(p[3], "k"), a.params))
              << '\n';
  } else if (op == "decay") {
    if (p.size() < 5) throw ConfigError("usage: ridgelearn analyze decay <M> <d_1> <d_2> <d_3> <d_4> ...");
    std::vector<std::pair<double, double>> values;
    std::cout << "M,d,alpha\n";
    for (std::size_t i = 1; i < p.size(); ++i) {
      const double al = alpha_k1(poly(p[0]), as_size(p[i], "d"));
      values.emplace_back(p[i], al);
      std::cout << fmt(p[0]) << ',' << fmt(p[i]) << ',' << fmt(al) << '\n';
    }
    std::cout << "# slope," << fmt(decay_exponent(values)) << '\n';
  } else {
    throw ConfigError("unknown analyze op '" + op +
                      "' (moment, density, alpha-k1, alpha-radial, concentration, nu1, nu2, success-k1, "
                      "success-k, decay)");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learning ridge functions from point queries"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads, trials;
  bool smoke = false;
  CLI::App* run = app.add_subcommand("run", "Run an experiment described by a JSON config");
  run->add_option("--config", config_path, "Config file")->required();
  run->add_option("--out", out_dir, "Output directory (overrides output_dir)");
  run->add_option("--seed", seed, "Master seed (overrides seed)");
  run->add_option("--threads", threads, "Worker threads (default: hardware concurrency)");
  run->add_option("--trials", trials, "Trials per cell (overrides trials)");
  run->add_flag("--smoke", smoke, "Reduced preset: d=200 and 5 trials per cell");

  std::string op;
  std::vector<std::string> params;
  CLI::App* an = app.add_subcommand("analyze", "Evaluate an analytic quantity and print CSV");
  an->add_option("op", op, "Operation")->required();
  an->add_option("params", params, "Numeric parameters and key=value constants");
  an->allow_extras(false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*an) return analyze(op, params);

    ExperimentConfig c = load_config(config_path);
    if (seed) c.seed = *seed;
    if (trials) c.trials = *trials;
    if (smoke) {
      c.d = 200;
      c.trials = 5;
    }
    c.threads = threads ? *threads : std::max(1u, std::thread::hardware_concurrency());
    if (!out_dir.empty()) c.output_dir = out_dir;
    c.validate();
    const auto j = run_experiment(c, c.output_dir);
    std::cerr << "wrote results to " << c.output_dir << '\n';
    (void)j;
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const InvalidArgument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIoError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
