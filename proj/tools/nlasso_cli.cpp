#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "nlasso/error.hpp"
#include "nlasso/experiment.hpp"
#include "nlasso/link.hpp"
#include "nlasso/predict.hpp"
#include "nlasso/quantize.hpp"
#include "nlasso/solver.hpp"

namespace {

using nlasso::Error;
using nlasso::ErrorKind;
using json = nlohmann::ordered_json;

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

// NaN becomes null in the dump.
double finite_or_nan(double v) { return std::isfinite(v) ? v : std::nan(""); }

void print(const json& j) { std::cout << j.dump(2) << '\n'; }

void echo_seed(const nlasso::ExperimentSpec& spec) {
  if (spec.seed_defaulted) std::cerr << "seed not set, using default " << spec.seed << '\n';
}

int cmd_moments(const std::string& link_text, const std::string& method) {
  const auto link = nlasso::parse_link(link_text);
  const auto m = method == "quadrature" ? nlasso::quadrature_moments(link) : nlasso::compute_moments(link);
  print(json{{"link", nlasso::describe(link)}, {"mu", m.mu}, {"tau2", m.tau2}, {"sigma2", m.sigma2}, {"zeta", m.zeta}});
  return 0;
}

int cmd_predict(const std::string& config) {
  const auto spec = nlasso::parse_config(config);
  const auto moments = nlasso::compute_moments(spec.link);
  json out = json::array();
  for (double delta : spec.deltas) {
    for (double lambda : spec.lambdas) {
      const auto p = nlasso::predict_point(spec, moments, delta, lambda);
      out.push_back(json{{"delta", p.delta},
                         {"lambda", p.lambda},
                         {"alpha_sq", p.alpha_sq},
                         {"beta", p.beta},
                         {"tau", p.tau},
                         {"cost", p.cost},
                         {"lambda_crit", finite_or_nan(p.lambda_crit)},
                         {"regime", std::string(nlasso::to_string(p.regime))},
                         {"error_sq", p.error_sq}});
    }
  }
  print(out);
  return 0;
}

int cmd_solve(const std::string& config, std::optional<std::uint64_t> seed) {
  auto spec = nlasso::parse_config(config);
  if (seed) {
    spec.seed = *seed;
    spec.seed_defaulted = false;
  }
  echo_seed(spec);
  const auto moments = nlasso::compute_moments(spec.link);
  json out = json::array();
  for (std::size_t i = 0; i < spec.deltas.size(); ++i) {
    for (std::size_t j = 0; j < spec.lambdas.size(); ++j) {
      nlasso::Rng rng(nlasso::derive_seed(spec.seed, {i, j, 0}));
      const auto p = nlasso::generate_problem(spec.prior, spec.link, spec.reg, spec.n, spec.deltas[i],
                                              spec.lambdas[j], rng);
      const auto r = nlasso::solve_lasso(p, spec.solver);
      out.push_back(json{{"delta", spec.deltas[i]},
                         {"lambda", spec.lambdas[j]},
                         {"n", spec.n},
                         {"m", p.A.rows()},
                         {"objective", r.objective},
                         {"err_sq", nlasso::error_metric(r.x_hat, moments.mu, p.signal.x0)},
                         {"iterations", r.iterations},
                         {"converged", r.converged},
                         {"primal_dual_gap", r.primal_dual_gap}});
    }
  }
  print(out);
  return 0;
}

int cmd_experiment(const std::string& config, const std::string& out, const std::string& format) {
  const auto fmt = nlasso::parse_format(format);
  const auto spec = nlasso::parse_config(config);
  echo_seed(spec);
  const auto records = nlasso::run_experiment(spec);
  for (const auto& r : records)
    if (r.flagged)
      std::cerr << "warning: delta=" << r.delta << " lambda=" << r.lambda << " has " << r.failed_nonlinear
                << " nonlinear and " << r.failed_linear << " linear failed trials\n";
  nlasso::emit_results(records, fmt, out);
  return 0;
}

int cmd_quantize(int bits, const std::string& out) {
  const auto r = nlasso::lloyd_max(bits);
  if (!out.empty()) nlasso::save_design(r, out);
  std::cout << nlasso::design_to_json(r) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generalized LASSO under nonlinear measurements: predictions, simulation and quantizer design"};
  app.require_subcommand(1);

  std::string link_text, method = "closed";
  auto* moments = app.add_subcommand("moments", "Gaussian moments (mu, tau2, sigma2, zeta) of a link");
  moments->add_option("--link", link_text, "sign | noisy_sign:s | linear:s | relu | qbit:<file>")->required();
  moments->add_option("--method", method, "closed (default) or quadrature")
      ->check(CLI::IsMember({"closed", "quadrature"}));

  std::string config;
  auto* predict = app.add_subcommand("predict", "Analytic error prediction for each (delta, lambda) in a config");
  predict->add_option("--config", config, "experiment config file")->required();

  std::uint64_t seed_value = 0;
  auto* solve = app.add_subcommand("solve", "Solve one instance per (delta, lambda) grid point");
  solve->add_option("--config", config, "experiment config file")->required();
  auto* seed_opt = solve->add_option("--seed", seed_value, "overrides the config seed");

  std::string out, format = "csv";
  auto* experiment = app.add_subcommand("experiment", "Monte Carlo sweep against the prediction");
  experiment->add_option("--config", config, "experiment config file")->required();
  experiment->add_option("--out", out, "output path")->required();
  experiment->add_option("--format", format, "csv or json");

  int bits = 1;
  auto* quantize = app.add_subcommand("quantize", "Lloyd-Max quantizer design for a standard normal source");
  quantize->add_option("--bits", bits, "bits per measurement")->required();
  quantize->add_option("--out", out, "design file to write");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*moments) return cmd_moments(link_text, method);
    if (*predict) return cmd_predict(config);
    if (*solve) return cmd_solve(config, *seed_opt ? std::optional(seed_value) : std::nullopt);
    if (*experiment) return cmd_experiment(config, out, format);
    if (*quantize) return cmd_quantize(bits, out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    const bool invalid = e.kind() == ErrorKind::ValidationError || e.kind() == ErrorKind::ParseError ||
                         e.kind() == ErrorKind::InvalidArgument;
    return invalid ? kExitValidation : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitRuntime;
}
