#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nlasso/link.hpp"
#include "nlasso/predict.hpp"
#include "nlasso/regularizer.hpp"
#include "nlasso/signal.hpp"
#include "nlasso/solver.hpp"

namespace nlasso {

struct ExperimentSpec {
  Eigen::Index n = 0;
  std::vector<double> deltas;
  std::vector<double> lambdas;
  int trials = 1;
  SignalPrior prior = SparseGauss{};
  LinkModel link;
  RegularizerSpec reg = L1Norm{};
  std::uint64_t seed = 0;
  bool seed_defaulted = false;
  SolverConfig solver;
  bool run_nonlinear = true;
  bool run_linear_surrogate = true;
  bool run_prediction = true;
};

/// Collects every violated invariant and throws one ValidationError listing them.
void validate(const ExperimentSpec& spec);

/// key = value lines; '#' starts a comment. Keys:
///   n, delta, lambda, trials, prior, link        (required)
///   reg, seed, tol, max_iters, gap_tol,
///   run_nonlinear, run_linear, run_prediction    (optional)
/// delta and lambda take comma-separated lists. Unknown or repeated keys
/// raise ParseError with the line number. A relative qbit design path is
/// resolved against the config file's directory.
ExperimentSpec parse_config(const std::filesystem::path& path);
ExperimentSpec parse_config_text(const std::string& text, const std::filesystem::path& base_dir = {});

struct SummaryRecord {
  double delta = 0.0;
  double lambda = 0.0;
  double mean_err_nonlinear = 0.0;
  double se_nonlinear = 0.0;
  double mean_err_linear = 0.0;
  double se_linear = 0.0;
  double predicted_err_sq = 0.0;  // NaN when not computed
  double lambda_crit = 0.0;       // NaN when undefined for the prior
  Eigen::Index n = 0;
  int trials = 0;
  int failed_nonlinear = 0;
  int failed_linear = 0;
  bool flagged = false;  // more than 20% failed trials
};

struct TrialOutcome {
  double err_nonlinear = 0.0;
  double err_linear = 0.0;
  bool ok_nonlinear = false;
  bool ok_linear = false;
  double objective_nonlinear = 0.0;
  // Hashes of the (A, x0) pair each run actually consumed.
  std::uint64_t design_hash_nonlinear = 0;
  std::uint64_t design_hash_linear = 0;
};

/// Runs every trial of one (delta, lambda) grid point.
std::vector<TrialOutcome> run_trials(const ExperimentSpec& spec, std::size_t delta_index,
                                     std::size_t lambda_index);

/// Mean and standard error (sample std / sqrt(count)) over the flagged entries.
std::pair<double, double> mean_and_se(const std::vector<double>& values);

struct PredictionRecord {
  double delta = 0.0;
  double lambda = 0.0;
  double alpha_sq = 0.0;
  double beta = 0.0;
  double tau = 0.0;
  double cost = 0.0;
  double lambda_crit = 0.0;  // NaN when undefined for the prior
  Regime regime = Regime::AboveCritical;
  double error_sq = 0.0;  // sparse fixed point for scalar priors, else alpha_sq
};

PredictionRecord predict_point(const ExperimentSpec& spec, const LinkMoments& moments, double delta, double lambda);

std::vector<SummaryRecord> run_experiment(const ExperimentSpec& spec);

enum class OutputFormat { Csv, Json };

OutputFormat parse_format(std::string_view text);

/// CSV header: delta,lambda,mean_err_nl,se_nl,mean_err_lin,se_lin,pred_err_sq,lambda_crit,n,trials
/// Floats carry 10 significant digits. Throws InvalidArgument on empty input.
std::string format_results(const std::vector<SummaryRecord>& records, OutputFormat format);
void emit_results(const std::vector<SummaryRecord>& records, OutputFormat format, const std::filesystem::path& path);

std::vector<SummaryRecord> parse_results(const std::string& text, OutputFormat format);
std::vector<SummaryRecord> read_results(const std::filesystem::path& path);

/// Round to 10 significant digits, as written to disk.
double round_sig10(double v);

}  // namespace nlasso
