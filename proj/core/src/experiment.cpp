#include "nlasso/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

#include "nlasso/error.hpp"
#include "parse_util.hpp"

namespace nlasso {

namespace {

constexpr const char* kCsvHeader = "delta,lambda,mean_err_nl,se_nl,mean_err_lin,se_lin,pred_err_sq,lambda_crit,n,trials";
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> parse_list(std::string_view text, std::string_view what) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto piece = text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    out.push_back(detail::parse_double(piece, what));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool parse_bool(std::string_view text, std::string_view what) {
  text = detail::trim(text);
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw Error(ErrorKind::ParseError, std::string(what) + ": expected true or false");
}

std::uint64_t hash_design(const Eigen::MatrixXd& A, const Eigen::VectorXd& x0) {
  auto bytes = [](const double* p, Eigen::Index count) {
    return std::string_view(reinterpret_cast<const char*>(p), static_cast<std::size_t>(count) * sizeof(double));
  };
  const std::hash<std::string_view> h;
  return derive_seed(h(bytes(A.data(), A.size())), {h(bytes(x0.data(), x0.size()))});
}

std::string fmt10(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

double parse_csv_double(std::string_view s) {
  s = detail::trim(s);
  if (s == "nan" || s == "NaN" || s.empty()) return kNaN;
  return detail::parse_double(s, "csv field");
}

}  // namespace

double round_sig10(double v) {
  if (!std::isfinite(v)) return v;
  return std::strtod(fmt10(v).c_str(), nullptr);
}

void validate(const ExperimentSpec& spec) {
  std::vector<std::string> bad;
  if (spec.n < 1) bad.emplace_back("n must be >= 1");
  if (spec.trials < 1) bad.emplace_back("trials must be >= 1");
  if (spec.deltas.empty()) bad.emplace_back("delta list is empty");
  for (double d : spec.deltas)
    if (!(d > 0.0)) bad.emplace_back("delta must be > 0 (got " + fmt10(d) + ")");
  if (spec.lambdas.empty()) bad.emplace_back("lambda grid is empty");
  for (std::size_t i = 0; i < spec.lambdas.size(); ++i) {
    if (!(spec.lambdas[i] > 0.0)) bad.emplace_back("lambda must be > 0 (got " + fmt10(spec.lambdas[i]) + ")");
    if (i > 0 && !(spec.lambdas[i] > spec.lambdas[i - 1])) bad.emplace_back("lambda grid must be strictly increasing");
  }
  if (spec.n >= 1) {
    for (double d : spec.deltas)
      if (d > 0.0 && std::llround(d * static_cast<double>(spec.n)) < 1)
        bad.emplace_back("delta " + fmt10(d) + " gives zero measurements");
  }
  try {
    validate(spec.prior);
  } catch (const Error& e) {
    bad.emplace_back(e.what());
  }
  try {
    validate(spec.link);
  } catch (const Error& e) {
    bad.emplace_back(e.what());
  }
  try {
    validate(spec.reg);
  } catch (const Error& e) {
    bad.emplace_back(e.what());
  }
  if (block_size(spec.prior) != block_size(spec.reg))
    bad.emplace_back("prior block size " + std::to_string(block_size(spec.prior)) +
                     " does not match regularizer block size " + std::to_string(block_size(spec.reg)));
  if (spec.n >= 1 && spec.n % block_size(spec.prior) != 0)
    bad.emplace_back("block size does not divide n");
  if (!(spec.solver.tol > 0.0)) bad.emplace_back("tol must be > 0");
  if (spec.solver.max_iters < 1) bad.emplace_back("max_iters must be >= 1");
  if (!(spec.solver.gap_tol > 0.0)) bad.emplace_back("gap_tol must be > 0");

  if (!bad.empty()) {
    std::string msg = std::to_string(bad.size()) + " violation(s):";
    for (const auto& b : bad) msg += "\n  - " + b;
    throw Error(ErrorKind::ValidationError, msg);
  }
}

ExperimentSpec parse_config_text(const std::string& text, const std::filesystem::path& base_dir) {
  using Setter = std::function<void(ExperimentSpec&, std::string_view)>;
  const std::map<std::string, Setter, std::less<>> setters{
      {"n", [](ExperimentSpec& s, std::string_view v) { s.n = detail::parse_int(v, "n"); }},
      {"delta", [](ExperimentSpec& s, std::string_view v) { s.deltas = parse_list(v, "delta"); }},
      {"lambda", [](ExperimentSpec& s, std::string_view v) { s.lambdas = parse_list(v, "lambda"); }},
      {"trials", [](ExperimentSpec& s, std::string_view v) { s.trials = static_cast<int>(detail::parse_int(v, "trials")); }},
      {"prior", [](ExperimentSpec& s, std::string_view v) { s.prior = parse_prior(v); }},
      {"link",
       [&base_dir](ExperimentSpec& s, std::string_view v) {
         const auto [head, arg] = detail::split_head(v);
         if (head == "qbit" && !arg.empty() && !base_dir.empty()) {
           const std::filesystem::path p(arg);
           if (p.is_relative()) {
             s.link = parse_link("qbit:" + (base_dir / p).string());
             return;
           }
         }
         s.link = parse_link(v);
       }},
      {"reg", [](ExperimentSpec& s, std::string_view v) { s.reg = parse_regularizer(v); }},
      {"seed",
       [](ExperimentSpec& s, std::string_view v) {
         const long long seed = detail::parse_int(v, "seed");
         if (seed < 0) throw Error(ErrorKind::ParseError, "seed must be >= 0");
         s.seed = static_cast<std::uint64_t>(seed);
       }},
      {"tol", [](ExperimentSpec& s, std::string_view v) { s.solver.tol = detail::parse_double(v, "tol"); }},
      {"gap_tol", [](ExperimentSpec& s, std::string_view v) { s.solver.gap_tol = detail::parse_double(v, "gap_tol"); }},
      {"max_iters",
       [](ExperimentSpec& s, std::string_view v) { s.solver.max_iters = static_cast<int>(detail::parse_int(v, "max_iters")); }},
      {"run_nonlinear", [](ExperimentSpec& s, std::string_view v) { s.run_nonlinear = parse_bool(v, "run_nonlinear"); }},
      {"run_linear", [](ExperimentSpec& s, std::string_view v) { s.run_linear_surrogate = parse_bool(v, "run_linear"); }},
      {"run_prediction", [](ExperimentSpec& s, std::string_view v) { s.run_prediction = parse_bool(v, "run_prediction"); }},
  };
  const std::vector<std::string> required{"n", "delta", "lambda", "trials", "prior", "link"};

  ExperimentSpec spec;
  std::map<std::string, int, std::less<>> seen;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line(raw);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto where = "line " + std::to_string(line_no) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw Error(ErrorKind::ParseError, where + "expected key = value");
    const auto key = detail::trim(line.substr(0, eq));
    const auto value = detail::trim(line.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) throw Error(ErrorKind::ParseError, where + "unknown key '" + std::string(key) + "'");
    if (const auto prev = seen.find(key); prev != seen.end())
      throw Error(ErrorKind::ParseError,
                  where + "duplicate key '" + std::string(key) + "' (first on line " + std::to_string(prev->second) + ")");
    seen.emplace(std::string(key), line_no);
    try {
      it->second(spec, value);
    } catch (const Error& e) {
      // Parse errors get the line number; validation errors stay validation errors.
      if (e.kind() == ErrorKind::ValidationError) throw;
      throw Error(ErrorKind::ParseError, where + e.what());
    }
  }

  std::vector<std::string> missing;
  for (const auto& k : required)
    if (!seen.contains(k)) missing.push_back(k);
  if (!missing.empty()) {
    std::string msg = "missing required key(s):";
    for (const auto& k : missing) msg += " " + k;
    throw Error(ErrorKind::ValidationError, msg);
  }
  spec.seed_defaulted = !seen.contains("seed");
  validate(spec);
  return spec;
}

ExperimentSpec parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path.parent_path());
}

std::vector<TrialOutcome> run_trials(const ExperimentSpec& spec, std::size_t delta_index, std::size_t lambda_index) {
  const LinkMoments moments = compute_moments(spec.link);
  const double delta = spec.deltas.at(delta_index);
  const double lambda = spec.lambdas.at(lambda_index);
  const double sigma = std::sqrt(moments.sigma2);

  std::vector<TrialOutcome> out(static_cast<std::size_t>(spec.trials));
  for (int k = 0; k < spec.trials; ++k) {
    TrialOutcome& t = out[static_cast<std::size_t>(k)];
    Rng rng(derive_seed(spec.seed, {delta_index, lambda_index, static_cast<std::uint64_t>(k)}));
    const ProblemInstance p = generate_problem(spec.prior, spec.link, spec.reg, spec.n, delta, lambda, rng);
    const Eigen::VectorXd z = standard_normal_vector(p.A.rows(), rng);

    if (spec.run_nonlinear) {
      t.design_hash_nonlinear = hash_design(p.A, p.signal.x0);
      try {
        const SolveResult r = solve_lasso(p, spec.solver);
        t.err_nonlinear = error_metric(r.x_hat, moments.mu, p.signal.x0);
        t.objective_nonlinear = r.objective;
        t.ok_nonlinear = r.converged;
      } catch (const Error&) {
        t.err_nonlinear = kNaN;
      }
    }
    if (spec.run_linear_surrogate) {
      ProblemInstance lin = p;
      lin.y = moments.mu * p.u + sigma * z;
      t.design_hash_linear = hash_design(lin.A, lin.signal.x0);
      try {
        const SolveResult r = solve_lasso(lin, spec.solver);
        t.err_linear = error_metric(r.x_hat, moments.mu, lin.signal.x0);
        t.ok_linear = r.converged;
      } catch (const Error&) {
        t.err_linear = kNaN;
      }
    }
  }
  return out;
}

std::pair<double, double> mean_and_se(const std::vector<double>& values) {
  if (values.empty()) return {kNaN, kNaN};
  const double count = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= count;
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (count - 1.0)) / std::sqrt(count)};
}

PredictionRecord predict_point(const ExperimentSpec& spec, const LinkMoments& moments, double delta, double lambda) {
  PredictionRecord rec;
  rec.delta = delta;
  rec.lambda = lambda;
  const MaxMinSolution mm = solve_maxmin(spec.reg, spec.prior, delta, lambda, moments);
  rec.alpha_sq = mm.alpha_star * mm.alpha_star;
  rec.beta = mm.beta_star;
  rec.tau = mm.tau_star;
  rec.cost = mm.cost;
  if (is_scalar(spec.prior) && std::holds_alternative<L1Norm>(spec.reg)) {
    const SparsePrediction sp = sparse_fixed_point(spec.prior, delta, lambda, moments);
    rec.lambda_crit = sp.lambda_crit;
    rec.regime = sp.regime;
    rec.error_sq = sp.error_sq;
  } else {
    rec.lambda_crit = delta >= 1.0 ? 0.0 : kNaN;
    rec.regime = mm.beta_star < 1.0 - 1e-6 ? Regime::BelowCritical : Regime::AboveCritical;
    rec.error_sq = rec.alpha_sq;
  }
  return rec;
}

std::vector<SummaryRecord> run_experiment(const ExperimentSpec& spec) {
  validate(spec);
  const LinkMoments moments = compute_moments(spec.link);
  std::vector<SummaryRecord> records;
  for (std::size_t i = 0; i < spec.deltas.size(); ++i) {
    for (std::size_t j = 0; j < spec.lambdas.size(); ++j) {
      SummaryRecord rec;
      rec.delta = spec.deltas[i];
      rec.lambda = spec.lambdas[j];
      rec.n = spec.n;
      rec.trials = spec.trials;
      rec.predicted_err_sq = kNaN;
      rec.lambda_crit = kNaN;
      if (spec.run_prediction) {
        try {
          const PredictionRecord pr = predict_point(spec, moments, rec.delta, rec.lambda);
          rec.predicted_err_sq = pr.error_sq;
          rec.lambda_crit = pr.lambda_crit;
        } catch (const Error&) {
          // Left as NaN; a missing prediction should not discard the simulation.
        }
      }

      const auto trials = run_trials(spec, i, j);
      std::vector<double> nl, lin;
      for (const auto& t : trials) {
        if (spec.run_nonlinear) {
          if (!t.ok_nonlinear) ++rec.failed_nonlinear;
          if (std::isfinite(t.err_nonlinear)) nl.push_back(t.err_nonlinear);
        }
        if (spec.run_linear_surrogate) {
          if (!t.ok_linear) ++rec.failed_linear;
          if (std::isfinite(t.err_linear)) lin.push_back(t.err_linear);
        }
      }
      std::tie(rec.mean_err_nonlinear, rec.se_nonlinear) = spec.run_nonlinear ? mean_and_se(nl) : std::pair{kNaN, kNaN};
      std::tie(rec.mean_err_linear, rec.se_linear) =
          spec.run_linear_surrogate ? mean_and_se(lin) : std::pair{kNaN, kNaN};
      const int worst = std::max(rec.failed_nonlinear, rec.failed_linear);
      rec.flagged = worst * 5 > spec.trials;
      records.push_back(rec);
    }
  }
  return records;
}

OutputFormat parse_format(std::string_view text) {
  if (text == "csv") return OutputFormat::Csv;
  if (text == "json") return OutputFormat::Json;
  throw Error(ErrorKind::ValidationError, "format must be csv or json");
}

std::string format_results(const std::vector<SummaryRecord>& records, OutputFormat format) {
  if (records.empty()) throw Error(ErrorKind::InvalidArgument, "no records to emit");
  if (format == OutputFormat::Csv) {
    std::string out = std::string(kCsvHeader) + "\n";
    for (const auto& r : records) {
      out += fmt10(r.delta) + "," + fmt10(r.lambda) + "," + fmt10(r.mean_err_nonlinear) + "," +
             fmt10(r.se_nonlinear) + "," + fmt10(r.mean_err_linear) + "," + fmt10(r.se_linear) + "," +
             fmt10(r.predicted_err_sq) + "," + fmt10(r.lambda_crit) + "," + std::to_string(r.n) + "," +
             std::to_string(r.trials) + "\n";
    }
    return out;
  }
  auto num = [](double v) -> nlohmann::json {
    if (!std::isfinite(v)) return nullptr;
    return round_sig10(v);
  };
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : records) {
    arr.push_back({{"delta", num(r.delta)},
                   {"lambda", num(r.lambda)},
                   {"mean_err_nl", num(r.mean_err_nonlinear)},
                   {"se_nl", num(r.se_nonlinear)},
                   {"mean_err_lin", num(r.mean_err_linear)},
                   {"se_lin", num(r.se_linear)},
                   {"pred_err_sq", num(r.predicted_err_sq)},
                   {"lambda_crit", num(r.lambda_crit)},
                   {"n", r.n},
                   {"trials", r.trials}});
  }
  return arr.dump(2) + "\n";
}

void emit_results(const std::vector<SummaryRecord>& records, OutputFormat format, const std::filesystem::path& path) {
  const std::string body = format_results(records, format);
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
  out << body;
  if (!out) throw Error(ErrorKind::IoError, "write to " + path.string() + " failed");
}

std::vector<SummaryRecord> parse_results(const std::string& text, OutputFormat format) {
  std::vector<SummaryRecord> out;
  if (format == OutputFormat::Json) {
    const auto arr = nlohmann::json::parse(text);
    auto num = [](const nlohmann::json& v) { return v.is_null() ? kNaN : v.get<double>(); };
    for (const auto& r : arr) {
      SummaryRecord rec;
      rec.delta = num(r.at("delta"));
      rec.lambda = num(r.at("lambda"));
      rec.mean_err_nonlinear = num(r.at("mean_err_nl"));
      rec.se_nonlinear = num(r.at("se_nl"));
      rec.mean_err_linear = num(r.at("mean_err_lin"));
      rec.se_linear = num(r.at("se_lin"));
      rec.predicted_err_sq = num(r.at("pred_err_sq"));
      rec.lambda_crit = num(r.at("lambda_crit"));
      rec.n = r.at("n").get<Eigen::Index>();
      rec.trials = r.at("trials").get<int>();
      out.push_back(rec);
    }
    return out;
  }
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || detail::trim(line) != kCsvHeader)
    throw Error(ErrorKind::ParseError, "line 1: unexpected CSV header");
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    std::vector<std::string_view> f;
    std::string_view rest(line);
    for (auto c = rest.find(','); c != std::string_view::npos; c = rest.find(',')) {
      f.push_back(rest.substr(0, c));
      rest = rest.substr(c + 1);
    }
    f.push_back(rest);
    if (f.size() != 10) throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": expected 10 fields");
    SummaryRecord rec;
    rec.delta = parse_csv_double(f[0]);
    rec.lambda = parse_csv_double(f[1]);
    rec.mean_err_nonlinear = parse_csv_double(f[2]);
    rec.se_nonlinear = parse_csv_double(f[3]);
    rec.mean_err_linear = parse_csv_double(f[4]);
    rec.se_linear = parse_csv_double(f[5]);
    rec.predicted_err_sq = parse_csv_double(f[6]);
    rec.lambda_crit = parse_csv_double(f[7]);
    rec.n = detail::parse_int(f[8], "n");
    rec.trials = static_cast<int>(detail::parse_int(f[9], "trials"));
    out.push_back(rec);
  }
  return out;
}

std::vector<SummaryRecord> read_results(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  const bool json = first != std::string::npos && text[first] == '[';
  return parse_results(text, json ? OutputFormat::Json : OutputFormat::Csv);
}

}  // namespace nlasso
