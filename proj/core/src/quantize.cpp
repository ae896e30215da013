#include "nlasso/quantize.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "nlasso/error.hpp"
#include "nlasso/gaussian.hpp"

namespace nlasso {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double half_gauss_exp(double t) { return std::isinf(t) ? 0.0 : std::exp(-0.5 * t * t); }

// Conditional mean of a standard normal restricted to [a, b], 0 <= a < b.
double centroid(double a, double b) {
  const double mass = normal_tail(a) - normal_tail(b);
  const double first = (std::isinf(a) ? 0.0 : normal_pdf(a)) - (std::isinf(b) ? 0.0 : normal_pdf(b));
  return first / mass;
}

// Levels relative to the largest one, snapped to a 2^-40 grid. Any rescaling
// of the levels maps to the same shape, so the ratio below is bitwise stable.
QuantizerDesign canonical_shape(const QuantizerDesign& d) {
  QuantizerDesign out = d;
  const double top = d.levels.back();
  for (double& l : out.levels) l = std::ldexp(std::nearbyint(std::ldexp(l / top, 40)), -40);
  return out;
}

void set_centroids(QuantizerDesign& d) {
  for (int i = 0; i < d.level_count(); ++i) d.levels[i] = centroid(d.thresholds[i], d.thresholds[i + 1]);
}

}  // namespace

void validate(const QuantizerDesign& d) {
  if (d.bits < 1 || d.bits > 30) throw Error(ErrorKind::ValidationError, "bits must be in [1, 30]");
  const std::size_t levels = std::size_t{1} << (d.bits - 1);
  if (d.levels.size() != levels)
    throw Error(ErrorKind::ValidationError, "expected " + std::to_string(levels) + " levels");
  if (d.thresholds.size() != levels + 1)
    throw Error(ErrorKind::ValidationError, "expected " + std::to_string(levels + 1) + " thresholds");
  if (d.thresholds.front() != 0.0) throw Error(ErrorKind::ValidationError, "first threshold must be 0");
  if (d.thresholds.back() != kInf) throw Error(ErrorKind::ValidationError, "last threshold must be +inf");
  for (std::size_t i = 0; i + 1 < d.thresholds.size(); ++i)
    if (!(d.thresholds[i] < d.thresholds[i + 1]))
      throw Error(ErrorKind::ValidationError, "thresholds must be strictly increasing");
  if (!(d.levels.front() > 0.0) || !std::isfinite(d.levels.back()))
    throw Error(ErrorKind::ValidationError, "levels must be positive and finite");
  for (std::size_t i = 0; i + 1 < d.levels.size(); ++i)
    if (!(d.levels[i] < d.levels[i + 1]))
      throw Error(ErrorKind::ValidationError, "levels must be strictly increasing");
}

QuantizerDesign one_bit_design(double level) {
  QuantizerDesign d{1, {level}, {0.0, kInf}};
  validate(d);
  return d;
}

QuantizerDesign scale_levels(const QuantizerDesign& d, double c) {
  if (!(c > 0.0)) throw Error(ErrorKind::InvalidArgument, "level scale must be positive");
  QuantizerDesign out = d;
  for (double& l : out.levels) l *= c;
  return out;
}

double quantize(double x, const QuantizerDesign& d) {
  if (x == 0.0) return 0.0;
  const double ax = std::abs(x);
  // First threshold strictly greater than |x| closes the active cell.
  const auto it = std::upper_bound(d.thresholds.begin() + 1, d.thresholds.end(), ax);
  const auto cell = std::min<std::ptrdiff_t>(it - d.thresholds.begin() - 1, d.level_count() - 1);
  return std::copysign(d.levels[cell], x);
}

QuantizerMoments quantizer_moments(const QuantizerDesign& d) {
  QuantizerMoments m;
  for (int i = 0; i < d.level_count(); ++i) {
    const double lo = d.thresholds[i];
    const double hi = d.thresholds[i + 1];
    m.mu += d.levels[i] * (half_gauss_exp(lo) - half_gauss_exp(hi));
    m.tau2 += d.levels[i] * d.levels[i] * (normal_tail(lo) - normal_tail(hi));
  }
  m.mu *= std::sqrt(2.0 / std::numbers::pi);
  m.tau2 *= 2.0;
  m.sigma2 = m.tau2 - m.mu * m.mu;
  return m;
}

double design_objective(const QuantizerDesign& d) {
  const auto m = quantizer_moments(d);
  if (std::abs(m.mu) < 1e-12) throw Error(ErrorKind::DegenerateDesign, "mu vanishes for this design");
  const auto c = quantizer_moments(canonical_shape(d));
  return c.sigma2 / (c.mu * c.mu);
}

double quantization_mse(const QuantizerDesign& d) {
  const auto m = quantizer_moments(d);
  return m.tau2 - 2.0 * m.mu + 1.0;
}

QuantizerDesign default_initial_design(int bits) {
  if (bits < 1 || bits > 30) throw Error(ErrorKind::InvalidArgument, "bits must be in [1, 30]");
  const int levels = 1 << (bits - 1);
  QuantizerDesign d;
  d.bits = bits;
  d.levels.assign(levels, 0.0);
  d.thresholds.assign(levels + 1, 0.0);
  d.thresholds.back() = kInf;
  for (int i = 1; i < levels; ++i)
    d.thresholds[i] = normal_quantile(0.5 + 0.5 * static_cast<double>(i) / levels);
  set_centroids(d);
  return d;
}

DesignResult lloyd_max(int bits, const std::optional<QuantizerDesign>& init, const LloydMaxConfig& cfg) {
  QuantizerDesign d = init ? *init : default_initial_design(bits);
  if (d.bits != bits) throw Error(ErrorKind::InvalidArgument, "initial design has a different bit count");
  validate(d);
  set_centroids(d);

  DesignResult r;
  const int levels = d.level_count();
  bool converged = levels == 1;
  int it = 0;
  while (!converged) {
    if (it >= cfg.max_iters)
      throw Error(ErrorKind::NotConverged, "Lloyd-Max did not converge in " + std::to_string(cfg.max_iters) +
                                               " iterations");
    double change = 0.0;
    for (int i = 1; i < levels; ++i) {
      const double t = 0.5 * (d.levels[i - 1] + d.levels[i]);
      change = std::max(change, std::abs(t - d.thresholds[i]));
      d.thresholds[i] = t;
    }
    for (int i = 0; i < levels; ++i) {
      const double l = centroid(d.thresholds[i], d.thresholds[i + 1]);
      change = std::max(change, std::abs(l - d.levels[i]));
      d.levels[i] = l;
    }
    ++it;
    r.mse_history.push_back(quantization_mse(d));
    converged = change < cfg.tol;
  }
  if (r.mse_history.empty()) r.mse_history.push_back(quantization_mse(d));

  const auto m = quantizer_moments(d);
  r.design = d;
  r.mu = m.mu;
  r.tau2 = m.tau2;
  r.sigma2 = m.sigma2;
  r.ratio = design_objective(d);
  r.iterations = it;
  r.stationarity_residual = stationarity_check(d, 1e-4);
  return r;
}

double stationarity_check(const QuantizerDesign& d, double h) {
  if (!(h > 0.0)) throw Error(ErrorKind::InvalidArgument, "finite-difference step must be positive");
  validate(d);
  auto ratio = [](const QuantizerDesign& q) {
    const auto m = quantizer_moments(q);
    return m.sigma2 / (m.mu * m.mu);
  };
  double worst = 0.0;
  QuantizerDesign work = d;
  auto probe = [&](double& param) {
    const double saved = param;
    param = saved + h;
    const double up = ratio(work);
    param = saved - h;
    const double down = ratio(work);
    param = saved;
    worst = std::max(worst, std::abs(up - down) / (2.0 * h));
  };
  for (double& l : work.levels) probe(l);
  for (int i = 1; i < work.level_count(); ++i) probe(work.thresholds[i]);
  return worst;
}

std::string design_to_json(const DesignResult& r) {
  nlohmann::ordered_json j;
  j["bits"] = r.design.bits;
  j["levels"] = r.design.levels;
  auto thresholds = nlohmann::ordered_json::array();
  for (double t : r.design.thresholds) {
    if (std::isinf(t))
      thresholds.push_back("inf");
    else
      thresholds.push_back(t);
  }
  j["thresholds"] = thresholds;
  j["mu"] = r.mu;
  j["tau2"] = r.tau2;
  j["sigma2"] = r.sigma2;
  j["ratio"] = r.ratio;
  j["iterations"] = r.iterations;
  j["stationarity_residual"] = r.stationarity_residual;
  return j.dump(2);
}

QuantizerDesign design_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::ParseError, std::string("design file: ") + e.what());
  }
  QuantizerDesign d;
  try {
    d.levels = j.at("levels").get<std::vector<double>>();
    d.bits = j.contains("bits") ? j.at("bits").get<int>()
                                : static_cast<int>(std::lround(std::log2(d.levels.size()))) + 1;
    for (const auto& t : j.at("thresholds")) {
      if (t.is_null() || (t.is_string() && (t == "inf" || t == "Infinity")))
        d.thresholds.push_back(kInf);
      else
        d.thresholds.push_back(t.get<double>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("design file: ") + e.what());
  }
  validate(d);
  return d;
}

QuantizerDesign load_design(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open design file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return design_from_json(buf.str());
}

void save_design(const DesignResult& r, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::IoError, "cannot write design file " + path.string());
  out << design_to_json(r) << '\n';
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

}  // namespace nlasso
