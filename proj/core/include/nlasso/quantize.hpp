#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace nlasso {

/// Symmetric q-bit scalar quantizer. With L = 2^(bits-1) positive levels,
/// an input x maps to sign(x) * levels[i] where thresholds[i] <= |x| < thresholds[i+1].
/// thresholds has L+1 entries: thresholds.front() == 0, thresholds.back() == +inf.
struct QuantizerDesign {
  int bits = 1;
  std::vector<double> levels;
  std::vector<double> thresholds;

  int level_count() const { return static_cast<int>(levels.size()); }
};

/// Throws ValidationError on any broken invariant (ordering, sizes, sentinels).
void validate(const QuantizerDesign& d);

QuantizerDesign one_bit_design(double level);

/// Scales every level by c > 0; thresholds unchanged.
QuantizerDesign scale_levels(const QuantizerDesign& d, double c);

double quantize(double x, const QuantizerDesign& d);

struct QuantizerMoments {
  double mu = 0.0;
  double tau2 = 0.0;
  double sigma2 = 0.0;
};

/// Closed-form mu and tau^2 of the quantizer applied to a standard normal input.
QuantizerMoments quantizer_moments(const QuantizerDesign& d);

/// sigma^2 / mu^2, the quantity that drives the LASSO error. Throws
/// DegenerateDesign when |mu| < 1e-12.
double design_objective(const QuantizerDesign& d);

/// Mean-squared quantization error E[(gamma - Q(gamma))^2] = tau^2 - 2 mu + 1.
double quantization_mse(const QuantizerDesign& d);

struct LloydMaxConfig {
  double tol = 1e-12;
  int max_iters = 10000;
};

struct DesignResult {
  QuantizerDesign design;
  double mu = 0.0;
  double tau2 = 0.0;
  double sigma2 = 0.0;
  double ratio = 0.0;
  int iterations = 0;
  double stationarity_residual = 0.0;
  std::vector<double> mse_history;  // quantization MSE after each iteration
};

/// Equiprobable thresholds on |gamma| with centroid levels.
QuantizerDesign default_initial_design(int bits);

/// Lloyd-Max iteration for a standard normal source. Thresholds become level
/// midpoints, levels become conditional means, until the largest parameter
/// change drops below cfg.tol. Throws NotConverged past cfg.max_iters.
DesignResult lloyd_max(int bits, const std::optional<QuantizerDesign>& init = std::nullopt,
                       const LloydMaxConfig& cfg = {});

/// Largest central finite-difference partial derivative of sigma^2/mu^2 over
/// all levels and interior thresholds, with step h.
double stationarity_check(const QuantizerDesign& d, double h);

std::string design_to_json(const DesignResult& r);
QuantizerDesign design_from_json(const std::string& text);
QuantizerDesign load_design(const std::filesystem::path& path);
void save_design(const DesignResult& r, const std::filesystem::path& path);

}  // namespace nlasso
