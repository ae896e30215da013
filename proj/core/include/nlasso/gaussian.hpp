#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

namespace nlasso {

inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

/// Phi(x), accurate in both tails.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Q(x) = Phi(-x) = P(Z > x). Q(+inf) = 0.
inline double normal_tail(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double normal_quantile(double p);

enum class QuadratureMethod { Composite, GaussHermite };

/// How expectations over a standard normal are evaluated.
///
/// Composite splits [-support, support] into panels no wider than panel_width,
/// additionally cut at the integrand's breakpoints, and applies 20-point
/// Gauss-Legendre on each panel. GaussHermite uses a single probabilists'
/// rule with hermite_nodes nodes and ignores breakpoints, so it is only
/// accurate for smooth integrands.
struct QuadratureConfig {
  QuadratureMethod method = QuadratureMethod::Composite;
  int hermite_nodes = 201;
  double panel_width = 0.5;
  double support = 14.0;
};

/// Nodes and weights for E[h(Z)], Z ~ N(0,1). Weights sum to one.
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

GaussHermiteRule gauss_hermite_rule(int n);

/// E[h(Z)] for Z ~ N(0,1). `breakpoints` lists points where h may jump or
/// kink; they are only used by the composite method.
template <class Fn>
double gaussian_expectation(Fn&& h, std::span<const double> breakpoints,
                            const QuadratureConfig& cfg = {}) {
  if (cfg.method == QuadratureMethod::GaussHermite) {
    const auto rule = gauss_hermite_rule(cfg.hermite_nodes);
    double acc = 0.0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) acc += rule.weights[k] * h(rule.nodes[k]);
    return acc;
  }

  const double lo = -cfg.support;
  const double hi = cfg.support;
  std::vector<double> edges;
  const int panels = static_cast<int>(std::ceil((hi - lo) / cfg.panel_width));
  edges.reserve(panels + 1 + breakpoints.size());
  for (int k = 0; k <= panels; ++k) edges.push_back(lo + (hi - lo) * k / panels);
  for (double b : breakpoints)
    if (std::isfinite(b) && b > lo && b < hi) edges.push_back(b);
  std::sort(edges.begin(), edges.end());

  using Rule = boost::math::quadrature::gauss<double, 20>;
  auto weighted = [&h](double x) { return h(x) * normal_pdf(x); };
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
    if (edges[k + 1] - edges[k] <= 0.0) continue;
    acc += Rule::integrate(weighted, edges[k], edges[k + 1]);
  }
  return acc;
}

}  // namespace nlasso
