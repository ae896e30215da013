#pragma once

#include <string_view>

#include "nlasso/link.hpp"
#include "nlasso/regularizer.hpp"
#include "nlasso/signal.hpp"

namespace nlasso {

struct MaxMinConfig {
  double alpha_tol = 1e-10;  // inner golden-section width, relative to A_max
  double outer_tol = 1e-8;   // beta and tau golden-section widths, relative to their boxes
};

struct MaxMinSolution {
  double alpha_star = 0.0;  // predicted ||x_hat - mu x0||
  double beta_star = 0.0;
  double tau_star = 0.0;
  double cost = 0.0;
  double alpha_max = 0.0;
  double tau_max = 0.0;
};

/// The three-scalar objective
///   H = beta sqrt(delta) sqrt(alpha^2 + sigma^2) - alpha tau / 2 + mu^2 tau / (2 alpha)
///       - (alpha lambda^2 / tau) F(beta / lambda, mu tau / (lambda alpha), tau / (lambda alpha))
double maxmin_objective(const RegularizerSpec& reg, const SignalPrior& prior, double delta, double lambda,
                        const LinkMoments& moments, double alpha, double beta, double tau);

/// max over beta in [0,1], tau in (0, T_max] of min over alpha in (0, A_max] of H.
/// Nested golden-section searches; H is strictly convex in alpha and
/// min_alpha H is jointly concave in (beta, tau).
/// Throws NoInteriorSolution if alpha_star lands on A_max.
MaxMinSolution solve_maxmin(const RegularizerSpec& reg, const SignalPrior& prior, double delta, double lambda,
                            const LinkMoments& moments, const MaxMinConfig& cfg = {});

enum class Regime { BelowCritical, AboveCritical };

std::string_view to_string(Regime r);

struct SparsePrediction {
  double kappa_star = 0.0;
  double lambda_crit = 0.0;
  double kappa_crit = 0.0;  // 0 when delta >= 1
  double error_sq = 0.0;
  Regime regime = Regime::AboveCritical;
};

/// Critical pair (lambda_crit, kappa_crit) solving
///   kappa^2 delta = sigma^2 + E[(eta(kappa h + mu X; kappa lambda) - mu X)^2]
///   delta = P(|kappa h + mu X| > kappa lambda)
/// for delta < 1. The second line is the h-correlation equation after Stein's identity.
struct CriticalPair {
  double lambda_crit = 0.0;
  double kappa_crit = 0.0;
};

CriticalPair critical_pair(const SignalPrior& prior, double delta, const LinkMoments& moments);

/// Unique kappa solving the first equation above at beta = 1, by bisection
/// on [1e-6, 1e6]. Throws FixedPointDiverged if no bracket exists there.
double solve_kappa(const SignalPrior& prior, double delta, double lambda, const LinkMoments& moments);

/// Asymptotic ||x_hat - mu x0||^2 for the L1 LASSO with a scalar sparse prior.
SparsePrediction sparse_fixed_point(const SignalPrior& prior, double delta, double lambda,
                                    const LinkMoments& moments);

/// Nonnegative root of 2[(1 + x^2) Q(x) - x phi(x)] = delta, 0 when delta >= 1.
double lambda_min(double delta);

/// sigma^2 / (delta - 1). Throws InvalidDelta if delta <= 1.
double ls_error(double delta, double sigma2);

/// sigma^2 rho / (delta - rho). Throws InvalidRatio outside 0 < rho <= 1,
/// delta - rho >= 1e-9.
double cone_bound(double rho, double delta, double sigma2);

}  // namespace nlasso
