#include "nlasso/predict.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

#include "nlasso/error.hpp"
#include "nlasso/gaussian.hpp"

namespace nlasso {

namespace {

constexpr double kInvPhi = 0.6180339887498948482;  // (sqrt(5) - 1) / 2

// Minimizer of a unimodal f on [lo, hi]; returns {argmin, min}.
template <class Fn>
std::pair<double, double> golden_min(Fn&& f, double lo, double hi, double tol) {
  double a = lo, b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  // Endpoints are candidates too, so box hits are reported faithfully.
  double x = fc < fd ? c : d;
  double fx = std::min(fc, fd);
  for (double e : {lo, hi}) {
    const double fe = f(e);
    if (fe < fx) {
      x = e;
      fx = fe;
    }
  }
  return {x, fx};
}

// Bisection for a sign change of f on [lo, hi] with f(lo) < 0 < f(hi).
template <class Fn>
double bisect(Fn&& f, double lo, double hi, double rel_tol = 1e-14, int max_iter = 400) {
  for (int k = 0; k < max_iter && hi - lo > rel_tol * std::max(std::abs(hi), 1e-300); ++k) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

void check_inputs(double delta, double lambda, const LinkMoments& m) {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw Error(ErrorKind::InvalidArgument, "delta must be > 0");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw Error(ErrorKind::InvalidArgument, "lambda must be > 0");
  if (!(m.sigma2 >= 0.0) || !std::isfinite(m.mu) || std::abs(m.mu) < 1e-12)
    throw Error(ErrorKind::InvalidArgument, "link moments need mu != 0 and sigma2 >= 0");
}

constexpr double kKappaLo = 1e-6;
constexpr double kKappaHi = 1e6;

}  // namespace

double maxmin_objective(const RegularizerSpec& reg, const SignalPrior& prior, double delta, double lambda,
                        const LinkMoments& moments, double alpha, double beta, double tau) {
  const double mu = moments.mu;
  const double c1 = beta / lambda;
  const double c2 = std::abs(mu) * tau / (lambda * alpha);
  const double c3 = tau / (lambda * alpha);
  return beta * std::sqrt(delta) * std::sqrt(alpha * alpha + moments.sigma2) - 0.5 * alpha * tau +
         mu * mu * tau / (2.0 * alpha) - alpha * lambda * lambda / tau * f_function(reg, prior, c1, c2, c3);
}

MaxMinSolution solve_maxmin(const RegularizerSpec& reg, const SignalPrior& prior, double delta, double lambda,
                            const LinkMoments& moments, const MaxMinConfig& cfg) {
  check_inputs(delta, lambda, moments);
  validate(reg);
  validate(prior);
  if (block_size(reg) != block_size(prior))
    throw Error(ErrorKind::IncompatiblePrior, "prior block size does not match the regularizer");

  const double sigma = std::sqrt(moments.sigma2);
  MaxMinSolution sol;
  sol.alpha_max = 10.0 * (sigma / std::max(std::sqrt(delta) - 1.0, 0.1) + 1.0);
  sol.tau_max = 10.0 * std::sqrt(delta);
  const double a_lo = 1e-8 * sol.alpha_max;
  const double t_lo = 1e-8 * sol.tau_max;

  auto inner = [&](double beta, double tau) {
    return golden_min([&](double a) { return maxmin_objective(reg, prior, delta, lambda, moments, a, beta, tau); },
                      a_lo, sol.alpha_max, cfg.alpha_tol * sol.alpha_max);
  };
  // Best tau for a given beta, maximizing min_alpha H.
  auto over_tau = [&](double beta) {
    return golden_min([&](double tau) { return -inner(beta, tau).second; }, t_lo, sol.tau_max,
                      cfg.outer_tol * sol.tau_max);
  };
  const auto [beta, neg_cost] = golden_min([&](double b) { return over_tau(b).second; }, 0.0, 1.0, cfg.outer_tol);
  const double tau = over_tau(beta).first;
  const auto [alpha, cost] = inner(beta, tau);

  sol.alpha_star = alpha;
  sol.beta_star = beta;
  sol.tau_star = tau;
  sol.cost = cost;
  (void)neg_cost;
  if (alpha >= sol.alpha_max * (1.0 - 1e-9))
    throw Error(ErrorKind::NoInteriorSolution,
                "alpha* reached its upper bound " + std::to_string(sol.alpha_max));
  if (tau >= sol.tau_max * (1.0 - 1e-9))
    throw Error(ErrorKind::NoInteriorSolution, "tau* reached its upper bound " + std::to_string(sol.tau_max));
  return sol;
}

std::string_view to_string(Regime r) {
  return r == Regime::BelowCritical ? "below_critical" : "above_critical";
}

double solve_kappa(const SignalPrior& prior, double delta, double lambda, const LinkMoments& moments) {
  check_inputs(delta, lambda, moments);
  const double mu = std::abs(moments.mu);
  auto psi = [&](double kappa) {
    return kappa * kappa * delta - moments.sigma2 - threshold_moments(prior, kappa, mu, kappa * lambda).err_sq;
  };
  const double lo = psi(kKappaLo);
  if (lo >= 0.0) return kKappaLo;  // noiseless corner: kappa -> 0
  if (!(psi(kKappaHi) > 0.0))
    throw Error(ErrorKind::FixedPointDiverged, "no kappa bracket in [1e-6, 1e6] at lambda = " +
                                                   std::to_string(lambda) + " (is lambda <= lambda_min?)");
  return bisect(psi, kKappaLo, kKappaHi);
}

CriticalPair critical_pair(const SignalPrior& prior, double delta, const LinkMoments& moments) {
  check_inputs(delta, 1.0, moments);
  CriticalPair cp;
  if (delta >= 1.0) return cp;
  const double mu = std::abs(moments.mu);

  // For fixed kappa the active fraction falls from 1 to 0 as lambda grows,
  // so the h-correlation equation pins lambda(kappa) uniquely.
  auto lambda_of = [&](double kappa) {
    auto excess = [&](double lam) { return delta - threshold_moments(prior, 1.0, mu / kappa, lam).active; };
    double hi = 1.0;
    while (excess(hi) < 0.0 && hi < 1e8) hi *= 2.0;
    return bisect(excess, 0.0, hi);
  };
  auto psi = [&](double kappa) {
    const double lam = lambda_of(kappa);
    return kappa * kappa * delta - moments.sigma2 - threshold_moments(prior, kappa, mu, kappa * lam).err_sq;
  };
  if (!(psi(kKappaLo) < 0.0) || !(psi(kKappaHi) > 0.0))
    throw Error(ErrorKind::FixedPointDiverged, "no bracket for the critical pair in kappa in [1e-6, 1e6]");
  cp.kappa_crit = bisect(psi, kKappaLo, kKappaHi);
  cp.lambda_crit = lambda_of(cp.kappa_crit);
  return cp;
}

SparsePrediction sparse_fixed_point(const SignalPrior& prior, double delta, double lambda,
                                    const LinkMoments& moments) {
  check_inputs(delta, lambda, moments);
  validate(prior);
  if (!is_scalar(prior)) throw Error(ErrorKind::IncompatiblePrior, "sparse fixed point needs a scalar prior");

  SparsePrediction out;
  const CriticalPair cp = critical_pair(prior, delta, moments);
  out.lambda_crit = cp.lambda_crit;
  out.kappa_crit = cp.kappa_crit;
  if (delta < 1.0 && lambda <= cp.lambda_crit) {
    out.regime = Regime::BelowCritical;
    out.kappa_star = cp.kappa_crit * cp.lambda_crit / lambda;
    out.error_sq = std::max(0.0, delta * cp.kappa_crit * cp.kappa_crit - moments.sigma2);
    return out;
  }
  out.regime = Regime::AboveCritical;
  out.kappa_star = solve_kappa(prior, delta, lambda, moments);
  out.error_sq = std::max(0.0, delta * out.kappa_star * out.kappa_star - moments.sigma2);
  return out;
}

double lambda_min(double delta) {
  if (!(delta > 0.0)) throw Error(ErrorKind::InvalidArgument, "delta must be > 0");
  if (delta >= 1.0) return 0.0;
  // Left side is 1 at x = 0 and decreases to 0.
  auto g = [delta](double x) {
    return delta - 2.0 * ((1.0 + x * x) * normal_tail(x) - x * normal_pdf(x));
  };
  double lo = 0.0, hi = 1.0;
  while (g(hi) < 0.0) hi *= 2.0;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double ls_error(double delta, double sigma2) {
  if (!(delta > 1.0)) throw Error(ErrorKind::InvalidDelta, "least squares needs delta > 1");
  if (!(sigma2 >= 0.0)) throw Error(ErrorKind::InvalidArgument, "sigma2 must be >= 0");
  return sigma2 / (delta - 1.0);
}

double cone_bound(double rho, double delta, double sigma2) {
  if (!(rho > 0.0 && rho <= 1.0)) throw Error(ErrorKind::InvalidRatio, "rho must lie in (0, 1]");
  if (!(delta - rho >= 1e-9)) throw Error(ErrorKind::InvalidRatio, "delta must exceed rho");
  if (!(sigma2 >= 0.0)) throw Error(ErrorKind::InvalidArgument, "sigma2 must be >= 0");
  return sigma2 * rho / (delta - rho);
}

}  // namespace nlasso
