#include "nlasso/regularizer.hpp"

#include <cmath>

#include <boost/math/special_functions/gamma.hpp>

#include "nlasso/error.hpp"
#include "nlasso/gaussian.hpp"
#include "parse_util.hpp"

namespace nlasso {

namespace {

void check_blocks(Eigen::Index n, int b) {
  if (n % b != 0)
    throw Error(ErrorKind::DimensionMismatch,
                "block size " + std::to_string(b) + " does not divide dimension " + std::to_string(n));
}

// E[eta^2(Y; t)] for Y ~ N(0, S^2).
double centered_eta_sq(double sd, double t) {
  if (sd == 0.0) return 0.0;
  const double u = t / sd;
  return 2.0 * ((sd * sd + t * t) * normal_tail(u) - sd * t * normal_pdf(u));
}

// E[(S R - 1)_+^2] with R ~ chi_b, i.e. E||eta_vec(Y; 1)||^2 for Y ~ N(0, S^2 I_b).
double chi_eta_sq(double sd, int b) {
  if (sd == 0.0) return 0.0;
  using boost::math::gamma_q;
  const double half_a2 = 0.5 / (sd * sd);
  const double hb = 0.5 * b;
  const double second = b * gamma_q(hb + 1.0, half_a2);
  const double first =
      std::numbers::sqrt2 * std::exp(std::lgamma(hb + 0.5) - std::lgamma(hb)) * gamma_q(hb + 0.5, half_a2);
  const double zeroth = gamma_q(hb, half_a2);
  return std::max(0.0, sd * sd * second - 2.0 * sd * first + zeroth);
}

}  // namespace

void validate(const RegularizerSpec& reg) {
  if (const auto* g = std::get_if<GroupL12Norm>(&reg); g && g->block_size < 1)
    throw Error(ErrorKind::ValidationError, "block size must be >= 1");
}

int block_size(const RegularizerSpec& reg) {
  if (const auto* g = std::get_if<GroupL12Norm>(&reg)) return g->block_size;
  return 1;
}

double evaluate(const RegularizerSpec& reg, const Eigen::VectorXd& x) {
  const int b = block_size(reg);
  if (b == 1) return x.lpNorm<1>();
  check_blocks(x.size(), b);
  double acc = 0.0;
  for (Eigen::Index k = 0; k < x.size(); k += b) acc += x.segment(k, b).norm();
  return acc;
}

Eigen::VectorXd prox(const RegularizerSpec& reg, const Eigen::VectorXd& v, double t) {
  if (!(t >= 0.0)) throw Error(ErrorKind::InvalidArgument, "prox step must be nonnegative");
  const int b = block_size(reg);
  if (b == 1) return v.unaryExpr([t](double x) { return soft_threshold(x, t); });
  check_blocks(v.size(), b);
  Eigen::VectorXd out(v.size());
  for (Eigen::Index k = 0; k < v.size(); k += b) {
    const double norm = v.segment(k, b).norm();
    const double shrink = norm > t ? 1.0 - t / norm : 0.0;
    out.segment(k, b) = shrink * v.segment(k, b);
  }
  return out;
}

double dual_norm(const RegularizerSpec& reg, const Eigen::VectorXd& v) {
  const int b = block_size(reg);
  if (b == 1) return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>();
  check_blocks(v.size(), b);
  double worst = 0.0;
  for (Eigen::Index k = 0; k < v.size(); k += b) worst = std::max(worst, v.segment(k, b).norm());
  return worst;
}

ThresholdMoments threshold_moments_at(double x, double s, double t) {
  ThresholdMoments m;
  if (s == 0.0) {
    const double e = soft_threshold(x, t);
    m.eta_sq = e * e;
    m.err_sq = (e - x) * (e - x);
    m.active = std::abs(x) > t ? 1.0 : 0.0;
    return m;
  }
  const double c_hi = (t - x) / s;  // Y > t  <=>  h > c_hi
  const double c_lo = (t + x) / s;  // Y < -t <=> -h > c_lo
  m.active = normal_tail(c_hi) + normal_tail(c_lo);

  auto upper_eta = [s](double d) { return (d * d + s * s) * normal_cdf(d / s) + d * s * normal_pdf(d / s); };
  m.eta_sq = upper_eta(x - t) + upper_eta(-x - t);

  // E[(s h - t)^2 1{h > c}]
  auto tail_err = [s, t](double c) {
    return s * s * (c * normal_pdf(c) + normal_tail(c)) - 2.0 * s * t * normal_pdf(c) + t * t * normal_tail(c);
  };
  const double inside = normal_cdf(c_hi) - normal_tail(c_lo);
  m.err_sq = tail_err(c_hi) + tail_err(c_lo) + x * x * std::max(inside, 0.0);
  return m;
}

ThresholdMoments threshold_moments(const SignalPrior& prior, double s, double a, double t) {
  if (block_size(prior) != 1)
    throw Error(ErrorKind::IncompatiblePrior, "scalar threshold moments need a block-size-1 prior");
  if (!(s >= 0.0) || !(t >= 0.0)) throw Error(ErrorKind::InvalidArgument, "scale and threshold must be >= 0");
  const double rho = sparsity(prior);
  const ThresholdMoments zero = threshold_moments_at(0.0, s, t);
  ThresholdMoments act;
  if (std::holds_alternative<SparseSymmetric>(prior)) {
    act = threshold_moments_at(a / std::sqrt(rho), s, t);
  } else {
    // a X ~ N(0, v): Y is centered Gaussian, and E[eta(Y) a X] = v P(|Y| > t) by Stein.
    const double v = a * a / rho;
    const double sd = std::sqrt(s * s + v);
    act.eta_sq = centered_eta_sq(sd, t);
    act.active = sd == 0.0 ? 0.0 : 2.0 * normal_tail(t / sd);
    act.err_sq = std::max(0.0, act.eta_sq - 2.0 * v * act.active + v);
  }
  return {(1.0 - rho) * zero.eta_sq + rho * act.eta_sq, (1.0 - rho) * zero.err_sq + rho * act.err_sq,
          (1.0 - rho) * zero.active + rho * act.active};
}

double f_function(const RegularizerSpec& reg, const SignalPrior& prior, double c1, double c2, double /*c3*/) {
  validate(reg);
  validate(prior);
  if (!(c1 >= 0.0) || !(c2 >= 0.0)) throw Error(ErrorKind::InvalidArgument, "F needs c1, c2 >= 0");
  const int b = block_size(reg);
  if (block_size(prior) != b)
    throw Error(ErrorKind::IncompatiblePrior, "prior block size does not match the regularizer");
  if (b == 1) return 0.5 * threshold_moments(prior, c1, c2, 1.0).eta_sq;

  const double rho = sparsity(prior);
  const double active_sd = std::sqrt(c1 * c1 + c2 * c2 / rho);
  const double total = (1.0 - rho) * chi_eta_sq(c1, b) + rho * chi_eta_sq(active_sd, b);
  return total / (2.0 * b);
}

RegularizerSpec parse_regularizer(std::string_view text) {
  const auto [head, arg] = detail::split_head(text);
  RegularizerSpec reg;
  if (head == "l1" && arg.empty()) {
    reg = L1Norm{};
  } else if (head == "group_l12") {
    reg = GroupL12Norm{static_cast<int>(detail::parse_int(arg, "group_l12 block size"))};
  } else {
    throw Error(ErrorKind::ParseError, "unknown regularizer '" + std::string(text) + "'");
  }
  validate(reg);
  return reg;
}

std::string describe(const RegularizerSpec& reg) {
  if (const auto* g = std::get_if<GroupL12Norm>(&reg)) return "group_l12:" + std::to_string(g->block_size);
  return "l1";
}

}  // namespace nlasso
