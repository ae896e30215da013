#pragma once

#include <string>
#include <string_view>
#include <variant>

#include <Eigen/Core>

#include "nlasso/signal.hpp"

namespace nlasso {

struct L1Norm {};

/// Sum of Euclidean norms over consecutive, non-overlapping blocks.
struct GroupL12Norm {
  int block_size = 1;
};

using RegularizerSpec = std::variant<L1Norm, GroupL12Norm>;

void validate(const RegularizerSpec& reg);

int block_size(const RegularizerSpec& reg);

/// f(x). Throws DimensionMismatch when the block size does not divide dim(x).
double evaluate(const RegularizerSpec& reg, const Eigen::VectorXd& x);

/// argmin_x 0.5 ||v - x||^2 + t f(x)
Eigen::VectorXd prox(const RegularizerSpec& reg, const Eigen::VectorXd& v, double t);

/// Dual norm of f: max |v_i| for L1, max block norm for the group norm.
double dual_norm(const RegularizerSpec& reg, const Eigen::VectorXd& v);

/// Scalar soft threshold eta(x; t) = sign(x) (|x| - t)_+
inline double soft_threshold(double x, double t) {
  return x > t ? x - t : (x < -t ? x + t : 0.0);
}

/// Limit F(c1, c2, c3) of the normalized Moreau envelope of the conjugate:
/// L1:    1/2 E[eta^2(c1 h + c2 X; 1)]
/// group: 1/(2b) E[||eta_vec(c1 h + c2 X; 1)||^2]
/// Both norms have an indicator conjugate, so c3 has no effect.
/// Throws IncompatiblePrior unless the prior's block structure matches.
double f_function(const RegularizerSpec& reg, const SignalPrior& prior, double c1, double c2, double c3);

/// Expectations of the soft threshold applied to s*h + a*X, h ~ N(0,1)
/// independent of X drawn from a scalar prior, with threshold t:
///   eta_sq = E[eta^2(s h + a X; t)]
///   err_sq = E[(eta(s h + a X; t) - a X)^2]
///   active = P(|s h + a X| > t)
struct ThresholdMoments {
  double eta_sq = 0.0;
  double err_sq = 0.0;
  double active = 0.0;
};

/// Closed form in Phi and phi. Requires a block-size-1 prior.
ThresholdMoments threshold_moments(const SignalPrior& prior, double s, double a, double t);

/// Same quantities for a fixed signal value x (the point-mass component).
ThresholdMoments threshold_moments_at(double x, double s, double t);

RegularizerSpec parse_regularizer(std::string_view text);

std::string describe(const RegularizerSpec& reg);

}  // namespace nlasso
