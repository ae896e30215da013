#pragma once

#include <string>
#include <string_view>
#include <variant>

#include <Eigen/Core>

#include "nlasso/gaussian.hpp"
#include "nlasso/quantize.hpp"
#include "nlasso/random.hpp"

namespace nlasso {

/// g(x) = x + noise_std * z
struct LinearLink {
  double noise_std = 0.0;
};

/// g(x) = sign(x)
struct SignLink {};

/// g(x) = sign(x + noise_std * z)
struct NoisySignLink {
  double noise_std = 0.0;
};

/// g(x) = Q_q(x), a symmetric q-bit quantizer
struct QBitLink {
  QuantizerDesign design;
};

/// g(x) = max(x, 0), the censored (Tobit) model
struct ReluLink {};

using LinkKind = std::variant<LinearLink, SignLink, NoisySignLink, QBitLink, ReluLink>;

/// A random link function. `gain` multiplies the output, so gain*g is
/// representable for every kind.
struct LinkModel {
  LinkKind kind;
  double gain = 1.0;
};

/// Gaussian moments of a link, gamma ~ N(0,1):
/// mu = E[gamma g], tau2 = E[g^2], sigma2 = E[(g - mu gamma)^2],
/// zeta = E[(g - mu gamma)^2 gamma^2].
struct LinkMoments {
  double mu = 0.0;
  double sigma2 = 0.0;
  double tau2 = 0.0;
  double zeta = 0.0;
};

void validate(const LinkModel& link);

/// Applies an independent copy g_i to each entry of u.
Eigen::VectorXd apply_link(const LinkModel& link, const Eigen::VectorXd& u, Rng& rng);

/// Throws DegenerateLink if |mu| < 1e-12.
LinkMoments compute_moments(const LinkModel& link, const QuadratureConfig& cfg = {});

/// Moments by quadrature only, bypassing closed forms. Exposed so the two
/// paths can be checked against each other.
LinkMoments quadrature_moments(const LinkModel& link, const QuadratureConfig& cfg = {});

/// Parses "sign", "noisy_sign:0.3", "linear:0.0", "relu" or "qbit:<design-file>".
LinkModel parse_link(std::string_view text);

std::string describe(const LinkModel& link);

}  // namespace nlasso
