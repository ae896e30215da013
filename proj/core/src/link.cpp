#include "nlasso/link.hpp"

#include <functional>
#include <cmath>
#include <sstream>
#include <vector>

#include "nlasso/error.hpp"
#include "overloaded.hpp"
#include "parse_util.hpp"

namespace nlasso {

namespace {

using detail::Overloaded;

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// E[g(gamma) | gamma] and E[g(gamma)^2 | gamma] with the link's own noise
// integrated out, plus the points where they fail to be smooth.
struct ConditionalLink {
  std::function<double(double)> mean;
  std::function<double(double)> second;
  std::vector<double> breakpoints;
};

ConditionalLink conditional(const LinkModel& link) {
  const double c = link.gain;
  return std::visit(
      Overloaded{
          [c](const LinearLink& l) {
            const double s2 = l.noise_std * l.noise_std;
            return ConditionalLink{[c](double x) { return c * x; },
                                   [c, s2](double x) { return c * c * (x * x + s2); }, {}};
          },
          [c](const SignLink&) {
            return ConditionalLink{[c](double x) { return c * sign(x); },
                                   [c](double x) { return x == 0.0 ? 0.0 : c * c; }, {0.0}};
          },
          [c](const NoisySignLink& l) {
            if (l.noise_std == 0.0)
              return ConditionalLink{[c](double x) { return c * sign(x); },
                                     [c](double x) { return x == 0.0 ? 0.0 : c * c; }, {0.0}};
            const double s = l.noise_std;
            // E_z sign(x + s z) = 1 - 2 Q(x / s)
            return ConditionalLink{[c, s](double x) { return c * (1.0 - 2.0 * normal_tail(x / s)); },
                                   [c](double) { return c * c; }, {0.0}};
          },
          [c](const QBitLink& q) {
            std::vector<double> bps{0.0};
            for (double t : q.design.thresholds)
              if (t > 0.0 && std::isfinite(t)) {
                bps.push_back(t);
                bps.push_back(-t);
              }
            const QuantizerDesign d = q.design;
            return ConditionalLink{[c, d](double x) { return c * quantize(x, d); },
                                   [c, d](double x) {
                                     const double v = c * quantize(x, d);
                                     return v * v;
                                   },
                                   bps};
          },
          [c](const ReluLink&) {
            return ConditionalLink{[c](double x) { return c * std::max(x, 0.0); },
                                   [c](double x) {
                                     const double v = c * std::max(x, 0.0);
                                     return v * v;
                                   },
                                   {0.0}};
          },
      },
      link.kind);
}

void check_mu(const LinkMoments& m) {
  if (!(std::abs(m.mu) >= 1e-12))
    throw Error(ErrorKind::DegenerateLink, "link has mu = E[gamma g(gamma)] ~ 0");
}

}  // namespace

void validate(const LinkModel& link) {
  if (!(link.gain > 0.0) || !std::isfinite(link.gain))
    throw Error(ErrorKind::ValidationError, "link gain must be positive and finite");
  std::visit(Overloaded{
                 [](const LinearLink& l) {
                   if (!(l.noise_std >= 0.0) || !std::isfinite(l.noise_std))
                     throw Error(ErrorKind::ValidationError, "noise_std must be >= 0");
                 },
                 [](const NoisySignLink& l) {
                   if (!(l.noise_std >= 0.0) || !std::isfinite(l.noise_std))
                     throw Error(ErrorKind::ValidationError, "noise_std must be >= 0");
                 },
                 [](const QBitLink& q) { validate(q.design); },
                 [](const auto&) {},
             },
             link.kind);
}

Eigen::VectorXd apply_link(const LinkModel& link, const Eigen::VectorXd& u, Rng& rng) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd y(u.size());
  const double c = link.gain;
  std::visit(Overloaded{
                 [&](const LinearLink& l) {
                   for (Eigen::Index i = 0; i < u.size(); ++i)
                     y[i] = c * (u[i] + (l.noise_std > 0.0 ? l.noise_std * normal(rng) : 0.0));
                 },
                 [&](const SignLink&) {
                   for (Eigen::Index i = 0; i < u.size(); ++i) y[i] = c * sign(u[i]);
                 },
                 [&](const NoisySignLink& l) {
                   for (Eigen::Index i = 0; i < u.size(); ++i)
                     y[i] = c * sign(u[i] + (l.noise_std > 0.0 ? l.noise_std * normal(rng) : 0.0));
                 },
                 [&](const QBitLink& q) {
                   for (Eigen::Index i = 0; i < u.size(); ++i) y[i] = c * quantize(u[i], q.design);
                 },
                 [&](const ReluLink&) {
                   for (Eigen::Index i = 0; i < u.size(); ++i) y[i] = c * std::max(u[i], 0.0);
                 },
             },
             link.kind);
  return y;
}

LinkMoments quadrature_moments(const LinkModel& link, const QuadratureConfig& cfg) {
  if (cfg.method == QuadratureMethod::GaussHermite && cfg.hermite_nodes < 64)
    throw Error(ErrorKind::InvalidArgument, "Gauss-Hermite moments need at least 64 nodes");
  const auto cl = conditional(link);
  LinkMoments m;
  m.mu = gaussian_expectation([&](double x) { return x * cl.mean(x); }, cl.breakpoints, cfg);
  m.tau2 = gaussian_expectation(cl.second, cl.breakpoints, cfg);
  const double mu = m.mu;
  // E[(g - mu x)^2 | x] = E[g^2|x] - 2 mu x E[g|x] + mu^2 x^2
  auto centered = [&](double x) { return cl.second(x) - 2.0 * mu * x * cl.mean(x) + mu * mu * x * x; };
  m.sigma2 = gaussian_expectation(centered, cl.breakpoints, cfg);
  m.zeta = gaussian_expectation([&](double x) { return centered(x) * x * x; }, cl.breakpoints, cfg);
  return m;
}

LinkMoments compute_moments(const LinkModel& link, const QuadratureConfig& cfg) {
  validate(link);
  LinkMoments m;
  const double c = link.gain;
  if (const auto* lin = std::get_if<LinearLink>(&link.kind)) {
    const double s2 = lin->noise_std * lin->noise_std;
    m.mu = c;
    m.sigma2 = c * c * s2;
    m.tau2 = c * c * (1.0 + s2);
    m.zeta = c * c * s2;
  } else if (const auto* q = std::get_if<QBitLink>(&link.kind)) {
    const auto qm = quantizer_moments(q->design);
    m.mu = c * qm.mu;
    m.tau2 = c * c * qm.tau2;
    m.sigma2 = m.tau2 - m.mu * m.mu;
    m.zeta = quadrature_moments(link, cfg).zeta;
  } else {
    m = quadrature_moments(link, cfg);
  }
  check_mu(m);
  return m;
}

LinkModel parse_link(std::string_view text) {
  const auto [head, arg] = detail::split_head(text);
  LinkModel link;
  if (head == "sign" && arg.empty()) {
    link.kind = SignLink{};
  } else if (head == "relu" && arg.empty()) {
    link.kind = ReluLink{};
  } else if (head == "linear") {
    link.kind = LinearLink{arg.empty() ? 0.0 : detail::parse_double(arg, "linear noise")};
  } else if (head == "noisy_sign") {
    link.kind = NoisySignLink{detail::parse_double(arg, "noisy_sign noise")};
  } else if (head == "qbit" && !arg.empty()) {
    link.kind = QBitLink{load_design(std::string(arg))};
  } else {
    throw Error(ErrorKind::ParseError, "unknown link '" + std::string(text) + "'");
  }
  validate(link);
  return link;
}

std::string describe(const LinkModel& link) {
  std::ostringstream out;
  std::visit(Overloaded{
                 [&](const LinearLink& l) { out << "linear:" << l.noise_std; },
                 [&](const SignLink&) { out << "sign"; },
                 [&](const NoisySignLink& l) { out << "noisy_sign:" << l.noise_std; },
                 [&](const QBitLink& q) { out << "qbit(" << q.design.bits << " bits)"; },
                 [&](const ReluLink&) { out << "relu"; },
             },
             link.kind);
  if (link.gain != 1.0) out << "*" << link.gain;
  return out.str();
}

}  // namespace nlasso
