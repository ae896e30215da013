#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nlasso/error.hpp"
#include "nlasso/link.hpp"
#include "oracles.hpp"

using namespace nlasso;

namespace {

const double kSqrt2OverPi = std::sqrt(2.0 / std::numbers::pi);

std::vector<LinkModel> builtin_links() {
  return {parse_link("linear:0.5"), parse_link("sign"), parse_link("noisy_sign:0.3"), parse_link("relu"),
          LinkModel{QBitLink{lloyd_max(2).design}}};
}

}  // namespace

TEST_CASE("apply_link examples") {
  Rng rng(7);
  Eigen::VectorXd u(3);
  u << 1, -2, 0;
  CHECK(apply_link(parse_link("linear:0.0"), u, rng).isApprox(u));

  Eigen::VectorXd v(3);
  v << 3.2, -0.1, 0.5;
  Eigen::VectorXd want(3);
  want << 1, -1, 1;
  CHECK(apply_link(parse_link("sign"), v, rng) == want);

  Eigen::VectorXd w(2);
  w << 2, -2;
  const Eigen::VectorXd q = apply_link(LinkModel{QBitLink{one_bit_design(0.5)}}, w, rng);
  CHECK(q[0] == 0.5);
  CHECK(q[1] == -0.5);

  Eigen::VectorXd r(3);
  r << -1.5, 0.0, 2.5;
  const Eigen::VectorXd relu = apply_link(parse_link("relu"), r, rng);
  CHECK(relu[0] == 0.0);
  CHECK(relu[2] == 2.5);
}

TEST_CASE("noisy links draw fresh noise per component") {
  Rng rng(11);
  const Eigen::VectorXd u = Eigen::VectorXd::Constant(2000, 0.1);
  const Eigen::VectorXd y = apply_link(parse_link("noisy_sign:1.0"), u, rng);
  const double plus = (y.array() > 0).cast<double>().mean();
  // P(0.1 + z > 0) = Phi(0.1)
  CHECK(plus == doctest::Approx(normal_cdf(0.1)).epsilon(0.05));
}

TEST_CASE("closed-form moments of standard links") {
  SUBCASE("linear") {
    const auto m0 = compute_moments(parse_link("linear:0.0"));
    CHECK(m0.mu == 1.0);
    CHECK(m0.sigma2 == 0.0);
    const auto m = compute_moments(parse_link("linear:0.5"));
    CHECK(m.mu == 1.0);
    CHECK(m.sigma2 == 0.25);
    CHECK(m.tau2 == 1.25);
  }
  SUBCASE("sign") {
    const auto m = compute_moments(parse_link("sign"));
    CHECK(m.mu == doctest::Approx(kSqrt2OverPi).epsilon(1e-13));
    CHECK(m.sigma2 == doctest::Approx(1.0 - 2.0 / std::numbers::pi).epsilon(1e-12));
    CHECK(m.tau2 == doctest::Approx(1.0).epsilon(1e-13));
    // E[(sign g - mu g)^2 g^2] = 1 - 4 mu sqrt(2/pi) + 3 mu^2 = 1 - 2/pi
    CHECK(m.zeta == doctest::Approx(1.0 - 2.0 / std::numbers::pi).epsilon(1e-12));
  }
  SUBCASE("noisy sign") {
    const auto m = compute_moments(parse_link("noisy_sign:0.3"));
    CHECK(m.mu == doctest::Approx(kSqrt2OverPi / std::sqrt(1.09)).epsilon(1e-12));
    CHECK(m.sigma2 == doctest::Approx(1.0 - m.mu * m.mu).epsilon(1e-12));
    CHECK(m.mu == doctest::Approx(0.76423).epsilon(1e-5));
  }
  SUBCASE("relu") {
    const auto m = compute_moments(parse_link("relu"));
    CHECK(m.mu == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(m.tau2 == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(m.sigma2 == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(m.zeta == doctest::Approx(0.75).epsilon(1e-12));
  }
}

TEST_CASE("noisy sign moments match a two-dimensional quadrature oracle") {
  // scipy dblquad over (gamma, z) of the raw sign(gamma + 0.3 z), no inner closed form.
  const auto m = compute_moments(parse_link("noisy_sign:0.3"));
  CHECK(m.sigma2 == doctest::Approx(0.4159451629655).epsilon(1e-9));
  CHECK(m.zeta == doctest::Approx(0.3194957403360).epsilon(1e-9));
}

TEST_CASE("sigma2 equals tau2 - mu^2 for every link") {
  for (const auto& link : builtin_links()) {
    const auto m = compute_moments(link);
    INFO(describe(link));
    CHECK(std::abs(m.sigma2 - (m.tau2 - m.mu * m.mu)) < 1e-9);
  }
}

TEST_CASE("gain scales the moments") {
  for (const auto& base : builtin_links()) {
    const auto m = compute_moments(base);
    for (double c : {0.5, 2.0}) {
      LinkModel scaled = base;
      scaled.gain = c;
      const auto s = compute_moments(scaled);
      INFO(describe(scaled));
      CHECK(s.mu == doctest::Approx(c * m.mu).epsilon(1e-12));
      CHECK(s.tau2 == doctest::Approx(c * c * m.tau2).epsilon(1e-12));
      CHECK(s.sigma2 == doctest::Approx(c * c * m.sigma2).epsilon(1e-11));
    }
  }
  // Scaling the quantizer levels is the same as a gain.
  const auto d = lloyd_max(2).design;
  const auto a = compute_moments(LinkModel{QBitLink{scale_levels(d, 2.0)}});
  const auto b = compute_moments(LinkModel{QBitLink{d}, 2.0});
  CHECK(a.mu == doctest::Approx(b.mu).epsilon(1e-14));
  CHECK(a.sigma2 == doctest::Approx(b.sigma2).epsilon(1e-14));
}

TEST_CASE("qbit closed form agrees with generic quadrature") {
  for (int q : {1, 2, 3}) {
    const LinkModel link{QBitLink{lloyd_max(q).design}};
    const auto closed = compute_moments(link);
    const auto quad = quadrature_moments(link);
    CHECK(std::abs(closed.mu - quad.mu) < 1e-10);
    CHECK(std::abs(closed.tau2 - quad.tau2) < 1e-10);
    CHECK(std::abs(closed.sigma2 - quad.sigma2) < 1e-10);
  }
}

TEST_CASE("Gauss-Hermite rule reproduces smooth moments") {
  QuadratureConfig gh;
  gh.method = QuadratureMethod::GaussHermite;
  const auto lin = quadrature_moments(parse_link("linear:0.5"), gh);
  CHECK(lin.mu == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(lin.tau2 == doctest::Approx(1.25).epsilon(1e-12));
  // The noisy sign conditional mean is smooth, so 201 nodes are plenty.
  const auto ns = quadrature_moments(parse_link("noisy_sign:0.3"), gh);
  CHECK(ns.mu == doctest::Approx(kSqrt2OverPi / std::sqrt(1.09)).epsilon(1e-6));
  // Discontinuous integrand: Gauss-Hermite is only roughly right.
  const auto sg = quadrature_moments(parse_link("sign"), gh);
  CHECK(sg.mu == doctest::Approx(kSqrt2OverPi).epsilon(1e-2));

  gh.hermite_nodes = 32;
  CHECK_THROWS_AS(quadrature_moments(parse_link("sign"), gh), Error);
}

TEST_CASE("moments agree with 1e7-sample Monte Carlo within 3 standard errors" * doctest::timeout(120)) {
  for (const auto& link : builtin_links()) {
    const auto m = compute_moments(link);
    Rng rng(derive_seed(2024, {static_cast<std::uint64_t>(link.kind.index())}));
    std::normal_distribution<double> normal;
    const std::size_t samples = 10'000'000;
    Eigen::VectorXd one(1);
    // Chunk the draws through apply_link so link noise is the library's own.
    std::vector<double> g(samples), x(samples);
    const std::size_t chunk = 100'000;
    for (std::size_t s = 0; s < samples; s += chunk) {
      const Eigen::VectorXd u = standard_normal_vector(chunk, rng);
      const Eigen::VectorXd y = apply_link(link, u, rng);
      for (std::size_t k = 0; k < chunk; ++k) {
        x[s + k] = u[static_cast<Eigen::Index>(k)];
        g[s + k] = y[static_cast<Eigen::Index>(k)];
      }
    }
    std::size_t i = 0;
    const auto mu = oracle::monte_carlo(samples, [&] { const double v = x[i] * g[i]; ++i; return v; });
    i = 0;
    const auto s2 = oracle::monte_carlo(samples, [&] {
      const double e = g[i] - m.mu * x[i];
      ++i;
      return e * e;
    });
    INFO(describe(link));
    CHECK(std::abs(mu.mean - m.mu) < 3.0 * mu.se);
    CHECK(std::abs(s2.mean - m.sigma2) < 3.0 * s2.se);
  }
}

TEST_CASE("degenerate and invalid links") {
  LinkModel zero_gain{SignLink{}, 0.0};
  CHECK_THROWS_AS(validate(zero_gain), Error);
  CHECK_THROWS_AS(parse_link("linear:-1"), Error);
  CHECK_THROWS_AS(parse_link("noisy_sign:-0.2"), Error);
  CHECK_THROWS_AS(parse_link("tanh"), Error);
  CHECK_THROWS_AS(parse_link("noisy_sign:abc"), Error);
  try {
    parse_link("cube");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ParseError);
  }
}
