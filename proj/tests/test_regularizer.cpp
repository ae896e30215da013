#include <doctest.h>

#include <cmath>

#include <boost/math/tools/minima.hpp>

#include "nlasso/error.hpp"
#include "nlasso/gaussian.hpp"
#include "nlasso/regularizer.hpp"
#include "oracles.hpp"

using namespace nlasso;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

double prox_objective(const RegularizerSpec& reg, const Eigen::VectorXd& v, double t, const Eigen::VectorXd& x) {
  return 0.5 * (v - x).squaredNorm() + t * evaluate(reg, x);
}

}  // namespace

TEST_CASE("evaluate") {
  CHECK(evaluate(L1Norm{}, vec({1, -2, 0})) == 3.0);
  CHECK(evaluate(GroupL12Norm{2}, vec({3, 4, 0, 0})) == 5.0);
  CHECK(evaluate(L1Norm{}, Eigen::VectorXd::Zero(5)) == 0.0);
  CHECK_THROWS_AS(evaluate(GroupL12Norm{2}, vec({1, 2, 3})), Error);
}

TEST_CASE("prox examples") {
  CHECK(prox(L1Norm{}, vec({3, -0.5, 1}), 1.0) == vec({2, 0, 0}));
  const Eigen::VectorXd v = vec({0.3, -1.2, 4.0, 0.0});
  CHECK(prox(L1Norm{}, v, 0.0) == v);
  CHECK(prox(GroupL12Norm{2}, v, 0.0) == v);
  const Eigen::VectorXd g = prox(GroupL12Norm{2}, vec({3, 4}), 1.0);
  CHECK(g[0] == doctest::Approx(2.4).epsilon(1e-15));
  CHECK(g[1] == doctest::Approx(3.2).epsilon(1e-15));
  CHECK_THROWS_AS(prox(L1Norm{}, v, -1.0), Error);
}

TEST_CASE("group prox matches a one-dimensional numerical minimization") {
  // The minimizer is a nonnegative multiple of v; search that ray.
  const Eigen::VectorXd v = vec({3, 4});
  const RegularizerSpec reg = GroupL12Norm{2};
  const auto [c, fmin] = boost::math::tools::brent_find_minima(
      [&](double s) { return prox_objective(reg, v, 1.0, s * v); }, 0.0, 1.0, 50);
  (void)fmin;
  CHECK((c * v - prox(reg, v, 1.0)).norm() < 1e-8);
}

TEST_CASE("prox optimality against random perturbations") {
  Rng rng(10);
  std::uniform_real_distribution<double> unif(0.05, 2.0);
  for (const RegularizerSpec reg : {RegularizerSpec{L1Norm{}}, RegularizerSpec{GroupL12Norm{3}}}) {
    for (int rep = 0; rep < 20; ++rep) {
      const Eigen::VectorXd v = 2.0 * standard_normal_vector(12, rng);
      const double t = unif(rng);
      const Eigen::VectorXd p = prox(reg, v, t);
      const double best = prox_objective(reg, v, t, p);
      for (int k = 0; k < 100; ++k) {
        const double scale = k < 50 ? 1e-3 : 1.0;
        const Eigen::VectorXd x = p + scale * standard_normal_vector(12, rng);
        CHECK(best <= prox_objective(reg, v, t, x) + 1e-14);
      }
    }
  }
}

TEST_CASE("prox is nonexpansive") {
  Rng rng(11);
  for (const RegularizerSpec reg : {RegularizerSpec{L1Norm{}}, RegularizerSpec{GroupL12Norm{4}}}) {
    for (int rep = 0; rep < 200; ++rep) {
      const Eigen::VectorXd a = standard_normal_vector(16, rng);
      const Eigen::VectorXd b = standard_normal_vector(16, rng);
      CHECK((prox(reg, a, 0.7) - prox(reg, b, 0.7)).norm() <= (a - b).norm() + 1e-14);
    }
  }
}

TEST_CASE("dual norm") {
  CHECK(dual_norm(L1Norm{}, vec({1, -3, 2})) == 3.0);
  CHECK(dual_norm(GroupL12Norm{2}, vec({3, 4, 1, 1})) == 5.0);
}

TEST_CASE("threshold moments for a fixed signal value against quadrature") {
  for (double x : {0.0, 0.4, -1.3, 2.7}) {
    for (double s : {0.3, 1.0, 2.2}) {
      for (double t : {0.0, 0.5, 1.7}) {
        const double bp[] = {(t - x) / s, (-t - x) / s};
        auto eta = [&](double h) { return soft_threshold(x + s * h, t); };
        const double eta_sq = gaussian_expectation([&](double h) { return eta(h) * eta(h); }, bp);
        const double err_sq = gaussian_expectation([&](double h) { return (eta(h) - x) * (eta(h) - x); }, bp);
        const double active =
            gaussian_expectation([&](double h) { return std::abs(x + s * h) > t ? 1.0 : 0.0; }, bp);
        const auto m = threshold_moments_at(x, s, t);
        CHECK(m.eta_sq == doctest::Approx(eta_sq).epsilon(1e-11));
        CHECK(m.err_sq == doctest::Approx(err_sq).epsilon(1e-11));
        CHECK(m.active == doctest::Approx(active).epsilon(1e-11));
      }
    }
  }
  const auto det = threshold_moments_at(3.0, 0.0, 1.0);
  CHECK(det.eta_sq == 4.0);
  CHECK(det.err_sq == 1.0);
  CHECK(det.active == 1.0);
}

TEST_CASE("F function examples") {
  CHECK(f_function(L1Norm{}, SparseGauss{0.15}, 0.0, 0.0, 0.0) == 0.0);
  CHECK(f_function(GroupL12Norm{3}, GroupSparseGauss{0.05, 3}, 0.0, 0.0, 1.0) == 0.0);

  // rho -> 1 with c2 large: threshold is negligible, F ~ c2^2 / 2.
  const double c2 = 1e4;
  CHECK(f_function(L1Norm{}, SparseGauss{0.999999}, 0.0, c2, 0.0) / (0.5 * c2 * c2) == doctest::Approx(1.0).epsilon(1e-3));

  // Independent scipy quad of the Gaussian mixture, frozen.
  CHECK(f_function(L1Norm{}, SparseGauss{0.15}, 1.0, 1.0, 0.0) == doctest::Approx(0.37549496734194004).epsilon(1e-10));
  CHECK(f_function(L1Norm{}, SparseGauss{0.15}, 0.7, 2.3, 0.0) == doctest::Approx(2.0491619824746956).epsilon(1e-10));
  CHECK(f_function(L1Norm{}, SparseSymmetric{0.1}, 0.8, 1.5, 0.0) == doctest::Approx(0.757090071949844).epsilon(1e-10));
  // scipy quad over the chi radial law.
  CHECK(f_function(GroupL12Norm{3}, GroupSparseGauss{0.05, 3}, 1.0, 1.0, 0.0) ==
        doctest::Approx(0.5357914248702037).epsilon(1e-10));
  CHECK(f_function(GroupL12Norm{3}, GroupSparseGauss{0.05, 3}, 0.6, 1.7, 0.0) ==
        doctest::Approx(1.272080643945317).epsilon(1e-10));
}

TEST_CASE("F matches 1e7-sample Monte Carlo" * doctest::timeout(60)) {
  Rng rng(12);
  std::normal_distribution<double> normal;
  std::bernoulli_distribution active(0.15);
  const double scale = 1.0 / std::sqrt(0.15);
  const auto mc = oracle::monte_carlo(10'000'000, [&] {
    const double x = active(rng) ? scale * normal(rng) : 0.0;
    const double e = soft_threshold(normal(rng) + x, 1.0);
    return 0.5 * e * e;
  });
  const double f = f_function(L1Norm{}, SparseGauss{0.15}, 1.0, 1.0, 0.0);
  CHECK(std::abs(f - mc.mean) < 3.0 * mc.se);
}

TEST_CASE("group F matches 1e6-sample Monte Carlo" * doctest::timeout(60)) {
  Rng rng(13);
  std::normal_distribution<double> normal;
  const int b = 3;
  const double rho = 0.05;
  std::bernoulli_distribution active(rho);
  const double c1 = 0.8, c2 = 1.4;
  const auto mc = oracle::monte_carlo(1'000'000, [&] {
    Eigen::Vector3d v;
    const bool on = active(rng);
    for (int j = 0; j < b; ++j) v[j] = c1 * normal(rng) + (on ? c2 * normal(rng) / std::sqrt(rho) : 0.0);
    const double nv = v.norm();
    const double shrink = nv > 1.0 ? nv - 1.0 : 0.0;
    return shrink * shrink / (2.0 * b);
  });
  const double f = f_function(GroupL12Norm{b}, GroupSparseGauss{rho, b}, c1, c2, 0.0);
  CHECK(std::abs(f - mc.mean) < 3.0 * mc.se);
}

TEST_CASE("group F with block size 1 reduces to the scalar formula") {
  for (double c1 : {0.2, 1.0, 3.0})
    for (double c2 : {0.0, 0.5, 2.0})
      CHECK(f_function(GroupL12Norm{1}, GroupSparseGauss{0.2, 1}, c1, c2, 0.0) ==
            doctest::Approx(f_function(L1Norm{}, SparseGauss{0.2}, c1, c2, 0.0)).epsilon(1e-12));
}

TEST_CASE("F is nondecreasing in c1 and c2 and ignores c3") {
  const std::vector<std::pair<RegularizerSpec, SignalPrior>> cases{
      {L1Norm{}, SparseGauss{0.15}}, {L1Norm{}, SparseSymmetric{0.1}}, {GroupL12Norm{3}, GroupSparseGauss{0.05, 3}}};
  for (const auto& [reg, prior] : cases) {
    for (double c2 = 0.0; c2 <= 3.0; c2 += 0.25) {
      double prev = -1.0;
      for (double c1 = 0.0; c1 <= 3.0; c1 += 0.1) {
        const double f = f_function(reg, prior, c1, c2, 0.0);
        CHECK(f >= prev);
        prev = f;
        CHECK(f == f_function(reg, prior, c1, c2, 7.5));
      }
    }
    for (double c1 = 0.0; c1 <= 3.0; c1 += 0.25) {
      double prev = -1.0;
      for (double c2 = 0.0; c2 <= 3.0; c2 += 0.1) {
        const double f = f_function(reg, prior, c1, c2, 0.0);
        CHECK(f >= prev);
        prev = f;
      }
    }
  }
}

TEST_CASE("incompatible prior and regularizer") {
  auto kind_of = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::IoError;
  };
  CHECK(kind_of([] { f_function(L1Norm{}, GroupSparseGauss{0.05, 3}, 1, 1, 1); }) == ErrorKind::IncompatiblePrior);
  CHECK(kind_of([] { f_function(GroupL12Norm{3}, SparseGauss{0.1}, 1, 1, 1); }) == ErrorKind::IncompatiblePrior);
  CHECK(kind_of([] { f_function(GroupL12Norm{2}, GroupSparseGauss{0.1, 3}, 1, 1, 1); }) ==
        ErrorKind::IncompatiblePrior);
}

TEST_CASE("regularizer parsing") {
  CHECK(std::holds_alternative<L1Norm>(parse_regularizer("l1")));
  CHECK(std::get<GroupL12Norm>(parse_regularizer("group_l12:3")).block_size == 3);
  CHECK_THROWS_AS(parse_regularizer("group_l12:0"), Error);
  CHECK_THROWS_AS(parse_regularizer("l2"), Error);
  CHECK(describe(parse_regularizer("group_l12:3")) == "group_l12:3");
}
