#include <doctest.h>

#include <cmath>

#include "nlasso/error.hpp"
#include "nlasso/solver.hpp"
#include "oracles.hpp"

using namespace nlasso;

TEST_CASE("measurement count rounds") {
  CHECK(measurement_count(768, 0.75) == 576);
  CHECK(measurement_count(768, 1.2) == 922);
  CHECK(measurement_count(256, 0.75) == 192);
  CHECK_THROWS_AS(measurement_count(10, 0.01), Error);
}

TEST_CASE("generate_problem wires the link through A x0") {
  Rng rng(1);
  const auto p = generate_problem(SparseGauss{0.2}, parse_link("sign"), L1Norm{}, 50, 1.5, 1.0, rng);
  CHECK(p.A.rows() == 75);
  CHECK(p.A.cols() == 50);
  CHECK((p.u - p.A * p.signal.x0).norm() < 1e-12);
  for (Eigen::Index i = 0; i < p.y.size(); ++i) CHECK(p.y[i] == (p.u[i] > 0 ? 1.0 : -1.0));
  CHECK_THROWS_AS(generate_problem(SparseGauss{0.2}, parse_link("sign"), L1Norm{}, 50, 1.5, -1.0, rng), Error);
}

TEST_CASE("noiseless overdetermined recovery as lambda -> 0") {
  Rng rng(2);
  const Eigen::MatrixXd A = standard_normal_matrix(60, 20, rng);
  const Eigen::VectorXd x = standard_normal_vector(20, rng);
  const Eigen::VectorXd y = A * x;
  SolverConfig cfg;
  cfg.tol = 1e-12;
  cfg.gap_tol = 1e-12;
  cfg.max_iters = 200000;
  const auto r = solve_lasso(A, y, L1Norm{}, 1e-7, cfg);
  CHECK((r.x_hat - x).norm() < 1e-4);
}

TEST_CASE("lambda above lambda_max gives zero") {
  Rng rng(3);
  const Eigen::MatrixXd A = standard_normal_matrix(40, 25, rng);
  const Eigen::VectorXd y = standard_normal_vector(40, rng);
  const double lmax = (A.transpose() * y.normalized()).lpNorm<Eigen::Infinity>();
  const auto r = solve_lasso(A, y, L1Norm{}, 1.01 * lmax);
  CHECK(r.x_hat.norm() < 1e-6);
  // Just below, the solution is nonzero.
  SolverConfig cfg;
  cfg.max_iters = 200000;
  const auto below = solve_lasso(A, y, L1Norm{}, 0.9 * lmax, cfg);
  CHECK(below.x_hat.norm() > 1e-6);
}

TEST_CASE("agrees with an interior-point oracle on small instances" * doctest::timeout(60)) {
  Rng rng(4);
  std::uniform_int_distribution<int> nd(5, 20);
  for (int rep = 0; rep < 12; ++rep) {
    const int block = rep % 3 == 2 ? 2 : 1;
    const int n = 2 * nd(rng);
    const int m = rep % 2 == 0 ? n + 10 : n / 2 + 3;
    const Eigen::MatrixXd A = standard_normal_matrix(m, n, rng);
    const Eigen::VectorXd y = standard_normal_vector(m, rng);
    const double lambda = 0.3 + 0.2 * (rep % 5);
    const RegularizerSpec reg = block == 1 ? RegularizerSpec{L1Norm{}} : RegularizerSpec{GroupL12Norm{block}};
    const auto ours = solve_lasso(A, y, reg, lambda);
    const auto ref = oracle::socp_lasso(A, y, lambda, block);
    const double ref_obj = ref.objective / std::sqrt(static_cast<double>(n));
    INFO("rep " << rep);
    CHECK(ours.converged);
    CHECK(std::abs(ours.objective - ref_obj) < 1e-6);
  }
}

TEST_CASE("windowed objective is nonincreasing") {
  Rng rng(5);
  const auto p = generate_problem(SparseGauss{0.15}, parse_link("noisy_sign:0.3"), L1Norm{}, 128, 0.75, 0.8, rng);
  SolverConfig cfg;
  cfg.record_trace = true;
  const auto r = solve_lasso(p, cfg);
  const auto& tr = r.objective_trace;
  REQUIRE(tr.size() >= 40);
  // Primal-dual iterates oscillate early on; check once past the first windows.
  double prev = std::numeric_limits<double>::infinity();
  int violations = 0;
  for (std::size_t w = 20; w + 10 <= tr.size(); w += 10) {
    double mean = 0.0;
    for (std::size_t k = w; k < w + 10; ++k) mean += tr[k];
    mean /= 10.0;
    if (mean > prev + 1e-9) ++violations;
    prev = mean;
  }
  CHECK(violations == 0);
}

TEST_CASE("saddle optimality at convergence") {
  Rng rng(6);
  const auto p = generate_problem(SparseGauss{0.15}, parse_link("sign"), L1Norm{}, 100, 1.2, 1.0, rng);
  SolverConfig cfg;
  cfg.tol = 1e-12;
  cfg.gap_tol = 1e-10;
  cfg.max_iters = 200000;
  const auto r = solve_lasso(p, cfg);
  const Eigen::VectorXd res = p.y - p.A * r.x_hat;
  REQUIRE(res.norm() > 0.0);
  const Eigen::VectorXd g = p.A.transpose() * res.normalized();
  const double tol = 1e-4;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    CHECK(std::abs(g[i]) <= p.lambda + tol);
    if (std::abs(r.x_hat[i]) > 1e-6) CHECK(std::abs(std::abs(g[i]) - p.lambda) < tol);
  }
}

TEST_CASE("objective is never worse than zero") {
  Rng rng(7);
  for (int rep = 0; rep < 5; ++rep) {
    const auto p = generate_problem(SparseGauss{0.1}, parse_link("relu"), L1Norm{}, 60, 0.5, 0.4, rng);
    SolverConfig cfg;
    cfg.max_iters = 5;  // deliberately starved
    const auto r = solve_lasso(p, cfg);
    CHECK(r.objective <= p.y.norm() / std::sqrt(60.0) + 1e-15);
    CHECK(r.objective == doctest::Approx(lasso_objective(p.A, p.y, p.reg, p.lambda, r.x_hat)).epsilon(1e-12));
  }
}

TEST_CASE("least squares") {
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(4, 4);
  Eigen::VectorXd y(4);
  y << 1, -2, 3, 0.5;
  CHECK(solve_least_squares(I, y).isApprox(y));

  Rng rng(8);
  const Eigen::MatrixXd A = standard_normal_matrix(40, 20, rng);
  const Eigen::VectorXd x = standard_normal_vector(20, rng);
  CHECK((solve_least_squares(A, A * x) - x).norm() < 1e-10);

  const Eigen::MatrixXd B = standard_normal_matrix(90, 30, rng);
  const Eigen::VectorXd z = standard_normal_vector(90, rng);
  const Eigen::VectorXd xh = solve_least_squares(B, z);
  CHECK((B.transpose() * (z - B * xh)).norm() < 1e-8);

  Eigen::MatrixXd S = standard_normal_matrix(10, 3, rng);
  S.col(2) = S.col(0);
  CHECK_THROWS_AS(solve_least_squares(S, standard_normal_vector(10, rng)), Error);
}

TEST_CASE("error metric") {
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(3);
  x0[1] = 1.0;
  const double mu = 0.8;
  CHECK(error_metric(mu * x0, mu, x0) == 0.0);
  CHECK(error_metric(Eigen::VectorXd::Zero(3), mu, x0) == doctest::Approx(mu * mu));
  Eigen::VectorXd xh(3);
  xh << 0.1, 0.5, -0.2;
  CHECK(error_metric(xh / mu, 1.0, x0) == doctest::Approx(error_metric(xh, mu, x0) / (mu * mu)).epsilon(1e-14));
}

TEST_CASE("interpolating regime converges within the default budget") {
  // delta < 1 and lambda below lambda_crit: the solution fits y exactly.
  Rng rng(9);
  const auto p = generate_problem(SparseGauss{0.15}, parse_link("noisy_sign:0.3"), L1Norm{}, 200, 0.75, 0.2, rng);
  const auto r = solve_lasso(p);
  CHECK(r.converged);
  CHECK((p.y - p.A * r.x_hat).norm() < 1e-5 * p.y.norm());

  SolverConfig plain;
  plain.restart = false;
  plain.max_iters = 400000;
  const auto ref = solve_lasso(p, plain);
  CHECK(std::abs(r.objective - ref.objective) < 1e-6);
}
