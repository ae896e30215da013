#pragma once

#include <vector>

#include <Eigen/Core>

#include "nlasso/link.hpp"
#include "nlasso/random.hpp"
#include "nlasso/regularizer.hpp"
#include "nlasso/signal.hpp"

namespace nlasso {

struct ProblemInstance {
  Eigen::MatrixXd A;  // m x n, i.i.d. N(0,1)
  Eigen::VectorXd y;
  Eigen::VectorXd u;  // A x0, kept for the linear surrogate
  double lambda = 1.0;
  RegularizerSpec reg = L1Norm{};
  SignalInstance signal;
  double delta = 1.0;
};

struct SolverConfig {
  double tol = 1e-8;  // relative change of the windowed objective
  int max_iters = 50000;
  int window = 10;
  /// Relative duality gap that must also hold before stopping. Set to
  /// infinity to stop on the windowed change alone.
  double gap_tol = 1e-7;
  /// Restart from the running average (or the current iterate, whichever has
  /// the smaller duality gap) each time that gap has shrunk fivefold.
  bool restart = true;
  bool record_trace = false;
};

struct SolveResult {
  Eigen::VectorXd x_hat;
  double objective = 0.0;  // (||y - A x|| + lambda f(x)) / sqrt(n)
  int iterations = 0;
  bool converged = false;
  double primal_dual_gap = 0.0;  // normalized like objective
  std::vector<double> objective_trace;  // per iteration, if requested
};

/// m = round(delta * n). Throws InvalidArgument when this is 0.
Eigen::Index measurement_count(Eigen::Index n, double delta);

ProblemInstance generate_problem(const SignalPrior& prior, const LinkModel& link, const RegularizerSpec& reg,
                                 Eigen::Index n, double delta, double lambda, Rng& rng);

/// (||y - A x|| + lambda f(x)) / sqrt(n)
double lasso_objective(const Eigen::MatrixXd& A, const Eigen::VectorXd& y, const RegularizerSpec& reg,
                       double lambda, const Eigen::VectorXd& x);

/// min_x ||y - A x|| + lambda f(x) by a Chambolle-Pock primal-dual iteration
/// on min_x max_{||u|| <= 1} u'(y - A x) + lambda f(x).
SolveResult solve_lasso(const ProblemInstance& p, const SolverConfig& cfg = {});

SolveResult solve_lasso(const Eigen::MatrixXd& A, const Eigen::VectorXd& y, const RegularizerSpec& reg,
                        double lambda, const SolverConfig& cfg = {});

/// Column-pivoted QR least squares. Throws SingularMatrix if A is rank deficient.
Eigen::VectorXd solve_least_squares(const Eigen::MatrixXd& A, const Eigen::VectorXd& y);

/// ||x_hat - mu x0||^2
double error_metric(const Eigen::VectorXd& x_hat, double mu, const Eigen::VectorXd& x0);

/// Largest singular value by power iteration on A'A.
double operator_norm(const Eigen::MatrixXd& A, int iters = 100, double rel_tol = 1e-10);

}  // namespace nlasso
