#include "nlasso/solver.hpp"

#include <cmath>
#include <limits>

#include <Eigen/QR>

#include "nlasso/error.hpp"

namespace nlasso {

Eigen::Index measurement_count(Eigen::Index n, double delta) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "n must be >= 1");
  if (!(delta > 0.0) || !std::isfinite(delta)) throw Error(ErrorKind::InvalidArgument, "delta must be > 0");
  const auto m = static_cast<Eigen::Index>(std::llround(delta * static_cast<double>(n)));
  if (m < 1) throw Error(ErrorKind::InvalidArgument, "delta * n rounds to zero measurements");
  return m;
}

ProblemInstance generate_problem(const SignalPrior& prior, const LinkModel& link, const RegularizerSpec& reg,
                                 Eigen::Index n, double delta, double lambda, Rng& rng) {
  if (!(lambda > 0.0)) throw Error(ErrorKind::InvalidArgument, "lambda must be > 0");
  const Eigen::Index m = measurement_count(n, delta);
  ProblemInstance p;
  p.signal = sample_signal(prior, n, rng);
  p.A = standard_normal_matrix(m, n, rng);
  p.u = p.A * p.signal.x0;
  p.y = apply_link(link, p.u, rng);
  p.lambda = lambda;
  p.reg = reg;
  p.delta = delta;
  return p;
}

double lasso_objective(const Eigen::MatrixXd& A, const Eigen::VectorXd& y, const RegularizerSpec& reg,
                       double lambda, const Eigen::VectorXd& x) {
  if (A.rows() != y.size() || A.cols() != x.size())
    throw Error(ErrorKind::DimensionMismatch, "A, y and x sizes disagree");
  return ((y - A * x).norm() + lambda * evaluate(reg, x)) / std::sqrt(static_cast<double>(x.size()));
}

double operator_norm(const Eigen::MatrixXd& A, int iters, double rel_tol) {
  if (A.size() == 0) return 0.0;
  // Deterministic start with no zero components.
  Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(A.cols(), 1.0, 2.0).normalized();
  double prev = 0.0;
  double est = 0.0;
  for (int k = 0; k < iters; ++k) {
    Eigen::VectorXd w = A.transpose() * (A * v);
    const double nw = w.norm();
    if (nw == 0.0) return 0.0;
    est = std::sqrt(nw);
    v = w / nw;
    if (std::abs(est - prev) <= rel_tol * est) break;
    prev = est;
  }
  return est;
}

SolveResult solve_lasso(const Eigen::MatrixXd& A, const Eigen::VectorXd& y, const RegularizerSpec& reg,
                        double lambda, const SolverConfig& cfg) {
  if (cfg.max_iters < 1) throw Error(ErrorKind::InvalidArgument, "max_iters must be >= 1");
  if (cfg.window < 1) throw Error(ErrorKind::InvalidArgument, "window must be >= 1");
  if (!(lambda > 0.0)) throw Error(ErrorKind::InvalidArgument, "lambda must be > 0");
  if (A.rows() != y.size()) throw Error(ErrorKind::DimensionMismatch, "A has " + std::to_string(A.rows()) +
                                                                       " rows but y has " +
                                                                       std::to_string(y.size()));
  validate(reg);
  const Eigen::Index n = A.cols();
  if (n % block_size(reg) != 0) throw Error(ErrorKind::DimensionMismatch, "block size does not divide n");
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));

  SolveResult res;
  res.x_hat = Eigen::VectorXd::Zero(n);
  const double y_norm = y.norm();
  const double zero_obj = y_norm * scale;

  // Zero is optimal iff some u in the unit ball has u'y = ||y|| and dual_norm(A'u) <= lambda.
  if (y_norm == 0.0 || dual_norm(reg, A.transpose() * (y / y_norm)) <= lambda) {
    res.objective = zero_obj;
    res.converged = true;
    return res;
  }

  // 1.01 guards the power-iteration underestimate.
  const double L = 1.01 * operator_norm(A);
  const double step = 1.0 / L;  // s = t, s t L^2 < 1

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd Ax = Eigen::VectorXd::Zero(A.rows());
  Eigen::VectorXd Axbar = Ax;
  Eigen::VectorXd u = Eigen::VectorXd::Zero(A.rows());
  Eigen::VectorXd ATu(n);

  // Feasible dual value for any u in the unit ball, after scaling A'u into the
  // lambda-ball of the dual norm. Every such value is a lower bound.
  auto dual_value = [&](const Eigen::VectorXd& uu, const Eigen::VectorXd& ATuu) {
    const double dn = dual_norm(reg, ATuu);
    return (dn > lambda ? lambda / dn : 1.0) * uu.dot(y);
  };
  auto primal_value = [&](const Eigen::VectorXd& xx, const Eigen::VectorXd& Axx) {
    return (y - Axx).norm() + lambda * evaluate(reg, xx);
  };

  double window_sum = 0.0;
  double prev_window_mean = std::numeric_limits<double>::quiet_NaN();
  double obj = zero_obj / scale;
  Eigen::VectorXd best_x = x;
  double best_obj = obj;
  double best_dual = 0.0;

  // Running averages since the last restart.
  Eigen::VectorXd x_sum = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd u_sum = Eigen::VectorXd::Zero(A.rows());
  int since_restart = 0;
  double restart_gap = obj;

  int it = 0;
  for (it = 1; it <= cfg.max_iters; ++it) {
    u.noalias() += step * (y - Axbar);
    const double un = u.norm();
    if (un > 1.0) u /= un;

    ATu.noalias() = A.transpose() * u;
    Eigen::VectorXd x_new = prox(reg, x + step * ATu, step * lambda);
    Eigen::VectorXd Ax_new = A * x_new;
    Axbar = 2.0 * Ax_new - Ax;
    x.swap(x_new);
    Ax.swap(Ax_new);

    obj = primal_value(x, Ax);
    if (cfg.record_trace) res.objective_trace.push_back(obj * scale);
    if (obj < best_obj) {
      best_obj = obj;
      best_x = x;
    }
    x_sum += x;
    u_sum += u;
    ++since_restart;

    window_sum += obj;
    if (it % cfg.window != 0) continue;

    const double cur_gap = obj - dual_value(u, ATu);
    best_dual = std::max(best_dual, obj - cur_gap);
    if (cfg.restart) {
      const Eigen::VectorXd x_avg = x_sum / since_restart;
      const Eigen::VectorXd u_avg = u_sum / since_restart;
      const Eigen::VectorXd Ax_avg = A * x_avg;
      const Eigen::VectorXd ATu_avg = A.transpose() * u_avg;
      const double avg_obj = primal_value(x_avg, Ax_avg);
      const double avg_dual = dual_value(u_avg, ATu_avg);
      if (avg_obj < best_obj) {
        best_obj = avg_obj;
        best_x = x_avg;
      }
      best_dual = std::max(best_dual, avg_dual);
      const double avg_gap = avg_obj - avg_dual;
      const double cand_gap = std::min(avg_gap, cur_gap);
      if (cand_gap <= 0.2 * restart_gap) {
        if (avg_gap < cur_gap) {
          x = x_avg;
          u = u_avg;
          Ax = Ax_avg;
        }
        Axbar = Ax;
        x_sum.setZero();
        u_sum.setZero();
        since_restart = 0;
        restart_gap = cand_gap;
      }
    }

    const double mean = window_sum / cfg.window;
    window_sum = 0.0;
    const bool flat = std::isfinite(prev_window_mean) &&
                      std::abs(mean - prev_window_mean) <= cfg.tol * std::max(std::abs(mean), 1e-300);
    prev_window_mean = mean;
    if (flat && best_obj - best_dual <= cfg.gap_tol * std::max(best_obj, 1.0)) {
      res.converged = true;
      break;
    }
  }
  const double gap = best_obj - best_dual;

  res.iterations = std::min(it, cfg.max_iters);
  res.x_hat = std::move(best_x);
  res.objective = best_obj * scale;
  res.primal_dual_gap = std::max(gap, 0.0) * scale;
  if (res.objective > zero_obj) {
    res.x_hat.setZero();
    res.objective = zero_obj;
  }
  return res;
}

SolveResult solve_lasso(const ProblemInstance& p, const SolverConfig& cfg) {
  return solve_lasso(p.A, p.y, p.reg, p.lambda, cfg);
}

Eigen::VectorXd solve_least_squares(const Eigen::MatrixXd& A, const Eigen::VectorXd& y) {
  if (A.rows() != y.size()) throw Error(ErrorKind::DimensionMismatch, "A and y sizes disagree");
  if (A.rows() < A.cols()) throw Error(ErrorKind::SingularMatrix, "least squares needs m >= n");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  if (qr.rank() < A.cols()) throw Error(ErrorKind::SingularMatrix, "A is rank deficient");
  return qr.solve(y);
}

double error_metric(const Eigen::VectorXd& x_hat, double mu, const Eigen::VectorXd& x0) {
  if (x_hat.size() != x0.size()) throw Error(ErrorKind::DimensionMismatch, "x_hat and x0 sizes disagree");
  return (x_hat - mu * x0).squaredNorm();
}

}  // namespace nlasso
