#include "nlasso/signal.hpp"

#include <cmath>
#include <sstream>

#include "nlasso/error.hpp"
#include "overloaded.hpp"
#include "parse_util.hpp"

namespace nlasso {

namespace {

using detail::Overloaded;

void check_rho(double rho) {
  if (!(rho > 0.0 && rho < 1.0)) throw Error(ErrorKind::ValidationError, "sparsity rho must lie in (0,1)");
}

}  // namespace

void validate(const SignalPrior& prior) {
  std::visit(Overloaded{
                 [](const SparseGauss& p) { check_rho(p.rho); },
                 [](const SparseSymmetric& p) { check_rho(p.rho); },
                 [](const GroupSparseGauss& p) {
                   check_rho(p.rho);
                   if (p.block_size < 1) throw Error(ErrorKind::ValidationError, "block size must be >= 1");
                 },
             },
             prior);
}

double sparsity(const SignalPrior& prior) {
  return std::visit([](const auto& p) { return p.rho; }, prior);
}

int block_size(const SignalPrior& prior) {
  if (const auto* g = std::get_if<GroupSparseGauss>(&prior)) return g->block_size;
  return 1;
}

bool is_scalar(const SignalPrior& prior) { return !std::holds_alternative<GroupSparseGauss>(prior); }

SignalInstance sample_signal(const SignalPrior& prior, Eigen::Index n, Rng& rng) {
  validate(prior);
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "signal dimension must be positive");
  const int b = block_size(prior);
  if (n % b != 0)
    throw Error(ErrorKind::DimensionMismatch,
                "block size " + std::to_string(b) + " does not divide n = " + std::to_string(n));

  const double rho = sparsity(prior);
  const double scale = 1.0 / std::sqrt(rho);
  std::bernoulli_distribution active(rho);
  std::bernoulli_distribution coin(0.5);
  std::normal_distribution<double> normal;

  SignalInstance inst;
  inst.n = n;
  inst.x_bar = Eigen::VectorXd::Zero(n);
  do {
    inst.x_bar.setZero();
    std::visit(Overloaded{
                   [&](const SparseGauss&) {
                     for (Eigen::Index i = 0; i < n; ++i)
                       if (active(rng)) inst.x_bar[i] = scale * normal(rng);
                   },
                   [&](const SparseSymmetric&) {
                     for (Eigen::Index i = 0; i < n; ++i)
                       if (active(rng)) inst.x_bar[i] = coin(rng) ? scale : -scale;
                   },
                   [&](const GroupSparseGauss&) {
                     for (Eigen::Index blk = 0; blk < n / b; ++blk)
                       if (active(rng))
                         for (int j = 0; j < b; ++j) inst.x_bar[blk * b + j] = scale * normal(rng);
                   },
               },
               prior);
  } while (inst.x_bar.squaredNorm() == 0.0);
  inst.x0 = inst.x_bar / inst.x_bar.norm();
  return inst;
}

double empirical_second_moment(const SignalInstance& inst) {
  return inst.x_bar.squaredNorm() / static_cast<double>(inst.x_bar.size());
}

SignalPrior parse_prior(std::string_view text) {
  const auto [head, rest] = detail::split_head(text);
  SignalPrior prior;
  if (head == "sparse_gauss") {
    prior = SparseGauss{detail::parse_double(rest, "sparse_gauss rho")};
  } else if (head == "sparse_sym") {
    prior = SparseSymmetric{detail::parse_double(rest, "sparse_sym rho")};
  } else if (head == "group_gauss") {
    const auto [rho, b] = detail::split_head(rest);
    if (b.empty()) throw Error(ErrorKind::ParseError, "group_gauss needs rho:block_size");
    prior = GroupSparseGauss{detail::parse_double(rho, "group_gauss rho"),
                             static_cast<int>(detail::parse_int(b, "group_gauss block size"))};
  } else {
    throw Error(ErrorKind::ParseError, "unknown prior '" + std::string(text) + "'");
  }
  validate(prior);
  return prior;
}

std::string describe(const SignalPrior& prior) {
  std::ostringstream out;
  std::visit(Overloaded{
                 [&](const SparseGauss& p) { out << "sparse_gauss:" << p.rho; },
                 [&](const SparseSymmetric& p) { out << "sparse_sym:" << p.rho; },
                 [&](const GroupSparseGauss& p) { out << "group_gauss:" << p.rho << ":" << p.block_size; },
             },
             prior);
  return out.str();
}

}  // namespace nlasso
