#pragma once

#include <string>
#include <string_view>
#include <variant>

#include <Eigen/Core>

#include "nlasso/random.hpp"

namespace nlasso {

/// Entries i.i.d. (1-rho) delta_0 + rho N(0, 1/rho).
struct SparseGauss {
  double rho = 0.1;
};

/// Entries i.i.d. (1-rho) delta_0 + rho/2 delta_{+a} + rho/2 delta_{-a}, a = 1/sqrt(rho).
struct SparseSymmetric {
  double rho = 0.1;
};

/// Blocks of size block_size i.i.d. (1-rho) delta_0 + rho N(0, I/rho).
struct GroupSparseGauss {
  double rho = 0.1;
  int block_size = 1;
};

/// Every variant has unit second moment per coordinate.
using SignalPrior = std::variant<SparseGauss, SparseSymmetric, GroupSparseGauss>;

struct SignalInstance {
  Eigen::VectorXd x_bar;  // raw draw
  Eigen::VectorXd x0;     // x_bar / ||x_bar||
  Eigen::Index n = 0;
};

void validate(const SignalPrior& prior);

double sparsity(const SignalPrior& prior);

/// Block size of the prior; 1 for scalar priors.
int block_size(const SignalPrior& prior);

bool is_scalar(const SignalPrior& prior);

/// Draws x_bar from the prior and normalizes it. An all-zero draw is redrawn.
/// Throws DimensionMismatch if the block size does not divide n.
SignalInstance sample_signal(const SignalPrior& prior, Eigen::Index n, Rng& rng);

/// n^-1 ||x_bar||^2
double empirical_second_moment(const SignalInstance& inst);

/// Parses "sparse_gauss:0.15", "sparse_sym:0.10" or "group_gauss:0.05:3".
SignalPrior parse_prior(std::string_view text);

std::string describe(const SignalPrior& prior);

}  // namespace nlasso
