#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "errors.hpp"

namespace netcurrency {

// f_ip(e) = b_ip * (mu * e^alpha + offset). An empty bias table means b = 1 for every user.
struct LiquidityFn {
  double mu = 1.0;
  double alpha = 1.0;
  double offset = 0.0;
  std::vector<double> bias;

  double bias_of(std::size_t user) const { return bias.empty() ? 1.0 : bias.at(user); }

  double base(double e) const { return mu * std::pow(e, alpha) + offset; }

  double base_derivative(double e) const {
    if (e <= 0.0) {
      if (alpha < 1.0) throw Error(ErrorKind::DerivativeAtZero, "e^alpha with alpha < 1 at e = 0");
      return alpha == 1.0 ? mu : 0.0;
    }
    return mu * alpha * std::pow(e, alpha - 1.0);
  }

  double operator()(std::size_t user, double e) const { return bias_of(user) * base(e); }

  double derivative(std::size_t user, double e) const { return bias_of(user) * base_derivative(e); }

  void validate(std::size_t users) const {
    if (!(mu > 0.0)) throw Error(ErrorKind::InvalidArgument, "liquidity scale mu must be > 0");
    if (!(alpha > 0.0 && alpha <= 1.0))
      throw Error(ErrorKind::InvalidArgument, "liquidity exponent alpha must lie in (0, 1]");
    if (!(offset >= 0.0)) throw Error(ErrorKind::InvalidArgument, "liquidity offset must be >= 0");
    if (!bias.empty() && bias.size() != users)
      throw Error(ErrorKind::InvalidArgument, "bias table has " + std::to_string(bias.size()) +
                                                  " entries for " + std::to_string(users) + " users");
    for (double b : bias)
      if (!(b > 0.0)) throw Error(ErrorKind::InvalidArgument, "bias entries must be > 0");
  }
};

// c(e) = c0 * exp(rho * e)
struct CommitCostFn {
  double c0 = 1.0;
  double rho = 1.0;

  double operator()(double e) const { return c0 * std::exp(rho * e); }
  double derivative(double e) const { return c0 * rho * std::exp(rho * e); }

  void validate() const {
    if (!(c0 > 0.0)) throw Error(ErrorKind::InvalidArgument, "cost base c0 must be > 0");
    if (!(rho >= 0.0)) throw Error(ErrorKind::InvalidArgument, "cost rate rho must be >= 0");
  }
};

}  // namespace netcurrency
