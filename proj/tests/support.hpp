#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <netcurrency/netcurrency.hpp>

#ifndef NETCURRENCY_SCENARIO_DIR
#define NETCURRENCY_SCENARIO_DIR "scenarios"
#endif

namespace testsupport {

using namespace netcurrency;

inline std::string scenario_path(const std::string& name) { return std::string(NETCURRENCY_SCENARIO_DIR) + "/" + name; }

inline Scenario load_scenario(const std::string& name) {
  const auto path = scenario_path(name);
  return build_scenario(parse_config(read_text_file(path)), NETCURRENCY_SCENARIO_DIR);
}

inline std::vector<std::string> numbered_labels(std::size_t n, const std::string& prefix = "u") {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i + 1));
  return out;
}

// Directed network, each ordered pair linked with probability p, weights in [lo, hi].
inline TradeNetwork random_network(std::mt19937_64& rng, std::size_t n, double p = 0.35, double lo = 0.05,
                                   double hi = 0.4) {
  std::bernoulli_distribution link(p);
  std::uniform_real_distribution<double> weight(lo, hi);
  Matrix w = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && link(rng)) w(i, j) = weight(rng);
  return TradeNetwork(numbered_labels(n), w);
}

inline TradeNetwork random_undirected(std::mt19937_64& rng, std::size_t n, double p = 0.4, double lo = 0.05,
                                      double hi = 0.3) {
  std::bernoulli_distribution link(p);
  std::uniform_real_distribution<double> weight(lo, hi);
  Matrix w = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (link(rng)) w(i, j) = w(j, i) = weight(rng);
  return TradeNetwork(numbered_labels(n), w);
}

inline double uniform(std::mt19937_64& rng, double a, double b) {
  return std::uniform_real_distribution<double>(a, b)(rng);
}

inline Issuer random_issuer(std::mt19937_64& rng, std::size_t users, const std::string& label, bool biased) {
  Issuer is;
  is.label = label;
  is.liquidity.mu = uniform(rng, 0.5, 1.5);
  is.liquidity.alpha = uniform(rng, 0.3, 1.0);
  is.liquidity.offset = uniform(rng, 0.0, 0.2);
  if (biased) {
    is.liquidity.bias.resize(users);
    for (auto& b : is.liquidity.bias) b = uniform(rng, 0.8, 1.25);
  }
  is.cost = {uniform(rng, 0.5, 1.5), uniform(rng, 0.2, 2.0)};
  return is;
}

// Heterogeneous scenario with beta a random factor above the lower bound.
inline Scenario random_scenario(std::mt19937_64& rng, std::size_t n, std::size_t T) {
  Scenario s;
  s.net = random_network(rng, n);
  Vector m(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = uniform(rng, 0.5, 2.0);
  s.vols = UserVolumes(m);
  for (std::size_t t = 0; t < T; ++t) s.issuers.push_back(random_issuer(rng, n, "c" + std::to_string(t + 1), true));
  const auto fs = s.liquidity_tables();
  s.beta = beta_lower_bound_T(s.net, s.vols, fs) * uniform(rng, 1.05, 1.6);
  s.k = uniform(rng, 0.1, 1.0);
  return s;
}

// Two identical issuers, m = 1, f = e^alpha, c = exp.
inline Scenario symmetric_scenario(const TradeNetwork& net, double beta_factor = 1.1, double alpha = 0.5) {
  Scenario s;
  s.net = net;
  s.vols = UserVolumes::uniform(net.size());
  s.issuers = {{"a", {1.0, alpha, 0.0, {}}, {1.0, 1.0}}, {"b", {1.0, alpha, 0.0, {}}, {1.0, 1.0}}};
  const auto fs = s.liquidity_tables();
  s.beta = beta_lower_bound_T(s.net, s.vols, fs) * beta_factor;
  s.k = 0.5;
  return s;
}

// Neumann series sum_l (w/beta)^l gamma, truncated once terms fall below 1e-16.
inline Vector neumann_series(const Matrix& w, double beta, const Vector& gamma, int max_terms = 20000) {
  Vector term = gamma, sum = gamma;
  for (int l = 1; l < max_terms; ++l) {
    term = w * term / beta;
    sum += term;
    if (term.cwiseAbs().maxCoeff() < 1e-16 * std::max(1.0, sum.cwiseAbs().maxCoeff())) break;
  }
  return sum;
}

// Jacobi iteration on the users' two-currency first-order conditions,
// x_ia = [beta m_i + sum_j w_ij (x_ja - x_jb) + f_ia - f_ib] / (2 beta), projected on [0, m_i].
inline Matrix best_response_iteration(const Scenario& s, double e_a, double e_b) {
  const auto n = static_cast<Eigen::Index>(s.users());
  const Vector& m = s.vols.m();
  Vector xa = m / 2.0;
  for (int it = 0; it < 200000; ++it) {
    const Vector xb = m - xa;
    const Vector net = s.net.weights() * (xa - xb);
    Vector next(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double fa = s.issuers[0].liquidity(static_cast<std::size_t>(i), e_a);
      const double fb = s.issuers[1].liquidity(static_cast<std::size_t>(i), e_b);
      next(i) = std::clamp((s.beta * m(i) + net(i) + fa - fb) / (2.0 * s.beta), 0.0, m(i));
    }
    const double change = (next - xa).cwiseAbs().maxCoeff();
    xa = next;
    if (change < 1e-15) break;
  }
  Matrix x(n, 2);
  x.col(0) = xa;
  x.col(1) = m - xa;
  return x;
}

// Brute-force argmax on a fine uniform grid (largest argument on ties).
template <typename F>
std::pair<double, double> dense_scan(F&& g, double lo, double hi, double step) {
  const auto steps = static_cast<long long>(std::llround((hi - lo) / step));
  double best_x = lo, best_v = g(lo);
  for (long long j = 1; j <= steps; ++j) {
    const double x = lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(steps);
    const double v = g(x);
    if (v >= best_v) {
      best_v = v;
      best_x = x;
    }
  }
  return {best_x, best_v};
}

inline CommitmentProfile random_profile(std::mt19937_64& rng, std::size_t T, double out_prob = 0.0) {
  CommitmentProfile p;
  std::bernoulli_distribution out(out_prob);
  for (std::size_t t = 0; t < T; ++t)
    p.choices.push_back(out(rng) ? IssuerChoice::out() : IssuerChoice::commit(uniform(rng, 0.0, 1.0)));
  if (p.active().empty()) p[0] = IssuerChoice::commit(uniform(rng, 0.0, 1.0));
  return p;
}

// Largest drop in user i's cost over random feasible reallocations of its own row.
inline double best_deviation_gain(const Scenario& s, const Allocation& a, std::size_t i, std::mt19937_64& rng,
                                  int trials) {
  const double base = user_cost(s, a, i);
  const auto act = a.active();
  const double m = s.vols[i];
  std::exponential_distribution<double> expo(1.0);
  Allocation trial = a;
  double worst = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < trials; ++k) {
    std::vector<double> row(act.size());
    if (k % 2 == 0) {
      // Uniform on the simplex scaled by m.
      double sum = 0.0;
      for (auto& r : row) sum += (r = expo(rng));
      for (auto& r : row) r = r / sum * m;
    } else {
      // Small budget-preserving perturbation around the equilibrium row.
      const double scale = std::pow(10.0, -uniform(rng, 1.0, 6.0)) * m;
      double mean = 0.0;
      for (std::size_t t = 0; t < act.size(); ++t) {
        row[t] = uniform(rng, -scale, scale);
        mean += row[t];
      }
      mean /= static_cast<double>(act.size());
      for (std::size_t t = 0; t < act.size(); ++t)
        row[t] = a.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(act[t])) + row[t] - mean;
      if (*std::min_element(row.begin(), row.end()) < 0.0) continue;
    }
    for (std::size_t t = 0; t < act.size(); ++t)
      trial.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(act[t])) = row[t];
    worst = std::max(worst, base - user_cost(s, trial, i));
  }
  return worst;
}

}  // namespace testsupport
