#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <vector>

#include "errors.hpp"
#include "network.hpp"
#include "numerics.hpp"
#include "scenario.hpp"

namespace netcurrency {

struct Allocation {
  Matrix x;  // n x T, zero columns for Out issuers
  CommitmentProfile profile;

  Vector totals() const { return x.colwise().sum().transpose(); }
  std::vector<std::size_t> active() const { return profile.active(); }

  // d_t = x_t - x_{t+1} over consecutive In columns.
  Matrix differences() const {
    const auto act = active();
    Matrix d(x.rows(), act.size() < 2 ? 0 : static_cast<Eigen::Index>(act.size() - 1));
    for (std::size_t t = 0; t + 1 < act.size(); ++t)
      d.col(static_cast<Eigen::Index>(t)) = x.col(act[t]) - x.col(act[t + 1]);
    return d;
  }

  double min_usage() const { return x.size() == 0 ? 0.0 : x.minCoeff(); }
  bool nonnegative(double slack = 1e-12) const { return min_usage() >= -slack; }
};

// Factorizations of I - w/beta and beta*I - w, shared by repeated allocations.
class UserSystem {
 public:
  UserSystem(const Scenario& scn, const Tolerances& tol = {}) : tol_(tol) {
    scn.validate();
    require_beta(scn.net, scn.beta, tol);
    const auto n = static_cast<Eigen::Index>(scn.users());
    const Matrix id = Matrix::Identity(n, n);
    katz_ = LinearSolver(id - scn.net.weights() / scn.beta, tol);
    resolvent_ = LinearSolver(scn.beta * id - scn.net.weights(), tol);
    LinearSolver transposed(scn.beta * id - scn.net.weights().transpose(), tol);
    s_ = transposed.solve(Vector::Ones(n));
  }

  // (I - w/beta)^{-1} rhs
  template <typename Rhs>
  typename Rhs::PlainObject katz_solve(const Eigen::MatrixBase<Rhs>& rhs) const { return katz_.solve(rhs); }

  // (beta*I - w)^{-1} rhs
  template <typename Rhs>
  typename Rhs::PlainObject resolvent_solve(const Eigen::MatrixBase<Rhs>& rhs) const {
    return resolvent_.solve(rhs);
  }

  // Column sums of (beta*I - w)^{-1}.
  const Vector& column_sums() const { return s_; }
  const Tolerances& tolerances() const { return tol_; }

 private:
  Tolerances tol_;
  LinearSolver katz_, resolvent_;
  Vector s_;
};

inline Vector liquidity_vector(const Scenario& scn, std::size_t p, double e) {
  const auto& f = scn.issuers.at(p).liquidity;
  Vector out(static_cast<Eigen::Index>(scn.users()));
  for (std::size_t i = 0; i < scn.users(); ++i) out(static_cast<Eigen::Index>(i)) = f(i, e);
  return out;
}

namespace detail {

inline void check_active_beta(const Scenario& scn, const std::vector<std::size_t>& act, const Tolerances& tol) {
  std::vector<LiquidityFn> fs;
  for (auto p : act) fs.push_back(scn.issuers[p].liquidity);
  const double bound = beta_lower_bound_T(scn.net, scn.vols, fs, tol);
  if (scn.beta < bound) {
    std::ostringstream msg;
    msg.precision(12);
    msg << "beta = " << scn.beta << " is below the lower bound " << bound;
    throw Error(ErrorKind::BetaTooSmall, msg.str());
  }
}

inline Allocation monopoly(const Scenario& scn, const CommitmentProfile& profile, std::size_t p) {
  Allocation a;
  a.profile = profile;
  a.x = Matrix::Zero(static_cast<Eigen::Index>(scn.users()), static_cast<Eigen::Index>(scn.issuer_count()));
  a.x.col(static_cast<Eigen::Index>(p)) = scn.vols.m();
  return a;
}

}  // namespace detail

inline Vector gamma_two(const Scenario& scn, double e_a, double e_b) {
  if (scn.issuer_count() != 2) throw Error(ErrorKind::InvalidArgument, "gamma_two needs two issuers");
  return (liquidity_vector(scn, 0, e_a) - liquidity_vector(scn, 1, e_b)) / scn.beta;
}

inline Allocation allocate_two(const UserSystem& sys, const Scenario& scn, IssuerChoice a, IssuerChoice b) {
  if (scn.issuer_count() != 2) throw Error(ErrorKind::InvalidArgument, "allocate_two needs two issuers");
  CommitmentProfile profile({a, b});
  if (!a.in() && !b.in()) throw Error(ErrorKind::NoIssuerIn, "both issuers are Out");
  if (!a.in() || !b.in()) return detail::monopoly(scn, profile, a.in() ? 0 : 1);
  detail::check_active_beta(scn, {0, 1}, sys.tolerances());
  const Vector d = sys.katz_solve(gamma_two(scn, a.e(), b.e()));
  Allocation out;
  out.profile = profile;
  out.x.resize(static_cast<Eigen::Index>(scn.users()), 2);
  out.x.col(0) = (scn.vols.m() + d) / 2.0;
  out.x.col(1) = (scn.vols.m() - d) / 2.0;
  return out;
}

inline Allocation allocate_two(const Scenario& scn, IssuerChoice a, IssuerChoice b, const Tolerances& tol = {}) {
  return allocate_two(UserSystem(scn, tol), scn, a, b);
}

inline Allocation allocate_two(const Scenario& scn, double e_a, double e_b, const Tolerances& tol = {}) {
  return allocate_two(scn, IssuerChoice::commit(e_a), IssuerChoice::commit(e_b), tol);
}

// x_t = m/T' + S (f_t - mean_tau f_tau), S = (beta*I - w)^{-1}, over the In issuers.
inline Allocation allocate_T(const UserSystem& sys, const Scenario& scn, const CommitmentProfile& profile) {
  scn.check_profile(profile);
  const auto act = profile.active();
  if (act.empty()) throw Error(ErrorKind::NoIssuerIn, "every issuer is Out");
  if (act.size() == 1) return detail::monopoly(scn, profile, act[0]);
  detail::check_active_beta(scn, act, sys.tolerances());

  const auto n = static_cast<Eigen::Index>(scn.users());
  const auto tp = static_cast<Eigen::Index>(act.size());
  Matrix f(n, tp);
  for (Eigen::Index t = 0; t < tp; ++t) f.col(t) = liquidity_vector(scn, act[t], profile[act[t]].e());
  const Vector fbar = f.rowwise().mean();
  const Matrix z = sys.resolvent_solve(f.colwise() - fbar);

  Allocation out;
  out.profile = profile;
  out.x = Matrix::Zero(n, static_cast<Eigen::Index>(scn.issuer_count()));
  for (Eigen::Index t = 0; t < tp; ++t)
    out.x.col(static_cast<Eigen::Index>(act[t])) = scn.vols.m() / static_cast<double>(tp) + z.col(t);
  return out;
}

inline Allocation allocate_T(const Scenario& scn, const CommitmentProfile& profile, const Tolerances& tol = {}) {
  return allocate_T(UserSystem(scn, tol), scn, profile);
}

// Marginal cost of user i in currency p at the allocation.
inline double marginal_cost(const Scenario& scn, const Allocation& alloc, std::size_t i, std::size_t p) {
  const auto ii = static_cast<Eigen::Index>(i), pp = static_cast<Eigen::Index>(p);
  const double net_term = scn.net.weights().row(ii).dot(alloc.x.col(pp));
  return scn.beta * alloc.x(ii, pp) - net_term - scn.issuers[p].liquidity(i, alloc.profile[p].e());
}

inline double euler_residual(const Scenario& scn, const Allocation& alloc) {
  const auto act = alloc.active();
  double worst = 0.0;
  for (std::size_t i = 0; i < scn.users(); ++i)
    for (std::size_t t = 0; t + 1 < act.size(); ++t)
      worst = std::max(worst, std::abs(marginal_cost(scn, alloc, i, act[t]) -
                                       marginal_cost(scn, alloc, i, act[t + 1])));
  return worst;
}

inline double user_cost(const Scenario& scn, const Allocation& alloc, std::size_t i) {
  const auto ii = static_cast<Eigen::Index>(i);
  double v = 0.0;
  for (std::size_t p = 0; p < scn.issuer_count(); ++p) {
    if (!alloc.profile[p].in()) continue;
    const auto pp = static_cast<Eigen::Index>(p);
    const double xi = alloc.x(ii, pp);
    const double f = scn.issuers[p].liquidity(i, alloc.profile[p].e());
    v += 0.5 * scn.beta * xi * xi - xi * scn.net.weights().row(ii).dot(alloc.x.col(pp)) - f * xi;
  }
  return v;
}

inline double gini_row(std::span<const double> row) {
  double sum = 0.0, pairs = 0.0;
  for (double a : row) {
    sum += a;
    for (double b : row) pairs += std::abs(a - b);
  }
  if (!(sum > 0.0)) throw Error(ErrorKind::InvalidArgument, "gini needs a positive row total");
  return pairs / (2.0 * static_cast<double>(row.size()) * sum);
}

inline std::vector<double> active_row(const Allocation& alloc, std::size_t i) {
  std::vector<double> row;
  for (auto p : alloc.active()) row.push_back(alloc.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p)));
  return row;
}

// Gini over the In currencies of user i's row.
inline double gini(const Allocation& alloc, std::size_t i) { return gini_row(active_row(alloc, i)); }

struct GiniDecomposition {
  double value;
  bool monotone;
};

inline bool is_monotone(std::span<const double> row) {
  bool down = true, up = true;
  for (std::size_t t = 0; t + 1 < row.size(); ++t) {
    if (row[t] < row[t + 1]) down = false;
    if (row[t] > row[t + 1]) up = false;
  }
  return down || up;
}

// sum_t t(T-t)|d_t| / (T m) from a usage row.
inline GiniDecomposition gini_decomposition_row(std::span<const double> row) {
  double m = 0.0;
  for (double v : row) m += v;
  const double tt = static_cast<double>(row.size());
  double value = 0.0;
  for (std::size_t t = 1; t < row.size(); ++t)
    value += static_cast<double>(t) * (tt - static_cast<double>(t)) * std::abs(row[t - 1] - row[t]);
  return {value / (tt * m), is_monotone(row)};
}

// Same sum with d_t taken as the adjusted Katz centrality (I - w/beta)^{-1} (f_t - f_{t+1})/beta.
inline GiniDecomposition gini_centrality_decomposition(const UserSystem& sys, const Scenario& scn,
                                                       const Allocation& alloc, std::size_t i) {
  const auto act = alloc.active();
  const double tt = static_cast<double>(act.size());
  const auto ii = static_cast<Eigen::Index>(i);
  double value = 0.0;
  for (std::size_t t = 0; t + 1 < act.size(); ++t) {
    const Vector gamma = (liquidity_vector(scn, act[t], alloc.profile[act[t]].e()) -
                          liquidity_vector(scn, act[t + 1], alloc.profile[act[t + 1]].e())) /
                         scn.beta;
    const Vector kappa = sys.katz_solve(gamma);
    value += static_cast<double>(t + 1) * (tt - static_cast<double>(t + 1)) * std::abs(kappa(ii));
  }
  const auto row = active_row(alloc, i);
  return {value / (tt * scn.vols[i]), is_monotone(row)};
}

inline GiniDecomposition gini_centrality_decomposition(const Scenario& scn, const Allocation& alloc,
                                                       std::size_t i, const Tolerances& tol = {}) {
  return gini_centrality_decomposition(UserSystem(scn, tol), scn, alloc, i);
}

}  // namespace netcurrency
