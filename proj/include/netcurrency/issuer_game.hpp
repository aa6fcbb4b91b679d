#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <thread>
#include <utility>
#include <vector>

#include "allocation.hpp"
#include "errors.hpp"
#include "network.hpp"
#include "numerics.hpp"
#include "scenario.hpp"

namespace netcurrency {

enum class Regime { SharedMarket, MonopolyDeterrence, MonopolyZeroCommit, FollowerMonopoly, AllOut, Mixed };

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::SharedMarket: return "SharedMarket";
    case Regime::MonopolyDeterrence: return "MonopolyDeterrence";
    case Regime::MonopolyZeroCommit: return "MonopolyZeroCommit";
    case Regime::FollowerMonopoly: return "FollowerMonopoly";
    case Regime::AllOut: return "AllOut";
    case Regime::Mixed: return "Mixed";
  }
  return "?";
}

enum class DeterrenceStatus { Free, Feasible, Infeasible };

inline const char* to_string(DeterrenceStatus s) {
  switch (s) {
    case DeterrenceStatus::Free: return "Free";
    case DeterrenceStatus::Feasible: return "Feasible";
    case DeterrenceStatus::Infeasible: return "Infeasible";
  }
  return "?";
}

struct SpeTwoOptions {
  int grid_n = 64;
  bool lattice = false;  // restrict commitments to j / grid_n
  Tolerances tol;
};

struct SpeTOptions {
  int grid_n = 50;
  int refine_rounds = 0;
  std::uint64_t max_evaluations = 100'000'000;
  unsigned threads = 0;  // 0: hardware concurrency
  Tolerances tol;
};

struct SpeDiagnostics {
  std::optional<double> leader_share_commit;    // leader's best commitment with the follower In
  std::optional<double> follower_share_commit;  // follower's reply to it
  std::optional<double> share_utility;
  std::optional<DeterrenceStatus> deterrence;
  std::optional<double> deterrence_root;  // smallest leader commitment that keeps the follower Out
  std::optional<double> deterrence_commit;
  std::optional<double> deterrence_utility;
  std::uint64_t evaluations = 0;
};

struct SpeOutcome {
  CommitmentProfile profile;
  Allocation alloc;  // all zeros when every issuer is Out
  std::vector<double> utilities;
  Regime regime = Regime::AllOut;
  SpeDiagnostics diagnostics;
};

// Issuer payoffs through X_t = M/T' + F_t(e_t) - (1/T') sum_tau F_tau(e_tau),
// where F_t(e) = sum_j s_j f_jt(e) and s are the column sums of (beta*I - w)^{-1}.
class GameModel {
 public:
  GameModel(const Scenario& scn, const Tolerances& tol = {}) : scn_(scn), sys_(scn, tol), tol_(tol) {
    const Vector& s = sys_.column_sums();
    for (const auto& is : scn_.issuers) {
      double sig = 0.0;
      for (std::size_t j = 0; j < scn_.users(); ++j) sig += s(static_cast<Eigen::Index>(j)) * is.liquidity.bias_of(j);
      sigma_.push_back(sig);
    }
  }

  const Scenario& scenario() const { return scn_; }
  const UserSystem& system() const { return sys_; }
  const Tolerances& tolerances() const { return tol_; }
  std::size_t issuers() const { return scn_.issuer_count(); }
  double M() const { return scn_.total_volume(); }

  double aggregate(std::size_t p, double e) const { return sigma_[p] * scn_.issuers[p].liquidity.base(e); }
  double cost(std::size_t p, double e) const { return scn_.k * scn_.issuers[p].cost(e); }

  double total(std::size_t p, const CommitmentProfile& profile) const {
    if (!profile[p].in()) return 0.0;
    double phi = 0.0;
    int count = 0;
    for (std::size_t t = 0; t < profile.size(); ++t)
      if (profile[t].in()) {
        phi += aggregate(t, profile[t].e());
        ++count;
      }
    return (M() - phi) / count + aggregate(p, profile[p].e());
  }

  double utility(std::size_t p, const CommitmentProfile& profile) const {
    if (!profile[p].in()) return 0.0;
    return total(p, profile) - cost(p, profile[p].e());
  }

 private:
  Scenario scn_;
  UserSystem sys_;
  Tolerances tol_;
  std::vector<double> sigma_;
};

inline double issuer_utility(const Scenario& scn, const CommitmentProfile& profile, std::size_t p,
                             const Tolerances& tol = {}) {
  scn.check_profile(profile);
  if (!profile[p].in()) return 0.0;
  const Allocation a = allocate_T(scn, profile, tol);
  return a.totals()(static_cast<Eigen::Index>(p)) - scn.k * scn.issuers[p].cost(profile[p].e());
}

inline void require_beta_bound(const Scenario& scn, const Tolerances& tol) {
  const auto fs = scn.liquidity_tables();
  const double bound = beta_lower_bound_T(scn.net, scn.vols, fs, tol);
  if (scn.beta < bound) {
    std::ostringstream msg;
    msg.precision(12);
    msg << "beta = " << scn.beta << " is below the lower bound " << bound;
    throw Error(ErrorKind::BetaTooSmall, msg.str());
  }
}

struct FollowerReply {
  IssuerChoice choice;
  double best_commit;  // argmax of the follower's utility, reported even when it stays Out
  double utility;      // follower utility at best_commit (0 when replying to an Out leader and staying Out)
};

inline FollowerReply best_response_follower(const GameModel& model, IssuerChoice leader,
                                            const SpeTwoOptions& opts = {}) {
  if (model.issuers() != 2) throw Error(ErrorKind::InvalidArgument, "follower reply needs two issuers");
  const auto& tol = opts.tol;
  if (!leader.in()) {
    const double u = model.M() - model.cost(1, 0.0);
    if (u > tol.tie_tol) return {IssuerChoice::commit(0.0), 0.0, u};
    return {IssuerChoice::out(), 0.0, u};
  }
  auto u_b = [&](double e_b) {
    return model.utility(1, CommitmentProfile({leader, IssuerChoice::commit(e_b)}));
  };
  const ScalarMax best = opts.lattice ? maximize_on_grid(u_b, 0.0, 1.0, opts.grid_n, tol.tie_tol)
                                      : maximize_scalar(u_b, 0.0, 1.0, opts.grid_n, tol);
  const double e = std::clamp(best.arg, 0.0, 1.0);
  if (best.value > tol.tie_tol) return {IssuerChoice::commit(e), e, best.value};
  return {IssuerChoice::out(), e, best.value};
}

inline FollowerReply best_response_follower(const Scenario& scn, IssuerChoice leader,
                                            const SpeTwoOptions& opts = {}) {
  return best_response_follower(GameModel(scn, opts.tol), leader, opts);
}

struct Deterrence {
  DeterrenceStatus status;
  double commitment;  // 0 when Free, the root when Feasible, NaN when Infeasible
};

// g(e_a) = follower's best-reply utility; the follower is Out once g <= tie_tol.
inline Deterrence deterrence_commitment(const GameModel& model, const SpeTwoOptions& opts = {}) {
  const auto& tol = opts.tol;
  auto g = [&](double e_a) { return best_response_follower(model, IssuerChoice::commit(e_a), opts).utility; };
  if (opts.lattice) {
    for (int j = 0; j <= opts.grid_n; ++j) {
      const double e = j == opts.grid_n ? 1.0 : static_cast<double>(j) / opts.grid_n;
      if (g(e) <= tol.tie_tol) return {j == 0 ? DeterrenceStatus::Free : DeterrenceStatus::Feasible, e};
    }
    return {DeterrenceStatus::Infeasible, std::numeric_limits<double>::quiet_NaN()};
  }
  const RootResult r = find_root_decreasing([&](double e) { return g(e) - tol.tie_tol; }, 0.0, 1.0, tol);
  switch (r.verdict) {
    case RootVerdict::BelowRange: return {DeterrenceStatus::Free, 0.0};
    case RootVerdict::AboveRange: return {DeterrenceStatus::Infeasible, std::numeric_limits<double>::quiet_NaN()};
    case RootVerdict::Root: break;
  }
  return {DeterrenceStatus::Feasible, r.x};
}

inline Deterrence deterrence_commitment(const Scenario& scn, const SpeTwoOptions& opts = {}) {
  return deterrence_commitment(GameModel(scn, opts.tol), opts);
}

inline Regime classify_profile(const CommitmentProfile& profile, double zero_tol) {
  const auto act = profile.active();
  if (act.empty()) return Regime::AllOut;
  if (act.size() == 1) {
    if (act[0] != 0) return Regime::FollowerMonopoly;
    return profile[0].e() > zero_tol ? Regime::MonopolyDeterrence : Regime::MonopolyZeroCommit;
  }
  return act.size() == profile.size() ? Regime::SharedMarket : Regime::Mixed;
}

namespace detail {

inline SpeOutcome finish_outcome(const GameModel& model, CommitmentProfile profile, SpeDiagnostics diag) {
  const Scenario& scn = model.scenario();
  SpeOutcome out;
  out.profile = std::move(profile);
  out.diagnostics = diag;
  out.utilities.assign(scn.issuer_count(), 0.0);
  if (out.profile.active().empty()) {
    out.alloc.profile = out.profile;
    out.alloc.x = Matrix::Zero(static_cast<Eigen::Index>(scn.users()), static_cast<Eigen::Index>(scn.issuer_count()));
  } else {
    out.alloc = allocate_T(model.system(), scn, out.profile);
    const Vector x = out.alloc.totals();
    for (std::size_t p = 0; p < scn.issuer_count(); ++p)
      if (out.profile[p].in())
        out.utilities[p] = x(static_cast<Eigen::Index>(p)) - model.cost(p, out.profile[p].e());
  }
  out.regime = classify_profile(out.profile, model.tolerances().opt_tol);
  return out;
}

inline double lattice_point(int j, int n) { return j == n ? 1.0 : static_cast<double>(j) / n; }

// Largest argument among points within tie_tol of the best value.
inline std::optional<std::pair<double, double>> pick_largest(const std::vector<std::pair<double, double>>& pts,
                                                             double tie_tol) {
  if (pts.empty()) return std::nullopt;
  double top = -std::numeric_limits<double>::infinity();
  for (const auto& p : pts) top = std::max(top, p.second);
  std::optional<std::pair<double, double>> best;
  for (const auto& p : pts)
    if (p.second >= top - tie_tol && (!best || p.first > best->first)) best = p;
  return best;
}

}  // namespace detail

// Two issuers, leader first. Continuous mode follows the share / deter / out
// case logic; lattice mode evaluates the leader's payoff at every lattice point.
inline SpeOutcome spe_two(const Scenario& scn, const SpeTwoOptions& opts = {}) {
  if (scn.issuer_count() != 2) throw Error(ErrorKind::InvalidArgument, "spe_two needs exactly two issuers");
  opts.tol.validate();
  require_beta_bound(scn, opts.tol);
  const GameModel model(scn, opts.tol);
  const auto& tol = opts.tol;
  SpeDiagnostics diag;

  const Deterrence det = deterrence_commitment(model, opts);
  diag.deterrence = det.status;
  if (det.status != DeterrenceStatus::Infeasible) {
    diag.deterrence_root = det.commitment;
    diag.deterrence_commit = det.commitment;
    diag.deterrence_utility = model.M() - model.cost(0, det.commitment);
  }

  // Leader's payoff when the follower replies optimally but is kept In.
  auto share_value = [&](double e_a) {
    const auto reply = best_response_follower(model, IssuerChoice::commit(e_a), opts);
    return model.utility(0, CommitmentProfile({IssuerChoice::commit(e_a), IssuerChoice::commit(reply.best_commit)}));
  };

  CommitmentProfile chosen({IssuerChoice::out(), IssuerChoice::out()});
  if (opts.lattice) {
    std::vector<std::pair<double, double>> all, shared;  // (e_a, leader utility)
    for (int j = 0; j <= opts.grid_n; ++j) {
      const double e = detail::lattice_point(j, opts.grid_n);
      const auto reply = best_response_follower(model, IssuerChoice::commit(e), opts);
      const double u = reply.choice.in()
                           ? model.utility(0, CommitmentProfile({IssuerChoice::commit(e), reply.choice}))
                           : model.M() - model.cost(0, e);
      all.emplace_back(e, u);
      if (reply.choice.in()) shared.emplace_back(e, u);
    }
    if (const auto best = detail::pick_largest(shared, tol.tie_tol)) {
      diag.leader_share_commit = best->first;
      diag.follower_share_commit =
          best_response_follower(model, IssuerChoice::commit(best->first), opts).best_commit;
      diag.share_utility = best->second;
    }
    if (const auto best = detail::pick_largest(all, tol.tie_tol); best && best->second > tol.tie_tol)
      chosen[0] = IssuerChoice::commit(best->first);
  } else {
    const ScalarMax share = maximize_scalar(share_value, 0.0, 1.0, opts.grid_n, tol);
    const double e_share = std::clamp(share.arg, 0.0, 1.0);
    const auto reply = best_response_follower(model, IssuerChoice::commit(e_share), opts);
    diag.leader_share_commit = e_share;
    diag.follower_share_commit = reply.best_commit;
    diag.share_utility = share.value;
    const bool share_ok = reply.choice.in();
    const bool deter_ok = det.status != DeterrenceStatus::Infeasible;
    double e_pick = 0.0, u_pick = -std::numeric_limits<double>::infinity();
    if (deter_ok && (!share_ok || *diag.deterrence_utility >= share.value - tol.tie_tol)) {
      e_pick = det.commitment;
      u_pick = *diag.deterrence_utility;
    } else if (share_ok) {
      e_pick = e_share;
      u_pick = share.value;
    }
    if (u_pick > tol.tie_tol) chosen[0] = IssuerChoice::commit(e_pick);
  }
  chosen[1] = best_response_follower(model, chosen[0], opts).choice;
  return detail::finish_outcome(model, chosen, diag);
}

namespace detail {

// Backward induction over T issuers on a commitment grid. A subgame state is
// the number of In issuers so far and the sum of their F_t; the last mover's
// best commitment depends only on the final In-count, so it is tabulated.
class SequentialSolver {
 public:
  SequentialSolver(const GameModel& model, const SpeTOptions& opts) : model_(model), opts_(opts) {
    const std::size_t T = model_.issuers();
    for (int j = 0; j <= opts_.grid_n; ++j) grid_.push_back(lattice_point(j, opts_.grid_n));
    const std::size_t last = T - 1;
    for (std::size_t c = 0; c < T; ++c) {
      const double share = 1.0 - 1.0 / static_cast<double>(c + 1);
      auto part = [&](double e) { return share * model_.aggregate(last, e) - model_.cost(last, e); };
      const auto [e, v] = search(part);
      last_e_.push_back(e);
      last_value_.push_back(v);
    }
  }

  std::uint64_t projected_evaluations() const {
    const double per_level = static_cast<double>(opts_.grid_n + 2 + 20 * opts_.refine_rounds);
    return static_cast<std::uint64_t>(std::pow(per_level, static_cast<double>(model_.issuers() - 1)));
  }

  std::uint64_t evaluations() const { return evals_.load(); }

  CommitmentProfile solve() {
    const std::size_t T = model_.issuers();
    CommitmentProfile profile;
    int count = 0;
    double phi = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      const Node node = t + 1 == T ? last_level(count, phi) : best_action(t, count, phi, t == 0);
      profile.choices.push_back(node.in ? IssuerChoice::commit(node.e) : IssuerChoice::out());
      if (node.in) {
        ++count;
        phi += model_.aggregate(t, node.e);
      }
    }
    return profile;
  }

 private:
  struct Node {
    bool in;
    double e;
    int count;   // final In-count of the subgame
    double phi;  // final sum of F over In issuers
  };

  struct Candidate {
    double e;
    double u;
    int count;
    double phi;
  };

  // Grid search plus local refinement for a one-dimensional payoff.
  template <typename F>
  std::pair<double, double> search(F&& value) const {
    std::vector<std::pair<double, double>> pts;
    for (double e : grid_) pts.emplace_back(e, value(e));
    auto pick = [&] {
      double top = -std::numeric_limits<double>::infinity();
      for (const auto& p : pts) top = std::max(top, p.second);
      std::pair<double, double> best{-1.0, top};
      for (const auto& p : pts)
        if (p.second >= top - opts_.tol.tie_tol && p.first > best.first) best = p;
      return best;
    };
    auto best = pick();
    double h = 1.0 / opts_.grid_n;
    for (int r = 0; r < opts_.refine_rounds; ++r) {
      h /= 10.0;
      const double centre = best.first;
      for (int i = -10; i <= 10; ++i) {
        const double e = centre + i * h;
        if (i == 0 || e < 0.0 || e > 1.0) continue;
        pts.emplace_back(e, value(e));
      }
      best = pick();
    }
    return best;
  }

  Node last_level(int count, double phi) const {
    const std::size_t last = model_.issuers() - 1;
    const double u = (model_.M() - phi) / (count + 1) + last_value_[count];
    if (u > opts_.tol.tie_tol) return {true, last_e_[count], count + 1, phi + model_.aggregate(last, last_e_[count])};
    return {false, 0.0, count, phi};
  }

  Node subgame(std::size_t t, int count, double phi) {
    if (t + 1 == model_.issuers()) {
      evals_.fetch_add(1, std::memory_order_relaxed);
      return last_level(count, phi);
    }
    return best_action(t, count, phi, false);
  }

  Candidate evaluate(std::size_t t, int count, double phi, double e) {
    const double f = model_.aggregate(t, e);
    const Node sub = subgame(t + 1, count + 1, phi + f);
    const double u = (model_.M() - sub.phi) / sub.count + f - model_.cost(t, e);
    return {e, u, sub.count, sub.phi};
  }

  void evaluate_all(std::size_t t, int count, double phi, const std::vector<double>& es,
                    std::vector<Candidate>& out, bool parallel) {
    const std::size_t start = out.size();
    out.resize(start + es.size());
    if (!parallel || es.size() < 2) {
      for (std::size_t a = 0; a < es.size(); ++a) out[start + a] = evaluate(t, count, phi, es[a]);
      return;
    }
    unsigned workers = opts_.threads ? opts_.threads : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(es.size()));
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < workers; ++k)
      pool.emplace_back([&] {
        for (std::size_t a; (a = next.fetch_add(1)) < es.size();) out[start + a] = evaluate(t, count, phi, es[a]);
      });
    for (auto& th : pool) th.join();
  }

  // Largest e among candidates within tie_tol of the best utility.
  const Candidate* pick(const std::vector<Candidate>& cands) const {
    double top = -std::numeric_limits<double>::infinity();
    for (const auto& c : cands) top = std::max(top, c.u);
    const Candidate* best = nullptr;
    for (const auto& c : cands)
      if (c.u >= top - opts_.tol.tie_tol && (!best || c.e > best->e)) best = &c;
    return best;
  }

  Node best_action(std::size_t t, int count, double phi, bool parallel) {
    std::vector<Candidate> cands;
    cands.reserve(grid_.size() + 20 * static_cast<std::size_t>(opts_.refine_rounds));
    evaluate_all(t, count, phi, grid_, cands, parallel);
    const Candidate* best = pick(cands);
    double h = 1.0 / opts_.grid_n;
    for (int r = 0; r < opts_.refine_rounds; ++r) {
      h /= 10.0;
      const double centre = best->e;
      std::vector<double> es;
      for (int i = -10; i <= 10; ++i) {
        const double e = centre + i * h;
        if (i != 0 && e >= 0.0 && e <= 1.0) es.push_back(e);
      }
      evaluate_all(t, count, phi, es, cands, parallel);
      best = pick(cands);
    }
    const Node out_node = subgame(t + 1, count, phi);
    if (best->u > opts_.tol.tie_tol) return {true, best->e, best->count, best->phi};
    return {false, 0.0, out_node.count, out_node.phi};
  }

  const GameModel& model_;
  SpeTOptions opts_;
  std::vector<double> grid_;
  std::vector<double> last_e_, last_value_;
  std::atomic<std::uint64_t> evals_{0};
};

}  // namespace detail

inline SpeOutcome spe_T(const Scenario& scn, const SpeTOptions& opts = {}) {
  if (scn.issuer_count() < 2) throw Error(ErrorKind::InvalidArgument, "spe_T needs at least two issuers");
  if (opts.grid_n < 1 || opts.refine_rounds < 0)
    throw Error(ErrorKind::InvalidArgument, "grid_n must be >= 1 and refine_rounds >= 0");
  opts.tol.validate();
  require_beta_bound(scn, opts.tol);
  const GameModel model(scn, opts.tol);
  detail::SequentialSolver solver(model, opts);
  const std::uint64_t projected = solver.projected_evaluations();
  if (projected > opts.max_evaluations)
    throw Error(ErrorKind::BudgetExceeded, "projected " + std::to_string(projected) +
                                               " leaf evaluations exceed the cap of " +
                                               std::to_string(opts.max_evaluations));
  CommitmentProfile profile = solver.solve();
  SpeDiagnostics diag;
  diag.evaluations = solver.evaluations();
  return detail::finish_outcome(model, std::move(profile), diag);
}

// dX_p/de_p = (1 - 1/T') sum_j s_j f'_jp(e_p)
inline double commitment_effectiveness(const Scenario& scn, const CommitmentProfile& profile, std::size_t p,
                                       const Tolerances& tol = {}) {
  scn.check_profile(profile);
  if (!profile[p].in()) throw Error(ErrorKind::InvalidArgument, "issuer " + std::to_string(p) + " is Out");
  const auto act = profile.active();
  const UserSystem sys(scn, tol);
  const Vector& s = sys.column_sums();
  const auto& f = scn.issuers[p].liquidity;
  double sum = 0.0;
  for (std::size_t j = 0; j < scn.users(); ++j) sum += s(static_cast<Eigen::Index>(j)) * f.derivative(j, profile[p].e());
  return (1.0 - 1.0 / static_cast<double>(act.size())) * sum;
}

}  // namespace netcurrency
