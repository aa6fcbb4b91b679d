#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "errors.hpp"
#include "issuer_game.hpp"
#include "network.hpp"
#include "scenario.hpp"

namespace netcurrency {

inline Regime classify_regime(const Scenario& scn, const SpeTwoOptions& opts = {}) {
  return spe_two(scn, opts).regime;
}

// f_ia = f_ib for every user and both issuers share the cost function.
inline bool is_symmetric(const Scenario& scn) {
  if (scn.issuer_count() != 2) return false;
  const auto& a = scn.issuers[0];
  const auto& b = scn.issuers[1];
  if (a.liquidity.mu != b.liquidity.mu || a.liquidity.alpha != b.liquidity.alpha ||
      a.liquidity.offset != b.liquidity.offset || a.cost.c0 != b.cost.c0 || a.cost.rho != b.cost.rho)
    return false;
  for (std::size_t i = 0; i < scn.users(); ++i)
    if (a.liquidity.bias_of(i) != b.liquidity.bias_of(i)) return false;
  return true;
}

namespace detail {

// Runs job(i) for i in [0, n) on a small thread pool.
template <typename Job>
void parallel_for(std::size_t n, unsigned threads, Job&& job) {
  unsigned workers = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) job(i);
    });
  for (auto& th : pool) th.join();
}

}  // namespace detail

struct ThresholdOptions {
  std::optional<double> k_max;  // default M / min_p c_p(0)
  int scan_points = 64;
  double rel_width = 1e-4;
  unsigned threads = 0;
  SpeTwoOptions spe;
};

struct RegimeBoundary {
  double k_low;
  double k_high;
  Regime left;
  Regime right;
};

struct RegimeMap {
  std::vector<double> k_grid;
  std::vector<Regime> regimes;
  std::vector<RegimeBoundary> boundaries;
  std::optional<double> k_lower;
  std::optional<double> k_upper;
  double k_max = 0.0;
  double bracket_width = 0.0;
  bool symmetric = false;
  bool monotone = true;
  std::vector<std::string> diagnostics;
};

// Scans k over [0, k_max) and bisects every regime change.
inline RegimeMap find_thresholds(const Scenario& scn, const ThresholdOptions& opts = {}) {
  if (scn.issuer_count() != 2) throw Error(ErrorKind::InvalidArgument, "find_thresholds needs two issuers");
  if (opts.scan_points < 2) throw Error(ErrorKind::InvalidArgument, "scan_points must be at least 2");
  if (!(opts.rel_width > 0.0)) throw Error(ErrorKind::InvalidArgument, "rel_width must be > 0");
  scn.validate();
  RegimeMap map;
  map.k_max = opts.k_max.value_or(scn.total_volume() / scn.min_base_cost());
  if (!(map.k_max > 0.0)) throw Error(ErrorKind::InvalidArgument, "k_max must be > 0");
  map.symmetric = is_symmetric(scn);
  const double width = map.k_max * opts.rel_width;

  auto classify = [&](double k) {
    Scenario s = scn;
    s.k = k;
    return classify_regime(s, opts.spe);
  };

  const auto n = static_cast<std::size_t>(opts.scan_points);
  map.k_grid.resize(n);
  map.regimes.resize(n);
  for (std::size_t j = 0; j < n; ++j) map.k_grid[j] = map.k_max * static_cast<double>(j) / static_cast<double>(n);
  detail::parallel_for(n, opts.threads, [&](std::size_t j) { map.regimes[j] = classify(map.k_grid[j]); });

  // Bisect [a, b] until narrow; a further change inside [b_new, b] is resolved in turn.
  auto resolve = [&](double a, Regime ra, double b, Regime rb) {
    while (ra != rb) {
      double lo = a, hi = b;
      Regime rhi = rb;
      while (hi - lo > width) {
        const double mid = 0.5 * (lo + hi);
        const Regime rm = classify(mid);
        if (rm == ra) {
          lo = mid;
        } else {
          hi = mid;
          rhi = rm;
        }
      }
      map.boundaries.push_back({lo, hi, ra, rhi});
      map.bracket_width = std::max(map.bracket_width, hi - lo);
      a = hi;
      ra = rhi;
    }
  };
  for (std::size_t j = 0; j + 1 < n; ++j)
    if (map.regimes[j] != map.regimes[j + 1]) resolve(map.k_grid[j], map.regimes[j], map.k_grid[j + 1], map.regimes[j + 1]);

  for (const auto& b : map.boundaries) {
    const double mid = 0.5 * (b.k_low + b.k_high);
    if (!map.k_lower && b.left == Regime::SharedMarket) map.k_lower = mid;
    if (!map.k_upper && b.left == Regime::MonopolyDeterrence && b.right == Regime::MonopolyZeroCommit) map.k_upper = mid;
  }

  // Expected order: SharedMarket, MonopolyDeterrence, MonopolyZeroCommit.
  auto rank = [](Regime r) {
    switch (r) {
      case Regime::SharedMarket: return 0;
      case Regime::MonopolyDeterrence: return 1;
      case Regime::MonopolyZeroCommit: return 2;
      default: return -1;
    }
  };
  int last = 0;
  for (const auto& b : map.boundaries) {
    const int l = rank(b.left), r = rank(b.right);
    if (l < 0 || r < 0 || r <= l || l < last) {
      map.monotone = false;
      map.diagnostics.push_back(std::string("regime change ") + to_string(b.left) + " -> " + to_string(b.right) +
                                " near k = " + std::to_string(0.5 * (b.k_low + b.k_high)) +
                                " breaks the shared / deterrence / zero-commitment order");
    }
    last = std::max(last, r);
  }
  if (!map.regimes.empty() && rank(map.regimes.front()) < 0) map.monotone = false;
  if (map.symmetric) {
    for (auto r : map.regimes)
      if (r == Regime::FollowerMonopoly) {
        map.monotone = false;
        map.diagnostics.push_back("FollowerMonopoly in a symmetric scenario");
        break;
      }
  }
  return map;
}

struct IntegrationReport {
  RegimeMap base;
  RegimeMap integrated;
  std::vector<double> effectiveness_base;        // per issuer, at the reference profile
  std::vector<double> effectiveness_integrated;
  std::vector<double> effectiveness_delta;
  bool symmetric = false;
  std::optional<bool> threshold_drops;  // k_lower(w') < k_lower(w), when both exist
  std::vector<std::string> diagnostics;
};

inline IntegrationReport integration_comparative(const Scenario& scn, const TradeNetwork& w_prime,
                                                 const ThresholdOptions& opts = {},
                                                 const std::vector<double>& reference = {0.5, 0.5}) {
  if (scn.issuer_count() != 2) throw Error(ErrorKind::InvalidArgument, "integration_comparative needs two issuers");
  const TradeNetwork wp = w_prime.reordered(scn.net.labels());
  const Integration rel = is_more_integrated(wp, scn.net);
  if (rel != Integration::StrictlyMore)
    throw Error(ErrorKind::NotComparable, std::string("w' is ") + to_string(rel) + " relative to w, not StrictlyMore");
  Scenario integrated = scn;
  integrated.net = wp;
  require_beta_bound(scn, opts.spe.tol);
  require_beta_bound(integrated, opts.spe.tol);

  IntegrationReport rep;
  rep.symmetric = is_symmetric(scn);
  ThresholdOptions o = opts;
  if (!o.k_max) o.k_max = scn.total_volume() / scn.min_base_cost();
  rep.base = find_thresholds(scn, o);
  rep.integrated = find_thresholds(integrated, o);
  const auto profile = CommitmentProfile::all_in(reference);
  for (std::size_t p = 0; p < 2; ++p) {
    rep.effectiveness_base.push_back(commitment_effectiveness(scn, profile, p, opts.spe.tol));
    rep.effectiveness_integrated.push_back(commitment_effectiveness(integrated, profile, p, opts.spe.tol));
    rep.effectiveness_delta.push_back(rep.effectiveness_integrated[p] - rep.effectiveness_base[p]);
  }
  if (rep.base.k_lower && rep.integrated.k_lower) {
    rep.threshold_drops = *rep.integrated.k_lower < *rep.base.k_lower;
    if (rep.symmetric && !*rep.threshold_drops)
      rep.diagnostics.push_back("k_lower did not decrease under integration");
  }
  return rep;
}

enum class SweepParam { Beta, K, MScale, Bias };

inline const char* to_string(SweepParam p) {
  switch (p) {
    case SweepParam::Beta: return "beta";
    case SweepParam::K: return "k";
    case SweepParam::MScale: return "m_scale";
    case SweepParam::Bias: return "bias";
  }
  return "?";
}

enum class SolverMode { Two, T };

struct SweepOptions {
  SweepParam param = SweepParam::K;
  double from = 0.0;
  double to = 1.0;
  int steps = 11;                // number of points, endpoints included
  std::size_t bias_issuer = 0;   // Bias multiplies this issuer's bias for every user
  SolverMode mode = SolverMode::Two;
  bool thresholds = false;       // also locate k_lower at each point (two issuers)
  unsigned threads = 0;
  SpeTwoOptions two;
  SpeTOptions t;
  ThresholdOptions threshold;
};

struct SweepRow {
  double value;
  std::optional<SpeOutcome> outcome;
  std::optional<double> k_lower;
  std::string error;  // empty on success
};

inline Scenario apply_parameter(const Scenario& scn, SweepParam param, double value, std::size_t bias_issuer) {
  Scenario s = scn;
  switch (param) {
    case SweepParam::Beta: s.beta = value; break;
    case SweepParam::K: s.k = value; break;
    case SweepParam::MScale: s.vols = UserVolumes(scn.vols.m() * value); break;
    case SweepParam::Bias: {
      auto& f = s.issuers.at(bias_issuer).liquidity;
      std::vector<double> b(s.users());
      for (std::size_t i = 0; i < s.users(); ++i) b[i] = f.bias_of(i) * value;
      f.bias = std::move(b);
      break;
    }
  }
  return s;
}

// One solve per point; failures are recorded per row. Rows follow the parameter order.
inline std::vector<SweepRow> sweep(const Scenario& scn, const SweepOptions& opts) {
  if (opts.steps < 1) throw Error(ErrorKind::InvalidArgument, "steps must be at least 1");
  if (opts.param == SweepParam::Bias && opts.bias_issuer >= scn.issuer_count())
    throw Error(ErrorKind::InvalidArgument, "bias issuer index out of range");
  std::vector<SweepRow> rows(static_cast<std::size_t>(opts.steps));
  for (int i = 0; i < opts.steps; ++i)
    rows[i].value = opts.steps == 1 ? opts.from : opts.from + (opts.to - opts.from) * i / (opts.steps - 1);
  SpeTOptions topts = opts.t;
  if (topts.threads == 0) topts.threads = 1;
  ThresholdOptions thr = opts.threshold;
  thr.threads = 1;
  detail::parallel_for(rows.size(), opts.threads, [&](std::size_t i) {
    try {
      const Scenario s = apply_parameter(scn, opts.param, rows[i].value, opts.bias_issuer);
      s.validate();
      rows[i].outcome = opts.mode == SolverMode::Two ? spe_two(s, opts.two) : spe_T(s, topts);
      if (opts.thresholds) rows[i].k_lower = find_thresholds(s, thr).k_lower;
    } catch (const Error& e) {
      rows[i].outcome.reset();
      rows[i].error = e.kind() == ErrorKind::BetaTooSmall ? std::string("skipped: ") + e.what() : e.what();
    }
  });
  return rows;
}

}  // namespace netcurrency
