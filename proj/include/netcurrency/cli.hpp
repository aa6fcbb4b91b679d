#pragma once

#include <charconv>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <CLI11.hpp>

#include "allocation.hpp"
#include "analysis.hpp"
#include "config.hpp"
#include "errors.hpp"
#include "issuer_game.hpp"
#include "network.hpp"

namespace netcurrency::cli {

// 12 significant digits, '.' separator, independent of the locale.
inline std::string fmt(double v) {
  if (v == 0.0) return "0";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
  return std::string(buf, res.ptr);
}

inline std::string fixed(double v, int digits) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, digits);
  std::string s(buf, res.ptr);
  if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') s.erase(0, 1);
  return s;
}

inline std::string choice_text(const IssuerChoice& c) { return c.in() ? fmt(c.e()) : "out"; }

inline CommitmentProfile parse_commitments(std::string_view text, std::size_t issuers) {
  CommitmentProfile p;
  for (auto field : detail::split_fields(text)) {
    field = detail::trim(field);
    if (field == "out" || field == "Out" || field == "OUT") {
      p.choices.push_back(IssuerChoice::out());
      continue;
    }
    double e = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), e);
    if (ec != std::errc() || ptr != field.data() + field.size() || field.empty())
      throw Error(ErrorKind::InvalidArgument, "commitment '" + std::string(field) + "' is neither a number nor 'out'");
    p.choices.push_back(IssuerChoice::commit(e));
  }
  if (p.size() != issuers)
    throw Error(ErrorKind::InvalidArgument, "expected " + std::to_string(issuers) + " commitments, got " +
                                                std::to_string(p.size()));
  return p;
}

struct Loaded {
  ScenarioConfig config;
  Scenario scenario;
};

inline Loaded load(const std::string& path) {
  Loaded l;
  l.config = parse_config(read_text_file(path));
  l.scenario = build_scenario(l.config, std::filesystem::path(path).parent_path());
  return l;
}

struct SolverFlags {
  std::optional<int> grid_n;
  std::optional<int> refine_rounds;
  bool lattice = false;
  std::optional<std::uint64_t> max_evaluations;
  std::optional<unsigned> threads;
  std::optional<double> k;
  std::optional<double> beta;

  void attach(CLI::App* cmd) {
    cmd->add_option("--grid-n", grid_n, "grid intervals per commitment axis");
    cmd->add_option("--refine-rounds", refine_rounds, "local refinement rounds (T-issuer solver)");
    cmd->add_flag("--lattice", lattice, "restrict two-issuer commitments to the grid");
    cmd->add_option("--max-evaluations", max_evaluations, "leaf evaluation cap (T-issuer solver)");
    cmd->add_option("--threads", threads, "worker threads, 0 for all cores");
    cmd->add_option("--k", k, "override the commitment-cost weight k");
    cmd->add_option("--beta", beta, "override beta");
  }

  void apply(Loaded& l) const {
    auto& s = l.config.solver;
    if (grid_n) s.grid_n = *grid_n;
    if (refine_rounds) s.refine_rounds = *refine_rounds;
    if (lattice) s.lattice = true;
    if (max_evaluations) s.max_evaluations = *max_evaluations;
    if (threads) s.threads = *threads;
    if (k) l.scenario.k = *k;
    if (beta) l.scenario.beta = *beta;
  }
};

inline void cmd_centrality(const Loaded& l, std::optional<double> lambda, std::ostream& out) {
  const double lam = lambda.value_or(1.0 / l.scenario.beta);
  const Vector kappa = katz_bonacich(l.scenario.net, lam, tolerances_of(l.config.solver));
  out << "label,katz\n";
  for (std::size_t i = 0; i < l.scenario.users(); ++i)
    out << l.scenario.net.labels()[i] << ',' << fmt(kappa(static_cast<Eigen::Index>(i))) << '\n';
}

inline void cmd_allocate(const Loaded& l, const std::string& commitments, std::ostream& out, std::ostream& diag) {
  const Scenario& scn = l.scenario;
  const auto profile = parse_commitments(commitments, scn.issuer_count());
  const Tolerances tol = tolerances_of(l.config.solver);
  const Allocation a = scn.issuer_count() == 2 ? allocate_two(scn, profile[0], profile[1], tol)
                                               : allocate_T(scn, profile, tol);
  out << "user,currency,usage\n";
  for (std::size_t i = 0; i < scn.users(); ++i)
    for (std::size_t p = 0; p < scn.issuer_count(); ++p)
      out << scn.net.labels()[i] << ',' << scn.issuers[p].label << ','
          << fmt(a.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p))) << '\n';
  const Vector x = a.totals();
  for (std::size_t p = 0; p < scn.issuer_count(); ++p)
    out << "TOTAL," << scn.issuers[p].label << ',' << fmt(x(static_cast<Eigen::Index>(p))) << '\n';
  diag << "euler_residual=" << fmt(a.active().size() >= 2 ? euler_residual(scn, a) : 0.0) << '\n';
  diag << "min_usage=" << fmt(a.min_usage()) << '\n';
}

inline void print_outcome(const Scenario& scn, const SpeOutcome& o, const std::string& mode, std::ostream& out) {
  const std::size_t T = scn.issuer_count();
  const Vector x = o.alloc.totals();
  const double M = scn.total_volume();
  auto join = [&](auto&& f) {
    std::string s;
    for (std::size_t p = 0; p < T; ++p) s += (p ? "," : "") + f(p);
    return s;
  };
  out << "mode=" << mode << '\n';
  out << "regime=" << to_string(o.regime) << '\n';
  out << "issuers=" << join([&](std::size_t p) { return scn.issuers[p].label; }) << '\n';
  out << "e=" << join([&](std::size_t p) { return choice_text(o.profile[p]); }) << '\n';
  out << "X=" << join([&](std::size_t p) { return fmt(x(static_cast<Eigen::Index>(p))); }) << '\n';
  out << "share=" << join([&](std::size_t p) { return fmt(x(static_cast<Eigen::Index>(p)) / M); }) << '\n';
  out << "u=" << join([&](std::size_t p) { return fmt(o.utilities[p]); }) << '\n';
  const auto& d = o.diagnostics;
  if (d.leader_share_commit) out << "e_tilde_leader=" << fmt(*d.leader_share_commit) << '\n';
  if (d.follower_share_commit) out << "e_tilde_follower=" << fmt(*d.follower_share_commit) << '\n';
  if (d.share_utility) out << "u_share=" << fmt(*d.share_utility) << '\n';
  if (d.deterrence) out << "deterrence=" << to_string(*d.deterrence) << '\n';
  if (d.deterrence_root) out << "e_hat=" << fmt(*d.deterrence_root) << '\n';
  if (d.deterrence_commit) out << "e_deter=" << fmt(*d.deterrence_commit) << '\n';
  if (d.deterrence_utility) out << "u_deter=" << fmt(*d.deterrence_utility) << '\n';
  if (d.evaluations) out << "evaluations=" << d.evaluations << '\n';
  out << '\n';
  out << "issuer      choice    usage     share     utility\n";
  for (std::size_t p = 0; p < T; ++p) {
    std::string label = scn.issuers[p].label;
    label.resize(std::max<std::size_t>(label.size(), 11), ' ');
    std::string ch = o.profile[p].in() ? fixed(o.profile[p].e(), 4) : "out";
    ch.resize(std::max<std::size_t>(ch.size(), 9), ' ');
    std::string xs = fixed(x(static_cast<Eigen::Index>(p)), 4);
    xs.resize(std::max<std::size_t>(xs.size(), 9), ' ');
    std::string sh = fixed(x(static_cast<Eigen::Index>(p)) / M, 4);
    sh.resize(std::max<std::size_t>(sh.size(), 9), ' ');
    out << label << ' ' << ch << ' ' << xs << ' ' << sh << ' ' << fixed(o.utilities[p], 4) << '\n';
  }
}

inline void cmd_spe(const Loaded& l, std::string mode, std::ostream& out) {
  const Scenario& scn = l.scenario;
  if (mode.empty()) mode = scn.issuer_count() == 2 ? "two" : "t";
  if (mode == "two") {
    if (scn.issuer_count() != 2) throw Error(ErrorKind::InvalidArgument, "--mode two needs exactly two issuers");
    print_outcome(scn, spe_two(scn, spe_two_options(l.config.solver)), mode, out);
  } else if (mode == "t") {
    print_outcome(scn, spe_T(scn, spe_t_options(l.config.solver)), mode, out);
  } else {
    throw Error(ErrorKind::InvalidArgument, "--mode must be 'two' or 't'");
  }
}

struct ThresholdFlags {
  std::optional<double> k_max;
  int points = 64;
  double rel_width = 1e-4;
};

inline ThresholdOptions threshold_options(const Loaded& l, const ThresholdFlags& f) {
  ThresholdOptions o;
  o.k_max = f.k_max;
  o.scan_points = f.points;
  o.rel_width = f.rel_width;
  o.spe = spe_two_options(l.config.solver);
  if (l.config.solver.threads) o.threads = *l.config.solver.threads;
  return o;
}

inline void cmd_thresholds(const Loaded& l, const ThresholdFlags& f, std::ostream& out, std::ostream& diag) {
  const RegimeMap map = find_thresholds(l.scenario, threshold_options(l, f));
  out << "boundary,k_low,k_high,regime_left,regime_right\n";
  bool lower = false, upper = false;
  for (const auto& b : map.boundaries) {
    std::string name = "other";
    if (!lower && b.left == Regime::SharedMarket) {
      name = "k_lower";
      lower = true;
    } else if (!upper && b.left == Regime::MonopolyDeterrence && b.right == Regime::MonopolyZeroCommit) {
      name = "k_upper";
      upper = true;
    }
    out << name << ',' << fmt(b.k_low) << ',' << fmt(b.k_high) << ',' << to_string(b.left) << ','
        << to_string(b.right) << '\n';
  }
  diag << "k_max=" << fmt(map.k_max) << '\n';
  diag << "symmetric=" << (map.symmetric ? "true" : "false") << '\n';
  diag << "monotone=" << (map.monotone ? "true" : "false") << '\n';
  for (const auto& d : map.diagnostics) diag << "note: " << d << '\n';
}

struct SweepFlags {
  std::string param;
  double from = 0.0;
  double to = 1.0;
  int steps = 11;
  std::string mode;
  std::string bias_issuer;
  bool thresholds = false;
};

inline void cmd_sweep(const Loaded& l, const SweepFlags& f, std::ostream& out) {
  const Scenario& scn = l.scenario;
  SweepOptions o;
  if (f.param == "beta") o.param = SweepParam::Beta;
  else if (f.param == "k") o.param = SweepParam::K;
  else if (f.param == "m_scale") o.param = SweepParam::MScale;
  else if (f.param == "bias") o.param = SweepParam::Bias;
  else throw Error(ErrorKind::InvalidArgument, "--param must be beta, k, m_scale or bias");
  o.from = f.from;
  o.to = f.to;
  o.steps = f.steps;
  std::string mode = f.mode.empty() ? (scn.issuer_count() == 2 ? "two" : "t") : f.mode;
  if (mode == "two") {
    if (scn.issuer_count() != 2) throw Error(ErrorKind::InvalidArgument, "--mode two needs exactly two issuers");
    o.mode = SolverMode::Two;
  } else if (mode == "t") {
    o.mode = SolverMode::T;
  } else {
    throw Error(ErrorKind::InvalidArgument, "--mode must be 'two' or 't'");
  }
  if (!f.bias_issuer.empty()) {
    std::size_t p = 0;
    while (p < scn.issuer_count() && scn.issuers[p].label != f.bias_issuer) ++p;
    if (p == scn.issuer_count()) throw Error(ErrorKind::InvalidArgument, "unknown issuer '" + f.bias_issuer + "'");
    o.bias_issuer = p;
  }
  if (f.thresholds && scn.issuer_count() != 2)
    throw Error(ErrorKind::InvalidArgument, "--thresholds needs two issuers");
  o.thresholds = f.thresholds;
  o.two = spe_two_options(l.config.solver);
  o.t = spe_t_options(l.config.solver);
  o.threshold.spe = o.two;
  if (l.config.solver.threads) o.threads = *l.config.solver.threads;

  const auto rows = sweep(scn, o);
  const std::size_t T = scn.issuer_count();
  out << "param,regime";
  for (std::size_t p = 1; p <= T; ++p) out << ",e_" << p;
  for (std::size_t p = 1; p <= T; ++p) out << ",X_" << p;
  for (std::size_t p = 1; p <= T; ++p) out << ",share_" << p;
  if (o.thresholds) out << ",k_lower";
  out << ",error\n";
  for (const auto& r : rows) {
    out << fmt(r.value) << ',';
    if (r.outcome) {
      const Vector x = r.outcome->alloc.totals();
      const double M = apply_parameter(scn, o.param, r.value, o.bias_issuer).total_volume();
      out << to_string(r.outcome->regime);
      for (std::size_t p = 0; p < T; ++p) out << ',' << choice_text(r.outcome->profile[p]);
      for (std::size_t p = 0; p < T; ++p) out << ',' << fmt(x(static_cast<Eigen::Index>(p)));
      for (std::size_t p = 0; p < T; ++p) out << ',' << fmt(x(static_cast<Eigen::Index>(p)) / M);
    } else {
      out << "error";
      for (std::size_t p = 0; p < 3 * T; ++p) out << ',';
    }
    if (o.thresholds) out << ',' << (r.k_lower ? fmt(*r.k_lower) : "");
    std::string err = r.error;
    for (auto& c : err)
      if (c == ',' || c == '\n') c = ';';
    out << ',' << err << '\n';
  }
}

inline void cmd_gini(const Loaded& l, const std::string& commitments, std::ostream& out) {
  const Scenario& scn = l.scenario;
  const auto profile = parse_commitments(commitments, scn.issuer_count());
  const Tolerances tol = tolerances_of(l.config.solver);
  const UserSystem sys(scn, tol);
  const Allocation a = allocate_T(sys, scn, profile);
  out << "user,gini,decomposition,monotone\n";
  for (std::size_t i = 0; i < scn.users(); ++i) {
    const auto dec = gini_centrality_decomposition(sys, scn, a, i);
    out << scn.net.labels()[i] << ',' << fmt(gini(a, i)) << ',' << fmt(dec.value) << ','
        << (dec.monotone ? "true" : "false") << '\n';
  }
}

// Returns the process exit code: 0 on success, 2 on any usage, config or solver error.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Currency competition on trade networks"};
  app.require_subcommand(1);
  std::string config;
  std::ostringstream buffer;
  std::ostringstream diag;

  auto* c_cent = app.add_subcommand("centrality", "Katz-Bonacich centrality per user");
  std::optional<double> lambda;
  c_cent->add_option("config", config, "scenario JSON")->required();
  c_cent->add_option("--lambda", lambda, "decay factor (default 1/beta)");

  auto* c_alloc = app.add_subcommand("allocate", "user allocation for given commitments");
  std::string commitments;
  SolverFlags alloc_flags;
  c_alloc->add_option("config", config, "scenario JSON")->required();
  c_alloc->add_option("--commitments", commitments, "comma list of levels in [0,1] or 'out'")->required();
  alloc_flags.attach(c_alloc);

  auto* c_spe = app.add_subcommand("spe", "subgame-perfect equilibrium");
  std::string mode;
  SolverFlags spe_flags;
  c_spe->add_option("config", config, "scenario JSON")->required();
  c_spe->add_option("--mode", mode, "two | t");
  spe_flags.attach(c_spe);

  auto* c_thr = app.add_subcommand("thresholds", "regime boundaries in k");
  ThresholdFlags thr;
  SolverFlags thr_flags;
  c_thr->add_option("config", config, "scenario JSON")->required();
  c_thr->add_option("--k-max", thr.k_max, "upper end of the k scan (default M/c(0))");
  c_thr->add_option("--points", thr.points, "coarse scan points");
  c_thr->add_option("--rel-width", thr.rel_width, "bracket width relative to k_max");
  thr_flags.attach(c_thr);

  auto* c_sweep = app.add_subcommand("sweep", "equilibria over a parameter range");
  SweepFlags sw;
  SolverFlags sweep_flags;
  c_sweep->add_option("config", config, "scenario JSON")->required();
  c_sweep->add_option("--param", sw.param, "beta | k | m_scale | bias")->required();
  c_sweep->add_option("--from", sw.from, "first value")->required();
  c_sweep->add_option("--to", sw.to, "last value")->required();
  c_sweep->add_option("--steps", sw.steps, "number of points");
  c_sweep->add_option("--mode", sw.mode, "two | t");
  c_sweep->add_option("--bias-issuer", sw.bias_issuer, "issuer whose bias is scaled (default: first)");
  c_sweep->add_flag("--thresholds", sw.thresholds, "add a k_lower column");
  sweep_flags.attach(c_sweep);

  auto* c_gini = app.add_subcommand("gini", "Gini concentration per user");
  std::string gini_commitments;
  c_gini->add_option("config", config, "scenario JSON")->required();
  c_gini->add_option("--commitments", gini_commitments, "comma list of levels in [0,1] or 'out'")->required();

  std::vector<std::string> argv_store = args;
  if (argv_store.empty()) argv_store.push_back("netcurrency");
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    Loaded l = load(config);
    if (c_cent->parsed()) {
      cmd_centrality(l, lambda, buffer);
    } else if (c_alloc->parsed()) {
      alloc_flags.apply(l);
      cmd_allocate(l, commitments, buffer, diag);
    } else if (c_spe->parsed()) {
      spe_flags.apply(l);
      cmd_spe(l, mode, buffer);
    } else if (c_thr->parsed()) {
      thr_flags.apply(l);
      cmd_thresholds(l, thr, buffer, diag);
    } else if (c_sweep->parsed()) {
      sweep_flags.apply(l);
      cmd_sweep(l, sw, buffer);
    } else if (c_gini->parsed()) {
      cmd_gini(l, gini_commitments, buffer);
    }
  } catch (const std::exception& e) {
    err << diag.str() << "error: " << e.what() << '\n';
    return 2;
  }
  out << buffer.str();
  err << diag.str();
  return 0;
}

}  // namespace netcurrency::cli
