#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "issuer_game.hpp"
#include "network.hpp"
#include "scenario.hpp"

namespace netcurrency {

struct NetworkConfig {
  std::optional<std::string> edges_file;  // relative paths resolve against the config's directory
  std::vector<Edge> edges;
  std::vector<std::string> nodes;  // optional explicit node order

  bool operator==(const NetworkConfig&) const = default;
};

struct UserConfig {
  std::string label;
  std::optional<double> m;
  std::map<std::string, double> bias;  // issuer label -> multiplier

  bool operator==(const UserConfig&) const = default;
};

struct IssuerConfig {
  std::string label;
  double mu = 1.0;
  double alpha = 1.0;
  double offset = 0.0;
  double c0 = 1.0;
  double rho = 1.0;

  bool operator==(const IssuerConfig&) const = default;
};

struct SolverConfig {
  std::optional<int> grid_n;
  std::optional<int> refine_rounds;
  std::optional<bool> lattice;
  std::optional<std::uint64_t> max_evaluations;
  std::optional<unsigned> threads;
  std::optional<double> solve_tol;
  std::optional<double> opt_tol;
  std::optional<double> root_tol;
  std::optional<double> tie_tol;
  std::optional<int> max_iter;

  bool operator==(const SolverConfig&) const = default;
};

struct ScenarioConfig {
  NetworkConfig network;
  std::vector<UserConfig> users;
  double beta = 0.0;
  double k = 0.0;
  std::vector<IssuerConfig> issuers;
  SolverConfig solver;

  bool operator==(const ScenarioConfig&) const = default;
};

namespace detail {

using nlohmann::json;

inline void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw Error(ErrorKind::ConfigError, where + " must be an object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* k : keys) ok = ok || key == k;
    if (!ok) throw Error(ErrorKind::ConfigError, "unknown key '" + key + "' in " + where);
  }
}

inline double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw Error(ErrorKind::ConfigError, where + " must be a number");
  return j.get<double>();
}

inline std::string text(const json& j, const std::string& where) {
  if (!j.is_string()) throw Error(ErrorKind::ConfigError, where + " must be a string");
  return j.get<std::string>();
}

template <typename T>
void optional_field(const json& obj, const char* key, std::optional<T>& out, const std::string& where) {
  if (!obj.contains(key)) return;
  const auto& v = obj.at(key);
  const std::string path = where + "." + key;
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) throw Error(ErrorKind::ConfigError, path + " must be true or false");
    out = v.get<bool>();
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) throw Error(ErrorKind::ConfigError, path + " must be an integer");
    if constexpr (std::is_unsigned_v<T>)
      if (!v.is_number_unsigned()) throw Error(ErrorKind::ConfigError, path + " must be non-negative");
    out = v.get<T>();
  } else {
    out = number(v, path);
  }
}

}  // namespace detail

inline ScenarioConfig parse_config(std::string_view text) {
  using detail::json;
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ConfigError, std::string("malformed JSON: ") + e.what());
  }
  detail::only_keys(root, "config", {"network", "users", "game", "issuers", "solver"});
  ScenarioConfig cfg;

  if (!root.contains("network")) throw Error(ErrorKind::ConfigError, "missing section 'network'");
  const auto& net = root.at("network");
  detail::only_keys(net, "network", {"edges_file", "edges", "nodes"});
  if (net.contains("edges_file")) cfg.network.edges_file = detail::text(net.at("edges_file"), "network.edges_file");
  if (net.contains("edges")) {
    if (!net.at("edges").is_array()) throw Error(ErrorKind::ConfigError, "network.edges must be an array");
    std::size_t idx = 0;
    for (const auto& e : net.at("edges")) {
      const std::string where = "network.edges[" + std::to_string(idx++) + "]";
      detail::only_keys(e, where, {"src", "dst", "weight"});
      if (!e.contains("src") || !e.contains("dst") || !e.contains("weight"))
        throw Error(ErrorKind::ConfigError, where + " needs src, dst and weight");
      cfg.network.edges.push_back({detail::text(e.at("src"), where + ".src"), detail::text(e.at("dst"), where + ".dst"),
                                   detail::number(e.at("weight"), where + ".weight")});
    }
  }
  if (cfg.network.edges_file && !cfg.network.edges.empty())
    throw Error(ErrorKind::ConfigError, "network takes either edges_file or edges, not both");
  if (net.contains("nodes")) {
    if (!net.at("nodes").is_array()) throw Error(ErrorKind::ConfigError, "network.nodes must be an array");
    for (const auto& n : net.at("nodes")) cfg.network.nodes.push_back(detail::text(n, "network.nodes[]"));
  }

  if (root.contains("users")) {
    if (!root.at("users").is_array()) throw Error(ErrorKind::ConfigError, "users must be an array");
    std::size_t idx = 0;
    for (const auto& u : root.at("users")) {
      const std::string where = "users[" + std::to_string(idx++) + "]";
      detail::only_keys(u, where, {"label", "m", "bias"});
      if (!u.contains("label")) throw Error(ErrorKind::ConfigError, where + " needs a label");
      UserConfig uc;
      uc.label = detail::text(u.at("label"), where + ".label");
      detail::optional_field(u, "m", uc.m, where);
      if (u.contains("bias")) {
        const auto& b = u.at("bias");
        if (!b.is_object()) throw Error(ErrorKind::ConfigError, where + ".bias must be an object");
        for (const auto& [issuer, v] : b.items()) uc.bias[issuer] = detail::number(v, where + ".bias." + issuer);
      }
      cfg.users.push_back(std::move(uc));
    }
  }

  if (!root.contains("game")) throw Error(ErrorKind::ConfigError, "missing section 'game'");
  const auto& game = root.at("game");
  detail::only_keys(game, "game", {"beta", "k"});
  if (!game.contains("beta") || !game.contains("k")) throw Error(ErrorKind::ConfigError, "game needs beta and k");
  cfg.beta = detail::number(game.at("beta"), "game.beta");
  cfg.k = detail::number(game.at("k"), "game.k");

  if (!root.contains("issuers") || !root.at("issuers").is_array() || root.at("issuers").empty())
    throw Error(ErrorKind::ConfigError, "issuers must be a non-empty array");
  std::size_t idx = 0;
  for (const auto& is : root.at("issuers")) {
    const std::string where = "issuers[" + std::to_string(idx++) + "]";
    detail::only_keys(is, where, {"label", "liquidity", "cost"});
    IssuerConfig ic;
    if (!is.contains("label")) throw Error(ErrorKind::ConfigError, where + " needs a label");
    ic.label = detail::text(is.at("label"), where + ".label");
    if (is.contains("liquidity")) {
      const auto& l = is.at("liquidity");
      detail::only_keys(l, where + ".liquidity", {"mu", "alpha", "offset"});
      if (l.contains("mu")) ic.mu = detail::number(l.at("mu"), where + ".liquidity.mu");
      if (l.contains("alpha")) ic.alpha = detail::number(l.at("alpha"), where + ".liquidity.alpha");
      if (l.contains("offset")) ic.offset = detail::number(l.at("offset"), where + ".liquidity.offset");
    }
    if (is.contains("cost")) {
      const auto& c = is.at("cost");
      detail::only_keys(c, where + ".cost", {"c0", "rho"});
      if (c.contains("c0")) ic.c0 = detail::number(c.at("c0"), where + ".cost.c0");
      if (c.contains("rho")) ic.rho = detail::number(c.at("rho"), where + ".cost.rho");
    }
    cfg.issuers.push_back(std::move(ic));
  }

  if (root.contains("solver")) {
    const auto& s = root.at("solver");
    detail::only_keys(s, "solver", {"grid_n", "refine_rounds", "lattice", "max_evaluations", "threads", "solve_tol",
                                    "opt_tol", "root_tol", "tie_tol", "max_iter"});
    auto& sc = cfg.solver;
    detail::optional_field(s, "grid_n", sc.grid_n, "solver");
    detail::optional_field(s, "refine_rounds", sc.refine_rounds, "solver");
    detail::optional_field(s, "lattice", sc.lattice, "solver");
    detail::optional_field(s, "max_evaluations", sc.max_evaluations, "solver");
    detail::optional_field(s, "threads", sc.threads, "solver");
    detail::optional_field(s, "solve_tol", sc.solve_tol, "solver");
    detail::optional_field(s, "opt_tol", sc.opt_tol, "solver");
    detail::optional_field(s, "root_tol", sc.root_tol, "solver");
    detail::optional_field(s, "tie_tol", sc.tie_tol, "solver");
    detail::optional_field(s, "max_iter", sc.max_iter, "solver");
  }
  return cfg;
}

inline std::string serialize_config(const ScenarioConfig& cfg) {
  using detail::json;
  json root = json::object();
  json net = json::object();
  if (cfg.network.edges_file) net["edges_file"] = *cfg.network.edges_file;
  if (!cfg.network.edges.empty()) {
    json edges = json::array();
    for (const auto& e : cfg.network.edges) edges.push_back({{"src", e.src}, {"dst", e.dst}, {"weight", e.weight}});
    net["edges"] = edges;
  }
  if (!cfg.network.nodes.empty()) net["nodes"] = cfg.network.nodes;
  root["network"] = net;
  if (!cfg.users.empty()) {
    json users = json::array();
    for (const auto& u : cfg.users) {
      json ju = {{"label", u.label}};
      if (u.m) ju["m"] = *u.m;
      if (!u.bias.empty()) ju["bias"] = u.bias;
      users.push_back(ju);
    }
    root["users"] = users;
  }
  root["game"] = {{"beta", cfg.beta}, {"k", cfg.k}};
  json issuers = json::array();
  for (const auto& is : cfg.issuers)
    issuers.push_back({{"label", is.label},
                       {"liquidity", {{"mu", is.mu}, {"alpha", is.alpha}, {"offset", is.offset}}},
                       {"cost", {{"c0", is.c0}, {"rho", is.rho}}}});
  root["issuers"] = issuers;
  json solver = json::object();
  const auto& s = cfg.solver;
  if (s.grid_n) solver["grid_n"] = *s.grid_n;
  if (s.refine_rounds) solver["refine_rounds"] = *s.refine_rounds;
  if (s.lattice) solver["lattice"] = *s.lattice;
  if (s.max_evaluations) solver["max_evaluations"] = *s.max_evaluations;
  if (s.threads) solver["threads"] = *s.threads;
  if (s.solve_tol) solver["solve_tol"] = *s.solve_tol;
  if (s.opt_tol) solver["opt_tol"] = *s.opt_tol;
  if (s.root_tol) solver["root_tol"] = *s.root_tol;
  if (s.tie_tol) solver["tie_tol"] = *s.tie_tol;
  if (s.max_iter) solver["max_iter"] = *s.max_iter;
  if (!solver.empty()) root["solver"] = solver;
  return root.dump(2) + "\n";
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::ConfigError, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Scenario build_scenario(const ScenarioConfig& cfg, const std::filesystem::path& base_dir = ".") {
  Scenario scn;
  std::vector<Edge> edges = cfg.network.edges;
  if (cfg.network.edges_file) {
    std::filesystem::path p(*cfg.network.edges_file);
    if (p.is_relative()) p = base_dir / p;
    edges = parse_edge_list(read_text_file(p));
  }
  scn.net = network_from_edges(edges, cfg.network.nodes);
  if (scn.net.size() == 0) throw Error(ErrorKind::ConfigError, "network has no nodes");

  std::set<std::string> issuer_labels;
  for (const auto& is : cfg.issuers)
    if (!issuer_labels.insert(is.label).second)
      throw Error(ErrorKind::ConfigError, "issuer label '" + is.label + "' repeated");

  const std::size_t n = scn.net.size();
  Vector m = Vector::Ones(static_cast<Eigen::Index>(n));
  std::vector<std::vector<double>> bias(cfg.issuers.size());
  std::set<std::string> seen_users;
  for (const auto& u : cfg.users) {
    const auto idx = scn.net.index_of(u.label);
    if (!idx) throw Error(ErrorKind::ConfigError, "user '" + u.label + "' is not a node of the network");
    if (!seen_users.insert(u.label).second) throw Error(ErrorKind::ConfigError, "user '" + u.label + "' repeated");
    if (u.m) m(static_cast<Eigen::Index>(*idx)) = *u.m;
    for (const auto& [issuer, value] : u.bias) {
      std::size_t p = 0;
      while (p < cfg.issuers.size() && cfg.issuers[p].label != issuer) ++p;
      if (p == cfg.issuers.size())
        throw Error(ErrorKind::ConfigError, "user '" + u.label + "' has a bias for unknown issuer '" + issuer + "'");
      if (bias[p].empty()) bias[p].assign(n, 1.0);
      bias[p][*idx] = value;
    }
  }
  try {
    scn.vols = UserVolumes(m);
  } catch (const Error& e) {
    throw Error(ErrorKind::ConfigError, std::string("users: ") + e.what());
  }
  scn.beta = cfg.beta;
  scn.k = cfg.k;
  for (std::size_t p = 0; p < cfg.issuers.size(); ++p) {
    const auto& ic = cfg.issuers[p];
    scn.issuers.push_back({ic.label, LiquidityFn{ic.mu, ic.alpha, ic.offset, bias[p]}, CommitCostFn{ic.c0, ic.rho}});
  }
  try {
    scn.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::ConfigError, e.what());
  }
  return scn;
}

inline Tolerances tolerances_of(const SolverConfig& s) {
  Tolerances t;
  if (s.solve_tol) t.solve_tol = *s.solve_tol;
  if (s.opt_tol) t.opt_tol = *s.opt_tol;
  if (s.root_tol) t.root_tol = *s.root_tol;
  if (s.tie_tol) t.tie_tol = *s.tie_tol;
  if (s.max_iter) t.max_iter = *s.max_iter;
  return t;
}

inline SpeTwoOptions spe_two_options(const SolverConfig& s) {
  SpeTwoOptions o;
  if (s.grid_n) o.grid_n = *s.grid_n;
  if (s.lattice) o.lattice = *s.lattice;
  o.tol = tolerances_of(s);
  return o;
}

inline SpeTOptions spe_t_options(const SolverConfig& s) {
  SpeTOptions o;
  if (s.grid_n) o.grid_n = *s.grid_n;
  if (s.refine_rounds) o.refine_rounds = *s.refine_rounds;
  if (s.max_evaluations) o.max_evaluations = *s.max_evaluations;
  if (s.threads) o.threads = *s.threads;
  o.tol = tolerances_of(s);
  return o;
}

}  // namespace netcurrency
