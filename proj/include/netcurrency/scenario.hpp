#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "functions.hpp"
#include "network.hpp"

namespace netcurrency {

class IssuerChoice {
 public:
  IssuerChoice() = default;

  static IssuerChoice out() { return IssuerChoice(); }
  static IssuerChoice commit(double e) {
    if (!(e >= 0.0 && e <= 1.0))
      throw Error(ErrorKind::InvalidArgument, "commitment " + std::to_string(e) + " outside [0, 1]");
    IssuerChoice c;
    c.e_ = e;
    return c;
  }

  bool in() const { return e_.has_value(); }
  double e() const {
    if (!e_) throw Error(ErrorKind::InvalidArgument, "issuer is Out and has no commitment");
    return *e_;
  }

  bool operator==(const IssuerChoice&) const = default;

 private:
  std::optional<double> e_;
};

struct CommitmentProfile {
  std::vector<IssuerChoice> choices;

  CommitmentProfile() = default;
  explicit CommitmentProfile(std::vector<IssuerChoice> c) : choices(std::move(c)) {}

  // Convenience: every issuer In at the given levels.
  static CommitmentProfile all_in(const std::vector<double>& es) {
    CommitmentProfile p;
    for (double e : es) p.choices.push_back(IssuerChoice::commit(e));
    return p;
  }

  std::size_t size() const { return choices.size(); }
  const IssuerChoice& operator[](std::size_t p) const { return choices.at(p); }
  IssuerChoice& operator[](std::size_t p) { return choices.at(p); }

  std::vector<std::size_t> active() const {
    std::vector<std::size_t> out;
    for (std::size_t p = 0; p < choices.size(); ++p)
      if (choices[p].in()) out.push_back(p);
    return out;
  }

  bool operator==(const CommitmentProfile&) const = default;
};

struct Issuer {
  std::string label;
  LiquidityFn liquidity;
  CommitCostFn cost;
};

// A complete game instance. Issuer order is the move order.
struct Scenario {
  TradeNetwork net;
  UserVolumes vols;
  double beta = 1.0;
  double k = 0.0;
  std::vector<Issuer> issuers;

  std::size_t users() const { return net.size(); }
  std::size_t issuer_count() const { return issuers.size(); }
  double total_volume() const { return vols.total(); }

  std::vector<LiquidityFn> liquidity_tables() const {
    std::vector<LiquidityFn> out;
    for (const auto& is : issuers) out.push_back(is.liquidity);
    return out;
  }

  double min_base_cost() const {
    double c = issuers.at(0).cost(0.0);
    for (const auto& is : issuers) c = std::min(c, is.cost(0.0));
    return c;
  }

  // Shape checks only; beta bounds are checked by the solvers.
  void validate() const {
    if (vols.size() != net.size())
      throw Error(ErrorKind::InvalidArgument, "volume vector length differs from node count");
    if (net.size() == 0) throw Error(ErrorKind::InvalidArgument, "network has no users");
    if (!(beta > 0.0)) throw Error(ErrorKind::InvalidArgument, "beta must be > 0");
    if (!(k >= 0.0)) throw Error(ErrorKind::InvalidArgument, "k must be >= 0");
    if (issuers.empty()) throw Error(ErrorKind::InvalidArgument, "scenario has no issuers");
    for (const auto& is : issuers) {
      is.liquidity.validate(net.size());
      is.cost.validate();
    }
  }

  void check_profile(const CommitmentProfile& profile) const {
    if (profile.size() != issuers.size())
      throw Error(ErrorKind::InvalidArgument, "profile has " + std::to_string(profile.size()) +
                                                  " entries for " + std::to_string(issuers.size()) +
                                                  " issuers");
  }
};

}  // namespace netcurrency
