#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "functions.hpp"
#include "numerics.hpp"

namespace netcurrency {

// w(i, j): weight importer i places on exporter j.
class TradeNetwork {
 public:
  TradeNetwork() = default;

  TradeNetwork(std::vector<std::string> labels, Matrix weights)
      : labels_(std::move(labels)), w_(std::move(weights)) {
    const auto n = static_cast<Eigen::Index>(labels_.size());
    if (w_.rows() != n || w_.cols() != n)
      throw Error(ErrorKind::InvalidArgument, "weight matrix does not match label count");
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      if (!index_.emplace(labels_[i], i).second)
        throw Error(ErrorKind::InvalidArgument, "duplicate node label '" + labels_[i] + "'");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      if (w_(i, i) != 0.0) throw Error(ErrorKind::SelfLoop, "node '" + labels_[i] + "' has a self weight");
      for (Eigen::Index j = 0; j < n; ++j)
        if (!(w_(i, j) >= 0.0))
          throw Error(ErrorKind::NegativeWeight,
                      "weight " + labels_[i] + " -> " + labels_[j] + " is negative");
    }
  }

  static TradeNetwork empty(std::vector<std::string> labels) {
    const auto n = static_cast<Eigen::Index>(labels.size());
    return TradeNetwork(std::move(labels), Matrix::Zero(n, n));
  }

  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const Matrix& weights() const { return w_; }
  double weight(std::size_t i, std::size_t j) const { return w_(i, j); }

  std::optional<std::size_t> index_of(std::string_view label) const {
    auto it = index_.find(std::string(label));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  double spectral_radius(const Tolerances& tol = {}) const {
    return netcurrency::spectral_radius(w_, tol);
  }

  TradeNetwork with_weight(std::size_t i, std::size_t j, double value) const {
    Matrix w = w_;
    w(i, j) = value;
    return TradeNetwork(labels_, std::move(w));
  }

  // Same network with nodes listed in the given order.
  TradeNetwork reordered(const std::vector<std::string>& order) const {
    if (order.size() != size()) throw Error(ErrorKind::NodeSetMismatch, "node lists differ in size");
    std::vector<std::size_t> pos;
    for (const auto& l : order) {
      auto idx = index_of(l);
      if (!idx) throw Error(ErrorKind::NodeSetMismatch, "node '" + l + "' is not in the network");
      pos.push_back(*idx);
    }
    const auto n = static_cast<Eigen::Index>(size());
    Matrix w(n, n);
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index b = 0; b < n; ++b) w(a, b) = w_(pos[a], pos[b]);
    return TradeNetwork(order, std::move(w));
  }

 private:
  std::vector<std::string> labels_;
  Matrix w_;
  std::unordered_map<std::string, std::size_t> index_;
};

class UserVolumes {
 public:
  UserVolumes() = default;

  explicit UserVolumes(Vector m) : m_(std::move(m)), total_(0.0) {
    for (Eigen::Index i = 0; i < m_.size(); ++i) {
      if (!(m_(i) > 0.0)) throw Error(ErrorKind::InvalidArgument, "transaction volumes must be > 0");
      total_ += m_(i);
    }
  }

  static UserVolumes uniform(std::size_t n, double value = 1.0) {
    return UserVolumes(Vector::Constant(static_cast<Eigen::Index>(n), value));
  }

  std::size_t size() const { return static_cast<std::size_t>(m_.size()); }
  const Vector& m() const { return m_; }
  double operator[](std::size_t i) const { return m_(static_cast<Eigen::Index>(i)); }
  double total() const { return total_; }

 private:
  Vector m_;
  double total_ = 0.0;
};

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

}  // namespace detail

struct Edge {
  std::string src;
  std::string dst;
  double weight;

  bool operator==(const Edge&) const = default;
};

// Builds the network from edge rows. Nodes are first the declared ones (if
// any) and then the remaining labels in first-appearance order.
inline TradeNetwork network_from_edges(const std::vector<Edge>& edges,
                                       const std::vector<std::string>& declared = {}) {
  std::vector<std::string> labels;
  std::unordered_map<std::string, std::size_t> index;
  auto add = [&](const std::string& l) {
    auto [it, fresh] = index.emplace(l, labels.size());
    if (fresh) labels.push_back(l);
    return it->second;
  };
  for (const auto& l : declared) {
    if (index.count(l)) throw Error(ErrorKind::InvalidArgument, "node '" + l + "' declared twice");
    add(l);
  }
  std::vector<std::tuple<std::size_t, std::size_t, double>> cells;
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& e : edges) {
    if (e.src == e.dst) throw Error(ErrorKind::SelfLoop, "edge " + e.src + " -> " + e.dst);
    if (!(e.weight >= 0.0))
      throw Error(ErrorKind::NegativeWeight, "edge " + e.src + " -> " + e.dst + " has negative weight");
    const auto i = add(e.src), j = add(e.dst);
    if (!seen.insert({i, j}).second)
      throw Error(ErrorKind::DuplicateEdge, "edge " + e.src + " -> " + e.dst + " listed twice");
    cells.emplace_back(i, j, e.weight);
  }
  const auto n = static_cast<Eigen::Index>(labels.size());
  Matrix w = Matrix::Zero(n, n);
  for (const auto& [i, j, v] : cells) w(i, j) = v;
  return TradeNetwork(std::move(labels), std::move(w));
}

inline std::vector<Edge> parse_edge_list(std::string_view text) {
  std::vector<Edge> edges;
  std::size_t pos = 0, line_no = 0;
  bool header = false;
  std::set<std::pair<std::string, std::string>> seen;
  if (text.substr(0, 3) == "\xEF\xBB\xBF") pos = 3;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!header) {
      if (line != "src,dst,weight")
        throw Error(ErrorKind::ParseError, "line 1: header must be exactly 'src,dst,weight'");
      header = true;
      continue;
    }
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_fields(line);
    const auto where = "line " + std::to_string(line_no) + ": ";
    if (fields.size() != 3)
      throw Error(ErrorKind::ParseError, where + "expected 3 fields, found " + std::to_string(fields.size()));
    const auto src = detail::trim(fields[0]), dst = detail::trim(fields[1]), wtxt = detail::trim(fields[2]);
    if (src.empty() || dst.empty()) throw Error(ErrorKind::ParseError, where + "empty node label");
    double value = 0.0;
    const auto* first = wtxt.data();
    const auto* last = wtxt.data() + wtxt.size();
    if (first != last && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || wtxt.empty() || !std::isfinite(value))
      throw Error(ErrorKind::ParseError, where + "weight '" + std::string(wtxt) + "' is not a decimal number");
    if (value < 0.0 || (value == 0.0 && std::signbit(value) && wtxt.front() == '-'))
      throw Error(ErrorKind::NegativeWeight, where + "weight " + std::string(wtxt) + " is negative");
    if (src == dst) throw Error(ErrorKind::SelfLoop, where + "self-loop on '" + std::string(src) + "'");
    if (!seen.insert({std::string(src), std::string(dst)}).second)
      throw Error(ErrorKind::DuplicateEdge, where + "edge " + std::string(src) + " -> " + std::string(dst) +
                                                " repeated");
    edges.push_back({std::string(src), std::string(dst), value});
  }
  if (!header) throw Error(ErrorKind::ParseError, "line 1: missing header 'src,dst,weight'");
  return edges;
}

inline TradeNetwork load_edge_list(std::string_view text, const std::vector<std::string>& declared = {}) {
  return network_from_edges(parse_edge_list(text), declared);
}

inline std::vector<Edge> edges_of(const TradeNetwork& net) {
  std::vector<Edge> out;
  const auto& l = net.labels();
  for (std::size_t i = 0; i < net.size(); ++i)
    for (std::size_t j = 0; j < net.size(); ++j)
      if (net.weight(i, j) > 0.0) out.push_back({l[i], l[j], net.weight(i, j)});
  return out;
}

inline void require_beta(const TradeNetwork& net, double beta, const Tolerances& tol = {}) {
  const double r = net.spectral_radius(tol);
  if (!(beta > r * (1.0 + 1e-9)))
    throw Error(ErrorKind::BetaTooSmall,
                "beta = " + std::to_string(beta) + " must exceed r(w) = " + std::to_string(r));
}

inline Vector katz_bonacich(const TradeNetwork& net, double lambda, const Tolerances& tol = {}) {
  if (!(lambda > 0.0)) throw Error(ErrorKind::InvalidArgument, "decay lambda must be > 0");
  const double r = net.spectral_radius(tol);
  if (r > 0.0 && lambda >= 1.0 / r - 1e-12)
    throw Error(ErrorKind::DecayTooLarge, "lambda = " + std::to_string(lambda) +
                                              " must be below 1/r(w) = " + std::to_string(1.0 / r));
  const auto n = static_cast<Eigen::Index>(net.size());
  const Matrix a = Matrix::Identity(n, n) - lambda * net.weights();
  return solve_linear(a, Vector::Ones(n), tol);
}

inline Vector adjusted_katz(const TradeNetwork& net, double beta, const Vector& gamma,
                            const Tolerances& tol = {}) {
  require_beta(net, beta, tol);
  const auto n = static_cast<Eigen::Index>(net.size());
  if (gamma.size() != n) throw Error(ErrorKind::InvalidArgument, "gamma has the wrong length");
  const Matrix a = Matrix::Identity(n, n) - net.weights() / beta;
  return solve_linear(a, gamma, tol);
}

// Footnote-style bound over ordered issuer pairs, with f taken at the
// commitment extremes so the bound holds for every profile.
inline double beta_lower_bound_T(const TradeNetwork& net, const UserVolumes& vols,
                                 std::span<const LiquidityFn> fs, const Tolerances& tol = {}) {
  const double margin = 2e-9;
  const double r = net.spectral_radius(tol);
  double bound = r + margin * std::max(1.0, r);
  const Vector wm = net.weights() * vols.m();
  for (std::size_t i = 0; i < net.size(); ++i) {
    for (std::size_t t = 0; t < fs.size(); ++t) {
      for (std::size_t u = 0; u < fs.size(); ++u) {
        if (t == u) continue;
        const double v = (wm(static_cast<Eigen::Index>(i)) + fs[t](i, 1.0) - fs[u](i, 0.0)) / vols[i];
        bound = std::max(bound, v);
      }
    }
  }
  return bound;
}

inline double beta_lower_bound_two(const TradeNetwork& net, const UserVolumes& vols, const LiquidityFn& fa,
                                   const LiquidityFn& fb, const Tolerances& tol = {}) {
  const LiquidityFn fs[] = {fa, fb};
  return beta_lower_bound_T(net, vols, fs, tol);
}

enum class Integration { StrictlyMore, Equal, Incomparable };

inline const char* to_string(Integration v) {
  switch (v) {
    case Integration::StrictlyMore: return "StrictlyMore";
    case Integration::Equal: return "Equal";
    case Integration::Incomparable: return "Incomparable";
  }
  return "?";
}

inline Integration is_more_integrated(const TradeNetwork& w_prime, const TradeNetwork& w) {
  if (w_prime.size() != w.size()) throw Error(ErrorKind::NodeSetMismatch, "networks differ in node count");
  std::vector<std::size_t> map(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    auto idx = w_prime.index_of(w.labels()[i]);
    if (!idx) throw Error(ErrorKind::NodeSetMismatch, "node '" + w.labels()[i] + "' missing from w'");
    map[i] = *idx;
  }
  bool strict = false;
  for (std::size_t i = 0; i < w.size(); ++i) {
    for (std::size_t j = 0; j < w.size(); ++j) {
      const double a = w_prime.weight(map[i], map[j]), b = w.weight(i, j);
      if (a < b) return Integration::Incomparable;
      if (a > b) strict = true;
    }
  }
  return strict ? Integration::StrictlyMore : Integration::Equal;
}

}  // namespace netcurrency
