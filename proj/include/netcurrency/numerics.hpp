#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"

namespace netcurrency {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct Tolerances {
  double solve_tol = 1e-12;
  double opt_tol = 1e-6;
  double root_tol = 1e-8;
  double tie_tol = 1e-9;
  int max_iter = 10000;

  void validate() const {
    if (!(solve_tol > 0 && opt_tol > 0 && root_tol > 0 && tie_tol > 0))
      throw Error(ErrorKind::InvalidArgument, "tolerances must be strictly positive");
    if (max_iter < 1) throw Error(ErrorKind::InvalidArgument, "max_iter must be at least 1");
  }
};

// Dense LU factorization reused across right-hand sides.
class LinearSolver {
 public:
  LinearSolver() = default;

  explicit LinearSolver(const Matrix& m, const Tolerances& tol = {}) : m_(m), tol_(tol) {
    if (m.rows() != m.cols())
      throw Error(ErrorKind::InvalidArgument, "solve_linear needs a square matrix");
    lu_.compute(m_);
    if (!lu_.isInvertible())
      throw Error(ErrorKind::SingularMatrix, "full-pivot LU found a zero pivot (rank " +
                                                 std::to_string(lu_.rank()) + " of " +
                                                 std::to_string(m.rows()) + ")");
  }

  std::size_t size() const { return static_cast<std::size_t>(m_.rows()); }
  const Matrix& matrix() const { return m_; }

  template <typename Rhs>
  typename Rhs::PlainObject solve(const Eigen::MatrixBase<Rhs>& rhs) const {
    if (rhs.rows() != m_.rows())
      throw Error(ErrorKind::InvalidArgument, "right-hand side has the wrong number of rows");
    typename Rhs::PlainObject z = lu_.solve(rhs);
    typename Rhs::PlainObject r = rhs - m_ * z;
    z += lu_.solve(r);
    if (rhs.size() == 0) return z;
    // Normwise backward error in the infinity norm.
    const double scale = m_.cwiseAbs().rowwise().sum().maxCoeff() * z.cwiseAbs().maxCoeff() + rhs.cwiseAbs().maxCoeff();
    const double res = scale > 0.0 ? (m_ * z - rhs).cwiseAbs().maxCoeff() / scale : 0.0;
    if (!(res <= tol_.solve_tol)) {
      std::ostringstream msg;
      msg << "backward error " << res << " exceeds solve_tol " << tol_.solve_tol;
      throw Error(ErrorKind::SingularMatrix, msg.str());
    }
    return z;
  }

 private:
  Matrix m_;
  Tolerances tol_;
  Eigen::FullPivLU<Matrix> lu_;
};

template <typename Rhs>
typename Rhs::PlainObject solve_linear(const Matrix& m, const Eigen::MatrixBase<Rhs>& rhs,
                                       const Tolerances& tol = {}) {
  return LinearSolver(m, tol).solve(rhs);
}

namespace detail {

// Tarjan's algorithm on the support graph of w (edge i -> j when w(i,j) > 0).
inline std::vector<std::vector<int>> strong_components(const Matrix& w) {
  const int n = static_cast<int>(w.rows());
  std::vector<int> index(n, -1), low(n, 0), stack;
  std::vector<char> on_stack(n, 0);
  std::vector<std::vector<int>> out;
  int counter = 0;

  // Iterative DFS; frames hold (node, next neighbour to visit).
  std::vector<std::pair<int, int>> frames;
  for (int root = 0; root < n; ++root) {
    if (index[root] >= 0) continue;
    frames.push_back({root, 0});
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!frames.empty()) {
      auto& [v, next] = frames.back();
      if (next < n) {
        const int u = next++;
        if (w(v, u) <= 0.0) continue;
        if (index[u] < 0) {
          index[u] = low[u] = counter++;
          stack.push_back(u);
          on_stack[u] = 1;
          frames.push_back({u, 0});
        } else if (on_stack[u]) {
          low[v] = std::min(low[v], index[u]);
        }
        continue;
      }
      if (low[v] == index[v]) {
        std::vector<int> comp;
        int u;
        do {
          u = stack.back();
          stack.pop_back();
          on_stack[u] = 0;
          comp.push_back(u);
        } while (u != v);
        std::sort(comp.begin(), comp.end());
        out.push_back(std::move(comp));
      }
      const int done = v;
      frames.pop_back();
      if (!frames.empty()) {
        const int parent = frames.back().first;
        low[parent] = std::min(low[parent], low[done]);
      }
    }
  }
  return out;
}

}  // namespace detail

// Perron root of a non-negative matrix. Each strongly connected block is
// irreducible, so shifted power iteration converges there and the
// Collatz-Wielandt quotients bracket the root from both sides.
inline double spectral_radius(const Matrix& w, const Tolerances& tol = {}) {
  if (w.rows() != w.cols())
    throw Error(ErrorKind::InvalidArgument, "spectral_radius needs a square matrix");
  if (w.size() > 0 && w.minCoeff() < 0.0)
    throw Error(ErrorKind::InvalidArgument, "spectral_radius needs non-negative entries");

  double radius = 0.0;
  for (const auto& comp : detail::strong_components(w)) {
    const auto k = static_cast<Eigen::Index>(comp.size());
    if (k == 1) {
      radius = std::max(radius, w(comp[0], comp[0]));
      continue;
    }
    Matrix b(k, k);
    for (Eigen::Index a = 0; a < k; ++a)
      for (Eigen::Index c = 0; c < k; ++c) b(a, c) = w(comp[a], comp[c]);
    const double shift = b.rowwise().sum().maxCoeff();
    b.diagonal().array() += shift;

    Vector x = Vector::Ones(k);
    double lo = 0.0, hi = std::numeric_limits<double>::infinity();
    bool converged = false;
    for (int it = 0; it < tol.max_iter; ++it) {
      Vector y = b * x;
      const Vector q = y.cwiseQuotient(x);
      lo = std::max(lo, q.minCoeff());
      hi = std::min(hi, q.maxCoeff());
      x = y / y.maxCoeff();
      if (hi - lo <= 1e-11 * std::max(1.0, hi)) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      std::ostringstream msg;
      msg << "power iteration stopped after " << tol.max_iter << " steps with bracket ["
          << lo - shift << ", " << hi - shift << "]";
      throw Error(ErrorKind::NoConvergence, msg.str());
    }
    radius = std::max(radius, 0.5 * (lo + hi) - shift);
  }
  return std::max(radius, 0.0);
}

struct ScalarMax {
  double arg;
  double value;
};

// Grid of grid_n+1 points on [lo, hi]; on ties within tie_tol the largest argument wins.
template <typename F>
ScalarMax maximize_on_grid(F&& g, double lo, double hi, int grid_n, double tie_tol) {
  if (!(lo < hi)) throw Error(ErrorKind::InvalidArgument, "maximize needs lo < hi");
  if (grid_n < 1) throw Error(ErrorKind::InvalidArgument, "grid_n must be at least 1");
  std::vector<double> vals(static_cast<std::size_t>(grid_n) + 1);
  double top = -std::numeric_limits<double>::infinity();
  for (int j = 0; j <= grid_n; ++j) {
    const double x = j == grid_n ? hi : lo + (hi - lo) * j / grid_n;
    vals[j] = g(x);
    top = std::max(top, vals[j]);
  }
  for (int j = grid_n; j >= 0; --j)
    if (vals[j] >= top - tie_tol) return {j == grid_n ? hi : lo + (hi - lo) * j / grid_n, vals[j]};
  return {hi, vals[grid_n]};
}

template <typename F>
ScalarMax golden_section_max(F&& g, double a, double b, const Tolerances& tol) {
  static const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a), d = a + invphi * (b - a);
  double gc = g(c), gd = g(d);
  for (int it = 0; b - a > tol.opt_tol && it < tol.max_iter; ++it) {
    if (gc > gd) {
      b = d;
      d = c;
      gd = gc;
      c = b - invphi * (b - a);
      gc = g(c);
    } else {
      a = c;
      c = d;
      gc = gd;
      d = a + invphi * (b - a);
      gd = g(d);
    }
  }
  const double mid = 0.5 * (a + b);
  ScalarMax best{mid, g(mid)};
  if (gc > best.value) best = {c, gc};
  if (gd >= best.value) best = {d, gd};
  return best;
}

template <typename F>
ScalarMax maximize_scalar(F&& g, double lo, double hi, int grid_n = 64, const Tolerances& tol = {}) {
  const ScalarMax coarse = maximize_on_grid(g, lo, hi, grid_n, tol.tie_tol);
  const double h = (hi - lo) / grid_n;
  const double a = std::max(lo, coarse.arg - h), b = std::min(hi, coarse.arg + h);
  const ScalarMax fine = golden_section_max(g, a, b, tol);
  if (fine.value > coarse.value + tol.tie_tol) return fine;
  if (fine.value >= coarse.value - tol.tie_tol && fine.arg > coarse.arg) return fine;
  return coarse;
}

enum class RootVerdict { Root, BelowRange, AboveRange };

struct RootResult {
  RootVerdict verdict;
  double x;      // root estimate; lo for BelowRange, hi for AboveRange
  double value;  // g(x)
  int iterations;
};

// Bisection keeps g(a) > 0 >= g(b) and returns b.
template <typename F>
RootResult find_root_decreasing(F&& g, double lo, double hi, const Tolerances& tol = {}) {
  if (!(lo < hi)) throw Error(ErrorKind::InvalidArgument, "root bracket needs lo < hi");
  double ga = g(lo), gb = g(hi);
  if (gb > ga) {
    std::ostringstream msg;
    msg << "g(" << hi << ") = " << gb << " exceeds g(" << lo << ") = " << ga;
    throw Error(ErrorKind::NotDecreasing, msg.str());
  }
  if (ga <= 0.0) return {RootVerdict::BelowRange, lo, ga, 0};
  if (gb > 0.0) return {RootVerdict::AboveRange, hi, gb, 0};
  double a = lo, b = hi;
  int it = 0;
  while (b - a > tol.root_tol && it < tol.max_iter) {
    const double mid = 0.5 * (a + b);
    const double gm = g(mid);
    ++it;
    if (gm > ga || gm < gb) {
      std::ostringstream msg;
      msg << "g(" << mid << ") = " << gm << " lies outside [" << gb << ", " << ga << "]";
      throw Error(ErrorKind::NotDecreasing, msg.str());
    }
    if (gm > 0.0) {
      a = mid;
      ga = gm;
    } else {
      b = mid;
      gb = gm;
    }
  }
  return {RootVerdict::Root, b, gb, it};
}

}  // namespace netcurrency
