#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "prn/core.hpp"
#include "prn/error.hpp"

namespace prn {

// Entries below this magnitude count as zero when comparing supports of
// computed powers.
inline constexpr double kSupportThreshold = 1e-12;

// Row-stochastic matrix over an ordered state set; row u holds p(u, .).
class StochasticMatrix {
 public:
  StochasticMatrix(std::vector<std::string> order, Eigen::MatrixXd entries, double tolerance = kProbabilityTolerance)
      : order_(std::move(order)), entries_(std::move(entries)) {
    const auto n = static_cast<Eigen::Index>(order_.size());
    if (entries_.rows() != n || entries_.cols() != n)
      throw InvalidArgument("matrix is " + std::to_string(entries_.rows()) + "x" + std::to_string(entries_.cols()) +
                            " for " + std::to_string(n) + " states");
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        const double p = entries_(i, j);
        if (!std::isfinite(p) || p < -tolerance || p > 1.0 + tolerance)
          throw InvalidArgument("entry (" + order_[i] + ", " + order_[j] + ") = " + format_g(p, 12) +
                                " is not a probability");
      }
      const double row = entries_.row(i).sum();
      if (std::fabs(row - 1.0) > tolerance)
        throw InvalidArgument("row " + order_[i] + " sums to " + format_g(row, 12));
    }
  }

  static StochasticMatrix identity(std::vector<std::string> order) {
    const auto n = static_cast<Eigen::Index>(order.size());
    return StochasticMatrix(std::move(order), Eigen::MatrixXd::Identity(n, n));
  }

  std::size_t size() const noexcept { return order_.size(); }
  const std::vector<std::string>& order() const noexcept { return order_; }
  const Eigen::MatrixXd& entries() const noexcept { return entries_; }
  double operator()(std::size_t u, std::size_t v) const {
    return entries_(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v));
  }

 private:
  std::vector<std::string> order_;
  Eigen::MatrixXd entries_;
};

struct Distribution {
  std::vector<std::string> order;
  Eigen::VectorXd weights;
};

// p(u, v) = sum of c_i over functions with f_i(u) = v.
inline StochasticMatrix transition_matrix(const Prn& net) {
  const auto n = static_cast<Eigen::Index>(net.size());
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n, n);
  for (const auto& fn : net.functions())
    for (Eigen::Index u = 0; u < n; ++u) t(u, static_cast<Eigen::Index>(fn.table[u])) += fn.prob;
  return StochasticMatrix(net.states(), std::move(t));
}

// T^n by binary exponentiation.
inline StochasticMatrix matrix_power(const StochasticMatrix& t, int n) {
  if (n < 1) throw InvalidArgument("matrix power must be >= 1, got " + std::to_string(n));
  const auto dim = static_cast<Eigen::Index>(t.size());
  Eigen::MatrixXd result = Eigen::MatrixXd::Identity(dim, dim);
  Eigen::MatrixXd base = t.entries();
  for (unsigned e = static_cast<unsigned>(n);;) {
    if (e & 1u) result = result * base;
    e >>= 1;
    if (!e) break;
    base = base * base;
  }
  return StochasticMatrix(t.order(), std::move(result), 1e-8);
}

inline double matrix_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw InvalidArgument("dimension mismatch: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                          " vs " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  if (a.size() == 0) return 0.0;
  return (a - b).cwiseAbs().maxCoeff();
}

inline double matrix_distance(const StochasticMatrix& a, const StochasticMatrix& b) {
  return matrix_distance(a.entries(), b.entries());
}

// Reorders states: row/column i of the result is state perm[i] of `t`.
inline StochasticMatrix permute(const StochasticMatrix& t, const std::vector<StateIndex>& perm) {
  if (perm.size() != t.size()) throw InvalidArgument("permutation size does not match matrix");
  std::vector<bool> used(perm.size(), false);
  for (auto p : perm) {
    if (p >= perm.size() || used[p]) throw InvalidArgument("not a permutation");
    used[p] = true;
  }
  const auto n = static_cast<Eigen::Index>(perm.size());
  Eigen::MatrixXd out(n, n);
  std::vector<std::string> order(perm.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    order[i] = t.order()[perm[i]];
    for (Eigen::Index j = 0; j < n; ++j) out(i, j) = t(perm[i], perm[j]);
  }
  return StochasticMatrix(std::move(order), std::move(out));
}

// Rows/columns of `subset`, in the given order. Throws unless the block is
// itself stochastic (i.e. the subset is closed).
inline StochasticMatrix restrict_to(const StochasticMatrix& t, const std::vector<StateIndex>& subset) {
  const auto n = static_cast<Eigen::Index>(subset.size());
  Eigen::MatrixXd out(n, n);
  std::vector<std::string> order;
  order.reserve(subset.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    if (subset[i] >= t.size()) throw InvalidArgument("state index out of range");
    order.push_back(t.order()[subset[i]]);
    for (Eigen::Index j = 0; j < n; ++j) out(i, j) = t(subset[i], subset[j]);
  }
  return StochasticMatrix(std::move(order), std::move(out));
}

// Closed strongly connected components of the support digraph (u -> v iff
// p(u, v) > threshold), each sorted, ordered by smallest member.
inline std::vector<std::vector<StateIndex>> recurrent_classes(const Eigen::MatrixXd& t, double threshold = 0.0) {
  const std::size_t n = static_cast<std::size_t>(t.rows());
  std::vector<std::vector<StateIndex>> adj(n);
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = 0; v < n; ++v)
      if (t(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v)) > threshold) adj[u].push_back(v);

  // Iterative Tarjan.
  constexpr std::size_t unvisited = static_cast<std::size_t>(-1);
  std::vector<std::size_t> index(n, unvisited), low(n, 0), component(n, unvisited);
  std::vector<bool> on_stack(n, false);
  std::vector<StateIndex> stack;
  std::vector<std::vector<StateIndex>> components;
  std::size_t counter = 0;
  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != unvisited) continue;
    std::vector<std::pair<StateIndex, std::size_t>> call{{root, 0}};
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      auto& [u, next] = call.back();
      if (next < adj[u].size()) {
        const StateIndex v = adj[u][next++];
        if (index[v] == unvisited) {
          index[v] = low[v] = counter++;
          stack.push_back(v);
          on_stack[v] = true;
          call.emplace_back(v, 0);
        } else if (on_stack[v]) {
          low[u] = std::min(low[u], index[v]);
        }
        continue;
      }
      if (low[u] == index[u]) {
        std::vector<StateIndex> members;
        StateIndex w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          component[w] = components.size();
          members.push_back(w);
        } while (w != u);
        components.push_back(std::move(members));
      }
      const StateIndex done = u;
      call.pop_back();
      if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
    }
  }

  std::vector<std::vector<StateIndex>> closed;
  for (std::size_t c = 0; c < components.size(); ++c) {
    bool leaves = false;
    for (auto u : components[c])
      for (auto v : adj[u])
        if (component[v] != c) leaves = true;
    if (leaves) continue;
    auto members = components[c];
    std::sort(members.begin(), members.end());
    closed.push_back(std::move(members));
  }
  std::sort(closed.begin(), closed.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return closed;
}

inline std::vector<std::vector<StateIndex>> recurrent_classes(const StochasticMatrix& t) {
  return recurrent_classes(t.entries());
}

struct SteadyStateOptions {
  double tol = 1e-12;
  long max_iter = 1'000'000;
};

// Unique stationary distribution by power iteration on the lazy chain
// (I + T) / 2 from the uniform start; stops when successive iterates differ by
// less than `tol` in max norm. Requires exactly one recurrent class.
inline Distribution steady_state(const StochasticMatrix& t, const SteadyStateOptions& options = {}) {
  const auto classes = recurrent_classes(t);
  if (classes.size() != 1) {
    std::string names;
    for (const auto& cls : classes) {
      names += names.empty() ? "{" : ", {";
      for (std::size_t i = 0; i < cls.size(); ++i) names += (i ? " " : "") + t.order()[cls[i]];
      names += "}";
    }
    throw InvalidArgument("chain has " + std::to_string(classes.size()) +
                          " recurrent classes: " + names + "; use recurrent_classes and a per-class steady state");
  }
  const auto n = static_cast<Eigen::Index>(t.size());
  const Eigen::MatrixXd lazy = 0.5 * (Eigen::MatrixXd::Identity(n, n) + t.entries());
  Eigen::RowVectorXd pi = Eigen::RowVectorXd::Constant(n, 1.0 / static_cast<double>(n));
  for (long iter = 0; iter < options.max_iter; ++iter) {
    Eigen::RowVectorXd next = pi * lazy;
    next /= next.sum();
    const double delta = (next - pi).cwiseAbs().maxCoeff();
    pi = std::move(next);
    if (delta < options.tol) return Distribution{t.order(), pi.transpose()};
  }
  throw ConvergenceError("steady state did not converge within " + std::to_string(options.max_iter) + " iterations");
}

struct PowerComparison {
  int power = 0;
  double max_abs = 0.0;         // max |(T1^n - T2^n)_ij|
  double max_row_sum = 0.0;     // max_i |sum_j (T1^n - T2^n)_ij|
  double max_column_sum = 0.0;  // max_j |sum_i (T1^n - T2^n)_ij|, informational
  bool support_equal = true;
};

struct ChainDistanceReport {
  double epsilon_observed = 0.0;  // max_abs at n = 1
  std::vector<PowerComparison> per_power;
  bool row_sum_zero = true;
  std::optional<double> stationary_distance;  // |pi1 - pi2|_inf when both unique
  bool verdict = false;
};

namespace detail {

inline void require_same_size(const StochasticMatrix& a, const StochasticMatrix& b) {
  if (a.size() != b.size())
    throw InvalidArgument("dimension mismatch: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
}

inline ChainDistanceReport compare_powers(const StochasticMatrix& t1, const StochasticMatrix& t2, int count) {
  if (count < 1) throw InvalidArgument("number of powers must be >= 1");
  require_same_size(t1, t2);
  ChainDistanceReport report;
  Eigen::MatrixXd p1 = t1.entries();
  Eigen::MatrixXd p2 = t2.entries();
  for (int n = 1; n <= count; ++n) {
    if (n > 1) {
      p1 = p1 * t1.entries();
      p2 = p2 * t2.entries();
    }
    const Eigen::MatrixXd diff = p1 - p2;
    PowerComparison cmp;
    cmp.power = n;
    cmp.max_abs = diff.size() ? diff.cwiseAbs().maxCoeff() : 0.0;
    cmp.max_row_sum = diff.size() ? diff.rowwise().sum().cwiseAbs().maxCoeff() : 0.0;
    cmp.max_column_sum = diff.size() ? diff.colwise().sum().cwiseAbs().maxCoeff() : 0.0;
    for (Eigen::Index i = 0; i < diff.rows() && cmp.support_equal; ++i)
      for (Eigen::Index j = 0; j < diff.cols(); ++j)
        if ((p1(i, j) > kSupportThreshold) != (p2(i, j) > kSupportThreshold)) {
          cmp.support_equal = false;
          break;
        }
    if (cmp.max_row_sum > 1e-8) report.row_sum_zero = false;
    report.per_power.push_back(cmp);
  }
  report.epsilon_observed = report.per_power.front().max_abs;
  return report;
}

inline std::optional<Distribution> unique_steady_state(const StochasticMatrix& t) {
  if (recurrent_classes(t).size() != 1) return std::nullopt;
  try {
    return steady_state(t);
  } catch (const ConvergenceError&) {
    return std::nullopt;
  }
}

}  // namespace detail

// Observes max |(T1^n - T2^n)_ij| for n = 1..N and, when both chains have a
// unique stationary distribution, |pi1 - pi2|_inf. Verdict: all <= epsilon.
inline ChainDistanceReport verify_power_bound(const StochasticMatrix& t1, const StochasticMatrix& t2, double epsilon,
                                              int max_power) {
  auto report = detail::compare_powers(t1, t2, max_power);
  report.verdict = true;
  for (const auto& cmp : report.per_power)
    if (cmp.max_abs > epsilon + kCompareSlack) report.verdict = false;
  auto pi1 = detail::unique_steady_state(t1);
  auto pi2 = detail::unique_steady_state(t2);
  if (pi1 && pi2) {
    report.stationary_distance = (pi1->weights - pi2->weights).cwiseAbs().maxCoeff();
    if (*report.stationary_distance > epsilon + kCompareSlack) report.verdict = false;
  }
  return report;
}

// Epsilon-similarity of the two discrete-time chains over powers 1..M:
// entrywise bound, zero row sums of the difference and equal supports.
inline ChainDistanceReport tdmc_similarity(const StochasticMatrix& t1, const StochasticMatrix& t2, double epsilon,
                                           int max_power) {
  auto report = detail::compare_powers(t1, t2, max_power);
  report.verdict = report.row_sum_zero;
  for (const auto& cmp : report.per_power)
    if (cmp.max_abs > epsilon + kCompareSlack || !cmp.support_equal) report.verdict = false;
  return report;
}

}  // namespace prn
