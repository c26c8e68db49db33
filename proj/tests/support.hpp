#pragma once

// Fixture access, random generators and independent oracles shared by the
// test binaries. Oracles avoid the library's algorithms on purpose: plain
// nested vectors, literal definitions, exhaustive scans.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <iterator>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "prn/prn.hpp"

#ifndef PRN_FIXTURE_DIR
#error "PRN_FIXTURE_DIR must be defined"
#endif

namespace prn::testing {

using Dense = std::vector<std::vector<double>>;

inline std::string fixture_path(const std::string& name) { return std::string(PRN_FIXTURE_DIR) + "/" + name; }

inline std::string read_fixture(const std::string& name) {
  std::ifstream in(fixture_path(name), std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline Prn load(const std::string& name) { return parse_network(read_fixture(name), name); }

// Every valid .prn fixture.
inline const std::vector<std::string>& corpus() {
  static const std::vector<std::string> names{
      "two-bit.prn", "two-bit-perturbed.prn", "near-x1.prn", "near-x2.prn",
      "three-bit.prn", "fds-x.prn",          "fds-y.prn",          "l1l2.prn",
      "l1l3.prn",        "identity-1.prn",     "a1a2.prn",           "a1a3.prn",
      "z3-f1f2f3.prn"};
  return names;
}

inline Dense dense(const Eigen::MatrixXd& m) {
  Dense out(static_cast<std::size_t>(m.rows()), std::vector<double>(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
  return out;
}

inline Dense dense(const StochasticMatrix& t) { return dense(t.entries()); }

inline double max_diff(const Dense& a, const Dense& b) {
  if (a.size() != b.size()) return INFINITY;
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].size() != b[i].size()) return INFINITY;
    for (std::size_t j = 0; j < a[i].size(); ++j) d = std::max(d, std::fabs(a[i][j] - b[i][j]));
  }
  return d;
}

// --- random generation -------------------------------------------------------

inline std::vector<double> random_probabilities(std::mt19937_64& rng, std::size_t k) {
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  std::vector<double> w(k);
  double total = 0.0;
  for (auto& x : w) total += x = unit(rng);
  for (auto& x : w) x /= total;
  return w;
}

inline Prn random_network(std::mt19937_64& rng, std::size_t max_states = 6, std::size_t max_functions = 4,
                          const std::string& name = "random") {
  std::uniform_int_distribution<std::size_t> states_dist(1, max_states), funcs_dist(1, max_functions);
  const std::size_t n = states_dist(rng), k = funcs_dist(rng);
  std::uniform_int_distribution<std::size_t> target(0, n - 1);
  NetworkData data;
  data.name = name;
  for (std::size_t i = 0; i < n; ++i) data.states.push_back("s" + std::to_string(i));
  const auto probs = random_probabilities(rng, k);
  for (std::size_t f = 0; f < k; ++f) {
    MapFunction fn{"f" + std::to_string(f + 1), std::vector<StateIndex>(n), probs[f]};
    for (auto& v : fn.table) v = target(rng);
    data.functions.push_back(std::move(fn));
  }
  return Prn(std::move(data));
}

// --- oracles -----------------------------------------------------------------

// p(u, v) summed arc by arc over the literal definition.
inline Dense naive_matrix(const Prn& net) {
  const std::size_t n = net.size();
  Dense t(n, std::vector<double>(n, 0.0));
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = 0; v < n; ++v)
      for (const auto& fn : net.functions())
        if (fn.table[u] == v) t[u][v] += fn.prob;
  return t;
}

inline Dense naive_multiply(const Dense& a, const Dense& b) {
  const std::size_t n = a.size(), m = b.empty() ? 0 : b[0].size(), k = b.size();
  Dense out(n, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t l = 0; l < k; ++l) out[i][j] += a[i][l] * b[l][j];
  return out;
}

inline Dense naive_power(const Dense& t, int n) {
  Dense out = t;
  for (int i = 1; i < n; ++i) out = naive_multiply(out, t);
  return out;
}

inline Dense kronecker(const Dense& a, const Dense& b) {
  const std::size_t n = a.size(), m = b.size();
  Dense out(n * m, std::vector<double>(n * m, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < m; ++k)
        for (std::size_t l = 0; l < m; ++l) out[i * m + k][j * m + l] = a[i][j] * b[k][l];
  return out;
}

inline Dense block_diagonal(const Dense& a, const Dense& b) {
  const std::size_t n = a.size(), m = b.size();
  Dense out(n + m, std::vector<double>(n + m, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i][j] = a[i][j];
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) out[n + i][n + j] = b[i][j];
  return out;
}

// pi T = pi, sum pi = 1 by a direct least-squares solve.
inline std::vector<double> solve_stationary(const Dense& t) {
  const auto n = static_cast<Eigen::Index>(t.size());
  Eigen::MatrixXd a(n + 1, n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n + 1);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = t[j][i] - (i == j ? 1.0 : 0.0);
  a.row(n).setOnes();
  b(n) = 1.0;
  const Eigen::VectorXd x = a.colPivHouseholderQr().solve(b);
  return {x.data(), x.data() + n};
}

inline std::vector<std::vector<bool>> reachability(const Dense& t) {
  const std::size_t n = t.size();
  std::vector<std::vector<bool>> r(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) {
    r[i][i] = true;
    for (std::size_t j = 0; j < n; ++j)
      if (t[i][j] > 0.0) r[i][j] = true;
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (r[i][k] && r[k][j]) r[i][j] = true;
  return r;
}

// u is recurrent iff everything reachable from u reaches u back.
inline std::vector<std::vector<StateIndex>> recurrent_class_oracle(const Dense& t) {
  const auto r = reachability(t);
  const std::size_t n = t.size();
  std::vector<std::vector<StateIndex>> out;
  std::vector<bool> done(n, false);
  for (std::size_t u = 0; u < n; ++u) {
    if (done[u]) continue;
    bool recurrent = true;
    for (std::size_t v = 0; v < n; ++v)
      if (r[u][v] && !r[v][u]) recurrent = false;
    if (!recurrent) continue;
    std::vector<StateIndex> cls;
    for (std::size_t v = 0; v < n; ++v)
      if (r[u][v]) {
        cls.push_back(v);
        done[v] = true;
      }
    out.push_back(cls);
  }
  return out;
}

// Raw scan of all 2^n - 1 non-empty subsets.
inline std::vector<std::vector<StateIndex>> invariant_sets_oracle(const Prn& net) {
  const std::size_t n = net.size();
  std::vector<std::vector<StateIndex>> out;
  for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
    bool closed = true;
    for (const auto& fn : net.functions())
      for (std::size_t u = 0; u < n; ++u)
        if ((mask >> u & 1) && !(mask >> fn.table[u] & 1)) closed = false;
    if (!closed) continue;
    std::vector<StateIndex> set;
    for (std::size_t u = 0; u < n; ++u)
      if (mask >> u & 1) set.push_back(u);
    out.push_back(set);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });
  return out;
}

struct HomOracle {
  bool holds = false;
  double epsilon = 0.0;
  double full = 0.0;
};

// Conditions (1)-(2) read literally, epsilon skipping zero entries that fold
// into a fiber the row already reaches.
inline HomOracle hom_oracle(const Prn& src, const Prn& dst, const std::vector<StateIndex>& phi) {
  HomOracle out;
  const auto ts = naive_matrix(src), td = naive_matrix(dst);
  for (const auto& f : src.functions()) {
    bool found = false;
    for (const auto& g : dst.functions()) {
      bool commutes = true, arcs = g.prob > 0.0;
      for (std::size_t u = 0; u < src.size(); ++u) {
        if (phi[f.table[u]] != g.table[phi[u]]) commutes = false;
        if (td[phi[u]][phi[f.table[u]]] <= 0.0) arcs = false;
      }
      if (commutes && arcs) found = true;
    }
    if (!found) return out;
  }
  out.holds = true;
  for (std::size_t u = 0; u < src.size(); ++u)
    for (std::size_t v = 0; v < src.size(); ++v) {
      const double diff = std::fabs(ts[u][v] - td[phi[u]][phi[v]]);
      out.full = std::max(out.full, diff);
      bool folded = false;
      for (std::size_t w = 0; w < src.size(); ++w)
        if (phi[w] == phi[v] && ts[u][w] > 0.0) folded = true;
      if (ts[u][v] > 0.0 || !folded) out.epsilon = std::max(out.epsilon, diff);
    }
  return out;
}

// Every total map src -> dst as image vectors, lexicographic.
inline std::vector<std::vector<StateIndex>> all_maps(std::size_t n, std::size_t m) {
  std::vector<std::vector<StateIndex>> out;
  std::vector<StateIndex> map(n, 0);
  while (true) {
    out.push_back(map);
    std::size_t k = n;
    while (k > 0) {
      --k;
      if (++map[k] < m) break;
      map[k] = 0;
      if (k == 0) return out;
    }
    if (n == 0) return out;
  }
}

}  // namespace prn::testing
