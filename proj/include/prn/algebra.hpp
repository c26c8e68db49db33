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
#include "prn/markov.hpp"
#include "prn/morphisms.hpp"

namespace prn {

// How the product assigns p(h_ij) from c_i and d_j.
struct Combiner {
  enum class Kind { product, average, table };

  Kind kind = Kind::product;
  Eigen::MatrixXd table;  // n x m, only for Kind::table

  static Combiner product() { return {Kind::product, {}}; }
  static Combiner average() { return {Kind::average, {}}; }
  static Combiner from_table(Eigen::MatrixXd table) { return {Kind::table, std::move(table)}; }

  // Probability matrix over all (i, j) pairs.
  Eigen::MatrixXd weights(const std::vector<double>& c, const std::vector<double>& d) const {
    const auto n = static_cast<Eigen::Index>(c.size());
    const auto m = static_cast<Eigen::Index>(d.size());
    Eigen::MatrixXd w(n, m);
    switch (kind) {
      case Kind::product:
        for (Eigen::Index i = 0; i < n; ++i)
          for (Eigen::Index j = 0; j < m; ++j) w(i, j) = c[i] * d[j];
        break;
      case Kind::average:
        // (c_i + d_j) / 2 normalized over the n*m pairs.
        for (Eigen::Index i = 0; i < n; ++i)
          for (Eigen::Index j = 0; j < m; ++j) w(i, j) = (c[i] + d[j]) / static_cast<double>(n + m);
        break;
      case Kind::table:
        if (table.rows() != n || table.cols() != m)
          throw InvalidArgument("combiner table is " + std::to_string(table.rows()) + "x" +
                                std::to_string(table.cols()) + ", expected " + std::to_string(n) + "x" +
                                std::to_string(m));
        w = table;
        break;
    }
    if (std::fabs(w.sum() - 1.0) > kProbabilityTolerance)
      throw InvalidArgument("combiner probabilities sum to " + format_g(w.sum(), 12));
    return w;
  }
};

namespace detail {

inline std::vector<double> probabilities(const Prn& net) {
  std::vector<double> out;
  for (const auto& fn : net.functions()) out.push_back(fn.prob);
  return out;
}

}  // namespace detail

struct SumResult {
  Prn network;
  StateMap inclusion1;
  StateMap inclusion2;
};

// Disjoint union; h_ij acts as f_i on the first copy and g_j on the second,
// with p(h_ij) = c_i d_j so the chain matrix is diag(T1, T2).
inline SumResult sum(const Prn& x1, const Prn& x2) {
  const std::size_t n1 = x1.size();
  NetworkData data;
  data.name = x1.name() + "+" + x2.name();
  for (const auto& s : x1.states()) data.states.push_back(s + "·0");
  for (const auto& s : x2.states()) data.states.push_back(s + "·1");
  for (const auto& f : x1.functions()) {
    for (const auto& g : x2.functions()) {
      MapFunction h{f.name + "|" + g.name, {}, f.prob * g.prob};
      h.table.reserve(data.states.size());
      for (auto v : f.table) h.table.push_back(v);
      for (auto v : g.table) h.table.push_back(n1 + v);
      data.functions.push_back(std::move(h));
    }
  }
  StateMap iota1{std::vector<StateIndex>(n1), n1 + x2.size()};
  StateMap iota2{std::vector<StateIndex>(x2.size()), n1 + x2.size()};
  for (std::size_t i = 0; i < n1; ++i) iota1.image[i] = i;
  for (std::size_t i = 0; i < x2.size(); ++i) iota2.image[i] = n1 + i;
  return {Prn(std::move(data)), std::move(iota1), std::move(iota2)};
}

struct ProductResult {
  Prn network;
  StateMap projection1;
  StateMap projection2;
};

// Cartesian product, pairs in lexicographic order, h_ij = (f_i, g_j).
inline ProductResult product(const Prn& x1, const Prn& x2, const Combiner& combiner = Combiner::product()) {
  const std::size_t n2 = x2.size();
  const auto w = combiner.weights(detail::probabilities(x1), detail::probabilities(x2));
  NetworkData data;
  data.name = x1.name() + "x" + x2.name();
  for (const auto& a : x1.states())
    for (const auto& b : x2.states()) data.states.push_back("(" + a + "," + b + ")");
  for (std::size_t i = 0; i < x1.function_count(); ++i) {
    for (std::size_t j = 0; j < x2.function_count(); ++j) {
      const auto& f = x1.function(i);
      const auto& g = x2.function(j);
      MapFunction h{"(" + f.name + "," + g.name + ")", {}, w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))};
      h.table.reserve(data.states.size());
      for (std::size_t a = 0; a < x1.size(); ++a)
        for (std::size_t b = 0; b < n2; ++b) h.table.push_back(f.table[a] * n2 + g.table[b]);
      data.functions.push_back(std::move(h));
    }
  }
  const std::size_t total = x1.size() * n2;
  StateMap pi1{std::vector<StateIndex>(total), x1.size()};
  StateMap pi2{std::vector<StateIndex>(total), n2};
  for (std::size_t k = 0; k < total; ++k) {
    pi1.image[k] = k / n2;
    pi2.image[k] = k % n2;
  }
  return {Prn(std::move(data)), std::move(pi1), std::move(pi2)};
}

struct WeightedFds {
  std::string name;
  Fds fds;
  double prob = 0.0;
};

// PRN whose functions are the given deterministic systems on a shared state set.
inline Prn superpose(const std::vector<WeightedFds>& systems, std::string name = "superposition") {
  if (systems.empty()) throw InvalidArgument("superposition needs at least one system");
  NetworkData data;
  data.name = std::move(name);
  data.states = systems.front().fds.states;
  for (std::size_t k = 0; k < systems.size(); ++k) {
    const auto& sys = systems[k];
    validate_fds(sys.fds);
    if (sys.fds.states != data.states)
      throw InvalidArgument("system " + std::to_string(k + 1) + " has a different state set");
    data.functions.push_back({sys.name.empty() ? "L" + std::to_string(k + 1) : sys.name, sys.fds.map, sys.prob});
  }
  return Prn(std::move(data));
}

// A PRN realizing a given chain matrix: every row is laid out on [0, 1) by
// cumulative probability (targets in column order) and each cell of the
// common refinement becomes one function with the cell's length.
inline Prn superposition_from_matrix(const StochasticMatrix& t, std::string name = "chain") {
  const std::size_t n = t.size();
  std::vector<double> cuts{0.0, 1.0};
  for (std::size_t u = 0; u < n; ++u) {
    std::size_t last = 0;
    for (std::size_t v = 0; v < n; ++v)
      if (t(u, v) > 0.0) last = v;
    double acc = 0.0;
    for (std::size_t v = 0; v < last; ++v) {
      acc += t(u, v);
      if (t(u, v) > 0.0) cuts.push_back(acc);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(), [](double a, double b) { return std::fabs(a - b) < 1e-15; }),
             cuts.end());

  NetworkData data;
  data.name = std::move(name);
  data.states = t.order();
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double lo = cuts[k], hi = cuts[k + 1];
    if (hi - lo <= 1e-15) continue;
    const double mid = 0.5 * (lo + hi);
    MapFunction fn{"q" + std::to_string(data.functions.size() + 1), std::vector<StateIndex>(n), hi - lo};
    for (std::size_t u = 0; u < n; ++u) {
      double acc = 0.0;
      StateIndex target = n;
      for (std::size_t v = 0; v < n; ++v) {
        if (t(u, v) <= 0.0) continue;
        acc += t(u, v);
        target = v;
        if (mid < acc) break;
      }
      fn.table[u] = target;
    }
    data.functions.push_back(std::move(fn));
  }
  return Prn(std::move(data));
}

// L1..L4 on GF(2): x, 1, 0, x + 1.
inline std::vector<WeightedFds> z2_fds_catalog(const std::vector<double>& probs) {
  if (probs.size() != 4) throw InvalidArgument("Z2 catalog needs four probabilities");
  const std::vector<std::string> states{"0", "1"};
  return {{"L1", {states, {0, 1}}, probs[0]},
          {"L2", {states, {1, 1}}, probs[1]},
          {"L3", {states, {0, 0}}, probs[2]},
          {"L4", {states, {1, 0}}, probs[3]}};
}

struct MediatingResult {
  MorphismCertificate certificate;
  bool triangles_commute = false;
  std::optional<bool> unique;  // empty when the uniqueness search was skipped
  std::size_t competitors = 0;  // homomorphisms satisfying both triangle identities
};

struct UniquenessOptions {
  std::size_t cap = 1'000'000;
};

// delta(x) = (delta1(x), delta2(x)) into the product.
inline MediatingResult mediating_product_morphism(const Prn& x, const Prn& x1, const Prn& x2,
                                                  const MorphismCertificate& delta1,
                                                  const MorphismCertificate& delta2, const ProductResult& prod,
                                                  const UniquenessOptions& options = {}) {
  require_map_between(delta1.state_map, x, x1);
  require_map_between(delta2.state_map, x, x2);
  require_map_between(prod.projection1, prod.network, x1);
  require_map_between(prod.projection2, prod.network, x2);
  if (!delta1.holds() || !delta2.holds()) throw InvalidArgument("delta1 and delta2 must be homomorphisms");

  const std::size_t n2 = x2.size();
  StateMap delta{std::vector<StateIndex>(x.size()), prod.network.size()};
  for (std::size_t u = 0; u < x.size(); ++u) delta.image[u] = delta1.state_map.image[u] * n2 + delta2.state_map.image[u];

  MediatingResult out;
  out.certificate = check_homomorphism(x, prod.network, delta);
  out.triangles_commute = compose(delta, prod.projection1) == delta1.state_map &&
                          compose(delta, prod.projection2) == delta2.state_map;

  if (candidate_count(x.size(), prod.network.size(), false, false) <= options.cap) {
    EnumerateOptions enumerate;
    enumerate.cap = options.cap;
    enumerate.threads = 1;
    bool found_delta = false;
    for (const auto& cert : enumerate_homomorphisms(x, prod.network, enumerate)) {
      if (compose(cert.state_map, prod.projection1) == delta1.state_map &&
          compose(cert.state_map, prod.projection2) == delta2.state_map) {
        ++out.competitors;
        found_delta = found_delta || cert.state_map == delta;
      }
    }
    out.unique = out.competitors == 1 && found_delta;
  }
  return out;
}

// gamma on the disjoint union: gamma1 on the first copy, gamma2 on the second.
inline MediatingResult mediating_coproduct_morphism(const Prn& x1, const Prn& x2, const Prn& x,
                                                    const MorphismCertificate& gamma1,
                                                    const MorphismCertificate& gamma2, const SumResult& sum_result,
                                                    const UniquenessOptions& options = {}) {
  require_map_between(gamma1.state_map, x1, x);
  require_map_between(gamma2.state_map, x2, x);
  require_map_between(sum_result.inclusion1, x1, sum_result.network);
  require_map_between(sum_result.inclusion2, x2, sum_result.network);
  if (!gamma1.holds() || !gamma2.holds()) throw InvalidArgument("gamma1 and gamma2 must be homomorphisms");

  StateMap gamma{std::vector<StateIndex>(sum_result.network.size()), x.size()};
  for (std::size_t u = 0; u < x1.size(); ++u) gamma.image[sum_result.inclusion1.image[u]] = gamma1.state_map.image[u];
  for (std::size_t u = 0; u < x2.size(); ++u) gamma.image[sum_result.inclusion2.image[u]] = gamma2.state_map.image[u];

  MediatingResult out;
  out.certificate = check_homomorphism(sum_result.network, x, gamma);
  out.triangles_commute = compose(sum_result.inclusion1, gamma) == gamma1.state_map &&
                          compose(sum_result.inclusion2, gamma) == gamma2.state_map;

  if (candidate_count(sum_result.network.size(), x.size(), false, false) <= options.cap) {
    EnumerateOptions enumerate;
    enumerate.cap = options.cap;
    enumerate.threads = 1;
    bool found_gamma = false;
    for (const auto& cert : enumerate_homomorphisms(sum_result.network, x, enumerate)) {
      if (compose(sum_result.inclusion1, cert.state_map) == gamma1.state_map &&
          compose(sum_result.inclusion2, cert.state_map) == gamma2.state_map) {
        ++out.competitors;
        found_gamma = found_gamma || cert.state_map == gamma;
      }
    }
    out.unique = out.competitors == 1 && found_gamma;
  }
  return out;
}

// Injective homomorphisms of `net` into y1 x y2.
inline std::vector<MorphismCertificate> embeds_in_product(const Prn& net, const Prn& y1, const Prn& y2,
                                                          const Combiner& combiner = Combiner::product(),
                                                          std::size_t cap = 100'000'000) {
  const auto prod = product(y1, y2, combiner);
  EnumerateOptions options;
  options.injective_only = true;
  options.cap = cap;
  return enumerate_homomorphisms(net, prod.network, options);
}

}  // namespace prn
