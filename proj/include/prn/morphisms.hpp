#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <future>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "prn/core.hpp"
#include "prn/error.hpp"
#include "prn/markov.hpp"

namespace prn {

// Total map between the state sets of two networks, by index.
struct StateMap {
  std::vector<StateIndex> image;
  std::size_t target_size = 0;

  std::size_t source_size() const noexcept { return image.size(); }
  StateIndex operator()(StateIndex u) const { return image.at(u); }

  friend bool operator==(const StateMap&, const StateMap&) = default;
};

inline StateMap identity_map(std::size_t n) {
  StateMap map{std::vector<StateIndex>(n), n};
  for (std::size_t i = 0; i < n; ++i) map.image[i] = i;
  return map;
}

inline bool is_injective(const StateMap& map) {
  std::vector<bool> hit(map.target_size, false);
  for (auto v : map.image) {
    if (v >= map.target_size || hit[v]) return false;
    hit[v] = true;
  }
  return true;
}

inline bool is_bijective(const StateMap& map) {
  return map.source_size() == map.target_size && is_injective(map);
}

// second o first
inline StateMap compose(const StateMap& first, const StateMap& second) {
  if (first.target_size != second.source_size())
    throw InvalidArgument("cannot compose maps: target of size " + std::to_string(first.target_size) +
                          " vs source of size " + std::to_string(second.source_size()));
  StateMap out{std::vector<StateIndex>(first.source_size()), second.target_size};
  for (std::size_t u = 0; u < first.source_size(); ++u) out.image[u] = second.image[first.image[u]];
  return out;
}

inline std::optional<StateMap> inverse(const StateMap& map) {
  if (!is_bijective(map)) return std::nullopt;
  StateMap inv{std::vector<StateIndex>(map.target_size), map.source_size()};
  for (std::size_t u = 0; u < map.source_size(); ++u) inv.image[map.image[u]] = u;
  return inv;
}

inline std::vector<StateIndex> image_set(const StateMap& map) {
  std::vector<StateIndex> out = map.image;
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline void require_map_between(const StateMap& phi, const Prn& src, const Prn& dst) {
  if (phi.source_size() != src.size() || phi.target_size != dst.size())
    throw InvalidArgument("state map " + std::to_string(phi.source_size()) + "->" + std::to_string(phi.target_size) +
                          " does not fit networks '" + src.name() + "' (" + std::to_string(src.size()) + ") -> '" +
                          dst.name() + "' (" + std::to_string(dst.size()) + ")");
  for (auto v : phi.image)
    if (v >= phi.target_size) throw InvalidArgument("state map image " + std::to_string(v) + " out of range");
}

// Source function, state and successor at which a condition fails.
struct Counterexample {
  std::size_t function = 0;
  StateIndex from = 0;
  StateIndex to = 0;
};

struct MorphismCertificate {
  StateMap state_map;
  std::optional<std::vector<std::size_t>> correspondence;  // source function -> witness target function
  bool holds_condition1 = false;
  bool holds_condition2 = false;
  // Max |p(u,v) - p(phi u, phi v)| over source pairs, skipping zero entries
  // that phi folds into a fiber u already reaches. Present iff holds().
  std::optional<double> epsilon;
  // Same maximum over every source pair.
  std::optional<double> full_distance;
  bool bijective = false;
  bool is_isomorphism = false;
  std::optional<Counterexample> counterexample;

  bool holds() const noexcept { return holds_condition1 && holds_condition2; }
};

inline constexpr double kIsomorphismTolerance = 1e-9;

namespace detail {

// Smallest j with phi o f_i == g_j o phi on every state, if any.
inline std::optional<std::size_t> find_witness(const Prn& src, const Prn& dst, const std::vector<StateIndex>& phi,
                                               std::size_t i) {
  const auto& f = src.function(i).table;
  for (std::size_t j = 0; j < dst.function_count(); ++j) {
    const auto& g = dst.function(j).table;
    bool ok = true;
    for (std::size_t u = 0; u < f.size() && ok; ++u) ok = phi[f[u]] == g[phi[u]];
    if (ok) return j;
  }
  return std::nullopt;
}

inline bool intertwines_all(const Prn& src, const Prn& dst, const std::vector<StateIndex>& phi) {
  for (std::size_t i = 0; i < src.function_count(); ++i)
    if (!find_witness(src, dst, phi, i)) return false;
  return true;
}

// The first state at which the best candidate g_j (most agreeing states,
// smallest j on ties) disagrees with phi o f_i.
inline Counterexample condition1_failure(const Prn& src, const Prn& dst, const std::vector<StateIndex>& phi,
                                         std::size_t i) {
  const auto& f = src.function(i).table;
  std::size_t best_j = 0, best_agree = 0;
  for (std::size_t j = 0; j < dst.function_count(); ++j) {
    const auto& g = dst.function(j).table;
    std::size_t agree = 0;
    for (std::size_t u = 0; u < f.size(); ++u) agree += phi[f[u]] == g[phi[u]];
    if (j == 0 || agree > best_agree) {
      best_agree = agree;
      best_j = j;
    }
  }
  const auto& g = dst.function(best_j).table;
  for (std::size_t u = 0; u < f.size(); ++u)
    if (phi[f[u]] != g[phi[u]]) return {i, u, f[u]};
  return {i, 0, f[0]};
}

struct PullbackDistances {
  double fiber = 0.0;
  double full = 0.0;
};

inline PullbackDistances pullback_distances(const Eigen::MatrixXd& t_src, const Eigen::MatrixXd& t_dst,
                                            const std::vector<StateIndex>& phi) {
  PullbackDistances d;
  const std::size_t n = phi.size();
  std::vector<bool> reached(static_cast<std::size_t>(t_dst.rows()));
  for (std::size_t u = 0; u < n; ++u) {
    std::fill(reached.begin(), reached.end(), false);
    for (std::size_t v = 0; v < n; ++v)
      if (t_src(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v)) > 0.0) reached[phi[v]] = true;
    for (std::size_t v = 0; v < n; ++v) {
      const double p = t_src(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v));
      const double q = t_dst(static_cast<Eigen::Index>(phi[u]), static_cast<Eigen::Index>(phi[v]));
      const double diff = std::fabs(p - q);
      d.full = std::max(d.full, diff);
      if (p > 0.0 || !reached[phi[v]]) d.fiber = std::max(d.fiber, diff);
    }
  }
  return d;
}

}  // namespace detail

// Checks the homomorphism conditions for a fixed pair of networks; caches
// both transition matrices so repeated checks (enumeration) stay cheap.
class HomomorphismChecker {
 public:
  HomomorphismChecker(const Prn& src, const Prn& dst)
      : src_(src), dst_(dst), t_src_(transition_matrix(src).entries()), t_dst_(transition_matrix(dst).entries()) {}

  const Prn& source() const noexcept { return src_; }
  const Prn& target() const noexcept { return dst_; }

  // Condition (1) for every source function; cheap early-exit path.
  bool intertwines(const std::vector<StateIndex>& phi) const { return detail::intertwines_all(src_, dst_, phi); }

  MorphismCertificate certify(const StateMap& phi) const {
    require_map_between(phi, src_, dst_);
    MorphismCertificate cert;
    cert.state_map = phi;
    cert.bijective = is_bijective(phi);
    const auto& map = phi.image;

    std::vector<std::size_t> witness(src_.function_count());
    cert.holds_condition1 = true;
    for (std::size_t i = 0; i < src_.function_count(); ++i) {
      auto j = detail::find_witness(src_, dst_, map, i);
      if (!j) {
        cert.holds_condition1 = false;
        if (!cert.counterexample) cert.counterexample = detail::condition1_failure(src_, dst_, map, i);
        continue;
      }
      witness[i] = *j;
    }

    // Condition (2): every source arc u -> f_i(u) lands on an arc of the
    // target (under the witness when there is one, else in aggregate).
    cert.holds_condition2 = true;
    for (std::size_t i = 0; i < src_.function_count() && cert.holds_condition2; ++i) {
      const auto& f = src_.function(i).table;
      for (std::size_t u = 0; u < f.size(); ++u) {
        const StateIndex x = map[u], y = map[f[u]];
        const bool arc = cert.holds_condition1
                             ? dst_.apply(witness[i], x) == y && dst_.function(witness[i]).prob > 0.0
                             : t_dst_(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) > 0.0;
        if (!arc) {
          cert.holds_condition2 = false;
          if (!cert.counterexample) cert.counterexample = Counterexample{i, u, f[u]};
          break;
        }
      }
    }

    if (!cert.holds()) return cert;
    cert.correspondence = std::move(witness);
    const auto d = detail::pullback_distances(t_src_, t_dst_, map);
    cert.epsilon = d.fiber;
    cert.full_distance = d.full;
    if (cert.bijective && d.full <= kIsomorphismTolerance) {
      const auto inv = inverse(phi);
      cert.is_isomorphism = detail::intertwines_all(dst_, src_, inv->image);
    }
    return cert;
  }

 private:
  const Prn& src_;
  const Prn& dst_;
  Eigen::MatrixXd t_src_;
  Eigen::MatrixXd t_dst_;
};

inline MorphismCertificate check_homomorphism(const Prn& src, const Prn& dst, const StateMap& phi) {
  return HomomorphismChecker(src, dst).certify(phi);
}

inline MorphismCertificate check_homomorphism(const Prn& src, const Prn& dst, const std::vector<StateIndex>& phi) {
  return check_homomorphism(src, dst, StateMap{phi, dst.size()});
}

struct EnumerateOptions {
  bool bijective_only = false;
  bool injective_only = false;
  // Keep only maps whose inverse is also a homomorphism (bijective maps only).
  bool require_inverse_hom = false;
  std::optional<double> max_epsilon;
  std::size_t cap = 100'000'000;
  unsigned threads = 0;  // 0: pick from hardware concurrency for large searches
};

// Number of maps the enumeration would examine, saturating at SIZE_MAX.
inline std::size_t candidate_count(std::size_t source_size, std::size_t target_size, bool injective, bool bijective) {
  constexpr auto saturated = std::numeric_limits<std::size_t>::max();
  if (bijective && source_size != target_size) return 0;
  if ((injective || bijective) && source_size > target_size) return 0;
  std::size_t total = 1;
  for (std::size_t k = 0; k < source_size; ++k) {
    const std::size_t choices = (injective || bijective) ? target_size - k : target_size;
    if (choices == 0) return 0;
    if (total > saturated / choices) return saturated;
    total *= choices;
  }
  return total;
}

namespace detail {

class MapSearch {
 public:
  MapSearch(const HomomorphismChecker& checker, const EnumerateOptions& options)
      : checker_(checker),
        options_(options),
        n_(checker.source().size()),
        m_(checker.target().size()),
        distinct_(options.bijective_only || options.injective_only) {}

  // All accepted certificates whose map starts with `first`, in lexicographic order.
  std::vector<MorphismCertificate> run(StateIndex first) const {
    std::vector<MorphismCertificate> out;
    std::vector<StateIndex> map(n_);
    std::vector<bool> used(m_, false);
    map[0] = first;
    used[first] = true;
    descend(1, map, used, out);
    return out;
  }

 private:
  void descend(std::size_t depth, std::vector<StateIndex>& map, std::vector<bool>& used,
               std::vector<MorphismCertificate>& out) const {
    if (depth == n_) {
      consider(map, out);
      return;
    }
    for (StateIndex v = 0; v < m_; ++v) {
      if (distinct_ && used[v]) continue;
      map[depth] = v;
      used[v] = true;
      descend(depth + 1, map, used, out);
      used[v] = false;
    }
  }

  void consider(const std::vector<StateIndex>& map, std::vector<MorphismCertificate>& out) const {
    if (!checker_.intertwines(map)) return;
    auto cert = checker_.certify(StateMap{map, m_});
    if (!cert.holds()) return;
    if (options_.max_epsilon && *cert.epsilon > *options_.max_epsilon + kCompareSlack) return;
    if (options_.require_inverse_hom) {
      auto inv = inverse(cert.state_map);
      if (!inv || !intertwines_all(checker_.target(), checker_.source(), inv->image)) return;
    }
    out.push_back(std::move(cert));
  }

  const HomomorphismChecker& checker_;
  const EnumerateOptions& options_;
  std::size_t n_;
  std::size_t m_;
  bool distinct_;
};

}  // namespace detail

// Exhaustive search over every total map (or injection / bijection) from
// src to dst; results in lexicographic order of the image vector.
inline std::vector<MorphismCertificate> enumerate_homomorphisms(const Prn& src, const Prn& dst,
                                                                const EnumerateOptions& options = {}) {
  const bool injective = options.injective_only || options.require_inverse_hom;
  const std::size_t candidates = candidate_count(src.size(), dst.size(), injective, options.bijective_only);
  if (candidates > options.cap)
    throw CapacityError("homomorphism enumeration exceeds the candidate cap", candidates, options.cap);
  if (candidates == 0) return {};

  EnumerateOptions effective = options;
  effective.injective_only = injective;
  const HomomorphismChecker checker(src, dst);
  const detail::MapSearch search(checker, effective);

  unsigned threads = options.threads;
  if (threads == 0) threads = candidates > 200'000 ? std::max(1u, std::thread::hardware_concurrency()) : 1u;
  threads = std::min<unsigned>(threads, static_cast<unsigned>(dst.size()));

  std::vector<std::vector<MorphismCertificate>> parts(dst.size());
  if (threads <= 1) {
    for (StateIndex v = 0; v < dst.size(); ++v) parts[v] = search.run(v);
  } else {
    // Disjoint lexicographic ranges by first image; merged in order.
    std::vector<std::future<void>> workers;
    std::atomic<std::size_t> next{0};
    for (unsigned t = 0; t < threads; ++t)
      workers.push_back(std::async(std::launch::async, [&] {
        for (std::size_t v; (v = next.fetch_add(1)) < dst.size();) parts[v] = search.run(v);
      }));
    for (auto& w : workers) w.get();
  }

  std::vector<MorphismCertificate> out;
  for (auto& part : parts)
    for (auto& cert : part) out.push_back(std::move(cert));
  return out;
}

struct CompositionResult {
  MorphismCertificate certificate;
  double bound = 0.0;  // epsilon1 + epsilon2
  bool bound_holds = false;
};

// phi2 o phi1 with the composed correspondence (witness of witness).
inline CompositionResult compose_morphisms(const Prn& src, const Prn& mid, const Prn& dst,
                                           const MorphismCertificate& phi1, const MorphismCertificate& phi2) {
  require_map_between(phi1.state_map, src, mid);
  require_map_between(phi2.state_map, mid, dst);
  if (!phi1.holds() || !phi2.holds()) throw InvalidArgument("both inputs must be homomorphisms");

  CompositionResult result;
  result.certificate = check_homomorphism(src, dst, compose(phi1.state_map, phi2.state_map));
  if (result.certificate.holds()) {
    std::vector<std::size_t> composed(src.function_count());
    for (std::size_t i = 0; i < composed.size(); ++i) composed[i] = (*phi2.correspondence)[(*phi1.correspondence)[i]];
    result.certificate.correspondence = std::move(composed);
  }
  result.bound = *phi1.epsilon + *phi2.epsilon;
  result.bound_holds = result.certificate.holds() && *result.certificate.epsilon <= result.bound + kCompareSlack;
  return result;
}

struct ProjectionCheck {
  bool is_projection = false;
  bool idempotent = false;
  MorphismCertificate certificate;
  std::vector<StateIndex> image;  // sorted
};

// An endomorphism pi with pi o pi == pi.
inline ProjectionCheck is_projection(const Prn& net, const StateMap& pi) {
  ProjectionCheck out;
  out.certificate = check_homomorphism(net, net, pi);
  out.idempotent = true;
  for (auto v : pi.image)
    if (pi.image[v] != v) out.idempotent = false;
  out.is_projection = out.idempotent && out.certificate.holds();
  out.image = image_set(pi);
  return out;
}

}  // namespace prn
