#pragma once

#include <algorithm>
#include <cstddef>
#include <set>
#include <string>
#include <vector>

#include "prn/core.hpp"
#include "prn/error.hpp"
#include "prn/markov.hpp"
#include "prn/morphisms.hpp"

namespace prn {

// Sorted, duplicate-free state indices.
using StateSet = std::vector<StateIndex>;

struct SubnetReport {
  std::vector<StateSet> invariant_sets;    // by size, then lexicographically
  std::vector<StateSet> irreducible_sets;  // minimal invariant sets
  bool lattice_closed = false;
  bool lattice_checked = false;  // pairwise check skipped above kLatticeCheckLimit sets
};

inline constexpr std::size_t kLatticeCheckLimit = 1024;

namespace detail {

inline std::vector<bool> membership(const Prn& net, const std::vector<StateIndex>& subset) {
  if (subset.empty()) throw InvalidArgument("subset is empty");
  std::vector<bool> in(net.size(), false);
  for (auto s : subset) {
    if (s >= net.size()) throw InvalidArgument("state index " + std::to_string(s) + " out of range");
    in[s] = true;
  }
  return in;
}

inline StateSet to_set(const std::vector<bool>& bits) {
  StateSet out;
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) out.push_back(i);
  return out;
}

inline bool size_then_lex(const StateSet& a, const StateSet& b) {
  return a.size() != b.size() ? a.size() < b.size() : a < b;
}

}  // namespace detail

// Every function maps the subset into itself.
inline bool is_invariant(const Prn& net, const std::vector<StateIndex>& subset) {
  const auto in = detail::membership(net, subset);
  for (const auto& fn : net.functions())
    for (auto u : subset)
      if (!in[fn.table[u]]) return false;
  return true;
}

// Smallest invariant set containing `seed`.
inline std::vector<bool> forward_closure(const Prn& net, StateIndex seed) {
  std::vector<bool> in(net.size(), false);
  std::vector<StateIndex> frontier{seed};
  in[seed] = true;
  while (!frontier.empty()) {
    const auto u = frontier.back();
    frontier.pop_back();
    for (const auto& fn : net.functions())
      if (!in[fn.table[u]]) {
        in[fn.table[u]] = true;
        frontier.push_back(fn.table[u]);
      }
  }
  return in;
}

struct SubnetOptions {
  std::size_t cap = std::size_t{1} << 20;  // max family size
};

// Invariant sets are exactly the non-empty unions of singleton closures;
// the family is generated by union-closing the distinct closures.
inline SubnetReport invariant_subnetworks(const Prn& net, const SubnetOptions& options = {}) {
  std::set<std::vector<bool>> closures;
  for (StateIndex s = 0; s < net.size(); ++s) closures.insert(forward_closure(net, s));

  std::set<std::vector<bool>> family(closures.begin(), closures.end());
  std::vector<std::vector<bool>> frontier(family.begin(), family.end());
  while (!frontier.empty()) {
    std::vector<std::vector<bool>> next;
    for (const auto& set : frontier) {
      for (const auto& gen : closures) {
        auto merged = set;
        for (std::size_t i = 0; i < merged.size(); ++i) merged[i] = merged[i] || gen[i];
        if (family.insert(merged).second) {
          if (family.size() > options.cap)
            throw CapacityError("invariant subnetwork family exceeds the cap", family.size(), options.cap);
          next.push_back(std::move(merged));
        }
      }
    }
    frontier = std::move(next);
  }

  SubnetReport report;
  for (const auto& bits : family) report.invariant_sets.push_back(detail::to_set(bits));
  std::sort(report.invariant_sets.begin(), report.invariant_sets.end(), detail::size_then_lex);

  // Minimal closures are the irreducible sets.
  for (const auto& c : closures) {
    bool minimal = true;
    for (const auto& other : closures) {
      if (other == c) continue;
      bool subset = true;
      for (std::size_t i = 0; i < c.size() && subset; ++i) subset = !other[i] || c[i];
      if (subset) minimal = false;
    }
    if (minimal) report.irreducible_sets.push_back(detail::to_set(c));
  }
  std::sort(report.irreducible_sets.begin(), report.irreducible_sets.end(), detail::size_then_lex);

  if (family.size() <= kLatticeCheckLimit) {
    report.lattice_checked = true;
    report.lattice_closed = true;
    const std::vector<std::vector<bool>> sets(family.begin(), family.end());
    for (std::size_t a = 0; a < sets.size() && report.lattice_closed; ++a) {
      for (std::size_t b = a + 1; b < sets.size(); ++b) {
        std::vector<bool> meet(net.size()), join(net.size());
        bool any = false;
        for (std::size_t i = 0; i < net.size(); ++i) {
          meet[i] = sets[a][i] && sets[b][i];
          join[i] = sets[a][i] || sets[b][i];
          any = any || meet[i];
        }
        if (!family.count(join) || (any && !family.count(meet))) {
          report.lattice_closed = false;
          break;
        }
      }
    }
  }
  return report;
}

// Restriction of every function to an invariant subset; states keep the
// caller's order, probabilities unchanged.
inline Prn induced_subnetwork(const Prn& net, const std::vector<StateIndex>& subset) {
  const auto in = detail::membership(net, subset);
  if (!is_invariant(net, subset)) throw InvalidArgument("subset is not invariant");
  std::vector<StateIndex> position(net.size(), 0);
  NetworkData data;
  data.name = net.name() + "|sub";
  for (std::size_t k = 0; k < subset.size(); ++k) {
    position[subset[k]] = k;
    data.states.push_back(net.state(subset[k]));
  }
  for (const auto& fn : net.functions()) {
    MapFunction restricted{fn.name, {}, fn.prob};
    for (auto u : subset) restricted.table.push_back(position[fn.table[u]]);
    data.functions.push_back(std::move(restricted));
  }
  return Prn(std::move(data));
}

struct ProjectionImage {
  StateSet image;
  bool invariant = false;
  bool contains_recurrent_classes = false;
};

inline ProjectionImage projection_image_subnetwork(const Prn& net, const StateMap& pi) {
  const auto check = is_projection(net, pi);
  if (!check.is_projection)
    throw InvalidArgument(check.idempotent ? "map is idempotent but not a homomorphism" : "map is not idempotent");
  ProjectionImage out;
  out.image = check.image;
  out.invariant = is_invariant(net, out.image);
  out.contains_recurrent_classes = true;
  for (const auto& cls : recurrent_classes(transition_matrix(net)))
    for (auto s : cls)
      if (!std::binary_search(out.image.begin(), out.image.end(), s)) out.contains_recurrent_classes = false;
  return out;
}

}  // namespace prn
