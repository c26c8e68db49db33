#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "prn/error.hpp"

namespace prn {

using StateIndex = std::size_t;

// Tolerance for every "probabilities sum to one" check.
inline constexpr double kProbabilityTolerance = 1e-9;

// Absolute slack applied to "<= epsilon" comparisons so that decimal inputs
// survive binary rounding (.549 - .544 is 0.0050000000000000044).
inline constexpr double kCompareSlack = 1e-12;

inline std::string format_g(double value, int significant = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", significant, value);
  return buf;
}

// Labels of GF(base)^dim in lexicographic order, leftmost coordinate most
// significant: "0".."base-1" for dim 1, "(a,b,...)" otherwise.
inline std::vector<std::string> tuple_labels(std::size_t base, std::size_t dim) {
  std::size_t count = 1;
  for (std::size_t i = 0; i < dim; ++i) count *= base;
  std::vector<std::string> labels;
  labels.reserve(count);
  std::vector<std::size_t> digits(dim, 0);
  for (std::size_t n = 0; n < count; ++n) {
    std::size_t rest = n;
    for (std::size_t i = dim; i-- > 0;) {
      digits[i] = rest % base;
      rest /= base;
    }
    if (dim == 1) {
      labels.push_back(std::to_string(digits[0]));
    } else {
      std::string label = "(";
      for (std::size_t i = 0; i < dim; ++i) {
        if (i) label += ',';
        label += std::to_string(digits[i]);
      }
      labels.push_back(label + ")");
    }
  }
  return labels;
}

// ---------------------------------------------------------------------------
// Validation reports

enum class Severity { warning, error };

struct Issue {
  Severity severity = Severity::error;
  std::string message;
  std::string location;
};

struct ValidationReport {
  std::vector<Issue> issues;

  bool ok() const {
    for (const auto& issue : issues)
      if (issue.severity == Severity::error) return false;
    return true;
  }

  void error(std::string message, std::string location = {}) {
    issues.push_back({Severity::error, std::move(message), std::move(location)});
  }
  void warning(std::string message, std::string location = {}) {
    issues.push_back({Severity::warning, std::move(message), std::move(location)});
  }

  std::string to_string() const {
    std::string out;
    for (const auto& issue : issues) {
      out += issue.severity == Severity::error ? "error: " : "warning: ";
      out += issue.message;
      if (!issue.location.empty()) out += " [" + issue.location + "]";
      out += '\n';
    }
    return out;
  }
};

class ValidationError : public Error {
 public:
  explicit ValidationError(ValidationReport report)
      : Error(first_error(report)), report_(std::move(report)) {}

  const ValidationReport& report() const noexcept { return report_; }

 private:
  static std::string first_error(const ValidationReport& report) {
    for (const auto& issue : report.issues)
      if (issue.severity == Severity::error)
        return issue.location.empty() ? issue.message : issue.message + " [" + issue.location + "]";
    return "invalid network";
  }

  ValidationReport report_;
};

// ---------------------------------------------------------------------------
// Network values

// One map X -> X with its selection probability.
struct MapFunction {
  std::string name;
  std::vector<StateIndex> table;
  double prob = 0.0;

  friend bool operator==(const MapFunction&, const MapFunction&) = default;
};

// Unvalidated (X, F, C) candidate. State index = position in `states`.
struct NetworkData {
  std::string name;
  std::vector<std::string> states;
  std::vector<MapFunction> functions;

  friend bool operator==(const NetworkData&, const NetworkData&) = default;
};

namespace detail {

inline bool has_space(std::string_view s) {
  for (char c : s)
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') return true;
  return false;
}

}  // namespace detail

inline ValidationReport validate_prn(const NetworkData& net) {
  ValidationReport report;
  const std::size_t n = net.states.size();
  if (n == 0) report.error("network has no states");

  std::unordered_set<std::string_view> seen;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& id = net.states[i];
    const std::string where = "state " + std::to_string(i);
    if (id.empty()) {
      report.error("empty state id", where);
    } else if (detail::has_space(id) || id.front() == '#') {
      report.error("state id '" + id + "' is not a single token", where);
    }
    if (!seen.insert(id).second) report.error("duplicate state id '" + id + "'", where);
  }

  if (net.functions.empty()) report.error("network has no functions");

  std::unordered_set<std::string_view> names;
  double total = 0.0;
  for (std::size_t f = 0; f < net.functions.size(); ++f) {
    const auto& fn = net.functions[f];
    const std::string where = "function " + (fn.name.empty() ? std::to_string(f) : fn.name);
    if (fn.name.empty() || detail::has_space(fn.name)) report.error("function name must be a single token", where);
    if (!names.insert(fn.name).second) report.warning("duplicate function name '" + fn.name + "'", where);
    if (fn.table.size() != n) {
      report.error("table has " + std::to_string(fn.table.size()) + " entries for " + std::to_string(n) + " states",
                   where);
    }
    for (std::size_t u = 0; u < fn.table.size(); ++u) {
      if (fn.table[u] >= n) {
        report.error("image " + std::to_string(fn.table[u]) + " of state " + std::to_string(u) + " is out of range",
                     where);
      }
    }
    if (!std::isfinite(fn.prob) || fn.prob <= 0.0) {
      report.error("probability " + format_g(fn.prob, 12) + " is not positive", where);
    } else if (fn.prob > 1.0 + kProbabilityTolerance) {
      report.error("probability " + format_g(fn.prob, 12) + " exceeds 1", where);
    }
    total += fn.prob;
  }
  if (!net.functions.empty() && std::fabs(total - 1.0) > kProbabilityTolerance)
    report.error("probabilities sum to " + format_g(total, 12));
  return report;
}

// Validated, immutable probabilistic regulatory network (X, F, C).
class Prn {
 public:
  explicit Prn(NetworkData data) : data_(std::move(data)) {
    auto report = validate_prn(data_);
    if (!report.ok()) throw ValidationError(std::move(report));
    for (std::size_t i = 0; i < data_.states.size(); ++i) index_.emplace(data_.states[i], i);
  }

  const std::string& name() const noexcept { return data_.name; }
  std::size_t size() const noexcept { return data_.states.size(); }
  std::size_t function_count() const noexcept { return data_.functions.size(); }
  const std::vector<std::string>& states() const noexcept { return data_.states; }
  const std::string& state(StateIndex i) const { return data_.states.at(i); }
  const std::vector<MapFunction>& functions() const noexcept { return data_.functions; }
  const MapFunction& function(std::size_t f) const { return data_.functions.at(f); }
  const NetworkData& data() const noexcept { return data_; }

  StateIndex apply(std::size_t f, StateIndex u) const { return data_.functions[f].table[u]; }

  std::optional<StateIndex> index_of(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  friend bool operator==(const Prn& a, const Prn& b) { return a.data_ == b.data_; }

 private:
  NetworkData data_;
  std::unordered_map<std::string, StateIndex> index_;
};

// ---------------------------------------------------------------------------
// Finite dynamical system (X, f)

struct Fds {
  std::vector<std::string> states;
  std::vector<StateIndex> map;
};

inline void validate_fds(const Fds& fds) {
  if (fds.states.empty()) throw InvalidArgument("FDS has no states");
  if (fds.map.size() != fds.states.size())
    throw InvalidArgument("FDS map has " + std::to_string(fds.map.size()) + " entries for " +
                          std::to_string(fds.states.size()) + " states");
  for (auto v : fds.map)
    if (v >= fds.states.size()) throw InvalidArgument("FDS image " + std::to_string(v) + " out of range");
}

// ---------------------------------------------------------------------------
// Probabilistic Boolean network at gene level

struct Predictor {
  std::vector<std::uint8_t> table;  // 2^n output bits, indexed by state
  double prob = 0.0;
};

struct Pbn {
  std::size_t genes = 0;
  std::vector<std::vector<Predictor>> predictors;  // per gene, gene 1 first
};

inline constexpr std::size_t kMaxPbnGenes = 24;

inline ValidationReport validate_pbn(const Pbn& pbn) {
  ValidationReport report;
  if (pbn.genes == 0) report.error("PBN has no genes");
  if (pbn.genes > kMaxPbnGenes) {
    report.error("PBN has " + std::to_string(pbn.genes) + " genes; at most " + std::to_string(kMaxPbnGenes) +
                 " supported");
    return report;
  }
  if (pbn.predictors.size() != pbn.genes)
    report.error("predictor lists for " + std::to_string(pbn.predictors.size()) + " genes, expected " +
                 std::to_string(pbn.genes));
  const std::size_t rows = std::size_t{1} << pbn.genes;
  for (std::size_t g = 0; g < pbn.predictors.size(); ++g) {
    const std::string where = "gene " + std::to_string(g + 1);
    const auto& list = pbn.predictors[g];
    if (list.empty()) report.error("gene has no predictors", where);
    double total = 0.0;
    for (std::size_t j = 0; j < list.size(); ++j) {
      const auto& pred = list[j];
      const std::string at = where + ", predictor " + std::to_string(j + 1);
      if (pred.table.size() != rows)
        report.error("truth table has " + std::to_string(pred.table.size()) + " entries, expected " +
                         std::to_string(rows),
                     at);
      for (auto bit : pred.table)
        if (bit > 1) {
          report.error("truth table entry is not 0/1", at);
          break;
        }
      if (!std::isfinite(pred.prob) || pred.prob <= 0.0) report.error("probability is not positive", at);
      total += pred.prob;
    }
    if (!list.empty() && std::fabs(total - 1.0) > kProbabilityTolerance)
      report.error("probabilities sum to " + format_g(total, 12), where);
  }
  return report;
}

struct ExpandOptions {
  std::size_t max_functions = 1'000'000;
};

// Flattens a PBN into a PRN on {0,1}^n: one composite function per choice
// vector k = [k1..kn], with probability prod_i c_{k_i}^(i).
inline Prn expand_pbn(const Pbn& pbn, const ExpandOptions& options = {}) {
  auto report = validate_pbn(pbn);
  if (!report.ok()) throw ValidationError(std::move(report));

  std::size_t combos = 1;
  for (const auto& list : pbn.predictors) {
    if (combos > options.max_functions / list.size() + 1) {
      combos = options.max_functions + 1;
      break;
    }
    combos *= list.size();
  }
  if (combos > options.max_functions)
    throw CapacityError("PBN expansion exceeds the function cap", combos, options.max_functions);

  const std::size_t n = pbn.genes;
  const std::size_t rows = std::size_t{1} << n;
  NetworkData data;
  data.name = "pbn";
  data.states = tuple_labels(2, n);
  data.functions.reserve(combos);

  std::vector<std::size_t> k(n, 0);
  for (std::size_t c = 0; c < combos; ++c) {
    MapFunction fn;
    fn.name = "f[";
    fn.prob = 1.0;
    for (std::size_t g = 0; g < n; ++g) {
      if (g) fn.name += ',';
      fn.name += std::to_string(k[g] + 1);
      fn.prob *= pbn.predictors[g][k[g]].prob;
    }
    fn.name += ']';
    fn.table.resize(rows);
    for (std::size_t u = 0; u < rows; ++u) {
      std::size_t v = 0;
      for (std::size_t g = 0; g < n; ++g) v = (v << 1) | pbn.predictors[g][k[g]].table[u];
      fn.table[u] = v;
    }
    data.functions.push_back(std::move(fn));

    for (std::size_t g = n; g-- > 0;) {
      if (++k[g] < pbn.predictors[g].size()) break;
      k[g] = 0;
    }
  }
  return Prn(std::move(data));
}

// ---------------------------------------------------------------------------
// State space: one arc per (state, function), parallel arcs kept.

struct Arc {
  StateIndex from = 0;
  StateIndex to = 0;
  std::size_t function = 0;
  double prob = 0.0;
};

struct WeightedDigraph {
  std::vector<std::string> states;
  std::vector<Arc> arcs;  // ordered by source state, then function index

  std::vector<Arc> out_arcs(StateIndex u) const {
    std::vector<Arc> out;
    for (const auto& a : arcs)
      if (a.from == u) out.push_back(a);
    return out;
  }
};

inline WeightedDigraph state_space(const Prn& net) {
  WeightedDigraph graph;
  graph.states = net.states();
  graph.arcs.reserve(net.size() * net.function_count());
  for (StateIndex u = 0; u < net.size(); ++u)
    for (std::size_t f = 0; f < net.function_count(); ++f)
      graph.arcs.push_back({u, net.apply(f, u), f, net.function(f).prob});
  return graph;
}

}  // namespace prn
