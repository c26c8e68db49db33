#pragma once

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "prn/prn.hpp"

namespace prn::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kNegative = 1;
inline constexpr int kUsage = 2;
inline constexpr int kCapacity = 3;

struct CommandResult {
  int code = kOk;
  std::string out;
  std::string err;
};

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path, 0, 0, "cannot open file");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline Prn load_network(const std::string& path) { return parse_network(read_file(path), path); }

inline std::string yes_no(bool b) { return b ? "yes" : "no"; }

inline std::string describe_map(const StateMap& map, const Prn& src, const Prn& dst) {
  std::string out;
  for (std::size_t u = 0; u < map.source_size(); ++u)
    out += (u ? " " : "") + src.state(u) + "->" + dst.state(map.image[u]);
  return out;
}

inline std::string describe_set(const StateSet& set, const Prn& net) {
  std::string out = "{";
  for (std::size_t k = 0; k < set.size(); ++k) out += (k ? ", " : "") + net.state(set[k]);
  return out + "}";
}

inline std::string describe_certificate(const MorphismCertificate& cert, const Prn& src, const Prn& dst) {
  std::string out;
  out += "homomorphism: " + yes_no(cert.holds());
  if (cert.epsilon) out += ", epsilon = " + format_g(*cert.epsilon);
  out += '\n';
  out += "condition (1): " + yes_no(cert.holds_condition1) + '\n';
  out += "condition (2): " + yes_no(cert.holds_condition2) + '\n';
  if (cert.full_distance) out += "full distance: " + format_g(*cert.full_distance) + '\n';
  out += "bijective: " + yes_no(cert.bijective) + '\n';
  out += "isomorphism: " + yes_no(cert.is_isomorphism) + '\n';
  if (cert.correspondence) {
    out += "correspondence:";
    for (std::size_t i = 0; i < cert.correspondence->size(); ++i)
      out += " " + src.function(i).name + "->" + dst.function((*cert.correspondence)[i]).name;
    out += '\n';
  }
  if (cert.counterexample) {
    const auto& c = *cert.counterexample;
    out += "counterexample: function " + src.function(c.function).name + " at " + src.state(c.from) + " -> " +
           src.state(c.to) + '\n';
  }
  return out;
}

// Writes to `path` when given, otherwise appends to stdout.
inline void emit(const std::string& path, const std::string& text, CommandResult& result) {
  if (path.empty()) {
    result.out += text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw InvalidArgument("cannot write " + path);
}

inline std::size_t enumeration_cap(std::size_t fallback) {
  const char* env = std::getenv("PRN_ENUM_CAP");
  if (!env || !*env) return fallback;
  char* end = nullptr;
  const unsigned long long value = std::strtoull(env, &end, 10);
  if (*end != '\0' || value == 0) throw InvalidArgument(std::string("PRN_ENUM_CAP is not a positive integer: ") + env);
  return static_cast<std::size_t>(value);
}

}  // namespace detail

// argv without the program name.
inline CommandResult run(const std::vector<std::string>& args) {
  CommandResult result;
  CLI::App app{"Probabilistic regulatory network toolkit", "prn"};
  app.require_subcommand(1);

  std::string file, file2, map_file, output;

  auto* validate = app.add_subcommand("validate", "Parse and validate a network");
  validate->add_option("file", file, "network (.prn)")->required();

  auto* matrix = app.add_subcommand("matrix", "Transition matrix as CSV");
  matrix->add_option("file", file, "network (.prn)")->required();
  matrix->add_option("-o,--output", output, "output CSV");

  double tol = 1e-12;
  auto* steady = app.add_subcommand("steady", "Stationary distribution as CSV");
  steady->add_option("file", file, "network (.prn)")->required();
  steady->add_option("--tol", tol, "convergence tolerance")->check(CLI::PositiveNumber);

  auto* expand = app.add_subcommand("expand", "Expand a PBN into a network");
  expand->add_option("file", file, "PBN (.pbn.json)")->required();
  expand->add_option("-o,--output", output, "output network");

  auto* hom = app.add_subcommand("hom", "Homomorphism checks");
  hom->require_subcommand(1);
  auto* hom_check = hom->add_subcommand("check", "Certify a given state map");
  hom_check->add_option("src", file, "source network")->required();
  hom_check->add_option("dst", file2, "target network")->required();
  hom_check->add_option("--map", map_file, "state map (.map.json)")->required();

  bool bijective = false, inverse_hom = false;
  std::optional<double> max_epsilon;
  std::optional<std::size_t> cap;
  auto* hom_enum = hom->add_subcommand("enum", "Enumerate homomorphisms");
  hom_enum->add_option("src", file, "source network")->required();
  hom_enum->add_option("dst", file2, "target network")->required();
  hom_enum->add_flag("--bijective", bijective, "bijective maps only");
  hom_enum->add_flag("--inverse", inverse_hom, "inverse must be a homomorphism too");
  hom_enum->add_option("--max-epsilon", max_epsilon, "epsilon bound");
  hom_enum->add_option("--cap", cap, "maximum number of candidate maps");

  double epsilon = 0.0;
  int max_power = 10;
  auto* compare = app.add_subcommand("compare", "Compare the chains of two networks through a state map");
  compare->add_option("a", file, "first network")->required();
  compare->add_option("b", file2, "second network")->required();
  compare->add_option("--map", map_file, "injective state map a -> b")->required();
  compare->add_option("--epsilon", epsilon, "bound")->required()->check(CLI::NonNegativeNumber);
  compare->add_option("--max-power", max_power, "largest power compared")->check(CLI::PositiveNumber);

  auto* sum_cmd = app.add_subcommand("sum", "Disjoint sum of two networks");
  sum_cmd->add_option("a", file, "first network")->required();
  sum_cmd->add_option("b", file2, "second network")->required();
  sum_cmd->add_option("-o,--output", output, "output network");

  std::string combine = "product";
  auto* product_cmd = app.add_subcommand("product", "Product of two networks");
  product_cmd->add_option("a", file, "first network")->required();
  product_cmd->add_option("b", file2, "second network")->required();
  product_cmd->add_option("--combine", combine, "probability combiner")->check(CLI::IsMember({"product", "average"}));
  product_cmd->add_option("-o,--output", output, "output network");

  auto* superpose_cmd = app.add_subcommand("superpose", "Superpose the functions of a file as weighted systems");
  superpose_cmd->add_option("file", file, "systems (.prn)")->required();
  superpose_cmd->add_option("-o,--output", output, "output network");

  bool irreducible = false;
  auto* subnets = app.add_subcommand("subnets", "Invariant subnetworks");
  subnets->add_option("file", file, "network (.prn)")->required();
  subnets->add_flag("--irreducible", irreducible, "minimal sets only");

  auto* dot = app.add_subcommand("dot", "State space as DOT");
  dot->add_option("file", file, "network (.prn)")->required();
  dot->add_option("-o,--output", output, "output DOT");

  std::ostringstream help_out, help_err;
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    result.code = app.exit(e, help_out, help_err) == 0 ? kOk : kUsage;
    result.out = help_out.str();
    result.err = help_err.str();
    return result;
  }

  try {
    if (validate->parsed()) {
      const auto net = detail::load_network(file);
      for (const auto& issue : validate_prn(net.data()).issues) result.err += file + ": warning: " + issue.message + '\n';
      result.out += "valid: " + net.name() + " (" + std::to_string(net.size()) + " states, " +
                    std::to_string(net.function_count()) + " functions)\n";
    } else if (matrix->parsed()) {
      detail::emit(output, write_matrix_csv(transition_matrix(detail::load_network(file))), result);
    } else if (steady->parsed()) {
      const auto t = transition_matrix(detail::load_network(file));
      const auto classes = recurrent_classes(t);
      if (classes.size() != 1) {
        result.code = kNegative;
        result.err += file + ": no unique stationary distribution (" + std::to_string(classes.size()) +
                      " recurrent classes)\n";
        return result;
      }
      SteadyStateOptions options;
      options.tol = tol;
      result.out += write_distribution_csv(steady_state(t, options));
    } else if (expand->parsed()) {
      detail::emit(output, serialize_network(expand_pbn(parse_pbn_json(detail::read_file(file), file))), result);
    } else if (hom_check->parsed()) {
      const auto src = detail::load_network(file);
      const auto dst = detail::load_network(file2);
      const auto map = parse_state_map_json(detail::read_file(map_file), src, dst, map_file);
      const auto cert = check_homomorphism(src, dst, map);
      result.out += detail::describe_certificate(cert, src, dst);
      if (!cert.holds()) result.code = kNegative;
    } else if (hom_enum->parsed()) {
      const auto src = detail::load_network(file);
      const auto dst = detail::load_network(file2);
      EnumerateOptions options;
      options.bijective_only = bijective;
      options.require_inverse_hom = inverse_hom;
      options.max_epsilon = max_epsilon;
      options.cap = cap ? *cap : detail::enumeration_cap(options.cap);
      const auto found = enumerate_homomorphisms(src, dst, options);
      for (const auto& cert : found) {
        result.out += detail::describe_map(cert.state_map, src, dst) + "  epsilon = " + format_g(*cert.epsilon);
        if (cert.is_isomorphism) result.out += "  isomorphism";
        result.out += '\n';
      }
      result.out += "count: " + std::to_string(found.size()) + '\n';
      if (found.empty()) result.code = kNegative;
    } else if (compare->parsed()) {
      const auto a = detail::load_network(file);
      const auto b = detail::load_network(file2);
      const auto map = parse_state_map_json(detail::read_file(map_file), a, b, map_file);
      if (!is_injective(map)) throw InvalidArgument(map_file + ": map must be injective");
      const auto cert = check_homomorphism(a, b, map);
      result.out += "homomorphism: " + detail::yes_no(cert.holds());
      if (cert.epsilon) result.out += ", epsilon = " + format_g(*cert.epsilon);
      result.out += '\n';
      // b's chain on the image of the map, rows in a's order.
      const auto t1 = transition_matrix(a);
      const auto t2 = restrict_to(transition_matrix(b), map.image);
      const auto bound = verify_power_bound(t1, t2, epsilon, max_power);
      const auto similar = tdmc_similarity(t1, t2, epsilon, max_power);
      for (const auto& cmp : bound.per_power)
        result.out += "n = " + std::to_string(cmp.power) + ": max |diff| = " + format_g(cmp.max_abs) +
                      ", max row sum = " + format_g(cmp.max_row_sum) + ", max column sum = " +
                      format_g(cmp.max_column_sum) + ", same support: " + detail::yes_no(cmp.support_equal) + '\n';
      if (bound.stationary_distance) result.out += "stationary distance: " + format_g(*bound.stationary_distance) + '\n';
      result.out += "power bound (epsilon = " + format_g(epsilon) + "): " + (bound.verdict ? "holds" : "fails") + '\n';
      result.out += "chains similar: " + detail::yes_no(similar.verdict) + '\n';
      if (!bound.verdict) result.code = kNegative;
    } else if (sum_cmd->parsed()) {
      detail::emit(output, serialize_network(sum(detail::load_network(file), detail::load_network(file2)).network),
                   result);
    } else if (product_cmd->parsed()) {
      const auto combiner = combine == "average" ? Combiner::average() : Combiner::product();
      detail::emit(output,
                   serialize_network(product(detail::load_network(file), detail::load_network(file2), combiner).network),
                   result);
    } else if (superpose_cmd->parsed()) {
      const auto net = detail::load_network(file);
      std::vector<WeightedFds> systems;
      for (const auto& fn : net.functions()) systems.push_back({fn.name, {net.states(), fn.table}, fn.prob});
      detail::emit(output, serialize_network(superpose(systems, net.name())), result);
    } else if (subnets->parsed()) {
      const auto net = detail::load_network(file);
      const auto report = invariant_subnetworks(net);
      for (const auto& set : irreducible ? report.irreducible_sets : report.invariant_sets)
        result.out += detail::describe_set(set, net) + '\n';
    } else if (dot->parsed()) {
      detail::emit(output, export_dot(detail::load_network(file)), result);
    }
  } catch (const CapacityError& e) {
    result.code = kCapacity;
    result.err += std::string("prn: ") + e.what() + '\n';
  } catch (const ConvergenceError& e) {
    result.code = kNegative;
    result.err += std::string("prn: ") + e.what() + '\n';
  } catch (const Error& e) {
    result.code = kUsage;
    result.err += std::string("prn: ") + e.what() + '\n';
  }
  return result;
}

}  // namespace prn::cli
