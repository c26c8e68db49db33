#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"

#include "prn/core.hpp"
#include "prn/error.hpp"
#include "prn/linfield.hpp"
#include "prn/markov.hpp"
#include "prn/morphisms.hpp"

// Text formats:
//
//   network <name>
//   states <id> <id> ...          # declaration order fixes matrix row order
//   function <name> prob <decimal>
//     <srcId> -> <dstId>          # one mapping per state, order free
//   end
//
// A function body may instead be a single `linear p=<prime> dim=<d>
// matrix=<e11,e12,...>` line, and `linear ... prob=<decimal> [name=<id>]`
// is accepted as a one-line function. Linear functions require the states
// to be the GF(p)^d labels; `states` may then be omitted.
namespace prn {

namespace detail {

struct Token {
  std::string_view text;
  std::size_t column = 0;  // 1-based
};

inline std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size() || line[i] == '#') break;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r' && line[i] != '#') ++i;
    out.push_back({line.substr(start, i - start), start + 1});
  }
  return out;
}

inline std::optional<double> parse_decimal(std::string_view text) {
  if (text.empty()) return std::nullopt;
  std::string_view body = text;
  if (body.front() == '+') body.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), value);
  if (ec != std::errc() || ptr != body.data() + body.size() || !std::isfinite(value)) return std::nullopt;
  return value;
}

inline std::optional<std::int64_t> parse_integer(std::string_view text) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) return std::nullopt;
  return value;
}

struct LinearClause {
  gf::Value p = 0;
  std::size_t dim = 0;
  std::vector<std::int64_t> entries;
  std::optional<double> prob;
  std::string name;
};

class NetworkParser {
 public:
  NetworkParser(std::string_view text, std::string source) : text_(text), source_(std::move(source)) {}

  Prn parse() {
    std::size_t pos = 0;
    while (pos <= text_.size()) {
      const std::size_t end = text_.find('\n', pos);
      const std::string_view line = text_.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
      ++line_no_;
      handle(tokenize(line));
      if (end == std::string_view::npos) break;
      pos = end + 1;
    }
    if (in_function_) fail(function_line_, 1, "function '" + current_.name + "' is missing 'end'");
    if (data_.states.empty()) fail(0, 0, "no states declared");
    if (data_.functions.empty()) fail(0, 0, "no functions declared");
    if (data_.name.empty()) data_.name = "network";
    auto report = validate_prn(data_);
    if (!report.ok()) fail(0, 0, std::string("invalid network: ") + ValidationError(report).what());
    return Prn(std::move(data_));
  }

 private:
  [[noreturn]] void fail(std::size_t line, std::size_t column, const std::string& message) const {
    throw ParseError(source_, line, column, message);
  }
  [[noreturn]] void fail(const Token& token, const std::string& message) const {
    fail(line_no_, token.column, message);
  }

  void handle(const std::vector<Token>& tokens) {
    if (tokens.empty()) return;
    const auto& head = tokens.front();
    if (in_function_) {
      if (head.text == "end") {
        if (tokens.size() != 1) fail(tokens[1], "unexpected text after 'end'");
        finish_function();
      } else if (head.text == "linear") {
        if (!mappings_.empty() || linear_body_) fail(head, "linear body must be the only line of a function");
        auto clause = parse_linear(tokens);
        if (clause.prob) fail(head, "prob= is not allowed inside a function block");
        current_.table = linear_table(clause, head);
        linear_body_ = true;
      } else {
        if (linear_body_) fail(head, "linear body must be the only line of a function");
        parse_mapping(tokens);
      }
      return;
    }
    if (head.text == "network") {
      if (tokens.size() != 2) fail(head, "expected 'network <name>'");
      if (!data_.name.empty()) fail(head, "network name declared twice");
      data_.name = std::string(tokens[1].text);
    } else if (head.text == "states") {
      if (!data_.functions.empty()) fail(head, "states must be declared before functions");
      if (tokens.size() < 2) fail(head, "expected at least one state id");
      for (std::size_t k = 1; k < tokens.size(); ++k) {
        std::string id(tokens[k].text);
        if (id == "->") fail(tokens[k], "'->' is not a valid state id");
        if (!index_.emplace(id, data_.states.size()).second) fail(tokens[k], "duplicate state id '" + id + "'");
        data_.states.push_back(std::move(id));
      }
    } else if (head.text == "function") {
      if (tokens.size() != 4 || tokens[2].text != "prob") fail(head, "expected 'function <name> prob <decimal>'");
      auto prob = parse_decimal(tokens[3].text);
      if (!prob) fail(tokens[3], "cannot parse probability '" + std::string(tokens[3].text) + "'");
      if (data_.states.empty()) fail(head, "states must be declared before functions");
      current_ = MapFunction{std::string(tokens[1].text), std::vector<StateIndex>(data_.states.size(), kUnset), *prob};
      mappings_.clear();
      in_function_ = true;
      linear_body_ = false;
      function_line_ = line_no_;
    } else if (head.text == "linear") {
      auto clause = parse_linear(tokens);
      if (!clause.prob) fail(head, "one-line linear function needs prob=<decimal>");
      MapFunction fn;
      fn.prob = *clause.prob;
      fn.table = linear_table(clause, head);
      fn.name = clause.name.empty() ? "A" + std::to_string(data_.functions.size() + 1) : clause.name;
      data_.functions.push_back(std::move(fn));
    } else if (head.text == "end") {
      fail(head, "'end' outside a function");
    } else {
      fail(head, "unknown directive '" + std::string(head.text) + "'");
    }
  }

  void parse_mapping(const std::vector<Token>& tokens) {
    std::vector<Token> parts;
    for (const auto& tok : tokens) {
      // Split "a->b" / "a->" / "->b" forms.
      std::string_view rest = tok.text;
      std::size_t col = tok.column;
      while (!rest.empty()) {
        const auto arrow = rest.find("->");
        if (arrow == std::string_view::npos) {
          parts.push_back({rest, col});
          break;
        }
        if (arrow > 0) parts.push_back({rest.substr(0, arrow), col});
        parts.push_back({rest.substr(arrow, 2), col + arrow});
        col += arrow + 2;
        rest.remove_prefix(arrow + 2);
      }
    }
    if (parts.size() != 3 || parts[1].text != "->") fail(tokens.front(), "expected '<state> -> <state>'");
    const StateIndex from = lookup(parts[0]);
    const StateIndex to = lookup(parts[2]);
    if (current_.table[from] != kUnset)
      fail(parts[0], "state '" + std::string(parts[0].text) + "' mapped twice in function '" + current_.name + "'");
    current_.table[from] = to;
    mappings_.push_back(from);
  }

  StateIndex lookup(const Token& tok) const {
    auto it = index_.find(std::string(tok.text));
    if (it == index_.end()) fail(tok, "unknown state id '" + std::string(tok.text) + "'");
    return it->second;
  }

  void finish_function() {
    for (std::size_t u = 0; u < current_.table.size(); ++u)
      if (current_.table[u] == kUnset)
        fail(function_line_, 1, "function '" + current_.name + "' is missing a mapping for state '" +
                                    data_.states[u] + "'");
    data_.functions.push_back(std::move(current_));
    in_function_ = false;
  }

  LinearClause parse_linear(const std::vector<Token>& tokens) const {
    LinearClause clause;
    bool have_p = false, have_dim = false, have_matrix = false;
    for (std::size_t k = 1; k < tokens.size(); ++k) {
      const auto& tok = tokens[k];
      const auto eq = tok.text.find('=');
      if (eq == std::string_view::npos) fail(tok, "expected key=value");
      const auto key = tok.text.substr(0, eq);
      const auto value = tok.text.substr(eq + 1);
      if (key == "p") {
        auto p = parse_integer(value);
        if (!p || *p < 2 || *p > gf::kMaxModulus || !gf::is_prime(static_cast<gf::Value>(*p)))
          fail(tok, "p must be a prime <= " + std::to_string(gf::kMaxModulus));
        clause.p = static_cast<gf::Value>(*p);
        have_p = true;
      } else if (key == "dim") {
        auto d = parse_integer(value);
        if (!d || *d < 1 || *d > 16) fail(tok, "dim must be between 1 and 16");
        clause.dim = static_cast<std::size_t>(*d);
        have_dim = true;
      } else if (key == "matrix") {
        std::size_t start = 0;
        while (start <= value.size()) {
          const auto comma = value.find(',', start);
          const auto piece = value.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
          auto e = parse_integer(piece);
          if (!e) fail(tok, "cannot parse matrix entry '" + std::string(piece) + "'");
          clause.entries.push_back(*e);
          if (comma == std::string_view::npos) break;
          start = comma + 1;
        }
        have_matrix = true;
      } else if (key == "prob") {
        clause.prob = parse_decimal(value);
        if (!clause.prob) fail(tok, "cannot parse probability '" + std::string(value) + "'");
      } else if (key == "name") {
        if (value.empty()) fail(tok, "empty name");
        clause.name = std::string(value);
      } else {
        fail(tok, "unknown linear key '" + std::string(key) + "'");
      }
    }
    if (!have_p || !have_dim || !have_matrix) fail(tokens.front(), "linear needs p=, dim= and matrix=");
    if (clause.entries.size() != clause.dim * clause.dim)
      fail(tokens.front(), "matrix needs " + std::to_string(clause.dim * clause.dim) + " entries, got " +
                               std::to_string(clause.entries.size()));
    return clause;
  }

  std::vector<StateIndex> linear_table(const LinearClause& clause, const Token& at) {
    std::size_t count = 1;
    for (std::size_t i = 0; i < clause.dim; ++i) {
      count *= clause.p;
      if (count > 1'000'000) fail(at, "GF(p)^dim has more than 10^6 states");
    }
    const auto fds = gf::linear_fds(gf::Matrix(clause.p, clause.dim, clause.dim, clause.entries));
    if (data_.states.empty()) {
      if (in_function_) fail(at, "states must be declared before functions");
      data_.states = fds.states;
      for (std::size_t i = 0; i < fds.states.size(); ++i) index_.emplace(fds.states[i], i);
    }
    if (data_.states.size() != fds.states.size())
      fail(at, "linear function over GF(" + std::to_string(clause.p) + ")^" + std::to_string(clause.dim) +
                   " does not match the declared states");
    // Declared states may be in any order; translate through the labels.
    std::vector<StateIndex> to_declared(fds.states.size());
    for (std::size_t i = 0; i < fds.states.size(); ++i) {
      auto it = index_.find(fds.states[i]);
      if (it == index_.end()) fail(at, "state '" + fds.states[i] + "' of the linear space is not declared");
      to_declared[i] = it->second;
    }
    std::vector<StateIndex> table(fds.states.size());
    for (std::size_t i = 0; i < fds.states.size(); ++i) table[to_declared[i]] = to_declared[fds.map[i]];
    return table;
  }

  static constexpr StateIndex kUnset = static_cast<StateIndex>(-1);

  std::string_view text_;
  std::string source_;
  std::size_t line_no_ = 0;
  NetworkData data_;
  std::unordered_map<std::string, StateIndex> index_;
  bool in_function_ = false;
  bool linear_body_ = false;
  std::size_t function_line_ = 0;
  MapFunction current_;
  std::vector<StateIndex> mappings_;
};

inline std::string token_or(const std::string& s, const char* fallback) {
  if (s.empty()) return fallback;
  std::string out = s;
  for (auto& c : out)
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '#') c = '_';
  return out;
}

}  // namespace detail

inline Prn parse_network(std::string_view text, std::string source = "<input>") {
  return detail::NetworkParser(text, std::move(source)).parse();
}

inline std::string serialize_network(const Prn& net) {
  std::string out = "network " + detail::token_or(net.name(), "network") + "\nstates";
  for (const auto& s : net.states()) out += " " + s;
  out += '\n';
  for (const auto& fn : net.functions()) {
    out += "function " + fn.name + " prob " + format_g(fn.prob, 17) + '\n';
    for (std::size_t u = 0; u < fn.table.size(); ++u) out += "  " + net.state(u) + " -> " + net.state(fn.table[u]) + '\n';
    out += "end\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// DOT

namespace detail {

inline std::string dot_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + '"';
}

// %.6g, written ".33" rather than "0.33" below one.
inline std::string dot_probability(double p) {
  std::string s = format_g(p, 6);
  if (s.size() > 1 && s[0] == '0' && s[1] == '.') s.erase(0, 1);
  return s;
}

}  // namespace detail

inline std::string export_dot(const StochasticMatrix& t, const std::string& name = "prn") {
  std::string out = "digraph " + detail::dot_quote(name) + " {\n";
  for (const auto& s : t.order()) out += "  " + detail::dot_quote(s) + ";\n";
  for (std::size_t u = 0; u < t.size(); ++u)
    for (std::size_t v = 0; v < t.size(); ++v)
      if (t(u, v) > 0.0)
        out += "  " + detail::dot_quote(t.order()[u]) + " -> " + detail::dot_quote(t.order()[v]) + " [label=\"" +
               detail::dot_probability(t(u, v)) + "\"];\n";
  return out + "}\n";
}

inline std::string export_dot(const Prn& net) { return export_dot(transition_matrix(net), net.name()); }

// ---------------------------------------------------------------------------
// CSV: header row of state ids, then one row of decimals per state.

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r ") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

inline std::vector<std::vector<std::string>> csv_rows(std::string_view text, const std::string& source) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  std::size_t line = 1;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n') {
      if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
      }
      row.clear();
      field.clear();
      any = false;
      ++line;
    } else if (c != '\r') {
      field += c;
      any = true;
    }
  }
  if (quoted) throw ParseError(source, line, 0, "unterminated quoted field");
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace detail

inline std::string write_matrix_csv(const StochasticMatrix& t) {
  std::string out;
  for (std::size_t i = 0; i < t.size(); ++i) out += (i ? "," : "") + detail::csv_field(t.order()[i]);
  out += '\n';
  for (std::size_t u = 0; u < t.size(); ++u) {
    for (std::size_t v = 0; v < t.size(); ++v) out += (v ? "," : "") + format_g(t(u, v), 17);
    out += '\n';
  }
  return out;
}

inline StochasticMatrix read_matrix_csv(std::string_view text, const std::string& source = "<csv>") {
  const auto rows = detail::csv_rows(text, source);
  if (rows.empty()) throw ParseError(source, 1, 0, "empty matrix file");
  const auto& order = rows.front();
  const auto n = static_cast<Eigen::Index>(order.size());
  if (rows.size() != order.size() + 1)
    throw ParseError(source, 0, 0,
                     "expected " + std::to_string(order.size()) + " rows, found " + std::to_string(rows.size() - 1));
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& row = rows[static_cast<std::size_t>(r) + 1];
    if (row.size() != order.size())
      throw ParseError(source, static_cast<std::size_t>(r) + 2, 0, "row has " + std::to_string(row.size()) + " fields");
    for (Eigen::Index c = 0; c < n; ++c) {
      auto v = detail::parse_decimal(row[static_cast<std::size_t>(c)]);
      if (!v)
        throw ParseError(source, static_cast<std::size_t>(r) + 2, static_cast<std::size_t>(c) + 1,
                         "cannot parse '" + row[static_cast<std::size_t>(c)] + "'");
      m(r, c) = *v;
    }
  }
  try {
    return StochasticMatrix(order, std::move(m));
  } catch (const InvalidArgument& e) {
    throw ParseError(source, 0, 0, e.what());
  }
}

inline std::string write_distribution_csv(const Distribution& pi) {
  std::string out;
  for (std::size_t i = 0; i < pi.order.size(); ++i) out += (i ? "," : "") + detail::csv_field(pi.order[i]);
  out += '\n';
  for (Eigen::Index i = 0; i < pi.weights.size(); ++i) out += (i ? "," : "") + format_g(pi.weights(i), 17);
  return out + '\n';
}

// ---------------------------------------------------------------------------
// JSON: PBNs and state maps.

inline Pbn parse_pbn_json(std::string_view text, const std::string& source = "<pbn>") {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(source, 0, 0, std::string("invalid JSON: ") + e.what());
  }
  try {
    Pbn pbn;
    const auto n = doc.at("n").get<std::int64_t>();
    if (n < 1 || n > static_cast<std::int64_t>(kMaxPbnGenes))
      throw ParseError(source, 0, 0, "\"n\" must be between 1 and " + std::to_string(kMaxPbnGenes));
    pbn.genes = static_cast<std::size_t>(n);
    for (const auto& gene : doc.at("genes")) {
      std::vector<Predictor> list;
      for (const auto& entry : gene) {
        Predictor pred;
        const auto table = entry.at("table").get<std::string>();
        for (char c : table) {
          if (c != '0' && c != '1') throw ParseError(source, 0, 0, "truth table must contain only 0 and 1");
          pred.table.push_back(static_cast<std::uint8_t>(c - '0'));
        }
        pred.prob = entry.at("prob").get<double>();
        list.push_back(std::move(pred));
      }
      pbn.predictors.push_back(std::move(list));
    }
    auto report = validate_pbn(pbn);
    if (!report.ok()) throw ParseError(source, 0, 0, std::string("invalid PBN: ") + ValidationError(report).what());
    return pbn;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(source, 0, 0, std::string("bad PBN document: ") + e.what());
  }
}

inline std::string pbn_to_json(const Pbn& pbn) {
  nlohmann::json doc;
  doc["n"] = pbn.genes;
  doc["genes"] = nlohmann::json::array();
  for (const auto& list : pbn.predictors) {
    auto gene = nlohmann::json::array();
    for (const auto& pred : list) {
      std::string table;
      for (auto bit : pred.table) table += static_cast<char>('0' + bit);
      gene.push_back({{"table", table}, {"prob", pred.prob}});
    }
    doc["genes"].push_back(std::move(gene));
  }
  return doc.dump(2) + "\n";
}

// {"map": {"srcStateId": "dstStateId", ...}}, total over src states.
inline StateMap parse_state_map_json(std::string_view text, const Prn& src, const Prn& dst,
                                     const std::string& source = "<map>") {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(source, 0, 0, std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("map") || !doc["map"].is_object())
    throw ParseError(source, 0, 0, "expected an object with a \"map\" object");
  StateMap map{std::vector<StateIndex>(src.size(), 0), dst.size()};
  std::vector<bool> seen(src.size(), false);
  for (const auto& [key, value] : doc["map"].items()) {
    auto from = src.index_of(key);
    if (!from) throw ParseError(source, 0, 0, "unknown source state '" + key + "'");
    if (!value.is_string()) throw ParseError(source, 0, 0, "image of '" + key + "' is not a string");
    auto to = dst.index_of(value.get<std::string>());
    if (!to) throw ParseError(source, 0, 0, "unknown target state '" + value.get<std::string>() + "'");
    map.image[*from] = *to;
    seen[*from] = true;
  }
  for (std::size_t u = 0; u < src.size(); ++u)
    if (!seen[u]) throw ParseError(source, 0, 0, "no image for source state '" + src.state(u) + "'");
  return map;
}

inline std::string state_map_to_json(const StateMap& map, const Prn& src, const Prn& dst) {
  require_map_between(map, src, dst);
  nlohmann::ordered_json doc;
  doc["map"] = nlohmann::ordered_json::object();
  for (std::size_t u = 0; u < map.source_size(); ++u) doc["map"][src.state(u)] = dst.state(map.image[u]);
  return doc.dump(2) + "\n";
}

}  // namespace prn
