#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "prn/core.hpp"
#include "prn/error.hpp"

namespace prn::gf {

using Value = std::uint32_t;

// Primality is checked by trial division up to this modulus.
inline constexpr Value kMaxModulus = 65521;

inline bool is_prime(Value p) {
  if (p < 2) return false;
  for (Value d = 2; d * d <= p; ++d)
    if (p % d == 0) return false;
  return true;
}

inline void require_prime(Value p) {
  if (p > kMaxModulus) throw InvalidArgument("modulus " + std::to_string(p) + " exceeds " + std::to_string(kMaxModulus));
  if (!is_prime(p)) throw InvalidArgument("modulus " + std::to_string(p) + " is not prime");
}

class Element {
 public:
  Element(std::int64_t value, Value p) : p_(p) {
    require_prime(p);
    const auto m = static_cast<std::int64_t>(p);
    value_ = static_cast<Value>(((value % m) + m) % m);
  }

  Value value() const noexcept { return value_; }
  Value modulus() const noexcept { return p_; }

  friend Element operator+(Element a, Element b) { return {std::int64_t{a.value_} + b.value_, same(a, b)}; }
  friend Element operator-(Element a, Element b) { return {std::int64_t{a.value_} - b.value_, same(a, b)}; }
  friend Element operator*(Element a, Element b) {
    return {static_cast<std::int64_t>(std::uint64_t{a.value_} * b.value_ % same(a, b)), a.p_};
  }
  friend bool operator==(Element a, Element b) { return a.p_ == b.p_ && a.value_ == b.value_; }

 private:
  static Value same(Element a, Element b) {
    if (a.p_ != b.p_) throw InvalidArgument("mixed moduli");
    return a.p_;
  }

  Value value_;
  Value p_;
};

// Dense matrix over GF(p), row-major, entries reduced.
class Matrix {
 public:
  Matrix(Value p, std::size_t rows, std::size_t cols, std::vector<std::int64_t> entries = {})
      : p_(p), rows_(rows), cols_(cols), data_(rows * cols, 0) {
    require_prime(p);
    if (!entries.empty() && entries.size() != rows * cols)
      throw InvalidArgument("matrix needs " + std::to_string(rows * cols) + " entries, got " +
                            std::to_string(entries.size()));
    const auto m = static_cast<std::int64_t>(p);
    for (std::size_t i = 0; i < entries.size(); ++i) data_[i] = static_cast<Value>(((entries[i] % m) + m) % m);
  }

  static Matrix identity(Value p, std::size_t n) {
    Matrix m(p, n, n);
    for (std::size_t i = 0; i < n; ++i) m.set(i, i, 1);
    return m;
  }

  Value modulus() const noexcept { return p_; }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  Value operator()(std::size_t r, std::size_t c) const { return data_.at(r * cols_ + c); }
  void set(std::size_t r, std::size_t c, std::int64_t v) {
    const auto m = static_cast<std::int64_t>(p_);
    data_.at(r * cols_ + c) = static_cast<Value>(((v % m) + m) % m);
  }

  std::vector<Value> apply(const std::vector<Value>& x) const {
    if (x.size() != cols_) throw InvalidArgument("vector length does not match matrix");
    std::vector<Value> y(rows_, 0);
    for (std::size_t r = 0; r < rows_; ++r) {
      std::uint64_t acc = 0;
      for (std::size_t c = 0; c < cols_; ++c) acc = (acc + std::uint64_t{(*this)(r, c)} * x[c]) % p_;
      y[r] = static_cast<Value>(acc);
    }
    return y;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  Value p_;
  std::size_t rows_;
  std::size_t cols_;
  std::vector<Value> data_;
};

// Polynomial over GF(p), constant term first.
struct Polynomial {
  Value p = 2;
  std::vector<Value> coefficients;

  std::size_t degree() const { return coefficients.empty() ? 0 : coefficients.size() - 1; }
  bool monic() const { return !coefficients.empty() && coefficients.back() == 1; }
  friend bool operator==(const Polynomial&, const Polynomial&) = default;
};

inline Polynomial make_polynomial(Value p, const std::vector<std::int64_t>& coefficients) {
  require_prime(p);
  Polynomial poly{p, {}};
  const auto m = static_cast<std::int64_t>(p);
  for (auto c : coefficients) poly.coefficients.push_back(static_cast<Value>(((c % m) + m) % m));
  while (poly.coefficients.size() > 1 && poly.coefficients.back() == 0) poly.coefficients.pop_back();
  return poly;
}

namespace detail {

using Poly = std::vector<Value>;  // constant first, not trimmed

inline Poly poly_mul(const Poly& a, const Poly& b, Value p) {
  Poly out(a.size() + b.size() - 1, 0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      out[i + j] = static_cast<Value>((out[i + j] + std::uint64_t{a[i]} * b[j]) % p);
  return out;
}

inline void poly_accumulate(Poly& acc, const Poly& term, bool negate, Value p) {
  if (acc.size() < term.size()) acc.resize(term.size(), 0);
  for (std::size_t i = 0; i < term.size(); ++i) {
    const Value t = negate ? (p - term[i]) % p : term[i];
    acc[i] = (acc[i] + t) % p;
  }
}

// Laplace expansion along the first row of a matrix with polynomial entries.
inline Poly poly_determinant(const std::vector<std::vector<Poly>>& m, Value p) {
  const std::size_t n = m.size();
  if (n == 1) return m[0][0];
  Poly det{0};
  for (std::size_t col = 0; col < n; ++col) {
    std::vector<std::vector<Poly>> minor;
    for (std::size_t r = 1; r < n; ++r) {
      std::vector<Poly> row;
      for (std::size_t c = 0; c < n; ++c)
        if (c != col) row.push_back(m[r][c]);
      minor.push_back(std::move(row));
    }
    poly_accumulate(det, poly_mul(m[0][col], poly_determinant(minor, p), p), col % 2 == 1, p);
  }
  return det;
}

}  // namespace detail

// det(lambda I - m) by cofactor expansion; exponential in the dimension.
inline Polynomial characteristic_polynomial(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0) throw InvalidArgument("characteristic polynomial needs a square matrix");
  const Value p = m.modulus();
  std::vector<std::vector<detail::Poly>> entries(m.rows(), std::vector<detail::Poly>(m.cols()));
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) {
      const Value negated = (p - m(r, c)) % p;
      entries[r][c] = r == c ? detail::Poly{negated, 1} : detail::Poly{negated};
    }
  auto coeffs = detail::poly_determinant(entries, p);
  Polynomial out{p, std::move(coeffs)};
  while (out.coefficients.size() > 1 && out.coefficients.back() == 0) out.coefficients.pop_back();
  return out;
}

inline constexpr std::size_t kCompanionSelfCheckDegree = 4;

// Standard companion matrix: ones on the subdiagonal, last column holds the
// negated coefficients c0..c_{d-1}.
inline Matrix companion_matrix(const Polynomial& poly) {
  require_prime(poly.p);
  if (poly.degree() < 1) throw InvalidArgument("companion matrix needs degree >= 1");
  for (auto c : poly.coefficients)
    if (c >= poly.p) throw InvalidArgument("coefficient " + std::to_string(c) + " is not reduced mod " + std::to_string(poly.p));
  if (!poly.monic()) throw InvalidArgument("polynomial is not monic");
  const std::size_t d = poly.degree();
  Matrix m(poly.p, d, d);
  for (std::size_t i = 1; i < d; ++i) m.set(i, i - 1, 1);
  for (std::size_t i = 0; i < d; ++i) m.set(i, d - 1, -static_cast<std::int64_t>(poly.coefficients[i]));
  if (d <= kCompanionSelfCheckDegree && !(characteristic_polynomial(m) == poly))
    throw Error("companion matrix self-check failed");
  return m;
}

// x -> m x on GF(p)^d, states in lexicographic order.
inline Fds linear_fds(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0) throw InvalidArgument("linear FDS needs a square matrix");
  const std::size_t d = m.rows();
  const Value p = m.modulus();
  Fds fds;
  fds.states = tuple_labels(p, d);
  const std::size_t count = fds.states.size();
  fds.map.resize(count);
  std::vector<Value> x(d);
  for (std::size_t s = 0; s < count; ++s) {
    std::size_t rest = s;
    for (std::size_t i = d; i-- > 0;) {
      x[i] = static_cast<Value>(rest % p);
      rest /= p;
    }
    const auto y = m.apply(x);
    std::size_t t = 0;
    for (auto v : y) t = t * p + v;
    fds.map[s] = t;
  }
  return fds;
}

struct LinearFunction {
  std::string name;
  Matrix matrix;
  double prob = 0.0;
};

inline Prn linear_prn(const std::vector<LinearFunction>& functions, std::string name = "linear") {
  if (functions.empty()) throw InvalidArgument("linear PRN needs at least one function");
  const auto& first = functions.front().matrix;
  NetworkData data;
  data.name = std::move(name);
  for (std::size_t k = 0; k < functions.size(); ++k) {
    const auto& fn = functions[k];
    if (fn.matrix.rows() != first.rows() || fn.matrix.cols() != first.cols() ||
        fn.matrix.modulus() != first.modulus())
      throw InvalidArgument("linear function '" + fn.name + "' differs in dimension or modulus");
    auto fds = linear_fds(fn.matrix);
    if (k == 0) data.states = fds.states;
    data.functions.push_back({fn.name.empty() ? "A" + std::to_string(k + 1) : fn.name, std::move(fds.map), fn.prob});
  }
  return Prn(std::move(data));
}

// Representatives for the characteristic polynomials lambda^2, lambda^2 +
// lambda, lambda^2 + 1, lambda^2 + lambda + 1 over GF(2)^2, as A1..A4.
inline std::vector<Matrix> z2_square_representatives() {
  return {Matrix(2, 2, 2, {0, 0, 0, 0}), Matrix(2, 2, 2, {0, 0, 0, 1}), Matrix(2, 2, 2, {1, 0, 0, 1}),
          Matrix(2, 2, 2, {0, 1, 1, 1})};
}

// The linear maps of GF(3): x, 2x, 0.
inline std::vector<Matrix> z3_linear_maps() { return {Matrix(3, 1, 1, {1}), Matrix(3, 1, 1, {2}), Matrix(3, 1, 1, {0})}; }

}  // namespace prn::gf
