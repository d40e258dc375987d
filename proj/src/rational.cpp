#include "furstenberg/rational.hpp"

#include <cctype>

#include "furstenberg/errors.hpp"

namespace furstenberg {

namespace {
constexpr std::string_view kModule = "measures";
}

mpq_class parse_rational(const std::string& raw) {
  std::string text;
  for (char c : raw)
    if (!std::isspace(static_cast<unsigned char>(c))) text.push_back(c);
  if (text.empty()) throw Error(kModule, ErrorCode::ParseError, "empty rational");
  try {
    const auto dot = text.find('.');
    if (dot != std::string::npos) {
      std::string digits = text.substr(0, dot) + text.substr(dot + 1);
      if (digits.empty() || digits == "-" || digits == "+" ||
          text.find_first_of("/eE") != std::string::npos)
        throw Error(kModule, ErrorCode::ParseError, "bad decimal '" + raw + "'");
      if (digits[0] == '+') digits.erase(0, 1);
      mpz_class num(digits, 10);
      mpz_class den;
      mpz_ui_pow_ui(den.get_mpz_t(), 10, text.size() - dot - 1);
      mpq_class q(num, den);
      q.canonicalize();
      return q;
    }
    std::string t = text[0] == '+' ? text.substr(1) : text;
    mpq_class q(t, 10);
    if (q.get_den() == 0) throw Error(kModule, ErrorCode::ParseError, "zero denominator");
    q.canonicalize();
    return q;
  } catch (const std::invalid_argument&) {
    throw Error(kModule, ErrorCode::ParseError, "bad rational '" + raw + "'");
  }
}

RationalMatrix::RationalMatrix(std::size_t dim) : dim_(dim), a_(dim * dim) {}

RationalMatrix::RationalMatrix(std::size_t dim, std::vector<mpq_class> row_major)
    : dim_(dim), a_(std::move(row_major)) {
  if (a_.size() != dim * dim)
    throw Error(kModule, ErrorCode::DimensionMismatch, "rational matrix entry count");
}

RationalMatrix RationalMatrix::parse(std::size_t dim, const std::vector<std::string>& entries) {
  if (entries.size() != dim * dim)
    throw Error(kModule, ErrorCode::DimensionMismatch,
                "expected " + std::to_string(dim * dim) + " exact entries");
  std::vector<mpq_class> a;
  a.reserve(entries.size());
  for (const auto& e : entries) a.push_back(parse_rational(e));
  return RationalMatrix(dim, std::move(a));
}

RationalMatrix RationalMatrix::identity(std::size_t dim) {
  RationalMatrix m(dim);
  for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1;
  return m;
}

mpq_class RationalMatrix::determinant() const {
  std::vector<mpq_class> m = a_;
  const std::size_t d = dim_;
  mpq_class det = 1;
  for (std::size_t c = 0; c < d; ++c) {
    std::size_t piv = c;
    while (piv < d && m[piv * d + c] == 0) ++piv;
    if (piv == d) return 0;
    if (piv != c) {
      for (std::size_t j = 0; j < d; ++j) std::swap(m[c * d + j], m[piv * d + j]);
      det = -det;
    }
    det *= m[c * d + c];
    for (std::size_t r = c + 1; r < d; ++r) {
      if (m[r * d + c] == 0) continue;
      const mpq_class f = m[r * d + c] / m[c * d + c];
      for (std::size_t j = c; j < d; ++j) m[r * d + j] -= f * m[c * d + j];
    }
  }
  return det;
}

RationalMatrix RationalMatrix::inverse() const {
  const std::size_t d = dim_;
  RationalMatrix a = *this;
  RationalMatrix inv = identity(d);
  for (std::size_t c = 0; c < d; ++c) {
    std::size_t piv = c;
    while (piv < d && a(piv, c) == 0) ++piv;
    if (piv == d) throw Error(kModule, ErrorCode::NonInvertible, "singular rational matrix");
    if (piv != c)
      for (std::size_t j = 0; j < d; ++j) {
        std::swap(a(c, j), a(piv, j));
        std::swap(inv(c, j), inv(piv, j));
      }
    const mpq_class p = a(c, c);
    for (std::size_t j = 0; j < d; ++j) {
      a(c, j) /= p;
      inv(c, j) /= p;
    }
    for (std::size_t r = 0; r < d; ++r) {
      if (r == c || a(r, c) == 0) continue;
      const mpq_class f = a(r, c);
      for (std::size_t j = 0; j < d; ++j) {
        a(r, j) -= f * a(c, j);
        inv(r, j) -= f * inv(c, j);
      }
    }
  }
  return inv;
}

SquareMatrix RationalMatrix::to_double() const {
  std::vector<double> v;
  v.reserve(a_.size());
  for (const auto& q : a_) v.push_back(q.get_d());
  return SquareMatrix(dim_, std::move(v));
}

std::vector<std::string> RationalMatrix::to_strings() const {
  std::vector<std::string> out;
  out.reserve(a_.size());
  for (const auto& q : a_) out.push_back(q.get_str());
  return out;
}

bool RationalMatrix::is_identity() const { return *this == identity(dim_); }

bool RationalMatrix::is_minus_identity() const {
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = 0; j < dim_; ++j)
      if ((*this)(i, j) != (i == j ? -1 : 0)) return false;
  return true;
}

RationalMatrix operator*(const RationalMatrix& x, const RationalMatrix& y) {
  if (x.dim_ != y.dim_) throw Error(kModule, ErrorCode::DimensionMismatch, "rational product");
  const std::size_t d = x.dim_;
  RationalMatrix z(d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t k = 0; k < d; ++k) {
      if (x(i, k) == 0) continue;
      for (std::size_t j = 0; j < d; ++j) z(i, j) += x(i, k) * y(k, j);
    }
  return z;
}

bool operator==(const RationalMatrix& x, const RationalMatrix& y) {
  return x.dim_ == y.dim_ && x.a_ == y.a_;
}

}  // namespace furstenberg
