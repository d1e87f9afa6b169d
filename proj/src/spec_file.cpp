// Copyright 2026 The dloc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dloc/spec_file.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <set>

#include "dloc/errors.hpp"

namespace dloc {

double Polynomial::operator()(double t) const {
  double value = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) value = value * t + *it;
  return value;
}

PolyMatrix PolyMatrix::zero(int rows, int cols) {
  return PolyMatrix{rows, cols, std::vector<Polynomial>(static_cast<std::size_t>(rows) * cols)};
}

PolyMatrix PolyMatrix::constant(const Matrix& value) {
  PolyMatrix out = zero(static_cast<int>(value.rows()), static_cast<int>(value.cols()));
  for (int i = 0; i < out.rows; ++i) {
    for (int j = 0; j < out.cols; ++j) {
      if (value(i, j) != 0.0) out.at(i, j).coeffs = {value(i, j)};
    }
  }
  return out;
}

Matrix PolyMatrix::operator()(double t) const {
  Matrix out(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) out(i, j) = at(i, j)(t);
  }
  return out;
}

ProblemSpec ProblemSpec::zeros(int n, int m) {
  ProblemSpec spec;
  spec.n = n;
  spec.m = m;
  spec.A = PolyMatrix::zero(n, n);
  spec.A_D = PolyMatrix::zero(n, n);
  spec.g_B = PolyMatrix::zero(n, m);
  spec.g_c = PolyMatrix::zero(n, 1);
  spec.gD_B = PolyMatrix::zero(n, m);
  spec.gD_c = PolyMatrix::zero(n, 1);
  spec.f0_x = PolyMatrix::zero(n, 1);
  spec.f0_xr = PolyMatrix::zero(n, 1);
  spec.f0_quad = PolyMatrix::zero(2 * n, 2 * n);
  spec.g0_u = PolyMatrix::zero(m, 1);
  spec.g0_us = PolyMatrix::zero(m, 1);
  spec.g0_quad = PolyMatrix::zero(2 * m, 2 * m);
  spec.phi = PolyMatrix::zero(n, 1);
  spec.psi = PolyMatrix::zero(m, 1);
  spec.lower = Vector::Constant(m, -std::numeric_limits<double>::infinity());
  spec.upper = Vector::Constant(m, std::numeric_limits<double>::infinity());
  return spec;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

enum class Kind { integer, number, word, vector, matrix, number_vector };

struct KeyInfo {
  Kind kind;
  // Shape as a function of (n, m); vectors use cols = 1.
  std::function<std::pair<int, int>(int, int)> shape;
};

const std::map<std::string, std::map<std::string, KeyInfo>>& schema() {
  using Shape = std::function<std::pair<int, int>(int, int)>;
  static const Shape none = [](int, int) { return std::pair{0, 0}; };
  static const Shape nn = [](int n, int) { return std::pair{n, n}; };
  static const Shape nm = [](int n, int m) { return std::pair{n, m}; };
  static const Shape n1 = [](int n, int) { return std::pair{n, 1}; };
  static const Shape m1 = [](int, int m) { return std::pair{m, 1}; };
  static const Shape n2 = [](int n, int) { return std::pair{2 * n, 2 * n}; };
  static const Shape m2 = [](int, int m) { return std::pair{2 * m, 2 * m}; };
  static const std::map<std::string, std::map<std::string, KeyInfo>> table = {
      {"problem",
       {{"name", {Kind::word, none}},
        {"n", {Kind::integer, none}},
        {"m", {Kind::integer, none}},
        {"a", {Kind::number, none}},
        {"b", {Kind::number, none}},
        {"r", {Kind::number, none}},
        {"s", {Kind::number, none}}}},
      {"dynamics",
       {{"A", {Kind::matrix, nn}},
        {"A_D", {Kind::matrix, nn}},
        {"g.B", {Kind::matrix, nm}},
        {"g.c", {Kind::vector, n1}},
        {"gD.B", {Kind::matrix, nm}},
        {"gD.c", {Kind::vector, n1}}}},
      {"cost",
       {{"f0.x", {Kind::vector, n1}},
        {"f0.xr", {Kind::vector, n1}},
        {"f0.quad", {Kind::matrix, n2}},
        {"g0.u", {Kind::vector, m1}},
        {"g0.us", {Kind::vector, m1}},
        {"g0.quad", {Kind::matrix, m2}}}},
      {"history", {{"phi", {Kind::vector, n1}}, {"psi", {Kind::vector, m1}}}},
      {"control",
       {{"region", {Kind::word, none}},
        {"lower", {Kind::number_vector, m1}},
        {"upper", {Kind::number_vector, m1}}}},
  };
  return table;
}

class Parser {
 public:
  explicit Parser(const std::string& text) : text_(text) {}

  ProblemSpec run();

 private:
  [[noreturn]] void fail(const std::string& message) const { throw ParseError(message, line_, col_); }
  [[noreturn]] void fail_at(const std::string& message, int line, int col) const {
    throw ParseError(message, line, col);
  }

  bool done() const { return pos_ >= text_.size(); }
  char peek() const { return done() ? '\0' : text_[pos_]; }
  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }
  void skip_comment() {
    if (peek() == '#') {
      while (!done() && peek() != '\n') advance();
    }
  }
  // Spaces and tabs only; `newlines` also skips line breaks and comments.
  void skip_space(bool newlines) {
    while (!done()) {
      const char c = peek();
      if (c == ' ' || c == '\t' || c == '\r') {
        advance();
      } else if (newlines && (c == '\n' || c == '#')) {
        if (c == '#') {
          skip_comment();
        } else {
          advance();
        }
      } else {
        break;
      }
    }
  }
  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    advance();
  }

  std::string identifier();
  double number();
  long integer();
  Polynomial polynomial();
  std::vector<Polynomial> poly_list();
  PolyMatrix matrix_value(const std::pair<int, int>& shape, bool is_vector);
  Vector number_vector(int size);

  void section();
  void entry();
  void finish();

  const std::string& text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  std::string section_;
  std::map<std::string, std::set<std::string>> seen_;
  std::map<std::string, std::pair<int, int>> where_;  // "section.key" -> line, column
  bool have_n_ = false;
  bool have_m_ = false;
  ProblemSpec spec_;
  std::string region_ = "whole";
};

std::string Parser::identifier() {
  std::string out;
  while (!done()) {
    const char c = peek();
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-') {
      out += c;
      advance();
    } else {
      break;
    }
  }
  if (out.empty()) fail("expected an identifier");
  return out;
}

double Parser::number() {
  const std::size_t start = pos_;
  const int col = col_;
  std::size_t end = pos_;
  if (end < text_.size() && (text_[end] == '-' || text_[end] == '+')) ++end;
  if (text_.compare(end, 3, "inf") == 0) {
    end += 3;
  } else {
    while (end < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[end])) || text_[end] == '.')) {
      ++end;
    }
    if (end < text_.size() && (text_[end] == 'e' || text_[end] == 'E')) {
      std::size_t exp = end + 1;
      if (exp < text_.size() && (text_[exp] == '-' || text_[exp] == '+')) ++exp;
      if (exp < text_.size() && std::isdigit(static_cast<unsigned char>(text_[exp]))) {
        end = exp;
        while (end < text_.size() && std::isdigit(static_cast<unsigned char>(text_[end]))) ++end;
      }
    }
  }
  std::size_t parse_from = start;
  if (text_[start] == '+') ++parse_from;
  double value = 0.0;
  const auto result = std::from_chars(text_.data() + parse_from, text_.data() + end, value);
  if (end == start || result.ec != std::errc() || result.ptr != text_.data() + end ||
      std::isnan(value)) {
    fail_at("invalid number", line_, col);
  }
  while (pos_ < end) advance();
  return value;
}

long Parser::integer() {
  const int col = col_;
  const double value = number();
  if (value != std::floor(value) || std::abs(value) > 1e9) fail_at("expected an integer", line_, col);
  return static_cast<long>(value);
}

// poly := ['+'|'-'] term { ('+'|'-') term };  term := factor { '*' factor };
// factor := number | 't' ['^' digits]
Polynomial Parser::polynomial() {
  Polynomial poly;
  auto add = [&](double coeff, std::size_t degree) {
    if (poly.coeffs.size() <= degree) poly.coeffs.resize(degree + 1, 0.0);
    poly.coeffs[degree] += coeff;
  };
  bool first = true;
  while (true) {
    skip_space(true);
    double sign = 1.0;
    if (peek() == '+' || peek() == '-') {
      sign = peek() == '-' ? -1.0 : 1.0;
      advance();
      skip_space(true);
    } else if (!first) {
      break;
    }
    double coeff = sign;
    std::size_t degree = 0;
    while (true) {
      skip_space(true);
      if (peek() == 't') {
        advance();
        skip_space(true);
        if (peek() == '^') {
          advance();
          skip_space(true);
          const long power = integer();
          if (power < 0 || power > 64) fail("exponent must be between 0 and 64");
          degree += static_cast<std::size_t>(power);
        } else {
          degree += 1;
        }
      } else if (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.' ||
                 text_.compare(pos_, 3, "inf") == 0) {
        coeff *= number();
      } else {
        fail("expected a number or 't'");
      }
      skip_space(true);
      if (peek() != '*') break;
      advance();
    }
    add(coeff, degree);
    first = false;
  }
  while (!poly.coeffs.empty() && poly.coeffs.back() == 0.0) poly.coeffs.pop_back();
  for (double c : poly.coeffs) {
    if (!std::isfinite(c)) fail("polynomial coefficients must be finite");
  }
  return poly;
}

std::vector<Polynomial> Parser::poly_list() {
  skip_space(true);
  expect('[');
  std::vector<Polynomial> items;
  skip_space(true);
  if (peek() == ']') {
    advance();
    return items;
  }
  while (true) {
    items.push_back(polynomial());
    skip_space(true);
    if (peek() == ',') {
      advance();
      continue;
    }
    expect(']');
    return items;
  }
}

PolyMatrix Parser::matrix_value(const std::pair<int, int>& shape, bool is_vector) {
  const int line = line_;
  const int col = col_;
  auto mismatch = [&](int rows, int cols) {
    fail_at("expected a " + std::to_string(shape.first) + "x" + std::to_string(shape.second) +
                " value, found " + std::to_string(rows) + "x" + std::to_string(cols),
            line, col);
  };
  if (is_vector) {
    std::vector<Polynomial> items = poly_list();
    if (static_cast<int>(items.size()) != shape.first) mismatch(static_cast<int>(items.size()), 1);
    return PolyMatrix{shape.first, 1, std::move(items)};
  }
  skip_space(true);
  expect('[');
  PolyMatrix out{0, 0, {}};
  skip_space(true);
  while (peek() != ']') {
    std::vector<Polynomial> row = poly_list();
    if (out.rows > 0 && static_cast<int>(row.size()) != out.cols) {
      fail_at("matrix rows have different lengths", line, col);
    }
    out.cols = static_cast<int>(row.size());
    ++out.rows;
    for (auto& p : row) out.entries.push_back(std::move(p));
    skip_space(true);
    if (peek() == ',') {
      advance();
      skip_space(true);
    } else if (peek() != ']') {
      fail("expected ',' or ']'");
    }
  }
  advance();
  if (out.rows != shape.first || out.cols != shape.second) mismatch(out.rows, out.cols);
  return out;
}

Vector Parser::number_vector(int size) {
  const int line = line_;
  const int col = col_;
  skip_space(true);
  expect('[');
  std::vector<double> items;
  skip_space(true);
  while (peek() != ']') {
    items.push_back(number());
    skip_space(true);
    if (peek() == ',') {
      advance();
      skip_space(true);
    } else if (peek() != ']') {
      fail("expected ',' or ']'");
    }
  }
  advance();
  if (static_cast<int>(items.size()) != size) {
    fail_at("expected " + std::to_string(size) + " numbers, found " + std::to_string(items.size()),
            line, col);
  }
  return Eigen::Map<Vector>(items.data(), size);
}

void Parser::section() {
  const int line = line_;
  const int col = col_;
  expect('[');
  skip_space(false);
  const std::string name = identifier();
  skip_space(false);
  expect(']');
  if (!schema().count(name)) fail_at("unknown section '" + name + "'", line, col);
  if (name != "problem" && !(have_n_ && have_m_)) {
    fail_at("[problem] with n and m must come before [" + name + "]", line, col);
  }
  section_ = name;
}

void Parser::entry() {
  const int line = line_;
  const int col = col_;
  const std::string key = identifier();
  if (section_.empty()) fail_at("key '" + key + "' outside of a section", line, col);
  const auto& keys = schema().at(section_);
  const auto found = keys.find(key);
  if (found == keys.end()) fail_at("unknown key '" + key + "' in [" + section_ + "]", line, col);
  if (!seen_[section_].insert(key).second) {
    fail_at("duplicate key '" + key + "' in [" + section_ + "]", line, col);
  }
  where_[section_ + "." + key] = {line, col};
  skip_space(false);
  expect('=');
  skip_space(false);
  const int value_line = line_;
  const int value_col = col_;
  const KeyInfo& info = found->second;
  const auto shape = info.shape(spec_.n, spec_.m);

  if (section_ == "problem") {
    if (key == "name") {
      spec_.name = identifier();
    } else if (key == "n" || key == "m") {
      const long value = integer();
      if (value < 1) fail_at(key + " must be at least 1", value_line, value_col);
      if (key == "n") {
        spec_.n = static_cast<int>(value);
        have_n_ = true;
      } else {
        spec_.m = static_cast<int>(value);
        have_m_ = true;
      }
      if (have_n_ && have_m_) {
        const std::string name = spec_.name;
        const double a = spec_.a, b = spec_.b, r = spec_.r, s = spec_.s;
        spec_ = ProblemSpec::zeros(spec_.n, spec_.m);
        spec_.name = name;
        spec_.a = a;
        spec_.b = b;
        spec_.r = r;
        spec_.s = s;
      }
    } else {
      const double value = number();
      if (!std::isfinite(value)) fail_at(key + " must be finite", value_line, value_col);
      (key == "a" ? spec_.a : key == "b" ? spec_.b : key == "r" ? spec_.r : spec_.s) = value;
    }
  } else if (info.kind == Kind::word) {
    region_ = identifier();
    if (region_ != "whole" && region_ != "box") {
      fail_at("region must be 'whole' or 'box'", value_line, value_col);
    }
  } else if (info.kind == Kind::number_vector) {
    (key == "lower" ? spec_.lower : spec_.upper) = number_vector(shape.first);
  } else {
    PolyMatrix value = matrix_value(shape, info.kind == Kind::vector);
    static const std::map<std::string, PolyMatrix ProblemSpec::*> targets = {
        {"A", &ProblemSpec::A},         {"A_D", &ProblemSpec::A_D},
        {"g.B", &ProblemSpec::g_B},     {"g.c", &ProblemSpec::g_c},
        {"gD.B", &ProblemSpec::gD_B},   {"gD.c", &ProblemSpec::gD_c},
        {"f0.x", &ProblemSpec::f0_x},   {"f0.xr", &ProblemSpec::f0_xr},
        {"f0.quad", &ProblemSpec::f0_quad}, {"g0.u", &ProblemSpec::g0_u},
        {"g0.us", &ProblemSpec::g0_us}, {"g0.quad", &ProblemSpec::g0_quad},
        {"phi", &ProblemSpec::phi},     {"psi", &ProblemSpec::psi},
    };
    spec_.*(targets.at(key)) = std::move(value);
  }

  skip_space(false);
  skip_comment();
  if (!done() && peek() != '\n') fail("unexpected text after value");
}

void Parser::finish() {
  auto require = [&](const std::string& sec, const std::string& key) {
    if (!seen_[sec].count(key)) fail("missing key '" + key + "' in [" + sec + "]");
  };
  for (const char* key : {"n", "m", "a", "b", "r", "s"}) require("problem", key);
  require("dynamics", "A");
  require("history", "phi");
  auto fail_key = [&](const std::string& message, const std::string& sec, const std::string& key) {
    const auto [line, col] = where_.at(sec + "." + key);
    fail_at(message, line, col);
  };
  if (!(spec_.b > spec_.a)) fail_key("horizon needs b > a", "problem", "b");
  if (spec_.r < 0.0) fail_key("delays must be non-negative", "problem", "r");
  if (spec_.s < 0.0) fail_key("delays must be non-negative", "problem", "s");
  spec_.box = region_ == "box";
  if (spec_.box) {
    require("control", "lower");
    require("control", "upper");
    for (int i = 0; i < spec_.m; ++i) {
      if (spec_.lower[i] > spec_.upper[i]) fail_key("control box has lower > upper", "control", "upper");
    }
  } else {
    for (const char* key : {"lower", "upper"}) {
      if (seen_["control"].count(key)) fail_key("bounds given for region 'whole'", "control", key);
    }
  }
}

ProblemSpec Parser::run() {
  while (true) {
    skip_space(true);
    if (done()) break;
    if (peek() == '[') {
      section();
    } else {
      entry();
    }
    skip_space(false);
    skip_comment();
    if (!done() && peek() != '\n') fail("unexpected text");
  }
  finish();
  return spec_;
}

// ---------------------------------------------------------------------------
// Printing

void append_number(std::string& out, double value) {
  char buffer[32];
  const auto result =
      std::to_chars(buffer, buffer + sizeof buffer, value, std::chars_format::general, 17);
  out.append(buffer, result.ptr);
}

std::string format_polynomial(const Polynomial& poly) {
  std::string out;
  for (std::size_t d = 0; d < poly.coeffs.size(); ++d) {
    const double c = poly.coeffs[d];
    if (c == 0.0) continue;
    if (out.empty()) {
      if (c < 0.0) out += '-';
    } else {
      out += c < 0.0 ? " - " : " + ";
    }
    append_number(out, std::abs(c));
    if (d >= 1) out += "*t";
    if (d >= 2) out += "^" + std::to_string(d);
  }
  return out.empty() ? "0" : out;
}

std::string format_vector(const PolyMatrix& v) {
  std::string out = "[";
  for (int i = 0; i < v.rows; ++i) {
    if (i > 0) out += ", ";
    out += format_polynomial(v.at(i, 0));
  }
  return out + "]";
}

std::string format_matrix_value(const PolyMatrix& mat) {
  std::string out = "[";
  for (int i = 0; i < mat.rows; ++i) {
    if (i > 0) out += ", ";
    out += '[';
    for (int j = 0; j < mat.cols; ++j) {
      if (j > 0) out += ", ";
      out += format_polynomial(mat.at(i, j));
    }
    out += ']';
  }
  return out + "]";
}

std::string format_numbers(const Vector& v) {
  std::string out = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i > 0) out += ", ";
    append_number(out, v[i]);
  }
  return out + "]";
}

}  // namespace

ProblemSpec parse_spec(const std::string& text) { return Parser(text).run(); }

std::string format_spec(const ProblemSpec& spec) {
  std::string out;
  auto number_line = [&](const char* key, double value) {
    out += key;
    out += " = ";
    append_number(out, value);
    out += '\n';
  };
  out += "[problem]\nname = " + spec.name + "\n";
  out += "n = " + std::to_string(spec.n) + "\nm = " + std::to_string(spec.m) + "\n";
  number_line("a", spec.a);
  number_line("b", spec.b);
  number_line("r", spec.r);
  number_line("s", spec.s);
  out += "\n[dynamics]\n";
  out += "A = " + format_matrix_value(spec.A) + "\n";
  out += "A_D = " + format_matrix_value(spec.A_D) + "\n";
  out += "g.B = " + format_matrix_value(spec.g_B) + "\n";
  out += "g.c = " + format_vector(spec.g_c) + "\n";
  out += "gD.B = " + format_matrix_value(spec.gD_B) + "\n";
  out += "gD.c = " + format_vector(spec.gD_c) + "\n";
  out += "\n[cost]\n";
  out += "f0.x = " + format_vector(spec.f0_x) + "\n";
  out += "f0.xr = " + format_vector(spec.f0_xr) + "\n";
  out += "f0.quad = " + format_matrix_value(spec.f0_quad) + "\n";
  out += "g0.u = " + format_vector(spec.g0_u) + "\n";
  out += "g0.us = " + format_vector(spec.g0_us) + "\n";
  out += "g0.quad = " + format_matrix_value(spec.g0_quad) + "\n";
  out += "\n[history]\n";
  out += "phi = " + format_vector(spec.phi) + "\n";
  out += "psi = " + format_vector(spec.psi) + "\n";
  out += "\n[control]\n";
  if (spec.box) {
    out += "region = box\n";
    out += "lower = " + format_numbers(spec.lower) + "\n";
    out += "upper = " + format_numbers(spec.upper) + "\n";
  } else {
    out += "region = whole\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Conversion

DelayedProblem to_problem(const ProblemSpec& spec_in) {
  const auto spec = std::make_shared<const ProblemSpec>(spec_in);
  const int n = spec->n;
  const int m = spec->m;
  auto column = [](const PolyMatrix& v, double t) -> Vector { return v(t).col(0); };

  DelayedProblem p;
  p.name = spec->name;
  p.n = n;
  p.m = m;
  p.A = [spec](double t) { return spec->A(t); };
  p.A_D = [spec](double t) { return spec->A_D(t); };
  p.g = [spec, column](double t, const Vector& u) -> Vector {
    return spec->g_B(t) * u + column(spec->g_c, t);
  };
  p.g_D = [spec, column](double t, const Vector& v) -> Vector {
    return spec->gD_B(t) * v + column(spec->gD_c, t);
  };
  p.dg_du = [spec](double t, const Vector&) { return spec->g_B(t); };
  p.dgD_dv = [spec](double t, const Vector&) { return spec->gD_B(t); };

  auto stack = [](const Vector& top, const Vector& bottom) {
    Vector z(top.size() + bottom.size());
    z << top, bottom;
    return z;
  };
  p.f0 = [spec, column, stack](double t, const Vector& x, const Vector& y) {
    const Vector z = stack(x, y);
    return column(spec->f0_x, t).dot(x) + column(spec->f0_xr, t).dot(y) +
           z.dot(spec->f0_quad(t) * z);
  };
  auto f0_grad = [spec, column, stack, n](double t, const Vector& x, const Vector& y) -> Vector {
    const Matrix q = spec->f0_quad(t);
    const Vector z = stack(x, y);
    Vector grad = (q + q.transpose()) * z;
    grad.head(n) += column(spec->f0_x, t);
    grad.tail(n) += column(spec->f0_xr, t);
    return grad;
  };
  p.d2_f0 = [f0_grad, n](double t, const Vector& x, const Vector& y) -> Vector {
    return f0_grad(t, x, y).head(n);
  };
  p.d3_f0 = [f0_grad, n](double t, const Vector& x, const Vector& y) -> Vector {
    return f0_grad(t, x, y).tail(n);
  };
  p.g0 = [spec, column, stack](double t, const Vector& u, const Vector& v) {
    const Vector w = stack(u, v);
    return column(spec->g0_u, t).dot(u) + column(spec->g0_us, t).dot(v) +
           w.dot(spec->g0_quad(t) * w);
  };
  auto g0_grad = [spec, column, stack, m](double t, const Vector& u, const Vector& v) -> Vector {
    const Matrix q = spec->g0_quad(t);
    const Vector w = stack(u, v);
    Vector grad = (q + q.transpose()) * w;
    grad.head(m) += column(spec->g0_u, t);
    grad.tail(m) += column(spec->g0_us, t);
    return grad;
  };
  p.d2_g0 = [g0_grad, m](double t, const Vector& u, const Vector& v) -> Vector {
    return g0_grad(t, u, v).head(m);
  };
  p.d3_g0 = [g0_grad, m](double t, const Vector& u, const Vector& v) -> Vector {
    return g0_grad(t, u, v).tail(m);
  };
  p.phi = [spec, column](double t) { return column(spec->phi, t); };
  p.psi = [spec, column](double t) { return column(spec->psi, t); };
  p.horizon = {spec->a, spec->b};
  p.delays = {spec->r, spec->s};
  p.region = spec->box ? ControlRegion::box(spec->lower, spec->upper) : ControlRegion::whole_space(m);
  return p;
}

}  // namespace dloc
