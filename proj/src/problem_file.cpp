#include "onephase/problem_file.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace onephase {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Token {
  std::string_view text;
  int column;  // 1-based
};

std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size()) break;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    out.push_back({line.substr(start, i - start), static_cast<int>(start) + 1});
  }
  return out;
}

enum class Section { Header, Objective, Constraints, Bounds, Start };

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  ProblemFile run() {
    std::size_t pos = 0;
    while (pos <= text_.size()) {
      const std::size_t end = std::min(text_.find('\n', pos), text_.size());
      ++line_no_;
      line(text_.substr(pos, end - pos));
      if (end == text_.size()) break;
      pos = end + 1;
    }
    if (!have_n_) throw ParseError(line_no_, 1, "missing 'variables' declaration");
    std::sort(out_.quadratic.begin(), out_.quadratic.end(),
              [](const auto& a, const auto& b) { return std::pair(a.i, a.j) < std::pair(b.i, b.j); });
    return out_;
  }

 private:
  [[noreturn]] void fail(const Token& at, const std::string& msg) const {
    throw ParseError(line_no_, at.column, msg);
  }

  double number(const Token& t) const {
    std::string_view s = t.text;
    if (s == "inf" || s == "+inf") return kInf;
    if (s == "-inf") return -kInf;
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || std::isnan(v) || s.empty() ||
        std::isinf(v)) {
      fail(t, "malformed number '" + std::string(t.text) + "'");
    }
    return v;
  }

  double finite_number(const Token& t) const {
    const double v = number(t);
    if (!std::isfinite(v)) fail(t, "expected a finite number");
    return v;
  }

  int index(const Token& t, int limit, const char* what) const {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc() || ptr != t.text.data() + t.text.size()) {
      fail(t, std::string("malformed ") + what + " '" + std::string(t.text) + "'");
    }
    if (v < 0 || v >= limit) {
      fail(t, std::string(what) + " " + std::to_string(v) + " out of range [0, " +
                  std::to_string(limit) + ")");
    }
    return v;
  }

  void expect_count(const std::vector<Token>& toks, std::size_t count, const std::string& what) {
    if (toks.size() != count) {
      const Token& at = toks.size() > count ? toks[count] : toks.back();
      fail(at, what + " expects " + std::to_string(count - 1) + " value(s), got " +
                   std::to_string(toks.size() - 1));
    }
  }

  void require_n(const Token& t) const {
    if (!have_n_) fail(t, "'variables' must be declared before any section");
  }

  std::vector<double> vector_of(const std::vector<Token>& toks, std::size_t first,
                                const std::string& what) {
    if (toks.size() - first != static_cast<std::size_t>(out_.n)) {
      const Token& at = toks.size() > first + out_.n ? toks[first + out_.n] : toks.back();
      fail(at, what + " has " + std::to_string(toks.size() - first) + " entries, expected " +
                   std::to_string(out_.n));
    }
    std::vector<double> v;
    v.reserve(out_.n);
    for (std::size_t k = first; k < toks.size(); ++k) v.push_back(finite_number(toks[k]));
    return v;
  }

  void line(std::string_view raw) {
    const std::vector<Token> toks = tokenize(raw);
    if (toks.empty() || toks.front().text.front() == '#') return;
    const Token& head = toks.front();

    if (head.text.front() == '[') {
      require_n(head);
      if (toks.size() != 1) fail(toks[1], "unexpected text after section header");
      static const std::map<std::string_view, Section> names = {
          {"[objective]", Section::Objective},
          {"[constraints]", Section::Constraints},
          {"[bounds]", Section::Bounds},
          {"[start]", Section::Start}};
      const auto it = names.find(head.text);
      if (it == names.end()) fail(head, "unknown section " + std::string(head.text));
      if (!seen_sections_.insert(it->second).second) {
        fail(head, "section " + std::string(head.text) + " appears twice");
      }
      section_ = it->second;
      return;
    }

    switch (section_) {
      case Section::Header:
        header(toks);
        return;
      case Section::Objective:
        objective(toks);
        return;
      case Section::Constraints:
        constraint(toks);
        return;
      case Section::Bounds:
        bound(toks);
        return;
      case Section::Start:
        if (out_.start) fail(head, "[start] holds a single line");
        out_.start = vector_of(toks, 0, "start point");
        return;
    }
  }

  void header(const std::vector<Token>& toks) {
    const Token& head = toks.front();
    if (head.text == "name") {
      expect_count(toks, 2, "name");
      if (have_name_) fail(head, "duplicate 'name'");
      have_name_ = true;
      out_.name = std::string(toks[1].text);
    } else if (head.text == "variables") {
      expect_count(toks, 2, "variables");
      if (have_n_) fail(head, "duplicate 'variables'");
      const int n = index(toks[1], std::numeric_limits<int>::max(), "variable count");
      if (n == 0) fail(toks[1], "variable count must be positive");
      have_n_ = true;
      out_ = ProblemFile::empty(n, std::move(out_.name));
    } else {
      fail(head, "unknown statement '" + std::string(head.text) + "'");
    }
  }

  void objective(const std::vector<Token>& toks) {
    const Token& head = toks.front();
    if (head.text == "constant") {
      expect_count(toks, 2, "constant");
      if (have_constant_) fail(head, "duplicate 'constant'");
      have_constant_ = true;
      out_.constant = finite_number(toks[1]);
    } else if (head.text == "linear") {
      if (have_linear_) fail(head, "duplicate 'linear'");
      have_linear_ = true;
      out_.linear = vector_of(toks, 1, "linear term");
    } else if (head.text == "quadratic") {
      expect_count(toks, 4, "quadratic");
      int i = index(toks[1], out_.n, "row index");
      int j = index(toks[2], out_.n, "column index");
      if (i > j) std::swap(i, j);
      if (!quadratic_seen_.insert({i, j}).second) {
        fail(head, "duplicate quadratic entry (" + std::to_string(i) + ", " + std::to_string(j) +
                       ")");
      }
      out_.quadratic.push_back({i, j, finite_number(toks[3])});
    } else {
      fail(head, "unknown objective statement '" + std::string(head.text) + "'");
    }
  }

  void constraint(const std::vector<Token>& toks) {
    const std::size_t row = out_.constraints.size();
    const std::size_t expected = static_cast<std::size_t>(out_.n) + 2;
    if (toks.size() != expected) {
      const Token& at = toks.size() > expected ? toks[expected] : toks.back();
      fail(at, "constraint row " + std::to_string(row) + " has " +
                   std::to_string(static_cast<long>(toks.size()) - 2) + " coefficients, expected " +
                   std::to_string(out_.n));
    }
    ProblemFile::Row r;
    for (int k = 0; k < out_.n; ++k) r.coeffs.push_back(finite_number(toks[k]));
    const Token& rel = toks[out_.n];
    if (rel.text == "<=") {
      r.relation = Relation::LessEqual;
    } else if (rel.text == ">=") {
      r.relation = Relation::GreaterEqual;
    } else if (rel.text == "==") {
      r.relation = Relation::Equal;
    } else {
      fail(rel, "constraint row " + std::to_string(row) + ": expected <=, >= or ==");
    }
    r.rhs = finite_number(toks[out_.n + 1]);
    out_.constraints.push_back(std::move(r));
  }

  void bound(const std::vector<Token>& toks) {
    expect_count(toks, 3, "bound");
    const int j = index(toks[0], out_.n, "variable index");
    if (!bounded_.insert(j).second) {
      fail(toks[0], "duplicate bounds for variable " + std::to_string(j));
    }
    const double l = number(toks[1]);
    const double u = number(toks[2]);
    if (l == kInf) fail(toks[1], "lower bound cannot be +inf");
    if (u == -kInf) fail(toks[2], "upper bound cannot be -inf");
    if (l > u) fail(toks[1], "lower bound exceeds upper bound");
    out_.lower[j] = l;
    out_.upper[j] = u;
  }

  std::string_view text_;
  int line_no_ = 0;
  Section section_ = Section::Header;
  std::set<Section> seen_sections_;
  std::set<std::pair<int, int>> quadratic_seen_;
  std::set<int> bounded_;
  bool have_n_ = false;
  bool have_name_ = false;
  bool have_constant_ = false;
  bool have_linear_ = false;
  ProblemFile out_;
};

void put_number(std::string& out, double v) {
  if (v == kInf) {
    out += "inf";
    return;
  }
  if (v == -kInf) {
    out += "-inf";
    return;
  }
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

void put_vector(std::string& out, const std::vector<double>& v) {
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k > 0) out += ' ';
    put_number(out, v[k]);
  }
}

}  // namespace

ParseError::ParseError(int line, int column, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) +
                         ": " + message),
      line_(line),
      column_(column) {}

ProblemFile ProblemFile::empty(int n, std::string name) {
  ProblemFile f;
  f.name = std::move(name);
  f.n = n;
  f.linear.assign(n, 0.0);
  f.lower.assign(n, -kInf);
  f.upper.assign(n, kInf);
  return f;
}

ProblemFile parse_problem_file(std::string_view text) { return Parser(text).run(); }

std::string_view to_string(Relation relation) {
  switch (relation) {
    case Relation::LessEqual:
      return "<=";
    case Relation::GreaterEqual:
      return ">=";
    case Relation::Equal:
      return "==";
  }
  return "?";
}

std::string serialize_problem_file(const ProblemFile& file) {
  std::string out;
  if (!file.name.empty()) out += "name " + file.name + "\n";
  out += "variables " + std::to_string(file.n) + "\n";

  out += "[objective]\nconstant ";
  put_number(out, file.constant);
  out += "\nlinear ";
  put_vector(out, file.linear);
  out += '\n';
  for (const auto& q : file.quadratic) {
    out += "quadratic " + std::to_string(q.i) + ' ' + std::to_string(q.j) + ' ';
    put_number(out, q.value);
    out += '\n';
  }

  if (!file.constraints.empty()) {
    out += "[constraints]\n";
    for (const auto& row : file.constraints) {
      put_vector(out, row.coeffs);
      out += ' ';
      out += to_string(row.relation);
      out += ' ';
      put_number(out, row.rhs);
      out += '\n';
    }
  }

  bool any_bound = false;
  for (int j = 0; j < file.n; ++j) {
    if (file.lower[j] == -kInf && file.upper[j] == kInf) continue;
    if (!any_bound) out += "[bounds]\n";
    any_bound = true;
    out += std::to_string(j) + ' ';
    put_number(out, file.lower[j]);
    out += ' ';
    put_number(out, file.upper[j]);
    out += '\n';
  }

  if (file.start) {
    out += "[start]\n";
    put_vector(out, *file.start);
    out += '\n';
  }
  return out;
}

ProblemFile read_problem_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_problem_file(buf.str());
}

MixedProblem to_mixed_problem(const ProblemFile& file) {
  const int n = file.n;
  MixedProblem p;
  p.name = file.name;
  p.n = n;

  Matrix Q = Matrix::Zero(n, n);
  for (const auto& q : file.quadratic) {
    Q(q.i, q.j) = q.value;
    Q(q.j, q.i) = q.value;
  }
  const Vector c = Eigen::Map<const Vector>(file.linear.data(), n);
  const double c0 = file.constant;
  p.objective.value = [Q, c, c0](const Vector& x) { return c0 + c.dot(x) + 0.5 * x.dot(Q * x); };
  p.objective.gradient = [Q, c](const Vector& x) -> Vector { return c + Q * x; };
  p.objective.hessian = [Q](const Vector&) -> Matrix { return Q; };
  p.objective.linear = file.quadratic.empty();

  for (const auto& row : file.constraints) {
    GeneralConstraint g;
    g.function = linear_function(Eigen::Map<const Vector>(row.coeffs.data(), n));
    g.relation = row.relation;
    g.rhs = row.rhs;
    p.constraints.push_back(std::move(g));
  }
  p.lower = Eigen::Map<const Vector>(file.lower.data(), n);
  p.upper = Eigen::Map<const Vector>(file.upper.data(), n);
  if (file.start) {
    p.start = Eigen::Map<const Vector>(file.start->data(), n);
  } else {
    p.start = Vector::Zero(n);
  }
  return p;
}

}  // namespace onephase
