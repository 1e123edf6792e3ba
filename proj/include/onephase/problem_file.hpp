#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "onephase/problem.hpp"

namespace onephase {

/// Text description of a quadratic program
///   min  constant + linear^T x + 1/2 x^T Q x
///   s.t. coeffs_k^T x {<=,>=,==} rhs_k,  lower <= x <= upper.
///
/// Format (one statement per line, '#' starts a comment line):
///
///   name <identifier>
///   variables <n>
///   [objective]
///   constant <v>
///   linear <v_1> ... <v_n>
///   quadratic <i> <j> <v>        # Q_ij = Q_ji = v, 0-based
///   [constraints]
///   <c_1> ... <c_n> <= | >= | == <rhs>
///   [bounds]
///   <j> <lower> <upper>          # inf / -inf for absent bounds
///   [start]
///   <x_1> ... <x_n>
struct ProblemFile {
  struct QuadraticEntry {
    int i = 0;  // i <= j
    int j = 0;
    double value = 0.0;

    bool operator==(const QuadraticEntry&) const = default;
  };

  struct Row {
    std::vector<double> coeffs;
    Relation relation = Relation::LessEqual;
    double rhs = 0.0;

    bool operator==(const Row&) const = default;
  };

  std::string name;
  int n = 0;
  double constant = 0.0;
  std::vector<double> linear;            // size n
  std::vector<QuadraticEntry> quadratic;  // sorted by (i, j), no duplicates
  std::vector<Row> constraints;
  std::vector<double> lower;  // size n
  std::vector<double> upper;  // size n
  std::optional<std::vector<double>> start;

  bool operator==(const ProblemFile&) const = default;

  /// Zero objective, no constraints, free variables.
  static ProblemFile empty(int n, std::string name = {});
};

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, int column, const std::string& message);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// Throws ParseError (1-based line and column) on any malformed input.
ProblemFile parse_problem_file(std::string_view text);

/// Canonical text: fixed section order, shortest round-trip numbers, only non-default
/// bounds. parse_problem_file(serialize_problem_file(p)) == p.
std::string serialize_problem_file(const ProblemFile& file);

ProblemFile read_problem_file(const std::string& path);

MixedProblem to_mixed_problem(const ProblemFile& file);

std::string_view to_string(Relation relation);

}  // namespace onephase
