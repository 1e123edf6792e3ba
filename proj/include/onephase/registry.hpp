#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "onephase/iterate.hpp"
#include "onephase/problem.hpp"
#include "onephase/problem_file.hpp"

namespace onephase {

/// A named test problem with its known outcome.
struct BuiltinProblem {
  std::string name;
  std::string description;
  MixedProblem problem;
  /// Text form, for the linear and quadratic entries.
  std::optional<ProblemFile> file;
  Status expected = Status::Optimal;
  std::optional<Vector> x_star;
  std::optional<double> f_star;
};

/// min x  s.t.  x^2 - s1 = -1,  x - s2 = 1,  s1, s2 >= 0, started at (x0, 1, 1).
MixedProblem wachter_problem(double x0 = -2.0);

std::vector<BuiltinProblem> builtin_registry();

std::optional<BuiltinProblem> find_builtin(std::string_view name);

}  // namespace onephase
