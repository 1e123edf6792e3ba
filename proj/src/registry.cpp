#include "onephase/registry.hpp"

#include <cmath>
#include <limits>

namespace onephase {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double x : v) out[k++] = x;
  return out;
}

ScalarFunction smooth(std::function<double(const Vector&)> value,
                      std::function<Vector(const Vector&)> gradient,
                      std::function<Matrix(const Vector&)> hessian) {
  ScalarFunction fn;
  fn.value = std::move(value);
  fn.gradient = std::move(gradient);
  fn.hessian = std::move(hessian);
  return fn;
}

BuiltinProblem from_file(ProblemFile file, std::string description, Status expected,
                         std::optional<Vector> x_star = std::nullopt,
                         std::optional<double> f_star = std::nullopt) {
  BuiltinProblem b;
  b.name = file.name;
  b.description = std::move(description);
  b.problem = to_mixed_problem(file);
  b.file = std::move(file);
  b.expected = expected;
  b.x_star = std::move(x_star);
  b.f_star = f_star;
  return b;
}

ProblemFile::Row row(std::vector<double> coeffs, Relation rel, double rhs) {
  return {std::move(coeffs), rel, rhs};
}

BuiltinProblem qp_simple() {
  // 1/2 (x - 2)^2 with x <= 1
  ProblemFile f = ProblemFile::empty(1, "qp-simple");
  f.constant = 2.0;
  f.linear = {-2.0};
  f.quadratic = {{0, 0, 1.0}};
  f.constraints = {row({1.0}, Relation::LessEqual, 1.0)};
  return from_file(std::move(f), "min (x-2)^2/2 s.t. x <= 1", Status::Optimal, vec({1.0}), 0.5);
}

BuiltinProblem qp_box() {
  // 1/2 ||x - c||^2 over the unit box, c = (2, -1, 0.5)
  ProblemFile f = ProblemFile::empty(3, "qp-box");
  f.constant = 2.625;
  f.linear = {-2.0, 1.0, -0.5};
  f.quadratic = {{0, 0, 1.0}, {1, 1, 1.0}, {2, 2, 1.0}};
  f.lower = {0.0, 0.0, 0.0};
  f.upper = {1.0, 1.0, 1.0};
  f.start = std::vector<double>{0.5, 0.5, 0.5};
  return from_file(std::move(f), "projection of (2,-1,0.5) onto [0,1]^3", Status::Optimal,
                   vec({1.0, 0.0, 0.5}), 1.0);
}

BuiltinProblem convex_qp_10() {
  constexpr int n = 10;
  ProblemFile f = ProblemFile::empty(n, "convex-qp-10");
  for (int i = 0; i < n; ++i) f.quadratic.push_back({i, i, 1.0});
  f.constraints = {row(std::vector<double>(n, 1.0), Relation::GreaterEqual, 1.0)};
  return from_file(std::move(f), "min ||x||^2/2 s.t. sum(x) >= 1, n = 10", Status::Optimal,
                   Vector::Constant(n, 0.1), 0.05);
}

BuiltinProblem equality_qp() {
  ProblemFile f = ProblemFile::empty(2, "equality-qp");
  f.quadratic = {{0, 0, 1.0}, {1, 1, 1.0}};
  f.constraints = {row({1.0, 1.0}, Relation::Equal, 2.0)};
  return from_file(std::move(f), "min ||x||^2/2 s.t. x1 + x2 = 2", Status::Optimal,
                   vec({1.0, 1.0}), 1.0);
}

BuiltinProblem lp_min_x() {
  ProblemFile f = ProblemFile::empty(1, "lp-min-x");
  f.linear = {1.0};
  f.constraints = {row({1.0}, Relation::GreaterEqual, 1.0)};
  return from_file(std::move(f), "min x s.t. x >= 1", Status::Optimal, vec({1.0}), 1.0);
}

BuiltinProblem degenerate_lp() {
  ProblemFile f = ProblemFile::empty(2, "degenerate-lp");
  f.linear = {1.0, 0.0};
  f.constraints = {row({1.0, 0.0}, Relation::GreaterEqual, 0.0),
                   row({1.0, 1.0}, Relation::GreaterEqual, 0.0),
                   row({1.0, -1.0}, Relation::GreaterEqual, 0.0)};
  f.start = std::vector<double>{1.0, 0.5};
  return from_file(std::move(f), "min x1 s.t. x1 >= 0, x1 + x2 >= 0, x1 - x2 >= 0",
                   Status::Optimal, vec({0.0, 0.0}), 0.0);
}

BuiltinProblem infeasible_box() {
  ProblemFile f = ProblemFile::empty(1, "infeasible-box");
  f.linear = {1.0};
  f.constraints = {row({1.0}, Relation::LessEqual, -1.0), row({1.0}, Relation::GreaterEqual, 1.0)};
  return from_file(std::move(f), "min x s.t. x <= -1, x >= 1", Status::PrimalInfeasible);
}

BuiltinProblem unbounded_lp() {
  ProblemFile f = ProblemFile::empty(1, "unbounded-lp");
  f.linear = {1.0};
  f.constraints = {row({1.0}, Relation::LessEqual, 0.0)};
  return from_file(std::move(f), "min x s.t. x <= 0", Status::Unbounded);
}

BuiltinProblem wachter() {
  BuiltinProblem b;
  b.name = "wachter";
  b.description = "min x s.t. x^2 - s1 = -1, x - s2 = 1, s1, s2 >= 0 from x = -2";
  b.problem = wachter_problem(-2.0);
  b.x_star = vec({1.0, 2.0, 0.0});
  b.f_star = 1.0;
  return b;
}

BuiltinProblem nonconvex_1d() {
  BuiltinProblem b;
  b.name = "nonconvex-1d";
  b.description = "min -9x - 3x^2 + x^4/4, unconstrained, from x = 0";
  MixedProblem& p = b.problem;
  p.name = b.name;
  p.n = 1;
  p.objective = smooth(
      [](const Vector& x) {
        const double t = x[0];
        return -9.0 * t - 3.0 * t * t + 0.25 * t * t * t * t;
      },
      [](const Vector& x) -> Vector {
        const double t = x[0];
        return vec({-9.0 - 6.0 * t + t * t * t});
      },
      [](const Vector& x) -> Matrix { return Matrix::Constant(1, 1, -6.0 + 3.0 * x[0] * x[0]); });
  p.start = Vector::Zero(1);
  b.x_star = vec({3.0});
  b.f_star = -33.75;
  return b;
}

BuiltinProblem bilinear_disk() {
  BuiltinProblem b;
  b.name = "bilinear-disk";
  b.description = "min -x1 x2 s.t. x1^2 + x2^2 <= 2 from (0.5, 0.2)";
  MixedProblem& p = b.problem;
  p.name = b.name;
  p.n = 2;
  p.objective = smooth([](const Vector& x) { return -x[0] * x[1]; },
                       [](const Vector& x) -> Vector { return vec({-x[1], -x[0]}); },
                       [](const Vector&) -> Matrix {
                         Matrix h(2, 2);
                         h << 0.0, -1.0, -1.0, 0.0;
                         return h;
                       });
  GeneralConstraint disk;
  disk.function = smooth([](const Vector& x) { return x.squaredNorm(); },
                         [](const Vector& x) -> Vector { return 2.0 * x; },
                         [](const Vector&) -> Matrix { return 2.0 * Matrix::Identity(2, 2); });
  disk.relation = Relation::LessEqual;
  disk.rhs = 2.0;
  p.constraints.push_back(std::move(disk));
  p.start = vec({0.5, 0.2});
  b.x_star = vec({1.0, 1.0});
  b.f_star = -1.0;
  return b;
}

BuiltinProblem hs071() {
  BuiltinProblem b;
  b.name = "hs071";
  b.description = "Hock-Schittkowski 71: quartic objective, product and sphere constraints";
  MixedProblem& p = b.problem;
  p.name = b.name;
  p.n = 4;
  p.objective = smooth(
      [](const Vector& x) { return x[0] * x[3] * (x[0] + x[1] + x[2]) + x[2]; },
      [](const Vector& x) -> Vector {
        return vec({x[3] * (2.0 * x[0] + x[1] + x[2]), x[0] * x[3], x[0] * x[3] + 1.0,
                    x[0] * (x[0] + x[1] + x[2])});
      },
      [](const Vector& x) -> Matrix {
        Matrix h = Matrix::Zero(4, 4);
        h(0, 0) = 2.0 * x[3];
        h(0, 1) = h(1, 0) = x[3];
        h(0, 2) = h(2, 0) = x[3];
        h(0, 3) = h(3, 0) = 2.0 * x[0] + x[1] + x[2];
        h(1, 3) = h(3, 1) = x[0];
        h(2, 3) = h(3, 2) = x[0];
        return h;
      });
  GeneralConstraint product;
  product.function = smooth(
      [](const Vector& x) { return x[0] * x[1] * x[2] * x[3]; },
      [](const Vector& x) -> Vector {
        return vec({x[1] * x[2] * x[3], x[0] * x[2] * x[3], x[0] * x[1] * x[3],
                    x[0] * x[1] * x[2]});
      },
      [](const Vector& x) -> Matrix {
        Matrix h = Matrix::Zero(4, 4);
        h(0, 1) = h(1, 0) = x[2] * x[3];
        h(0, 2) = h(2, 0) = x[1] * x[3];
        h(0, 3) = h(3, 0) = x[1] * x[2];
        h(1, 2) = h(2, 1) = x[0] * x[3];
        h(1, 3) = h(3, 1) = x[0] * x[2];
        h(2, 3) = h(3, 2) = x[0] * x[1];
        return h;
      });
  product.relation = Relation::GreaterEqual;
  product.rhs = 25.0;
  GeneralConstraint sphere;
  sphere.function = smooth([](const Vector& x) { return x.squaredNorm(); },
                           [](const Vector& x) -> Vector { return 2.0 * x; },
                           [](const Vector&) -> Matrix { return 2.0 * Matrix::Identity(4, 4); });
  sphere.relation = Relation::Equal;
  sphere.rhs = 40.0;
  p.constraints.push_back(std::move(product));
  p.constraints.push_back(std::move(sphere));
  p.lower = Vector::Constant(4, 1.0);
  p.upper = Vector::Constant(4, 5.0);
  p.start = vec({1.0, 5.0, 5.0, 1.0});
  b.x_star = vec({1.0, 4.742999643, 3.821149978, 1.379408293});
  b.f_star = 17.0140172892;
  return b;
}

}  // namespace

MixedProblem wachter_problem(double x0) {
  MixedProblem p;
  p.name = "wachter";
  p.n = 3;
  p.objective = linear_function(vec({1.0, 0.0, 0.0}));
  GeneralConstraint curve;
  curve.function = smooth([](const Vector& v) { return v[0] * v[0] - v[1]; },
                          [](const Vector& v) -> Vector { return vec({2.0 * v[0], -1.0, 0.0}); },
                          [](const Vector&) -> Matrix {
                            Matrix h = Matrix::Zero(3, 3);
                            h(0, 0) = 2.0;
                            return h;
                          });
  curve.relation = Relation::Equal;
  curve.rhs = -1.0;
  GeneralConstraint line;
  line.function = linear_function(vec({1.0, 0.0, -1.0}));
  line.relation = Relation::Equal;
  line.rhs = 1.0;
  p.constraints.push_back(std::move(curve));
  p.constraints.push_back(std::move(line));
  p.lower = vec({-kInf, 0.0, 0.0});
  p.upper = Vector::Constant(3, kInf);
  p.start = vec({x0, 1.0, 1.0});
  return p;
}

std::vector<BuiltinProblem> builtin_registry() {
  std::vector<BuiltinProblem> out;
  out.push_back(wachter());
  out.push_back(qp_simple());
  out.push_back(qp_box());
  out.push_back(convex_qp_10());
  out.push_back(equality_qp());
  out.push_back(lp_min_x());
  out.push_back(degenerate_lp());
  out.push_back(infeasible_box());
  out.push_back(unbounded_lp());
  out.push_back(nonconvex_1d());
  out.push_back(bilinear_disk());
  out.push_back(hs071());
  return out;
}

std::optional<BuiltinProblem> find_builtin(std::string_view name) {
  for (auto& b : builtin_registry()) {
    if (b.name == name) return std::move(b);
  }
  return std::nullopt;
}

}  // namespace onephase
