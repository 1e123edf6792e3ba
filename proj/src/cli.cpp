#include "onephase/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include "onephase/problem_file.hpp"
#include "onephase/registry.hpp"

namespace onephase {

namespace {

enum class LogLevel { Quiet, Summary, Trace };

LogLevel log_level(std::ostream& err) {
  const char* env = std::getenv("ONEPHASE_LOG");
  if (env == nullptr) return LogLevel::Summary;
  const std::string v(env);
  if (v == "quiet") return LogLevel::Quiet;
  if (v == "trace") return LogLevel::Trace;
  if (v != "summary") err << "warning: unknown ONEPHASE_LOG value '" << v << "', using summary\n";
  return LogLevel::Summary;
}

struct RunSettings {
  double tol = 1e-6;
  double mu_scale = 1.0;
  int max_iter = 3000;
  std::optional<std::uint64_t> seed;
  bool check_derivatives = false;
  std::string trace_path;
};

SolverOptions options_from(const RunSettings& s) {
  SolverOptions opts;
  opts.eps_opt = s.tol;
  opts.mu_scale = s.mu_scale;
  opts.max_iter = s.max_iter;
  return opts;
}

// Relative perturbation of up to 10% (at least 0.1 absolute) per coordinate.
Vector perturb(const Vector& x, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Vector out = x;
  for (Eigen::Index j = 0; j < out.size(); ++j) {
    out[j] += 0.1 * std::max(1.0, std::abs(out[j])) * unit(rng);
  }
  return out;
}

std::string format_vector(const Vector& v) {
  std::ostringstream os;
  os << std::setprecision(10);
  os << '[';
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i > 0) os << ", ";
    os << v[i];
  }
  os << ']';
  return os.str();
}

void print_summary(std::ostream& out, const std::string& label, const NlpProblem& problem,
                   const SolveResult& r) {
  const Certificate& c = r.certificate;
  out << std::setprecision(10);
  out << "problem: " << label << " (n=" << problem.n << ", m=" << problem.m << ")\n";
  out << "status: " << to_string(r.status) << '\n';
  out << "iterations: " << r.iterations << " (outer " << r.outer_iterations
      << ", hessian evaluations " << r.hessian_evaluations << ")\n";
  out << "objective: " << r.iterate.f << '\n';
  out << "x: " << format_vector(r.iterate.x) << '\n';
  switch (r.status) {
    case Status::Optimal:
      out << "certificate: scaled dual infeasibility " << c.dual_infeasibility
          << ", scaled complementarity " << c.complementarity << ", constraint violation "
          << c.constraint_violation << '\n';
      break;
    case Status::PrimalInfeasible:
      out << "certificate: a(x)^T y = " << c.a_dot_y << ", gamma_far = "
          << c.gamma_far.value_or(std::numeric_limits<double>::quiet_NaN()) << ", gamma_inf = "
          << c.gamma_inf.value_or(std::numeric_limits<double>::quiet_NaN()) << '\n';
      break;
    case Status::Unbounded:
      out << "certificate: ||x||_inf = " << c.x_norm << '\n';
      break;
    default:
      if (!r.message.empty()) out << "message: " << r.message << '\n';
      break;
  }
  out << "time: " << r.elapsed_seconds << " s\n";
}

void print_trace_line(std::ostream& out, const TraceRecord& t) {
  out << std::setprecision(6) << std::scientific << "iter " << t.iteration << ' '
      << (t.kind == StepKind::Aggressive ? 'A' : 'S') << (t.accepted ? '+' : '-')
      << " mu=" << t.mu << " delta=" << t.delta << " ap=" << t.alpha_p << " ad=" << t.alpha_d
      << " res=" << t.primal_residual << " dual=" << t.dual_infeasibility
      << " comp=" << t.complementarity << '\n'
      << std::defaultfloat;
}

struct Loaded {
  std::string label;
  MixedProblem mixed;
};

Loaded load_target(const std::string& target) {
  constexpr std::string_view prefix = "builtin:";
  if (target.rfind(prefix, 0) == 0) {
    const std::string name = target.substr(prefix.size());
    std::optional<BuiltinProblem> b = find_builtin(name);
    if (!b) throw std::invalid_argument("unknown builtin problem '" + name + "' (see --list)");
    return {b->name, std::move(b->problem)};
  }
  ProblemFile file = read_problem_file(target);
  std::string label = file.name.empty() ? target : file.name;
  return {std::move(label), to_mixed_problem(file)};
}

Vector start_of(const MixedProblem& mixed) {
  return mixed.start.size() == mixed.n ? mixed.start : Vector::Zero(mixed.n);
}

int solve_command(const std::string& target, const RunSettings& settings, std::ostream& out,
                  std::ostream& err, LogLevel level) {
  Loaded loaded;
  InequalityForm form;
  try {
    loaded = load_target(target);
    form = to_inequality_form(loaded.mixed);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  Vector start = start_of(loaded.mixed);
  if (settings.seed) start = perturb(start, *settings.seed);

  if (settings.check_derivatives) {
    const DerivativeReport rep = check_derivatives(form.problem, start);
    out << std::setprecision(3) << std::scientific << "derivative check: gradient "
        << rep.gradient_error << ", jacobian " << rep.jacobian_error << ", hessian "
        << rep.hessian_error << '\n'
        << std::defaultfloat;
    if (rep.max_error() > 1e-4) err << "warning: derivative check error above 1e-4\n";
  }

  SolveControl control;
  if (level == LogLevel::Trace) {
    control.progress = [&out](const TraceRecord& t) { print_trace_line(out, t); };
  }

  SolveResult result;
  try {
    result = solve(form.problem, start, options_from(settings), control);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }

  if (!settings.trace_path.empty()) {
    std::ofstream trace(settings.trace_path);
    if (!trace) {
      err << "error: cannot write " << settings.trace_path << '\n';
      return kExitUsage;
    }
    write_trace_csv(trace, result.trace);
  }
  if (level != LogLevel::Quiet) print_summary(out, loaded.label, form.problem, result);
  return exit_code_for(result.status);
}

void csv_field(std::ostream& out, const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) {
    out << s;
    return;
  }
  out << '"';
  for (char c : s) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

int batch_command(const std::string& dir, const std::string& summary_path,
                  const RunSettings& settings, std::ostream& out, std::ostream& err,
                  LogLevel level) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    err << "error: " << dir << " is not a directory\n";
    return kExitUsage;
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  std::ofstream summary(summary_path);
  if (!summary) {
    err << "error: cannot write " << summary_path << '\n';
    return kExitUsage;
  }
  summary << "file,name,status,exit_code,iterations,outer_iterations,hessian_evaluations,"
             "objective,dual_infeasibility,complementarity,constraint_violation,seconds\n";
  summary << std::setprecision(17);

  for (const fs::path& path : files) {
    const std::string file = path.filename().string();
    csv_field(summary, file);
    summary << ',';
    ProblemFile parsed;
    try {
      parsed = read_problem_file(path.string());
    } catch (const std::exception& e) {
      summary << ",parse_error," << kExitUsage << ",,,,,,,,\n";
      if (level != LogLevel::Quiet) err << file << ": " << e.what() << '\n';
      continue;
    }
    csv_field(summary, parsed.name);
    summary << ',';
    SolveResult r;
    try {
      const MixedProblem mixed = to_mixed_problem(parsed);
      const InequalityForm form = to_inequality_form(mixed);
      Vector start = start_of(mixed);
      if (settings.seed) start = perturb(start, *settings.seed);
      r = solve(form.problem, start, options_from(settings));
    } catch (const std::exception& e) {
      summary << "error," << kExitFailure << ",,,,,,,,\n";
      if (level != LogLevel::Quiet) err << file << ": " << e.what() << '\n';
      continue;
    }
    const Certificate& c = r.certificate;
    summary << to_string(r.status) << ',' << exit_code_for(r.status) << ',' << r.iterations
            << ',' << r.outer_iterations << ',' << r.hessian_evaluations << ',' << r.iterate.f
            << ',' << c.dual_infeasibility << ',' << c.complementarity << ','
            << c.constraint_violation << ',' << r.elapsed_seconds << '\n';
    if (level != LogLevel::Quiet) {
      out << file << ": " << to_string(r.status) << " (" << r.iterations << " iterations)\n";
    }
  }
  if (level != LogLevel::Quiet) out << files.size() << " problem(s) written to " << summary_path << '\n';
  return kExitOptimal;
}

}  // namespace

int exit_code_for(Status status) {
  switch (status) {
    case Status::Optimal:
      return kExitOptimal;
    case Status::PrimalInfeasible:
      return kExitInfeasible;
    case Status::Unbounded:
      return kExitUnbounded;
    case Status::IterationLimit:
    case Status::TimeLimit:
      return kExitLimit;
    case Status::MaxDelta:
    case Status::EvaluationError:
      return kExitFailure;
  }
  return kExitFailure;
}

void write_trace_csv(std::ostream& out, const SolveTrace& trace) {
  out << "# onephase-trace v1\n";
  out << "iteration,outer,inner,kind,accepted,failure,filter_accept,trials,gamma,delta,alpha_p,"
         "alpha_d,mu_before,mu,dispatch_ratio,primal_residual,dual_infeasibility,"
         "complementarity,phi,kkt,comp_ratio_min,comp_ratio_max,slack_linear_deviation,"
         "slack_norm,f_evals,grad_evals,a_evals,jac_evals,hess_evals\n";
  out << std::setprecision(17);
  for (const TraceRecord& t : trace) {
    out << t.iteration << ',' << t.outer << ',' << t.inner << ',' << to_string(t.kind) << ','
        << (t.accepted ? 1 : 0) << ',' << to_string(t.failure) << ',' << (t.filter_accept ? 1 : 0)
        << ',' << t.trials << ',' << t.gamma << ',' << t.delta << ',' << t.alpha_p << ','
        << t.alpha_d << ',' << t.mu_before << ',' << t.mu << ',' << t.dispatch_ratio << ','
        << t.primal_residual << ',' << t.dual_infeasibility << ',' << t.complementarity << ','
        << t.phi << ',' << t.kkt << ',' << t.comp_ratio_min << ',' << t.comp_ratio_max << ','
        << t.slack_linear_deviation << ',' << t.slack_norm << ',' << t.counters.objective << ','
        << t.counters.gradient << ',' << t.counters.constraints << ',' << t.counters.jacobian
        << ',' << t.counters.hessian << '\n';
  }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"One-phase interior point solver for smooth nonlinear programs"};
  app.name("onephase");
  bool list = false;
  app.add_flag("--list", list, "List the built-in problems");

  RunSettings settings;
  std::uint64_t seed = 0;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--tol", settings.tol, "Optimality tolerance")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--mu-scale", settings.mu_scale, "Scale of the initial barrier parameter")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--max-iter", settings.max_iter, "Maximum number of inner iterations")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--seed", seed, "Randomly perturb the starting point with this seed");
  };

  std::string target;
  CLI::App* solve_cmd = app.add_subcommand("solve", "Solve a problem file or builtin:NAME");
  solve_cmd->add_option("target", target, "Problem file path or builtin:NAME")->required();
  solve_cmd->add_option("--trace", settings.trace_path, "Write the iteration log as CSV");
  solve_cmd->add_flag("--check-derivatives", settings.check_derivatives,
                      "Compare derivatives with finite differences before solving");
  add_common(solve_cmd);

  std::string dir;
  std::string summary_path;
  CLI::App* batch_cmd = app.add_subcommand("batch", "Solve every problem file in a directory");
  batch_cmd->add_option("dir", dir, "Directory of problem files")->required();
  batch_cmd->add_option("--summary", summary_path, "Summary CSV path")->required();
  add_common(batch_cmd);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOptimal;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  const LogLevel level = log_level(err);
  for (CLI::App* cmd : {solve_cmd, batch_cmd}) {
    if (cmd->parsed() && cmd->count("--seed") > 0) settings.seed = seed;
  }

  if (list) {
    for (const BuiltinProblem& b : builtin_registry()) {
      out << std::left << std::setw(16) << b.name << std::setw(18) << to_string(b.expected)
          << b.description << '\n';
    }
    return kExitOptimal;
  }
  if (solve_cmd->parsed()) return solve_command(target, settings, out, err, level);
  if (batch_cmd->parsed()) return batch_command(dir, summary_path, settings, out, err, level);
  err << app.help();
  return kExitUsage;
}

}  // namespace onephase
