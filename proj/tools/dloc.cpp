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

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "dloc/augmented.hpp"
#include "dloc/commensurability.hpp"
#include "dloc/errors.hpp"
#include "dloc/integrator.hpp"
#include "dloc/library.hpp"
#include "dloc/solution.hpp"
#include "dloc/spec_file.hpp"
#include "dloc/synthesis.hpp"
#include "dloc/transcription.hpp"

namespace fs = std::filesystem;
using namespace dloc;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitInput = 2;
constexpr int kExitNoConvergence = 3;
constexpr int kExitCertificate = 4;
constexpr int kMaxDumpDim = 2000;

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
}

ProblemSpec load_spec(const std::string& path) {
  try {
    return parse_spec(read_file(path));
  } catch (const ParseError& e) {
    throw InputError(path + ":" + e.what());
  }
}

// Step that divides h exactly and is closest to 1e-3.
double default_step(const CommensurableGrid& grid) {
  const double count = std::max(1.0, std::round(grid.h / 1e-3));
  return grid.h / count;
}

// Smallest multiple of the block count (b - a) / h that reaches 2000.
long default_subintervals(const DelayedProblem& problem, const CommensurableGrid& grid) {
  const double blocks = problem.horizon.length() / grid.h;
  const long per = std::max(1L, std::lround(blocks));
  return per * ((2000 + per - 1) / per);
}

struct RunOptions {
  std::string method = "sweep";
  double step = 0.0;
  long subintervals = 0;
  double tol = 0.0;
  bool strict = false;
};

std::string key_values(const std::vector<std::pair<std::string, std::string>>& items) {
  std::string out;
  for (const auto& [key, value] : items) out += key + "=" + value + "\n";
  return out;
}

std::string number(double value, int digits = 17) {
  std::ostringstream out;
  out.precision(digits);
  out << value;
  return out.str();
}

// Fixed count of significant digits, trailing zeros kept.
std::string significant(double value, int digits) {
  std::ostringstream out;
  out.precision(digits);
  out << std::showpoint << value;
  return out.str();
}

std::string report_text(const Solution& sol, const CommensurableGrid& grid) {
  const Diagnostics& d = sol.diagnostics;
  std::vector<std::pair<std::string, std::string>> items = {
      {"method", to_string(sol.method)},
      {"cost", significant(sol.cost, 12)},
      {"scheme", to_string(d.integrator.scheme)},
      {"step", number(d.integrator.step)},
      {"quadrature", to_string(d.integrator.quadrature)},
      {"subintervals", std::to_string(d.subintervals)},
      {"iterations", std::to_string(d.iterations)},
      {"converged", d.converged ? "true" : "false"},
      {"single_pass", d.single_pass ? "true" : "false"},
      {"relaxation", number(d.relaxation, 6)},
      {"final_control_change", d.control_change.empty() ? "0" : number(d.control_change.back(), 6)},
      {"h", number(grid.h)},
      {"k", std::to_string(grid.k)},
      {"l", std::to_string(grid.l)},
      {"N", std::to_string(grid.N)},
      {"b_tilde", number(grid.b_tilde)},
      {"strict_ok", grid.strict_ok ? "true" : "false"},
  };
  for (const auto& w : d.warnings) items.emplace_back("warning", w);
  return key_values(items);
}

CommensurableGrid checked_grid(const DelayedProblem& problem, const RunOptions& opts) {
  try {
    const CommensurableGrid grid = make_grid(problem);
    if (opts.strict) require_strict(grid);
    return grid;
  } catch (const NonCommensurable& e) {
    throw InputError(e.what());
  } catch (const StrictGridViolation& e) {
    throw InputError(e.what());
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
}

Solution run_method(const DelayedProblem& problem, const CommensurableGrid& grid,
                    const RunOptions& opts, const std::string& method) {
  IntegratorConfig integrator;
  integrator.step = opts.step > 0.0 ? opts.step : default_step(grid);
  SweepConfig sweep_cfg;
  if (opts.tol > 0.0) sweep_cfg.control_tol = opts.tol;
  if (method == "sweep") return sweep(problem, sweep_cfg, integrator);
  if (method == "augmented") return solve_augmented(problem, sweep_cfg, integrator);
  if (method == "transcription") {
    DescentOptions descent;
    if (opts.tol > 0.0) descent.tol = opts.tol;
    const long M = opts.subintervals > 0 ? opts.subintervals : default_subintervals(problem, grid);
    return solve_transcription(problem, M, descent);
  }
  throw InputError("unknown method '" + method + "'");
}

void write_solution(const fs::path& dir, const Solution& sol, const CommensurableGrid& grid) {
  write_file(dir / "control.csv", to_csv(sol.control, "u"));
  write_file(dir / "state.csv", to_csv(sol.state, "x"));
  write_file(dir / "adjoint.csv", to_csv(sol.adjoint, "eta"));
  write_file(dir / "report.txt", report_text(sol, grid));
}

int cmd_solve(const std::string& spec_path, const RunOptions& opts, const std::string& out_dir) {
  const DelayedProblem problem = to_problem(load_spec(spec_path));
  const CommensurableGrid grid = checked_grid(problem, opts);
  try {
    const Solution sol = run_method(problem, grid, opts, opts.method);
    write_solution(out_dir, sol, grid);
    std::cout << "cost=" << significant(sol.cost, 12) << "\n";
    return 0;
  } catch (const NoConvergence& e) {
    write_solution(out_dir, e.last_iterate(), grid);
    std::cerr << "dloc: " << e.what() << "\n";
    return kExitNoConvergence;
  }
}

std::map<std::string, std::string> read_report(const fs::path& path) {
  std::map<std::string, std::string> values;
  if (!fs::exists(path)) return values;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) values.emplace(line.substr(0, eq), line.substr(eq + 1));
  }
  return values;
}

int cmd_verify(const std::string& spec_path, const std::string& dir, int samples) {
  if (samples < 1) throw InputError("samples must be at least 1");
  const DelayedProblem problem = to_problem(load_spec(spec_path));
  const CommensurableGrid grid = checked_grid(problem, {});
  const fs::path base(dir);
  const auto report = read_report(base / "report.txt");

  IntegratorConfig integrator;
  integrator.step = default_step(grid);
  try {
    if (report.count("scheme")) integrator.scheme = parse_scheme(report.at("scheme"));
    if (report.count("quadrature")) integrator.quadrature = parse_quadrature(report.at("quadrature"));
    if (report.count("step")) integrator.step = std::stod(report.at("step"));
  } catch (const std::exception& e) {
    throw InputError(std::string("bad report.txt: ") + e.what());
  }

  auto load = [&](const char* name) {
    try {
      return from_csv(read_file(base / name), integrator.interp());
    } catch (const ParseError& e) {
      throw InputError((base / name).string() + ":" + e.what());
    }
  };
  Solution candidate{load("state.csv"), load("control.csv"), Trajectory({0.0}, {Vector::Zero(1)}, Interp::linear),
                     0.0, Method::analytic_sweep, {}};
  candidate.adjoint = fs::exists(base / "adjoint.csv")
                          ? load("adjoint.csv")
                          : integrate_adjoint(problem, candidate.state, integrator);
  candidate.diagnostics.integrator = integrator;

  const Certificate cert = certify(problem, candidate, samples);
  write_file(base / "certificate.txt", cert.to_text());
  std::cout << cert.to_text();
  return cert.overall ? 0 : kExitCertificate;
}

int cmd_reduce(const std::string& spec_path, const std::optional<double>& query,
               const RunOptions& opts) {
  const DelayedProblem problem = to_problem(load_spec(spec_path));
  CommensurableGrid grid;
  try {
    grid = make_grid(problem, opts.tol > 0.0 ? opts.tol : kDefaultRatioTolerance);
  } catch (const NonCommensurable& e) {
    throw InputError(e.what());
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  std::cout << key_values({{"h", number(grid.h)},
                           {"k", std::to_string(grid.k)},
                           {"l", std::to_string(grid.l)},
                           {"N", std::to_string(grid.N)},
                           {"b_tilde", number(grid.b_tilde)},
                           {"strict_ok", grid.strict_ok ? "true" : "false"}});
  if (opts.strict && !grid.strict_ok) {
    std::cerr << "dloc: strict mode: N=" << grid.N << " does not exceed 2k+1=" << 2 * grid.k + 1
              << "\n";
    return kExitInput;
  }
  const double t = query.value_or(grid.a);
  const AugmentedProblem aug(problem, grid);
  if (aug.state_dim() > kMaxDumpDim) {
    std::cout << "A_tilde omitted (dimension " << aug.state_dim() << " exceeds " << kMaxDumpDim
              << ")\n";
    return 0;
  }
  Matrix a_tilde;
  try {
    a_tilde = aug.A_tilde(t);
  } catch (const OutOfWindow& e) {
    throw InputError(e.what());
  }
  std::cout << "A_tilde(t=" << number(t) << ")\n" << format_matrix(a_tilde);
  return 0;
}

std::vector<std::string> split_methods(const std::vector<std::string>& raw) {
  std::vector<std::string> out;
  for (const auto& item : raw) {
    std::stringstream in(item);
    std::string part;
    while (std::getline(in, part, ',')) {
      if (!part.empty()) out.push_back(part);
    }
  }
  return out;
}

int cmd_compare(const std::string& spec_path, const std::vector<std::string>& methods_raw,
                const RunOptions& opts, const std::string& out_dir) {
  std::vector<std::string> methods = split_methods(methods_raw);
  if (methods.empty()) methods = {"sweep", "transcription"};
  if (methods.size() != 2) throw InputError("compare needs exactly two methods");
  const DelayedProblem problem = to_problem(load_spec(spec_path));
  const CommensurableGrid grid = checked_grid(problem, opts);
  std::vector<Solution> runs;
  for (const auto& method : methods) {
    try {
      runs.push_back(run_method(problem, grid, opts, method));
    } catch (const NoConvergence& e) {
      std::cerr << "dloc: " << method << ": " << e.what() << "\n";
      return kExitNoConvergence;
    }
  }
  const ComparisonReport report = compare(runs[0], runs[1], problem.horizon);
  const std::string summary =
      "method_a=" + methods[0] + "\nmethod_b=" + methods[1] + "\n" + report.summary();
  write_file(fs::path(out_dir) / "comparison.csv", report.table());
  write_file(fs::path(out_dir) / "comparison.txt", summary);
  std::cout << summary;
  return 0;
}

std::string reference_table() {
  const ReferenceSolution ref = example_p_reference();
  std::string out = "t,u,x,eta\n";
  for (int i = 0; i <= 4000; ++i) {
    const double t = i / 1000.0;
    std::ostringstream row;
    row.precision(17);
    row << t << "," << ref.control(t)[0] << "," << ref.state(t)[0] << "," << ref.adjoint(t)[0]
        << "\n";
    out += row.str();
  }
  return out;
}

int cmd_example(const std::string& name, const std::string& out_dir) {
  ProblemSpec spec;
  if (name == "P") {
    spec = example_p_spec();
  } else if (name == "lq") {
    spec = lq_no_delay_spec(2, 1, {0.0, 1.0});
  } else {
    throw InputError("unknown example '" + name + "' (choose P or lq)");
  }
  const std::string text = format_spec(spec);
  if (out_dir.empty()) {
    std::cout << text;
    return 0;
  }
  write_file(fs::path(out_dir) / (name + ".dloc"), text);
  if (name == "P") write_file(fs::path(out_dir) / "reference.csv", reference_table());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal control of state-linear systems with state and control delays"};
  app.require_subcommand(1);

  RunOptions opts;
  std::string spec_path, out_dir = ".", solution_dir, example_name = "P";
  std::vector<std::string> compare_methods;
  int samples = 200;
  std::optional<double> query;

  auto add_run_flags = [&](CLI::App* cmd) {
    cmd->add_option("--step", opts.step, "integration step (must divide h)");
    cmd->add_option("--subintervals", opts.subintervals, "transcription subintervals M");
    cmd->add_option("--tol", opts.tol, "solver tolerance");
    cmd->add_flag("--strict", opts.strict, "refuse grids with N <= 2k+1");
    cmd->add_option("--out", out_dir, "output directory");
  };

  auto* solve = app.add_subcommand("solve", "solve a problem and write trajectories");
  solve->add_option("spec", spec_path, "problem file")->required();
  solve->add_option("--method", opts.method, "sweep | augmented | transcription")
      ->check(CLI::IsMember({"sweep", "augmented", "transcription"}));
  add_run_flags(solve);

  auto* verify = app.add_subcommand("verify", "check sufficient conditions for a solution");
  verify->add_option("spec", spec_path, "problem file")->required();
  verify->add_option("solution", solution_dir, "directory written by solve")->required();
  verify->add_option("--samples", samples, "sample count");

  auto* reduce = app.add_subcommand("reduce", "print the commensurable grid and A~(t)");
  reduce->add_option("spec", spec_path, "problem file")->required();
  reduce->add_option("t", query, "time in [a, a+h] for the A~ dump (default a)");
  reduce->add_option("--tol", opts.tol, "delay ratio tolerance");
  reduce->add_flag("--strict", opts.strict, "fail when N <= 2k+1");

  auto* compare_cmd = app.add_subcommand("compare", "solve with two methods and report gaps");
  compare_cmd->add_option("spec", spec_path, "problem file")->required();
  compare_cmd->add_option("--method", compare_methods, "two methods, comma separated")
      ->delimiter(',');
  add_run_flags(compare_cmd);

  auto* example = app.add_subcommand("example", "print a built-in problem file");
  example->add_option("name", example_name, "P or lq");
  example->add_option("--out", out_dir, "write files to this directory instead");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitInput;
  }

  try {
    if (*solve) return cmd_solve(spec_path, opts, out_dir);
    if (*verify) return cmd_verify(spec_path, solution_dir, samples);
    if (*reduce) return cmd_reduce(spec_path, query, opts);
    if (*compare_cmd) return cmd_compare(spec_path, compare_methods, opts, out_dir);
    if (*example) return cmd_example(example_name, example->count("--out") ? out_dir : "");
  } catch (const InputError& e) {
    std::cerr << "dloc: " << e.what() << "\n";
    return kExitInput;
  } catch (const IndivisibleStep& e) {
    std::cerr << "dloc: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "dloc: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}
