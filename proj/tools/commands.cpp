#include "commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>

#include "qqr/qqr.hpp"

namespace qqr::cli {

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string fmt17(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string fmt_short(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

SolverMethod parse_method(const std::string& s) {
  if (s == "recursive") return SolverMethod::recursive;
  if (s == "full") return SolverMethod::full;
  throw UsageError("unknown method '" + s + "' (expected recursive or full)");
}

std::vector<Index> parse_sizes(const std::string& spec) {
  std::vector<Index> sizes;
  if (spec.find(':') != std::string::npos) {
    long long start = 0, stop = 0, step = 1;
    char c1 = 0, c2 = 0;
    std::istringstream in(spec);
    in >> start >> c1 >> stop;
    if (in >> c2) in >> step;
    if (!in.eof() && in.fail()) throw UsageError("bad size range '" + spec + "'");
    if (c1 != ':' || (c2 != 0 && c2 != ':') || step < 1 || start < 1 || stop < start) {
      throw UsageError("bad size range '" + spec + "' (expected start:stop[:step])");
    }
    for (long long n = start; n <= stop; n += step) sizes.push_back(static_cast<Index>(n));
    return sizes;
  }
  std::istringstream in(spec);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    long long n = 0;
    try {
      n = std::stoll(item, &used);
    } catch (const std::exception&) {
      throw UsageError("bad size '" + item + "'");
    }
    if (used != item.size() || n < 1) throw UsageError("bad size '" + item + "'");
    sizes.push_back(static_cast<Index>(n));
  }
  return sizes;
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

Vector parse_vector(const std::string& s) {
  const auto items = split_csv(s);
  Vector v(static_cast<Index>(items.size()));
  for (std::size_t i = 0; i < items.size(); ++i) {
    std::size_t used = 0;
    try {
      v[static_cast<Index>(i)] = std::stod(items[i], &used);
    } catch (const std::exception&) {
      throw UsageError("bad number '" + items[i] + "' in --x0");
    }
    if (used != items[i].size()) throw UsageError("bad number '" + items[i] + "' in --x0");
  }
  return v;
}

Vector random_direction(Index n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  Vector d(n);
  do {
    for (Index i = 0; i < n; ++i) {
      d[i] = 2.0 * (static_cast<double>(gen() >> 11) * 0x1.0p-53) - 1.0;
    }
  } while (d.norm() == 0.0);
  return d / d.norm();
}

double rel_diff(const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Matrix>& ref) {
  const double rn = ref.norm();
  const double dn = (a - ref).norm();
  return rn > 0.0 ? dn / rn : dn;
}

// --- generate ---------------------------------------------------------------

struct GenerateArgs {
  std::string kind;
  long long n = 0;
  long long m = -1;
  std::uint64_t seed = 0;
  double eps = 0.001;
  std::string out;
  std::string name;
};

SystemFile build_system(const std::string& kind, Index n, Index m, std::uint64_t seed, double eps) {
  SystemFile file;
  file.generator = kind;
  if (kind == "random") {
    file.system = random_system({n, m, seed});
    file.seed = seed;
    file.name = "random-n" + std::to_string(n) + "-m" + std::to_string(m) + "-seed" + std::to_string(seed);
  } else if (kind == "burgers") {
    file.system = burgers_system({n, m, eps});
    file.eps = eps;
    file.name = "burgers-n" + std::to_string(n) + "-m" + std::to_string(m);
  } else {
    throw UsageError("unknown problem kind '" + kind + "' (expected random or burgers)");
  }
  return file;
}

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
  if (a.n < 1) throw UsageError("--n must be >= 1");
  const long long m = a.m >= 0 ? a.m : (a.kind == "burgers" ? 2 : 1);
  if (m < 1) throw UsageError("--m must be >= 1");
  if (a.kind == "burgers" && a.n < 3) throw UsageError("burgers needs --n >= 3");
  if (a.kind == "burgers" && !(a.eps > 0.0)) throw UsageError("--eps must be positive");
  SystemFile file = build_system(a.kind, a.n, m, a.seed, a.eps);
  if (!a.name.empty()) file.name = a.name;
  save_system(a.out, file);
  out << "generated " << file.name << ": n=" << a.n << " m=" << m << " generator=" << a.kind;
  if (file.seed) out << " seed=" << *file.seed;
  if (file.eps) out << " eps=" << fmt_short(*file.eps);
  out << " -> " << a.out << "\n";
  return kSuccess;
}

// --- solve ------------------------------------------------------------------

struct SolveArgs {
  std::string system;
  int degree = 2;
  std::string method = "recursive";
  std::string out;
  std::optional<double> cap_gib;
};

QqrOptions make_options(SolverMethod method, std::optional<double> cap_gib) {
  QqrOptions opts;
  opts.method = method;
  if (cap_gib) {
    if (!(*cap_gib > 0.0)) throw UsageError("--cap-gib must be positive");
    opts.limits.max_bytes = static_cast<std::size_t>(*cap_gib * static_cast<double>(1ULL << 30));
  }
  return opts;
}

int cmd_solve(const SolveArgs& a, std::ostream& out, std::ostream& err) {
  const SolverMethod method = parse_method(a.method);
  const SystemFile sys = load_system(a.system);
  const QqrOptions opts = make_options(method, a.cap_gib);

  CoefficientFile file;
  file.command = "solve";
  file.parameters = {{"system", a.system},
                     {"degree", std::to_string(a.degree)},
                     {"method", a.method},
                     {"out", a.out}};
  try {
    const QqrSolution sol = solve_qqr(sys.system, a.degree, opts);
    CoefficientFile ok = make_coefficient_file(sol, a.method);
    ok.command = file.command;
    ok.parameters = file.parameters;
    save_coefficients(a.out, ok);
    out << "solved " << sys.name << " degree " << a.degree << " (" << a.method
        << "): ARE residual " << fmt_short(sol.riccati.residual) << ", " << fmt_short(sol.are_seconds)
        << " s\n";
    for (const auto& r : sol.reports) {
      out << "  v" << r.value_degree << ": residual " << fmt_short(r.solve.residual_norm)
          << ", min pivot " << fmt_short(r.solve.min_pivot) << ", rhs " << fmt_short(r.rhs_seconds)
          << " s, solve " << fmt_short(r.solve_seconds) << " s\n";
      if (r.solve.residual_warning) {
        err << "warning: v" << r.value_degree << " residual above tolerance\n";
      }
    }
    out << "wrote " << a.out << "\n";
    return kSuccess;
  } catch (const SizeRefusal& e) {
    file.n = sys.system.n();
    file.m = sys.system.m();
    file.degree = a.degree;
    file.method = a.method;
    file.status = "not computed: size";
    file.message = e.what();
    save_coefficients(a.out, file);
    err << "not computed: size (" << e.what() << ")\n";
    return kSizeRefusal;
  }
}

// --- simulate ---------------------------------------------------------------

struct SimulateArgs {
  std::string system;
  std::string coeffs;
  std::string x0;
  std::optional<double> scale;
  std::string direction;
  std::uint64_t seed = 0;
  double horizon = 20.0;
  double dt = 1e-3;
  std::optional<int> degree;
  std::string out;
  std::string comparison;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  const SystemFile sys = load_system(a.system);
  const CoefficientFile coeffs = load_coefficients(a.coeffs);
  if (!coeffs.ok()) {
    throw UsageError("coefficient file " + a.coeffs + " has status '" + coeffs.status + "'");
  }
  const Index n = sys.system.n();
  if (coeffs.n != n || coeffs.m != sys.system.m()) {
    throw UsageError("coefficient file is for n=" + std::to_string(coeffs.n) + ", m=" +
                     std::to_string(coeffs.m) + "; system has n=" + std::to_string(n) + ", m=" +
                     std::to_string(sys.system.m()));
  }

  Vector x0;
  if (!a.x0.empty()) {
    if (a.scale) throw UsageError("give either --x0 or --scale, not both");
    x0 = parse_vector(a.x0);
  } else if (a.scale) {
    if (!a.direction.empty() && a.direction != "random") {
      throw UsageError("--direction must be 'random'");
    }
    x0 = *a.scale * random_direction(n, a.seed);
  } else {
    throw UsageError("one of --x0 or --scale is required");
  }
  if (x0.size() != n) {
    throw UsageError("--x0 has " + std::to_string(x0.size()) + " entries, system has n=" +
                     std::to_string(n));
  }

  const int degree = a.degree.value_or(coeffs.degree);
  if (degree < 1 || degree > coeffs.degree) {
    throw UsageError("--degree must be in 1.." + std::to_string(coeffs.degree));
  }
  const PolyFeedbackLaw law = coeffs.feedback.truncated(degree);
  const PolyValueFunction value = coeffs.value.truncated(degree + 1);

  const Trajectory traj = integrate_closed_loop(sys.system, law, x0, a.horizon, a.dt);
  const ValueComparison cmp = compare_value(value, traj);
  save_trajectory_csv(a.out, traj);
  std::string comparison_path = a.comparison;
  if (comparison_path.empty()) {
    std::filesystem::path p(a.out);
    comparison_path = p.replace_extension(".json").string();
  }
  save_comparison(comparison_path, cmp, x0, degree);

  out << "simulated degree " << degree << " law for T=" << fmt_short(a.horizon)
      << ": J_sim=" << fmt17(cmp.J_sim) << " v_poly=" << fmt17(cmp.v_poly)
      << " gap=" << fmt_short(cmp.gap) << " tail=" << fmt_short(cmp.tail_estimate) << "\n";
  if (!cmp.valid) err << "warning: trajectory diverged; comparison invalid\n";
  if (cmp.horizon_limited) err << "warning: horizon-limited (tail estimate above 1e-3 J_sim)\n";
  out << "wrote " << a.out << " and " << comparison_path << "\n";
  return kSuccess;
}

// --- bench ------------------------------------------------------------------

struct BenchArgs {
  std::string kind = "random";
  std::string sizes;
  int degree = 2;
  std::string methods = "recursive,full";
  long long m = -1;
  std::uint64_t seed = 0;
  double eps = 0.001;
  std::optional<double> cap_gib;
  std::string out;
};

struct BenchCell {
  std::string method;
  std::string status = "ok";
  std::optional<QqrSolution> solution;
  double total_seconds = 0.0;
};

int cmd_bench(const BenchArgs& a, std::ostream& out, std::ostream& err) {
  const std::vector<Index> sizes = parse_sizes(a.sizes);
  if (sizes.empty()) throw UsageError("--sizes is empty");
  const auto method_names = split_csv(a.methods);
  if (method_names.empty()) throw UsageError("--methods is empty");
  for (const auto& name : method_names) parse_method(name);
  if (a.degree < 1 || a.degree > kMaxFeedbackDegree) throw UsageError("--degree must be in 1..4");
  const long long m = a.m >= 0 ? a.m : (a.kind == "burgers" ? 2 : 1);
  if (m < 1) throw UsageError("--m must be >= 1");
  if (a.kind != "random" && a.kind != "burgers") throw UsageError("--kind must be random or burgers");

  std::ofstream csv(a.out, std::ios::binary);
  if (!csv) throw Error("cannot write " + a.out);
  csv << "kind,n,m,degree,method,status,are_seconds,rhs_seconds,solve_seconds,total_seconds,"
         "err_k_top,err_v_top,err_max\n";

  for (Index n : sizes) {
    std::vector<BenchCell> cells;
    std::optional<SystemFile> sys;
    std::string gen_status;
    try {
      sys = build_system(a.kind, n, m, a.seed, a.eps);
    } catch (const Error& e) {
      gen_status = std::string("failed: ") + e.what();
    }
    for (const auto& name : method_names) {
      BenchCell cell;
      cell.method = name;
      if (!sys) {
        cell.status = gen_status;
        cells.push_back(std::move(cell));
        continue;
      }
      const auto t0 = std::chrono::steady_clock::now();
      try {
        cell.solution = solve_qqr(sys->system, a.degree, make_options(parse_method(name), a.cap_gib));
      } catch (const SizeRefusal&) {
        cell.status = "not computed: size";
      } catch (const Error& e) {
        cell.status = std::string("failed: ") + e.what();
      }
      cell.total_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      cells.push_back(std::move(cell));
    }

    // Cross-method errors on canonical coefficients, relative to the first
    // other method that produced a solution.
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const BenchCell& cell = cells[i];
      std::string err_k, err_v, err_max;
      if (cell.solution) {
        for (std::size_t j = 0; j < cells.size(); ++j) {
          if (j == i || !cells[j].solution) continue;
          const auto va = cell.solution->value.symmetrized();
          const auto vb = cells[j].solution->value.symmetrized();
          const auto ka = cell.solution->feedback.symmetrized();
          const auto kb = cells[j].solution->feedback.symmetrized();
          double worst = 0.0;
          for (int d = 2; d <= va.degree(); ++d) {
            worst = std::max(worst, rel_diff(va.coeff(d).values(), vb.coeff(d).values()));
          }
          for (int d = 1; d <= ka.degree(); ++d) {
            worst = std::max(worst, rel_diff(ka.gain(d), kb.gain(d)));
          }
          err_k = fmt_short(rel_diff(ka.gain(a.degree), kb.gain(a.degree)));
          err_v = fmt_short(rel_diff(va.coeff(a.degree + 1).values(), vb.coeff(a.degree + 1).values()));
          err_max = fmt_short(worst);
          break;
        }
      }
      double are_s = 0.0, rhs_s = 0.0, solve_s = 0.0;
      if (cell.solution) {
        are_s = cell.solution->are_seconds;
        for (const auto& r : cell.solution->reports) {
          rhs_s += r.rhs_seconds;
          solve_s += r.solve_seconds + r.feedback_seconds;
        }
      }
      std::string status = cell.status;
      std::replace(status.begin(), status.end(), ',', ';');
      csv << a.kind << ',' << n << ',' << m << ',' << a.degree << ',' << cell.method << ','
          << status << ',' << fmt_short(are_s) << ',' << fmt_short(rhs_s) << ','
          << fmt_short(solve_s) << ',' << fmt_short(cell.total_seconds) << ',' << err_k << ','
          << err_v << ',' << err_max << '\n';
      out << a.kind << " n=" << n << " " << cell.method << ": " << cell.status << ", "
          << fmt_short(cell.total_seconds) << " s";
      if (!err_max.empty()) out << ", cross error " << err_max;
      out << "\n";
      if (cell.status.rfind("failed", 0) == 0) err << "n=" << n << " " << cell.method << ": " << cell.status << "\n";
    }
    csv.flush();
  }
  out << "wrote " << a.out << "\n";
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Polynomial feedback synthesis for quadratic-in-state systems"};
  app.name("qqr");
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Write a QQR system file");
  generate->add_option("kind", gen.kind, "random or burgers")->required()->check(CLI::IsMember({"random", "burgers"}));
  generate->add_option("--n", gen.n, "State dimension / grid cells")->required();
  generate->add_option("--m", gen.m, "Input dimension (random: 1, burgers: 2)");
  generate->add_option("--seed", gen.seed, "PRNG seed (random)");
  generate->add_option("--eps", gen.eps, "Viscosity (burgers)");
  generate->add_option("--name", gen.name, "System name");
  generate->add_option("--out", gen.out, "Output system file")->required();

  SolveArgs solve;
  auto* solve_cmd = app.add_subcommand("solve", "Compute value and feedback coefficients");
  solve_cmd->add_option("--system", solve.system, "System file")->required();
  solve_cmd->add_option("--degree", solve.degree, "Feedback degree (1..4)")->check(CLI::Range(1, kMaxFeedbackDegree));
  solve_cmd->add_option("--method", solve.method, "recursive or full")->check(CLI::IsMember({"recursive", "full"}));
  solve_cmd->add_option("--cap-gib", solve.cap_gib, "Dense assembly cap in GiB (default 2)");
  solve_cmd->add_option("--out", solve.out, "Output coefficient file")->required();

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Integrate the closed loop and compare with the value function");
  sim_cmd->add_option("--system", sim.system, "System file")->required();
  sim_cmd->add_option("--coeffs", sim.coeffs, "Coefficient file")->required();
  sim_cmd->add_option("--x0", sim.x0, "Initial state, comma separated");
  sim_cmd->add_option("--scale", sim.scale, "Initial state norm (random direction)");
  sim_cmd->add_option("--direction", sim.direction, "Direction kind (random)");
  sim_cmd->add_option("--seed", sim.seed, "Seed for the random direction");
  sim_cmd->add_option("--T", sim.horizon, "Horizon");
  sim_cmd->add_option("--dt", sim.dt, "RK4 step");
  sim_cmd->add_option("--degree", sim.degree, "Use the law truncated to this degree");
  sim_cmd->add_option("--out", sim.out, "Trajectory CSV")->required();
  sim_cmd->add_option("--comparison", sim.comparison, "Comparison JSON (default: <out>.json)");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Timing and cross-method error table");
  bench_cmd->add_option("--kind", bench.kind, "random or burgers");
  bench_cmd->add_option("--sizes", bench.sizes, "n values: a,b,c or start:stop[:step]")->required();
  bench_cmd->add_option("--degree", bench.degree, "Feedback degree (1..4)");
  bench_cmd->add_option("--methods", bench.methods, "Comma-separated methods");
  bench_cmd->add_option("--m", bench.m, "Input dimension");
  bench_cmd->add_option("--seed", bench.seed, "PRNG seed (random)");
  bench_cmd->add_option("--eps", bench.eps, "Viscosity (burgers)");
  bench_cmd->add_option("--cap-gib", bench.cap_gib, "Dense assembly cap in GiB (default 2)");
  bench_cmd->add_option("--out", bench.out, "Output CSV")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsageError;
  }

  try {
    if (generate->parsed()) return cmd_generate(gen, out);
    if (solve_cmd->parsed()) return cmd_solve(solve, out, err);
    if (sim_cmd->parsed()) return cmd_simulate(sim, out, err);
    if (bench_cmd->parsed()) return cmd_bench(bench, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsageError;
  } catch (const ContractViolation& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsageError;
  } catch (const ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsageError;
  } catch (const SizeRefusal& e) {
    err << "not computed: size (" << e.what() << ")\n";
    return kSizeRefusal;
  } catch (const Error& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  }
  return kUsageError;
}

}  // namespace qqr::cli
