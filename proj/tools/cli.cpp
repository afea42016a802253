#include "cli.hpp"

#include "impgap/analysis.hpp"
#include "impgap/examples.hpp"
#include "impgap/pmp.hpp"
#include "impgap/problem_io.hpp"
#include "impgap/reparam.hpp"
#include "impgap/solver.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace impgap::cli {

namespace {

constexpr const char* kVersion = "impgap 0.1.0";

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProblemSource {
  std::string example;
  std::string path;
};

struct Loaded {
  ProblemSpec problem;
  const BundledExample* example = nullptr;
};

void add_source(CLI::App* sub, ProblemSource& src) {
  auto* e = sub->add_option("--example", src.example, "bundled example id (ex1, ex2, ex3)");
  auto* p = sub->add_option("--problem", src.path, "problem file (YAML)");
  e->excludes(p);
  p->excludes(e);
}

void add_solver(CLI::App* sub, SolveConfig& cfg) {
  sub->add_option("--N", cfg.N, "transcription intervals")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--multistarts", cfg.multistarts, "number of multistart runs")->capture_default_str();
  sub->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
  sub->add_option("--tol-feas", cfg.tol_feas, "feasibility tolerance")->capture_default_str();
  sub->add_option("--tol-stat", cfg.tol_stat, "stationarity tolerance")->capture_default_str();
}

Loaded load(const ProblemSource& src) {
  Loaded l;
  if (!src.example.empty()) {
    try {
      l.example = &bundled_example(src.example);
    } catch (const UnknownExampleError& e) {
      throw InputError(e.what());
    }
    l.problem = l.example->problem;
  } else if (!src.path.empty()) {
    try {
      l.problem = load_problem(src.path);
    } catch (const std::exception& e) {
      throw InputError(e.what());
    }
  } else {
    throw InputError("one of --example or --problem is required");
  }
  ValidationReport v = validate(l.problem);
  if (!v.ok()) {
    std::ostringstream os;
    os << "invalid problem:";
    for (const auto& i : v.issues) os << "\n  " << i;
    throw InputError(os.str());
  }
  return l;
}

std::filesystem::path prepare_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw InputError("cannot create output directory '" + dir + "'");
  return dir;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path);
  if (!f) throw InputError("cannot write '" + path.string() + "'");
  f << content;
  if (!f) throw InputError("cannot write '" + path.string() + "'");
}

template <class Fn>
std::string render(Fn&& fn) {
  std::ostringstream os;
  fn(os);
  return os.str();
}

ExtendedProcess read_trajectory(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot open trajectory '" + path + "'");
  try {
    return read_extended_csv(f);
  } catch (const std::exception& e) {
    throw InputError(path + ": " + e.what());
  }
}

MultiplierSet read_multipliers(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot open multipliers '" + path + "'");
  try {
    return read_multipliers_csv(f);
  } catch (const std::exception& e) {
    throw InputError(path + ": " + e.what());
  }
}

void write_manifest(const std::filesystem::path& dir, int argc, const char* const* argv, const SolveConfig& cfg) {
  std::ostringstream os;
  os << "tool " << kVersion << "\ncommand";
  for (int i = 1; i < argc; ++i) os << " " << argv[i];
  os << "\nN " << cfg.N << "\nmultistarts " << cfg.multistarts << "\nseed " << cfg.seed << "\ntol_feas "
     << cfg.tol_feas << "\ntol_stat " << cfg.tol_stat << "\nout " << dir.string() << "\n";
  write_file(dir / "manifest.txt", os.str());
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Impulsive optimal control: extended solves, extremal checks and infimum-gap analysis", "impgap"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  ProblemSource src;
  SolveConfig cfg;
  std::string out_dir = ".";

  auto* solve = app.add_subcommand("solve", "solve the extended (or eps-restricted strict) problem");
  double strict_eps = 0.0;
  add_source(solve, src);
  add_solver(solve, cfg);
  solve->add_option("--strict-eps", strict_eps, "solve the strict problem with w0 >= eps (0 = extended)")
      ->capture_default_str();
  solve->add_option("--out", out_dir, "output directory")->capture_default_str();

  auto* check = app.add_subcommand("check", "verify a trajectory and multiplier set against the maximum principle");
  std::string traj_path, mult_path;
  double check_tol = 1e-5;
  bool classify = false;
  add_source(check, src);
  check->add_option("--trajectory", traj_path, "extended trajectory CSV (default: bundled minimizer)");
  check->add_option("--multipliers", mult_path, "multiplier CSV (default: bundled multipliers)");
  check->add_option("--tol", check_tol, "residual tolerance")->capture_default_str();
  check->add_flag("--classify", classify, "also classify normality of the trajectory");

  auto* gap = app.add_subcommand("gap", "probe for an infimum gap and try to certify its absence");
  std::vector<double> eps_grid{0.2, 0.1, 0.05, 0.025, 0.0125};
  add_source(gap, src);
  add_solver(gap, cfg);
  gap->add_option("--eps-grid", eps_grid, "strict restriction levels")->delimiter(',')->capture_default_str();
  gap->add_option("--trajectory", traj_path, "minimizer used for certification (default: bundled or solver)");
  gap->add_option("--out", out_dir, "output directory")->capture_default_str();

  auto* iso = app.add_subcommand("isolation", "search for feasible strict processes near an extended process");
  IsolationOptions iso_opt;
  double delta = cfg.delta;
  add_source(iso, src);
  add_solver(iso, cfg);
  iso->add_option("--trajectory", traj_path, "extended trajectory CSV (default: bundled minimizer)");
  iso->add_option("--delta", delta, "d-infinity ball radius")->capture_default_str();
  iso->add_option("--strict-eps", iso_opt.eps, "lower bound on w0 for strict processes")->capture_default_str();
  iso->add_option("--isolation-tol", iso_opt.isolation_tol, "violation above which the process is isolated")
      ->capture_default_str();
  iso->add_option("--out", out_dir, "output directory")->capture_default_str();

  auto* ex = app.add_subcommand("examples", "list or export the bundled examples");
  ex->require_subcommand(1);
  auto* ex_list = ex->add_subcommand("list", "list bundled examples");
  auto* ex_export = ex->add_subcommand("export", "write problem, minimizer and multipliers files");
  std::string export_id;
  ex_export->add_option("id", export_id, "example id")->required();
  ex_export->add_option("--out", out_dir, "output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*solve) {
      Loaded l = load(src);
      if (strict_eps < 0.0 || strict_eps > 1.0) throw InputError("--strict-eps must lie in [0, 1]");
      const auto dir = prepare_dir(out_dir);
      Candidate c = strict_eps > 0.0 ? solve_strict_restricted(l.problem, strict_eps, cfg) : solve_extended(l.problem, cfg);
      std::ostringstream log;
      for (const auto& line : c.log) log << line << "\n";
      write_file(dir / "solver.log", log.str());
      write_file(dir / "candidate.csv", render([&](std::ostream& o) { write_extended_csv(o, c.process); }));
      if (strict_eps > 0.0 && c.process.min_w0() > 0.0) {
        write_file(dir / "strict.csv",
                   render([&](std::ostream& o) { write_strict_csv(o, invert_embedding(c.process)); }));
      }
      write_manifest(dir, argc, argv, cfg);
      out << std::setprecision(10);
      out << "problem " << l.problem.name << "\n";
      out << (strict_eps > 0.0 ? "strict eps-restricted, eps " : "extended") << (strict_eps > 0.0 ? std::to_string(strict_eps) : "")
          << "\n";
      out << "cost " << c.cost << "\n";
      out << "feasibility " << c.feasibility << "\n";
      out << "S " << c.process.S() << "  nu(S) " << c.process.nu_final() << "\n";
      out << "best run " << c.run << "  converged " << (c.converged ? "yes" : "no") << "\n";
      out << "status " << (c.feasible ? "feasible" : "infeasible") << "\n";
      return c.feasible ? kOk : kInfeasible;
    }

    if (*check) {
      Loaded l = load(src);
      if ((traj_path.empty() || mult_path.empty()) && !l.example) {
        throw InputError("--trajectory and --multipliers are required with --problem");
      }
      ExtendedProcess ep = traj_path.empty() ? l.example->minimizer : read_trajectory(traj_path);
      MultiplierSet ms = mult_path.empty() ? l.example->multipliers : read_multipliers(mult_path);
      ResidualReport r;
      try {
        r = extremal_residuals(l.problem, ep, ms);
      } catch (const GridMismatchError& e) {
        throw InputError(e.what());
      } catch (const NotOnTargetError& e) {
        throw InputError(e.what());
      }
      out << format_residual_report(r, ms, check_tol);
      if (classify) out << format_normality(classify_normality(l.problem, ep));
      return r.passes(check_tol) ? kOk : kResidualFail;
    }

    if (*gap) {
      Loaded l = load(src);
      for (double e : eps_grid) {
        if (!(e > 0.0 && e <= 1.0)) throw InputError("--eps-grid values must lie in (0, 1]");
      }
      const auto dir = prepare_dir(out_dir);
      std::optional<ExtendedProcess> traj;
      if (!traj_path.empty()) traj = read_trajectory(traj_path);
      GapProbeOptions opt;
      opt.eps_grid = eps_grid;
      if (traj) {
        opt.minimizer = &*traj;
      } else if (l.example) {
        opt.minimizer = &l.example->minimizer;
      }
      GapReport r = gap_probe(l.problem, cfg, opt);
      const std::string text = format_gap_report(r);
      write_file(dir / "gap_report.txt", text);
      write_file(dir / "gap.csv", gap_report_csv(r));
      write_manifest(dir, argc, argv, cfg);
      out << text;
      switch (r.verdict) {
        case GapVerdict::kNoGapCertified:
        case GapVerdict::kNoGapEmpirical:
          return kOk;
        case GapVerdict::kGapDetected:
          return kGapDetected;
        case GapVerdict::kInconclusive:
          return kInconclusive;
      }
      return kInconclusive;
    }

    if (*iso) {
      Loaded l = load(src);
      if (traj_path.empty() && !l.example) throw InputError("--trajectory is required with --problem");
      if (!(delta > 0.0)) throw InputError("--delta must be positive");
      if (!(iso_opt.eps > 0.0 && iso_opt.eps <= 1.0)) throw InputError("--strict-eps must lie in (0, 1]");
      const auto dir = prepare_dir(out_dir);
      ExtendedProcess ep = traj_path.empty() ? l.example->minimizer : read_trajectory(traj_path);
      IsolationResult r = isolation_probe(l.problem, ep, delta, cfg, iso_opt);
      write_file(dir / "isolation.csv", render([&](std::ostream& o) { write_extended_csv(o, r.process); }));
      write_manifest(dir, argc, argv, cfg);
      out << std::setprecision(10);
      out << "problem " << l.problem.name << "\n";
      out << "delta " << r.delta << "  eps " << r.eps << "  isolation tol " << iso_opt.isolation_tol << "\n";
      out << "min violation " << r.value << "\n";
      out << (r.isolated ? "isolated (numerically)" : "not isolated") << "\n";
      return kOk;
    }

    if (*ex_list) {
      for (const auto& id : example_ids()) out << id << "  " << bundled_example(id).summary << "\n";
      return kOk;
    }

    if (*ex_export) {
      const BundledExample* b = nullptr;
      try {
        b = &bundled_example(export_id);
      } catch (const UnknownExampleError& e) {
        throw InputError(e.what());
      }
      const auto dir = prepare_dir(out_dir);
      write_file(dir / (b->id + ".yaml"), b->problem_yaml);
      write_file(dir / (b->id + "_minimizer.csv"), render([&](std::ostream& o) { write_extended_csv(o, b->minimizer); }));
      write_file(dir / (b->id + "_multipliers.csv"),
                 render([&](std::ostream& o) { write_multipliers_csv(o, b->multipliers); }));
      out << "wrote " << (dir / (b->id + ".yaml")).string() << ", " << b->id << "_minimizer.csv, " << b->id
          << "_multipliers.csv\n";
      return kOk;
    }
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}

}  // namespace impgap::cli
