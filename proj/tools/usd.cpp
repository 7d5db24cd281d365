// usd — optimal unambiguous-discrimination measurements for small pure-state
// ensembles. Subcommands: validate, solve, region, simulate, gram.
//
// Exit codes: 0 success, 1 invalid input, 2 I/O failure, 3 unsupported
// configuration.

#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "usd/io.hpp"
#include "usd/lp.hpp"
#include "usd/lsd.hpp"
#include "usd/oracle.hpp"

namespace {

using namespace usd;

struct Options {
  std::string path;
  std::string method = "all";
  std::string out = "region.csv";
  double tol = 1e-9;
  int grid = 201;
  int samples = 200;
  long long trials = 1000000;
  std::uint64_t seed = 1;
  bool json = false;
};

int run_validate(const Options& opt) {
  const EnsembleFile file = load_ensemble_file(opt.path);
  const EnsembleDiagnostics diag = validate_ensemble(file.dimension, file.states, file.priors);
  std::cout << "states                " << file.states.size() << '\n';
  std::cout << "dimension             " << file.dimension << '\n';
  std::cout << std::setprecision(12);
  std::cout << "prior sum             " << diag.prior_sum << '\n';
  std::cout << "worst norm error      " << diag.worst_norm_error << '\n';
  std::cout << "lambda_min(G)         " << diag.min_gram_eigenvalue << '\n';
  if (!diag.ok) {
    std::cout << "invalid: " << diag.message << '\n';
    return 1;
  }
  std::cout << "valid\n";
  return 0;
}

// One solver pass; returns nothing when the method cannot handle the
// ensemble (only possible under method=all).
std::map<std::string, PovmSolution> run_solvers(const Ensemble& ensemble,
                                                const std::string& method, int grid) {
  std::map<std::string, PovmSolution> out;
  const bool all = method == "all";
  if (all || method == "analytic") {
    try {
      out.emplace("analytic", solve_analytic(ensemble));
    } catch (const UnsupportedError&) {
      if (!all) throw;
    }
  }
  if (all || method == "lsd") {
    try {
      out.emplace("lsd", solve_lsd(ensemble));
    } catch (const UnsupportedError&) {
      if (!all) throw;
    }
  }
  if (all || method == "lp") {
    const PovmSolution vertex = solve_lp(ensemble);
    out.emplace("lp", refine_on_boundary(ensemble, vertex.p));
  }
  if (all || method == "oracle") {
    if (ensemble.size() <= 4) {
      out.emplace("oracle", grid_maximize(ensemble, grid));
    } else if (!all) {
      throw UnsupportedError("oracle: grid scan supports at most 4 states");
    }
  }
  return out;
}

int run_solve(const Options& opt) {
  const EnsembleFile file = load_ensemble_file(opt.path);
  const Ensemble ensemble = file.to_ensemble();

  const auto t0 = std::chrono::steady_clock::now();
  const auto solutions = run_solvers(ensemble, opt.method, opt.grid);
  const double ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

  bool first = true;
  for (const auto& [name, sol] : solutions) {
    const bool kkt = ensemble.size() <= 3 && kkt_certificate(ensemble, sol);
    const SolutionReport report = build_report(file, ensemble, sol, kkt, ms);
    if (opt.json) {
      std::cout << report_to_json(report) << '\n';
    } else {
      if (!first) std::cout << '\n';
      print_report_table(std::cout, report);
    }
    first = false;
  }

  if (opt.method == "all" && solutions.size() > 1) {
    double exact_spread = 0.0, oracle_gap = 0.0;
    for (const auto& [na, sa] : solutions)
      for (const auto& [nb, sb] : solutions) {
        const double d = std::abs(sa.q_fail - sb.q_fail);
        if (na == "oracle" || nb == "oracle")
          oracle_gap = std::max(oracle_gap, d);
        else
          exact_spread = std::max(exact_spread, d);
      }
    std::cout << '\n'
              << std::setprecision(6) << std::scientific << "cross-agreement max|dQ| "
              << exact_spread;
    if (solutions.count("oracle")) {
      double max_eta = 0.0;
      for (double e : ensemble.priors) max_eta = std::max(max_eta, e);
      std::cout << "  (oracle gap " << oracle_gap << ", grid bound "
                << ensemble.size() * max_eta / (opt.grid - 1) << ")";
    }
    std::cout << '\n';
    if (exact_spread > std::max(opt.tol, 1e-5))
      std::cerr << "warning: exact solvers disagree beyond tolerance\n";
  }
  return 0;
}

int run_region(const Options& opt) {
  const EnsembleFile file = load_ensemble_file(opt.path);
  const Ensemble ensemble = file.to_ensemble();
  const auto samples = sample_boundary(ensemble, opt.samples);
  const auto vertices = enumerate_vertices(ensemble);
  std::ofstream out(opt.out);
  if (!out) throw IoError("cannot write " + opt.out);
  write_region_csv(out, samples, vertices);
  if (!out.good()) throw IoError("failed while writing " + opt.out);
  std::cout << "wrote " << samples.size() << " boundary rows to " << opt.out << '\n';
  return 0;
}

int run_simulate(const Options& opt) {
  if (opt.trials < 1) {
    std::cerr << "simulate: need at least one trial\n";
    return 1;
  }
  const EnsembleFile file = load_ensemble_file(opt.path);
  const Ensemble ensemble = file.to_ensemble();

  // Best available exact solution.
  PovmSolution best = [&] {
    try {
      return solve_analytic(ensemble);
    } catch (const UnsupportedError&) {
      return refine_on_boundary(ensemble, solve_lp(ensemble).p);
    }
  }();
  const SimulationReport report = simulate_measurement(ensemble, best, opt.trials, opt.seed);
  if (opt.json)
    std::cout << simulation_to_json(report, best.q_fail) << '\n';
  else
    print_simulation_table(std::cout, report, best.q_fail);
  return 0;
}

int run_gram(const Options& opt) {
  const EnsembleFile file = load_ensemble_file(opt.path);
  const Ensemble ensemble = file.to_ensemble();
  const DualFrame frame = reciprocal_states(ensemble);
  const int n = ensemble.size();

  std::cout << std::setprecision(12);
  const auto print_matrix = [&](const char* name, const HermitianMatrix& m) {
    std::cout << name << ":\n";
    for (int i = 0; i < m.dim(); ++i) {
      for (int j = 0; j < m.dim(); ++j) {
        const cplx z = m(i, j);
        std::cout << "  (" << std::setw(15) << z.real() << "," << std::setw(15) << z.imag()
                  << ")";
      }
      std::cout << '\n';
    }
  };
  print_matrix("G (Gram)", frame.gram);
  print_matrix("G~ (dual Gram)", frame.dual_gram);

  std::cout << "Gram spectrum:";
  for (double v : hermitian_eig(frame.gram).eigenvalues) std::cout << ' ' << v;
  std::cout << "\nframe operator spectrum:";
  for (double v : frame.frame_eigenvalues) std::cout << ' ' << v;
  std::cout << "\ndual Gram spectrum:";
  for (double v : hermitian_eig(frame.dual_gram).eigenvalues) std::cout << ' ' << v;
  std::cout << '\n';
  for (int i = 0; i < n; ++i) {
    std::cout << "dual state " << (i + 1) << ":";
    for (const cplx& z : frame.reciprocal_states[i])
      std::cout << " (" << z.real() << "," << z.imag() << ")";
    std::cout << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"optimal unambiguous-discrimination measurements (POVMs) for pure states"};
  app.require_subcommand(1);
  Options opt;

  auto* validate = app.add_subcommand("validate", "check an ensemble file");
  validate->add_option("file", opt.path, "ensemble JSON file")->required();

  auto* solve = app.add_subcommand("solve", "compute the optimal measurement");
  solve->add_option("file", opt.path, "ensemble JSON file")->required();
  solve->add_option("--method", opt.method, "analytic|lp|lsd|oracle|all")
      ->check(CLI::IsMember({"analytic", "lp", "lsd", "oracle", "all"}));
  solve->add_option("--tol", opt.tol, "feasibility tolerance")->envname("USD_TOL");
  solve->add_option("--grid", opt.grid, "oracle grid resolution")->envname("USD_GRID");
  solve->add_flag("--json", opt.json, "emit JSON reports");

  auto* region = app.add_subcommand("region", "export feasible-region boundary samples");
  region->add_option("file", opt.path, "ensemble JSON file")->required();
  region->add_option("--samples", opt.samples, "number of boundary rays")
      ->envname("USD_SAMPLES");
  region->add_option("--out", opt.out, "output CSV path");

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo check of the optimal POVM");
  simulate->add_option("file", opt.path, "ensemble JSON file")->required();
  simulate->add_option("--trials", opt.trials, "number of measurement shots")
      ->envname("USD_TRIALS");
  simulate->add_option("--seed", opt.seed, "RNG seed (SplitMix64)")->envname("USD_SEED");
  simulate->add_flag("--json", opt.json, "emit JSON report");

  auto* gram = app.add_subcommand("gram", "print Gram/dual-Gram matrices and spectra");
  gram->add_option("file", opt.path, "ensemble JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (validate->parsed()) return run_validate(opt);
    if (solve->parsed()) return run_solve(opt);
    if (region->parsed()) return run_region(opt);
    if (simulate->parsed()) return run_simulate(opt);
    if (gram->parsed()) return run_gram(opt);
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return 2;
  } catch (const UnsupportedError& e) {
    std::cerr << "unsupported: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
