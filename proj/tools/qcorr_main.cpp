#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qcorr/errors.hpp"
#include "qcorr/runner.hpp"

namespace {

using namespace qcorr;

constexpr int kExitOk = 0;
constexpr int kExitNotConserved = 10;
constexpr int kExitValidation = 2;
constexpr int kExitEngine = 3;
constexpr double kVerifyThreshold = 1e-3;

std::string default_out_path(const Scenario& s) {
  std::string dir = s.output_dir;
  if (dir.empty()) {
    if (const char* env = std::getenv("QCORR_OUT_DIR")) dir = env;
  }
  if (dir.empty()) dir = ".";
  return (std::filesystem::path(dir) / (s.name + ".csv")).string();
}

void apply_cutoff_override(Scenario& s, int cutoff) {
  for (auto& m : s.modes)
    if (m.kind == ModeKind::Boson) m.cutoff = cutoff;
  for (size_t i = 0; i < s.initial.size(); ++i)
    if (s.initial[i].type == InitDecl::Type::Fock && s.modes[i].kind == ModeKind::Boson &&
        s.initial[i].fock_n > cutoff)
      throw ValidationError("cutoff override drops below a Fock initial occupation");
}

int cmd_run(const std::string& file, std::string out, double tol, int cutoff_override) {
  Scenario s = parse_scenario(file);
  if (tol > 0.0) s.engine.tol = tol;
  if (cutoff_override > 0) apply_cutoff_override(s, cutoff_override);
  if (out.empty()) out = default_out_path(s);
  const RunResult result = run_scenario(s);
  write_run_output(result, out);
  std::cout << "wrote " << out << " (" << result.times.size() << " rows)\n";
  for (int m : s.orders) {
    const auto report = run_conservation(result, m, kConservedThreshold);
    std::cout << "g_tot_" << m << ": max abs deviation "
              << (report.first_defined < 0 ? std::string("undefined")
                                           : std::to_string(report.max_abs_dev))
              << (report.conserved ? " (conserved)" : " (not conserved)") << "\n";
  }
  for (const auto& d : result.diagnostics) std::cout << "note: " << d << "\n";
  return kExitOk;
}

int cmd_check(const std::string& file, double tol) {
  Scenario s = parse_scenario(file);
  const ModelSpec model = s.to_model();
  std::vector<double> sample_times;
  const auto grid = s.time_grid();
  const size_t stride = std::max<size_t>(1, grid.size() / 8);
  for (size_t k = 0; k < grid.size(); k += stride) sample_times.push_back(grid[k]);
  if (sample_times.back() != grid.back()) sample_times.push_back(grid.back());
  const SymmetryReport report = check_u1_symmetry(model, tol, sample_times);
  std::cout << "commutator_norm: " << report.commutator_norm << "\n"
            << "is_u1_symmetric: " << (report.is_u1_symmetric ? "true" : "false") << "\n"
            << "linear_dissipation: " << (report.linear_dissipation ? "true" : "false") << "\n"
            << "uniform_rates: " << (report.uniform_rates ? "true" : "false") << "\n"
            << "predicted_conserved: " << (report.predicted_conserved ? "true" : "false")
            << "\n";
  return report.predicted_conserved ? kExitOk : kExitNotConserved;
}

int cmd_verify(const std::string& file, const std::string& identity) {
  Scenario s = parse_scenario(file);
  const ResidualReport report = run_verify(s, identity_from_token(identity));
  const bool pass = report.max_residual < kVerifyThreshold;
  std::cout << "identity " << identity << ": max residual " << report.max_residual << " over "
            << report.points << " interior points: " << (pass ? "PASS" : "FAIL") << "\n";
  return pass ? kExitOk : kExitNotConserved;
}

int cmd_sweep(const std::string& file, const std::string& param,
              const std::vector<double>& values, const std::string& out_dir) {
  Scenario s = parse_scenario(file);
  const auto rows = run_sweep(s, param, values, out_dir);
  for (const auto& row : rows) {
    std::cout << param << " = " << row.value << ": final N = " << row.final_n;
    for (const auto& [m, dev] : row.dev) std::cout << ", dev g_tot_" << m << " = " << dev;
    std::cout << " -> " << row.csv_path << "\n";
  }
  std::cout << "summary: " << (std::filesystem::path(out_dir) / "summary.csv").string() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qcorr: correlation dynamics of dissipative bosonic/two-level networks"};
  app.require_subcommand(1);

  std::string file, out, identity, param, out_dir;
  std::vector<double> values;
  double tol = 0.0;
  double check_tol = 1e-9;
  int cutoff_override = 0;

  auto* run = app.add_subcommand("run", "integrate a scenario and write the CSV table");
  run->add_option("file", file, "scenario file")->required();
  run->add_option("--out", out, "output CSV path (default: $QCORR_OUT_DIR/<name>.csv)");
  run->add_option("--tol", tol, "integrator tolerance override");
  run->add_option("--cutoff-override", cutoff_override, "replace every bosonic cutoff");

  auto* check = app.add_subcommand("check", "report the symmetry/dissipation analysis");
  check->add_option("file", file)->required();
  check->add_option("--tol", check_tol, "commutator-norm tolerance");

  auto* verify = app.add_subcommand("verify", "cross-check an analytic derivative identity");
  verify->add_option("file", file)->required();
  verify->add_option("--identity", identity, "eq15|eq16|eq17|eq18|eq19|eq20")->required();

  auto* sweep = app.add_subcommand("sweep", "run a scenario across parameter values");
  sweep->add_option("file", file)->required();
  sweep->add_option("--param", param, "dotted path, e.g. hamiltonian.0.tau")->required();
  sweep->add_option("--values", values, "parameter values")->required()->delimiter(',');
  sweep->add_option("--out-dir", out_dir)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (run->parsed()) return cmd_run(file, out, tol, cutoff_override);
    if (check->parsed()) return cmd_check(file, check_tol);
    if (verify->parsed()) return cmd_verify(file, identity);
    if (sweep->parsed()) return cmd_sweep(file, param, values, out_dir);
  } catch (const qcorr::ValidationError& e) {
    std::cerr << "error [" << e.category << "]: " << e.what() << "\n";
    return kExitValidation;
  } catch (const qcorr::Error& e) {
    std::cerr << "error [engine]: " << e.what() << "\n";
    return kExitEngine;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitEngine;
  }
  return kExitValidation;
}
