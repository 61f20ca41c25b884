#pragma once

#include <optional>

#include "qcorr/correlators.hpp"
#include "qcorr/positivep.hpp"
#include "qcorr/scenario.hpp"

namespace qcorr {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kDissipatorConvention =
    "D(rho) = sum_i gamma_i (2 F_i rho F_i^dag - F_i^dag F_i rho - rho F_i^dag F_i); "
    "single-mode linear loss decays as d<n>/dt = -2 gamma <n>";
/// Default relative-deviation threshold for the conserved verdict.
inline constexpr double kConservedThreshold = 1e-4;

struct RunResult {
  Scenario scenario;
  std::vector<double> times;                 // realized output times (absolute)
  std::vector<std::string> header;           // fixed CSV schema
  std::vector<std::vector<double>> columns;  // one vector per header entry; NaN = empty cell
  double leakage_max = 0.0;
  int pp_excluded = 0;
  std::vector<std::string> diagnostics;
  std::optional<Trajectory> trajectory;  // exact engine only
  std::optional<PPEnsemble> ensemble;    // positive-P engine only

  const std::vector<double>& column(const std::string& name) const;
};

/// The fixed column schema for a scenario:
/// t, n_<label>..., G2_<i>_<j>..., N_total, J_<m>..., g_tot_<m>..., leakage
std::vector<std::string> csv_header(const Scenario& s);

/// Execute the scenario's engine and assemble the output table.
RunResult run_scenario(const Scenario& s, const std::vector<Observable>& extra = {});

/// CSV (17 significant digits, empty cell = undefined) + metadata sidecar,
/// both written atomically. The sidecar lands next to the CSV with the
/// extension replaced by .meta.json.
void write_run_output(const RunResult& result, const std::string& csv_path);

/// Conservation verdict for one correlator order from a finished run.
ConservationReport run_conservation(const RunResult& result, int m, double threshold);

/// Run the exact engine with the identity's auxiliary observables and
/// cross-check the analytic derivative.
ResidualReport run_verify(const Scenario& s, DerivativeIdentity identity);

DerivativeIdentity identity_from_token(const std::string& token);
std::string identity_token(DerivativeIdentity identity);

/// Copy of the scenario with one numeric field replaced (dotted path into the
/// rendered document, e.g. "hamiltonian.0.tau" or "channels.1.rate").
Scenario with_parameter(const Scenario& s, const std::string& dotted_path, double value);

struct SweepRow {
  double value = 0.0;
  std::map<int, double> dev;  // per order: max |g_tot - g_tot(0)|
  double final_n = 0.0;
  std::string csv_path;
};

/// One run per value plus a summary.csv in out_dir.
std::vector<SweepRow> run_sweep(const Scenario& s, const std::string& param,
                                const std::vector<double>& values, const std::string& out_dir);

}  // namespace qcorr
