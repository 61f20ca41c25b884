#include "qcorr/runner.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "qcorr/errors.hpp"

namespace qcorr {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string format_value(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void atomic_write(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw EngineError("cannot write output file: " + tmp.string());
    out << content;
  }
  fs::rename(tmp, target);
}

std::string metadata_path(const std::string& csv_path) {
  namespace fs = std::filesystem;
  fs::path p(csv_path);
  p.replace_extension(".meta.json");
  return p.string();
}

std::vector<std::pair<int, int>> mode_pairs(const Scenario& s) {
  std::vector<std::pair<int, int>> pairs;
  const int n = static_cast<int>(s.modes.size());
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) pairs.emplace_back(i, j);
  return pairs;
}

}  // namespace

const std::vector<double>& RunResult::column(const std::string& name) const {
  for (size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return columns[i];
  throw ValidationError("no such output column: " + name);
}

std::vector<std::string> csv_header(const Scenario& s) {
  std::vector<std::string> names;
  names.push_back("t");
  for (const auto& m : s.modes) names.push_back("n_" + m.label);
  for (const auto& [i, j] : mode_pairs(s))
    names.push_back("G2_" + std::to_string(i) + "_" + std::to_string(j));
  names.push_back("N_total");
  for (int m : s.orders) names.push_back("J_" + std::to_string(m));
  for (int m : s.orders) names.push_back("g_tot_" + std::to_string(m));
  names.push_back("leakage");
  return names;
}

RunResult run_scenario(const Scenario& s, const std::vector<Observable>& extra) {
  RunResult result;
  result.scenario = s;
  result.header = csv_header(s);

  const ModelSpec model = s.to_model();
  const auto pairs = mode_pairs(s);
  const size_t n_modes = s.modes.size();

  if (s.engine.type == EngineDecl::Type::Exact) {
    const Matrix rho0 = initial_state(model.space, s.to_initial());
    std::vector<Observable> obs = extra;
    std::vector<CorrelatorSet> sets;
    for (int m : s.orders) sets.push_back(build_correlator_set(model.space, m));
    auto add_unique = [&obs](const std::string& name, const Matrix& op) {
      for (const auto& o : obs)
        if (o.name == name) return;
      obs.push_back({name, op});
    };
    for (size_t p = 0; p < pairs.size(); ++p)
      add_unique("pair_" + std::to_string(pairs[p].first) + "_" + std::to_string(pairs[p].second),
                 sets.front().pair_op(pairs[p].first, pairs[p].second));
    add_unique("N_total", sets.front().N_op);
    for (size_t k = 0; k < sets.size(); ++k)
      add_unique("J_" + std::to_string(sets[k].m), sets[k].J_op);

    IntegrateOptions opts;
    opts.leakage_bound = s.engine.leakage_bound;
    Trajectory traj = integrate(model, rho0, s.time_grid(), s.engine.tol, obs, opts);

    result.times = traj.times;
    result.leakage_max = traj.leakage_max;
    result.diagnostics = traj.diagnostics;

    const size_t n_pts = traj.times.size();
    auto real_series = [&](const std::string& name) {
      std::vector<double> v(n_pts);
      const auto& rec = traj.series(name);
      for (size_t k = 0; k < n_pts; ++k) v[k] = rec[k].real();
      return v;
    };

    result.columns.push_back(traj.times);
    std::vector<std::vector<double>> occ;
    for (size_t i = 0; i < n_modes; ++i) occ.push_back(real_series("n_" + s.modes[i].label));
    for (const auto& o : occ) result.columns.push_back(o);
    for (const auto& [i, j] : pairs) {
      const auto pair_vals =
          real_series("pair_" + std::to_string(i) + "_" + std::to_string(j));
      std::vector<double> g2(n_pts, kNaN);
      for (size_t k = 0; k < n_pts; ++k) {
        const double denom = occ[static_cast<size_t>(i)][k] + occ[static_cast<size_t>(j)][k];
        if (denom >= kCorrelatorFloor) g2[k] = pair_vals[k] / (denom * denom);
      }
      result.columns.push_back(std::move(g2));
    }
    const auto n_total = real_series("N_total");
    result.columns.push_back(n_total);
    std::vector<std::vector<double>> j_cols;
    for (int m : s.orders) j_cols.push_back(real_series("J_" + std::to_string(m)));
    for (const auto& c : j_cols) result.columns.push_back(c);
    for (size_t k = 0; k < s.orders.size(); ++k) {
      std::vector<double> g(n_pts, kNaN);
      for (size_t t = 0; t < n_pts; ++t)
        if (n_total[t] >= kCorrelatorFloor)
          g[t] = j_cols[k][t] / std::pow(n_total[t], s.orders[k]);
      result.columns.push_back(std::move(g));
    }
    result.columns.push_back(traj.leakage);
    result.trajectory = std::move(traj);
  } else {
    PPRunOptions opts;
    opts.n_traj = s.engine.n_traj;
    opts.seed = s.engine.seed;
    opts.dt = s.engine.dt / s.gamma;
    opts.orders = s.orders;
    opts.escape_radius = s.engine.escape_radius;
    opts.threads = s.engine.threads;
    opts.convergence_check = s.engine.convergence_check;
    PPEnsemble ens = pp_run(model, s.coherent_amplitudes(), s.time_grid(), opts);

    result.times = ens.times;
    result.pp_excluded = ens.excluded;
    result.diagnostics = ens.diagnostics;
    const size_t n_pts = ens.times.size();
    auto mean_series = [&](const std::string& name) {
      std::vector<double> v(n_pts);
      const auto& est = ens.stats.at(name);
      for (size_t k = 0; k < n_pts; ++k) v[k] = est.mean[k].real();
      return v;
    };
    result.columns.push_back(ens.times);
    for (size_t i = 0; i < n_modes; ++i)
      result.columns.push_back(mean_series("n_" + s.modes[i].label));
    for (const auto& [i, j] : pairs)
      result.columns.push_back(
          ens.g2_grouped.at(std::to_string(i) + "_" + std::to_string(j)));
    result.columns.push_back(mean_series("N_total"));
    for (int m : s.orders) result.columns.push_back(mean_series("J_" + std::to_string(m)));
    for (int m : s.orders) result.columns.push_back(ens.g_tot.at(m));
    result.columns.push_back(std::vector<double>(n_pts, kNaN));  // no truncation in phase space
    result.leakage_max = kNaN;
    result.ensemble = std::move(ens);
  }
  return result;
}

void write_run_output(const RunResult& result, const std::string& csv_path) {
  std::ostringstream csv;
  for (size_t c = 0; c < result.header.size(); ++c) {
    if (c) csv << ',';
    csv << result.header[c];
  }
  csv << '\n';
  const size_t n_rows = result.times.size();
  for (size_t r = 0; r < n_rows; ++r) {
    for (size_t c = 0; c < result.columns.size(); ++c) {
      if (c) csv << ',';
      csv << format_value(result.columns[c][r]);
    }
    csv << '\n';
  }
  atomic_write(csv_path, csv.str());

  nlohmann::ordered_json meta;
  meta["scenario"] = nlohmann::ordered_json::parse(render_scenario(result.scenario));
  meta["convention"] = kDissipatorConvention;
  meta["version"] = kVersion;
  meta["engine"] =
      result.scenario.engine.type == EngineDecl::Type::Exact ? "exact" : "positive_p";
  if (result.scenario.engine.type == EngineDecl::Type::PositiveP) {
    meta["seed"] = result.scenario.engine.seed;
    meta["n_traj"] = result.scenario.engine.n_traj;
    meta["excluded_trajectories"] = result.pp_excluded;
    if (result.ensemble) meta["noise_factorization"] = result.ensemble->noise_factorization;
  }
  if (!std::isnan(result.leakage_max)) meta["leakage_max"] = result.leakage_max;
  meta["diagnostics"] = result.diagnostics;
  atomic_write(metadata_path(csv_path), meta.dump(2) + "\n");
}

namespace {

ConservationReport conservation_from_values(const std::vector<double>& g, double threshold) {
  ConservationReport report;
  report.series = g;
  bool seen = false;
  bool truncated = false;
  for (size_t k = 0; k < g.size(); ++k) {
    if (std::isnan(g[k])) {
      report.floor_breached = true;
      if (seen) truncated = true;
      continue;
    }
    if (truncated) {
      report.series[k] = kNaN;
      continue;
    }
    if (!seen) {
      seen = true;
      report.first_defined = static_cast<int>(k);
    }
  }
  if (!seen) return report;
  const double ref = report.series[static_cast<size_t>(report.first_defined)];
  for (size_t k = static_cast<size_t>(report.first_defined); k < g.size(); ++k) {
    if (std::isnan(report.series[k])) continue;
    report.max_abs_dev = std::max(report.max_abs_dev, std::abs(report.series[k] - ref));
  }
  report.max_rel_dev = report.max_abs_dev / std::max(std::abs(ref), 1e-12);
  report.conserved = report.max_rel_dev < threshold;
  return report;
}

}  // namespace

ConservationReport run_conservation(const RunResult& result, int m, double threshold) {
  return conservation_from_values(result.column("g_tot_" + std::to_string(m)), threshold);
}

ResidualReport run_verify(const Scenario& s, DerivativeIdentity identity) {
  Scenario exact = s;
  exact.engine.type = EngineDecl::Type::Exact;  // verify always uses the exact engine
  const ModelSpec model = exact.to_model();
  const auto obs = identity_observables(model, identity);
  const RunResult result = run_scenario(exact, obs);
  return derivative_crosscheck(*result.trajectory, model, identity);
}

DerivativeIdentity identity_from_token(const std::string& token) {
  if (token == "eq15") return DerivativeIdentity::DriveQuartic;
  if (token == "eq16") return DerivativeIdentity::DriveOccupation;
  if (token == "eq17") return DerivativeIdentity::DriveG2;
  if (token == "eq18") return DerivativeIdentity::HopAutoQuartic;
  if (token == "eq19") return DerivativeIdentity::HopOccupation;
  if (token == "eq20") return DerivativeIdentity::HopCross;
  throw ValidationError("unknown identity token: " + token);
}

std::string identity_token(DerivativeIdentity identity) {
  switch (identity) {
    case DerivativeIdentity::DriveQuartic: return "eq15";
    case DerivativeIdentity::DriveOccupation: return "eq16";
    case DerivativeIdentity::DriveG2: return "eq17";
    case DerivativeIdentity::HopAutoQuartic: return "eq18";
    case DerivativeIdentity::HopOccupation: return "eq19";
    case DerivativeIdentity::HopCross: return "eq20";
  }
  throw ValidationError("unknown identity");
}

Scenario with_parameter(const Scenario& s, const std::string& dotted_path, double value) {
  auto doc = nlohmann::ordered_json::parse(render_scenario(s));
  nlohmann::ordered_json* node = &doc;
  std::istringstream path(dotted_path);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(path, part, '.')) parts.push_back(part);
  if (parts.empty()) throw ValidationError("empty parameter path", "cross-ref");
  for (const auto& key : parts) {
    if (node->is_array()) {
      size_t idx = 0;
      try {
        idx = std::stoul(key);
      } catch (...) {
        throw ValidationError("unknown parameter path: " + dotted_path, "cross-ref");
      }
      if (idx >= node->size())
        throw ValidationError("unknown parameter path: " + dotted_path, "cross-ref");
      node = &(*node)[idx];
    } else if (node->is_object() && node->contains(key)) {
      node = &(*node)[key];
    } else {
      throw ValidationError("unknown parameter path: " + dotted_path, "cross-ref");
    }
  }
  if (!node->is_number())
    throw ValidationError("parameter path does not address a numeric field: " + dotted_path,
                          "cross-ref");
  *node = value;
  return parse_scenario_text(doc.dump(), "<sweep>");
}

std::vector<SweepRow> run_sweep(const Scenario& s, const std::string& param,
                                const std::vector<double>& values, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  std::string param_tag = param;
  for (auto& ch : param_tag)
    if (ch == '.') ch = '_';

  std::vector<SweepRow> rows;
  for (size_t v = 0; v < values.size(); ++v) {
    Scenario variant = with_parameter(s, param, values[v]);
    variant.name = s.name + "__" + param_tag + "_" + std::to_string(v);
    const RunResult result = run_scenario(variant);
    SweepRow row;
    row.value = values[v];
    row.csv_path = (fs::path(out_dir) / (variant.name + ".csv")).string();
    write_run_output(result, row.csv_path);
    for (int m : s.orders)
      row.dev[m] = run_conservation(result, m, kConservedThreshold).max_abs_dev;
    const auto& n_col = result.column("N_total");
    row.final_n = n_col.empty() ? kNaN : n_col.back();
    rows.push_back(std::move(row));
  }

  std::ostringstream summary;
  summary << "value";
  for (int m : s.orders) summary << ",dev_g_tot_" << m;
  summary << ",final_N\n";
  for (const auto& row : rows) {
    summary << format_value(row.value);
    for (int m : s.orders) summary << ',' << format_value(row.dev.at(m));
    summary << ',' << format_value(row.final_n) << '\n';
  }
  atomic_write((fs::path(out_dir) / "summary.csv").string(), summary.str());
  return rows;
}

}  // namespace qcorr
