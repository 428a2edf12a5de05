#pragma once

// Experiment harness behind the command-line tool: scenario files, seeded
// multi-trial runs, correlation sweeps and CSV tables.

#include "ldinfomax/datagen.hpp"
#include "ldinfomax/eval.hpp"
#include "ldinfomax/ica.hpp"
#include "ldinfomax/io.hpp"
#include "ldinfomax/solver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace ldinfomax {

enum class Algo { LdInfomax, Ica };

inline const char* to_string(Algo a) { return a == Algo::LdInfomax ? "ld_infomax" : "ica"; }
inline Algo parse_algo(const std::string& s) {
  if (s == "ld_infomax") return Algo::LdInfomax;
  if (s == "ica") return Algo::Ica;
  throw std::invalid_argument("unknown algorithm '" + s + "' (expected ld_infomax or ica)");
}

struct ExperimentConfig {
  ScenarioConfig scenario;
  SolverConfig solver;
  IcaConfig ica;
  Algo algo = Algo::LdInfomax;
  std::vector<Algo> sweep_algos{Algo::LdInfomax, Algo::Ica};
  int trials = 1;
  std::uint64_t master_seed = 1;
  std::vector<double> rho_grid{0.0, 0.2, 0.4, 0.6};
  std::string output_dir = "out";
  int threads = 0;  // 0: hardware concurrency

  void validate() const {
    detail::require(trials >= 1, "experiment: trials must be >= 1");
    scenario.validate();
    solver.validate();
    for (double rho : rho_grid) toeplitz_correlation(scenario.r, rho);
  }

  [[nodiscard]] std::uint64_t trial_seed(int trial) const {
    return master_seed + static_cast<std::uint64_t>(trial);
  }
};

namespace detail {

inline std::string join_doubles(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + io::format_double(v[i]);
  return s;
}

inline std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& f : io::split(s, ',')) {
    if (!f.empty()) out.push_back(io::parse_double(f));
  }
  return out;
}

inline std::string format_groups(const std::vector<std::vector<int>>& groups) {
  std::string s;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (g) s += ";";
    for (std::size_t k = 0; k < groups[g].size(); ++k) s += (k ? " " : "") + std::to_string(groups[g][k]);
  }
  return s;
}

inline std::vector<std::vector<int>> parse_groups(const std::string& s) {
  std::vector<std::vector<int>> groups;
  for (const auto& part : io::split(s, ';')) {
    if (part.empty()) continue;
    std::vector<int> g;
    std::istringstream is(part);
    int idx = 0;
    while (is >> idx) g.push_back(idx);
    if (!is.eof()) throw std::runtime_error("bad l1 group list '" + s + "'");
    groups.push_back(std::move(g));
  }
  return groups;
}

}  // namespace detail

/// Serializes every setting; the result reproduces the experiment exactly.
inline io::KeyValue to_key_value(const ExperimentConfig& c) {
  io::KeyValue kv;
  const auto& s = c.scenario;
  kv.set("scenario.r", s.r);
  kv.set("scenario.M", s.M);
  kv.set("scenario.N", s.N);
  kv.set("scenario.rho", s.rho);
  kv.set("scenario.dof", s.dof);
  kv.set("scenario.snr_db", s.snr_db ? io::format_double(*s.snr_db) : std::string("none"));
  kv.set("scenario.polytope", s.polytope.name);
  if (s.polytope.name == "custom") {
    std::string doms;
    for (std::size_t i = 0; i < s.polytope.domains.size(); ++i) {
      doms += (i ? "," : "") + std::string(to_string(s.polytope.domains[i]));
    }
    kv.set("scenario.polytope.domains", doms);
    kv.set("scenario.polytope.groups", detail::format_groups(s.polytope.l1_groups));
  }
  kv.set("scenario.source_mode", std::string(to_string(s.source_mode)));
  kv.set("scenario.placement", std::string(to_string(s.placement)));

  const auto& v = c.solver;
  kv.set("solver.epsilon", v.epsilon);
  kv.set("solver.mu0", v.mu0);
  kv.set("solver.iterations", v.iterations);
  kv.set("solver.schedule", std::string(to_string(v.schedule)));
  kv.set("solver.record_every", v.record_every);
  kv.set("solver.init", std::string(to_string(v.init)));
  kv.set("solver.projection.max_iter", v.projection.max_iter);
  kv.set("solver.projection.tol", v.projection.tol);

  kv.set("ica.learning_rate", c.ica.learning_rate);
  kv.set("ica.max_iter", c.ica.max_iter);
  kv.set("ica.tol", c.ica.tol);
  kv.set("ica.n_subgauss", c.ica.n_subgauss);
  kv.set("ica.block_size", c.ica.block_size);

  kv.set("experiment.algo", std::string(to_string(c.algo)));
  std::string algos;
  for (std::size_t i = 0; i < c.sweep_algos.size(); ++i) algos += (i ? "," : "") + std::string(to_string(c.sweep_algos[i]));
  kv.set("experiment.sweep_algos", algos);
  kv.set("experiment.trials", c.trials);
  kv.set("experiment.seed", c.master_seed);
  kv.set("experiment.rho_grid", detail::join_doubles(c.rho_grid));
  kv.set("experiment.output_dir", c.output_dir);
  return kv;
}

/// Reads a config; missing keys keep the defaults of `base`.
inline ExperimentConfig from_key_value(const io::KeyValue& kv, ExperimentConfig base = {}) {
  static const char* const known[] = {
      "scenario.r", "scenario.M", "scenario.N", "scenario.rho", "scenario.dof", "scenario.snr_db",
      "scenario.polytope", "scenario.polytope.domains", "scenario.polytope.groups",
      "scenario.source_mode", "scenario.placement", "solver.epsilon", "solver.mu0",
      "solver.iterations", "solver.schedule", "solver.record_every", "solver.init",
      "solver.projection.max_iter", "solver.projection.tol", "ica.learning_rate", "ica.max_iter",
      "ica.tol", "ica.n_subgauss", "ica.block_size", "experiment.algo", "experiment.sweep_algos",
      "experiment.trials", "experiment.seed", "experiment.rho_grid", "experiment.output_dir"};
  for (const auto& [k, _] : kv.values()) {
    if (std::find_if(std::begin(known), std::end(known), [&](const char* n) { return k == n; }) ==
        std::end(known)) {
      throw std::runtime_error("unknown config key '" + k + "'");
    }
  }

  ExperimentConfig c = std::move(base);
  auto& s = c.scenario;
  s.r = static_cast<int>(kv.get_int("scenario.r", s.r));
  s.M = static_cast<int>(kv.get_int("scenario.M", s.M));
  s.N = static_cast<int>(kv.get_int("scenario.N", s.N));
  s.rho = kv.get("scenario.rho", s.rho);
  s.dof = kv.get("scenario.dof", s.dof);
  if (kv.has("scenario.snr_db")) {
    const std::string snr = kv.get("scenario.snr_db", std::string("none"));
    if (snr == "none" || snr == "inf") {
      s.snr_db.reset();
    } else {
      s.snr_db = io::parse_double(snr);
    }
  }
  const std::string poly = kv.get("scenario.polytope", s.polytope.name);
  if (poly == "custom") {
    std::vector<Domain> doms;
    for (const auto& d : io::split(kv.get("scenario.polytope.domains", std::string()), ',')) {
      if (!d.empty()) doms.push_back(parse_domain(d));
    }
    s.polytope = PolytopeSpec::custom(std::move(doms),
                                      detail::parse_groups(kv.get("scenario.polytope.groups", std::string())));
  } else {
    s.polytope = PolytopeSpec::from_name(poly, s.r);
  }
  s.source_mode = parse_source_mode(kv.get("scenario.source_mode", std::string(to_string(s.source_mode))));
  s.placement = parse_placement_mode(kv.get("scenario.placement", std::string(to_string(s.placement))));

  auto& v = c.solver;
  v.epsilon = kv.get("solver.epsilon", v.epsilon);
  v.mu0 = kv.get("solver.mu0", v.mu0);
  v.iterations = kv.get_int("solver.iterations", v.iterations);
  v.schedule = parse_schedule(kv.get("solver.schedule", std::string(to_string(v.schedule))));
  v.record_every = kv.get_int("solver.record_every", v.record_every);
  v.init = parse_init(kv.get("solver.init", std::string(to_string(v.init))));
  v.projection.max_iter = static_cast<int>(kv.get_int("solver.projection.max_iter", v.projection.max_iter));
  v.projection.tol = kv.get("solver.projection.tol", v.projection.tol);

  c.ica.learning_rate = kv.get("ica.learning_rate", c.ica.learning_rate);
  c.ica.max_iter = static_cast<int>(kv.get_int("ica.max_iter", c.ica.max_iter));
  c.ica.tol = kv.get("ica.tol", c.ica.tol);
  c.ica.n_subgauss = static_cast<int>(kv.get_int("ica.n_subgauss", c.ica.n_subgauss));
  c.ica.block_size = static_cast<int>(kv.get_int("ica.block_size", c.ica.block_size));

  c.algo = parse_algo(kv.get("experiment.algo", std::string(to_string(c.algo))));
  if (kv.has("experiment.sweep_algos")) {
    c.sweep_algos.clear();
    for (const auto& a : io::split(kv.get("experiment.sweep_algos", std::string()), ',')) {
      if (!a.empty()) c.sweep_algos.push_back(parse_algo(a));
    }
  }
  c.trials = static_cast<int>(kv.get_int("experiment.trials", c.trials));
  c.master_seed = kv.get_u64("experiment.seed", c.master_seed);
  if (kv.has("experiment.rho_grid")) {
    c.rho_grid = detail::parse_double_list(kv.get("experiment.rho_grid", std::string()));
  }
  c.output_dir = kv.get("experiment.output_dir", c.output_dir);
  return c;
}

// ---------------------------------------------------------------------------
// Trials

struct TrialOutcome {
  int trial = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string message;
  double final_sinr_db = 0.0;
  double final_objective = 0.0;
  std::vector<long> grid;             // iterations (LD) or sweeps (ICA)
  std::vector<double> sinr_series;    // SINR at each grid point
};

inline ScenarioConfig scenario_for_trial(const ExperimentConfig& cfg, std::uint64_t seed) {
  ScenarioConfig sc = cfg.scenario;
  sc.seed = seed;
  return sc;
}

inline TrialOutcome run_ld_trial(const ExperimentConfig& cfg, const Scenario& sc, TrialOutcome out) {
  SolverConfig sv = cfg.solver;
  sv.seed = out.seed;
  const TruthReference truth{sc.S_g, reflection_center(cfg.scenario.polytope)};
  const RunResult res = run(sc.Y, cfg.scenario.polytope, sv, &truth);
  if (res.status != RunStatus::Completed) {
    out.message = "diverged: " + res.message;
    return out;
  }
  for (const auto& pt : res.state.trajectory) {
    out.grid.push_back(pt.iteration);
    out.sinr_series.push_back(*pt.sinr_db);
  }
  out.final_sinr_db = out.sinr_series.back();
  out.final_objective = res.state.objective;
  out.ok = true;
  return out;
}

inline double ica_sinr(const Matrix& s_est, const Matrix& s_g) {
  return sinr_db(affine_calibrate(s_est, s_g), s_g);
}

inline TrialOutcome run_ica_trial(const ExperimentConfig& cfg, const Scenario& sc, TrialOutcome out) {
  IcaConfig ic = cfg.ica;
  ic.seed = out.seed;
  const Whitening w = whiten(sc.Y, cfg.scenario.r);
  const IcaResult res = ica_infomax(w.Z, ic);
  const Matrix s_est = res.W * w.Z;
  out.final_sinr_db = ica_sinr(s_est, sc.S_g);
  out.final_objective = std::nan("");
  out.grid = {static_cast<long>(res.sweeps)};
  out.sinr_series = {out.final_sinr_db};
  out.ok = true;
  return out;
}

inline TrialOutcome run_trial(const ExperimentConfig& cfg, Algo algo, int trial) {
  TrialOutcome out;
  out.trial = trial;
  out.seed = cfg.trial_seed(trial);
  try {
    const Scenario sc = generate_scenario(scenario_for_trial(cfg, out.seed));
    return algo == Algo::LdInfomax ? run_ld_trial(cfg, sc, out) : run_ica_trial(cfg, sc, out);
  } catch (const std::exception& e) {
    out.ok = false;
    out.message = e.what();
    return out;
  }
}

/// Runs all trials, concurrently when threads allow; results are indexed
/// by trial so the output does not depend on scheduling.
inline std::vector<TrialOutcome> run_trials(const ExperimentConfig& cfg, Algo algo) {
  cfg.validate();
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned workers = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads) : hw;
  std::vector<TrialOutcome> results(static_cast<std::size_t>(cfg.trials));
  if (workers <= 1 || cfg.trials == 1) {
    for (int t = 0; t < cfg.trials; ++t) results[static_cast<std::size_t>(t)] = run_trial(cfg, algo, t);
    return results;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < std::min<unsigned>(workers, static_cast<unsigned>(cfg.trials)); ++w) {
    pool.emplace_back([&] {
      for (int t = next++; t < cfg.trials; t = next++) {
        results[static_cast<std::size_t>(t)] = run_trial(cfg, algo, t);
      }
    });
  }
  for (auto& th : pool) th.join();
  return results;
}

// ---------------------------------------------------------------------------
// Tables

/// Mean/std SINR curve over the successful trials.  ICA trials stop at
/// different sweeps; each trial's last value is carried forward to the
/// longest grid.
inline CurveSummary convergence_curve(const std::vector<TrialOutcome>& trials) {
  std::vector<const TrialOutcome*> ok;
  for (const auto& t : trials) {
    if (t.ok) ok.push_back(&t);
  }
  detail::require(!ok.empty(), "convergence_curve: every trial failed");
  const TrialOutcome* longest = *std::max_element(ok.begin(), ok.end(), [](auto* a, auto* b) {
    return a->grid.back() < b->grid.back();
  });
  std::vector<long> grid = longest->grid;
  std::vector<std::vector<double>> series;
  for (const auto* t : ok) {
    if (t->grid.size() == grid.size() && t->grid == grid) {
      series.push_back(t->sinr_series);
      continue;
    }
    // Carry forward onto the common grid.
    std::vector<double> s(grid.size());
    std::size_t k = 0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      while (k + 1 < t->grid.size() && t->grid[k + 1] <= grid[g]) ++k;
      s[g] = t->sinr_series[k];
    }
    series.push_back(std::move(s));
  }
  return aggregate(series, grid);
}

inline void write_convergence_csv(std::ostream& os, const CurveSummary& c) {
  os << "iteration,sinr_mean_db,sinr_std_db\n";
  for (std::size_t i = 0; i < c.grid.size(); ++i) {
    os << c.grid[i] << ',' << io::format_double(c.mean[i]) << ',' << io::format_double(c.stddev[i]) << '\n';
  }
}

inline void write_trials_csv(std::ostream& os, const std::vector<TrialOutcome>& trials) {
  os << "trial,seed,status,final_sinr_db,final_objective\n";
  for (const auto& t : trials) {
    std::string status = t.ok ? "ok" : "failed: " + t.message;
    std::replace(status.begin(), status.end(), ',', ';');
    os << t.trial << ',' << t.seed << ',' << status << ','
       << (t.ok ? io::format_double(t.final_sinr_db) : "nan") << ','
       << (t.ok ? io::format_double(t.final_objective) : "nan") << '\n';
  }
}

struct SweepRow {
  double rho = 0.0;
  Algo algo = Algo::LdInfomax;
  double sinr_mean_db = 0.0;
  double sinr_std_db = 0.0;
  std::vector<TrialOutcome> trials;
};

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "rho,algo,sinr_mean_db,sinr_std_db\n";
  for (const auto& r : rows) {
    os << io::format_double(r.rho) << ',' << to_string(r.algo) << ',' << io::format_double(r.sinr_mean_db)
       << ',' << io::format_double(r.sinr_std_db) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Commands

struct GenSummary {
  int r = 0, M = 0, N = 0;
  bool feasible = false;
  std::optional<double> realized_snr_db;
  double acceptance_rate = 1.0;
};

inline void print_summary(std::ostream& os, const GenSummary& g) {
  os << "scenario: r=" << g.r << " M=" << g.M << " N=" << g.N << '\n'
     << "sources feasible: " << (g.feasible ? "yes" : "NO") << '\n'
     << "acceptance rate: " << io::format_double(g.acceptance_rate) << '\n'
     << "realized SNR (dB): " << (g.realized_snr_db ? io::format_double(*g.realized_snr_db) : "noiseless")
     << '\n';
}

/// Writes S_g.csv, H_g.csv, Y.csv and config.kv into the output directory.
inline GenSummary cmd_gen(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::filesystem::path dir(cfg.output_dir);
  std::filesystem::create_directories(dir);
  const ScenarioConfig sc_cfg = scenario_for_trial(cfg, cfg.master_seed);
  const Scenario sc = generate_scenario(sc_cfg);
  io::write_matrix_csv(dir / "S_g.csv", sc.S_g);
  io::write_matrix_csv(dir / "H_g.csv", sc.H_g);
  io::write_matrix_csv(dir / "Y.csv", sc.Y);
  to_key_value(cfg).save(dir / "config.kv");

  GenSummary g{cfg.scenario.r, cfg.scenario.M, cfg.scenario.N,
               columns_contained(cfg.scenario.polytope, sc.S_g, 1e-9), std::nullopt, sc.acceptance_rate};
  if (cfg.scenario.snr_db) g.realized_snr_db = realized_snr_db(sc.H_g * sc.S_g, sc.Y);
  return g;
}

struct RunOutput {
  std::vector<TrialOutcome> trials;
  CurveSummary curve;
};

/// Writes convergence.csv, trials.csv and config.kv.
inline RunOutput cmd_run(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::filesystem::path dir(cfg.output_dir);
  std::filesystem::create_directories(dir);
  RunOutput out;
  out.trials = run_trials(cfg, cfg.algo);
  {
    std::ofstream os(dir / "trials.csv");
    write_trials_csv(os, out.trials);
  }
  to_key_value(cfg).save(dir / "config.kv");
  out.curve = convergence_curve(out.trials);
  std::ofstream os(dir / "convergence.csv");
  write_convergence_csv(os, out.curve);
  return out;
}

inline SweepRow summarize_sweep_point(double rho, Algo algo, std::vector<TrialOutcome> trials) {
  SweepRow row{rho, algo, 0.0, 0.0, std::move(trials)};
  std::vector<std::vector<double>> finals;
  for (const auto& t : row.trials) {
    if (t.ok) finals.push_back({t.final_sinr_db});
  }
  if (finals.empty()) {
    row.sinr_mean_db = row.sinr_std_db = std::nan("");
    return row;
  }
  const CurveSummary s = aggregate(finals, {0});
  row.sinr_mean_db = s.mean[0];
  row.sinr_std_db = s.stddev[0];
  return row;
}

/// Writes sweep.csv, sweep_trials.csv and config.kv.
inline std::vector<SweepRow> cmd_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  detail::require(!cfg.rho_grid.empty(), "sweep: empty rho grid");
  detail::require(!cfg.sweep_algos.empty(), "sweep: no algorithms");
  const std::filesystem::path dir(cfg.output_dir);
  std::filesystem::create_directories(dir);
  std::vector<SweepRow> rows;
  for (double rho : cfg.rho_grid) {
    ExperimentConfig point = cfg;
    point.scenario.rho = rho;
    for (Algo a : cfg.sweep_algos) rows.push_back(summarize_sweep_point(rho, a, run_trials(point, a)));
  }
  {
    std::ofstream os(dir / "sweep.csv");
    write_sweep_csv(os, rows);
  }
  {
    std::ofstream os(dir / "sweep_trials.csv");
    os << "rho,algo,trial,seed,status,final_sinr_db\n";
    for (const auto& r : rows) {
      for (const auto& t : r.trials) {
        std::string status = t.ok ? "ok" : "failed: " + t.message;
        std::replace(status.begin(), status.end(), ',', ';');
        os << io::format_double(r.rho) << ',' << to_string(r.algo) << ',' << t.trial << ',' << t.seed
           << ',' << status << ',' << (t.ok ? io::format_double(t.final_sinr_db) : "nan") << '\n';
      }
    }
  }
  to_key_value(cfg).save(dir / "config.kv");
  return rows;
}

inline void write_eval_report_csv(std::ostream& os, const EvaluationReport& rep) {
  os << "estimate_row,truth_row,sign,abs_corr,mse,sinr_db\n";
  for (std::size_t i = 0; i < rep.alignment.perm.size(); ++i) {
    os << i << ',' << rep.alignment.perm[i] << ',' << rep.alignment.signs[i] << ','
       << io::format_double(rep.per_source_corr(static_cast<Index>(i))) << ','
       << io::format_double(rep.mse) << ',' << io::format_double(rep.sinr_db) << '\n';
  }
}

/// Evaluates an estimate file against a truth file.
inline EvaluationReport cmd_eval(const std::filesystem::path& estimate,
                                 const std::filesystem::path& truth,
                                 const std::optional<Vector>& center = std::nullopt) {
  const Matrix est = io::read_matrix_csv(estimate);
  const Matrix ref = io::read_matrix_csv(truth);
  if (est.rows() != ref.rows() || est.cols() != ref.cols()) {
    throw std::invalid_argument("eval: estimate is " + std::to_string(est.rows()) + "x" +
                                std::to_string(est.cols()) + " but truth is " +
                                std::to_string(ref.rows()) + "x" + std::to_string(ref.cols()));
  }
  return evaluate(est, ref, center);
}

}  // namespace ldinfomax
